#include "enrichkit/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <memory>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "enrichkit/cache.hpp"
#include "enrichkit/concepts.hpp"
#include "enrichkit/connectors.hpp"
#include "enrichkit/errors.hpp"
#include "enrichkit/evaluation.hpp"
#include "enrichkit/http.hpp"
#include "enrichkit/jsonl.hpp"
#include "enrichkit/model.hpp"
#include "enrichkit/pipeline.hpp"
#include "enrichkit/run_config.hpp"
#include "enrichkit/similarity.hpp"
#include "enrichkit/wikify.hpp"

namespace enrichkit {

namespace {

/// Flag-layer state shared by the subcommands. Only options the user
/// actually passed end up with a value, so the layer stays silent about
/// everything else and precedence resolution works unmodified.
struct common_flags {
    std::optional<std::string> config_file;
    config_layer layer;
    bool offline_flag = false;
    bool live_flag = false;
};

void add_common_options(CLI::App& cmd, common_flags& cf) {
    cmd.add_option("--config", cf.config_file, "JSON config file");
    cmd.add_option("--cache-dir", cf.layer.cache_dir, "Response cache directory");
    auto* offline = cmd.add_flag("--offline", cf.offline_flag, "Serve every query from the cache");
    auto* live = cmd.add_flag("--live", cf.live_flag, "Allow network fetches on cache misses");
    offline->excludes(live);
    live->excludes(offline);
    cmd.add_option("--classmap", cf.layer.classification_map,
                   "JSON map from upstream class names to person/place/organization/other");
    cmd.add_option("--media-endpoint", cf.layer.media_endpoint, "Media events service URL");
    cmd.add_option("--dataset-endpoint", cf.layer.dataset_endpoint, "Dataset catalog service URL");
    cmd.add_option("--kg-endpoint", cf.layer.kg_endpoint, "Knowledge graph service URL");
    cmd.add_option("--wikifier-endpoint", cf.layer.wikifier_endpoint, "Entity linking service URL");
}

run_config resolve_from(common_flags& cf) {
    if (cf.offline_flag) cf.layer.offline = true;
    if (cf.live_flag) cf.layer.offline = false;
    const config_layer file_layer =
        cf.config_file ? layer_from_json_file(*cf.config_file) : config_layer{};
    return resolve(cf.layer, layer_from_environment(), file_layer);
}

classification_map load_classes(const run_config& rc) {
    if (rc.classification_map) return classification_map::load(*rc.classification_map);
    return classification_map::defaults();
}

connector_options connector_options_for(const run_config& rc, const std::string& endpoint,
                                        const std::string& api_key) {
    connector_options opt;
    opt.offline = rc.pipeline.offline;
    opt.endpoint = endpoint;
    opt.api_key = api_key;
    opt.min_salience = rc.pipeline.min_salience;
    opt.excluded_classes = rc.pipeline.excluded_classes;
    return opt;
}

std::vector<explanation_record> load_corpus(const std::filesystem::path& file) {
    std::vector<explanation_record> records;
    for_each_jsonl_line(file, [&](std::size_t line, const nlohmann::json& j) {
        try {
            records.push_back(explanation_record_from_json(j));
        } catch (const error& e) {
            throw decode_error(file.string() + ":" + std::to_string(line) + ": " + e.what());
        }
    });
    return records;
}

std::vector<enriched_explanation> load_enriched(const std::filesystem::path& file) {
    std::vector<enriched_explanation> records;
    for_each_jsonl_line(file, [&](std::size_t line, const nlohmann::json& j) {
        try {
            records.push_back(enriched_explanation_from_json(j));
        } catch (const error& e) {
            throw decode_error(file.string() + ":" + std::to_string(line) + ": " + e.what());
        }
    });
    return records;
}

/// Default sidecar path: out.jsonl -> out.errors.jsonl.
std::filesystem::path default_errors_path(std::filesystem::path out) {
    std::filesystem::path sidecar = out;
    sidecar.replace_extension();
    sidecar += ".errors.jsonl";
    return sidecar;
}

int cmd_enrich(const run_config& rc, const std::string& input, const std::string& mapping_file,
               const std::string& out_file, const std::optional<std::string>& errors_file,
               bool fail_fast, std::ostream& out) {
    const keyword_concept_mapping mapping = keyword_concept_mapping::load_jsonl(mapping_file);
    const std::vector<explanation_record> records = load_corpus(input);

    cache_store cache(rc.cache_dir);
    concept_catalog catalog;
    for (const auto& entry : mapping.entries()) {
        for (const auto& item : entry.concepts) catalog.observe(item);
    }

    std::unique_ptr<live_http_client> http;
    if (!rc.pipeline.offline) http = std::make_unique<live_http_client>();

    wikifier_options wopt;
    wopt.offline = rc.pipeline.offline;
    wopt.endpoint = rc.wikifier_endpoint;
    cached_wikifier_client wikifier(cache, load_classes(rc), wopt, http.get());

    media_event_connector media(cache, wikifier, catalog,
                                connector_options_for(rc, rc.media_endpoint, rc.ee_api_key),
                                http.get());
    dataset_catalog_connector datasets(cache, wikifier, catalog,
                                       connector_options_for(rc, rc.dataset_endpoint, std::string()),
                                       http.get());
    knowledge_graph_connector kg(cache, wikifier, catalog,
                                 connector_options_for(rc, rc.kg_endpoint, rc.kg_api_key),
                                 http.get());

    const jaccard_ranker ranker;
    const enrichment_pipeline pipeline(media, datasets, kg, catalog, ranker);

    corpus_options copts;
    copts.fail_fast = fail_fast;
    copts.parallelism = rc.parallelism;
    const corpus_result result = pipeline.enrich_corpus(records, mapping, rc.pipeline, copts);

    {
        jsonl_writer writer(out_file);
        for (const auto& enriched : result.enriched) writer.write(to_json(enriched));
        writer.close();
    }
    if (!result.errors.empty()) {
        jsonl_writer writer(errors_file ? std::filesystem::path(*errors_file)
                                        : default_errors_path(out_file));
        for (const auto& failure : result.errors) {
            writer.write(nlohmann::json{{"explanation_id", failure.explanation_id},
                                        {"error", failure.message}});
        }
        writer.close();
    }

    out << "enriched " << result.enriched.size() << " of " << records.size() << " records";
    if (!result.errors.empty()) out << " (" << result.errors.size() << " failed)";
    out << "\n";
    return result.errors.empty() ? exit_ok : exit_partial;
}

int cmd_evaluate(const run_config& rc, const std::string& enriched_file,
                 const std::string& judgments_file, const std::vector<int>& ks, bool lenient,
                 const std::optional<std::string>& report_file,
                 const std::optional<std::string>& table_file, std::ostream& out) {
    const std::vector<enriched_explanation> enriched = load_enriched(enriched_file);
    const judgment_set judgments = judgment_set::load_jsonl(judgments_file);

    const judgment_mode mode =
        (lenient || !rc.strict_judgments) ? judgment_mode::lenient : judgment_mode::strict;
    const evaluation_report report = build_report(enriched, judgments, ks, mode);

    const std::string table = render_report_table(report);
    out << table;

    if (report_file) {
        jsonl_writer writer(*report_file);
        writer.write(to_json(report));
        writer.close();
    }
    if (table_file) {
        const std::string tmp = *table_file + ".tmp";
        std::ofstream raw(tmp, std::ios::binary | std::ios::trunc);
        if (!raw) throw io_error("cannot open '" + tmp + "' for writing");
        raw << table;
        raw.close();
        if (!raw) throw io_error("write failure on '" + tmp + "'");
        std::filesystem::rename(tmp, *table_file);
    }
    return exit_ok;
}

int cmd_wikify(const run_config& rc, const std::optional<std::string>& text_arg,
               double min_salience, std::istream& in, std::ostream& out, std::ostream& err) {
    std::string text;
    if (text_arg) {
        text = *text_arg;
    } else {
        std::ostringstream buffer;
        buffer << in.rdbuf();
        text = buffer.str();
        while (!text.empty() && (text.back() == '\n' || text.back() == '\r')) text.pop_back();
    }
    if (text.empty()) {
        err << "wikify needs --text or non-empty stdin\n";
        return exit_usage;
    }

    cache_store cache(rc.cache_dir);
    std::unique_ptr<live_http_client> http;
    if (!rc.pipeline.offline) http = std::make_unique<live_http_client>();

    wikifier_options wopt;
    wopt.offline = rc.pipeline.offline;
    wopt.endpoint = rc.wikifier_endpoint;
    cached_wikifier_client client(cache, load_classes(rc), wopt, http.get());

    for (const auto& annotation : wikify(client, text, min_salience)) {
        char salience[32];
        std::snprintf(salience, sizeof(salience), "%.3f", annotation.linked.salience);
        out << annotation.linked.concept_id << '\t' << annotation.linked.label << '\t'
            << to_string(annotation.linked.classification) << '\t' << salience << '\n';
    }
    return exit_ok;
}

int cmd_cache_stats(const run_config& rc, std::ostream& out) {
    cache_store cache(rc.cache_dir);
    for (const auto& [bucket, count] : cache.stats()) {
        out << bucket << '\t' << count << '\n';
    }
    return exit_ok;
}

int cmd_cache_clear(const run_config& rc, const std::optional<std::string>& source,
                    std::ostream& out) {
    cache_store cache(rc.cache_dir);
    std::size_t removed = 0;
    if (source) {
        removed = cache.clear(*source);
    } else {
        for (const char* bucket : {"media_event", "dataset", "kg_entity", "wikifier"}) {
            removed += cache.clear(bucket);
        }
    }
    out << "removed " << removed << " entries\n";
    return exit_ok;
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
            std::ostream& err) {
    CLI::App app{"Forecast-explanation enrichment toolkit"};
    app.require_subcommand(1);

    // enrich
    auto* enrich_cmd = app.add_subcommand("enrich", "Enrich an explanation corpus");
    common_flags enrich_cf;
    std::string enrich_input;
    std::string enrich_mapping;
    std::string enrich_out = "enriched.jsonl";
    std::optional<std::string> enrich_errors;
    bool fail_fast = false;
    enrich_cmd->add_option("--input", enrich_input, "Explanation corpus (jsonl)")->required();
    enrich_cmd->add_option("--mapping", enrich_mapping, "Keyword-to-concept mapping (jsonl)")->required();
    enrich_cmd->add_option("--out", enrich_out, "Output file (jsonl)");
    enrich_cmd->add_option("--errors", enrich_errors, "Failure sidecar path");
    enrich_cmd->add_flag("--fail-fast", fail_fast, "Abort on the first failing record");
    enrich_cmd->add_option("--keyword-cutoff", enrich_cf.layer.keyword_cutoff,
                           "Leading keywords used for reference concepts")
        ->check(CLI::PositiveNumber);
    enrich_cmd->add_option("--media-limit", enrich_cf.layer.media_limit)->check(CLI::PositiveNumber);
    enrich_cmd->add_option("--dataset-limit", enrich_cf.layer.dataset_limit)->check(CLI::PositiveNumber);
    enrich_cmd->add_option("--kg-limit", enrich_cf.layer.kg_limit)->check(CLI::PositiveNumber);
    enrich_cmd->add_option("--top-n", enrich_cf.layer.top_n, "Media entries feeding emergent concepts")
        ->check(CLI::PositiveNumber);
    enrich_cmd->add_option("--max-m", enrich_cf.layer.max_m, "Emergent concepts kept")
        ->check(CLI::PositiveNumber);
    enrich_cmd->add_option("--min-salience", enrich_cf.layer.min_salience)
        ->check(CLI::Range(0.0, 1.0));
    bool kg_emergent_only = false;
    enrich_cmd->add_flag("--kg-emergent-only", kg_emergent_only,
                         "Query the knowledge graph with emergent concepts only");
    enrich_cmd->add_option("--parallelism", enrich_cf.layer.parallelism)->check(CLI::PositiveNumber);
    add_common_options(*enrich_cmd, enrich_cf);

    // evaluate
    auto* evaluate_cmd = app.add_subcommand("evaluate", "Score an enriched corpus against judgments");
    common_flags evaluate_cf;
    std::string eval_enriched;
    std::string eval_judgments;
    std::vector<int> eval_ks{1, 3};
    bool lenient = false;
    std::optional<std::string> report_file;
    std::optional<std::string> table_file;
    evaluate_cmd->add_option("--enriched", eval_enriched, "Enriched corpus (jsonl)")->required();
    evaluate_cmd->add_option("--judgments", eval_judgments, "Relevance judgments (jsonl)")->required();
    evaluate_cmd->add_option("--k", eval_ks, "Cutoffs, comma separated")
        ->delimiter(',')
        ->check(CLI::PositiveNumber);
    evaluate_cmd->add_flag("--lenient", lenient, "Treat unjudged entries as not relevant");
    evaluate_cmd->add_option("--report", report_file, "Write the JSON report here");
    evaluate_cmd->add_option("--table", table_file, "Write the rendered table here");
    add_common_options(*evaluate_cmd, evaluate_cf);

    // wikify
    auto* wikify_cmd = app.add_subcommand("wikify", "Annotate text with linked concepts");
    common_flags wikify_cf;
    std::optional<std::string> wikify_text;
    double wikify_min_salience = 0.0;
    wikify_cmd->add_option("--text", wikify_text, "Text to annotate (stdin when omitted)");
    wikify_cmd->add_option("--min-salience", wikify_min_salience, "Hide annotations below this")
        ->check(CLI::Range(0.0, 1.0));
    add_common_options(*wikify_cmd, wikify_cf);

    // cache
    auto* cache_cmd = app.add_subcommand("cache", "Inspect or prune the response cache");
    cache_cmd->require_subcommand(1);
    common_flags cache_cf;
    auto* stats_cmd = cache_cmd->add_subcommand("stats", "Entry counts per source");
    auto* clear_cmd = cache_cmd->add_subcommand("clear", "Remove cached entries");
    std::optional<std::string> clear_source;
    clear_cmd->add_option("--source", clear_source, "Restrict to one source bucket")
        ->check(CLI::IsMember({"media_event", "dataset", "kg_entity", "wikifier"}));
    add_common_options(*stats_cmd, cache_cf);
    add_common_options(*clear_cmd, cache_cf);

    try {
        std::vector<const char*> argv;
        argv.reserve(args.size() + 1);
        argv.push_back("enrichkit");
        for (const auto& arg : args) argv.push_back(arg.c_str());
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return exit_ok;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return exit_ok;
    } catch (const CLI::ParseError& e) {
        err << e.what() << "\n";
        return exit_usage;
    }

    try {
        if (enrich_cmd->parsed()) {
            if (kg_emergent_only) enrich_cf.layer.kg_emergent_only = true;
            const run_config rc = resolve_from(enrich_cf);
            return cmd_enrich(rc, enrich_input, enrich_mapping, enrich_out, enrich_errors,
                              fail_fast, out);
        }
        if (evaluate_cmd->parsed()) {
            if (lenient) evaluate_cf.layer.strict_judgments = false;
            const run_config rc = resolve_from(evaluate_cf);
            return cmd_evaluate(rc, eval_enriched, eval_judgments, eval_ks, lenient, report_file,
                                table_file, out);
        }
        if (wikify_cmd->parsed()) {
            const run_config rc = resolve_from(wikify_cf);
            return cmd_wikify(rc, wikify_text, wikify_min_salience, in, out, err);
        }
        if (cache_cmd->parsed()) {
            const run_config rc = resolve_from(cache_cf);
            if (stats_cmd->parsed()) return cmd_cache_stats(rc, out);
            if (clear_cmd->parsed()) return cmd_cache_clear(rc, clear_source, out);
        }
    } catch (const error& e) {
        err << "error: " << e.what() << "\n";
        return exit_fatal;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return exit_fatal;
    }
    err << "no command selected\n";
    return exit_usage;
}

} // namespace enrichkit
