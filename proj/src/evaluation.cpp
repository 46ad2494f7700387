#include "enrichkit/evaluation.hpp"

#include <algorithm>
#include <cstdio>

#include <nlohmann/json.hpp>

#include "enrichkit/errors.hpp"
#include "enrichkit/jsonl.hpp"

namespace enrichkit {

namespace {

constexpr std::array<report_section, 4> k_sections = {
    report_section::media_events,
    report_section::media_keywords_concepts,
    report_section::datasets,
    report_section::kg,
};

const nlohmann::json& require_field(const nlohmann::json& j, const char* name) {
    if (!j.is_object()) throw decode_error("expected a JSON object");
    auto it = j.find(name);
    if (it == j.end()) throw decode_error(std::string("missing field '") + name + "'");
    return *it;
}

std::string require_string(const nlohmann::json& j, const char* name) {
    const auto& field = require_field(j, name);
    if (!field.is_string()) throw decode_error(std::string("field '") + name + "' must be a string");
    return field.get<std::string>();
}

bool require_bool(const nlohmann::json& j, const char* name) {
    const auto& field = require_field(j, name);
    if (!field.is_boolean()) throw decode_error(std::string("field '") + name + "' must be a boolean");
    return field.get<bool>();
}

std::string format_value(const std::optional<double>& v) {
    if (!v) return "n/a";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f", *v);
    return buf;
}

std::string pad(std::string text, std::size_t width) {
    if (text.size() < width) text.append(width - text.size(), ' ');
    return text;
}

} // namespace

std::string_view to_string(report_section s) {
    switch (s) {
        case report_section::media_events: return "media_events";
        case report_section::media_keywords_concepts: return "media_keywords_concepts";
        case report_section::datasets: return "datasets";
        case report_section::kg: return "kg";
    }
    throw precondition_error("unknown report_section value");
}

report_section report_section_from_string(std::string_view s) {
    for (report_section section : k_sections) {
        if (s == to_string(section)) return section;
    }
    throw decode_error("unknown section '" + std::string(s) + "'");
}

std::string_view display_name(report_section s) {
    switch (s) {
        case report_section::media_events: return "Media Events";
        case report_section::media_keywords_concepts: return "Media Keywords & Concepts";
        case report_section::datasets: return "External Datasets";
        case report_section::kg: return "Knowledge Graph";
    }
    throw precondition_error("unknown report_section value");
}

std::span<const report_section> all_report_sections() { return k_sections; }

std::vector<std::string> section_entry_ids(const enriched_explanation& e, report_section s) {
    std::vector<std::string> ids;
    const auto collect = [&ids](const std::vector<ranked_entry>& ranked) {
        ids.reserve(ranked.size());
        for (const auto& entry : ranked) ids.push_back(entry.candidate.candidate_id);
    };
    switch (s) {
        case report_section::media_events:
            collect(e.ranked_media);
            break;
        case report_section::media_keywords_concepts:
            ids.reserve(e.emergent_concepts.size());
            for (const auto& freq : e.emergent_concepts) ids.push_back(freq.concept_id);
            break;
        case report_section::datasets:
            collect(e.ranked_datasets);
            break;
        case report_section::kg:
            collect(e.ranked_kg);
            break;
    }
    return ids;
}

nlohmann::json to_json(const relevance_judgment& v) {
    return nlohmann::json{
        {"explanation_id", v.explanation_id},
        {"candidate_id", v.candidate_id},
        {"section", std::string(to_string(v.section))},
        {"relevant", v.relevant},
    };
}

relevance_judgment relevance_judgment_from_json(const nlohmann::json& j) {
    relevance_judgment out;
    out.explanation_id = require_string(j, "explanation_id");
    out.candidate_id = require_string(j, "candidate_id");
    out.section = report_section_from_string(require_string(j, "section"));
    out.relevant = require_bool(j, "relevant");
    if (out.explanation_id.empty()) throw decode_error("field 'explanation_id' must be non-empty");
    if (out.candidate_id.empty()) throw decode_error("field 'candidate_id' must be non-empty");
    return out;
}

judgment_set judgment_set::load_jsonl(const std::filesystem::path& file) {
    judgment_set out;
    for_each_jsonl_line(file, [&](std::size_t line, const nlohmann::json& j) {
        try {
            out.add(relevance_judgment_from_json(j));
        } catch (const error& e) {
            throw decode_error(file.string() + ":" + std::to_string(line) + ": " + e.what());
        }
    });
    return out;
}

void judgment_set::add(relevance_judgment j) {
    key k{std::move(j.explanation_id), std::move(j.candidate_id), j.section};
    auto [it, inserted] = entries_.emplace(std::move(k), j.relevant);
    if (!inserted) {
        throw duplicate_id_error("duplicate judgment for explanation '" + it->first.explanation_id +
                                 "', candidate '" + it->first.candidate_id + "', section '" +
                                 std::string(to_string(it->first.section)) + "'");
    }
}

bool judgment_set::is_judged(std::string_view explanation_id, report_section section,
                             std::string_view candidate_id) const {
    return entries_.count(key{std::string(explanation_id), std::string(candidate_id), section}) > 0;
}

bool judgment_set::is_relevant(std::string_view explanation_id, report_section section,
                               std::string_view candidate_id) const {
    auto it = entries_.find(key{std::string(explanation_id), std::string(candidate_id), section});
    return it != entries_.end() && it->second;
}

double precision_at_k(std::span<const std::string> entry_ids, const std::set<std::string>& relevant,
                      int k) {
    if (k < 1) throw precondition_error("k must be >= 1");
    if (entry_ids.empty()) throw precondition_error("precision_at_k requires a non-empty list");
    const std::size_t cut = std::min<std::size_t>(static_cast<std::size_t>(k), entry_ids.size());
    std::size_t hits = 0;
    for (std::size_t i = 0; i < cut; ++i) {
        if (relevant.count(entry_ids[i]) > 0) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(cut);
}

std::optional<double> average_precision_at_k(std::span<const enriched_explanation> enriched,
                                             report_section section, const judgment_set& judgments,
                                             int k, judgment_mode mode) {
    if (k < 1) throw precondition_error("k must be >= 1");

    std::string gaps;
    double sum = 0.0;
    std::size_t counted = 0;

    for (const auto& record : enriched) {
        const std::vector<std::string> ids = section_entry_ids(record, section);
        if (ids.empty()) continue;
        const std::string& explanation_id = record.explanation.explanation_id;
        const std::size_t cut = std::min<std::size_t>(static_cast<std::size_t>(k), ids.size());

        std::set<std::string> relevant;
        for (std::size_t i = 0; i < cut; ++i) {
            if (mode == judgment_mode::strict && !judgments.is_judged(explanation_id, section, ids[i])) {
                if (!gaps.empty()) gaps += "; ";
                gaps += "explanation '" + explanation_id + "' " + std::string(to_string(section)) +
                        " '" + ids[i] + "'";
                continue;
            }
            if (judgments.is_relevant(explanation_id, section, ids[i])) relevant.insert(ids[i]);
        }
        sum += precision_at_k(ids, relevant, k);
        ++counted;
    }

    if (!gaps.empty()) {
        throw judgment_gap_error("unjudged entries: " + gaps);
    }
    if (counted == 0) return std::nullopt;
    return sum / static_cast<double>(counted);
}

rde_counts rde_counts_at_k(std::span<const enriched_explanation> enriched, report_section section,
                           int k) {
    if (k < 1) throw precondition_error("k must be >= 1");
    rde_counts counts;
    std::set<std::string> seen;
    for (const auto& record : enriched) {
        const std::vector<std::string> ids = section_entry_ids(record, section);
        const std::size_t cut = std::min<std::size_t>(static_cast<std::size_t>(k), ids.size());
        for (std::size_t i = 0; i < cut; ++i) {
            ++counts.total;
            seen.insert(ids[i]);
        }
    }
    counts.unique = seen.size();
    return counts;
}

std::optional<double> rde_at_k(std::span<const enriched_explanation> enriched,
                               report_section section, int k) {
    const rde_counts counts = rde_counts_at_k(enriched, section, k);
    if (counts.total == 0) return std::nullopt;
    return static_cast<double>(counts.unique) / static_cast<double>(counts.total);
}

evaluation_report build_report(std::span<const enriched_explanation> enriched,
                               const judgment_set& judgments, std::vector<int> ks,
                               judgment_mode mode) {
    if (ks.empty()) throw precondition_error("at least one k is required");
    std::vector<int> unique_ks;
    for (int k : ks) {
        if (k < 1) throw precondition_error("k must be >= 1");
        if (std::find(unique_ks.begin(), unique_ks.end(), k) == unique_ks.end()) {
            unique_ks.push_back(k);
        }
    }

    evaluation_report report;
    report.ks = unique_ks;
    for (report_section section : all_report_sections()) {
        section_report sr;
        sr.section = section;

        std::size_t non_empty = 0;
        for (const auto& record : enriched) {
            if (!section_entry_ids(record, section).empty()) ++non_empty;
        }

        for (int k : unique_ks) {
            metric_cell cell;
            cell.k = k;
            cell.average_precision = average_precision_at_k(enriched, section, judgments, k, mode);
            const rde_counts counts = rde_counts_at_k(enriched, section, k);
            cell.total_entries = counts.total;
            cell.unique_entries = counts.unique;
            if (counts.total > 0) {
                cell.rde = static_cast<double>(counts.unique) / static_cast<double>(counts.total);
            }
            cell.explanations = non_empty;
            sr.cells.push_back(std::move(cell));
        }
        report.sections.push_back(std::move(sr));
    }
    return report;
}

nlohmann::json to_json(const evaluation_report& report) {
    nlohmann::json sections = nlohmann::json::array();
    for (const auto& sr : report.sections) {
        nlohmann::json cells = nlohmann::json::array();
        for (const auto& cell : sr.cells) {
            nlohmann::json c{
                {"k", cell.k},
                {"explanations", cell.explanations},
                {"total_entries", cell.total_entries},
                {"unique_entries", cell.unique_entries},
            };
            c["average_precision"] =
                cell.average_precision ? nlohmann::json(*cell.average_precision) : nlohmann::json();
            c["rde"] = cell.rde ? nlohmann::json(*cell.rde) : nlohmann::json();
            cells.push_back(std::move(c));
        }
        sections.push_back(nlohmann::json{
            {"section", std::string(to_string(sr.section))},
            {"metrics", std::move(cells)},
        });
    }
    return nlohmann::json{{"ks", report.ks}, {"sections", std::move(sections)}};
}

std::string render_report_table(const evaluation_report& report) {
    std::size_t section_width = std::string("Section").size();
    for (report_section s : all_report_sections()) {
        section_width = std::max(section_width, std::string(display_name(s)).size());
    }
    const std::string metric_ap = "Average Precision";
    const std::string metric_rde = "RDE";
    const std::size_t metric_width = std::max(std::string("Metric").size(), metric_ap.size());
    const std::size_t value_width = 7;

    std::string out;
    out += pad("Section", section_width) + "  " + pad("Metric", metric_width);
    for (int k : report.ks) out += "  " + pad("K=" + std::to_string(k), value_width);
    out += '\n';
    out += std::string(section_width, '-') + "  " + std::string(metric_width, '-');
    for (std::size_t i = 0; i < report.ks.size(); ++i) out += "  " + std::string(value_width, '-');
    out += '\n';

    for (const auto& sr : report.sections) {
        out += pad(std::string(display_name(sr.section)), section_width) + "  " +
               pad(metric_ap, metric_width);
        for (const auto& cell : sr.cells) out += "  " + pad(format_value(cell.average_precision), value_width);
        out += '\n';
        out += pad(std::string(display_name(sr.section)), section_width) + "  " +
               pad(metric_rde, metric_width);
        for (const auto& cell : sr.cells) out += "  " + pad(format_value(cell.rde), value_width);
        out += '\n';
    }
    return out;
}

} // namespace enrichkit
