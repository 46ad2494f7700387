#include "enrichkit/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <utility>

#include "enrichkit/errors.hpp"

namespace enrichkit {

namespace {

/// Rethrows the current enrichkit error with the explanation id prefixed,
/// preserving the concrete error type for the ones callers dispatch on.
template <typename Fn>
auto with_explanation(const std::string& explanation_id, Fn&& fn) {
    const auto tag = [&](const char* what) {
        return "explanation '" + explanation_id + "': " + what;
    };
    try {
        return fn();
    } catch (const unmapped_keyword_error& e) {
        throw unmapped_keyword_error(tag(e.what()));
    } catch (const offline_miss_error& e) {
        throw offline_miss_error(tag(e.what()));
    } catch (const network_error& e) {
        throw network_error(tag(e.what()));
    } catch (const decode_error& e) {
        throw decode_error(tag(e.what()));
    } catch (const config_error& e) {
        throw config_error(tag(e.what()));
    } catch (const duplicate_id_error& e) {
        throw duplicate_id_error(tag(e.what()));
    } catch (const precondition_error& e) {
        throw precondition_error(tag(e.what()));
    } catch (const error& e) {
        throw error(tag(e.what()));
    }
}

source_query make_query(const concept_set& concepts, int limit, source_kind kind) {
    source_query q;
    q.concepts = concepts.ids();
    q.limit = limit;
    q.kind = kind;
    return q;
}

} // namespace

void validate(const pipeline_config& cfg) {
    if (cfg.keyword_cutoff && *cfg.keyword_cutoff < 1) {
        throw precondition_error("keyword_cutoff must be >= 1");
    }
    if (cfg.media_limit < 1) throw precondition_error("media_limit must be >= 1");
    if (cfg.dataset_limit < 1) throw precondition_error("dataset_limit must be >= 1");
    if (cfg.kg_limit < 1) throw precondition_error("kg_limit must be >= 1");
    if (cfg.top_n < 1) throw precondition_error("top_n must be >= 1");
    if (cfg.max_m < 1) throw precondition_error("max_m must be >= 1");
    if (!(cfg.min_salience >= 0.0 && cfg.min_salience <= 1.0)) {
        throw precondition_error("min_salience must lie in [0,1]");
    }
}

concept_set build_reference_concepts(const explanation_record& rec,
                                     const keyword_concept_mapping& mapping,
                                     const pipeline_config& cfg) {
    validate(cfg);
    std::span<const feature_keyword> keywords = rec.feature_keywords;
    if (cfg.keyword_cutoff && static_cast<std::size_t>(*cfg.keyword_cutoff) < keywords.size()) {
        keywords = keywords.first(static_cast<std::size_t>(*cfg.keyword_cutoff));
    }
    return with_explanation(rec.explanation_id, [&] { return map_feature_keywords(keywords, mapping); });
}

enrichment_pipeline::enrichment_pipeline(source_connector& media, source_connector& datasets,
                                         source_connector& kg, const concept_catalog& catalog,
                                         const candidate_ranker& ranker)
    : media_(media), datasets_(datasets), kg_(kg), catalog_(catalog), ranker_(ranker) {}

enriched_explanation enrichment_pipeline::enrich(const explanation_record& rec,
                                                 const keyword_concept_mapping& mapping,
                                                 const pipeline_config& cfg) const {
    const concept_set reference = build_reference_concepts(rec, mapping, cfg);

    return with_explanation(rec.explanation_id, [&] {
        auto ranked_media = ranker_.rank(
            reference, media_.query(make_query(reference, cfg.media_limit, source_kind::media_event)));

        auto emergent = emergent_concepts(ranked_media, cfg.top_n, cfg.max_m, reference, catalog_,
                                          cfg.emergent_exclude_reference);

        // Step-4 anchor: both remaining sources are ranked against the
        // union so ranking and query vocabulary stay consistent.
        concept_set anchor = reference;
        for (const auto& freq : emergent) anchor.insert(freq.concept_id);

        auto ranked_datasets = ranker_.rank(
            anchor, datasets_.query(make_query(anchor, cfg.dataset_limit, source_kind::dataset)));

        concept_set kg_query = anchor;
        if (cfg.kg_emergent_only && !emergent.empty()) {
            kg_query = concept_set{};
            for (const auto& freq : emergent) kg_query.insert(freq.concept_id);
        }
        auto ranked_kg =
            ranker_.rank(anchor, kg_.query(make_query(kg_query, cfg.kg_limit, source_kind::kg_entity)));

        enriched_explanation out;
        out.explanation = rec;
        out.reference_concepts = reference;
        out.ranked_media = std::move(ranked_media);
        out.emergent_concepts = std::move(emergent);
        out.ranked_datasets = std::move(ranked_datasets);
        out.ranked_kg = std::move(ranked_kg);
        return out;
    });
}

corpus_result enrichment_pipeline::enrich_corpus(std::span<const explanation_record> records,
                                                 const keyword_concept_mapping& mapping,
                                                 const pipeline_config& cfg,
                                                 const corpus_options& opts) const {
    validate(cfg);
    if (opts.parallelism < 1) throw precondition_error("parallelism must be >= 1");

    const std::size_t n = records.size();
    std::vector<std::optional<enriched_explanation>> slots(n);
    std::vector<std::optional<corpus_error>> failures(n);

    const std::size_t workers =
        std::min<std::size_t>(static_cast<std::size_t>(opts.parallelism), n);

    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) {
            try {
                slots[i] = enrich(records[i], mapping, cfg);
            } catch (const error& e) {
                if (opts.fail_fast) throw;
                failures[i] = corpus_error{records[i].explanation_id, e.what()};
            }
        }
    } else {
        std::atomic<std::size_t> next{0};
        std::atomic<bool> stop{false};
        std::mutex mu;
        std::exception_ptr first_error;

        const auto run_one = [&](std::size_t i) {
            try {
                slots[i] = enrich(records[i], mapping, cfg);
            } catch (const error& e) {
                std::lock_guard<std::mutex> lock(mu);
                if (opts.fail_fast) {
                    if (!first_error) first_error = std::current_exception();
                    stop.store(true);
                } else {
                    failures[i] = corpus_error{records[i].explanation_id, e.what()};
                }
            }
        };

        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                while (!stop.load()) {
                    const std::size_t i = next.fetch_add(1);
                    if (i >= n) return;
                    run_one(i);
                }
            });
        }
        for (auto& t : pool) t.join();
        if (first_error) std::rethrow_exception(first_error);
    }

    corpus_result result;
    for (std::size_t i = 0; i < n; ++i) {
        if (slots[i]) {
            result.enriched.push_back(std::move(*slots[i]));
        } else if (failures[i]) {
            result.errors.push_back(std::move(*failures[i]));
        }
    }
    return result;
}

} // namespace enrichkit
