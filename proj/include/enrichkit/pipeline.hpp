#pragma once

#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "enrichkit/concepts.hpp"
#include "enrichkit/connectors.hpp"
#include "enrichkit/model.hpp"
#include "enrichkit/similarity.hpp"

namespace enrichkit {

/// Free parameters of an enrichment run. Defaults are the shipped
/// operating point; validate() rejects out-of-range values.
struct pipeline_config {
    /// How many leading feature keywords contribute reference concepts.
    /// Absent means every keyword in the record.
    std::optional<int> keyword_cutoff;

    int media_limit = 25;
    int dataset_limit = 10;
    int kg_limit = 10;

    /// Emergent-concept window: the top_n highest-ranked media events
    /// vote and the max_m most frequent survivors are kept.
    int top_n = 10;
    int max_m = 5;

    double min_salience = 0.8;
    std::set<concept_class> excluded_classes = default_excluded_classes();
    bool offline = true;

    /// Drop emergent concepts that are already reference concepts.
    bool emergent_exclude_reference = true;

    /// Restrict knowledge-graph queries to emergent concepts. When no
    /// concepts emerged the query falls back to the reference set, so a
    /// record with empty media results still reaches the graph. Ranking
    /// stays anchored to reference ∪ emergent either way.
    bool kg_emergent_only = false;
};

/// Throws precondition_error naming the first out-of-range field.
void validate(const pipeline_config& cfg);

/// Union of mapped concepts over the first min(keyword_cutoff, |keywords|)
/// keywords of the record. An unmapped keyword raises
/// unmapped_keyword_error naming the keyword and the explanation.
concept_set build_reference_concepts(const explanation_record& rec,
                                     const keyword_concept_mapping& mapping,
                                     const pipeline_config& cfg);

struct corpus_error {
    std::string explanation_id;
    std::string message;

    bool operator==(const corpus_error&) const = default;
};

/// Batch outcome: successes in input order, failures in input order.
/// A record appears in exactly one of the two lists.
struct corpus_result {
    std::vector<enriched_explanation> enriched;
    std::vector<corpus_error> errors;
};

struct corpus_options {
    /// Rethrow the first per-record error instead of collecting it.
    bool fail_fast = false;
    /// Upper bound on concurrently enriched records.
    int parallelism = 1;
};

/// Drives one explanation through the four enrichment steps: reference
/// concepts from the keyword mapping, media retrieval ranked against the
/// reference set, emergent concepts from the top-ranked media, then
/// dataset and knowledge-graph retrieval ranked against reference ∪
/// emergent. Connectors and ranker are injected so tests can observe
/// issued queries and substitute ranking strategies.
class enrichment_pipeline {
public:
    enrichment_pipeline(source_connector& media, source_connector& datasets, source_connector& kg,
                        const concept_catalog& catalog, const candidate_ranker& ranker);

    /// Steps 1 through 4 plus assembly for a single record. Errors from
    /// any step carry the explanation id.
    enriched_explanation enrich(const explanation_record& rec,
                                const keyword_concept_mapping& mapping,
                                const pipeline_config& cfg) const;

    /// enrich() over every record. Output order equals input order.
    /// Per-record errors are collected unless opts.fail_fast is set;
    /// records are processed concurrently up to opts.parallelism.
    corpus_result enrich_corpus(std::span<const explanation_record> records,
                                const keyword_concept_mapping& mapping, const pipeline_config& cfg,
                                const corpus_options& opts = {}) const;

private:
    source_connector& media_;
    source_connector& datasets_;
    source_connector& kg_;
    const concept_catalog& catalog_;
    const candidate_ranker& ranker_;
};

} // namespace enrichkit
