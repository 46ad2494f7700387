#pragma once

#include <cstdint>
#include <vector>

#include "enrichkit/model.hpp"

namespace enrichkit {

/// Exact intersection/union cardinalities, the rational behind the
/// Jaccard values. union_size == 0 only when both sets are empty.
struct jaccard_parts {
    std::uint64_t intersection = 0;
    std::uint64_t union_size = 0;
};

jaccard_parts jaccard_counts(const concept_set& a, const concept_set& b);

/// |a∩b| / |a∪b|. Two empty sets count as identical (index 1).
double jaccard_index(const concept_set& a, const concept_set& b);

/// 1 − jaccard_index(a, b). A metric on sets.
double jaccard_distance(const concept_set& a, const concept_set& b);

/// Sorts candidates ascending by Jaccard distance to the reference set.
/// Ties break by descending source_score (absent scores rank last), then
/// ascending candidate_id. Distances are compared as exact rationals, so
/// the ordering never depends on floating-point rounding. Ranks are
/// assigned 1..n. Throws duplicate_id_error when two candidates share an
/// id, naming the id.
std::vector<ranked_entry> rank_candidates(const concept_set& reference,
                                          std::vector<enrichment_candidate> candidates);

/// First min(k, n) entries of an already-ranked list. k is 1-based;
/// k == 0 throws precondition_error.
std::vector<ranked_entry> top_k(const std::vector<ranked_entry>& ranked, int k);

/// Ranking strategy seam. The shipped implementation is Jaccard-based;
/// alternative rankers can slot in behind the same contract.
class candidate_ranker {
public:
    virtual ~candidate_ranker() = default;
    virtual std::vector<ranked_entry> rank(const concept_set& reference,
                                           std::vector<enrichment_candidate> candidates) const = 0;
};

class jaccard_ranker final : public candidate_ranker {
public:
    std::vector<ranked_entry> rank(const concept_set& reference,
                                   std::vector<enrichment_candidate> candidates) const override {
        return rank_candidates(reference, std::move(candidates));
    }
};

} // namespace enrichkit
