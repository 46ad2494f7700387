#include "enrichkit/similarity.hpp"

#include <algorithm>
#include <unordered_set>

#include "enrichkit/errors.hpp"

namespace enrichkit {

jaccard_parts jaccard_counts(const concept_set& a, const concept_set& b) {
    const auto& small = a.size() <= b.size() ? a : b;
    const auto& large = a.size() <= b.size() ? b : a;
    std::uint64_t intersection = 0;
    const auto& large_ids = large.ids();
    for (const auto& id : small.ids()) {
        if (std::binary_search(large_ids.begin(), large_ids.end(), id)) ++intersection;
    }
    jaccard_parts parts;
    parts.intersection = intersection;
    parts.union_size = static_cast<std::uint64_t>(a.size()) + b.size() - intersection;
    return parts;
}

double jaccard_index(const concept_set& a, const concept_set& b) {
    const jaccard_parts parts = jaccard_counts(a, b);
    if (parts.union_size == 0) return 1.0;
    return static_cast<double>(parts.intersection) / static_cast<double>(parts.union_size);
}

double jaccard_distance(const concept_set& a, const concept_set& b) {
    return 1.0 - jaccard_index(a, b);
}

namespace {

struct scored_candidate {
    enrichment_candidate candidate;
    // distance = miss / denom, with the empty/empty case stored as 0/1.
    std::uint64_t miss = 0;
    std::uint64_t denom = 1;
};

// Ascending distance via cross-multiplication, then descending
// source_score (absent treated as -inf), then ascending candidate_id.
bool ranks_before(const scored_candidate& lhs, const scored_candidate& rhs) {
    const std::uint64_t left = lhs.miss * rhs.denom;
    const std::uint64_t right = rhs.miss * lhs.denom;
    if (left != right) return left < right;
    const bool lhs_scored = lhs.candidate.source_score.has_value();
    const bool rhs_scored = rhs.candidate.source_score.has_value();
    if (lhs_scored != rhs_scored) return lhs_scored;
    if (lhs_scored && *lhs.candidate.source_score != *rhs.candidate.source_score) {
        return *lhs.candidate.source_score > *rhs.candidate.source_score;
    }
    return lhs.candidate.candidate_id < rhs.candidate.candidate_id;
}

} // namespace

std::vector<ranked_entry> rank_candidates(const concept_set& reference,
                                          std::vector<enrichment_candidate> candidates) {
    std::unordered_set<std::string> seen;
    seen.reserve(candidates.size());
    for (const auto& c : candidates) {
        if (!seen.insert(c.candidate_id).second) {
            throw duplicate_id_error("duplicate candidate_id '" + c.candidate_id + "' in ranking input");
        }
    }

    std::vector<scored_candidate> scored;
    scored.reserve(candidates.size());
    for (auto& c : candidates) {
        const jaccard_parts parts = jaccard_counts(reference, c.concepts);
        scored_candidate sc;
        sc.miss = parts.union_size - parts.intersection;
        sc.denom = parts.union_size == 0 ? 1 : parts.union_size;
        sc.candidate = std::move(c);
        scored.push_back(std::move(sc));
    }

    std::sort(scored.begin(), scored.end(), ranks_before);

    std::vector<ranked_entry> ranked;
    ranked.reserve(scored.size());
    int rank = 1;
    for (auto& sc : scored) {
        ranked_entry entry;
        // Evaluated as 1 - index rather than miss/denom so the stored
        // value is bit-identical to jaccard_distance().
        entry.distance =
            1.0 - static_cast<double>(sc.denom - sc.miss) / static_cast<double>(sc.denom);
        entry.rank = rank++;
        entry.candidate = std::move(sc.candidate);
        ranked.push_back(std::move(entry));
    }
    return ranked;
}

std::vector<ranked_entry> top_k(const std::vector<ranked_entry>& ranked, int k) {
    if (k < 1) {
        throw precondition_error("top_k: k must be >= 1 (got " + std::to_string(k) + ")");
    }
    const std::size_t n = std::min(static_cast<std::size_t>(k), ranked.size());
    return {ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(n)};
}

} // namespace enrichkit
