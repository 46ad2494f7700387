#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "enrichkit/model.hpp"

namespace enrichkit {

/// The feature-keyword to wiki-concept table. Loaded from a jsonl file
/// with one entry per keyword; lookups key on the normalized keyword.
class keyword_concept_mapping {
public:
    struct entry {
        std::string keyword_phrase;
        std::string canonical_id;
        std::vector<wiki_concept> concepts;
    };

    /// Loads entries of the shape
    ///   {"keyword": "...", "concepts": [{"id","label","classification"}, ...]}
    /// Duplicate keywords and empty concept lists are decode errors.
    static keyword_concept_mapping load_jsonl(const std::filesystem::path& file);

    void add(std::string_view keyword_phrase, std::vector<wiki_concept> concepts);

    const entry* find(std::string_view canonical_id) const;

    std::size_t size() const { return entries_.size(); }

    /// Entries in insertion (file) order.
    const std::vector<entry>& entries() const { return entries_; }

private:
    std::vector<entry> entries_;
    std::map<std::string, std::size_t> by_canonical_id_;
};

/// Union of the concepts mapped from each keyword; duplicates collapse.
/// Throws unmapped_keyword_error naming the first keyword without an
/// entry.
concept_set map_feature_keywords(std::span<const feature_keyword> keywords,
                                 const keyword_concept_mapping& mapping);

/// Classifications removed by default: the uninformative ones.
const std::set<concept_class>& default_excluded_classes();

/// Order-preserving removal of every concept whose classification is in
/// `excluded`. Idempotent.
std::vector<wiki_concept> filter_concepts(std::vector<wiki_concept> concepts,
                                          const std::set<concept_class>& excluded);

/// Accumulates every concept observed during a run (mapping entries,
/// wikifier annotations, source-supplied annotations) so later stages can
/// ask for a concept's classification by id. Thread-safe.
class concept_catalog {
public:
    void observe(const wiki_concept& item);

    concept_class classification_of(std::string_view concept_id) const;

    std::optional<wiki_concept> find(std::string_view concept_id) const;

    std::size_t size() const;

private:
    mutable std::mutex mutex_;
    std::map<std::string, wiki_concept> by_id_;
};

/// Counts concept occurrences across the top_n highest-ranked media
/// candidates, drops person/place concepts (per catalog) and, when
/// exclude_reference is set, members of the reference set, and returns
/// the max_m most frequent ordered by descending count then ascending
/// concept id. Fewer than top_n candidates means all are used.
std::vector<concept_frequency> emergent_concepts(std::span<const ranked_entry> ranked_media, int top_n,
                                                 int max_m, const concept_set& reference,
                                                 const concept_catalog& catalog,
                                                 bool exclude_reference = true);

} // namespace enrichkit
