#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace enrichkit {

/// UTC instant with second resolution, the only time type used on the wire.
using instant = std::chrono::time_point<std::chrono::system_clock, std::chrono::seconds>;

/// Formats an instant as "YYYY-MM-DDTHH:MM:SSZ".
std::string format_instant(instant t);

/// Parses "YYYY-MM-DDTHH:MM:SSZ" or a bare "YYYY-MM-DD" (midnight UTC).
instant parse_instant(std::string_view text);

/// Case-folds, collapses whitespace runs to single spaces, and trims
/// leading/trailing whitespace and punctuation. Idempotent; empty in,
/// empty out. ASCII rules only.
std::string normalize_label(std::string_view raw);

/// Canonical form of a wiki page identifier: trims whitespace and maps
/// internal whitespace runs to single underscores. Case is preserved.
std::string normalize_concept_id(std::string_view raw);

enum class concept_class { person, place, organization, other };

std::string_view to_string(concept_class c);
concept_class concept_class_from_string(std::string_view s);

enum class source_kind { media_event, dataset, kg_entity };

std::string_view to_string(source_kind k);
source_kind source_kind_from_string(std::string_view s);

/// A human-readable keyword phrase from a forecast explanation plus its
/// normalized identity used for mapping lookups.
struct feature_keyword {
    std::string phrase;
    std::string canonical_id;

    static feature_keyword from_phrase(std::string phrase);

    bool operator==(const feature_keyword&) const = default;
};

/// A canonical linked concept as returned by wikification.
struct wiki_concept {
    std::string concept_id;
    std::string label;
    concept_class classification = concept_class::other;
    double salience = 0.0; // in [0,1]

    bool operator==(const wiki_concept&) const = default;
};

/// Deduplicated set of concept identifiers. Members are normalized on
/// insertion and kept sorted, so iteration order is canonical.
class concept_set {
public:
    concept_set() = default;
    concept_set(std::initializer_list<std::string_view> raw_ids);

    static concept_set from_ids(std::span<const std::string> raw_ids);

    /// Inserts after normalization. Returns false if already present.
    bool insert(std::string_view raw_id);

    bool contains(std::string_view raw_id) const;

    std::size_t size() const { return ids_.size(); }
    bool empty() const { return ids_.empty(); }

    /// Members sorted ascending.
    const std::vector<std::string>& ids() const { return ids_; }

    concept_set united_with(const concept_set& other) const;

    bool operator==(const concept_set&) const = default;

private:
    std::vector<std::string> ids_;
};

/// A retrieved external item considered for inclusion in an explanation.
struct enrichment_candidate {
    std::string candidate_id;
    source_kind kind = source_kind::media_event;
    std::string title;
    std::string body;
    std::optional<instant> timestamp;
    concept_set concepts;
    std::optional<double> source_score;

    bool operator==(const enrichment_candidate&) const = default;
};

/// One forecast explanation as consumed from the input corpus. Keywords
/// are ordered most relevant first.
struct explanation_record {
    std::string explanation_id;
    std::string product_id;
    std::string period;
    std::vector<feature_keyword> feature_keywords;

    bool operator==(const explanation_record&) const = default;
};

/// A candidate with its distance to the anchoring concept set and its
/// 1-based, gap-free position in the ranked list.
struct ranked_entry {
    enrichment_candidate candidate;
    double distance = 0.0; // in [0,1]
    int rank = 0;

    bool operator==(const ranked_entry&) const = default;
};

struct concept_frequency {
    std::string concept_id;
    int count = 0;

    bool operator==(const concept_frequency&) const = default;
};

/// Output bundle: the explanation, its reference concepts, the ranked
/// candidates per source, and the concepts that emerged from top media.
struct enriched_explanation {
    explanation_record explanation;
    concept_set reference_concepts;
    std::vector<ranked_entry> ranked_media;
    std::vector<concept_frequency> emergent_concepts;
    std::vector<ranked_entry> ranked_datasets;
    std::vector<ranked_entry> ranked_kg;

    bool operator==(const enriched_explanation&) const = default;
};

// JSON codecs. Field names are normative; see docs/FORMATS.md.
// Decoders throw decode_error naming the missing or malformed field.

nlohmann::json to_json(const feature_keyword& v);
nlohmann::json to_json(const wiki_concept& v);
nlohmann::json to_json(const concept_set& v);
nlohmann::json to_json(const enrichment_candidate& v);
nlohmann::json to_json(const explanation_record& v);
nlohmann::json to_json(const ranked_entry& v);
nlohmann::json to_json(const concept_frequency& v);
nlohmann::json to_json(const enriched_explanation& v);

feature_keyword feature_keyword_from_json(const nlohmann::json& j);
wiki_concept wiki_concept_from_json(const nlohmann::json& j);
concept_set concept_set_from_json(const nlohmann::json& j);
enrichment_candidate enrichment_candidate_from_json(const nlohmann::json& j);
explanation_record explanation_record_from_json(const nlohmann::json& j);
ranked_entry ranked_entry_from_json(const nlohmann::json& j);
concept_frequency concept_frequency_from_json(const nlohmann::json& j);
enriched_explanation enriched_explanation_from_json(const nlohmann::json& j);

} // namespace enrichkit
