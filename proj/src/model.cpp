#include "enrichkit/model.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>

#include <nlohmann/json.hpp>

#include "enrichkit/errors.hpp"

namespace enrichkit {

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
bool is_punct(char c) { return std::ispunct(static_cast<unsigned char>(c)) != 0; }

std::string fold_and_collapse(std::string_view raw) {
    std::string out;
    out.reserve(raw.size());
    bool pending_space = false;
    for (char c : raw) {
        if (is_space(c)) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) {
            out.push_back(' ');
            pending_space = false;
        }
        out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    return out;
}

// Days since 1970-01-01 for a proleptic Gregorian date.
std::int64_t days_from_civil(int y, unsigned m, unsigned d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, int& y, unsigned& m, unsigned& d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t yy = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = doy - (153 * mp + 2) / 5 + 1;
    m = mp + (mp < 10 ? 3 : -9);
    y = static_cast<int>(yy + (m <= 2));
}

const nlohmann::json& require_field(const nlohmann::json& j, const char* name, const char* type_name) {
    if (!j.is_object()) {
        throw decode_error(std::string(type_name) + ": expected a JSON object");
    }
    auto it = j.find(name);
    if (it == j.end()) {
        throw decode_error(std::string(type_name) + ": missing field '" + name + "'");
    }
    return *it;
}

std::string require_string(const nlohmann::json& j, const char* name, const char* type_name) {
    const auto& field = require_field(j, name, type_name);
    if (!field.is_string()) {
        throw decode_error(std::string(type_name) + ": field '" + name + "' must be a string");
    }
    return field.get<std::string>();
}

double require_number(const nlohmann::json& j, const char* name, const char* type_name) {
    const auto& field = require_field(j, name, type_name);
    if (!field.is_number()) {
        throw decode_error(std::string(type_name) + ": field '" + name + "' must be a number");
    }
    return field.get<double>();
}

} // namespace

std::string format_instant(instant t) {
    const std::int64_t total = t.time_since_epoch().count();
    std::int64_t days = total / 86400;
    std::int64_t rem = total % 86400;
    if (rem < 0) {
        rem += 86400;
        days -= 1;
    }
    int y = 0;
    unsigned m = 0, d = 0;
    civil_from_days(days, y, m, d);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02lld:%02lld:%02lldZ", y, m, d,
                  static_cast<long long>(rem / 3600), static_cast<long long>((rem / 60) % 60),
                  static_cast<long long>(rem % 60));
    return buf;
}

instant parse_instant(std::string_view text) {
    int y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0;
    std::string buf(text);
    int n = std::sscanf(buf.c_str(), "%d-%d-%dT%d:%d:%dZ", &y, &mo, &d, &h, &mi, &s);
    if (n != 6) {
        n = std::sscanf(buf.c_str(), "%d-%d-%d", &y, &mo, &d);
        if (n != 3) {
            throw decode_error("invalid instant '" + buf + "' (expected YYYY-MM-DD or YYYY-MM-DDTHH:MM:SSZ)");
        }
        h = mi = s = 0;
    }
    if (mo < 1 || mo > 12 || d < 1 || d > 31 || h < 0 || h > 23 || mi < 0 || mi > 59 || s < 0 || s > 60) {
        throw decode_error("instant '" + buf + "' is out of range");
    }
    const std::int64_t secs =
        days_from_civil(y, static_cast<unsigned>(mo), static_cast<unsigned>(d)) * 86400 + h * 3600 + mi * 60 + s;
    return instant{std::chrono::seconds{secs}};
}

std::string normalize_label(std::string_view raw) {
    std::string out = fold_and_collapse(raw);
    // Strip punctuation (and whatever whitespace that exposes) from both ends
    // until stable, so e.g. "'Car Demand!'" becomes "car demand".
    for (;;) {
        std::size_t begin = 0;
        std::size_t end = out.size();
        while (begin < end && (is_punct(out[begin]) || is_space(out[begin]))) ++begin;
        while (end > begin && (is_punct(out[end - 1]) || is_space(out[end - 1]))) --end;
        if (begin == 0 && end == out.size()) break;
        out = out.substr(begin, end - begin);
    }
    return out;
}

std::string normalize_concept_id(std::string_view raw) {
    std::string out;
    out.reserve(raw.size());
    bool pending_sep = false;
    for (char c : raw) {
        if (is_space(c)) {
            pending_sep = !out.empty();
            continue;
        }
        if (pending_sep) {
            out.push_back('_');
            pending_sep = false;
        }
        out.push_back(c);
    }
    return out;
}

std::string_view to_string(concept_class c) {
    switch (c) {
    case concept_class::person: return "person";
    case concept_class::place: return "place";
    case concept_class::organization: return "organization";
    case concept_class::other: return "other";
    }
    return "other";
}

concept_class concept_class_from_string(std::string_view s) {
    if (s == "person") return concept_class::person;
    if (s == "place") return concept_class::place;
    if (s == "organization") return concept_class::organization;
    if (s == "other") return concept_class::other;
    throw decode_error("unknown concept classification '" + std::string(s) + "'");
}

std::string_view to_string(source_kind k) {
    switch (k) {
    case source_kind::media_event: return "media_event";
    case source_kind::dataset: return "dataset";
    case source_kind::kg_entity: return "kg_entity";
    }
    return "media_event";
}

source_kind source_kind_from_string(std::string_view s) {
    if (s == "media_event") return source_kind::media_event;
    if (s == "dataset") return source_kind::dataset;
    if (s == "kg_entity") return source_kind::kg_entity;
    throw decode_error("unknown source kind '" + std::string(s) + "'");
}

feature_keyword feature_keyword::from_phrase(std::string phrase) {
    feature_keyword kw;
    kw.canonical_id = normalize_label(phrase);
    kw.phrase = std::move(phrase);
    if (kw.canonical_id.empty()) {
        throw precondition_error("feature keyword '" + kw.phrase + "' normalizes to an empty id");
    }
    return kw;
}

concept_set::concept_set(std::initializer_list<std::string_view> raw_ids) {
    for (auto id : raw_ids) insert(id);
}

concept_set concept_set::from_ids(std::span<const std::string> raw_ids) {
    concept_set set;
    for (const auto& id : raw_ids) set.insert(id);
    return set;
}

bool concept_set::insert(std::string_view raw_id) {
    std::string id = normalize_concept_id(raw_id);
    if (id.empty()) return false;
    auto it = std::lower_bound(ids_.begin(), ids_.end(), id);
    if (it != ids_.end() && *it == id) return false;
    ids_.insert(it, std::move(id));
    return true;
}

bool concept_set::contains(std::string_view raw_id) const {
    const std::string id = normalize_concept_id(raw_id);
    return std::binary_search(ids_.begin(), ids_.end(), id);
}

concept_set concept_set::united_with(const concept_set& other) const {
    concept_set out = *this;
    for (const auto& id : other.ids_) out.insert(id);
    return out;
}

nlohmann::json to_json(const feature_keyword& v) {
    return {{"phrase", v.phrase}, {"canonical_id", v.canonical_id}};
}

feature_keyword feature_keyword_from_json(const nlohmann::json& j) {
    auto kw = feature_keyword::from_phrase(require_string(j, "phrase", "feature_keyword"));
    if (auto it = j.find("canonical_id"); it != j.end()) {
        if (!it->is_string() || it->get<std::string>() != kw.canonical_id) {
            throw decode_error("feature_keyword: canonical_id does not match normalized phrase '" + kw.phrase + "'");
        }
    }
    return kw;
}

nlohmann::json to_json(const wiki_concept& v) {
    return {{"id", v.concept_id},
            {"label", v.label},
            {"classification", std::string(to_string(v.classification))},
            {"salience", v.salience}};
}

wiki_concept wiki_concept_from_json(const nlohmann::json& j) {
    wiki_concept c;
    c.concept_id = normalize_concept_id(require_string(j, "id", "wiki_concept"));
    if (c.concept_id.empty()) {
        throw decode_error("wiki_concept: field 'id' must be non-empty");
    }
    c.label = j.contains("label") ? require_string(j, "label", "wiki_concept") : c.concept_id;
    if (j.contains("classification")) {
        c.classification = concept_class_from_string(require_string(j, "classification", "wiki_concept"));
    }
    if (j.contains("salience")) {
        c.salience = require_number(j, "salience", "wiki_concept");
        if (c.salience < 0.0 || c.salience > 1.0) {
            throw decode_error("wiki_concept: salience must lie in [0,1]");
        }
    }
    return c;
}

nlohmann::json to_json(const concept_set& v) {
    return nlohmann::json(v.ids());
}

concept_set concept_set_from_json(const nlohmann::json& j) {
    if (!j.is_array()) {
        throw decode_error("concept_set: expected a JSON array of concept ids");
    }
    concept_set set;
    for (const auto& item : j) {
        if (!item.is_string()) {
            throw decode_error("concept_set: members must be strings");
        }
        set.insert(item.get<std::string>());
    }
    return set;
}

nlohmann::json to_json(const enrichment_candidate& v) {
    nlohmann::json j{{"candidate_id", v.candidate_id},
                     {"source_kind", std::string(to_string(v.kind))},
                     {"title", v.title},
                     {"body", v.body},
                     {"concepts", to_json(v.concepts)}};
    if (v.timestamp) j["timestamp"] = format_instant(*v.timestamp);
    if (v.source_score) j["source_score"] = *v.source_score;
    return j;
}

enrichment_candidate enrichment_candidate_from_json(const nlohmann::json& j) {
    enrichment_candidate c;
    c.candidate_id = require_string(j, "candidate_id", "enrichment_candidate");
    if (c.candidate_id.empty()) {
        throw decode_error("enrichment_candidate: field 'candidate_id' must be non-empty");
    }
    c.kind = source_kind_from_string(require_string(j, "source_kind", "enrichment_candidate"));
    c.title = require_string(j, "title", "enrichment_candidate");
    c.body = j.contains("body") ? require_string(j, "body", "enrichment_candidate") : "";
    if (j.contains("timestamp")) {
        c.timestamp = parse_instant(require_string(j, "timestamp", "enrichment_candidate"));
    }
    c.concepts = concept_set_from_json(require_field(j, "concepts", "enrichment_candidate"));
    if (j.contains("source_score")) {
        c.source_score = require_number(j, "source_score", "enrichment_candidate");
    }
    return c;
}

nlohmann::json to_json(const explanation_record& v) {
    nlohmann::json keywords = nlohmann::json::array();
    for (const auto& kw : v.feature_keywords) keywords.push_back(to_json(kw));
    return {{"explanation_id", v.explanation_id},
            {"product_id", v.product_id},
            {"period", v.period},
            {"feature_keywords", std::move(keywords)}};
}

explanation_record explanation_record_from_json(const nlohmann::json& j) {
    explanation_record rec;
    rec.explanation_id = require_string(j, "explanation_id", "explanation_record");
    if (rec.explanation_id.empty()) {
        throw decode_error("explanation_record: field 'explanation_id' must be non-empty");
    }
    rec.product_id = require_string(j, "product_id", "explanation_record");
    rec.period = require_string(j, "period", "explanation_record");
    const auto& keywords = require_field(j, "feature_keywords", "explanation_record");
    if (!keywords.is_array() || keywords.empty()) {
        throw decode_error("explanation_record '" + rec.explanation_id +
                           "': feature_keywords must be a non-empty array");
    }
    for (const auto& kw : keywords) rec.feature_keywords.push_back(feature_keyword_from_json(kw));
    return rec;
}

nlohmann::json to_json(const ranked_entry& v) {
    return {{"candidate", to_json(v.candidate)}, {"distance", v.distance}, {"rank", v.rank}};
}

ranked_entry ranked_entry_from_json(const nlohmann::json& j) {
    ranked_entry e;
    e.candidate = enrichment_candidate_from_json(require_field(j, "candidate", "ranked_entry"));
    e.distance = require_number(j, "distance", "ranked_entry");
    if (e.distance < 0.0 || e.distance > 1.0) {
        throw decode_error("ranked_entry: distance must lie in [0,1]");
    }
    e.rank = static_cast<int>(require_number(j, "rank", "ranked_entry"));
    if (e.rank < 1) {
        throw decode_error("ranked_entry: rank must be a positive integer");
    }
    return e;
}

nlohmann::json to_json(const concept_frequency& v) {
    return {{"concept_id", v.concept_id}, {"count", v.count}};
}

concept_frequency concept_frequency_from_json(const nlohmann::json& j) {
    concept_frequency f;
    f.concept_id = require_string(j, "concept_id", "concept_frequency");
    f.count = static_cast<int>(require_number(j, "count", "concept_frequency"));
    if (f.count < 1) {
        throw decode_error("concept_frequency: count must be a positive integer");
    }
    return f;
}

namespace {

nlohmann::json ranked_list_to_json(const std::vector<ranked_entry>& entries) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& e : entries) arr.push_back(to_json(e));
    return arr;
}

std::vector<ranked_entry> ranked_list_from_json(const nlohmann::json& j, const char* field) {
    if (!j.is_array()) {
        throw decode_error(std::string("enriched_explanation: field '") + field + "' must be an array");
    }
    std::vector<ranked_entry> out;
    out.reserve(j.size());
    for (const auto& item : j) out.push_back(ranked_entry_from_json(item));
    return out;
}

} // namespace

nlohmann::json to_json(const enriched_explanation& v) {
    nlohmann::json emergent = nlohmann::json::array();
    for (const auto& f : v.emergent_concepts) emergent.push_back(to_json(f));
    return {{"explanation", to_json(v.explanation)},
            {"reference_concepts", to_json(v.reference_concepts)},
            {"ranked_media", ranked_list_to_json(v.ranked_media)},
            {"emergent_concepts", std::move(emergent)},
            {"ranked_datasets", ranked_list_to_json(v.ranked_datasets)},
            {"ranked_kg", ranked_list_to_json(v.ranked_kg)}};
}

enriched_explanation enriched_explanation_from_json(const nlohmann::json& j) {
    enriched_explanation e;
    e.explanation = explanation_record_from_json(require_field(j, "explanation", "enriched_explanation"));
    e.reference_concepts = concept_set_from_json(require_field(j, "reference_concepts", "enriched_explanation"));
    e.ranked_media = ranked_list_from_json(require_field(j, "ranked_media", "enriched_explanation"), "ranked_media");
    const auto& emergent = require_field(j, "emergent_concepts", "enriched_explanation");
    if (!emergent.is_array()) {
        throw decode_error("enriched_explanation: field 'emergent_concepts' must be an array");
    }
    for (const auto& item : emergent) e.emergent_concepts.push_back(concept_frequency_from_json(item));
    e.ranked_datasets =
        ranked_list_from_json(require_field(j, "ranked_datasets", "enriched_explanation"), "ranked_datasets");
    e.ranked_kg = ranked_list_from_json(require_field(j, "ranked_kg", "enriched_explanation"), "ranked_kg");
    return e;
}

} // namespace enrichkit
