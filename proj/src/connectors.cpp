#include "enrichkit/connectors.hpp"

#include <algorithm>
#include <map>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "enrichkit/errors.hpp"

namespace enrichkit {

void validate(const source_query& q) {
    const bool has_concepts =
        std::any_of(q.concepts.begin(), q.concepts.end(),
                    [](const std::string& c) { return !normalize_concept_id(c).empty(); });
    const bool has_text = q.free_text && !normalize_label(*q.free_text).empty();
    if (!has_concepts && !has_text) {
        throw precondition_error("source_query needs at least one concept or a free_text value");
    }
    if (q.limit < 1) {
        throw precondition_error("source_query limit must be >= 1 (got " + std::to_string(q.limit) + ")");
    }
}

std::string canonical_query_json(const source_query& q) {
    std::vector<std::string> concepts;
    concepts.reserve(q.concepts.size());
    for (const auto& c : q.concepts) {
        std::string id = normalize_concept_id(c);
        if (!id.empty()) concepts.push_back(std::move(id));
    }
    std::sort(concepts.begin(), concepts.end());
    concepts.erase(std::unique(concepts.begin(), concepts.end()), concepts.end());

    nlohmann::json j{{"concepts", concepts}, {"limit", q.limit}, {"source", std::string(to_string(q.kind))}};
    if (q.free_text) {
        const std::string text = normalize_label(*q.free_text);
        if (!text.empty()) j["free_text"] = text;
    }
    return j.dump();
}

std::string query_hash(const source_query& q) {
    return sha256_hex(canonical_query_json(q));
}

std::string candidate_wikify_text(std::string_view title, std::string_view body) {
    if (body.empty()) return std::string(title);
    std::string out(title);
    out += '\n';
    out += body;
    return out;
}

namespace {

std::string url_encode(std::string_view text) {
    static const char hex[] = "0123456789ABCDEF";
    std::string out;
    for (unsigned char c : text) {
        const bool unreserved = (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') ||
                                c == '-' || c == '_' || c == '.' || c == '~';
        if (unreserved) {
            out.push_back(static_cast<char>(c));
        } else {
            out.push_back('%');
            out.push_back(hex[c >> 4]);
            out.push_back(hex[c & 0x0f]);
        }
    }
    return out;
}

// Display form of a wiki page id: underscores back to spaces.
std::string concept_id_to_label(std::string_view id) {
    std::string out(id);
    std::replace(out.begin(), out.end(), '_', ' ');
    return out;
}

nlohmann::json parse_payload_json(std::string_view payload, const char* source_name) {
    try {
        return nlohmann::json::parse(payload);
    } catch (const nlohmann::json::parse_error& e) {
        throw decode_error(std::string(source_name) + " payload: " + e.what());
    }
}

std::string require_payload_string(const nlohmann::json& j, const char* field, const char* source_name) {
    auto it = j.find(field);
    if (it == j.end() || !it->is_string()) {
        throw decode_error(std::string(source_name) + " payload: item missing string field '" + field + "'");
    }
    return it->get<std::string>();
}

void reject_duplicate(std::unordered_set<std::string>& seen, const std::string& id, const char* source_name) {
    if (!seen.insert(id).second) {
        throw decode_error(std::string(source_name) + " payload: duplicate item id '" + id + "'");
    }
}

concept_class media_concept_class(std::string_view type) {
    if (type == "person") return concept_class::person;
    if (type == "loc" || type == "place") return concept_class::place;
    if (type == "org") return concept_class::organization;
    return concept_class::other; // "wiki" and anything else
}

} // namespace

std::vector<media_event_record> decode_media_payload(std::string_view payload) {
    const nlohmann::json j = parse_payload_json(payload, "media_event");
    auto events_it = j.find("events");
    if (events_it == j.end() || !events_it->is_array()) {
        throw decode_error("media_event payload: missing array field 'events'");
    }
    std::vector<media_event_record> out;
    std::unordered_set<std::string> seen;
    for (const auto& item : *events_it) {
        media_event_record rec;
        rec.id = require_payload_string(item, "id", "media_event");
        if (rec.id.empty()) {
            throw decode_error("media_event payload: item field 'id' must be non-empty");
        }
        reject_duplicate(seen, rec.id, "media_event");
        rec.title = require_payload_string(item, "title", "media_event");
        if (item.contains("summary")) {
            rec.summary = require_payload_string(item, "summary", "media_event");
        }
        if (item.contains("date")) {
            rec.date = parse_instant(require_payload_string(item, "date", "media_event"));
        }
        if (auto rel = item.find("relevance"); rel != item.end()) {
            if (!rel->is_number()) {
                throw decode_error("media_event payload: field 'relevance' must be a number");
            }
            rec.relevance = rel->get<double>();
        }
        if (auto concepts = item.find("concepts"); concepts != item.end()) {
            if (!concepts->is_array()) {
                throw decode_error("media_event payload: field 'concepts' must be an array");
            }
            rec.has_annotations = true;
            for (const auto& c : *concepts) {
                wiki_concept wc;
                wc.concept_id = normalize_concept_id(require_payload_string(c, "uri", "media_event"));
                if (wc.concept_id.empty()) {
                    throw decode_error("media_event payload: concept field 'uri' must be non-empty");
                }
                wc.label = c.contains("label") ? require_payload_string(c, "label", "media_event")
                                               : concept_id_to_label(wc.concept_id);
                wc.classification =
                    media_concept_class(c.contains("type") ? require_payload_string(c, "type", "media_event") : "wiki");
                if (auto score = c.find("score"); score != c.end()) {
                    if (!score->is_number()) {
                        throw decode_error("media_event payload: concept field 'score' must be a number");
                    }
                    wc.salience = score->get<double>();
                    if (wc.salience < 0.0 || wc.salience > 1.0) {
                        throw decode_error("media_event payload: concept field 'score' must lie in [0,1]");
                    }
                }
                rec.annotations.push_back(std::move(wc));
            }
        }
        out.push_back(std::move(rec));
    }
    return out;
}

std::vector<dataset_record> decode_dataset_payload(std::string_view payload) {
    const nlohmann::json j = parse_payload_json(payload, "dataset");
    auto result_it = j.find("result");
    if (result_it == j.end() || !result_it->is_object()) {
        throw decode_error("dataset payload: missing object field 'result'");
    }
    auto results_it = result_it->find("results");
    if (results_it == result_it->end() || !results_it->is_array()) {
        throw decode_error("dataset payload: missing array field 'result.results'");
    }
    std::vector<dataset_record> out;
    std::unordered_set<std::string> seen;
    for (const auto& item : *results_it) {
        dataset_record rec;
        rec.id = require_payload_string(item, "id", "dataset");
        if (rec.id.empty()) {
            throw decode_error("dataset payload: item field 'id' must be non-empty");
        }
        reject_duplicate(seen, rec.id, "dataset");
        rec.title = require_payload_string(item, "title", "dataset");
        if (item.contains("notes")) {
            rec.notes = require_payload_string(item, "notes", "dataset");
        }
        if (auto org = item.find("organization"); org != item.end() && org->is_object()) {
            if (org->contains("title")) {
                rec.publisher = require_payload_string(*org, "title", "dataset");
            }
        }
        if (item.contains("metadata_created")) {
            rec.created = parse_instant(require_payload_string(item, "metadata_created", "dataset"));
        }
        out.push_back(std::move(rec));
    }
    return out;
}

std::vector<kg_entity_record> decode_kg_payload(std::string_view payload) {
    const nlohmann::json j = parse_payload_json(payload, "kg_entity");
    auto list_it = j.find("itemListElement");
    if (list_it == j.end() || !list_it->is_array()) {
        throw decode_error("kg_entity payload: missing array field 'itemListElement'");
    }
    std::vector<kg_entity_record> out;
    std::unordered_set<std::string> seen;
    for (const auto& item : *list_it) {
        auto result_it = item.find("result");
        if (result_it == item.end() || !result_it->is_object()) {
            throw decode_error("kg_entity payload: item missing object field 'result'");
        }
        kg_entity_record rec;
        rec.id = require_payload_string(*result_it, "@id", "kg_entity");
        if (rec.id.empty()) {
            throw decode_error("kg_entity payload: item field '@id' must be non-empty");
        }
        reject_duplicate(seen, rec.id, "kg_entity");
        rec.name = require_payload_string(*result_it, "name", "kg_entity");
        if (result_it->contains("description")) {
            rec.description = require_payload_string(*result_it, "description", "kg_entity");
        }
        if (auto types = result_it->find("@type"); types != result_it->end()) {
            if (!types->is_array()) {
                throw decode_error("kg_entity payload: field '@type' must be an array");
            }
            for (const auto& t : *types) {
                if (!t.is_string()) {
                    throw decode_error("kg_entity payload: '@type' entries must be strings");
                }
                rec.types.push_back(t.get<std::string>());
            }
        }
        if (auto detail = result_it->find("detailedDescription");
            detail != result_it->end() && detail->is_object() && detail->contains("articleBody")) {
            const auto& body = (*detail)["articleBody"];
            if (body.is_string() && !body.get<std::string>().empty()) {
                if (!rec.description.empty()) rec.description += "\n";
                rec.description += body.get<std::string>();
            }
        }
        if (auto score = item.find("resultScore"); score != item.end()) {
            if (!score->is_number()) {
                throw decode_error("kg_entity payload: field 'resultScore' must be a number");
            }
            rec.result_score = score->get<double>();
        }
        out.push_back(std::move(rec));
    }
    return out;
}

namespace detail {

connector_base::connector_base(cache_store& cache, wikifier_client& wikifier, concept_catalog& catalog,
                               connector_options options, http_client* http)
    : cache_(cache),
      wikifier_(wikifier),
      catalog_(catalog),
      options_(std::move(options)),
      http_(http),
      throttle_(options_.min_request_interval, options_.max_in_flight) {}

std::string connector_base::fetch_payload(const source_query& q) {
    const std::string hash = query_hash(q);
    const std::string bucket(to_string(q.kind));
    if (auto hit = cache_.get(bucket, hash)) {
        return hit->payload;
    }
    if (options_.offline) {
        throw offline_miss_error("offline cache miss: no cached " + bucket + " response for query " +
                                 canonical_query_json(q) + " (hash " + hash + ")");
    }
    if (options_.endpoint.empty()) {
        throw config_error("no endpoint configured for source '" + bucket + "' in live mode");
    }
    if (http_ == nullptr) {
        throw config_error("no HTTP client available for source '" + bucket + "' in live mode");
    }
    std::string payload;
    {
        request_throttle::ticket ticket(throttle_);
        http_response response = http_->get(request_url(q));
        if (response.status != 200) {
            throw network_error("source '" + bucket + "' returned HTTP status " +
                                std::to_string(response.status));
        }
        payload = std::move(response.body);
    }
    cache_entry entry;
    entry.bucket = bucket;
    entry.query_hash = hash;
    entry.payload = payload;
    entry.fetched_at = std::chrono::time_point_cast<std::chrono::seconds>(std::chrono::system_clock::now());
    cache_.put(entry);
    return payload;
}

concept_set connector_base::build_concept_set(const std::vector<wiki_concept>& annotations) const {
    concept_set out;
    for (const auto& item : annotations) {
        catalog_.observe(item);
        if (options_.excluded_classes.count(item.classification) != 0) continue;
        out.insert(item.concept_id);
    }
    return out;
}

std::vector<wiki_concept> connector_base::annotate_text(const std::string& text) {
    std::vector<wiki_concept> out;
    if (text.empty()) return out;
    for (auto& ann : wikify(wikifier_, text, options_.min_salience)) {
        out.push_back(std::move(ann.linked));
    }
    return out;
}

} // namespace detail

std::vector<enrichment_candidate> media_event_connector::query(const source_query& q) {
    validate(q);
    if (q.kind != source_kind::media_event) {
        throw precondition_error("media_event_connector received a query for source '" +
                                 std::string(to_string(q.kind)) + "'");
    }
    const std::string payload = fetch_payload(q);
    auto records = decode_media_payload(payload);
    if (records.size() > static_cast<std::size_t>(q.limit)) {
        records.resize(static_cast<std::size_t>(q.limit));
    }
    std::vector<enrichment_candidate> out;
    out.reserve(records.size());
    for (auto& rec : records) {
        enrichment_candidate c;
        c.candidate_id = std::move(rec.id);
        c.kind = source_kind::media_event;
        c.title = std::move(rec.title);
        c.body = std::move(rec.summary);
        c.timestamp = rec.date;
        c.source_score = rec.relevance;
        const std::vector<wiki_concept> annotations =
            rec.has_annotations ? std::move(rec.annotations)
                                : annotate_text(candidate_wikify_text(c.title, c.body));
        c.concepts = build_concept_set(annotations);
        out.push_back(std::move(c));
    }
    return out;
}

std::string media_event_connector::request_url(const source_query& q) const {
    std::string url = options_.endpoint + "?resultType=events&lang=en&count=" + std::to_string(q.limit);
    for (const auto& item : q.concepts) {
        url += "&conceptUri=" + url_encode(normalize_concept_id(item));
    }
    if (q.free_text) {
        url += "&keyword=" + url_encode(*q.free_text);
    }
    if (!options_.api_key.empty()) {
        url += "&apiKey=" + url_encode(options_.api_key);
    }
    return url;
}

std::vector<enrichment_candidate> dataset_catalog_connector::query(const source_query& q) {
    validate(q);
    if (q.kind != source_kind::dataset) {
        throw precondition_error("dataset_catalog_connector received a query for source '" +
                                 std::string(to_string(q.kind)) + "'");
    }
    const std::string payload = fetch_payload(q);
    auto records = decode_dataset_payload(payload);
    if (records.size() > static_cast<std::size_t>(q.limit)) {
        records.resize(static_cast<std::size_t>(q.limit));
    }
    std::vector<enrichment_candidate> out;
    out.reserve(records.size());
    for (auto& rec : records) {
        enrichment_candidate c;
        c.candidate_id = std::move(rec.id);
        c.kind = source_kind::dataset;
        c.title = std::move(rec.title);
        c.body = std::move(rec.notes);
        if (!rec.publisher.empty()) {
            if (!c.body.empty()) c.body += "\n";
            c.body += "Publisher: " + rec.publisher;
        }
        c.timestamp = rec.created;
        c.concepts = build_concept_set(annotate_text(candidate_wikify_text(c.title, c.body)));
        out.push_back(std::move(c));
    }
    return out;
}

std::string dataset_catalog_connector::request_url(const source_query& q) const {
    // Conjunctive keyword query in the catalog's native syntax.
    std::string terms;
    for (const auto& item : q.concepts) {
        if (!terms.empty()) terms += " AND ";
        terms += "\"" + concept_id_to_label(normalize_concept_id(item)) + "\"";
    }
    if (q.free_text) {
        if (!terms.empty()) terms += " AND ";
        terms += *q.free_text;
    }
    return options_.endpoint + "?rows=" + std::to_string(q.limit) + "&q=" + url_encode(terms);
}

std::vector<enrichment_candidate> knowledge_graph_connector::query(const source_query& q) {
    validate(q);
    if (q.kind != source_kind::kg_entity) {
        throw precondition_error("knowledge_graph_connector received a query for source '" +
                                 std::string(to_string(q.kind)) + "'");
    }
    if (!options_.offline && options_.api_key.empty()) {
        throw config_error("knowledge graph live mode requires an API key (KG_API_KEY)");
    }

    // One request per concept; merged by entity id keeping the best score.
    std::vector<source_query> subqueries;
    for (const auto& item : q.concepts) {
        if (normalize_concept_id(item).empty()) continue;
        source_query sub;
        sub.concepts = {item};
        sub.limit = q.limit;
        sub.kind = source_kind::kg_entity;
        subqueries.push_back(std::move(sub));
    }
    if (q.free_text && !normalize_label(*q.free_text).empty()) {
        source_query sub;
        sub.free_text = q.free_text;
        sub.limit = q.limit;
        sub.kind = source_kind::kg_entity;
        subqueries.push_back(std::move(sub));
    }

    std::map<std::string, kg_entity_record> merged;
    for (const auto& sub : subqueries) {
        const std::string payload = fetch_payload(sub);
        for (auto& rec : decode_kg_payload(payload)) {
            auto [it, inserted] = merged.try_emplace(rec.id, rec);
            if (!inserted) {
                const double old_score = it->second.result_score.value_or(-1.0);
                const double new_score = rec.result_score.value_or(-1.0);
                if (new_score > old_score) it->second = std::move(rec);
            }
        }
    }

    std::vector<kg_entity_record> records;
    records.reserve(merged.size());
    for (auto& [id, rec] : merged) records.push_back(std::move(rec));
    std::sort(records.begin(), records.end(), [](const kg_entity_record& a, const kg_entity_record& b) {
        const bool a_scored = a.result_score.has_value();
        const bool b_scored = b.result_score.has_value();
        if (a_scored != b_scored) return a_scored;
        if (a_scored && *a.result_score != *b.result_score) return *a.result_score > *b.result_score;
        return a.id < b.id;
    });
    if (records.size() > static_cast<std::size_t>(q.limit)) {
        records.resize(static_cast<std::size_t>(q.limit));
    }

    std::vector<enrichment_candidate> out;
    out.reserve(records.size());
    for (auto& rec : records) {
        enrichment_candidate c;
        c.candidate_id = std::move(rec.id);
        c.kind = source_kind::kg_entity;
        c.title = std::move(rec.name);
        c.body = std::move(rec.description);
        c.source_score = rec.result_score;
        c.concepts = build_concept_set(annotate_text(candidate_wikify_text(c.title, c.body)));
        out.push_back(std::move(c));
    }
    return out;
}

std::string knowledge_graph_connector::request_url(const source_query& q) const {
    if (options_.api_key.empty()) {
        throw config_error("knowledge graph live mode requires an API key (KG_API_KEY)");
    }
    std::string term;
    if (!q.concepts.empty()) {
        term = concept_id_to_label(normalize_concept_id(q.concepts.front()));
    } else if (q.free_text) {
        term = *q.free_text;
    }
    return options_.endpoint + "?limit=" + std::to_string(q.limit) + "&query=" + url_encode(term) +
           "&key=" + url_encode(options_.api_key);
}

} // namespace enrichkit
