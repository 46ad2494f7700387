#include "enrichkit/wikify.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "enrichkit/errors.hpp"

namespace enrichkit {

namespace {

// Percent-encodes everything outside the unreserved set.
std::string url_encode(std::string_view text) {
    static const char hex[] = "0123456789ABCDEF";
    std::string out;
    out.reserve(text.size() * 3 / 2);
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

// Wiki page URLs reduce to the page identifier; anything else is taken
// verbatim and normalized.
std::string concept_id_from_url(const std::string& url) {
    const auto pos = url.rfind("/wiki/");
    if (pos != std::string::npos) {
        return normalize_concept_id(url.substr(pos + 6));
    }
    return normalize_concept_id(url);
}

} // namespace

classification_map classification_map::defaults() {
    classification_map map;
    for (const char* name : {"person", "human", "people", "agent"}) {
        map.add(name, concept_class::person);
    }
    for (const char* name :
         {"place", "location", "loc", "country", "city", "region", "settlement", "geographic entity"}) {
        map.add(name, concept_class::place);
    }
    for (const char* name :
         {"organization", "organisation", "org", "company", "corporation", "business", "enterprise", "agency",
          "institution"}) {
        map.add(name, concept_class::organization);
    }
    return map;
}

classification_map classification_map::load(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) {
        throw io_error("cannot open class map '" + file.string() + "'");
    }
    nlohmann::json parsed;
    try {
        in >> parsed;
    } catch (const nlohmann::json::parse_error& e) {
        throw decode_error("class map '" + file.string() + "': " + e.what());
    }
    if (!parsed.is_object()) {
        throw decode_error("class map '" + file.string() + "': expected a JSON object");
    }
    classification_map map = defaults();
    for (const auto& [name, value] : parsed.items()) {
        if (!value.is_string()) {
            throw decode_error("class map '" + file.string() + "': value for '" + name + "' must be a string");
        }
        map.add(name, concept_class_from_string(value.get<std::string>()));
    }
    return map;
}

void classification_map::add(std::string_view upstream_name, concept_class cls) {
    table_[normalize_label(upstream_name)] = cls;
}

concept_class classification_map::classify_name(std::string_view upstream_name) const {
    auto it = table_.find(normalize_label(upstream_name));
    return it == table_.end() ? concept_class::other : it->second;
}

concept_class classification_map::classify(std::span<const std::string> upstream_names) const {
    bool saw_place = false;
    bool saw_org = false;
    for (const auto& name : upstream_names) {
        switch (classify_name(name)) {
        case concept_class::person: return concept_class::person;
        case concept_class::place: saw_place = true; break;
        case concept_class::organization: saw_org = true; break;
        case concept_class::other: break;
        }
    }
    if (saw_place) return concept_class::place;
    if (saw_org) return concept_class::organization;
    return concept_class::other;
}

std::string wikifier_request_canonical(const wikifier_request& request) {
    return nlohmann::json{{"language", request.language}, {"text", request.text}}.dump();
}

std::string wikifier_request_hash(const wikifier_request& request) {
    return sha256_hex(wikifier_request_canonical(request));
}

cached_wikifier_client::cached_wikifier_client(cache_store& cache, classification_map classes,
                                               wikifier_options options, http_client* http)
    : cache_(cache),
      classes_(std::move(classes)),
      options_(std::move(options)),
      http_(http),
      throttle_(options_.min_request_interval, options_.max_in_flight) {}

std::vector<wikifier_annotation> cached_wikifier_client::parse_payload(std::string_view payload,
                                                                       std::string_view request_text) const {
    nlohmann::json parsed;
    try {
        parsed = nlohmann::json::parse(payload);
    } catch (const nlohmann::json::parse_error& e) {
        throw decode_error(std::string("wikifier payload: ") + e.what());
    }
    auto annotations_it = parsed.find("annotations");
    if (annotations_it == parsed.end() || !annotations_it->is_array()) {
        throw decode_error("wikifier payload: missing field 'annotations'");
    }
    std::vector<wikifier_annotation> out;
    out.reserve(annotations_it->size());
    for (const auto& item : *annotations_it) {
        wikifier_annotation ann;
        if (!item.contains("title") || !item["title"].is_string()) {
            throw decode_error("wikifier payload: annotation missing field 'title'");
        }
        ann.linked.label = item["title"].get<std::string>();
        if (!item.contains("url") || !item["url"].is_string()) {
            throw decode_error("wikifier payload: annotation missing field 'url'");
        }
        ann.linked.concept_id = concept_id_from_url(item["url"].get<std::string>());
        if (ann.linked.concept_id.empty()) {
            throw decode_error("wikifier payload: annotation field 'url' yields an empty concept id");
        }
        if (!item.contains("pageRank") || !item["pageRank"].is_number()) {
            throw decode_error("wikifier payload: annotation missing field 'pageRank'");
        }
        ann.linked.salience = item["pageRank"].get<double>();
        if (ann.linked.salience < 0.0 || ann.linked.salience > 1.0) {
            throw decode_error("wikifier payload: field 'pageRank' must lie in [0,1]");
        }
        std::vector<std::string> class_names;
        if (auto classes_it = item.find("classes"); classes_it != item.end()) {
            if (!classes_it->is_array()) {
                throw decode_error("wikifier payload: annotation field 'classes' must be an array");
            }
            for (const auto& name : *classes_it) {
                if (!name.is_string()) {
                    throw decode_error("wikifier payload: class names must be strings");
                }
                class_names.push_back(name.get<std::string>());
            }
        }
        ann.linked.classification = classes_.classify(class_names);

        if (auto support_it = item.find("support"); support_it != item.end() && support_it->is_array() &&
                                                    !support_it->empty()) {
            const auto& first = support_it->front();
            if (!first.contains("from") || !first.contains("to")) {
                throw decode_error("wikifier payload: support entries need 'from' and 'to'");
            }
            ann.mention_start = first["from"].get<std::size_t>();
            ann.mention_end = first["to"].get<std::size_t>();
            ann.support_count = static_cast<int>(support_it->size());
        } else {
            ann.mention_start = 0;
            ann.mention_end = request_text.size();
            ann.support_count = 1;
        }
        if (ann.mention_start >= ann.mention_end || ann.mention_end > request_text.size()) {
            throw decode_error("wikifier payload: support span [" + std::to_string(ann.mention_start) + "," +
                               std::to_string(ann.mention_end) + ") exceeds text of length " +
                               std::to_string(request_text.size()));
        }
        out.push_back(std::move(ann));
    }
    return out;
}

std::vector<wikifier_annotation> cached_wikifier_client::annotate(const wikifier_request& request) {
    const std::string hash = wikifier_request_hash(request);
    if (auto hit = cache_.get("wikifier", hash)) {
        return parse_payload(hit->payload, request.text);
    }
    if (options_.offline) {
        throw offline_miss_error("offline cache miss: wikifier has no recorded response for text \"" +
                                 request.text + "\" (hash " + hash + ")");
    }
    if (http_ == nullptr || options_.endpoint.empty()) {
        throw config_error("wikifier live mode requires an endpoint and an HTTP client");
    }
    std::string payload;
    {
        request_throttle::ticket ticket(throttle_);
        const std::string url =
            options_.endpoint + "?lang=" + url_encode(request.language) + "&text=" + url_encode(request.text);
        http_response response = http_->get(url);
        if (response.status != 200) {
            throw network_error("wikifier request failed with HTTP status " + std::to_string(response.status));
        }
        payload = std::move(response.body);
    }
    // Validate before caching so a bad payload is never replayed.
    auto annotations = parse_payload(payload, request.text);
    cache_entry entry;
    entry.bucket = "wikifier";
    entry.query_hash = hash;
    entry.payload = std::move(payload);
    entry.fetched_at = std::chrono::time_point_cast<std::chrono::seconds>(std::chrono::system_clock::now());
    cache_.put(entry);
    return annotations;
}

std::vector<wikifier_annotation> wikify(wikifier_client& client, std::string_view text, double min_salience) {
    if (text.empty()) {
        throw precondition_error("wikify: text must be non-empty");
    }
    if (min_salience < 0.0 || min_salience > 1.0) {
        throw precondition_error("wikify: min_salience must lie in [0,1]");
    }
    wikifier_request request;
    request.text = std::string(text);
    request.language = client.language();
    auto annotations = client.annotate(request);

    std::vector<wikifier_annotation> out;
    out.reserve(annotations.size());
    for (auto& ann : annotations) {
        if (ann.linked.salience < min_salience) continue;
        auto existing = std::find_if(out.begin(), out.end(), [&](const wikifier_annotation& kept) {
            return kept.linked.concept_id == ann.linked.concept_id;
        });
        if (existing == out.end()) {
            out.push_back(std::move(ann));
        } else if (ann.linked.salience > existing->linked.salience) {
            *existing = std::move(ann);
        }
    }
    return out;
}

} // namespace enrichkit
