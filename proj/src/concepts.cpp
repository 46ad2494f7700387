#include "enrichkit/concepts.hpp"

#include <algorithm>
#include <map>

#include <nlohmann/json.hpp>

#include "enrichkit/errors.hpp"
#include "enrichkit/jsonl.hpp"

namespace enrichkit {

keyword_concept_mapping keyword_concept_mapping::load_jsonl(const std::filesystem::path& file) {
    keyword_concept_mapping mapping;
    for_each_jsonl_line(file, [&](std::size_t line_number, const nlohmann::json& j) {
        const std::string context = file.string() + ":" + std::to_string(line_number);
        if (!j.is_object() || !j.contains("keyword") || !j["keyword"].is_string()) {
            throw decode_error(context + ": mapping entry needs a string field 'keyword'");
        }
        if (!j.contains("concepts") || !j["concepts"].is_array() || j["concepts"].empty()) {
            throw decode_error(context + ": mapping entry needs a non-empty array field 'concepts'");
        }
        std::vector<wiki_concept> concepts;
        for (const auto& item : j["concepts"]) {
            concepts.push_back(wiki_concept_from_json(item));
        }
        const std::string keyword = j["keyword"].get<std::string>();
        const std::string canonical = normalize_label(keyword);
        if (mapping.by_canonical_id_.count(canonical) != 0) {
            throw decode_error(context + ": duplicate mapping entry for keyword '" + keyword + "'");
        }
        mapping.add(keyword, std::move(concepts));
    });
    return mapping;
}

void keyword_concept_mapping::add(std::string_view keyword_phrase, std::vector<wiki_concept> concepts) {
    entry e;
    e.keyword_phrase = std::string(keyword_phrase);
    e.canonical_id = normalize_label(keyword_phrase);
    e.concepts = std::move(concepts);
    if (e.canonical_id.empty()) {
        throw precondition_error("mapping keyword '" + e.keyword_phrase + "' normalizes to an empty id");
    }
    by_canonical_id_[e.canonical_id] = entries_.size();
    entries_.push_back(std::move(e));
}

const keyword_concept_mapping::entry* keyword_concept_mapping::find(std::string_view canonical_id) const {
    auto it = by_canonical_id_.find(std::string(canonical_id));
    if (it == by_canonical_id_.end()) return nullptr;
    return &entries_[it->second];
}

concept_set map_feature_keywords(std::span<const feature_keyword> keywords,
                                 const keyword_concept_mapping& mapping) {
    concept_set out;
    for (const auto& keyword : keywords) {
        const auto* entry = mapping.find(keyword.canonical_id);
        if (entry == nullptr) {
            throw unmapped_keyword_error("no concept mapping for keyword '" + keyword.phrase + "'");
        }
        for (const auto& item : entry->concepts) {
            out.insert(item.concept_id);
        }
    }
    return out;
}

const std::set<concept_class>& default_excluded_classes() {
    static const std::set<concept_class> excluded{concept_class::person, concept_class::place};
    return excluded;
}

std::vector<wiki_concept> filter_concepts(std::vector<wiki_concept> concepts,
                                          const std::set<concept_class>& excluded) {
    std::erase_if(concepts, [&](const wiki_concept& c) { return excluded.count(c.classification) != 0; });
    return concepts;
}

void concept_catalog::observe(const wiki_concept& item) {
    if (item.concept_id.empty()) return;
    std::lock_guard<std::mutex> lock(mutex_);
    auto [it, inserted] = by_id_.try_emplace(item.concept_id, item);
    if (!inserted && item.salience > it->second.salience) {
        it->second = item;
    }
}

concept_class concept_catalog::classification_of(std::string_view concept_id) const {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = by_id_.find(std::string(concept_id));
    return it == by_id_.end() ? concept_class::other : it->second.classification;
}

std::optional<wiki_concept> concept_catalog::find(std::string_view concept_id) const {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = by_id_.find(std::string(concept_id));
    if (it == by_id_.end()) return std::nullopt;
    return it->second;
}

std::size_t concept_catalog::size() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return by_id_.size();
}

std::vector<concept_frequency> emergent_concepts(std::span<const ranked_entry> ranked_media, int top_n,
                                                 int max_m, const concept_set& reference,
                                                 const concept_catalog& catalog, bool exclude_reference) {
    if (top_n < 1 || max_m < 1) {
        throw precondition_error("emergent_concepts: top_n and max_m must be >= 1");
    }
    const std::size_t considered = std::min(static_cast<std::size_t>(top_n), ranked_media.size());

    std::map<std::string, int> counts;
    for (std::size_t i = 0; i < considered; ++i) {
        for (const auto& id : ranked_media[i].candidate.concepts.ids()) {
            const concept_class cls = catalog.classification_of(id);
            if (cls == concept_class::person || cls == concept_class::place) continue;
            if (exclude_reference && reference.contains(id)) continue;
            ++counts[id];
        }
    }

    std::vector<concept_frequency> out;
    out.reserve(counts.size());
    for (const auto& [id, count] : counts) {
        out.push_back({id, count});
    }
    std::sort(out.begin(), out.end(), [](const concept_frequency& a, const concept_frequency& b) {
        if (a.count != b.count) return a.count > b.count;
        return a.concept_id < b.concept_id;
    });
    if (out.size() > static_cast<std::size_t>(max_m)) {
        out.resize(static_cast<std::size_t>(max_m));
    }
    return out;
}

} // namespace enrichkit
