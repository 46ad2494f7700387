#pragma once

#include <chrono>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "enrichkit/cache.hpp"
#include "enrichkit/concepts.hpp"
#include "enrichkit/http.hpp"
#include "enrichkit/model.hpp"
#include "enrichkit/wikify.hpp"

namespace enrichkit {

/// A query against one external source, driven by concept ids and/or a
/// free-text string.
struct source_query {
    std::vector<std::string> concepts;
    std::optional<std::string> free_text;
    int limit = 1;
    source_kind kind = source_kind::media_event;
};

/// Throws precondition_error unless the query has at least one concept or
/// a non-blank free_text, and limit >= 1.
void validate(const source_query& q);

/// Canonical JSON encoding: concept ids normalized, deduplicated, and
/// sorted; free text whitespace-normalized. Queries that differ only in
/// concept order or whitespace encode identically.
std::string canonical_query_json(const source_query& q);

/// SHA-256 of the canonical encoding; the cache key.
std::string query_hash(const source_query& q);

/// Uniform interface over the three candidate sources. The pipeline and
/// tests only see this; instrumented decorators wrap it to observe the
/// queries actually issued.
class source_connector {
public:
    virtual ~source_connector() = default;
    virtual source_kind kind() const = 0;
    virtual std::vector<enrichment_candidate> query(const source_query& q) = 0;
};

struct connector_options {
    bool offline = true;
    std::string endpoint;  // live mode only
    std::string api_key;   // live mode only
    double min_salience = 0.8;
    std::set<concept_class> excluded_classes = default_excluded_classes();
    std::chrono::milliseconds min_request_interval{200};
    int max_in_flight = 4;
};

// Decoded views of the remote payloads, exposed for payload-level tests
// and fixture tooling. Decoders throw decode_error naming the offending
// field and reject duplicate item ids.

struct media_event_record {
    std::string id;
    std::string title;
    std::string summary;
    std::optional<instant> date;
    std::optional<double> relevance;
    /// Source-supplied concept annotations; empty means the source gave
    /// none and the connector wikifies title+summary instead.
    std::vector<wiki_concept> annotations;
    bool has_annotations = false;
};

struct dataset_record {
    std::string id;
    std::string title;
    std::string notes;
    std::string publisher;
    std::optional<instant> created;
};

struct kg_entity_record {
    std::string id;
    std::string name;
    std::string description;
    std::vector<std::string> types;
    std::optional<double> result_score;
};

std::vector<media_event_record> decode_media_payload(std::string_view payload);
std::vector<dataset_record> decode_dataset_payload(std::string_view payload);
std::vector<kg_entity_record> decode_kg_payload(std::string_view payload);

/// The text a candidate's concepts are extracted from when the source
/// supplies no annotations: title and body joined by a newline.
std::string candidate_wikify_text(std::string_view title, std::string_view body);

namespace detail {

/// Shared fetch-through-cache plumbing: cache hit wins; offline misses
/// raise offline_miss_error naming the query; live mode fetches through
/// the throttle and records the response before returning it.
class connector_base : public source_connector {
public:
    connector_base(cache_store& cache, wikifier_client& wikifier, concept_catalog& catalog,
                   connector_options options, http_client* http);

protected:
    std::string fetch_payload(const source_query& q);

    /// Runs the annotations through the catalog and the class filter and
    /// returns the surviving ids as a set.
    concept_set build_concept_set(const std::vector<wiki_concept>& annotations) const;

    /// Wikifies the candidate text at the configured salience threshold.
    std::vector<wiki_concept> annotate_text(const std::string& text);

    virtual std::string request_url(const source_query& q) const = 0;

    cache_store& cache_;
    wikifier_client& wikifier_;
    concept_catalog& catalog_;
    connector_options options_;
    http_client* http_;
    request_throttle throttle_;
};

} // namespace detail

/// Media-event retrieval connector. Concepts come from source-supplied
/// annotations when present, otherwise from wikifying title+summary.
class media_event_connector final : public detail::connector_base {
public:
    using connector_base::connector_base;
    source_kind kind() const override { return source_kind::media_event; }
    std::vector<enrichment_candidate> query(const source_query& q) override;

private:
    std::string request_url(const source_query& q) const override;
};

/// Open-dataset catalog connector; concepts from wikifying title+description.
class dataset_catalog_connector final : public detail::connector_base {
public:
    using connector_base::connector_base;
    source_kind kind() const override { return source_kind::dataset; }
    std::vector<enrichment_candidate> query(const source_query& q) override;

private:
    std::string request_url(const source_query& q) const override;
};

/// Knowledge-graph connector. Issues one request per concept, merges by
/// entity id keeping the highest result score, and truncates the merged
/// list to the query limit.
class knowledge_graph_connector final : public detail::connector_base {
public:
    using connector_base::connector_base;
    source_kind kind() const override { return source_kind::kg_entity; }
    std::vector<enrichment_candidate> query(const source_query& q) override;

private:
    std::string request_url(const source_query& q) const override;
};

} // namespace enrichkit
