#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "enrichkit/cache.hpp"
#include "enrichkit/http.hpp"
#include "enrichkit/model.hpp"

namespace enrichkit {

/// One concept mention found by the wikification service.
struct wikifier_annotation {
    wiki_concept linked;
    std::size_t mention_start = 0;
    std::size_t mention_end = 0;
    int support_count = 0;

    bool operator==(const wikifier_annotation&) const = default;
};

/// Maps the free-form class names reported by the wikification service
/// onto the four classifications used by the filter. Matching is done on
/// normalized names; unknown names fall through to `other`.
class classification_map {
public:
    static classification_map defaults();

    /// Loads a JSON object {"upstream class name": "person|place|organization|other"}.
    /// Entries extend the defaults; later entries win.
    static classification_map load(const std::filesystem::path& file);

    void add(std::string_view upstream_name, concept_class cls);

    concept_class classify_name(std::string_view upstream_name) const;

    /// person beats place beats organization when several names match.
    concept_class classify(std::span<const std::string> upstream_names) const;

private:
    std::map<std::string, concept_class> table_;
};

struct wikifier_request {
    std::string text;
    std::string language = "en";
};

/// Canonical JSON encoding of a request; two requests with equal text and
/// language always hash identically.
std::string wikifier_request_canonical(const wikifier_request& request);
std::string wikifier_request_hash(const wikifier_request& request);

/// Entity-linking client interface. Returns annotations in response
/// order, unfiltered. Each client is configured for a single language.
class wikifier_client {
public:
    virtual ~wikifier_client() = default;
    virtual std::vector<wikifier_annotation> annotate(const wikifier_request& request) = 0;
    virtual std::string language() const { return "en"; }
};

struct wikifier_options {
    bool offline = true;
    std::string endpoint;                       // live mode only
    std::string language = "en";
    std::chrono::milliseconds min_request_interval{200};
    int max_in_flight = 4;
};

/// Cache-backed client. Responses are stored in the "wikifier" bucket
/// keyed by request hash, which is also how the fixture pack replays
/// recorded responses in offline mode. Live mode fetches through the
/// injected http_client on a cold cache and records the response.
class cached_wikifier_client final : public wikifier_client {
public:
    cached_wikifier_client(cache_store& cache, classification_map classes, wikifier_options options,
                           http_client* http = nullptr);

    std::vector<wikifier_annotation> annotate(const wikifier_request& request) override;
    std::string language() const override { return options_.language; }

    /// Parses a raw service payload into annotations. Exposed for fixture
    /// tooling; throws decode_error naming the offending field.
    std::vector<wikifier_annotation> parse_payload(std::string_view payload, std::string_view request_text) const;

private:
    cache_store& cache_;
    classification_map classes_;
    wikifier_options options_;
    http_client* http_;
    request_throttle throttle_;
};

/// Annotates `text` through the given client, keeps annotations with
/// salience >= min_salience, and deduplicates by concept id keeping the
/// highest-salience mention (first occurrence order preserved).
/// Empty text and min_salience outside [0,1] are precondition errors.
std::vector<wikifier_annotation> wikify(wikifier_client& client, std::string_view text, double min_salience);

} // namespace enrichkit
