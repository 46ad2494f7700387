#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <string_view>

#include "enrichkit/model.hpp"
#include "enrichkit/pipeline.hpp"

namespace enrichkit {

/// One source of configuration. Every field is optional; absent means
/// the layer has no opinion and resolution falls through to the next
/// layer. Secrets normally arrive through the environment layer only.
struct config_layer {
    std::optional<int> keyword_cutoff;
    std::optional<int> media_limit;
    std::optional<int> dataset_limit;
    std::optional<int> kg_limit;
    std::optional<int> top_n;
    std::optional<int> max_m;
    std::optional<double> min_salience;
    std::optional<std::set<concept_class>> excluded_classes;
    std::optional<bool> offline;
    std::optional<bool> emergent_exclude_reference;
    std::optional<bool> kg_emergent_only;

    std::optional<std::string> media_endpoint;
    std::optional<std::string> dataset_endpoint;
    std::optional<std::string> kg_endpoint;
    std::optional<std::string> wikifier_endpoint;
    std::optional<std::string> ee_api_key;
    std::optional<std::string> kg_api_key;

    std::optional<std::string> cache_dir;
    std::optional<std::string> classification_map;
    std::optional<int> parallelism;
    std::optional<bool> strict_judgments;
};

/// The merged view every command runs with.
struct run_config {
    pipeline_config pipeline;

    std::string media_endpoint;
    std::string dataset_endpoint;
    std::string kg_endpoint;
    std::string wikifier_endpoint;
    std::string ee_api_key;
    std::string kg_api_key;

    std::filesystem::path cache_dir = "cache";
    std::optional<std::string> classification_map;
    int parallelism = 1;
    bool strict_judgments = true;
};

/// Parses a declarative JSON config file. Endpoints live under nested
/// objects ("media_events": {"endpoint": ...}); pipeline knobs sit at the
/// top level. Unknown keys are config errors so typos surface instead of
/// silently falling back to defaults.
config_layer layer_from_json_file(const std::filesystem::path& file);

/// Reads EE_API_KEY, KG_API_KEY, ENRICHKIT_CACHE_DIR and
/// ENRICHKIT_OFFLINE. The lookup is injectable for tests; the
/// zero-argument form reads the process environment.
config_layer layer_from_env_lookup(
    const std::function<std::optional<std::string>(std::string_view)>& lookup);
config_layer layer_from_environment();

/// Merges layers with precedence flags > environment > file > built-in
/// defaults, then validates the result. Out-of-range values raise
/// config_error naming the field.
run_config resolve(const config_layer& flags, const config_layer& env, const config_layer& file);

} // namespace enrichkit
