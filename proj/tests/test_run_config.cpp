#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>

#include "enrichkit/errors.hpp"
#include "enrichkit/run_config.hpp"

using namespace enrichkit;

namespace {

std::filesystem::path write_config(const char* tag, const std::string& body) {
    const auto file = std::filesystem::temp_directory_path() /
                      ("enrichkit_config_" + std::string(tag) + "_" + std::to_string(::getpid()) + ".json");
    std::ofstream out(file, std::ios::trunc);
    out << body;
    return file;
}

/// Environment lookup backed by a plain map.
auto env_of(std::map<std::string, std::string> vars) {
    return [vars = std::move(vars)](std::string_view name) -> std::optional<std::string> {
        auto it = vars.find(std::string(name));
        if (it == vars.end()) return std::nullopt;
        return it->second;
    };
}

} // namespace

TEST_CASE("defaults apply when no layer has an opinion") {
    const auto rc = resolve({}, {}, {});
    const pipeline_config defaults;
    CHECK_FALSE(rc.pipeline.keyword_cutoff.has_value());
    CHECK(rc.pipeline.media_limit == defaults.media_limit);
    CHECK(rc.pipeline.dataset_limit == defaults.dataset_limit);
    CHECK(rc.pipeline.kg_limit == defaults.kg_limit);
    CHECK(rc.pipeline.top_n == defaults.top_n);
    CHECK(rc.pipeline.max_m == defaults.max_m);
    CHECK(rc.pipeline.min_salience == defaults.min_salience);
    CHECK(rc.pipeline.excluded_classes == default_excluded_classes());
    CHECK(rc.pipeline.offline == true);
    CHECK(rc.media_endpoint.empty());
    CHECK(rc.ee_api_key.empty());
    CHECK(rc.cache_dir == std::filesystem::path("cache"));
    CHECK(rc.parallelism == 1);
    CHECK(rc.strict_judgments == true);
}

TEST_CASE("flags beat environment beats file") {
    config_layer file;
    file.media_limit = 5;
    file.cache_dir = "from_file";
    file.offline = true;
    file.ee_api_key = "file-key";

    config_layer env;
    env.cache_dir = "from_env";
    env.offline = false;
    env.ee_api_key = "env-key";

    config_layer flags;
    flags.cache_dir = "from_flags";

    const auto rc = resolve(flags, env, file);
    // Only the file set media_limit: it wins by falling through.
    CHECK(rc.pipeline.media_limit == 5);
    // The environment beats the file where both speak.
    CHECK(rc.pipeline.offline == false);
    CHECK(rc.ee_api_key == "env-key");
    // Flags beat everything.
    CHECK(rc.cache_dir == std::filesystem::path("from_flags"));
}

TEST_CASE("json config parses nested endpoints and pipeline knobs") {
    const auto file = write_config("full", R"({
        "media_events": {"endpoint": "http://media.test/api"},
        "dataset_catalog": {"endpoint": "http://data.test/api"},
        "knowledge_graph": {"endpoint": "http://kg.test/api"},
        "wikifier": {"endpoint": "http://wiki.test/api"},
        "keyword_cutoff": 3,
        "media_limit": 50,
        "min_salience": 0.6,
        "excluded_classes": ["person", "place", "organization"],
        "offline": false,
        "kg_emergent_only": true,
        "cache_dir": "/tmp/enrichkit-cache",
        "parallelism": 8,
        "strict_judgments": false
    })");

    const auto layer = layer_from_json_file(file);
    CHECK(layer.media_endpoint == "http://media.test/api");
    CHECK(layer.dataset_endpoint == "http://data.test/api");
    CHECK(layer.kg_endpoint == "http://kg.test/api");
    CHECK(layer.wikifier_endpoint == "http://wiki.test/api");
    CHECK(layer.keyword_cutoff == 3);
    CHECK(layer.media_limit == 50);
    CHECK(layer.min_salience == 0.6);
    REQUIRE(layer.excluded_classes.has_value());
    CHECK(layer.excluded_classes->size() == 3);
    CHECK(layer.offline == false);
    CHECK(layer.kg_emergent_only == true);
    CHECK(layer.cache_dir == "/tmp/enrichkit-cache");
    CHECK(layer.parallelism == 8);
    CHECK(layer.strict_judgments == false);
    // Untouched fields stay absent rather than defaulting.
    CHECK_FALSE(layer.dataset_limit.has_value());
    CHECK_FALSE(layer.ee_api_key.has_value());
    std::filesystem::remove(file);
}

TEST_CASE("unknown config keys are rejected") {
    const auto top = write_config("unknown_top", R"({"media_events_limit": 9})");
    CHECK_THROWS_WITH_AS(layer_from_json_file(top),
                         ("unknown config key 'media_events_limit' in '" + top.string() + "'").c_str(),
                         config_error);
    std::filesystem::remove(top);

    const auto nested = write_config("unknown_nested", R"({"media_events": {"endpoint": "x", "key": "y"}})");
    CHECK_THROWS_WITH_AS(layer_from_json_file(nested), "unknown config key 'media_events.key'",
                         config_error);
    std::filesystem::remove(nested);

    const auto missing_endpoint = write_config("no_endpoint", R"({"wikifier": {}})");
    CHECK_THROWS_WITH_AS(layer_from_json_file(missing_endpoint),
                         "config key 'wikifier' is missing 'endpoint'", config_error);
    std::filesystem::remove(missing_endpoint);
}

TEST_CASE("config files reject wrong value types") {
    const auto bad_int = write_config("bad_int", R"({"media_limit": "lots"})");
    CHECK_THROWS_WITH_AS(layer_from_json_file(bad_int), "config key 'media_limit' must be an integer",
                         config_error);
    std::filesystem::remove(bad_int);

    const auto bad_class = write_config("bad_class", R"({"excluded_classes": ["person", "ghost"]})");
    CHECK_THROWS_AS(layer_from_json_file(bad_class), config_error);
    std::filesystem::remove(bad_class);

    const auto not_object = write_config("not_object", R"([1, 2])");
    CHECK_THROWS_AS(layer_from_json_file(not_object), config_error);
    std::filesystem::remove(not_object);

    CHECK_THROWS_AS(layer_from_json_file("/nonexistent/enrichkit.json"), config_error);
}

TEST_CASE("environment layer reads the documented variables") {
    const auto layer = layer_from_env_lookup(env_of({
        {"EE_API_KEY", "media-secret"},
        {"KG_API_KEY", "kg-secret"},
        {"ENRICHKIT_CACHE_DIR", "/var/cache/enrichkit"},
        {"ENRICHKIT_OFFLINE", "false"},
        {"UNRELATED", "ignored"},
    }));
    CHECK(layer.ee_api_key == "media-secret");
    CHECK(layer.kg_api_key == "kg-secret");
    CHECK(layer.cache_dir == "/var/cache/enrichkit");
    CHECK(layer.offline == false);
    CHECK_FALSE(layer.media_limit.has_value());

    const auto empty = layer_from_env_lookup(env_of({}));
    CHECK_FALSE(empty.ee_api_key.has_value());
    CHECK_FALSE(empty.offline.has_value());
}

TEST_CASE("ENRICHKIT_OFFLINE accepts only the four spellings") {
    for (const char* truthy : {"1", "true"}) {
        CHECK(layer_from_env_lookup(env_of({{"ENRICHKIT_OFFLINE", truthy}})).offline == true);
    }
    for (const char* falsy : {"0", "false"}) {
        CHECK(layer_from_env_lookup(env_of({{"ENRICHKIT_OFFLINE", falsy}})).offline == false);
    }
    CHECK_THROWS_WITH_AS(layer_from_env_lookup(env_of({{"ENRICHKIT_OFFLINE", "yes"}})),
                         "ENRICHKIT_OFFLINE must be one of 1, 0, true, false; got 'yes'", config_error);
}

TEST_CASE("resolution validates the merged pipeline") {
    config_layer flags;
    flags.media_limit = 0;
    CHECK_THROWS_WITH_AS(resolve(flags, {}, {}), "media_limit must be >= 1", config_error);

    config_layer env;
    env.min_salience = 2.0;
    CHECK_THROWS_AS(resolve({}, env, {}), config_error);

    config_layer file;
    file.parallelism = -2;
    CHECK_THROWS_WITH_AS(resolve({}, {}, file), "parallelism must be >= 1", config_error);
}
