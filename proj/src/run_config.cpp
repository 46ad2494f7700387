#include "enrichkit/run_config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "enrichkit/errors.hpp"

namespace enrichkit {

namespace {

int as_int(const nlohmann::json& value, const std::string& key) {
    if (!value.is_number_integer()) {
        throw config_error("config key '" + key + "' must be an integer");
    }
    return value.get<int>();
}

double as_double(const nlohmann::json& value, const std::string& key) {
    if (!value.is_number()) {
        throw config_error("config key '" + key + "' must be a number");
    }
    return value.get<double>();
}

bool as_bool(const nlohmann::json& value, const std::string& key) {
    if (!value.is_boolean()) {
        throw config_error("config key '" + key + "' must be a boolean");
    }
    return value.get<bool>();
}

std::string as_string(const nlohmann::json& value, const std::string& key) {
    if (!value.is_string()) {
        throw config_error("config key '" + key + "' must be a string");
    }
    return value.get<std::string>();
}

/// Nested sections carry exactly one "endpoint" key.
std::string endpoint_of(const nlohmann::json& value, const std::string& section) {
    if (!value.is_object()) {
        throw config_error("config key '" + section + "' must be an object");
    }
    std::optional<std::string> endpoint;
    for (const auto& [key, sub] : value.items()) {
        if (key == "endpoint") {
            endpoint = as_string(sub, section + ".endpoint");
        } else {
            throw config_error("unknown config key '" + section + "." + key + "'");
        }
    }
    if (!endpoint) {
        throw config_error("config key '" + section + "' is missing 'endpoint'");
    }
    return *endpoint;
}

std::set<concept_class> as_class_set(const nlohmann::json& value, const std::string& key) {
    if (!value.is_array()) {
        throw config_error("config key '" + key + "' must be an array of class names");
    }
    std::set<concept_class> classes;
    for (const auto& item : value) {
        if (!item.is_string()) {
            throw config_error("config key '" + key + "' must contain only strings");
        }
        try {
            classes.insert(concept_class_from_string(item.get<std::string>()));
        } catch (const error& e) {
            throw config_error("config key '" + key + "': " + e.what());
        }
    }
    return classes;
}

template <typename T>
const std::optional<T>& first_of(const std::optional<T>& flags, const std::optional<T>& env,
                                 const std::optional<T>& file) {
    if (flags) return flags;
    if (env) return env;
    return file;
}

template <typename T>
T pick(const std::optional<T>& flags, const std::optional<T>& env, const std::optional<T>& file,
       T fallback) {
    const std::optional<T>& chosen = first_of(flags, env, file);
    return chosen ? *chosen : fallback;
}

bool parse_env_bool(const std::string& raw, const char* name) {
    if (raw == "1" || raw == "true") return true;
    if (raw == "0" || raw == "false") return false;
    throw config_error(std::string(name) + " must be one of 1, 0, true, false; got '" + raw + "'");
}

} // namespace

config_layer layer_from_json_file(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) {
        throw config_error("cannot open config file '" + file.string() + "'");
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();

    nlohmann::json root;
    try {
        root = nlohmann::json::parse(buffer.str());
    } catch (const nlohmann::json::parse_error& e) {
        throw config_error("config file '" + file.string() + "': " + e.what());
    }
    if (!root.is_object()) {
        throw config_error("config file '" + file.string() + "' must hold a JSON object");
    }

    config_layer layer;
    for (const auto& [key, value] : root.items()) {
        if (key == "media_events") {
            layer.media_endpoint = endpoint_of(value, key);
        } else if (key == "dataset_catalog") {
            layer.dataset_endpoint = endpoint_of(value, key);
        } else if (key == "knowledge_graph") {
            layer.kg_endpoint = endpoint_of(value, key);
        } else if (key == "wikifier") {
            layer.wikifier_endpoint = endpoint_of(value, key);
        } else if (key == "keyword_cutoff") {
            layer.keyword_cutoff = as_int(value, key);
        } else if (key == "media_limit") {
            layer.media_limit = as_int(value, key);
        } else if (key == "dataset_limit") {
            layer.dataset_limit = as_int(value, key);
        } else if (key == "kg_limit") {
            layer.kg_limit = as_int(value, key);
        } else if (key == "top_n") {
            layer.top_n = as_int(value, key);
        } else if (key == "max_m") {
            layer.max_m = as_int(value, key);
        } else if (key == "min_salience") {
            layer.min_salience = as_double(value, key);
        } else if (key == "excluded_classes") {
            layer.excluded_classes = as_class_set(value, key);
        } else if (key == "offline") {
            layer.offline = as_bool(value, key);
        } else if (key == "emergent_exclude_reference") {
            layer.emergent_exclude_reference = as_bool(value, key);
        } else if (key == "kg_emergent_only") {
            layer.kg_emergent_only = as_bool(value, key);
        } else if (key == "cache_dir") {
            layer.cache_dir = as_string(value, key);
        } else if (key == "classification_map") {
            layer.classification_map = as_string(value, key);
        } else if (key == "parallelism") {
            layer.parallelism = as_int(value, key);
        } else if (key == "strict_judgments") {
            layer.strict_judgments = as_bool(value, key);
        } else {
            throw config_error("unknown config key '" + key + "' in '" + file.string() + "'");
        }
    }
    return layer;
}

config_layer layer_from_env_lookup(
    const std::function<std::optional<std::string>(std::string_view)>& lookup) {
    config_layer layer;
    if (auto v = lookup("EE_API_KEY")) layer.ee_api_key = *v;
    if (auto v = lookup("KG_API_KEY")) layer.kg_api_key = *v;
    if (auto v = lookup("ENRICHKIT_CACHE_DIR")) layer.cache_dir = *v;
    if (auto v = lookup("ENRICHKIT_OFFLINE")) {
        layer.offline = parse_env_bool(*v, "ENRICHKIT_OFFLINE");
    }
    return layer;
}

config_layer layer_from_environment() {
    return layer_from_env_lookup([](std::string_view name) -> std::optional<std::string> {
        const char* value = std::getenv(std::string(name).c_str());
        if (value == nullptr) return std::nullopt;
        return std::string(value);
    });
}

run_config resolve(const config_layer& flags, const config_layer& env, const config_layer& file) {
    run_config out;
    const pipeline_config defaults;

    if (const auto& cutoff = first_of(flags.keyword_cutoff, env.keyword_cutoff, file.keyword_cutoff)) {
        out.pipeline.keyword_cutoff = *cutoff;
    }
    out.pipeline.media_limit = pick(flags.media_limit, env.media_limit, file.media_limit, defaults.media_limit);
    out.pipeline.dataset_limit =
        pick(flags.dataset_limit, env.dataset_limit, file.dataset_limit, defaults.dataset_limit);
    out.pipeline.kg_limit = pick(flags.kg_limit, env.kg_limit, file.kg_limit, defaults.kg_limit);
    out.pipeline.top_n = pick(flags.top_n, env.top_n, file.top_n, defaults.top_n);
    out.pipeline.max_m = pick(flags.max_m, env.max_m, file.max_m, defaults.max_m);
    out.pipeline.min_salience =
        pick(flags.min_salience, env.min_salience, file.min_salience, defaults.min_salience);
    out.pipeline.excluded_classes =
        pick(flags.excluded_classes, env.excluded_classes, file.excluded_classes, defaults.excluded_classes);
    out.pipeline.offline = pick(flags.offline, env.offline, file.offline, defaults.offline);
    out.pipeline.emergent_exclude_reference =
        pick(flags.emergent_exclude_reference, env.emergent_exclude_reference,
             file.emergent_exclude_reference, defaults.emergent_exclude_reference);
    out.pipeline.kg_emergent_only =
        pick(flags.kg_emergent_only, env.kg_emergent_only, file.kg_emergent_only, defaults.kg_emergent_only);

    out.media_endpoint = pick(flags.media_endpoint, env.media_endpoint, file.media_endpoint, std::string());
    out.dataset_endpoint =
        pick(flags.dataset_endpoint, env.dataset_endpoint, file.dataset_endpoint, std::string());
    out.kg_endpoint = pick(flags.kg_endpoint, env.kg_endpoint, file.kg_endpoint, std::string());
    out.wikifier_endpoint =
        pick(flags.wikifier_endpoint, env.wikifier_endpoint, file.wikifier_endpoint, std::string());
    out.ee_api_key = pick(flags.ee_api_key, env.ee_api_key, file.ee_api_key, std::string());
    out.kg_api_key = pick(flags.kg_api_key, env.kg_api_key, file.kg_api_key, std::string());

    out.cache_dir = pick(flags.cache_dir, env.cache_dir, file.cache_dir, std::string("cache"));
    if (const auto& map = first_of(flags.classification_map, env.classification_map, file.classification_map)) {
        out.classification_map = *map;
    }
    out.parallelism = pick(flags.parallelism, env.parallelism, file.parallelism, 1);
    out.strict_judgments = pick(flags.strict_judgments, env.strict_judgments, file.strict_judgments, true);

    try {
        validate(out.pipeline);
    } catch (const precondition_error& e) {
        throw config_error(e.what());
    }
    if (out.parallelism < 1) {
        throw config_error("parallelism must be >= 1");
    }
    return out;
}

} // namespace enrichkit
