// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "watc/errors.hpp"
#include "watc/exec/harness.hpp"
#include "watc/pipeline/backend.hpp"
#include "watc/pipeline/prompt.hpp"

namespace watc {

/// Everything a run needs, resolved before any subcommand executes.
/// Precedence: built-in defaults, then config file, then WATC_* environment
/// variables, then command-line flags.
struct RunConfig {
    pipeline::BackendConfig backend;
    exec::ToolchainConfig toolchain;
    std::size_t max_prompt_tokens = pipeline::kDefaultMaxSequenceTokens;
    int parallel_functions = 1;
    bool record_timings = false;
    std::string decomp_suffix = ".decomp.c";
};

namespace config_detail {

inline double to_double(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        double v = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "' expects a number, got '" + value + "'");
    }
}

inline long to_long(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        long v = std::stol(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "' expects an integer, got '" + value + "'");
    }
}

inline bool to_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1" || value == "yes") return true;
    if (value == "false" || value == "0" || value == "no") return false;
    throw ConfigError("key '" + key + "' expects a boolean, got '" + value + "'");
}

/// Applies one key. The single switchboard keeps file, env, and flag layers
/// agreeing on names and types.
inline void apply_key(RunConfig& config, const std::string& key, const std::string& value) {
    if (key == "backend_endpoint") config.backend.endpoint = value;
    else if (key == "backend_model") config.backend.model = value;
    else if (key == "backend_temperature") config.backend.temperature = to_double(key, value);
    else if (key == "backend_max_output_tokens")
        config.backend.max_output_tokens = static_cast<int>(to_long(key, value));
    else if (key == "backend_timeout_seconds")
        config.backend.timeout_seconds = static_cast<int>(to_long(key, value));
    else if (key == "backend_retry_budget")
        config.backend.retry_budget = static_cast<int>(to_long(key, value));
    else if (key == "mock_table") config.backend.mock_table_path = value;
    else if (key == "api_key_env") config.backend.api_key_env = value;
    else if (key == "compile_template") config.toolchain.compile_template = value;
    else if (key == "run_template") config.toolchain.run_template = value;
    else if (key == "artifact_suffix") config.toolchain.artifact_suffix = value;
    else if (key == "compile_timeout_seconds")
        config.toolchain.compile_timeout_seconds = to_double(key, value);
    else if (key == "run_timeout_seconds")
        config.toolchain.run_timeout_seconds = to_double(key, value);
    else if (key == "scratch_root") config.toolchain.scratch_root = value;
    else if (key == "byte_exact") config.toolchain.byte_exact = to_bool(key, value);
    else if (key == "exec_parallel")
        config.toolchain.parallel = static_cast<int>(to_long(key, value));
    else if (key == "max_prompt_tokens")
        config.max_prompt_tokens = static_cast<std::size_t>(to_long(key, value));
    else if (key == "parallel_functions")
        config.parallel_functions = static_cast<int>(to_long(key, value));
    else if (key == "record_timings") config.record_timings = to_bool(key, value);
    else if (key == "decomp_suffix") config.decomp_suffix = value;
    else throw ConfigError("unknown key '" + key + "'");
}

inline const std::vector<std::string>& known_keys() {
    static const std::vector<std::string> keys = {
        "backend_endpoint",        "backend_model",
        "backend_temperature",     "backend_max_output_tokens",
        "backend_timeout_seconds", "backend_retry_budget",
        "mock_table",              "api_key_env",
        "compile_template",        "run_template",
        "artifact_suffix",         "compile_timeout_seconds",
        "run_timeout_seconds",     "scratch_root",
        "byte_exact",              "exec_parallel",
        "max_prompt_tokens",       "parallel_functions",
        "record_timings",          "decomp_suffix",
    };
    return keys;
}

inline std::string json_scalar_to_string(const std::string& key, const nlohmann::json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number_integer()) return std::to_string(v.get<long>());
    if (v.is_number_float()) {
        std::ostringstream out;
        out << v.get<double>();
        return out.str();
    }
    throw ConfigError("key '" + key + "' has a non-scalar value");
}

}  // namespace config_detail

/// Parses one flat JSON object of settings. Unknown keys are errors so typos
/// fail loudly instead of silently running with defaults.
inline void apply_config_text(RunConfig& config, const std::string& json_text,
                              const std::string& origin) {
    nlohmann::json doc = nlohmann::json::parse(json_text, nullptr, false);
    if (doc.is_discarded()) throw ConfigError(origin + " is not valid JSON");
    if (!doc.is_object()) throw ConfigError(origin + " must be a JSON object");
    for (const auto& [key, value] : doc.items())
        config_detail::apply_key(config, key,
                                 config_detail::json_scalar_to_string(key, value));
}

inline void apply_config_file(RunConfig& config, const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read config file " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    apply_config_text(config, buf.str(), path);
}

/// Overlays WATC_<KEY> environment variables, e.g. WATC_BACKEND_ENDPOINT.
inline void apply_env(RunConfig& config) {
    for (const auto& key : config_detail::known_keys()) {
        std::string env_name = "WATC_";
        for (char ch : key) env_name += static_cast<char>(std::toupper(ch));
        if (const char* value = std::getenv(env_name.c_str()))
            config_detail::apply_key(config, key, value);
    }
}

/// Builds the effective config: defaults, optional file, then environment.
/// Flag overrides land afterward through apply_key.
inline RunConfig load_config(const std::string& config_path = "") {
    RunConfig config;
    if (!config_path.empty()) apply_config_file(config, config_path);
    apply_env(config);
    return config;
}

inline void apply_override(RunConfig& config, const std::string& key, const std::string& value) {
    config_detail::apply_key(config, key, value);
}

}  // namespace watc
