#pragma once

#include <cstdlib>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "stackrag/errors.hpp"
#include "stackrag/pipeline.hpp"
#include "stackrag/text.hpp"

namespace stackrag {

// Raw command-line inputs; a value is present only if its flag was given.
struct AppOptions {
  std::optional<std::string> data_dir;
  bool offline = false;
  std::optional<std::string> fixtures;
  bool json = false;
  std::optional<int> max_iterations;
  std::optional<double> mmr_lambda;
};

struct AppConfig {
  std::filesystem::path data_dir;
  bool offline = false;
  bool json = false;
  std::optional<std::filesystem::path> fixtures;

  std::string llm_api_key;
  std::string llm_base_url = "https://api.openai.com/v1";
  std::string chat_model = "gpt-4o-mini";
  std::string embedding_model = "text-embedding-3-small";
  std::size_t embedding_dimension = 1536;

  std::string stackexchange_key;
  std::string se_base_url = "https://api.stackexchange.com";
  int se_daily_quota = 10000;
  int se_max_per_second = 25;

  SessionConfig session;
};

// Derived file locations under the data directory.
struct DataPaths {
  std::filesystem::path store_file;
  std::filesystem::path cache_file;
  std::filesystem::path quota_file;
  std::filesystem::path config_file;

  static DataPaths under(const std::filesystem::path& data_dir) {
    return DataPaths{
        data_dir / "store.jsonl",
        data_dir / "id_cache.json",
        data_dir / "quota.json",
        data_dir / "config.toml",
    };
  }
};

inline std::filesystem::path default_data_dir() {
  if (const char* home = std::getenv("HOME"); home && *home) {
    return std::filesystem::path(home) / ".stackrag";
  }
  return std::filesystem::path(".stackrag");
}

// Minimal key = value parser for the config file. Comments start with '#',
// values may be single- or double-quoted, unknown keys are ignored so old
// binaries tolerate newer files.
inline std::map<std::string, std::string> parse_kv_config(
    const std::string& text) {
  std::map<std::string, std::string> out;
  for (const std::string& raw_line : split_lines(text)) {
    std::string line = raw_line;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim_copy(line);
    if (line.empty()) continue;
    if (line.front() == '[') continue;  // section headers carry no data here
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw ParseError("config line is not key = value: " + raw_line);
    }
    std::string key = trim_copy(line.substr(0, eq));
    std::string value = trim_copy(line.substr(eq + 1));
    if (value.size() >= 2 &&
        ((value.front() == '"' && value.back() == '"') ||
         (value.front() == '\'' && value.back() == '\''))) {
      value = value.substr(1, value.size() - 2);
    }
    if (key.empty()) {
      throw ParseError("config line has an empty key: " + raw_line);
    }
    out[key] = value;
  }
  return out;
}

namespace detail {

inline int parse_int_setting(const std::string& key,
                             const std::string& value) {
  try {
    std::size_t used = 0;
    const int parsed = std::stoi(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return parsed;
  } catch (const std::exception&) {
    throw ParseError("config value for " + key + " is not an integer: " +
                     value);
  }
}

inline double parse_double_setting(const std::string& key,
                                   const std::string& value) {
  try {
    std::size_t used = 0;
    const double parsed = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return parsed;
  } catch (const std::exception&) {
    throw ParseError("config value for " + key + " is not a number: " +
                     value);
  }
}

}  // namespace detail

// Precedence: command-line flags beat environment variables beat the
// config file beat built-in defaults.
inline AppConfig resolve_config(
    const AppOptions& options,
    const std::map<std::string, std::string>& env,
    const std::optional<std::string>& config_file_text) {
  AppConfig config;

  if (config_file_text) {
    const auto file = parse_kv_config(*config_file_text);
    auto lookup = [&](const char* key) -> std::optional<std::string> {
      auto it = file.find(key);
      if (it == file.end()) return std::nullopt;
      return it->second;
    };
    if (auto v = lookup("llm_api_key")) config.llm_api_key = *v;
    if (auto v = lookup("llm_base_url")) config.llm_base_url = *v;
    if (auto v = lookup("chat_model")) config.chat_model = *v;
    if (auto v = lookup("embedding_model")) config.embedding_model = *v;
    if (auto v = lookup("embedding_dimension")) {
      const int dim = detail::parse_int_setting("embedding_dimension", *v);
      if (dim <= 0) throw ParseError("embedding_dimension must be positive");
      config.embedding_dimension = static_cast<std::size_t>(dim);
    }
    if (auto v = lookup("stackexchange_key")) config.stackexchange_key = *v;
    if (auto v = lookup("se_base_url")) config.se_base_url = *v;
    if (auto v = lookup("max_iterations")) {
      config.session.max_loop_iterations =
          detail::parse_int_setting("max_iterations", *v);
    }
    if (auto v = lookup("mmr_lambda")) {
      config.session.mmr_lambda =
          detail::parse_double_setting("mmr_lambda", *v);
    }
  }

  auto from_env = [&](const char* name) -> std::optional<std::string> {
    auto it = env.find(name);
    if (it == env.end() || it->second.empty()) return std::nullopt;
    return it->second;
  };
  if (auto v = from_env("STACKRAG_LLM_API_KEY")) config.llm_api_key = *v;
  if (auto v = from_env("STACKRAG_LLM_BASE_URL")) config.llm_base_url = *v;
  if (auto v = from_env("STACKEXCHANGE_KEY")) config.stackexchange_key = *v;
  if (auto v = from_env("STACKRAG_SE_BASE_URL")) config.se_base_url = *v;

  config.data_dir = options.data_dir
                        ? std::filesystem::path(*options.data_dir)
                        : default_data_dir();
  config.offline = options.offline;
  config.json = options.json;
  if (options.fixtures) {
    config.fixtures = std::filesystem::path(*options.fixtures);
  }
  if (options.max_iterations) {
    config.session.max_loop_iterations = *options.max_iterations;
  }
  if (options.mmr_lambda) config.session.mmr_lambda = *options.mmr_lambda;

  config.session.validate();
  return config;
}

// Snapshot of the process environment for the variables the tool reads.
inline std::map<std::string, std::string> environment_snapshot() {
  std::map<std::string, std::string> env;
  for (const char* name : {"STACKRAG_LLM_API_KEY", "STACKRAG_LLM_BASE_URL",
                           "STACKEXCHANGE_KEY", "STACKRAG_SE_BASE_URL"}) {
    if (const char* value = std::getenv(name); value && *value) {
      env[name] = value;
    }
  }
  return env;
}

}  // namespace stackrag
