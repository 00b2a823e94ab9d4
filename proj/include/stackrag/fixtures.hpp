#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "stackrag/fs_util.hpp"
#include "stackrag/llm_mock.hpp"
#include "stackrag/se_transport.hpp"

namespace stackrag {

// Layout of a recorded fixture directory:
//   <root>/llm_script.json   chat script + recorded embeddings
//   <root>/se/<hash>.json    one StackExchange response per request
struct FixturePaths {
  std::filesystem::path llm_script;
  std::filesystem::path se_dir;

  static FixturePaths under(const std::filesystem::path& root) {
    return FixturePaths{root / "llm_script.json", root / "se"};
  }
};

// Returns every problem found; an empty list means the directory replays.
inline std::vector<std::string> validate_fixture_root(
    const std::filesystem::path& root) {
  namespace fs = std::filesystem;
  std::vector<std::string> problems;
  if (!fs::is_directory(root)) {
    problems.push_back("fixture root is not a directory: " + root.string());
    return problems;
  }
  const FixturePaths paths = FixturePaths::under(root);

  bool has_llm = fs::exists(paths.llm_script);
  if (has_llm) {
    try {
      nlohmann::json doc =
          nlohmann::json::parse(read_file_or_throw(paths.llm_script));
      for (const auto& entry : doc.value("chat", nlohmann::json::array())) {
        if (!entry.contains("match") || !entry["match"].is_string() ||
            !entry.contains("response") || !entry["response"].is_string()) {
          problems.push_back(
              "llm_script.json chat entry lacks string match/response");
        }
      }
      for (const auto& entry :
           doc.value("embeddings", nlohmann::json::array())) {
        if (!entry.contains("text_hash") || !entry["text_hash"].is_string() ||
            entry["text_hash"].get<std::string>().size() != 16) {
          problems.push_back(
              "llm_script.json embedding entry lacks a 16-hex text_hash");
          continue;
        }
        if (!entry.contains("values") || !entry["values"].is_array()) {
          problems.push_back("llm_script.json embedding entry lacks values");
        }
      }
    } catch (const std::exception& e) {
      problems.push_back(std::string("llm_script.json unreadable: ") +
                         e.what());
    }
  }

  bool has_se = fs::is_directory(paths.se_dir);
  if (has_se) {
    for (const auto& entry : fs::directory_iterator(paths.se_dir)) {
      if (!entry.is_regular_file() ||
          entry.path().extension() != ".json") {
        continue;
      }
      const std::string name = entry.path().filename().string();
      try {
        nlohmann::json doc =
            nlohmann::json::parse(read_file_or_throw(entry.path()));
        const std::string signature =
            doc.at("signature").get<std::string>();
        if (fixture_file_name(signature) != name) {
          problems.push_back("fixture " + name +
                             " is misnamed for its signature " + signature);
        }
        if (!doc.contains("status") || !doc["status"].is_number_integer()) {
          problems.push_back("fixture " + name + " lacks an integer status");
        }
        if (!doc.contains("body") || !doc["body"].is_string()) {
          problems.push_back("fixture " + name + " lacks a string body");
        }
      } catch (const std::exception& e) {
        problems.push_back("fixture " + name + " unreadable: " + e.what());
      }
    }
  }

  if (!has_llm && !has_se) {
    problems.push_back(
        "fixture root holds neither llm_script.json nor an se/ directory: " +
        root.string());
  }
  return problems;
}

}  // namespace stackrag
