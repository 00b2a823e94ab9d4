#pragma once

#include <unistd.h>

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "stackrag/fs_util.hpp"
#include "stackrag/llm_mock.hpp"
#include "stackrag/se_client.hpp"
#include "stackrag/se_transport.hpp"

namespace testsupport {

// Unique scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<std::uint64_t> counter{0};
    const auto base = std::filesystem::temp_directory_path();
    path_ = base / ("stackrag_test_" + std::to_string(::getpid()) + "_" +
                    std::to_string(counter.fetch_add(1)));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& leaf) const {
    return path_ / leaf;
  }

 private:
  std::filesystem::path path_;
};

inline nlohmann::json question_item(std::int64_t id, const std::string& title,
                                    const std::string& body,
                                    std::int64_t accepted_answer_id,
                                    std::int64_t creation_date = 1700000000) {
  nlohmann::json item = {
      {"question_id", id},
      {"link", "https://stackoverflow.com/q/" + std::to_string(id)},
      {"title", title},
      {"body", body},
      {"creation_date", creation_date},
  };
  if (accepted_answer_id > 0) {
    item["accepted_answer_id"] = accepted_answer_id;
  }
  return item;
}

inline nlohmann::json answer_item(std::int64_t id, std::int64_t question_id,
                                  const std::string& body, std::int64_t score,
                                  bool accepted,
                                  std::int64_t creation_date = 1700000000) {
  return nlohmann::json{
      {"answer_id", id},       {"question_id", question_id},
      {"body", body},          {"score", score},
      {"is_accepted", accepted}, {"creation_date", creation_date},
  };
}

// Mirrors StackExchangeClient's request shape for a keyword search.
inline stackrag::SeRequest search_request(
    const std::string& keyword,
    const stackrag::SeClientConfig& config = {}) {
  stackrag::SeRequest request;
  request.path = "/2.3/search/advanced";
  request.params = {
      {"q", keyword},
      {"site", config.site},
      {"filter", config.filter},
      {"pagesize", std::to_string(config.page_size)},
  };
  return request;
}

// Mirrors the client's answer-fetch request for one batch of sorted ids.
inline stackrag::SeRequest answers_request(
    const std::vector<std::int64_t>& sorted_ids,
    const stackrag::SeClientConfig& config = {}) {
  std::string joined;
  for (std::int64_t id : sorted_ids) {
    if (!joined.empty()) joined.push_back(';');
    joined += std::to_string(id);
  }
  stackrag::SeRequest request;
  request.path = "/2.3/questions/" + joined + "/answers";
  request.params = {
      {"site", config.site},
      {"filter", config.filter},
      {"sort", "votes"},
  };
  return request;
}

inline void write_se_fixture(const std::filesystem::path& se_dir,
                             const stackrag::SeRequest& request,
                             const nlohmann::json& body, int status = 200) {
  std::filesystem::create_directories(se_dir);
  stackrag::save_fixture(se_dir, stackrag::canonical_signature(request),
                         stackrag::SeResponse{status, body.dump()});
}

inline nlohmann::json items_body(const nlohmann::json& items) {
  return nlohmann::json{{"items", items},
                        {"has_more", false},
                        {"quota_max", 10000},
                        {"quota_remaining", 9990}};
}

struct ScriptEntry {
  std::string match;
  std::string response;
};

inline std::shared_ptr<stackrag::ScriptedGateway> make_gateway(
    const std::vector<ScriptEntry>& entries,
    stackrag::GatewayConfig config) {
  auto gateway = std::make_shared<stackrag::ScriptedGateway>(config);
  for (const auto& entry : entries) {
    gateway->enqueue(entry.match, entry.response);
  }
  return gateway;
}

inline void write_llm_script(const std::filesystem::path& file,
                             const std::vector<ScriptEntry>& entries) {
  nlohmann::json doc;
  doc["chat"] = nlohmann::json::array();
  for (const auto& entry : entries) {
    doc["chat"].push_back({{"match", entry.match},
                           {"response", entry.response}});
  }
  doc["embeddings"] = nlohmann::json::array();
  stackrag::atomic_write_file(file, doc.dump(2) + "\n");
}

// Prompt substrings that uniquely identify each agent.
inline constexpr const char* kComplexityMark =
    "complex enough to be divided into sub-questions";
inline constexpr const char* kKeywordMark = "question-to-query parser";
inline constexpr const char* kScorerMark =
    "determine how useful the evidence is";
inline constexpr const char* kCheckerMark =
    "enough evidence to answer the question or not";
inline constexpr const char* kGeneratorMark =
    "the final piece of this architecture";

// Paper-scale scenario: two keyword searches of 30 hits overlapping in 10
// (60 raw, 50 unique), 35 with accepted answers, 15 without. One answer
// batch covers ids 1001..1035. Chat script: extraction, 15 scores of "5",
// sufficiency TRUE, and a canned final answer.
struct FunnelScenario {
  std::string question = "How do I scale websocket connections?";
  std::vector<std::string> keywords = {"websocket scaling",
                                       "socket io cluster"};
  std::string answer_text =
      "Scale out with a message broker and sticky sessions.";
  std::vector<ScriptEntry> script;
  std::filesystem::path se_dir;

  std::vector<std::int64_t> answered_ids() const {
    std::vector<std::int64_t> ids;
    for (std::int64_t id = 1001; id <= 1035; ++id) ids.push_back(id);
    return ids;
  }
};

inline FunnelScenario build_funnel_scenario(
    const std::filesystem::path& fixture_root) {
  FunnelScenario scenario;
  scenario.se_dir = fixture_root / "se";

  auto question_for = [](std::int64_t id) {
    const bool answered = id <= 1035;
    // Distinct bodies steer BM25 and the hash embeddings apart.
    return question_item(
        id, "Websocket scaling question " + std::to_string(id),
        "<p>How to scale websocket connections, variant " +
            std::to_string(id) + " topic " + std::to_string(id % 7) +
            "</p>",
        answered ? id * 10 : 0);
  };

  nlohmann::json first = nlohmann::json::array();
  for (std::int64_t id = 1001; id <= 1030; ++id) {
    first.push_back(question_for(id));
  }
  nlohmann::json second = nlohmann::json::array();
  for (std::int64_t id = 1021; id <= 1050; ++id) {
    second.push_back(question_for(id));
  }
  write_se_fixture(scenario.se_dir, search_request(scenario.keywords[0]),
                   items_body(first));
  write_se_fixture(scenario.se_dir, search_request(scenario.keywords[1]),
                   items_body(second));

  nlohmann::json answers = nlohmann::json::array();
  for (std::int64_t id = 1001; id <= 1035; ++id) {
    answers.push_back(answer_item(id * 10, id,
                                  "<p>Accepted fix for " +
                                      std::to_string(id) + "</p>",
                                  5, true));
    answers.push_back(answer_item(id * 10 + 1, id,
                                  "<p>Alternative for " +
                                      std::to_string(id) + "</p>",
                                  3, false));
  }
  write_se_fixture(scenario.se_dir,
                   answers_request(scenario.answered_ids()),
                   items_body(answers));

  scenario.script.push_back({kComplexityMark, "FALSE"});
  scenario.script.push_back(
      {kKeywordMark,
       "[\"" + scenario.keywords[0] + "\", \"" + scenario.keywords[1] +
           "\"]"});
  for (int i = 0; i < 15; ++i) {
    scenario.script.push_back({kScorerMark, "5"});
  }
  scenario.script.push_back({kCheckerMark, "TRUE"});
  scenario.script.push_back({kGeneratorMark, scenario.answer_text});
  return scenario;
}

// Small scenario with a pinned winner: three questions, and the scorer is
// scripted by content so only the target question scores well. The final
// answer cites the target's link, so used_links is non-empty and known.
struct SmallScenario {
  std::string question = "How to import from a parent directory in Python?";
  std::string keyword = "parent directory import";
  std::int64_t target_id = 501;
  std::string target_link = "https://stackoverflow.com/q/501";
  std::string answer_text;
  std::vector<ScriptEntry> script;
  std::filesystem::path se_dir;
};

inline SmallScenario build_small_scenario(
    const std::filesystem::path& fixture_root) {
  SmallScenario scenario;
  scenario.se_dir = fixture_root / "se";
  scenario.answer_text =
      "Add the parent directory to sys.path or use a package-relative "
      "import. This was the accepted answer.\n"
      "Links used:\n"
      "- [Parent directory import trick] " + scenario.target_link + "\n";

  nlohmann::json items = nlohmann::json::array();
  items.push_back(question_item(501, "Parent directory import trick",
                                "<p>How do I import from the parent "
                                "directory in Python?</p>",
                                5010));
  items.push_back(question_item(502, "Sibling module import",
                                "<p>Importing a sibling module fails</p>",
                                5020));
  items.push_back(question_item(503, "Unanswered path question",
                                "<p>sys.path confusion with packages</p>",
                                0));
  write_se_fixture(scenario.se_dir, search_request(scenario.keyword),
                   items_body(items));

  nlohmann::json answers = nlohmann::json::array();
  answers.push_back(answer_item(5010, 501,
                                "<p>Use sys.path.append('..') or better, "
                                "make it a package.</p>",
                                12, true));
  answers.push_back(answer_item(5011, 501, "<p>Use importlib.</p>", 4,
                                false));
  answers.push_back(answer_item(5020, 502,
                                "<p>Run with -m from the project root.</p>",
                                7, true));
  write_se_fixture(scenario.se_dir, answers_request({501, 502}),
                   items_body(answers));

  scenario.script.push_back({kComplexityMark, "FALSE"});
  scenario.script.push_back({kKeywordMark, "[\"" + scenario.keyword + "\"]"});
  // Content-addressed scores: the target's evidence wins, the other is
  // useless, so the bundle is exactly the target document.
  scenario.script.push_back({"Parent directory import trick", "5"});
  scenario.script.push_back({"Sibling module import", "not useful"});
  scenario.script.push_back({kCheckerMark, "TRUE"});
  scenario.script.push_back({kGeneratorMark, scenario.answer_text});
  return scenario;
}

inline stackrag::GatewayConfig test_gateway_config(std::size_t dimension = 16) {
  stackrag::GatewayConfig config;
  config.embedding_dimension = dimension;
  return config;
}

}  // namespace testsupport
