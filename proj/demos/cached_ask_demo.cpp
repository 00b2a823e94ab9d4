// End-to-end offline walkthrough: hand-built StackExchange fixtures and a
// scripted gateway drive two identical asks against one data directory.
// The first ask fills the vector store; the second answers without any
// answer fetches and embeds only the query.
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "stackrag/clock.hpp"
#include "stackrag/llm_mock.hpp"
#include "stackrag/pipeline.hpp"
#include "stackrag/se_client.hpp"
#include "stackrag/se_rate.hpp"
#include "stackrag/se_transport.hpp"
#include "stackrag/vector_store.hpp"

using namespace stackrag;

namespace {

constexpr const char* kQuestion = "How do I iterate over a map in C++?";
constexpr const char* kKeyword = "iterate map c++";

nlohmann::json question_item(std::int64_t id, const std::string& title,
                             const std::string& body,
                             std::int64_t accepted_answer_id) {
  nlohmann::json item = {
      {"question_id", id},
      {"link", "https://stackoverflow.com/q/" + std::to_string(id)},
      {"title", title},
      {"body", body},
      {"creation_date", 1700000000},
  };
  if (accepted_answer_id > 0) item["accepted_answer_id"] = accepted_answer_id;
  return item;
}

nlohmann::json answer_item(std::int64_t id, std::int64_t question_id,
                           const std::string& body, std::int64_t score,
                           bool accepted) {
  return nlohmann::json{
      {"answer_id", id},       {"question_id", question_id},
      {"body", body},          {"score", score},
      {"is_accepted", accepted}, {"creation_date", 1700000000},
  };
}

void write_fixture(const std::filesystem::path& se_dir,
                   const SeRequest& request, const nlohmann::json& items) {
  const nlohmann::json body = {{"items", items},
                               {"has_more", false},
                               {"quota_max", 10000},
                               {"quota_remaining", 9990}};
  std::filesystem::create_directories(se_dir);
  save_fixture(se_dir, canonical_signature(request),
               SeResponse{200, body.dump()});
}

// The replay transport matches on canonical signatures, so fixture requests
// must mirror the client's exact request shape.
void build_se_fixtures(const std::filesystem::path& se_dir) {
  const SeClientConfig config;
  SeRequest search;
  search.path = "/2.3/search/advanced";
  search.params = {
      {"q", kKeyword},
      {"site", config.site},
      {"filter", config.filter},
      {"pagesize", std::to_string(config.page_size)},
  };
  nlohmann::json questions = nlohmann::json::array();
  questions.push_back(question_item(
      801, "Iterating over std::map",
      "<p>What is the idiomatic way to loop over a <code>std::map</code>?</p>",
      8010));
  questions.push_back(question_item(
      802, "Map iteration order",
      "<p>Is iteration order over a map guaranteed?</p>", 8020));
  questions.push_back(question_item(
      803, "Unordered map traversal cost",
      "<p>What does traversing an unordered_map cost?</p>", 0));
  write_fixture(se_dir, search, questions);

  SeRequest answers;
  answers.path = "/2.3/questions/801;802/answers";
  answers.params = {
      {"site", config.site},
      {"filter", config.filter},
      {"sort", "votes"},
  };
  nlohmann::json items = nlohmann::json::array();
  items.push_back(answer_item(
      8010, 801,
      "<p>Use a range-based for: <code>for (const auto&amp; [key, value] : "
      "m)</code>. Structured bindings need C++17.</p>",
      42, true));
  items.push_back(answer_item(
      8011, 801, "<p>Pre-C++17, iterate with <code>it-&gt;first</code> and "
                 "<code>it-&gt;second</code>.</p>",
      17, false));
  items.push_back(answer_item(
      8020, 802, "<p>Yes, std::map iterates in key order.</p>", 9, true));
  write_fixture(se_dir, answers, items);
}

std::shared_ptr<ScriptedGateway> build_gateway() {
  GatewayConfig config;
  config.embedding_dimension = 16;
  auto gateway = std::make_shared<ScriptedGateway>(config);
  gateway->enqueue("complex enough to be divided into sub-questions",
                   "FALSE");
  gateway->enqueue("question-to-query parser",
                   std::string("[\"") + kKeyword + "\"]");
  // Scores are matched by document content, so the winning evidence is
  // pinned regardless of retrieval order.
  gateway->enqueue("Iterating over std::map", "5");
  gateway->enqueue("Map iteration order", "2");
  gateway->enqueue("enough evidence to answer the question or not", "TRUE");
  gateway->enqueue(
      "the final piece of this architecture",
      "Use a range-based for loop: for (const auto& [key, value] : m). "
      "This was the accepted answer.\n"
      "Links used:\n"
      "- [Iterating over std::map] https://stackoverflow.com/q/801\n");
  return gateway;
}

void print_trace(const IterationTrace& trace) {
  std::cout << "  raw hits:            " << trace.raw_hits << "\n"
            << "  unique questions:    " << trace.unique_hits << "\n"
            << "  bm25 ranked:         " << trace.ranked << "\n"
            << "  with accepted:       " << trace.answered << "\n"
            << "  unanswered:          " << trace.unanswered << "\n"
            << "  newly stored:        " << trace.stored << "\n"
            << "  cosine candidates:   " << trace.candidates_retrieved << "\n"
            << "  after mmr:           " << trace.candidates_selected << "\n"
            << "  evidence bundle:     " << trace.bundle_size << "\n"
            << "  sufficient:          " << (trace.sufficient ? "yes" : "no")
            << "\n";
}

struct RunReport {
  std::string answer;
  std::size_t stored = 0;
  std::size_t embed_calls = 0;
  std::size_t answer_fetches = 0;
};

RunReport run_ask(const std::filesystem::path& se_dir,
                  const std::filesystem::path& data_dir, int pass) {
  auto gateway = build_gateway();
  auto transport = std::make_shared<ReplaySeTransport>(se_dir);
  auto& clock = system_clock_instance();
  auto ledger = std::make_shared<QuotaLedger>(data_dir / "quota.json", 10000,
                                              &clock);
  auto limiter = std::make_shared<SlidingWindowLimiter>(25, 1000, &clock);
  auto client = std::make_shared<StackExchangeClient>(
      transport, ledger, limiter, SeClientConfig{}, &clock);
  VectorStore store(data_dir / "store.jsonl", data_dir / "cache.json", 16);
  Orchestrator orchestrator(gateway, client, store, SessionConfig{});

  std::cout << "=== pass " << pass << " ===\n";
  const AskResult result = orchestrator.ask(UserQuery(kQuestion));
  if (result.status != AskStatus::Answered) {
    std::cout << "ask failed: " << result.failure_reason << "\n";
    std::exit(1);
  }

  RunReport report;
  report.answer = result.answer.text;
  report.embed_calls = gateway->embed_calls();
  for (const auto& signature : transport->requests()) {
    if (signature.find("/answers") != std::string::npos) {
      ++report.answer_fetches;
    }
  }
  if (!result.trace.iterations.empty()) {
    const auto& trace = result.trace.iterations.front();
    report.stored = trace.stored;
    print_trace(trace);
  }
  std::cout << "  answer fetches:      " << report.answer_fetches << "\n"
            << "  embedding calls:     " << report.embed_calls << "\n\n"
            << result.answer.text << "\n";
  for (const auto& link : result.answer.used_links) {
    std::cout << "cited: " << link.url << "\n";
  }
  std::cout << "\n";
  return report;
}

}  // namespace

int main() {
  const auto root =
      std::filesystem::temp_directory_path() / "stackrag_cached_ask_demo";
  std::filesystem::remove_all(root);
  const auto se_dir = root / "fixtures" / "se";
  const auto data_dir = root / "data";
  build_se_fixtures(se_dir);

  const RunReport first = run_ask(se_dir, data_dir, 1);
  const RunReport second = run_ask(se_dir, data_dir, 2);

  bool ok = true;
  if (first.stored != 2 || first.answer_fetches != 1) {
    std::cout << "unexpected: the first pass should fetch and store both "
                 "answered questions\n";
    ok = false;
  }
  if (second.stored != 0 || second.answer_fetches != 0) {
    std::cout << "unexpected: the second pass should be served from the "
                 "store\n";
    ok = false;
  }
  if (second.embed_calls != 1) {
    std::cout << "unexpected: the second pass should embed only the query\n";
    ok = false;
  }
  if (second.answer != first.answer) {
    std::cout << "unexpected: answers differ across passes\n";
    ok = false;
  }
  if (ok) {
    std::cout << "second pass reused the store: no answer fetches, one "
                 "query embedding, identical answer\n";
  }
  std::filesystem::remove_all(root);
  return ok ? 0 : 1;
}
