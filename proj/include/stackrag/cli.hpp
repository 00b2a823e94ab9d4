#pragma once

#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "stackrag/app_config.hpp"
#include "stackrag/clock.hpp"
#include "stackrag/errors.hpp"
#include "stackrag/fixtures.hpp"
#include "stackrag/fs_util.hpp"
#include "stackrag/llm_mock.hpp"
#include "stackrag/llm_openai.hpp"
#include "stackrag/pipeline.hpp"
#include "stackrag/prompts.hpp"
#include "stackrag/se_client.hpp"
#include "stackrag/se_rate.hpp"
#include "stackrag/se_transport.hpp"
#include "stackrag/se_transport_live.hpp"
#include "stackrag/vector_store.hpp"

namespace stackrag {

namespace detail {

// Offline stand-in used when no fixture directory was supplied: any
// attempt to reach the network is an immediate, explicit error.
class NoNetworkSeTransport : public SeTransport {
 public:
  SeResponse get(const SeRequest& request) override {
    throw TransportError("offline mode has no fixture for request: " +
                         canonical_signature(request));
  }
};

struct Wiring {
  std::shared_ptr<LlmGateway> gateway;
  std::shared_ptr<ScriptedGateway> scripted;  // set in replay mode
  std::shared_ptr<RecordingGateway> recorder;  // set in record mode
  std::shared_ptr<SeTransport> transport;
  std::shared_ptr<QuotaLedger> ledger;
  std::shared_ptr<SlidingWindowLimiter> limiter;
  std::shared_ptr<StackExchangeClient> client;
  std::unique_ptr<VectorStore> store;
};

enum class WiringMode { Replay, Live, Record };

inline Wiring wire_session(const AppConfig& config, WiringMode mode,
                           Clock& clock) {
  const DataPaths paths = DataPaths::under(config.data_dir);
  GatewayConfig gateway_config;
  gateway_config.chat_model = config.chat_model;
  gateway_config.embedding_model = config.embedding_model;
  gateway_config.embedding_dimension = config.embedding_dimension;

  Wiring wiring;
  if (mode == WiringMode::Replay) {
    if (config.fixtures) {
      const FixturePaths fixture_paths = FixturePaths::under(*config.fixtures);
      if (std::filesystem::exists(fixture_paths.llm_script)) {
        wiring.scripted = ScriptedGateway::from_file(fixture_paths.llm_script,
                                                     gateway_config);
      } else {
        wiring.scripted = std::make_shared<ScriptedGateway>(gateway_config);
      }
      if (std::filesystem::is_directory(fixture_paths.se_dir)) {
        wiring.transport =
            std::make_shared<ReplaySeTransport>(fixture_paths.se_dir);
      } else {
        wiring.transport = std::make_shared<NoNetworkSeTransport>();
      }
    } else {
      wiring.scripted = std::make_shared<ScriptedGateway>(gateway_config);
      wiring.transport = std::make_shared<NoNetworkSeTransport>();
    }
    wiring.gateway = wiring.scripted;
  } else {
    if (config.llm_api_key.empty()) {
      throw PreconditionError(
          "no LLM credentials; set STACKRAG_LLM_API_KEY or llm_api_key in " +
          paths.config_file.string());
    }
    OpenAiConfig llm;
    llm.base_url = config.llm_base_url;
    llm.api_key = config.llm_api_key;
    auto live_gateway =
        std::make_shared<OpenAiGateway>(llm, gateway_config, &clock);
    auto live_transport =
        std::make_shared<LiveSeTransport>(config.se_base_url);
    if (mode == WiringMode::Record) {
      const FixturePaths fixture_paths = FixturePaths::under(*config.fixtures);
      wiring.recorder = std::make_shared<RecordingGateway>(live_gateway);
      wiring.gateway = wiring.recorder;
      wiring.transport = std::make_shared<RecordingSeTransport>(
          live_transport, fixture_paths.se_dir);
    } else {
      wiring.gateway = live_gateway;
      wiring.transport = live_transport;
    }
  }

  // Replay runs keep their own quota file so simulated calls never inflate
  // the live counter.
  const auto quota_file = mode == WiringMode::Replay
                              ? config.data_dir / "quota_replay.json"
                              : paths.quota_file;
  wiring.ledger = std::make_shared<QuotaLedger>(quota_file,
                                                config.se_daily_quota, &clock);
  wiring.limiter = std::make_shared<SlidingWindowLimiter>(
      config.se_max_per_second, 1000, &clock);

  SeClientConfig client_config;
  client_config.api_key = config.stackexchange_key;
  wiring.client = std::make_shared<StackExchangeClient>(
      wiring.transport, wiring.ledger, wiring.limiter, client_config, &clock);
  wiring.store = std::make_unique<VectorStore>(
      paths.store_file, paths.cache_file, config.embedding_dimension);
  return wiring;
}

inline nlohmann::json links_json(const std::vector<LinkRef>& links) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& link : links) {
    out.push_back({{"title", link.title}, {"url", link.url}});
  }
  return out;
}

inline nlohmann::json trace_json(const SessionTrace& trace) {
  nlohmann::json iterations = nlohmann::json::array();
  for (const auto& it : trace.iterations) {
    iterations.push_back({
        {"keywords", it.keywords},
        {"raw_hits", it.raw_hits},
        {"unique_hits", it.unique_hits},
        {"ranked", it.ranked},
        {"answered", it.answered},
        {"unanswered", it.unanswered},
        {"stored", it.stored},
        {"candidates_retrieved", it.candidates_retrieved},
        {"candidates_selected", it.candidates_selected},
        {"bundle_size", it.bundle_size},
        {"sufficient", it.sufficient},
    });
  }
  return nlohmann::json{{"iterations", iterations}};
}

inline int report_ask_result(const AskResult& result, bool json,
                             std::ostream& out, std::ostream& err) {
  if (json) {
    nlohmann::json doc;
    switch (result.status) {
      case AskStatus::Answered:
        doc["status"] = "answered";
        doc["text"] = result.answer.text;
        doc["used_links"] = links_json(result.answer.used_links);
        doc["unanswered_links"] = links_json(result.answer.unanswered_links);
        doc["hallucinated_links"] =
            links_json(result.answer.hallucinated_links);
        break;
      case AskStatus::NoResults:
        doc["status"] = "no_results";
        doc["message"] = result.failure_reason;
        break;
      case AskStatus::Failed:
        doc["status"] = "failed";
        doc["message"] = result.failure_reason;
        break;
    }
    doc["trace"] = trace_json(result.trace);
    out << doc.dump(2) << "\n";
  } else {
    switch (result.status) {
      case AskStatus::Answered: {
        out << result.answer.text << "\n";
        if (!result.answer.used_links.empty()) {
          out << "\nLinks used:\n"
              << format_link_list(result.answer.used_links) << "\n";
        }
        if (!result.answer.unanswered_links.empty()) {
          out << "\nUnanswered questions that you may find useful in the "
                 "future:\n"
              << format_link_list(result.answer.unanswered_links) << "\n";
        }
        if (!result.answer.hallucinated_links.empty()) {
          err << "warning: " << result.answer.hallucinated_links.size()
              << " cited link(s) do not appear in the gathered evidence\n";
        }
        break;
      }
      case AskStatus::NoResults:
        out << result.failure_reason << "\n";
        break;
      case AskStatus::Failed:
        err << "error: " << result.failure_reason << "\n";
        break;
    }
  }
  switch (result.status) {
    case AskStatus::Answered:
      return 0;
    case AskStatus::NoResults:
      return 2;
    case AskStatus::Failed:
      return 1;
  }
  return 1;
}

inline int cmd_ask(const AppConfig& config, const std::string& question,
                   std::ostream& out, std::ostream& err) {
  SystemClock clock;
  const WiringMode mode = (config.offline || config.fixtures)
                              ? WiringMode::Replay
                              : WiringMode::Live;
  Wiring wiring = wire_session(config, mode, clock);
  Orchestrator orchestrator(wiring.gateway, wiring.client, *wiring.store,
                            config.session);
  const AskResult result = orchestrator.ask(UserQuery(question));
  return report_ask_result(result, config.json, out, err);
}

inline int cmd_record(const AppConfig& config, const std::string& question,
                      std::ostream& out, std::ostream& err) {
  if (!config.fixtures) {
    err << "error: record needs --fixtures <dir> to know where to write\n";
    return 1;
  }
  SystemClock clock;
  Wiring wiring = wire_session(config, WiringMode::Record, clock);
  Orchestrator orchestrator(wiring.gateway, wiring.client, *wiring.store,
                            config.session);
  const AskResult result = orchestrator.ask(UserQuery(question));
  const FixturePaths fixture_paths = FixturePaths::under(*config.fixtures);
  wiring.recorder->save_script(fixture_paths.llm_script);
  err << "fixtures written to " << config.fixtures->string() << "\n";
  return report_ask_result(result, config.json, out, err);
}

inline std::size_t count_store_documents(const std::filesystem::path& file) {
  auto content = read_file_if_exists(file);
  if (!content) return 0;
  std::set<std::int64_t> ids;
  std::istringstream in(*content);
  std::string line;
  while (std::getline(in, line)) {
    if (trim_copy(line).empty()) continue;
    try {
      ids.insert(nlohmann::json::parse(line)
                     .value("question_id", std::int64_t{0}));
    } catch (const nlohmann::json::exception&) {
      // stats must not die on a torn trailing line
    }
  }
  ids.erase(0);
  return ids.size();
}

inline int cmd_cache(const AppConfig& config, const std::string& action,
                     std::ostream& out, std::ostream& err) {
  const DataPaths paths = DataPaths::under(config.data_dir);
  if (action == "list") {
    IdCache cache(paths.cache_file);
    if (config.json) {
      nlohmann::json doc;
      doc["ids"] = nlohmann::json::array();
      for (auto id : cache.ids()) doc["ids"].push_back(id);
      out << doc.dump(2) << "\n";
    } else {
      for (auto id : cache.ids()) out << id << "\n";
    }
    return 0;
  }
  if (action == "clear") {
    // Store first: a crash in between leaves a cache whose extra entries
    // the next open reconciles away. The reverse order could resurrect
    // cleared ids.
    std::error_code ec;
    std::filesystem::remove(paths.store_file, ec);
    if (ec) {
      err << "error: cannot remove " << paths.store_file.string() << "\n";
      return 1;
    }
    std::filesystem::remove(paths.cache_file, ec);
    if (ec) {
      err << "error: cannot remove " << paths.cache_file.string() << "\n";
      return 1;
    }
    out << "cache cleared\n";
    return 0;
  }
  if (action == "stats") {
    SystemClock clock;
    IdCache cache(paths.cache_file);
    QuotaLedger ledger(paths.quota_file, config.se_daily_quota, &clock);
    const std::size_t documents = count_store_documents(paths.store_file);
    if (config.json) {
      nlohmann::json doc = {
          {"documents", documents},
          {"store_bytes", file_size_or_zero(paths.store_file)},
          {"cached_ids", cache.ids().size()},
          {"quota_used_today", ledger.used_today()},
          {"quota_limit", ledger.daily_quota()},
          {"quota_day", ledger.day()},
      };
      out << doc.dump(2) << "\n";
    } else {
      out << "documents: " << documents << "\n"
          << "store_bytes: " << file_size_or_zero(paths.store_file) << "\n"
          << "cached_ids: " << cache.ids().size() << "\n"
          << "quota_used_today: " << ledger.used_today() << "\n"
          << "quota_limit: " << ledger.daily_quota() << "\n"
          << "quota_day: " << ledger.day() << "\n";
    }
    return 0;
  }
  err << "error: unknown cache action " << action << "\n";
  return 1;
}

}  // namespace detail

// Entry point shared by the binary and the tests. args holds everything
// after the program name.
inline int run_cli(std::vector<std::string> args, std::ostream& out,
                   std::ostream& err) {
  CLI::App app{"Answers developer questions from Stack Overflow evidence"};
  app.name("stackrag");
  app.require_subcommand(1);

  AppOptions options;
  app.add_option("--data-dir", options.data_dir,
                 "Directory for the store, cache, and config");
  app.add_flag("--offline", options.offline,
               "Never touch the network; replay fixtures if given");
  app.add_option("--fixtures", options.fixtures,
                 "Fixture directory to replay (ask) or write (record)");
  app.add_flag("--json", options.json, "Emit machine-readable JSON");
  app.add_option("--max-iterations", options.max_iterations,
                 "Upper bound on pipeline restarts");
  app.add_option("--mmr-lambda", options.mmr_lambda,
                 "MMR relevance/diversity trade-off in [0,1]");

  std::string ask_question;
  auto* ask = app.add_subcommand("ask", "Answer a developer question");
  ask->add_option("question", ask_question, "The question to answer")
      ->required();
  ask->fallthrough();

  std::string record_question;
  auto* record = app.add_subcommand(
      "record", "Run one question live and capture fixtures");
  record->add_option("question", record_question, "The question to run")
      ->required();
  record->fallthrough();

  auto* cache = app.add_subcommand("cache", "Inspect or reset local state");
  cache->require_subcommand(1);
  cache->fallthrough();
  auto* cache_list = cache->add_subcommand("list", "Print cached ids");
  cache_list->fallthrough();
  auto* cache_clear = cache->add_subcommand("clear", "Drop store and cache");
  cache_clear->fallthrough();
  auto* cache_stats = cache->add_subcommand("stats", "Print state counters");
  cache_stats->fallthrough();

  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("stackrag");
  for (const auto& arg : args) argv.push_back(arg.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    const std::filesystem::path data_dir =
        options.data_dir ? std::filesystem::path(*options.data_dir)
                         : default_data_dir();
    const AppConfig config = resolve_config(
        options, environment_snapshot(),
        read_file_if_exists(DataPaths::under(data_dir).config_file));

    if (ask->parsed()) {
      return detail::cmd_ask(config, ask_question, out, err);
    }
    if (record->parsed()) {
      return detail::cmd_record(config, record_question, out, err);
    }
    if (cache->parsed()) {
      std::string action = "stats";
      if (cache_list->parsed()) action = "list";
      if (cache_clear->parsed()) action = "clear";
      if (cache_stats->parsed()) action = "stats";
      return detail::cmd_cache(config, action, out, err);
    }
    err << "error: no command given\n";
    return 1;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace stackrag
