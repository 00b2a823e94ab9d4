#include <atomic>
#include <string>
#include <thread>
#include <vector>

#include <catch2/catch_amalgamated.hpp>
#include <httplib.h>
#include <nlohmann/json.hpp>

#include "stackrag/clock.hpp"
#include "stackrag/errors.hpp"
#include "stackrag/http_util.hpp"
#include "stackrag/llm_mock.hpp"
#include "stackrag/llm_openai.hpp"
#include "stackrag/se_transport.hpp"
#include "stackrag/se_transport_live.hpp"
#include "support.hpp"

using namespace stackrag;

namespace {

// Loopback HTTP server; register handlers before calling start().
class LoopbackServer {
 public:
  ~LoopbackServer() {
    server.stop();
    if (thread_.joinable()) thread_.join();
  }

  void start() {
    port_ = server.bind_to_any_port("127.0.0.1");
    REQUIRE(port_ > 0);
    thread_ = std::thread([this] { server.listen_after_bind(); });
    server.wait_until_ready();
  }

  std::string url(const std::string& prefix = "") const {
    return "http://127.0.0.1:" + std::to_string(port_) + prefix;
  }

  httplib::Server server;

 private:
  int port_ = 0;
  std::thread thread_;
};

std::string chat_body(const std::string& content) {
  return nlohmann::json{
      {"choices", {{{"message", {{"content", content}}}}}}}.dump();
}

std::string embedding_body(const std::vector<double>& values) {
  return nlohmann::json{{"data", {{{"embedding", values}}}}}.dump();
}

OpenAiConfig loopback_llm(const LoopbackServer& server) {
  OpenAiConfig config;
  config.base_url = server.url("/v1");
  config.api_key = "secret-key";
  config.backoff_base_ms = 1;
  return config;
}

}  // namespace

TEST_CASE("parse_base_url splits origin and path prefix") {
  auto plain = parse_base_url("https://api.example.com");
  CHECK(plain.origin == "https://api.example.com");
  CHECK(plain.path_prefix.empty());

  auto with_port = parse_base_url("http://127.0.0.1:8080/v1/");
  CHECK(with_port.origin == "http://127.0.0.1:8080");
  CHECK(with_port.path_prefix == "/v1");

  CHECK_THROWS_AS(parse_base_url("api.example.com"), PreconditionError);
  CHECK_THROWS_AS(parse_base_url("ftp://api.example.com"), PreconditionError);
  CHECK_THROWS_AS(parse_base_url("https://"), PreconditionError);
}

TEST_CASE("OpenAiGateway retries transient failures then succeeds") {
  LoopbackServer server;
  std::atomic<int> calls{0};
  std::string seen_auth;
  nlohmann::json seen_body;
  server.server.Post("/v1/chat/completions",
                     [&](const httplib::Request& req, httplib::Response& res) {
                       const int n = ++calls;
                       seen_auth = req.get_header_value("Authorization");
                       seen_body = nlohmann::json::parse(req.body);
                       if (n < 3) {
                         res.status = 500;
                         return;
                       }
                       res.set_content(chat_body("ok"), "application/json");
                     });
  server.start();

  ManualClock clock;
  OpenAiGateway gateway(loopback_llm(server), testsupport::test_gateway_config(),
                        &clock);
  CHECK(gateway.chat({"hello there"}) == "ok");
  CHECK(calls.load() == 3);
  CHECK(seen_auth == "Bearer secret-key");
  CHECK(seen_body.at("messages")[0].at("content") == "hello there");
  CHECK(seen_body.at("model") == GatewayConfig{}.chat_model);
  // Exponential backoff: 1ms then 2ms on the manual clock.
  CHECK(clock.now_ms() == 3);
}

TEST_CASE("OpenAiGateway does not retry auth failures") {
  LoopbackServer server;
  std::atomic<int> calls{0};
  server.server.Post("/v1/chat/completions",
                     [&](const httplib::Request&, httplib::Response& res) {
                       ++calls;
                       res.status = 401;
                     });
  server.start();

  ManualClock clock;
  OpenAiGateway gateway(loopback_llm(server), testsupport::test_gateway_config(),
                        &clock);
  CHECK_THROWS_AS(gateway.chat({"hello"}), AuthError);
  CHECK(calls.load() == 1);
}

TEST_CASE("OpenAiGateway maps persistent 429 to BudgetError") {
  LoopbackServer server;
  std::atomic<int> calls{0};
  server.server.Post("/v1/chat/completions",
                     [&](const httplib::Request&, httplib::Response& res) {
                       ++calls;
                       res.status = 429;
                     });
  server.start();

  ManualClock clock;
  OpenAiGateway gateway(loopback_llm(server), testsupport::test_gateway_config(),
                        &clock);
  CHECK_THROWS_AS(gateway.chat({"hello"}), BudgetError);
  CHECK(calls.load() == 3);  // max_retries=2 means three attempts
}

TEST_CASE("OpenAiGateway gives up after retrying server errors") {
  LoopbackServer server;
  std::atomic<int> calls{0};
  server.server.Post("/v1/chat/completions",
                     [&](const httplib::Request&, httplib::Response& res) {
                       ++calls;
                       res.status = 503;
                     });
  server.start();

  ManualClock clock;
  OpenAiGateway gateway(loopback_llm(server), testsupport::test_gateway_config(),
                        &clock);
  CHECK_THROWS_AS(gateway.chat({"hello"}), TransportError);
  CHECK(calls.load() == 3);
}

TEST_CASE("OpenAiGateway treats other 4xx as immediate failures") {
  LoopbackServer server;
  std::atomic<int> calls{0};
  server.server.Post("/v1/chat/completions",
                     [&](const httplib::Request&, httplib::Response& res) {
                       ++calls;
                       res.status = 418;
                       res.set_content("teapot", "text/plain");
                     });
  server.start();

  ManualClock clock;
  OpenAiGateway gateway(loopback_llm(server), testsupport::test_gateway_config(),
                        &clock);
  try {
    gateway.chat({"hello"});
    FAIL("expected TransportError");
  } catch (const TransportError& e) {
    CHECK(std::string(e.what()).find("418") != std::string::npos);
  }
  CHECK(calls.load() == 1);
}

TEST_CASE("OpenAiGateway rejects malformed chat replies") {
  LoopbackServer server;
  server.server.Post("/v1/chat/completions",
                     [&](const httplib::Request& req, httplib::Response& res) {
                       const auto body = nlohmann::json::parse(req.body);
                       const std::string prompt =
                           body.at("messages")[0].at("content");
                       if (prompt == "empty") {
                         res.set_content("{}", "application/json");
                       } else {
                         res.set_content("not json at all", "application/json");
                       }
                     });
  server.start();

  ManualClock clock;
  OpenAiGateway gateway(loopback_llm(server), testsupport::test_gateway_config(),
                        &clock);
  CHECK_THROWS_AS(gateway.chat({"empty"}), ParseError);
  CHECK_THROWS_AS(gateway.chat({"garbled"}), ParseError);
}

TEST_CASE("OpenAiGateway embeddings round-trip and enforce dimension") {
  LoopbackServer server;
  nlohmann::json seen_body;
  server.server.Post("/v1/embeddings",
                     [&](const httplib::Request& req, httplib::Response& res) {
                       seen_body = nlohmann::json::parse(req.body);
                       const std::string input = seen_body.at("input");
                       if (input == "short vector") {
                         res.set_content(embedding_body({0.1, 0.2, 0.3}),
                                         "application/json");
                       } else {
                         res.set_content(
                             embedding_body({0.25, -0.5, 0.75, 1.0}),
                             "application/json");
                       }
                     });
  server.start();

  ManualClock clock;
  OpenAiGateway gateway(loopback_llm(server),
                        testsupport::test_gateway_config(4), &clock);
  const auto embedding = gateway.embed("good vector");
  CHECK(embedding.values == std::vector<double>{0.25, -0.5, 0.75, 1.0});
  CHECK(embedding.model_id == GatewayConfig{}.embedding_model);
  CHECK(seen_body.at("model") == GatewayConfig{}.embedding_model);
  CHECK(seen_body.at("input") == "good vector");

  CHECK_THROWS_AS(gateway.embed("short vector"), DimensionMismatch);
}

TEST_CASE("OpenAiGateway requires credentials up front") {
  OpenAiConfig config;
  config.base_url = "http://127.0.0.1:1";
  CHECK_THROWS_AS(
      OpenAiGateway(config, testsupport::test_gateway_config()),
      PreconditionError);
  config.api_key = "k";
  config.max_retries = -1;
  CHECK_THROWS_AS(
      OpenAiGateway(config, testsupport::test_gateway_config()),
      PreconditionError);
}

TEST_CASE("LiveSeTransport sends encoded queries and passes status through") {
  LoopbackServer server;
  std::string seen_q;
  server.server.Get("/2.3/search/advanced",
                    [&](const httplib::Request& req, httplib::Response& res) {
                      seen_q = req.get_param_value("q");
                      res.set_content(R"({"items":[]})", "application/json");
                    });
  server.server.Get("/2.3/errors/400",
                    [&](const httplib::Request&, httplib::Response& res) {
                      res.status = 400;
                      res.set_content(R"({"error_id":400})",
                                      "application/json");
                    });
  server.start();

  LiveSeTransport transport(server.url());
  const auto ok = transport.get(testsupport::search_request("space & plus"));
  CHECK(ok.status == 200);
  CHECK(ok.body == R"({"items":[]})");
  CHECK(seen_q == "space & plus");

  SeRequest error_request;
  error_request.path = "/2.3/errors/400";
  const auto bad = transport.get(error_request);
  CHECK(bad.status == 400);
  CHECK(bad.body == R"({"error_id":400})");
}

TEST_CASE("LiveSeTransport reports unreachable hosts") {
  // Nothing listens on this port; keep the timeout path out of it by using
  // a connection refused locally.
  LiveSeTransport transport("http://127.0.0.1:9");
  SeRequest request;
  request.path = "/2.3/search/advanced";
  CHECK_THROWS_AS(transport.get(request), TransportError);
}

TEST_CASE("recorded stackexchange traffic replays byte-identically") {
  testsupport::TempDir tmp;
  const std::string body =
      nlohmann::json{{"items", {1, 2, 3}}, {"has_more", false}}.dump();

  auto server = std::make_unique<LoopbackServer>();
  server->server.Get("/2.3/search/advanced",
                     [&](const httplib::Request&, httplib::Response& res) {
                       res.set_content(body, "application/json");
                     });
  server->start();

  const auto request = testsupport::search_request("record me");
  SeResponse live;
  {
    RecordingSeTransport recorder(
        std::make_shared<LiveSeTransport>(server->url()), tmp / "se");
    live = recorder.get(request);
  }
  server.reset();  // replay must not need the network

  ReplaySeTransport replay(tmp / "se");
  const auto replayed = replay.get(request);
  CHECK(replayed.status == live.status);
  CHECK(replayed.body == live.body);
  CHECK(replayed.body == body);
}

TEST_CASE("recorded llm traffic replays byte-identically") {
  testsupport::TempDir tmp;
  const std::vector<double> values = {0.5, -0.25, 0.125, 1.0};

  auto server = std::make_unique<LoopbackServer>();
  server->server.Post("/v1/chat/completions",
                      [&](const httplib::Request&, httplib::Response& res) {
                        res.set_content(chat_body("The answer is 42."),
                                        "application/json");
                      });
  server->server.Post("/v1/embeddings",
                      [&](const httplib::Request&, httplib::Response& res) {
                        res.set_content(embedding_body(values),
                                        "application/json");
                      });
  server->start();

  ManualClock clock;
  auto recorder = std::make_shared<RecordingGateway>(
      std::make_shared<OpenAiGateway>(loopback_llm(*server),
                                      testsupport::test_gateway_config(4),
                                      &clock));
  const std::string chat_reply = recorder->chat({"what is the answer?"});
  const auto embedded = recorder->embed("embed me");
  recorder->save_script(tmp / "llm_script.json");
  server.reset();

  auto replay = ScriptedGateway::from_file(tmp / "llm_script.json",
                                           testsupport::test_gateway_config(4));
  CHECK(replay->chat({"what is the answer?"}) == chat_reply);
  const auto replayed = replay->embed("embed me");
  CHECK(replayed.values == embedded.values);
  CHECK(replayed.values == values);
}
