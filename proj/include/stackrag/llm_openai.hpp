#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <utility>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "stackrag/clock.hpp"
#include "stackrag/errors.hpp"
#include "stackrag/http_util.hpp"
#include "stackrag/llm_gateway.hpp"
#include "stackrag/net_probe.hpp"

namespace stackrag {

struct OpenAiConfig {
  std::string base_url = "https://api.openai.com/v1";
  std::string api_key;
  int max_retries = 2;
  std::int64_t backoff_base_ms = 250;
};

// Live backend speaking the OpenAI-compatible wire format. Transient
// failures (transport errors, 5xx, 429) are retried with exponential
// backoff; auth failures and other 4xx are not.
class OpenAiGateway : public LlmGateway {
 public:
  OpenAiGateway(OpenAiConfig http_config, GatewayConfig gateway_config,
                Clock* clock = nullptr)
      : LlmGateway(std::move(gateway_config)),
        http_(std::move(http_config)),
        base_(parse_base_url(http_.base_url)),
        clock_(clock ? clock : &system_clock_instance()) {
    if (http_.api_key.empty()) {
      throw PreconditionError(
          "llm api key missing; set STACKRAG_LLM_API_KEY");
    }
    if (http_.max_retries < 0) {
      throw PreconditionError("max_retries must be >= 0");
    }
  }

 protected:
  std::string chat_now(const ChatRequest& request) override {
    nlohmann::json body = {
        {"model", config_.chat_model},
        {"messages",
         {{{"role", "user"}, {"content", request.prompt}}}},
        {"temperature", request.temperature},
        {"max_tokens", request.max_output_tokens},
    };
    nlohmann::json reply = post_json("/chat/completions", body);
    try {
      return reply.at("choices").at(0).at("message").at("content")
          .get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("malformed chat completion reply: ") +
                       e.what());
    }
  }

  EmbeddingVector embed_now(const std::string& text) override {
    nlohmann::json body = {
        {"model", config_.embedding_model},
        {"input", text},
    };
    nlohmann::json reply = post_json("/embeddings", body);
    EmbeddingVector out;
    out.model_id = config_.embedding_model;
    try {
      out.values =
          reply.at("data").at(0).at("embedding").get<std::vector<double>>();
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("malformed embeddings reply: ") +
                       e.what());
    }
    return out;
  }

 private:
  nlohmann::json post_json(const std::string& endpoint,
                           const nlohmann::json& body) {
    const std::string path = base_.path_prefix + endpoint;
    const std::string payload = body.dump();
    const int attempts = http_.max_retries + 1;
    std::string last_error;
    for (int attempt = 0; attempt < attempts; ++attempt) {
      if (attempt > 0) {
        clock_->sleep_ms(http_.backoff_base_ms * (1LL << (attempt - 1)));
      }
      httplib::Client client(base_.origin);
      client.set_connection_timeout(10, 0);
      client.set_read_timeout(60, 0);
      client.set_bearer_token_auth(http_.api_key);
      note_live_request();
      httplib::Result res = client.Post(path, payload, "application/json");
      if (!res) {
        last_error = "transport failure: " + httplib::to_string(res.error());
        continue;
      }
      if (res->status == 401 || res->status == 403) {
        throw AuthError("llm endpoint rejected credentials (HTTP " +
                        std::to_string(res->status) + ")");
      }
      if (res->status == 429) {
        last_error = "HTTP 429";
        continue;
      }
      if (res->status >= 500) {
        last_error = "HTTP " + std::to_string(res->status);
        continue;
      }
      if (res->status != 200) {
        throw TransportError("llm endpoint returned HTTP " +
                             std::to_string(res->status) + ": " +
                             truncate_to_bytes(res->body, 200));
      }
      try {
        return nlohmann::json::parse(res->body);
      } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("llm reply is not valid JSON: ") +
                         e.what());
      }
    }
    if (last_error == "HTTP 429") {
      throw BudgetError("llm endpoint kept rate-limiting after " +
                        std::to_string(attempts) + " attempts");
    }
    throw TransportError("llm request failed after " +
                         std::to_string(attempts) +
                         " attempts: " + last_error);
  }

  OpenAiConfig http_;
  ParsedBaseUrl base_;
  Clock* clock_;
};

}  // namespace stackrag
