#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "stackrag/errors.hpp"
#include "stackrag/text.hpp"

namespace stackrag {

struct ChatRequest {
  std::string prompt;
  double temperature = 0.0;
  int max_output_tokens = 2048;
};

struct EmbeddingVector {
  std::vector<double> values;
  std::string model_id;

  std::size_t dimension() const { return values.size(); }
};

struct GatewayConfig {
  std::string chat_model = "gpt-4o-mini";
  // The upstream description names two embedding models for the write and
  // read paths; cross-model cosine is meaningless, so one model serves both.
  std::string embedding_model = "text-embedding-3-small";
  std::size_t embedding_dimension = 1536;
  std::size_t embed_char_budget = 8000;
};

// Base for chat-completion and embedding backends. Validation and input
// truncation live here so every backend honors the same contract.
class LlmGateway {
 public:
  explicit LlmGateway(GatewayConfig config) : config_(std::move(config)) {
    if (config_.embedding_dimension == 0) {
      throw PreconditionError("embedding dimension must be positive");
    }
    if (config_.embed_char_budget == 0) {
      throw PreconditionError("embedding char budget must be positive");
    }
  }
  virtual ~LlmGateway() = default;

  LlmGateway(const LlmGateway&) = delete;
  LlmGateway& operator=(const LlmGateway&) = delete;

  const GatewayConfig& config() const { return config_; }

  std::string chat(const ChatRequest& request) {
    if (trim_copy(request.prompt).empty()) {
      throw PreconditionError("chat prompt must be non-empty");
    }
    if (request.temperature < 0.0) {
      throw PreconditionError("chat temperature must be >= 0");
    }
    if (request.max_output_tokens <= 0) {
      throw PreconditionError("chat max_output_tokens must be positive");
    }
    return chat_now(request);
  }

  EmbeddingVector embed(std::string_view text) {
    if (trim_copy(std::string(text)).empty()) {
      throw PreconditionError("embedding input must be non-empty");
    }
    std::string clipped =
        truncate_to_bytes(std::string(text), config_.embed_char_budget);
    EmbeddingVector out = embed_now(clipped);
    if (out.values.size() != config_.embedding_dimension) {
      throw DimensionMismatch(
          "backend returned " + std::to_string(out.values.size()) +
          "-dim embedding, expected " +
          std::to_string(config_.embedding_dimension));
    }
    for (double v : out.values) {
      if (!std::isfinite(v)) {
        throw ParseError("backend returned a non-finite embedding value");
      }
    }
    return out;
  }

 protected:
  virtual std::string chat_now(const ChatRequest& request) = 0;
  virtual EmbeddingVector embed_now(const std::string& text) = 0;

  GatewayConfig config_;
};

}  // namespace stackrag
