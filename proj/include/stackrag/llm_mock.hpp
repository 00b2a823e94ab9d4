#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "stackrag/errors.hpp"
#include "stackrag/fs_util.hpp"
#include "stackrag/llm_gateway.hpp"

namespace stackrag {

inline std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t hash = 14695981039346656037ULL;
  for (unsigned char c : data) {
    hash ^= static_cast<std::uint64_t>(c);
    hash *= 1099511628211ULL;
  }
  return hash;
}

inline std::string fnv1a64_hex(std::string_view data) {
  static const char* digits = "0123456789abcdef";
  std::uint64_t hash = fnv1a64(data);
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[hash & 0xF];
    hash >>= 4;
  }
  return out;
}

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace detail

// Deterministic stand-in embedding: the text hash seeds a splitmix64
// stream whose values are mapped to [-1, 1) and L2-normalized. Same text,
// same vector; distinct texts diverge with overwhelming probability.
inline EmbeddingVector hash_embedding(std::string_view text,
                                      std::size_t dimension,
                                      std::string model_id) {
  std::uint64_t state = fnv1a64(text);
  EmbeddingVector out;
  out.model_id = std::move(model_id);
  out.values.resize(dimension);
  double norm_sq = 0.0;
  for (std::size_t i = 0; i < dimension; ++i) {
    const std::uint64_t bits = detail::splitmix64(state);
    // Top 53 bits give a uniform double in [0, 1).
    const double unit =
        static_cast<double>(bits >> 11) * (1.0 / 9007199254740992.0);
    out.values[i] = 2.0 * unit - 1.0;
    norm_sq += out.values[i] * out.values[i];
  }
  if (norm_sq == 0.0) {
    out.values[0] = 1.0;
    return out;
  }
  const double inv = 1.0 / std::sqrt(norm_sq);
  for (double& v : out.values) v *= inv;
  return out;
}

// Scripted offline backend. Chat responses come from an ordered list of
// {match, response} entries; a call consumes the first unused entry whose
// match string occurs in the prompt. Matching by content rather than call
// order keeps concurrent callers deterministic. Embeddings use recorded
// vectors when present and fall back to hash_embedding.
class ScriptedGateway : public LlmGateway {
 public:
  explicit ScriptedGateway(GatewayConfig config)
      : LlmGateway(std::move(config)) {}

  void enqueue(std::string match, std::string response) {
    std::lock_guard<std::mutex> lock(mu_);
    script_.push_back({std::move(match), std::move(response), false});
  }

  // Pins the embedding for one exact (post-truncation) input text.
  void set_embedding(std::string_view text, std::vector<double> values) {
    if (values.size() != config_.embedding_dimension) {
      throw DimensionMismatch("pinned embedding has wrong dimension");
    }
    std::lock_guard<std::mutex> lock(mu_);
    pinned_[fnv1a64_hex(text)] = std::move(values);
  }

  static std::shared_ptr<ScriptedGateway> from_file(
      const std::filesystem::path& path, GatewayConfig config) {
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(read_file_or_throw(path));
    } catch (const nlohmann::json::exception& e) {
      throw StorageError("malformed llm script " + path.string() + ": " +
                         e.what());
    }
    auto gateway = std::make_shared<ScriptedGateway>(std::move(config));
    for (const auto& entry : doc.value("chat", nlohmann::json::array())) {
      gateway->enqueue(entry.at("match").get<std::string>(),
                       entry.at("response").get<std::string>());
    }
    for (const auto& entry :
         doc.value("embeddings", nlohmann::json::array())) {
      std::vector<double> values =
          entry.at("values").get<std::vector<double>>();
      if (values.size() != gateway->config_.embedding_dimension) {
        throw StorageError("recorded embedding dimension mismatch in " +
                           path.string());
      }
      std::lock_guard<std::mutex> lock(gateway->mu_);
      gateway->pinned_[entry.at("text_hash").get<std::string>()] =
          std::move(values);
    }
    return gateway;
  }

  int chat_calls() const {
    std::lock_guard<std::mutex> lock(mu_);
    return chat_calls_;
  }
  int embed_calls() const {
    std::lock_guard<std::mutex> lock(mu_);
    return embed_calls_;
  }
  std::vector<std::string> chat_log() const {
    std::lock_guard<std::mutex> lock(mu_);
    return chat_log_;
  }
  std::vector<std::string> embed_log() const {
    std::lock_guard<std::mutex> lock(mu_);
    return embed_log_;
  }
  std::size_t unconsumed_entries() const {
    std::lock_guard<std::mutex> lock(mu_);
    std::size_t n = 0;
    for (const auto& e : script_) {
      if (!e.used) ++n;
    }
    return n;
  }

 protected:
  std::string chat_now(const ChatRequest& request) override {
    std::lock_guard<std::mutex> lock(mu_);
    ++chat_calls_;
    chat_log_.push_back(request.prompt);
    for (auto& entry : script_) {
      if (entry.used) continue;
      if (request.prompt.find(entry.match) == std::string::npos) continue;
      entry.used = true;
      return entry.response;
    }
    throw FixtureMiss("no unconsumed scripted response matches prompt: " +
                      truncate_to_bytes(request.prompt, 160));
  }

  EmbeddingVector embed_now(const std::string& text) override {
    {
      std::lock_guard<std::mutex> lock(mu_);
      ++embed_calls_;
      embed_log_.push_back(text);
      auto it = pinned_.find(fnv1a64_hex(text));
      if (it != pinned_.end()) {
        return EmbeddingVector{it->second, config_.embedding_model};
      }
    }
    return hash_embedding(text, config_.embedding_dimension,
                          config_.embedding_model);
  }

 private:
  struct Entry {
    std::string match;
    std::string response;
    bool used;
  };

  mutable std::mutex mu_;
  std::vector<Entry> script_;
  std::map<std::string, std::vector<double>> pinned_;
  std::vector<std::string> chat_log_;
  std::vector<std::string> embed_log_;
  int chat_calls_ = 0;
  int embed_calls_ = 0;
};

// Pass-through backend that captures traffic in the scripted format so a
// live session can be replayed offline. Chat match strings are the full
// prompts; embeddings are keyed by the hash of their exact input.
class RecordingGateway : public LlmGateway {
 public:
  explicit RecordingGateway(std::shared_ptr<LlmGateway> inner)
      : LlmGateway(inner ? inner->config() : GatewayConfig{}),
        inner_(std::move(inner)) {
    if (!inner_) throw PreconditionError("recording gateway needs a backend");
  }

  void save_script(const std::filesystem::path& path) const {
    nlohmann::json doc;
    doc["chat"] = nlohmann::json::array();
    doc["embeddings"] = nlohmann::json::array();
    std::lock_guard<std::mutex> lock(mu_);
    for (const auto& [prompt, response] : chat_) {
      doc["chat"].push_back({{"match", prompt}, {"response", response}});
    }
    for (const auto& [hash, values] : embeddings_) {
      doc["embeddings"].push_back({{"text_hash", hash}, {"values", values}});
    }
    atomic_write_file(path, doc.dump(2) + "\n");
  }

 protected:
  std::string chat_now(const ChatRequest& request) override {
    std::string response = inner_->chat(request);
    std::lock_guard<std::mutex> lock(mu_);
    chat_.emplace_back(request.prompt, response);
    return response;
  }

  EmbeddingVector embed_now(const std::string& text) override {
    EmbeddingVector out = inner_->embed(text);
    std::lock_guard<std::mutex> lock(mu_);
    embeddings_[fnv1a64_hex(text)] = out.values;
    return out;
  }

 private:
  std::shared_ptr<LlmGateway> inner_;
  mutable std::mutex mu_;
  std::vector<std::pair<std::string, std::string>> chat_;
  std::map<std::string, std::vector<double>> embeddings_;
};

}  // namespace stackrag
