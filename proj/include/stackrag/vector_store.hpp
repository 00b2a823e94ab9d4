#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "stackrag/errors.hpp"
#include "stackrag/fs_util.hpp"
#include "stackrag/llm_gateway.hpp"
#include "stackrag/rank.hpp"
#include "stackrag/text.hpp"

namespace stackrag {

struct StoredDocument {
  std::int64_t question_id = 0;
  std::string link;
  std::string document_text;
  EmbeddingVector embedding;
};

// The local question-id cache mirrored to {"ids": [...]}. Membership here
// is what lets the pipeline skip answer fetches and embeds for questions
// already stored.
class IdCache {
 public:
  explicit IdCache(std::filesystem::path path) : path_(std::move(path)) {
    auto content = read_file_if_exists(path_);
    if (!content) return;
    try {
      nlohmann::json doc = nlohmann::json::parse(*content);
      for (const auto& id : doc.at("ids")) {
        ids_.insert(id.get<std::int64_t>());
      }
    } catch (const nlohmann::json::exception& e) {
      throw StorageError("malformed id cache " + path_.string() + ": " +
                         e.what());
    }
  }

  bool contains(std::int64_t id) const { return ids_.count(id) > 0; }

  std::vector<std::int64_t> known_ids(
      const std::vector<std::int64_t>& candidates) const {
    std::vector<std::int64_t> out;
    for (std::int64_t id : candidates) {
      if (contains(id)) out.push_back(id);
    }
    return out;
  }

  const std::set<std::int64_t>& ids() const { return ids_; }

  void add_and_persist(std::int64_t id) {
    auto [it, inserted] = ids_.insert(id);
    if (!inserted) return;
    try {
      persist();
    } catch (...) {
      ids_.erase(it);
      throw;
    }
  }

  void clear_and_persist() {
    ids_.clear();
    persist();
  }

  const std::filesystem::path& path() const { return path_; }

 private:
  void persist() const {
    nlohmann::json doc;
    doc["ids"] = nlohmann::json::array();
    for (std::int64_t id : ids_) doc["ids"].push_back(id);
    atomic_write_file(path_, doc.dump() + "\n");
  }

  std::filesystem::path path_;
  std::set<std::int64_t> ids_;
};

// Append-only JSONL store of embedded documents, compacted on open and on
// demand. Search is an exhaustive exact cosine scan; at this corpus scale
// exactness costs nothing.
class VectorStore {
 public:
  VectorStore(std::filesystem::path store_file,
              std::filesystem::path cache_file, std::size_t dimension)
      : store_file_(std::move(store_file)),
        dimension_(dimension),
        cache_(std::move(cache_file)) {
    if (dimension_ == 0) {
      throw PreconditionError("store dimension must be positive");
    }
    load();
    reconcile();
  }

  std::size_t size() const {
    std::lock_guard<std::mutex> lock(mu_);
    return docs_.size();
  }

  std::size_t dimension() const { return dimension_; }

  bool contains(std::int64_t question_id) const {
    std::lock_guard<std::mutex> lock(mu_);
    return cache_.contains(question_id);
  }

  std::vector<std::int64_t> known_ids(
      const std::vector<std::int64_t>& candidates) const {
    std::lock_guard<std::mutex> lock(mu_);
    return cache_.known_ids(candidates);
  }

  void upsert(StoredDocument doc) {
    if (doc.question_id <= 0) {
      throw PreconditionError("stored documents need a positive question id");
    }
    if (doc.embedding.values.size() != dimension_) {
      throw DimensionMismatch(
          "document embedding has dimension " +
          std::to_string(doc.embedding.values.size()) + ", store expects " +
          std::to_string(dimension_));
    }
    std::lock_guard<std::mutex> lock(mu_);
    // Durability order: store record first, then the id cache, then the
    // in-memory state. A failure at any point leaves cache ⊆ store, and
    // reconcile() repairs the superset case on next open.
    append_record(doc);
    cache_.add_and_persist(doc.question_id);
    auto it = index_.find(doc.question_id);
    if (it == index_.end()) {
      index_[doc.question_id] = docs_.size();
      docs_.push_back(std::move(doc));
    } else {
      docs_[it->second] = std::move(doc);
    }
  }

  std::vector<std::pair<StoredDocument, double>> query(
      const EmbeddingVector& embedding, std::size_t top_k) const {
    if (top_k == 0) throw PreconditionError("query top_k must be >= 1");
    if (embedding.values.size() != dimension_) {
      throw DimensionMismatch("query embedding has dimension " +
                              std::to_string(embedding.values.size()) +
                              ", store expects " + std::to_string(dimension_));
    }
    std::lock_guard<std::mutex> lock(mu_);
    std::vector<std::pair<std::size_t, double>> scored;
    scored.reserve(docs_.size());
    for (std::size_t i = 0; i < docs_.size(); ++i) {
      scored.emplace_back(
          i, cosine_similarity(embedding.values, docs_[i].embedding.values));
    }
    std::stable_sort(scored.begin(), scored.end(),
                     [](const auto& a, const auto& b) {
                       return a.second > b.second;
                     });
    if (scored.size() > top_k) scored.resize(top_k);
    std::vector<std::pair<StoredDocument, double>> out;
    out.reserve(scored.size());
    for (const auto& [idx, score] : scored) {
      out.emplace_back(docs_[idx], score);
    }
    return out;
  }

  std::vector<std::int64_t> all_ids() const {
    std::lock_guard<std::mutex> lock(mu_);
    std::vector<std::int64_t> out;
    out.reserve(docs_.size());
    for (const auto& doc : docs_) out.push_back(doc.question_id);
    std::sort(out.begin(), out.end());
    return out;
  }

  void clear() {
    std::lock_guard<std::mutex> lock(mu_);
    docs_.clear();
    index_.clear();
    atomic_write_file(store_file_, "");
    cache_.clear_and_persist();
  }

  // Rewrites the JSONL file with exactly one record per live document.
  void compact() {
    std::lock_guard<std::mutex> lock(mu_);
    std::string payload;
    for (const auto& doc : docs_) {
      payload += record_json(doc).dump();
      payload.push_back('\n');
    }
    atomic_write_file(store_file_, payload);
  }

  const std::filesystem::path& store_file() const { return store_file_; }

 private:
  static nlohmann::json record_json(const StoredDocument& doc) {
    return nlohmann::json{
        {"question_id", doc.question_id},
        {"link", doc.link},
        {"document_text", doc.document_text},
        {"model_id", doc.embedding.model_id},
        {"embedding", doc.embedding.values},
    };
  }

  void append_record(const StoredDocument& doc) {
    std::string line = record_json(doc).dump();
    line.push_back('\n');
    append_to_file(store_file_, line);
  }

  void load() {
    auto content = read_file_if_exists(store_file_);
    if (!content) return;
    std::istringstream in(*content);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (trim_copy(line).empty()) continue;
      nlohmann::json doc;
      try {
        doc = nlohmann::json::parse(line);
      } catch (const nlohmann::json::exception& e) {
        throw StorageError("malformed store record at " +
                           store_file_.string() + ":" +
                           std::to_string(line_no) + ": " + e.what());
      }
      StoredDocument record;
      record.question_id = doc.value("question_id", std::int64_t{0});
      record.link = doc.value("link", "");
      record.document_text = doc.value("document_text", "");
      record.embedding.model_id = doc.value("model_id", "");
      record.embedding.values =
          doc.value("embedding", std::vector<double>{});
      if (record.question_id <= 0 ||
          record.embedding.values.size() != dimension_) {
        throw StorageError("store record at " + store_file_.string() + ":" +
                           std::to_string(line_no) +
                           " is invalid for this store");
      }
      auto it = index_.find(record.question_id);
      if (it == index_.end()) {
        index_[record.question_id] = docs_.size();
        docs_.push_back(std::move(record));
      } else {
        docs_[it->second] = std::move(record);  // later record wins
      }
    }
  }

  // The cache must mirror the store exactly; a crash between the two
  // writes can leave an id in the store that the cache missed, never the
  // reverse. Rebuild membership from the store on every open.
  void reconcile() {
    bool dirty = false;
    for (const auto& doc : docs_) {
      if (!cache_.contains(doc.question_id)) dirty = true;
    }
    if (!dirty && cache_.ids().size() == docs_.size()) return;
    cache_.clear_and_persist();
    for (const auto& doc : docs_) {
      cache_.add_and_persist(doc.question_id);
    }
  }

  std::filesystem::path store_file_;
  std::size_t dimension_;
  mutable std::mutex mu_;
  IdCache cache_;
  std::vector<StoredDocument> docs_;
  std::map<std::int64_t, std::size_t> index_;
};

}  // namespace stackrag
