#pragma once

#include <algorithm>
#include <cstddef>
#include <future>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "stackrag/errors.hpp"
#include "stackrag/llm_gateway.hpp"
#include "stackrag/prompts.hpp"
#include "stackrag/rank.hpp"
#include "stackrag/text.hpp"
#include "stackrag/types.hpp"
#include "stackrag/vector_store.hpp"

namespace stackrag {

struct EvidenceConfig {
  std::size_t cosine_top_k = 30;
  std::size_t mmr_top_k = 15;
  std::size_t bundle_size = 3;
  double mmr_lambda = 0.5;
};

struct GatherResult {
  bool sufficient = false;
  EvidenceBundle bundle;
  // Funnel sizes for tracing: cosine hits, then MMR survivors.
  std::size_t retrieved = 0;
  std::size_t selected = 0;
};

// Evidence Gatherer: cosine top-30 from the store, MMR down to 15, LLM
// relevance scores, top-3 bundle, sufficiency gate.
class EvidenceGatherer {
 public:
  EvidenceGatherer(std::shared_ptr<LlmGateway> gateway, VectorStore& store,
                   EvidenceConfig config = {})
      : gateway_(std::move(gateway)), store_(store), config_(config) {
    if (!gateway_) throw PreconditionError("gatherer needs a gateway");
    if (config_.cosine_top_k == 0 || config_.mmr_top_k == 0 ||
        config_.bundle_size == 0) {
      throw PreconditionError("gatherer top-k values must be positive");
    }
    if (config_.mmr_lambda < 0.0 || config_.mmr_lambda > 1.0) {
      throw PreconditionError("mmr lambda must be in [0, 1]");
    }
  }

  std::vector<EvidenceItem> retrieve_candidates(const UserQuery& query) {
    if (store_.size() == 0) {
      throw EmptyStore("vector store holds no documents");
    }
    const EmbeddingVector query_embedding = gateway_->embed(query.text());
    const auto hits = store_.query(query_embedding, config_.cosine_top_k);

    std::vector<std::pair<std::size_t, std::vector<double>>> candidates;
    candidates.reserve(hits.size());
    for (std::size_t i = 0; i < hits.size(); ++i) {
      candidates.emplace_back(i, hits[i].first.embedding.values);
    }
    const std::vector<std::size_t> picked = mmr_select(
        query_embedding.values, candidates, config_.mmr_top_k,
        config_.mmr_lambda);

    std::vector<EvidenceItem> out;
    out.reserve(picked.size());
    for (std::size_t idx : picked) {
      EvidenceItem item;
      item.question_id = hits[idx].first.question_id;
      item.document_text = hits[idx].first.document_text;
      item.link = LinkRef{title_of(hits[idx].first), hits[idx].first.link};
      item.cosine_score = hits[idx].second;
      item.relevance = Relevance::unscored();
      out.push_back(std::move(item));
    }
    return out;
  }

  // One score per prompt round-trip: a digit 1..5 or the exact lowercase
  // words "not useful". Anything else gets a single re-ask and then counts
  // as NotUseful.
  Relevance score_item(const UserQuery& query, const EvidenceItem& item) {
    if (item.document_text.empty()) {
      throw PreconditionError("cannot score evidence without document text");
    }
    const std::string prompt =
        render_scorer_prompt(item.document_text, query);
    for (int attempt = 0; attempt < 2; ++attempt) {
      const std::string raw = trim_copy(gateway_->chat({prompt}));
      if (raw == "not useful") return Relevance::not_useful();
      if (raw.size() == 1 && raw[0] >= '1' && raw[0] <= '5') {
        return Relevance::scored(raw[0] - '0');
      }
    }
    return Relevance::not_useful();
  }

  EvidenceBundle select_bundle(std::vector<EvidenceItem> scored,
                               std::vector<LinkRef> unanswered,
                               std::size_t n) const {
    if (n == 0) throw PreconditionError("bundle size must be positive");
    std::vector<EvidenceItem> useful;
    for (auto& item : scored) {
      if (item.relevance.is_scored()) useful.push_back(std::move(item));
    }
    std::stable_sort(useful.begin(), useful.end(),
                     [](const EvidenceItem& a, const EvidenceItem& b) {
                       if (a.relevance.rank() != b.relevance.rank()) {
                         return a.relevance.rank() > b.relevance.rank();
                       }
                       return a.cosine_score > b.cosine_score;
                     });
    if (useful.size() > n) useful.resize(n);

    EvidenceBundle bundle;
    bundle.items = std::move(useful);
    bundle.unanswered_links = std::move(unanswered);
    std::string combined;
    for (const auto& item : bundle.items) {
      if (!combined.empty()) combined.push_back('\n');
      combined += "----- evidence from " + item.link.url + " -----\n";
      combined += item.document_text;
      combined.push_back('\n');
    }
    bundle.combined_text = std::move(combined);
    return bundle;
  }

  // TRUE means enough evidence. FALSE is a well-formed verdict; only a
  // malformed reply earns the single re-ask. Empty bundles never reach the
  // model.
  bool check_sufficiency(const UserQuery& query,
                         const EvidenceBundle& bundle) {
    if (bundle.empty()) return false;
    const std::string prompt =
        render_checker_prompt(bundle.combined_text, query);
    for (int attempt = 0; attempt < 2; ++attempt) {
      const std::string raw =
          to_upper_ascii(trim_copy(gateway_->chat({prompt})));
      if (raw == "TRUE") return true;
      if (raw == "FALSE") return false;
    }
    return false;
  }

  GatherResult gather(const UserQuery& query,
                      std::vector<LinkRef> unanswered) {
    GatherResult result;
    std::vector<EvidenceItem> candidates;
    try {
      candidates = retrieve_candidates(query);
    } catch (const EmptyStore&) {
      result.bundle.unanswered_links = std::move(unanswered);
      return result;
    }
    result.retrieved = std::min<std::size_t>(store_.size(),
                                             config_.cosine_top_k);
    result.selected = candidates.size();

    // Items are scored in parallel, at most kScoreInFlight at a time, and
    // results land back in item order so the bundle tie-break stays
    // deterministic.
    for (std::size_t base = 0; base < candidates.size();
         base += kScoreInFlight) {
      const std::size_t end =
          std::min(base + kScoreInFlight, candidates.size());
      std::vector<std::future<Relevance>> scores;
      scores.reserve(end - base);
      for (std::size_t i = base; i < end; ++i) {
        const EvidenceItem& item = candidates[i];
        scores.push_back(std::async(std::launch::async,
                                    [this, &query, &item] {
                                      return score_item(query, item);
                                    }));
      }
      for (std::size_t i = base; i < end; ++i) {
        candidates[i].relevance = scores[i - base].get();
      }
    }

    result.bundle = select_bundle(std::move(candidates),
                                  std::move(unanswered),
                                  config_.bundle_size);
    result.sufficient = check_sufficiency(query, result.bundle);
    return result;
  }

  const EvidenceConfig& config() const { return config_; }

 private:
  static constexpr std::size_t kScoreInFlight = 8;

  // Stored documents carry no separate title; the first line of the
  // document text is the question title by construction.
  static std::string title_of(const StoredDocument& doc) {
    const std::size_t eol = doc.document_text.find('\n');
    return trim_copy(doc.document_text.substr(0, eol));
  }

  std::shared_ptr<LlmGateway> gateway_;
  VectorStore& store_;
  EvidenceConfig config_;
};

}  // namespace stackrag
