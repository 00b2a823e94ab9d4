#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "stackrag/answer.hpp"
#include "stackrag/errors.hpp"
#include "stackrag/evidence.hpp"
#include "stackrag/keywords.hpp"
#include "stackrag/llm_gateway.hpp"
#include "stackrag/rank.hpp"
#include "stackrag/se_client.hpp"
#include "stackrag/text.hpp"
#include "stackrag/types.hpp"
#include "stackrag/vector_store.hpp"

namespace stackrag {

struct SessionConfig {
  int bm25_top_k = 50;
  int cosine_top_k = 30;
  int mmr_k = 15;
  int evidence_n = 3;
  double mmr_lambda = 0.5;
  int max_loop_iterations = 3;
  int max_store_retries = 2;

  void validate() const {
    if (bm25_top_k < 1 || cosine_top_k < 1 || mmr_k < 1 || evidence_n < 1 ||
        max_loop_iterations < 1 || max_store_retries < 0) {
      throw PreconditionError("session config counts must be positive");
    }
    if (mmr_k > cosine_top_k) {
      throw PreconditionError("mmr_k must not exceed cosine_top_k");
    }
    if (evidence_n > mmr_k) {
      throw PreconditionError("evidence_n must not exceed mmr_k");
    }
    if (mmr_lambda < 0.0 || mmr_lambda > 1.0) {
      throw PreconditionError("mmr_lambda must be in [0, 1]");
    }
  }
};

// Stage counts for one pass through the loop, for reporting and tests.
struct IterationTrace {
  std::vector<std::string> keywords;
  std::size_t raw_hits = 0;
  std::size_t unique_hits = 0;
  std::size_t ranked = 0;
  std::size_t answered = 0;
  std::size_t unanswered = 0;
  std::size_t stored = 0;
  std::size_t candidates_retrieved = 0;
  std::size_t candidates_selected = 0;
  std::size_t bundle_size = 0;
  bool sufficient = false;
};

struct SessionTrace {
  std::vector<IterationTrace> iterations;
};

enum class AskStatus { Answered, NoResults, Failed };

struct AskResult {
  AskStatus status = AskStatus::Failed;
  GeneratedAnswer answer;
  std::string failure_reason;
  SessionTrace trace;
};

// One embeddable document per question: title first (the store's display
// name comes from line 1), then the question body, then the selected
// answers with their accepted flags and scores spelled out.
inline std::string build_document_text(
    const SOQuestion& question, const std::vector<SOAnswer>& answers) {
  std::string out = strip_html(question.title);
  out += "\nQuestion:\n";
  out += strip_html(question.body);
  for (const auto& answer : answers) {
    out += answer.is_accepted ? "\nAccepted answer (score " :
                                "\nAnswer (score ";
    out += std::to_string(answer.score);
    out += "):\n";
    out += strip_html(answer.body);
  }
  return out;
}

struct StoreOutcome {
  std::size_t stored = 0;
  std::vector<LinkRef> unanswered;
};

// The central loop: keyword extraction, search and store, evidence
// gathering, sufficiency gate, answer generation, with bounded restarts.
class Orchestrator {
 public:
  Orchestrator(std::shared_ptr<LlmGateway> gateway,
               std::shared_ptr<StackExchangeClient> se_client,
               VectorStore& store, SessionConfig config = {})
      : gateway_(gateway),
        se_client_(std::move(se_client)),
        store_(store),
        config_(config),
        analyzer_(gateway),
        gatherer_(gateway, store,
                  EvidenceConfig{static_cast<std::size_t>(config.cosine_top_k),
                                 static_cast<std::size_t>(config.mmr_k),
                                 static_cast<std::size_t>(config.evidence_n),
                                 config.mmr_lambda}),
        generator_(gateway) {
    config_.validate();
    if (!se_client_) throw PreconditionError("orchestrator needs a client");
  }

  // Search every keyword, BM-25-rank the deduplicated union against the
  // user's question, store combined documents for accepted-answer questions
  // not already cached, and hand back the unanswered questions' links.
  StoreOutcome search_and_store(const UserQuery& query,
                                const KeywordList& keywords,
                                IterationTrace* trace = nullptr) {
    if (keywords.empty()) {
      throw PreconditionError("search needs at least one keyword");
    }
    std::vector<SOQuestion> unique;
    std::map<std::int64_t, std::size_t> seen;
    std::size_t raw_hits = 0;
    for (const auto& keyword : keywords.keywords()) {
      std::vector<SOQuestion> hits =
          retry_after_backoff([&] {
            return se_client_->search_questions(keyword);
          });
      raw_hits += hits.size();
      for (auto& question : hits) {
        if (seen.emplace(question.id, unique.size()).second) {
          unique.push_back(std::move(question));
        }
      }
    }
    if (trace) {
      trace->raw_hits = raw_hits;
      trace->unique_hits = unique.size();
    }

    std::vector<std::pair<std::int64_t, std::string>> corpus;
    corpus.reserve(unique.size());
    for (const auto& question : unique) {
      corpus.emplace_back(question.id, question.title + "\n" +
                                           strip_html(question.body));
    }
    const auto ranked = bm25_topk(query.text(), corpus,
                                  static_cast<std::size_t>(config_.bm25_top_k));
    if (trace) trace->ranked = ranked.size();

    StoreOutcome outcome;
    std::vector<const SOQuestion*> answered;
    for (const auto& scored : ranked) {
      const SOQuestion& question = unique[seen.at(scored.id)];
      if (question.accepted_answer_id) {
        answered.push_back(&question);
      } else {
        outcome.unanswered.push_back(LinkRef{question.title, question.link});
      }
    }
    if (trace) {
      trace->answered = answered.size();
      trace->unanswered = outcome.unanswered.size();
    }

    std::vector<std::int64_t> to_fetch;
    for (const SOQuestion* question : answered) {
      if (!store_.contains(question->id)) to_fetch.push_back(question->id);
    }
    if (to_fetch.empty()) return outcome;

    const auto answers = retry_after_backoff([&] {
      return se_client_->fetch_answers(to_fetch);
    });
    for (const SOQuestion* question : answered) {
      if (store_.contains(question->id)) continue;
      auto it = answers.find(question->id);
      const std::vector<SOAnswer> selected =
          select_answers(it == answers.end() ? std::vector<SOAnswer>{}
                                             : it->second);
      StoredDocument doc;
      doc.question_id = question->id;
      doc.link = question->link;
      doc.document_text = build_document_text(*question, selected);
      doc.embedding = gateway_->embed(doc.document_text);
      store_.upsert(std::move(doc));
      ++outcome.stored;
    }
    if (trace) trace->stored = outcome.stored;
    return outcome;
  }

  AskResult ask(const UserQuery& query) {
    AskResult result;
    for (int iteration = 0; iteration < config_.max_loop_iterations;
         ++iteration) {
      IterationTrace trace;
      try {
        const KeywordList keywords = analyzer_.analyze(query);
        trace.keywords = keywords.keywords();

        // An empty keyword list leaves nothing to search, but the store
        // may still hold enough from earlier sessions.
        StoreOutcome outcome;
        if (!keywords.empty()) {
          outcome = store_with_retries(query, keywords, trace);
        }
        GatherResult gathered = gatherer_.gather(query, outcome.unanswered);
        record_gather(trace, gathered);
        if (gathered.sufficient) {
          result.answer = generator_.generate(query, gathered.bundle);
          result.status = AskStatus::Answered;
          result.trace.iterations.push_back(std::move(trace));
          return result;
        }
      } catch (const Error& e) {
        result.status = AskStatus::Failed;
        result.failure_reason = e.what();
        result.trace.iterations.push_back(std::move(trace));
        return result;
      }
      result.trace.iterations.push_back(std::move(trace));
    }
    result.status = AskStatus::NoResults;
    result.failure_reason = "no results found";
    return result;
  }

  const SessionConfig& config() const { return config_; }
  VectorStore& store() { return store_; }

 private:
  template <typename F>
  auto retry_after_backoff(F&& call) -> decltype(call()) {
    try {
      return call();
    } catch (const BackoffRequested&) {
      // The client recorded the embargo; the retried call sleeps it out.
      return call();
    }
  }

  StoreOutcome store_with_retries(const UserQuery& query,
                                  const KeywordList& keywords,
                                  IterationTrace& trace) {
    for (int attempt = 0;; ++attempt) {
      try {
        return search_and_store(query, keywords, &trace);
      } catch (const StorageError& e) {
        if (attempt >= config_.max_store_retries) {
          throw SearchFailed(std::string("storing search results failed: ") +
                             e.what());
        }
      }
    }
  }

  static void record_gather(IterationTrace& trace,
                            const GatherResult& gathered) {
    trace.candidates_retrieved = gathered.retrieved;
    trace.candidates_selected = gathered.selected;
    trace.bundle_size = gathered.bundle.items.size();
    trace.sufficient = gathered.sufficient;
  }

  std::shared_ptr<LlmGateway> gateway_;
  std::shared_ptr<StackExchangeClient> se_client_;
  VectorStore& store_;
  SessionConfig config_;
  QuestionAnalyzer analyzer_;
  EvidenceGatherer gatherer_;
  AnswerGenerator generator_;
};

}  // namespace stackrag
