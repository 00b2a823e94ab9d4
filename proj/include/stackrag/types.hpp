#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "stackrag/errors.hpp"
#include "stackrag/text.hpp"

namespace stackrag {

// The developer's question. Guaranteed non-blank; stored trimmed.
class UserQuery {
 public:
  explicit UserQuery(std::string text) : text_(trim_copy(text)) {
    if (text_.empty())
      throw PreconditionError("user query must not be blank");
  }

  const std::string& text() const { return text_; }

 private:
  std::string text_;
};

// Ordered, duplicate-free list of Stack Overflow search queries.
class KeywordList {
 public:
  KeywordList() = default;

  // Trims entries, drops empties, removes duplicates keeping the first
  // occurrence. Order is otherwise preserved.
  static KeywordList normalized(const std::vector<std::string>& raw) {
    KeywordList list;
    for (const auto& entry : raw) {
      std::string kw = trim_copy(entry);
      if (kw.empty()) continue;
      bool seen = false;
      for (const auto& existing : list.keywords_) {
        if (existing == kw) {
          seen = true;
          break;
        }
      }
      if (!seen) list.keywords_.push_back(std::move(kw));
    }
    return list;
  }

  const std::vector<std::string>& keywords() const { return keywords_; }
  bool empty() const { return keywords_.empty(); }
  std::size_t size() const { return keywords_.size(); }

 private:
  std::vector<std::string> keywords_;
};

// One Stack Overflow question as returned by the search endpoint.
// The body arrives as HTML.
struct SOQuestion {
  std::int64_t id = 0;
  std::string link;
  std::string title;
  std::string body;
  std::int64_t creation_date = 0;
  std::optional<std::int64_t> accepted_answer_id;

  bool valid() const {
    return id > 0 && !link.empty() && creation_date > 0 &&
           (!accepted_answer_id.has_value() || *accepted_answer_id > 0);
  }
};

struct SOAnswer {
  std::int64_t id = 0;
  std::int64_t question_id = 0;
  std::string body;
  std::int64_t score = 0;
  std::int64_t creation_date = 0;
  bool is_accepted = false;

  bool valid() const { return id > 0 && question_id > 0; }
};

struct LinkRef {
  std::string title;
  std::string url;

  friend bool operator==(const LinkRef& a, const LinkRef& b) {
    return a.title == b.title && a.url == b.url;
  }
};

// Relevance of an evidence item: a 1-5 score from the scorer agent,
// "not useful", or not yet scored.
class Relevance {
 public:
  static Relevance unscored() { return Relevance(Kind::kUnscored, 0); }
  static Relevance not_useful() { return Relevance(Kind::kNotUseful, 0); }
  static Relevance scored(int score) {
    if (score < 1 || score > 5)
      throw PreconditionError("relevance score must be 1..5");
    return Relevance(Kind::kScored, score);
  }

  bool is_unscored() const { return kind_ == Kind::kUnscored; }
  bool is_not_useful() const { return kind_ == Kind::kNotUseful; }
  bool is_scored() const { return kind_ == Kind::kScored; }

  int score() const {
    if (!is_scored()) throw PreconditionError("relevance has no score");
    return score_;
  }

  // Sort key, higher is better. Unscored and not-useful rank below 1.
  int rank() const { return is_scored() ? score_ : 0; }

  friend bool operator==(const Relevance& a, const Relevance& b) {
    return a.kind_ == b.kind_ && a.score_ == b.score_;
  }

 private:
  enum class Kind { kUnscored, kNotUseful, kScored };

  Relevance(Kind kind, int score) : kind_(kind), score_(score) {}

  Kind kind_;
  int score_;
};

// One question-plus-answers document as seen by the evidence stage.
struct EvidenceItem {
  std::int64_t question_id = 0;
  std::string document_text;  // HTML-stripped title + body + answers
  LinkRef link;
  double cosine_score = 0.0;  // similarity to the query embedding, in [-1, 1]
  Relevance relevance = Relevance::unscored();
};

// The top-n evidence items handed to the answer generator, with the
// unanswered-question links collected during search.
struct EvidenceBundle {
  std::vector<EvidenceItem> items;
  std::vector<LinkRef> unanswered_links;
  std::string combined_text;

  bool empty() const { return items.empty(); }
};

struct GeneratedAnswer {
  std::string text;
  std::vector<LinkRef> used_links;
  std::vector<LinkRef> unanswered_links;
  // Used links whose URL appears neither in the supplied evidence nor in the
  // unanswered list. Non-empty means the model cited something it was not
  // given.
  std::vector<LinkRef> hallucinated_links;
};

}  // namespace stackrag
