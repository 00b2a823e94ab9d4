#pragma once

#include <algorithm>
#include <exception>
#include <future>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "stackrag/errors.hpp"
#include "stackrag/llm_gateway.hpp"
#include "stackrag/prompts.hpp"
#include "stackrag/text.hpp"
#include "stackrag/types.hpp"

namespace stackrag {

namespace detail {

// Parses a bracketed, double-quoted list: ["a", "b c"]. Returns nullopt on
// anything that is not such a list; an empty list is a valid parse.
inline std::optional<std::vector<std::string>> parse_quoted_list(
    const std::string& raw) {
  const std::string text = trim_copy(raw);
  const std::size_t open = text.find('[');
  const std::size_t close = text.rfind(']');
  if (open == std::string::npos || close == std::string::npos ||
      close < open) {
    return std::nullopt;
  }
  std::vector<std::string> items;
  std::size_t pos = open + 1;
  while (pos < close) {
    const char c = text[pos];
    if (c == '"') {
      std::string item;
      ++pos;
      bool closed = false;
      while (pos < close) {
        const char d = text[pos];
        if (d == '\\' && pos + 1 < close) {
          item.push_back(text[pos + 1]);
          pos += 2;
          continue;
        }
        if (d == '"') {
          closed = true;
          ++pos;
          break;
        }
        item.push_back(d);
        ++pos;
      }
      if (!closed) return std::nullopt;
      items.push_back(std::move(item));
    } else if (is_ascii_space(c) || c == ',') {
      ++pos;
    } else {
      return std::nullopt;  // unquoted tokens are not a valid list
    }
  }
  return items;
}

// The extractor prompt demands queries under 4 words; longer entries are
// cut to their first 3 whitespace tokens instead of being rejected. The
// result is rebuilt from tokens, so interior whitespace runs collapse too.
inline std::string enforce_keyword_length(const std::string& keyword) {
  const std::vector<std::string> tokens = split_whitespace(keyword);
  std::string out;
  const std::size_t take = std::min<std::size_t>(tokens.size(), 3);
  for (std::size_t i = 0; i < take; ++i) {
    if (i > 0) out.push_back(' ');
    out += tokens[i];
  }
  return out;
}

inline std::string strip_list_decoration(const std::string& line) {
  std::string out = trim_copy(line);
  if (!out.empty() && (out[0] == '-' || out[0] == '*')) {
    return trim_copy(out.substr(1));
  }
  std::size_t digits = 0;
  while (digits < out.size() && out[digits] >= '0' && out[digits] <= '9') {
    ++digits;
  }
  if (digits > 0 && digits < out.size() &&
      (out[digits] == '.' || out[digits] == ')')) {
    return trim_copy(out.substr(digits + 1));
  }
  return out;
}

}  // namespace detail

// Complexity gate, sub-question fan-out, and keyword extraction.
class QuestionAnalyzer {
 public:
  explicit QuestionAnalyzer(std::shared_ptr<LlmGateway> gateway)
      : gateway_(std::move(gateway)) {
    if (!gateway_) throw PreconditionError("analyzer needs a gateway");
  }

  // True iff the model says TRUE. FALSE needs no retry; anything else gets
  // one re-ask and an unparseable second answer counts as FALSE.
  bool check_complexity(const UserQuery& query) {
    const std::string prompt = render_complexity_prompt(query);
    for (int attempt = 0; attempt < 2; ++attempt) {
      const std::string raw =
          to_upper_ascii(trim_copy(gateway_->chat({prompt})));
      if (raw == "TRUE") return true;
      if (raw == "FALSE") return false;
    }
    return false;
  }

  std::vector<UserQuery> split_into_subquestions(const UserQuery& query) {
    const std::string raw = gateway_->chat({render_subquestion_prompt(query)});
    std::vector<UserQuery> out;
    for (const std::string& line : split_lines(raw)) {
      const std::string cleaned = detail::strip_list_decoration(line);
      if (cleaned.empty()) continue;
      out.emplace_back(cleaned);
    }
    if (out.empty()) out.push_back(query);
    return out;
  }

  KeywordList extract_keywords(const UserQuery& question) {
    const std::string prompt = render_keyword_prompt(question);
    std::optional<std::vector<std::string>> items;
    for (int attempt = 0; attempt < 2 && !items; ++attempt) {
      items = detail::parse_quoted_list(gateway_->chat({prompt}));
    }
    if (!items) {
      throw ParseError(
          "keyword extractor did not return a bracketed quoted list for: " +
          question.text());
    }
    std::vector<std::string> keywords;
    keywords.reserve(items->size());
    for (const std::string& item : *items) {
      keywords.push_back(detail::enforce_keyword_length(item));
    }
    return KeywordList::normalized(std::move(keywords));
  }

  // Simple questions go straight to extraction; complex ones fan out over
  // sub-questions (at most 4 in flight) and merge keyword lists in
  // sub-question order, first occurrence winning.
  KeywordList analyze(const UserQuery& query) {
    if (!check_complexity(query)) {
      return extract_keywords(query);
    }
    const std::vector<UserQuery> subs = split_into_subquestions(query);
    std::vector<std::optional<KeywordList>> results(subs.size());
    std::exception_ptr first_failure;
    for (std::size_t base = 0; base < subs.size(); base += kMaxInFlight) {
      const std::size_t end = std::min(base + kMaxInFlight, subs.size());
      std::vector<std::future<KeywordList>> batch;
      for (std::size_t i = base; i < end; ++i) {
        batch.push_back(std::async(std::launch::async, [this, &subs, i] {
          return extract_keywords(subs[i]);
        }));
      }
      for (std::size_t i = base; i < end; ++i) {
        try {
          results[i] = batch[i - base].get();
        } catch (...) {
          if (!first_failure) first_failure = std::current_exception();
        }
      }
    }
    std::vector<std::string> merged;
    for (const auto& result : results) {
      if (!result) continue;
      for (const auto& keyword : result->keywords()) {
        merged.push_back(keyword);
      }
    }
    if (merged.empty() && first_failure) {
      std::rethrow_exception(first_failure);
    }
    return KeywordList::normalized(std::move(merged));
  }

 private:
  static constexpr std::size_t kMaxInFlight = 4;

  std::shared_ptr<LlmGateway> gateway_;
};

}  // namespace stackrag
