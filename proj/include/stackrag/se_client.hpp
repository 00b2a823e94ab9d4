#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "stackrag/clock.hpp"
#include "stackrag/errors.hpp"
#include "stackrag/se_rate.hpp"
#include "stackrag/se_transport.hpp"
#include "stackrag/text.hpp"
#include "stackrag/types.hpp"

namespace stackrag {

struct SeClientConfig {
  std::string site = "stackoverflow";
  // Built-in StackExchange filter that includes question and answer bodies.
  std::string filter = "withbody";
  int page_size = 30;
  std::string api_key;
  int answer_batch_size = 100;  // the API's vector limit
};

// Accepted answer (if any) plus the top 2 unaccepted ones, ranked by score
// and then by recency. Output never exceeds 3 entries.
inline std::vector<SOAnswer> select_answers(
    const std::vector<SOAnswer>& answers) {
  std::vector<SOAnswer> out;
  std::vector<SOAnswer> unaccepted;
  bool have_accepted = false;
  for (const auto& answer : answers) {
    if (answer.is_accepted && !have_accepted) {
      out.push_back(answer);
      have_accepted = true;
    } else if (!answer.is_accepted) {
      unaccepted.push_back(answer);
    }
  }
  std::stable_sort(unaccepted.begin(), unaccepted.end(),
                   [](const SOAnswer& a, const SOAnswer& b) {
                     if (a.score != b.score) return a.score > b.score;
                     return a.creation_date > b.creation_date;
                   });
  for (std::size_t i = 0; i < unaccepted.size() && i < 2; ++i) {
    out.push_back(unaccepted[i]);
  }
  return out;
}

// Sequential StackExchange API client. Every outbound call passes one
// mutex, the rate limiter, and the quota ledger, in that order; a backoff
// reply sets an embargo that the next call sleeps out.
class StackExchangeClient {
 public:
  StackExchangeClient(std::shared_ptr<SeTransport> transport,
                      std::shared_ptr<QuotaLedger> ledger,
                      std::shared_ptr<SlidingWindowLimiter> limiter,
                      SeClientConfig config, Clock* clock = nullptr)
      : transport_(std::move(transport)),
        ledger_(std::move(ledger)),
        limiter_(std::move(limiter)),
        config_(std::move(config)),
        clock_(clock ? clock : &system_clock_instance()) {
    if (!transport_) throw PreconditionError("client needs a transport");
    if (!ledger_) throw PreconditionError("client needs a quota ledger");
    if (!limiter_) throw PreconditionError("client needs a rate limiter");
    if (config_.page_size <= 0 || config_.page_size > 100) {
      throw PreconditionError("page_size must be in 1..100");
    }
    if (config_.answer_batch_size <= 0 || config_.answer_batch_size > 100) {
      throw PreconditionError("answer_batch_size must be in 1..100");
    }
  }

  std::vector<SOQuestion> search_questions(const std::string& keyword) {
    if (trim_copy(keyword).empty()) {
      throw PreconditionError("search keyword must be non-empty");
    }
    SeRequest request;
    request.path = "/2.3/search/advanced";
    request.params = {
        {"q", keyword},
        {"site", config_.site},
        {"filter", config_.filter},
        {"pagesize", std::to_string(config_.page_size)},
    };
    nlohmann::json doc = perform(request);
    std::vector<SOQuestion> out;
    for (const auto& item : doc.value("items", nlohmann::json::array())) {
      SOQuestion q;
      q.id = item.value("question_id", std::int64_t{0});
      q.link = item.value("link", "");
      // Titles arrive entity-encoded and tag-free; decoding here keeps
      // link lists and prompts readable.
      q.title = strip_html(item.value("title", ""));
      q.body = item.value("body", "");
      q.creation_date = item.value("creation_date", std::int64_t{0});
      if (item.contains("accepted_answer_id") &&
          item["accepted_answer_id"].is_number()) {
        q.accepted_answer_id =
            item["accepted_answer_id"].get<std::int64_t>();
      }
      if (q.valid()) out.push_back(std::move(q));
    }
    return out;
  }

  std::map<std::int64_t, std::vector<SOAnswer>> fetch_answers(
      std::vector<std::int64_t> question_ids) {
    if (question_ids.empty()) {
      throw PreconditionError("fetch_answers needs at least one question id");
    }
    for (std::int64_t id : question_ids) {
      if (id <= 0) {
        throw PreconditionError("question ids must be positive");
      }
    }
    // Sorted, deduplicated ids make the batch composition (and therefore
    // the request identity) independent of caller ordering.
    std::sort(question_ids.begin(), question_ids.end());
    question_ids.erase(
        std::unique(question_ids.begin(), question_ids.end()),
        question_ids.end());

    std::map<std::int64_t, std::vector<SOAnswer>> out;
    const std::size_t batch = static_cast<std::size_t>(
        config_.answer_batch_size);
    for (std::size_t start = 0; start < question_ids.size(); start += batch) {
      const std::size_t end = std::min(start + batch, question_ids.size());
      std::string joined;
      for (std::size_t i = start; i < end; ++i) {
        if (!joined.empty()) joined.push_back(';');
        joined += std::to_string(question_ids[i]);
      }
      SeRequest request;
      request.path = "/2.3/questions/" + joined + "/answers";
      request.params = {
          {"site", config_.site},
          {"filter", config_.filter},
          {"sort", "votes"},
      };
      nlohmann::json doc = perform(request);
      for (const auto& item : doc.value("items", nlohmann::json::array())) {
        SOAnswer a;
        a.id = item.value("answer_id", std::int64_t{0});
        a.question_id = item.value("question_id", std::int64_t{0});
        a.body = item.value("body", "");
        a.score = item.value("score", std::int64_t{0});
        a.creation_date = item.value("creation_date", std::int64_t{0});
        a.is_accepted = item.value("is_accepted", false);
        if (a.valid()) out[a.question_id].push_back(std::move(a));
      }
    }
    return out;
  }

  QuotaLedger& ledger() { return *ledger_; }
  SlidingWindowLimiter& limiter() { return *limiter_; }

 private:
  nlohmann::json perform(SeRequest& request) {
    std::lock_guard<std::mutex> lock(flight_mu_);
    const std::int64_t now = clock_->now_ms();
    if (embargo_until_ms_ > now) {
      clock_->sleep_ms(embargo_until_ms_ - now);
    }
    if (!config_.api_key.empty()) {
      request.params["key"] = config_.api_key;
    }
    limiter_->admit();
    ledger_->charge(1);
    SeResponse response = transport_->get(request);
    if (response.status != 200) {
      throw TransportError("stackexchange API returned HTTP " +
                           std::to_string(response.status) + ": " +
                           truncate_to_bytes(response.body, 200));
    }
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(response.body);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("stackexchange reply is not valid JSON: ") +
                       e.what());
    }
    if (doc.contains("backoff") && doc["backoff"].is_number()) {
      const int seconds = doc["backoff"].get<int>();
      if (seconds > 0) {
        embargo_until_ms_ = clock_->now_ms() + std::int64_t{1000} * seconds;
        throw BackoffRequested(seconds);
      }
    }
    return doc;
  }

  std::shared_ptr<SeTransport> transport_;
  std::shared_ptr<QuotaLedger> ledger_;
  std::shared_ptr<SlidingWindowLimiter> limiter_;
  SeClientConfig config_;
  Clock* clock_;
  std::mutex flight_mu_;
  std::int64_t embargo_until_ms_ = 0;
};

}  // namespace stackrag
