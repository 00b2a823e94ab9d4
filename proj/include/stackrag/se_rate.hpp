#pragma once

#include <cstdint>
#include <deque>
#include <filesystem>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "stackrag/clock.hpp"
#include "stackrag/errors.hpp"
#include "stackrag/fs_util.hpp"

namespace stackrag {

// Sliding-log limiter: admit() blocks until fewer than max_per_window
// admissions fall inside the trailing window, then records the new one.
// With the defaults no 1000ms interval ever contains more than 25 calls.
class SlidingWindowLimiter {
 public:
  SlidingWindowLimiter(int max_per_window, std::int64_t window_ms,
                       Clock* clock)
      : max_per_window_(max_per_window),
        window_ms_(window_ms),
        clock_(clock) {
    if (max_per_window_ <= 0) {
      throw PreconditionError("limiter capacity must be positive");
    }
    if (window_ms_ <= 0) {
      throw PreconditionError("limiter window must be positive");
    }
    if (clock_ == nullptr) {
      throw PreconditionError("limiter needs a clock");
    }
  }

  void admit() {
    std::lock_guard<std::mutex> lock(mu_);
    for (;;) {
      const std::int64_t now = clock_->now_ms();
      while (!window_.empty() && window_.front() <= now - window_ms_) {
        window_.pop_front();
      }
      if (static_cast<int>(window_.size()) < max_per_window_) {
        window_.push_back(now);
        history_.push_back(now);
        return;
      }
      clock_->sleep_ms(window_.front() + window_ms_ - now);
    }
  }

  // Every admission timestamp since construction, for auditing.
  std::vector<std::int64_t> admit_times() const {
    std::lock_guard<std::mutex> lock(mu_);
    return history_;
  }

  int max_per_window() const { return max_per_window_; }
  std::int64_t window_ms() const { return window_ms_; }

 private:
  int max_per_window_;
  std::int64_t window_ms_;
  Clock* clock_;
  mutable std::mutex mu_;
  std::deque<std::int64_t> window_;
  std::vector<std::int64_t> history_;
};

// Persistent daily call budget. State survives restarts in a tiny JSON
// file; the used count resets when the UTC date changes.
class QuotaLedger {
 public:
  QuotaLedger(std::filesystem::path state_file, int daily_quota, Clock* clock)
      : state_file_(std::move(state_file)),
        daily_quota_(daily_quota),
        clock_(clock) {
    if (daily_quota_ <= 0) {
      throw PreconditionError("daily quota must be positive");
    }
    if (clock_ == nullptr) {
      throw PreconditionError("quota ledger needs a clock");
    }
    load();
  }

  void charge(int calls = 1) {
    if (calls <= 0) throw PreconditionError("charge must be positive");
    std::lock_guard<std::mutex> lock(mu_);
    roll_day();
    if (used_ + calls > daily_quota_) {
      throw QuotaExhausted("daily quota of " + std::to_string(daily_quota_) +
                           " stackexchange calls is exhausted (used " +
                           std::to_string(used_) + ")");
    }
    used_ += calls;
    persist();
  }

  int used_today() {
    std::lock_guard<std::mutex> lock(mu_);
    roll_day();
    return used_;
  }

  int remaining() {
    std::lock_guard<std::mutex> lock(mu_);
    roll_day();
    return daily_quota_ - used_;
  }

  int daily_quota() const { return daily_quota_; }

  std::string day() {
    std::lock_guard<std::mutex> lock(mu_);
    roll_day();
    return date_;
  }

 private:
  void load() {
    auto content = read_file_if_exists(state_file_);
    if (!content) {
      date_ = clock_->utc_date();
      used_ = 0;
      return;
    }
    try {
      nlohmann::json doc = nlohmann::json::parse(*content);
      date_ = doc.at("date").get<std::string>();
      used_ = doc.at("used").get<int>();
    } catch (const nlohmann::json::exception& e) {
      throw StorageError("malformed quota state " + state_file_.string() +
                         ": " + e.what());
    }
    if (used_ < 0 || used_ > daily_quota_) {
      throw StorageError("quota state " + state_file_.string() +
                         " holds an out-of-range used count");
    }
    roll_day();
  }

  void roll_day() {
    const std::string today = clock_->utc_date();
    if (today != date_) {
      date_ = today;
      used_ = 0;
      persist();
    }
  }

  void persist() {
    nlohmann::json doc = {{"date", date_}, {"used", used_}};
    atomic_write_file(state_file_, doc.dump() + "\n");
  }

  std::filesystem::path state_file_;
  int daily_quota_;
  Clock* clock_;
  std::mutex mu_;
  std::string date_;
  int used_ = 0;
};

}  // namespace stackrag
