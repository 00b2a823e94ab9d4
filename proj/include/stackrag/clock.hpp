#pragma once

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <string>
#include <thread>

namespace stackrag {

// Time source used by rate limiting, quota accounting and backoff waits.
// Injecting it keeps those behaviors testable without real sleeping.
class Clock {
 public:
  virtual ~Clock() = default;

  // Milliseconds on a monotonically non-decreasing timeline.
  virtual std::int64_t now_ms() = 0;

  virtual void sleep_ms(std::int64_t ms) = 0;

  // Calendar day in UTC, "YYYY-MM-DD". Drives daily quota resets.
  virtual std::string utc_date() = 0;
};

class SystemClock final : public Clock {
 public:
  std::int64_t now_ms() override {
    using namespace std::chrono;
    return duration_cast<milliseconds>(steady_clock::now().time_since_epoch())
        .count();
  }

  void sleep_ms(std::int64_t ms) override {
    if (ms > 0) std::this_thread::sleep_for(std::chrono::milliseconds(ms));
  }

  std::string utc_date() override {
    std::time_t t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", tm.tm_year + 1900,
                  tm.tm_mon + 1, tm.tm_mday);
    return buf;
  }
};

// Fully controlled clock for tests and simulations. sleep_ms advances the
// timeline instead of blocking; the date is derived from the timeline unless
// pinned with set_date.
class ManualClock final : public Clock {
 public:
  explicit ManualClock(std::int64_t start_ms = 0) : now_(start_ms) {}

  std::int64_t now_ms() override { return now_; }

  void sleep_ms(std::int64_t ms) override {
    if (ms > 0) now_ += ms;
  }

  void advance_ms(std::int64_t ms) { now_ += ms; }

  void set_date(std::string date) { pinned_date_ = std::move(date); }

  std::string utc_date() override {
    if (!pinned_date_.empty()) return pinned_date_;
    // Day 0 of the simulated timeline is 1970-01-01.
    std::time_t t = static_cast<std::time_t>(now_ / 1000);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", tm.tm_year + 1900,
                  tm.tm_mon + 1, tm.tm_mday);
    return buf;
  }

 private:
  std::int64_t now_;
  std::string pinned_date_;
};

inline Clock& system_clock_instance() {
  static SystemClock instance;
  return instance;
}

}  // namespace stackrag
