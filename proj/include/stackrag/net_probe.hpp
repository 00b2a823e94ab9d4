#pragma once

#include <atomic>
#include <cstdint>

namespace stackrag {

// Process-wide count of HTTP requests actually sent to live endpoints.
// Offline paths (scripted gateways, fixture replay) never touch it, which
// lets tests prove that no network traffic happened.
inline std::atomic<std::uint64_t>& live_request_counter() {
  static std::atomic<std::uint64_t> counter{0};
  return counter;
}

inline void note_live_request() {
  live_request_counter().fetch_add(1, std::memory_order_relaxed);
}

inline std::uint64_t live_request_count() {
  return live_request_counter().load(std::memory_order_relaxed);
}

}  // namespace stackrag
