#pragma once

#include <chrono>
#include <map>
#include <mutex>
#include <string>

namespace webdep {

// Enforces a minimum spacing between operations sharing a key. One instance
// is shared by every probe worker so the limit holds globally.
class RateLimiter {
 public:
  using Clock = std::chrono::steady_clock;

  explicit RateLimiter(std::chrono::microseconds min_interval) : interval_(min_interval) {}

  // Per-second rate to spacing; rate <= 0 disables limiting.
  static std::chrono::microseconds interval_for_rate(double per_second);

  // Blocks until the key's next slot, then reserves it.
  void acquire(const std::string& key);

  std::chrono::microseconds interval() const noexcept { return interval_; }

 private:
  std::chrono::microseconds interval_;
  std::mutex mu_;
  std::map<std::string, Clock::time_point> next_slot_;
};

}  // namespace webdep
