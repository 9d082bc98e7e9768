#include "webdep/rate_limiter.hpp"

#include <thread>

namespace webdep {

std::chrono::microseconds RateLimiter::interval_for_rate(double per_second) {
  if (per_second <= 0.0) return std::chrono::microseconds{0};
  return std::chrono::microseconds{static_cast<long long>(1e6 / per_second)};
}

void RateLimiter::acquire(const std::string& key) {
  if (interval_.count() <= 0) return;
  Clock::time_point slot;
  {
    std::lock_guard lock(mu_);
    const auto now = Clock::now();
    auto& next = next_slot_[key];
    slot = next > now ? next : now;
    next = slot + interval_;
  }
  std::this_thread::sleep_until(slot);
}

}  // namespace webdep
