#pragma once

#include <algorithm>
#include <chrono>
#include <mutex>
#include <thread>

#include "spikecast/error.hpp"

namespace spikecast {

// Token bucket shared by every request of one connector. Thread safe.
class RateLimiter {
public:
    using Clock = std::chrono::steady_clock;

    explicit RateLimiter(double requests_per_minute, double burst = 1.0)
        : rate_per_sec_(requests_per_minute / 60.0), capacity_(std::max(1.0, burst)), tokens_(capacity_),
          last_(Clock::now()) {
        if (!(requests_per_minute > 0)) throw ConfigError("requests_per_minute must be > 0");
    }

    // Takes a token if one is available at `now`; otherwise returns how long
    // to wait before one will be.
    Clock::duration try_acquire(Clock::time_point now) {
        std::lock_guard lock(mu_);
        refill(now);
        if (tokens_ >= 1.0) {
            tokens_ -= 1.0;
            return Clock::duration::zero();
        }
        const double wait_s = (1.0 - tokens_) / rate_per_sec_;
        return std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(wait_s));
    }

    void acquire() {
        for (;;) {
            auto wait = try_acquire(Clock::now());
            if (wait == Clock::duration::zero()) return;
            std::this_thread::sleep_for(wait);
        }
    }

private:
    void refill(Clock::time_point now) {
        if (now <= last_) return;
        const double elapsed = std::chrono::duration<double>(now - last_).count();
        tokens_ = std::min(capacity_, tokens_ + elapsed * rate_per_sec_);
        last_ = now;
    }

    double rate_per_sec_;
    double capacity_;
    double tokens_;
    Clock::time_point last_;
    std::mutex mu_;
};

// Exponential backoff: base, 2*base, 4*base, ... capped.
struct BackoffPolicy {
    int max_retries = 3;
    std::chrono::milliseconds base_delay{200};
    std::chrono::milliseconds max_delay{5000};

    std::chrono::milliseconds delay(int attempt) const {
        auto d = base_delay * (1LL << std::min(attempt, 20));
        return std::min<std::chrono::milliseconds>(d, max_delay);
    }
};

}  // namespace spikecast
