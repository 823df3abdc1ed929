#pragma once

#include <chrono>
#include <cstddef>
#include <limits>

namespace lazytamp {

/// Units of solver work. A deterministic clock charges virtual time per
/// unit so that timeouts, and everything downstream of them, are exactly
/// reproducible.
enum class Work { kExpansion, kChild, kStreamEval, kPolicyQuery };

class Clock {
 public:
  virtual ~Clock() = default;
  /// Seconds since construction.
  virtual double elapsed() const = 0;
  virtual void charge(Work, std::size_t = 1) {}
};

class WallClock : public Clock {
 public:
  WallClock() : start_(std::chrono::steady_clock::now()) {}
  double elapsed() const override {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

/// Virtual seconds charged per unit of work.
struct WorkCosts {
  double expansion = 2e-3;
  double child = 1e-3;
  double stream_eval = 1e-4;
  double policy_query = 5e-3;
};

class WorkClock : public Clock {
 public:
  explicit WorkClock(WorkCosts costs = {}) : costs_(costs) {}
  double elapsed() const override { return now_; }
  void charge(Work kind, std::size_t n = 1) override {
    double unit = 0.0;
    switch (kind) {
      case Work::kExpansion: unit = costs_.expansion; break;
      case Work::kChild: unit = costs_.child; break;
      case Work::kStreamEval: unit = costs_.stream_eval; break;
      case Work::kPolicyQuery: unit = costs_.policy_query; break;
    }
    now_ += unit * static_cast<double>(n);
  }

 private:
  WorkCosts costs_;
  double now_ = 0.0;
};

/// A clock plus a limit; `limit` of +inf never expires.
struct Deadline {
  Clock* clock = nullptr;
  double limit = std::numeric_limits<double>::infinity();

  bool expired() const { return clock && clock->elapsed() >= limit; }
  void charge(Work kind, std::size_t n = 1) const {
    if (clock) clock->charge(kind, n);
  }
};

}  // namespace lazytamp
