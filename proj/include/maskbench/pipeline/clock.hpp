#pragma once

#include <chrono>

namespace maskbench::pipeline {

// Monotonic time source, injectable so latency arithmetic can be tested with
// exact numbers instead of tolerances.
class Clock {
  public:
    virtual ~Clock() = default;
    virtual double now_ms() = 0;
};

class SteadyClock final : public Clock {
  public:
    double now_ms() override {
        auto t = std::chrono::steady_clock::now().time_since_epoch();
        return std::chrono::duration<double, std::milli>(t).count();
    }
};

// Advances only when told to; backends under test advance it by their
// pretended latency.
class ManualClock final : public Clock {
  public:
    double now_ms() override { return t_; }
    void advance(double ms) { t_ += ms; }

  private:
    double t_ = 0.0;
};

} // namespace maskbench::pipeline
