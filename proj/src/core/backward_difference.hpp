#pragma once

#include <stdexcept>

#include "core/differentiator.hpp"

namespace numdiff {

inline double bd_first(double prev_y, double curr_y, double sample_time_s) {
  return (curr_y - prev_y) / sample_time_s;
}

inline double bd_second(double y_km2, double y_km1, double y_k, double sample_time_s) {
  return (y_k - 2.0 * y_km1 + y_km2) / (sample_time_s * sample_time_s);
}

// First- or second-order backward difference as a streaming operator.
// Emits once enough samples arrived (2 for order 1, 3 for order 2).
class BackwardDifference final : public Differentiator {
 public:
  BackwardDifference(int derivative_order, double sample_time_s)
      : order_(derivative_order), sample_time_(sample_time_s) {
    if (order_ != 1 && order_ != 2) {
      throw std::invalid_argument("backward difference supports derivative orders 1 and 2");
    }
    if (!(sample_time_ > 0.0)) {
      throw std::invalid_argument("sample_time_s must be positive");
    }
  }

  StepResult step(double sample) override {
    StepResult out;
    ++count_;
    if (order_ == 1 && count_ >= 2) {
      out = {true, count_ - 1, bd_first(prev1_, sample, sample_time_), false, 0.0};
    } else if (order_ == 2 && count_ >= 3) {
      out = {true, count_ - 1, bd_second(prev2_, prev1_, sample, sample_time_), false, 0.0};
    }
    prev2_ = prev1_;
    prev1_ = sample;
    return out;
  }

  int delay_steps() const override { return 1; }
  int derivative_order() const override { return order_; }

 private:
  int order_;
  double sample_time_;
  long long count_ = 0;
  double prev1_ = 0.0;
  double prev2_ = 0.0;
};

}  // namespace numdiff
