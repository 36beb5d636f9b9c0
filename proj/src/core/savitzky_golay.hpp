#pragma once

#include <deque>
#include <span>
#include <vector>

#include "core/differentiator.hpp"

namespace numdiff {

struct SgConfig {
  int half_window = 2;      // window holds 2*half_window + 1 samples
  int poly_degree = 3;      // derivative_order <= poly_degree <= 2*half_window
  int derivative_order = 1;

  int window_size() const { return 2 * half_window + 1; }
  void validate() const;  // throws std::invalid_argument
};

// Least-squares polynomial-fit derivative evaluated at the window center.
// The fit uses window-centered abscissae, so the estimate does not depend on
// the absolute step index of the window.
double sg_estimate(std::span<const double> window, double sample_time_s,
                   const SgConfig& config);

// Streaming form: buffers 2l+1 samples and, from input step 2l on, emits the
// estimate of step k - l. Availability delay is therefore l + 1 steps.
class SavitzkyGolay final : public Differentiator {
 public:
  SavitzkyGolay(const SgConfig& config, double sample_time_s);

  StepResult step(double sample) override;
  int delay_steps() const override { return config_.half_window + 1; }
  int derivative_order() const override { return config_.derivative_order; }

  // Fixed convolution weights: estimate = dot(weights, window).
  const std::vector<double>& weights() const { return weights_; }

 private:
  SgConfig config_;
  std::vector<double> weights_;
  std::deque<double> buffer_;
  long long count_ = 0;
};

}  // namespace numdiff
