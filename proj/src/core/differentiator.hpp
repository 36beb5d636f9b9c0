#pragma once

#include <span>
#include <vector>

namespace numdiff {

struct StepResult {
  bool has_estimate = false;
  // Step index the estimate refers to. Window-based methods emit the estimate
  // of an earlier step once the window around it is complete.
  long long estimate_step = -1;
  double estimate = 0.0;
  bool has_residual = false;
  double residual = 0.0;
};

// Streaming derivative estimator: one sample in, at most one estimate out.
// Instances are single-owner state machines; distinct instances are
// independent and may run on separate threads.
class Differentiator {
 public:
  virtual ~Differentiator() = default;
  virtual StepResult step(double sample) = 0;
  // Steps between a sample instant and the availability of its derivative
  // estimate (includes the one-step computation delay).
  virtual int delay_steps() const = 0;
  virtual int derivative_order() const = 0;
};

// Feeds every sample and places each estimate at the step it belongs to.
// Steps for which the differentiator produced nothing stay zero.
std::vector<double> run_aligned(Differentiator& diff, std::span<const double> samples);

}  // namespace numdiff
