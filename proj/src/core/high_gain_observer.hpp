#pragma once

#include <Eigen/Dense>
#include <vector>

#include "core/differentiator.hpp"

namespace numdiff {

struct HgoConfig {
  int order = 2;                // r >= 2; estimates derivatives 1 .. r-1
  std::vector<double> alphas;   // gains of s^r + a1 s^{r-1} + ... + ar
  double epsilon = 0.2;
  double sample_time_s = 0.01;

  // Throws std::invalid_argument unless the gain polynomial is Hurwitz.
  void validate() const;
};

// Discrete-time observer realization (bilinear transform of the
// continuous-time design).
struct HgoMatrices {
  Eigen::MatrixXd a_discrete;      // r x r
  Eigen::VectorXd b_discrete;      // r x 1
  Eigen::MatrixXd output_select;   // (r-1) x r, drops the first state
};

HgoMatrices build_hgo_matrices(const HgoConfig& config);

class HighGainObserver final : public Differentiator {
 public:
  // derivative_order must satisfy 1 <= derivative_order <= order - 1.
  HighGainObserver(const HgoConfig& config, int derivative_order);

  // Estimates of derivatives 1..r-1 at the current step, before the state
  // assimilates the current sample.
  Eigen::VectorXd step_all(double sample);

  StepResult step(double sample) override;
  int delay_steps() const override { return 1; }
  int derivative_order() const override { return derivative_order_; }

  const HgoMatrices& matrices() const { return matrices_; }
  const Eigen::VectorXd& state() const { return state_; }

 private:
  HgoConfig config_;
  int derivative_order_;
  HgoMatrices matrices_;
  Eigen::VectorXd state_;
  long long count_ = 0;
};

}  // namespace numdiff
