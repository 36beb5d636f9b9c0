#pragma once

#include <Eigen/Dense>

#include "core/lag_buffer.hpp"
#include "core/state_space.hpp"

namespace numdiff {

// Retrospective-cost input estimation: an exactly proper FIR/IIR subsystem
// whose coefficients are identified online by regularized RLS against
// refiltered past regressors.
struct RcieConfig {
  int subsystem_order = 12;  // number of past inputs / residuals in the regressor
  int filter_length = 25;    // Markov-parameter window of the refilter
  double weight_residual = 1.0;
  double weight_input = 1e-5;
  Eigen::MatrixXd weight_coeff;  // positive definite, coeff_count x coeff_count
  Eigen::VectorXd coeff_init;    // empty means zero

  int coeff_count() const { return 2 * subsystem_order + 1; }
  void validate() const;

  static RcieConfig with_scalar_weights(int subsystem_order, int filter_length,
                                        double weight_residual, double weight_input,
                                        double weight_coeff_scale);
};

using ClosedLoopHistory = LagBuffer<Eigen::MatrixXd>;

// Markov parameters of the time-varying closed-loop map: h(0) = C B and
// h(i-1) = C Abar_{k-1} ... Abar_{k-(i-1)} B, with h(i-1) = 0 for i > k,
// where k is the number of matrices pushed so far.
Eigen::VectorXd markov_parameters(const ClosedLoopHistory& closed_loop,
                                  const Eigen::VectorXd& b,
                                  const Eigen::RowVectorXd& c, int filter_length);

class RcieState {
 public:
  RcieState(const RcieConfig& config, int model_order);

  // [ d_{k-1} .. d_{k-ne}, z_k, z_{k-1} .. z_{k-ne} ]
  Eigen::RowVectorXd build_regressor(double residual) const;

  // Inner product of the regressor with the current coefficients.
  double estimate_input(const Eigen::RowVectorXd& regressor) const;

  struct Filtered {
    Eigen::RowVectorXd regressor;
    double input = 0.0;
  };
  // Convolution of the retained regressor/input history with the Markov
  // parameters.
  Filtered filter_signals(const Eigen::VectorXd& markov) const;

  // Regularized RLS step on the stacked (filtered, raw) regressor pair.
  // The coefficient covariance stays symmetric positive definite.
  void rls_update(const Eigen::RowVectorXd& regressor,
                  const Eigen::RowVectorXd& filtered_regressor,
                  double filtered_input, double residual);

  // Advance the per-step histories once all reads for the step are done.
  void push_step(const Eigen::RowVectorXd& regressor, double input_estimate,
                 double residual);
  void push_closed_loop(const Eigen::MatrixXd& a_closed);

  const Eigen::VectorXd& coeffs() const { return coeffs_; }
  const Eigen::MatrixXd& coeff_cov() const { return coeff_cov_; }
  const ClosedLoopHistory& closed_loop() const { return closed_loop_; }
  const RcieConfig& config() const { return config_; }

 private:
  RcieConfig config_;
  Eigen::VectorXd coeffs_;
  Eigen::MatrixXd coeff_cov_;
  LagBuffer<double> input_history_;
  LagBuffer<double> residual_history_;
  LagBuffer<Eigen::RowVectorXd> regressor_history_;
  ClosedLoopHistory closed_loop_;
};

}  // namespace numdiff
