#pragma once

#include <Eigen/Dense>

#include "core/state_space.hpp"

namespace numdiff {

// Running mean and variance of the innovation sequence. The mean uses
// 1/(count) and the variance 1/(count - 1) normalization.
struct ResidualStats {
  long long count = 0;
  double mean = 0.0;
  double m2 = 0.0;  // sum of squared deviations from the running mean

  void push(double residual);
  double mean_value() const;
  double sample_variance() const;  // requires count >= 2
};

struct KalmanState {
  Eigen::VectorXd x_forecast;
  Eigen::VectorXd x_assimilated;
  Eigen::MatrixXd cov_forecast;
  Eigen::MatrixXd cov_assimilated;
  Eigen::VectorXd gain;
  ResidualStats residuals;

  static KalmanState zero(int order);
};

// x_fc <- A x_da + B input, P_f <- A P_da A' + process_cov.
void kf_forecast(KalmanState& state, const StateSpaceModel& model,
                 double input_estimate, const Eigen::MatrixXd& process_cov);

// Returns z = C x_fc - measurement and folds it into the running statistics.
double kf_residual(KalmanState& state, const StateSpaceModel& model,
                   double measurement);

// Gain, assimilated covariance and state. Throws NumericalError when the
// innovation variance C P_f C' + sensor_var is zero.
void kf_assimilate(KalmanState& state, const StateSpaceModel& model,
                   double residual, double sensor_var);

enum class GridScale { linear, logarithmic };

// Search grid for the process-noise magnitude eta. grid_points = w yields
// w + 1 candidates from eta_lower to eta_upper.
struct AdaptConfig {
  double eta_lower = 1e-6;
  double eta_upper = 1e2;
  int grid_points = 100;
  GridScale scale = GridScale::logarithmic;
  double alpha = 0.5;  // blend between min and max of the positive metric set

  void validate() const;
  double eta_at(int index) const;
};

// | empirical variance - (C P_f_candidate C' + sensor_var) |
double adaptation_metric(double empirical_var,
                         const Eigen::MatrixXd& cov_forecast_candidate,
                         const StateSpaceModel& model, double sensor_var);

struct CovarianceChoice {
  Eigen::MatrixXd process_cov;
  double sensor_var = 0.0;
};

// Joint choice of (process_cov, sensor_var): enumerate eta over the grid,
// evaluate the excess of the empirical residual variance over the candidate
// forecast variance, and either match its positive range (sensor_var takes
// the matched excess) or, when no candidate leaves a positive excess, pick
// the eta of smallest magnitude excess with sensor_var = 0. Grid ties go to
// the smallest eta.
CovarianceChoice adapt_covariances(const KalmanState& state,
                                   const StateSpaceModel& model,
                                   double empirical_var, const AdaptConfig& config);

// Process-noise-only choice for a known sensor variance: eta minimizing
// | excess(eta) - sensor_var | over the grid.
Eigen::MatrixXd adapt_process_cov_for_sensor_var(const KalmanState& state,
                                                 const StateSpaceModel& model,
                                                 double empirical_var,
                                                 double sensor_var,
                                                 const AdaptConfig& config);

}  // namespace numdiff
