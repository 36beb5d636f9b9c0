#include "core/kalman.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "core/errors.hpp"

namespace numdiff {

void ResidualStats::push(double residual) {
  ++count;
  const double delta = residual - mean;
  mean += delta / static_cast<double>(count);
  m2 += delta * (residual - mean);
}

double ResidualStats::mean_value() const {
  if (count < 1) throw std::logic_error("mean of an empty residual history");
  return mean;
}

double ResidualStats::sample_variance() const {
  if (count < 2) throw std::logic_error("variance needs at least two residuals");
  return m2 / static_cast<double>(count - 1);
}

KalmanState KalmanState::zero(int order) {
  KalmanState s;
  s.x_forecast = Eigen::VectorXd::Zero(order);
  s.x_assimilated = Eigen::VectorXd::Zero(order);
  s.cov_forecast = Eigen::MatrixXd::Zero(order, order);
  s.cov_assimilated = Eigen::MatrixXd::Zero(order, order);
  s.gain = Eigen::VectorXd::Zero(order);
  return s;
}

void kf_forecast(KalmanState& state, const StateSpaceModel& model,
                 double input_estimate, const Eigen::MatrixXd& process_cov) {
  if (process_cov.rows() != model.order() || process_cov.cols() != model.order()) {
    throw std::invalid_argument("process_cov has the wrong dimension");
  }
  state.x_forecast = model.a * state.x_assimilated + model.b * input_estimate;
  state.cov_forecast =
      model.a * state.cov_assimilated * model.a.transpose() + process_cov;
}

double kf_residual(KalmanState& state, const StateSpaceModel& model,
                   double measurement) {
  const double residual = (model.c * state.x_forecast)(0) - measurement;
  state.residuals.push(residual);
  return residual;
}

void kf_assimilate(KalmanState& state, const StateSpaceModel& model,
                   double residual, double sensor_var) {
  if (sensor_var < 0.0) {
    throw std::invalid_argument("sensor_var must be nonnegative");
  }
  const Eigen::VectorXd cross = state.cov_forecast * model.c.transpose();
  const double innovation_var = (model.c * cross)(0) + sensor_var;
  if (!(innovation_var > 0.0)) {
    throw NumericalError("zero innovation variance: filter is degenerate");
  }
  state.gain = -cross / innovation_var;
  state.cov_assimilated =
      state.cov_forecast - (cross * cross.transpose()) / innovation_var;
  state.x_assimilated = state.x_forecast + state.gain * residual;
}

void AdaptConfig::validate() const {
  if (!(eta_lower >= 0.0) || !(eta_upper > eta_lower)) {
    throw std::invalid_argument("need 0 <= eta_lower < eta_upper");
  }
  if (grid_points < 1) {
    throw std::invalid_argument("grid_points must be at least 1");
  }
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw std::invalid_argument("alpha must lie in [0, 1]");
  }
  if (scale == GridScale::logarithmic && !(eta_lower > 0.0)) {
    throw std::invalid_argument("logarithmic grid requires eta_lower > 0");
  }
}

double AdaptConfig::eta_at(int index) const {
  const double frac = static_cast<double>(index) / static_cast<double>(grid_points);
  if (scale == GridScale::linear) {
    return eta_lower + frac * (eta_upper - eta_lower);
  }
  return std::exp(std::log(eta_lower) + frac * (std::log(eta_upper) - std::log(eta_lower)));
}

double adaptation_metric(double empirical_var,
                         const Eigen::MatrixXd& cov_forecast_candidate,
                         const StateSpaceModel& model, double sensor_var) {
  const double theoretical =
      (model.c * cov_forecast_candidate * model.c.transpose())(0) + sensor_var;
  return std::abs(empirical_var - theoretical);
}

namespace {

struct ExcessGrid {
  // excess(eta) = empirical_var - C (A P_da A' + eta I) C', affine in eta
  double base = 0.0;   // value at eta = 0
  double slope = 0.0;  // -C C'
  double at(double eta) const { return base + slope * eta; }
};

ExcessGrid make_excess(const KalmanState& state, const StateSpaceModel& model,
                       double empirical_var) {
  ExcessGrid g;
  const Eigen::MatrixXd propagated =
      model.a * state.cov_assimilated * model.a.transpose();
  g.base = empirical_var - (model.c * propagated * model.c.transpose())(0);
  g.slope = -(model.c * model.c.transpose())(0);
  return g;
}

}  // namespace

CovarianceChoice adapt_covariances(const KalmanState& state,
                                   const StateSpaceModel& model,
                                   double empirical_var, const AdaptConfig& config) {
  config.validate();
  const ExcessGrid grid = make_excess(state, model, empirical_var);
  const int n = model.order();

  bool any_positive = false;
  double min_positive = 0.0;
  double max_positive = 0.0;
  for (int i = 0; i <= config.grid_points; ++i) {
    const double excess = grid.at(config.eta_at(i));
    if (excess > 0.0) {
      if (!any_positive) {
        min_positive = max_positive = excess;
        any_positive = true;
      } else {
        min_positive = std::min(min_positive, excess);
        max_positive = std::max(max_positive, excess);
      }
    }
  }

  int best = 0;
  double best_cost = std::numeric_limits<double>::infinity();
  const double target =
      any_positive ? config.alpha * min_positive + (1.0 - config.alpha) * max_positive
                   : 0.0;
  for (int i = 0; i <= config.grid_points; ++i) {
    const double cost = std::abs(grid.at(config.eta_at(i)) - target);
    if (cost < best_cost) {
      best_cost = cost;
      best = i;
    }
  }

  CovarianceChoice choice;
  const double eta = config.eta_at(best);
  choice.process_cov = eta * Eigen::MatrixXd::Identity(n, n);
  choice.sensor_var = any_positive ? grid.at(eta) : 0.0;
  return choice;
}

Eigen::MatrixXd adapt_process_cov_for_sensor_var(const KalmanState& state,
                                                 const StateSpaceModel& model,
                                                 double empirical_var,
                                                 double sensor_var,
                                                 const AdaptConfig& config) {
  config.validate();
  const ExcessGrid grid = make_excess(state, model, empirical_var);
  int best = 0;
  double best_cost = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= config.grid_points; ++i) {
    const double cost = std::abs(grid.at(config.eta_at(i)) - sensor_var);
    if (cost < best_cost) {
      best_cost = cost;
      best = i;
    }
  }
  return config.eta_at(best) * Eigen::MatrixXd::Identity(model.order(), model.order());
}

}  // namespace numdiff
