#include "core/aie.hpp"

#include <algorithm>
#include <stdexcept>

#include "core/errors.hpp"

namespace numdiff {

void AieVariant::validate(int model_order) const {
  switch (adaptation) {
    case CovarianceAdaptation::none:
      if (!fixed_process_cov || !fixed_sensor_var) {
        throw std::invalid_argument(
            "non-adaptive variant needs fixed_process_cov and fixed_sensor_var");
      }
      break;
    case CovarianceAdaptation::process_only:
      if (!adapt || !fixed_sensor_var) {
        throw std::invalid_argument(
            "process_only variant needs adapt and fixed_sensor_var");
      }
      break;
    case CovarianceAdaptation::full:
      if (!adapt) {
        throw std::invalid_argument("full variant needs adapt");
      }
      break;
  }
  if (adapt) adapt->validate();
  if (fixed_process_cov) {
    if (fixed_process_cov->rows() != model_order ||
        fixed_process_cov->cols() != model_order) {
      throw std::invalid_argument("fixed_process_cov has the wrong dimension");
    }
  }
  if (fixed_sensor_var && !(*fixed_sensor_var >= 0.0)) {
    throw std::invalid_argument("fixed_sensor_var must be nonnegative");
  }
}

AdaptiveInputEstimator::AdaptiveInputEstimator(int derivative_order,
                                               double sample_time_s,
                                               RcieConfig rcie_config,
                                               AieVariant variant)
    : model_(integrator_model(derivative_order, sample_time_s)),
      rcie_config_(std::move(rcie_config)),
      variant_(std::move(variant)),
      rcie_(rcie_config_, model_.order()),
      kalman_(KalmanState::zero(model_.order())),
      warmup_(std::max(rcie_config_.subsystem_order, rcie_config_.filter_length)) {
  variant_.validate(model_.order());
}

std::pair<Eigen::MatrixXd, double> AdaptiveInputEstimator::choose_covariances() const {
  const int n = model_.order();
  const Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(n, n);
  switch (variant_.adaptation) {
    case CovarianceAdaptation::none:
      return {*variant_.fixed_process_cov, *variant_.fixed_sensor_var};
    case CovarianceAdaptation::process_only: {
      const double sensor_var = *variant_.fixed_sensor_var;
      if (step_ == 0) {
        return {variant_.fixed_process_cov.value_or(zero), sensor_var};
      }
      if (variant_.fixed_process_cov) {
        return {*variant_.fixed_process_cov, sensor_var};
      }
      const double empirical = kalman_.residuals.sample_variance();
      return {adapt_process_cov_for_sensor_var(kalman_, model_, empirical, sensor_var,
                                               *variant_.adapt),
              sensor_var};
    }
    case CovarianceAdaptation::full: {
      if (step_ == 0) {
        return {variant_.fixed_process_cov.value_or(zero),
                variant_.fixed_sensor_var.value_or(0.0)};
      }
      if (variant_.fixed_process_cov && variant_.fixed_sensor_var) {
        return {*variant_.fixed_process_cov, *variant_.fixed_sensor_var};
      }
      const double empirical = kalman_.residuals.sample_variance();
      if (variant_.fixed_sensor_var) {
        return {adapt_process_cov_for_sensor_var(kalman_, model_, empirical,
                                                 *variant_.fixed_sensor_var,
                                                 *variant_.adapt),
                *variant_.fixed_sensor_var};
      }
      CovarianceChoice choice =
          adapt_covariances(kalman_, model_, empirical, *variant_.adapt);
      if (variant_.fixed_process_cov) choice.process_cov = *variant_.fixed_process_cov;
      return {choice.process_cov, choice.sensor_var};
    }
  }
  throw std::logic_error("unreachable");
}

EstimatorOutput AdaptiveInputEstimator::step(double measurement) {
  const int n = model_.order();

  // Residual against the current forecast; statistics include this step.
  const double residual = kf_residual(kalman_, model_, measurement);

  // Input estimation. Before the histories span the subsystem and filter
  // windows the estimate stays at its initial zero.
  double input_estimate = 0.0;
  Eigen::RowVectorXd regressor = Eigen::RowVectorXd::Zero(rcie_config_.coeff_count());
  if (step_ >= warmup_ - 1) {
    regressor = rcie_.build_regressor(residual);
    input_estimate = rcie_.estimate_input(regressor);
    const Eigen::VectorXd markov =
        markov_parameters(rcie_.closed_loop(), model_.b, model_.c,
                          rcie_config_.filter_length);
    const RcieState::Filtered filtered = rcie_.filter_signals(markov);
    rcie_.rls_update(regressor, filtered.regressor, filtered.input, residual);
  }

  // Covariance selection, then assimilation with the chosen sensor variance.
  const auto [process_cov, sensor_var] = choose_covariances();
  const double innovation_var =
      (model_.c * kalman_.cov_forecast * model_.c.transpose())(0) + sensor_var;
  if (innovation_var > 0.0) {
    kf_assimilate(kalman_, model_, residual, sensor_var);
  } else {
    // No information either way; the gain keeps its initial zero.
    kalman_.gain.setZero();
    kalman_.cov_assimilated = kalman_.cov_forecast;
    kalman_.x_assimilated = kalman_.x_forecast;
  }

  rcie_.push_closed_loop(model_.a *
                         (Eigen::MatrixXd::Identity(n, n) + kalman_.gain * model_.c));

  kf_forecast(kalman_, model_, input_estimate, process_cov);
  rcie_.push_step(regressor, input_estimate, residual);
  ++step_;

  EstimatorOutput out;
  out.input_estimate = input_estimate;
  out.state = kalman_.x_assimilated;
  out.residual = residual;
  out.process_cov_used = process_cov;
  out.sensor_var_used = sensor_var;
  out.delay_steps = 1;
  return out;
}

std::vector<EstimatorOutput> AdaptiveInputEstimator::run(const SampledSignal& signal) {
  if (signal.empty()) {
    throw std::invalid_argument("cannot run on an empty signal");
  }
  std::vector<EstimatorOutput> outputs;
  outputs.reserve(signal.size());
  for (double y : signal.values) {
    outputs.push_back(step(y));
  }
  return outputs;
}

}  // namespace numdiff
