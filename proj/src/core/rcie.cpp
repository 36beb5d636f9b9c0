#include "core/rcie.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "core/errors.hpp"

namespace numdiff {

void RcieConfig::validate() const {
  if (subsystem_order < 1) {
    throw std::invalid_argument("subsystem_order must be at least 1");
  }
  if (filter_length < 1) {
    throw std::invalid_argument("filter_length must be at least 1");
  }
  if (!(weight_residual > 0.0)) {
    throw std::invalid_argument("weight_residual must be positive");
  }
  if (!(weight_input > 0.0)) {
    throw std::invalid_argument("weight_input must be positive");
  }
  const int l = coeff_count();
  if (weight_coeff.rows() != l || weight_coeff.cols() != l) {
    throw std::invalid_argument("weight_coeff must be coeff_count x coeff_count");
  }
  if (!weight_coeff.isApprox(weight_coeff.transpose())) {
    throw std::invalid_argument("weight_coeff must be symmetric");
  }
  if (Eigen::LLT<Eigen::MatrixXd>(weight_coeff).info() != Eigen::Success) {
    throw std::invalid_argument("weight_coeff must be positive definite");
  }
  if (coeff_init.size() != 0 && coeff_init.size() != l) {
    throw std::invalid_argument("coeff_init must be empty or of length coeff_count");
  }
}

RcieConfig RcieConfig::with_scalar_weights(int subsystem_order, int filter_length,
                                           double weight_residual, double weight_input,
                                           double weight_coeff_scale) {
  RcieConfig cfg;
  cfg.subsystem_order = subsystem_order;
  cfg.filter_length = filter_length;
  cfg.weight_residual = weight_residual;
  cfg.weight_input = weight_input;
  cfg.weight_coeff =
      weight_coeff_scale * Eigen::MatrixXd::Identity(cfg.coeff_count(), cfg.coeff_count());
  return cfg;
}

Eigen::VectorXd markov_parameters(const ClosedLoopHistory& closed_loop,
                                  const Eigen::VectorXd& b,
                                  const Eigen::RowVectorXd& c, int filter_length) {
  if (filter_length < 1) {
    throw std::invalid_argument("filter_length must be at least 1");
  }
  if (c.cols() != b.rows()) {
    throw std::invalid_argument("dimension mismatch between b and c");
  }
  if (static_cast<int>(closed_loop.capacity()) < filter_length - 1) {
    throw std::invalid_argument("closed-loop history shorter than filter_length - 1");
  }
  const long long step = closed_loop.pushes();
  Eigen::VectorXd h = Eigen::VectorXd::Zero(filter_length);
  if (step >= 1) {
    h(0) = (c * b)(0);
  }
  Eigen::RowVectorXd chain = c;
  for (int i = 2; i <= filter_length; ++i) {
    if (i > step) break;  // remaining parameters stay zero
    const Eigen::MatrixXd& a_closed = closed_loop.at_lag(i - 1);
    if (a_closed.rows() != chain.cols() || a_closed.cols() != b.rows()) {
      throw std::invalid_argument("dimension mismatch in closed-loop history");
    }
    chain *= a_closed;
    h(i - 1) = (chain * b)(0);
  }
  return h;
}

RcieState::RcieState(const RcieConfig& config, int model_order)
    : config_(config),
      coeffs_(Eigen::VectorXd::Zero(config.coeff_count())),
      input_history_(
          static_cast<std::size_t>(std::max(config.subsystem_order, config.filter_length)),
          0.0),
      residual_history_(static_cast<std::size_t>(config.subsystem_order), 0.0),
      regressor_history_(static_cast<std::size_t>(config.filter_length),
                         Eigen::RowVectorXd::Zero(config.coeff_count())),
      closed_loop_(static_cast<std::size_t>(config.filter_length - 1),
                   Eigen::MatrixXd::Zero(model_order, model_order)) {
  config_.validate();
  if (config_.coeff_init.size() == config_.coeff_count()) {
    coeffs_ = config_.coeff_init;
  }
  coeff_cov_ = Eigen::LLT<Eigen::MatrixXd>(config_.weight_coeff)
                   .solve(Eigen::MatrixXd::Identity(config_.coeff_count(),
                                                    config_.coeff_count()));
}

Eigen::RowVectorXd RcieState::build_regressor(double residual) const {
  const int ne = config_.subsystem_order;
  Eigen::RowVectorXd phi(config_.coeff_count());
  for (int i = 1; i <= ne; ++i) phi(i - 1) = input_history_.at_lag(i);
  phi(ne) = residual;
  for (int i = 1; i <= ne; ++i) phi(ne + i) = residual_history_.at_lag(i);
  return phi;
}

double RcieState::estimate_input(const Eigen::RowVectorXd& regressor) const {
  return (regressor * coeffs_)(0);
}

RcieState::Filtered RcieState::filter_signals(const Eigen::VectorXd& markov) const {
  Filtered out;
  out.regressor = Eigen::RowVectorXd::Zero(config_.coeff_count());
  for (int i = 1; i <= config_.filter_length; ++i) {
    out.regressor += markov(i - 1) * regressor_history_.at_lag(i);
    out.input += markov(i - 1) * input_history_.at_lag(i);
  }
  return out;
}

void RcieState::rls_update(const Eigen::RowVectorXd& regressor,
                           const Eigen::RowVectorXd& filtered_regressor,
                           double filtered_input, double residual) {
  Eigen::Matrix<double, 2, Eigen::Dynamic> stacked(2, config_.coeff_count());
  stacked.row(0) = filtered_regressor;
  stacked.row(1) = regressor;

  const Eigen::MatrixXd cov_stacked = coeff_cov_ * stacked.transpose();  // l x 2
  Eigen::Matrix2d gram = stacked * cov_stacked;
  gram = 0.5 * (gram + gram.transpose());
  gram(0, 0) += 1.0 / config_.weight_residual;
  gram(1, 1) += 1.0 / config_.weight_input;

  if (!gram.allFinite()) {
    throw NumericalError("RLS gain matrix is not finite");
  }
  Eigen::LLT<Eigen::Matrix2d> llt(gram);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("RLS gain matrix is not invertible");
  }
  const Eigen::Vector2d error(residual - filtered_input, 0.0);
  // gain = P Phi' Gamma with Gamma = gram^{-1}
  const Eigen::MatrixXd gain = llt.solve(cov_stacked.transpose()).transpose();  // l x 2
  coeffs_ -= gain * (error + stacked * coeffs_);
  coeff_cov_ -= gain * cov_stacked.transpose();
  coeff_cov_ = 0.5 * (coeff_cov_ + coeff_cov_.transpose());
}

void RcieState::push_step(const Eigen::RowVectorXd& regressor, double input_estimate,
                          double residual) {
  regressor_history_.push(regressor);
  input_history_.push(input_estimate);
  residual_history_.push(residual);
}

void RcieState::push_closed_loop(const Eigen::MatrixXd& a_closed) {
  closed_loop_.push(a_closed);
}

}  // namespace numdiff
