#include "core/high_gain_observer.hpp"

#include <stdexcept>

#include "core/errors.hpp"

namespace numdiff {

void HgoConfig::validate() const {
  if (order < 2) {
    throw std::invalid_argument("observer order must be at least 2");
  }
  if (alphas.size() != static_cast<std::size_t>(order)) {
    throw std::invalid_argument("expected one alpha per observer order");
  }
  if (!(epsilon > 0.0)) {
    throw std::invalid_argument("epsilon must be positive");
  }
  if (!(sample_time_s > 0.0)) {
    throw std::invalid_argument("sample_time_s must be positive");
  }
  // Companion-matrix eigenvalues of s^r + a1 s^{r-1} + ... + ar.
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(order, order);
  for (int i = 0; i + 1 < order; ++i) companion(i, i + 1) = 1.0;
  for (int j = 0; j < order; ++j) companion(order - 1, j) = -alphas[order - 1 - j];
  Eigen::EigenSolver<Eigen::MatrixXd> eig(companion);
  for (int i = 0; i < order; ++i) {
    if (!(eig.eigenvalues()(i).real() < 0.0)) {
      throw std::invalid_argument("gain polynomial is not Hurwitz");
    }
  }
}

HgoMatrices build_hgo_matrices(const HgoConfig& config) {
  config.validate();
  const int r = config.order;
  Eigen::VectorXd gain(r);
  double scale = config.epsilon;
  for (int i = 0; i < r; ++i) {
    gain(i) = config.alphas[i] / scale;
    scale *= config.epsilon;
  }
  Eigen::MatrixXd a_cont = Eigen::MatrixXd::Zero(r, r);
  for (int i = 0; i + 1 < r; ++i) a_cont(i, i + 1) = 1.0;
  a_cont.col(0) -= gain;

  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(r, r);
  const Eigen::MatrixXd lhs = eye - 0.5 * config.sample_time_s * a_cont;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(lhs);
  if (!lu.isInvertible()) {
    throw NumericalError("bilinear transform is singular for this sample time");
  }
  HgoMatrices m;
  m.a_discrete = lu.solve(eye + 0.5 * config.sample_time_s * a_cont);
  m.b_discrete = lu.solve(gain * config.sample_time_s);
  m.output_select = Eigen::MatrixXd::Zero(r - 1, r);
  m.output_select.rightCols(r - 1) = Eigen::MatrixXd::Identity(r - 1, r - 1);
  return m;
}

HighGainObserver::HighGainObserver(const HgoConfig& config, int derivative_order)
    : config_(config),
      derivative_order_(derivative_order),
      matrices_(build_hgo_matrices(config)),
      state_(Eigen::VectorXd::Zero(config.order)) {
  if (derivative_order_ < 1 || derivative_order_ > config_.order - 1) {
    throw std::invalid_argument(
        "derivative_order must lie between 1 and observer order - 1");
  }
}

Eigen::VectorXd HighGainObserver::step_all(double sample) {
  const Eigen::VectorXd estimates = matrices_.output_select * state_;
  state_ = matrices_.a_discrete * state_ + matrices_.b_discrete * sample;
  return estimates;
}

StepResult HighGainObserver::step(double sample) {
  const Eigen::VectorXd estimates = step_all(sample);
  StepResult out{true, count_, estimates(derivative_order_ - 1), false, 0.0};
  ++count_;
  return out;
}

}  // namespace numdiff
