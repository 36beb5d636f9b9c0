#include "core/savitzky_golay.hpp"

#include <Eigen/Dense>
#include <stdexcept>

#include "core/errors.hpp"

namespace numdiff {

void SgConfig::validate() const {
  if (half_window < 1) {
    throw std::invalid_argument("half_window must be at least 1");
  }
  if (derivative_order != 1 && derivative_order != 2) {
    throw std::invalid_argument("derivative_order must be 1 or 2");
  }
  if (poly_degree < derivative_order || poly_degree > 2 * half_window) {
    throw std::invalid_argument(
        "poly_degree must satisfy derivative_order <= poly_degree <= 2*half_window");
  }
}

namespace {

// Row `q` of the pseudoinverse of the centered Vandermonde matrix, scaled by
// q!, gives the weights whose dot product with the window is the q-th
// derivative of the fitted polynomial at the center.
std::vector<double> sg_weights(const SgConfig& config, double sample_time_s) {
  config.validate();
  if (!(sample_time_s > 0.0)) {
    throw std::invalid_argument("sample_time_s must be positive");
  }
  const int rows = config.window_size();
  const int cols = config.poly_degree + 1;
  Eigen::MatrixXd design(rows, cols);
  for (int r = 0; r < rows; ++r) {
    const double abscissa = (r - config.half_window) * sample_time_s;
    double power = 1.0;
    for (int c = 0; c < cols; ++c) {
      design(r, c) = power;
      power *= abscissa;
    }
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (qr.rank() < cols) {
    throw NumericalError("rank-deficient Savitzky-Golay design matrix");
  }
  // pinv = argmin ||design * X - I|| column by column
  const Eigen::MatrixXd pinv = qr.solve(Eigen::MatrixXd::Identity(rows, rows));
  double q_factorial = 1.0;
  for (int j = 2; j <= config.derivative_order; ++j) q_factorial *= j;
  const Eigen::RowVectorXd row = q_factorial * pinv.row(config.derivative_order);
  return std::vector<double>(row.data(), row.data() + row.size());
}

}  // namespace

double sg_estimate(std::span<const double> window, double sample_time_s,
                   const SgConfig& config) {
  if (window.size() != static_cast<std::size_t>(config.window_size())) {
    throw std::invalid_argument("window length must be 2*half_window + 1");
  }
  const std::vector<double> w = sg_weights(config, sample_time_s);
  double acc = 0.0;
  for (std::size_t i = 0; i < window.size(); ++i) acc += w[i] * window[i];
  return acc;
}

SavitzkyGolay::SavitzkyGolay(const SgConfig& config, double sample_time_s)
    : config_(config), weights_(sg_weights(config, sample_time_s)) {}

StepResult SavitzkyGolay::step(double sample) {
  buffer_.push_back(sample);
  if (buffer_.size() > static_cast<std::size_t>(config_.window_size())) {
    buffer_.pop_front();
  }
  StepResult out;
  if (buffer_.size() == static_cast<std::size_t>(config_.window_size())) {
    double acc = 0.0;
    for (std::size_t i = 0; i < buffer_.size(); ++i) acc += weights_[i] * buffer_[i];
    out = {true, count_ - config_.half_window, acc, false, 0.0};
  }
  ++count_;
  return out;
}

}  // namespace numdiff
