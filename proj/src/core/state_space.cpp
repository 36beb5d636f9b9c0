#include "core/state_space.hpp"

#include <stdexcept>

namespace numdiff {

StateSpaceModel single_integrator(double sample_time_s) {
  StateSpaceModel m;
  m.a = Eigen::MatrixXd::Ones(1, 1);
  m.b = Eigen::VectorXd::Constant(1, sample_time_s);
  m.c = Eigen::RowVectorXd::Ones(1);
  return m;
}

StateSpaceModel double_integrator(double sample_time_s) {
  StateSpaceModel m;
  m.a = Eigen::MatrixXd::Identity(2, 2);
  m.a(0, 1) = sample_time_s;
  m.b = Eigen::VectorXd(2);
  m.b << 0.5 * sample_time_s * sample_time_s, sample_time_s;
  m.c = Eigen::RowVectorXd::Zero(2);
  m.c(0) = 1.0;
  return m;
}

StateSpaceModel integrator_model(int derivative_order, double sample_time_s) {
  if (!(sample_time_s > 0.0)) {
    throw std::invalid_argument("sample_time_s must be positive");
  }
  switch (derivative_order) {
    case 1:
      return single_integrator(sample_time_s);
    case 2:
      return double_integrator(sample_time_s);
    default:
      throw std::invalid_argument("derivative_order must be 1 or 2");
  }
}

}  // namespace numdiff
