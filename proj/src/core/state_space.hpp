#pragma once

#include <Eigen/Dense>

namespace numdiff {

// Scalar-input, scalar-output linear model x_{k+1} = A x_k + B d_k, y = C x.
struct StateSpaceModel {
  Eigen::MatrixXd a;
  Eigen::VectorXd b;
  Eigen::RowVectorXd c;

  int order() const { return static_cast<int>(a.rows()); }
};

// x holds the measured signal; the input is its rate of change.
StateSpaceModel single_integrator(double sample_time_s);

// x holds (signal, rate); the input is the second derivative.
StateSpaceModel double_integrator(double sample_time_s);

// derivative_order 1 -> single integrator, 2 -> double integrator.
StateSpaceModel integrator_model(int derivative_order, double sample_time_s);

}  // namespace numdiff
