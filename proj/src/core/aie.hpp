#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "core/differentiator.hpp"
#include "core/kalman.hpp"
#include "core/rcie.hpp"
#include "core/signal.hpp"
#include "core/state_space.hpp"

namespace numdiff {

// Which of the two state-estimator covariances are searched online.
enum class CovarianceAdaptation {
  none,          // both fixed by the user
  process_only,  // process noise searched, sensor variance known
  full,          // both searched
};

// For `none`, fixed_process_cov and fixed_sensor_var are required. For
// `process_only`, adapt and fixed_sensor_var are required. For `full`, adapt
// is required; setting fixed_sensor_var (or both fixed values) additionally
// pins that branch of the search, which makes `full` reproduce the
// process_only (or none) variant bit for bit.
struct AieVariant {
  CovarianceAdaptation adaptation = CovarianceAdaptation::full;
  std::optional<Eigen::MatrixXd> fixed_process_cov;
  std::optional<double> fixed_sensor_var;
  std::optional<AdaptConfig> adapt;

  void validate(int model_order) const;
};

struct EstimatorOutput {
  double input_estimate = 0.0;  // the derivative estimate at this step
  Eigen::VectorXd state;        // assimilated state
  double residual = 0.0;
  Eigen::MatrixXd process_cov_used;
  double sensor_var_used = 0.0;
  int delay_steps = 1;  // estimate of step k is available at k + 1
};

// Input estimation against an integrator model with a Kalman state estimator
// whose covariances may be adapted each step. One instance per signal;
// strictly sequential per-sample processing.
class AdaptiveInputEstimator {
 public:
  AdaptiveInputEstimator(int derivative_order, double sample_time_s,
                         RcieConfig rcie_config, AieVariant variant);

  EstimatorOutput step(double measurement);
  std::vector<EstimatorOutput> run(const SampledSignal& signal);

  const StateSpaceModel& model() const { return model_; }
  long long current_step() const { return step_; }
  const KalmanState& kalman() const { return kalman_; }
  const RcieState& rcie() const { return rcie_; }

 private:
  std::pair<Eigen::MatrixXd, double> choose_covariances() const;

  StateSpaceModel model_;
  RcieConfig rcie_config_;
  AieVariant variant_;
  RcieState rcie_;
  KalmanState kalman_;
  long long step_ = 0;
  long long warmup_;  // max(subsystem_order, filter_length)
};

// Streaming adapter for pipelines that only need the derivative estimate.
class AieDifferentiator final : public Differentiator {
 public:
  AieDifferentiator(int derivative_order, double sample_time_s,
                    RcieConfig rcie_config, AieVariant variant)
      : estimator_(derivative_order, sample_time_s, std::move(rcie_config),
                   std::move(variant)),
        derivative_order_(derivative_order) {}

  StepResult step(double sample) override {
    const EstimatorOutput out = estimator_.step(sample);
    return {true, count_++, out.input_estimate, true, out.residual};
  }
  int delay_steps() const override { return 1; }
  int derivative_order() const override { return derivative_order_; }

  AdaptiveInputEstimator& estimator() { return estimator_; }

 private:
  AdaptiveInputEstimator estimator_;
  int derivative_order_;
  long long count_ = 0;
};

}  // namespace numdiff
