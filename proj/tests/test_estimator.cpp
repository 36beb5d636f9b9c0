#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "core/aie.hpp"
#include "core/signal.hpp"

using namespace numdiff;

namespace {

RcieConfig benchmark_rcie() {
  return RcieConfig::with_scalar_weights(12, 25, 1.0, 1e-5, 0.1);
}

AdaptConfig benchmark_grid() {
  AdaptConfig cfg;
  cfg.eta_lower = 1e-6;
  cfg.eta_upper = 1e2;
  cfg.grid_points = 100;
  cfg.scale = GridScale::logarithmic;
  cfg.alpha = 0.5;
  return cfg;
}

AieVariant nse_variant(double process_scale, double sensor_var, int order) {
  AieVariant v;
  v.adaptation = CovarianceAdaptation::none;
  v.fixed_process_cov = process_scale * Eigen::MatrixXd::Identity(order, order);
  v.fixed_sensor_var = sensor_var;
  return v;
}

AieVariant sse_variant(double sensor_var) {
  AieVariant v;
  v.adaptation = CovarianceAdaptation::process_only;
  v.fixed_sensor_var = sensor_var;
  v.adapt = benchmark_grid();
  return v;
}

AieVariant ase_variant() {
  AieVariant v;
  v.adaptation = CovarianceAdaptation::full;
  v.adapt = benchmark_grid();
  return v;
}

bool outputs_identical(const EstimatorOutput& a, const EstimatorOutput& b) {
  return a.input_estimate == b.input_estimate && a.residual == b.residual &&
         a.state == b.state && a.sensor_var_used == b.sensor_var_used &&
         a.process_cov_used == b.process_cov_used;
}

}  // namespace

TEST_CASE("zero input is a fixed point of every variant") {
  SampledSignal zeros;
  zeros.sample_time_s = 0.01;
  zeros.values.assign(60, 0.0);
  for (int order : {1, 2}) {
    std::vector<AieVariant> variants = {nse_variant(1e-6, 0.01, order),
                                        sse_variant(0.01), ase_variant()};
    for (auto& variant : variants) {
      AdaptiveInputEstimator estimator(order, 0.01, benchmark_rcie(), variant);
      for (const EstimatorOutput& out : estimator.run(zeros)) {
        CHECK(out.input_estimate == 0.0);
        CHECK(out.residual == 0.0);
        CHECK(out.state.cwiseAbs().maxCoeff() == 0.0);
      }
    }
  }
}

TEST_CASE("benchmark parameterization survives a full noisy run") {
  const SampledSignal clean = generate_two_tone(1.0, 20.0, 1.0, 30.0, 0.01, 2000);
  const SampledSignal noisy = add_noise(clean, {20.0, 1});
  AdaptiveInputEstimator estimator(1, 0.01, benchmark_rcie(),
                                   nse_variant(1e-6, 0.01, 1));
  const auto outputs = estimator.run(noisy);
  REQUIRE(outputs.size() == noisy.size());
  for (const auto& out : outputs) {
    CHECK(std::isfinite(out.input_estimate));
    CHECK(std::isfinite(out.residual));
  }
  CHECK(std::isfinite(estimator.kalman().residuals.sample_variance()));
}

TEST_CASE("fully adaptive estimator locks onto a clean ramp") {
  SampledSignal ramp;
  ramp.sample_time_s = 0.01;
  for (int k = 0; k < 1200; ++k) ramp.values.push_back(0.01 * k);
  // Weights sized for a unit-slope input; a constant-slope signal is the
  // integrator model's exact regime, so the estimate must settle at 1.
  RcieConfig rcie = RcieConfig::with_scalar_weights(2, 5, 1.0, 1e-8, 1e-8);
  AdaptiveInputEstimator estimator(1, 0.01, rcie, ase_variant());
  const auto outputs = estimator.run(ramp);
  for (std::size_t k = 501; k < outputs.size(); ++k) {
    CHECK(std::abs(outputs[k].input_estimate - 1.0) < 0.01);
  }
}

TEST_CASE("run is deterministic and length preserving") {
  const SampledSignal clean = generate_two_tone(1.0, 20.0, 1.0, 30.0, 0.01, 300);
  const SampledSignal noisy = add_noise(clean, {30.0, 7});

  SampledSignal one;
  one.sample_time_s = 0.01;
  one.values = {1.0};
  AdaptiveInputEstimator single(1, 0.01, benchmark_rcie(), ase_variant());
  CHECK(single.run(one).size() == 1);

  AdaptiveInputEstimator a(1, 0.01, benchmark_rcie(), ase_variant());
  AdaptiveInputEstimator b(1, 0.01, benchmark_rcie(), ase_variant());
  const auto ra = a.run(noisy);
  const auto rb = b.run(noisy);
  REQUIRE(ra.size() == rb.size());
  for (std::size_t i = 0; i < ra.size(); ++i) CHECK(outputs_identical(ra[i], rb[i]));

  SampledSignal empty;
  empty.sample_time_s = 0.01;
  AdaptiveInputEstimator c(1, 0.01, benchmark_rcie(), ase_variant());
  CHECK_THROWS_AS(c.run(empty), std::invalid_argument);
}

TEST_CASE("future samples cannot influence past outputs") {
  const SampledSignal clean = generate_two_tone(1.0, 20.0, 1.0, 30.0, 0.01, 260);
  const SampledSignal noisy = add_noise(clean, {20.0, 5});
  AdaptiveInputEstimator reference(1, 0.01, benchmark_rcie(), ase_variant());
  const auto base = reference.run(noisy);

  std::mt19937_64 rng(67);
  for (int trial = 0; trial < 8; ++trial) {
    const std::size_t cut = 20 + rng() % 200;
    SampledSignal perturbed = noisy;
    for (std::size_t m = cut + 1; m < perturbed.size(); ++m) {
      perturbed.values[m] += 3.0;
    }
    AdaptiveInputEstimator other(1, 0.01, benchmark_rcie(), ase_variant());
    const auto altered = other.run(perturbed);
    for (std::size_t k = 0; k <= cut; ++k) {
      REQUIRE(outputs_identical(base[k], altered[k]));
    }
    // direct feedthrough: the sample at the cut changes that step's estimate
    SampledSignal bumped = noisy;
    bumped.values[cut] += 1.0;
    AdaptiveInputEstimator third(1, 0.01, benchmark_rcie(), ase_variant());
    const auto bumped_run = third.run(bumped);
    CHECK(bumped_run[cut].input_estimate != base[cut].input_estimate);
  }
}

TEST_CASE("pinning the search reproduces the fixed variants bit for bit") {
  const SampledSignal clean = generate_two_tone(1.0, 20.0, 1.0, 30.0, 0.01, 300);
  const SampledSignal noisy = add_noise(clean, {20.0, 3});

  SUBCASE("both pinned equals the non-adaptive variant") {
    AieVariant pinned = ase_variant();
    pinned.fixed_process_cov = 1e-6 * Eigen::MatrixXd::Identity(1, 1);
    pinned.fixed_sensor_var = 0.01;
    AdaptiveInputEstimator fixed(1, 0.01, benchmark_rcie(),
                                 nse_variant(1e-6, 0.01, 1));
    AdaptiveInputEstimator forced(1, 0.01, benchmark_rcie(), pinned);
    const auto rf = fixed.run(noisy);
    const auto rp = forced.run(noisy);
    for (std::size_t i = 0; i < rf.size(); ++i) {
      REQUIRE(outputs_identical(rf[i], rp[i]));
    }
  }

  SUBCASE("sensor variance pinned equals the semi-adaptive variant") {
    AieVariant pinned = ase_variant();
    pinned.fixed_sensor_var = 0.01;
    AdaptiveInputEstimator semi(1, 0.01, benchmark_rcie(), sse_variant(0.01));
    AdaptiveInputEstimator forced(1, 0.01, benchmark_rcie(), pinned);
    SampledSignal head = noisy;
    head.values.resize(100);
    const auto rs = semi.run(head);
    const auto rp = forced.run(head);
    for (std::size_t i = 0; i < rs.size(); ++i) {
      REQUIRE(outputs_identical(rs[i], rp[i]));
    }
  }
}

TEST_CASE("outputs carry the one-step availability delay") {
  AdaptiveInputEstimator estimator(1, 0.01, benchmark_rcie(), ase_variant());
  const EstimatorOutput out = estimator.step(0.3);
  CHECK(out.delay_steps == 1);
  CHECK(out.state.size() == 1);

  AieDifferentiator diff(2, 0.01, benchmark_rcie(), ase_variant());
  CHECK(diff.delay_steps() == 1);
  CHECK(diff.derivative_order() == 2);
  const StepResult r = diff.step(0.3);
  CHECK(r.has_estimate);
  CHECK(r.estimate_step == 0);
  CHECK(r.has_residual);
}

TEST_CASE("variant validation") {
  AieVariant missing;
  missing.adaptation = CovarianceAdaptation::none;
  CHECK_THROWS_AS(AdaptiveInputEstimator(1, 0.01, benchmark_rcie(), missing),
                  std::invalid_argument);

  AieVariant no_grid;
  no_grid.adaptation = CovarianceAdaptation::full;
  CHECK_THROWS_AS(AdaptiveInputEstimator(1, 0.01, benchmark_rcie(), no_grid),
                  std::invalid_argument);

  AieVariant sse_no_v2;
  sse_no_v2.adaptation = CovarianceAdaptation::process_only;
  sse_no_v2.adapt = benchmark_grid();
  CHECK_THROWS_AS(AdaptiveInputEstimator(1, 0.01, benchmark_rcie(), sse_no_v2),
                  std::invalid_argument);

  AieVariant wrong_dim = nse_variant(1e-6, 0.01, 2);
  CHECK_THROWS_AS(AdaptiveInputEstimator(1, 0.01, benchmark_rcie(), wrong_dim),
                  std::invalid_argument);

  AieVariant negative = nse_variant(1e-6, -0.5, 1);
  CHECK_THROWS_AS(AdaptiveInputEstimator(1, 0.01, benchmark_rcie(), negative),
                  std::invalid_argument);

  CHECK_THROWS_AS(AdaptiveInputEstimator(3, 0.01, benchmark_rcie(), ase_variant()),
                  std::invalid_argument);
  CHECK_THROWS_AS(AdaptiveInputEstimator(1, 0.0, benchmark_rcie(), ase_variant()),
                  std::invalid_argument);
}
