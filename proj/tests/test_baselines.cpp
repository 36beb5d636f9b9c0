#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "core/backward_difference.hpp"
#include "core/differentiator.hpp"
#include "core/high_gain_observer.hpp"
#include "core/savitzky_golay.hpp"

using namespace numdiff;

namespace {

// Normal-equations oracle with absolute abscissae: fits
// sum_i a_i * ((k - l + j) Ts)^i by least squares and evaluates the q-th
// derivative of the fitted polynomial at the window center. Long-double
// Gaussian elimination keeps the ill-conditioned absolute form accurate
// enough to compare against.
double sg_oracle_absolute(const std::vector<double>& window, long long center_step,
                          double sample_time, const SgConfig& cfg) {
  const int rows = cfg.window_size();
  const int cols = cfg.poly_degree + 1;
  std::vector<std::vector<long double>> design(
      static_cast<std::size_t>(rows), std::vector<long double>(static_cast<std::size_t>(cols)));
  for (int j = 0; j < rows; ++j) {
    const long double t =
        static_cast<long double>(center_step - cfg.half_window + j) * sample_time;
    long double power = 1.0L;
    for (int c = 0; c < cols; ++c) {
      design[j][c] = power;
      power *= t;
    }
  }
  // gram = A'A, rhs = A'y
  std::vector<std::vector<long double>> gram(
      static_cast<std::size_t>(cols), std::vector<long double>(static_cast<std::size_t>(cols), 0.0L));
  std::vector<long double> rhs(static_cast<std::size_t>(cols), 0.0L);
  for (int a = 0; a < cols; ++a) {
    for (int b = 0; b < cols; ++b) {
      for (int j = 0; j < rows; ++j) gram[a][b] += design[j][a] * design[j][b];
    }
    for (int j = 0; j < rows; ++j) rhs[a] += design[j][a] * window[static_cast<std::size_t>(j)];
  }
  // Gaussian elimination with partial pivoting
  for (int p = 0; p < cols; ++p) {
    int pivot = p;
    for (int r = p + 1; r < cols; ++r) {
      if (std::abs(gram[r][p]) > std::abs(gram[pivot][p])) pivot = r;
    }
    std::swap(gram[p], gram[pivot]);
    std::swap(rhs[p], rhs[pivot]);
    for (int r = p + 1; r < cols; ++r) {
      const long double factor = gram[r][p] / gram[p][p];
      for (int c = p; c < cols; ++c) gram[r][c] -= factor * gram[p][c];
      rhs[r] -= factor * rhs[p];
    }
  }
  std::vector<long double> coeffs(static_cast<std::size_t>(cols));
  for (int r = cols - 1; r >= 0; --r) {
    long double acc = rhs[r];
    for (int c = r + 1; c < cols; ++c) acc -= gram[r][c] * coeffs[c];
    coeffs[r] = acc / gram[r][r];
  }
  const long double t0 = static_cast<long double>(center_step) * sample_time;
  long double est = 0.0L;
  for (int i = cfg.derivative_order; i <= cfg.poly_degree; ++i) {
    long double falling = 1.0L;
    for (int j = 1; j <= cfg.derivative_order; ++j) falling *= (i - j + 1);
    est += falling * coeffs[static_cast<std::size_t>(i)] *
           std::pow(t0, static_cast<long double>(i - cfg.derivative_order));
  }
  return static_cast<double>(est);
}

}  // namespace

TEST_CASE("backward difference closed forms") {
  CHECK(bd_first(0.0, 0.01, 0.01) == 1.0);
  CHECK(bd_first(3.7, 3.7, 0.25) == 0.0);

  // High-precision quotient of the sampled sine (frozen from a 50-digit
  // evaluation of (sin(20) - sin(19.8)) / 0.01).
  const double impl = bd_first(std::sin(0.2 * 99), std::sin(0.2 * 100), 0.01);
  CHECK(impl == doctest::Approx(9.9271513220522699).epsilon(1e-10));
  const long double quotient =
      (static_cast<long double>(std::sin(0.2 * 100)) - std::sin(0.2 * 99)) / 0.01L;
  CHECK(impl == doctest::Approx(static_cast<double>(quotient)).epsilon(1e-12));
}

TEST_CASE("second difference is exact on quadratics and zero on ramps") {
  const double ts = 0.01;
  auto quad = [&](long long k) {
    const double t = static_cast<double>(k) * ts;
    return t * t;
  };
  CHECK(bd_second(quad(5), quad(6), quad(7), ts) == doctest::Approx(2.0).epsilon(1e-9));

  CHECK(bd_second(5 * 0.125, 6 * 0.125, 7 * 0.125, 0.5) == 0.0);

  // Frozen from exact decimal arithmetic on the same three samples.
  CHECK(bd_second(0.4234151, -0.7890123, 0.1234567, 0.01) ==
        doctest::Approx(21248.964).epsilon(1e-12));
}

TEST_CASE("backward differences are linear operators") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> dist(-5.0, 5.0);
  for (int trial = 0; trial < 100; ++trial) {
    const double a = dist(rng), b = dist(rng);
    double y[3], w[3], mix[3];
    for (int i = 0; i < 3; ++i) {
      y[i] = dist(rng);
      w[i] = dist(rng);
      mix[i] = a * y[i] + b * w[i];
    }
    const double lin1 = a * bd_first(y[1], y[2], 0.01) + b * bd_first(w[1], w[2], 0.01);
    CHECK(bd_first(mix[1], mix[2], 0.01) == doctest::Approx(lin1).epsilon(1e-12));
    const double lin2 = a * bd_second(y[0], y[1], y[2], 0.01) +
                        b * bd_second(w[0], w[1], w[2], 0.01);
    CHECK(bd_second(mix[0], mix[1], mix[2], 0.01) ==
          doctest::Approx(lin2).epsilon(1e-9));
  }
}

TEST_CASE("streaming backward difference aligns its output") {
  BackwardDifference bd(1, 0.01);
  CHECK(bd.delay_steps() == 1);
  CHECK_FALSE(bd.step(1.0).has_estimate);
  const StepResult r = bd.step(1.5);
  CHECK(r.has_estimate);
  CHECK(r.estimate_step == 1);
  CHECK(r.estimate == doctest::Approx(50.0));

  BackwardDifference bd2(2, 0.01);
  CHECK_FALSE(bd2.step(1.0).has_estimate);
  CHECK_FALSE(bd2.step(2.0).has_estimate);
  CHECK(bd2.step(3.0).has_estimate);

  CHECK_THROWS_AS(BackwardDifference(3, 0.01), std::invalid_argument);
  CHECK_THROWS_AS(BackwardDifference(1, 0.0), std::invalid_argument);
}

TEST_CASE("Savitzky-Golay reproduces polynomials up to the fit degree") {
  const double ts = 0.01;
  SgConfig cfg{2, 3, 1};
  // window sampled from t^3 centered at t = 1
  const long long center = 100;
  std::vector<double> window;
  for (int j = -2; j <= 2; ++j) {
    const double t = static_cast<double>(center + j) * ts;
    window.push_back(t * t * t);
  }
  CHECK(sg_estimate(window, ts, cfg) == doctest::Approx(3.0).epsilon(1e-9));

  const std::vector<double> flat(5, 4.2);
  CHECK(sg_estimate(flat, ts, cfg) == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("Savitzky-Golay matches the normal-equations oracle and is translation invariant") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> dist(-2.0, 2.0);
  const double ts = 0.01;
  SgConfig cfg{2, 3, 1};
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> window(5);
    for (double& v : window) v = dist(rng);
    const double impl = sg_estimate(window, ts, cfg);
    const double at_zero = sg_oracle_absolute(window, 0, ts, cfg);
    const double shifted = sg_oracle_absolute(window, 6, ts, cfg);
    const double scale = std::max(1.0, std::abs(at_zero));
    CHECK(std::abs(impl - at_zero) <= 1e-9 * scale);
    CHECK(std::abs(impl - shifted) <= 1e-9 * scale);
  }
}

TEST_CASE("Savitzky-Golay exactness across window shapes and orders") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  const double ts = 0.02;
  int checked = 0;
  while (checked < 100) {
    const int half_window = 1 + static_cast<int>(rng() % 4);
    for (int q = 1; q <= 2; ++q) {
      if (q > 2 * half_window) continue;
      const int degree = q + static_cast<int>(rng() % (2 * half_window - q + 1));
      SgConfig cfg{half_window, degree, q};
      std::vector<double> coeffs(static_cast<std::size_t>(degree) + 1);
      for (double& c : coeffs) c = dist(rng);
      std::vector<double> window;
      for (int j = -half_window; j <= half_window; ++j) {
        const double s = j * ts;
        double acc = 0.0, power = 1.0;
        for (double c : coeffs) {
          acc += c * power;
          power *= s;
        }
        window.push_back(acc);
      }
      double truth = coeffs[static_cast<std::size_t>(q)];
      for (int j = 2; j <= q; ++j) truth *= j;
      const double est = sg_estimate(window, ts, cfg);
      CHECK(std::abs(est - truth) <= 1e-9 * std::max(1.0, std::abs(truth)));
      ++checked;
    }
  }
}

TEST_CASE("Savitzky-Golay config validation") {
  CHECK_THROWS_AS((SgConfig{0, 1, 1}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((SgConfig{2, 0, 1}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((SgConfig{2, 5, 1}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((SgConfig{2, 2, 3}.validate()), std::invalid_argument);
  CHECK_NOTHROW((SgConfig{2, 3, 1}.validate()));
  std::vector<double> window(5, 0.0);
  CHECK_THROWS_AS(sg_estimate(window, 0.0, SgConfig{2, 3, 1}), std::invalid_argument);
  std::vector<double> short_window(3, 0.0);
  CHECK_THROWS_AS(sg_estimate(short_window, 0.01, SgConfig{2, 3, 1}),
                  std::invalid_argument);
}

TEST_CASE("streaming Savitzky-Golay emits centered estimates after the buffer fills") {
  const double ts = 0.01;
  SgConfig cfg{2, 3, 1};
  SavitzkyGolay sg(cfg, ts);
  CHECK(sg.delay_steps() == 3);
  std::vector<double> samples;
  for (int k = 0; k < 40; ++k) {
    const double t = k * ts;
    samples.push_back(t * t * t);
  }
  int emissions = 0;
  for (int k = 0; k < 40; ++k) {
    const StepResult r = sg.step(samples[static_cast<std::size_t>(k)]);
    if (k < 4) {
      CHECK_FALSE(r.has_estimate);
    } else {
      REQUIRE(r.has_estimate);
      CHECK(r.estimate_step == k - 2);
      const double t_center = (k - 2) * ts;
      CHECK(r.estimate == doctest::Approx(3.0 * t_center * t_center).epsilon(1e-7));
      ++emissions;
    }
  }
  CHECK(emissions == 36);
}

TEST_CASE("high-gain observer discretization matches the closed-form oracle") {
  HgoConfig cfg{2, {2.0, 1.0}, 0.2, 0.01};
  const HgoMatrices m = build_hgo_matrices(cfg);

  // Continuous-time matrix assembled independently.
  Eigen::Matrix2d a_cont;
  a_cont << -10.0, 1.0, -25.0, 0.0;
  Eigen::Vector2d gain(10.0, 25.0);
  const Eigen::Matrix2d lhs = Eigen::Matrix2d::Identity() - 0.005 * a_cont;
  // closed-form 2x2 inverse
  const double det = lhs(0, 0) * lhs(1, 1) - lhs(0, 1) * lhs(1, 0);
  Eigen::Matrix2d inv;
  inv << lhs(1, 1), -lhs(0, 1), -lhs(1, 0), lhs(0, 0);
  inv /= det;
  const Eigen::Matrix2d a_oracle = inv * (Eigen::Matrix2d::Identity() + 0.005 * a_cont);
  const Eigen::Vector2d b_oracle = inv * gain * 0.01;
  for (int r = 0; r < 2; ++r) {
    for (int c = 0; c < 2; ++c) {
      CHECK(m.a_discrete(r, c) == doctest::Approx(a_oracle(r, c)).epsilon(1e-12));
    }
    CHECK(m.b_discrete(r) == doctest::Approx(b_oracle(r)).epsilon(1e-12));
  }

  // Frozen from a 50-digit evaluation of the same formulas.
  CHECK(m.a_discrete(0, 0) == doctest::Approx(0.9036287923854848).epsilon(1e-12));
  CHECK(m.a_discrete(0, 1) == doctest::Approx(0.009518143961927424).epsilon(1e-12));
  CHECK(m.a_discrete(1, 0) == doctest::Approx(-0.2379535990481856).epsilon(1e-12));
  CHECK(m.a_discrete(1, 1) == doctest::Approx(0.9988102320047591).epsilon(1e-12));
  CHECK(m.b_discrete(0) == doctest::Approx(0.09637120761451517).epsilon(1e-12));
  CHECK(m.b_discrete(1) == doctest::Approx(0.2379535990481856).epsilon(1e-12));
}

TEST_CASE("high-gain observer stability across the benchmark gain sets") {
  auto spectral_radius = [](const Eigen::MatrixXd& a) {
    Eigen::EigenSolver<Eigen::MatrixXd> eig(a);
    double radius = 0.0;
    for (int i = 0; i < a.rows(); ++i) radius = std::max(radius, std::abs(eig.eigenvalues()(i)));
    return radius;
  };
  for (double eps : {0.2, 0.7}) {
    HgoConfig cfg{2, {2.0, 1.0}, eps, 0.01};
    CHECK(spectral_radius(build_hgo_matrices(cfg).a_discrete) < 1.0);
  }
  for (double eps : {1.0, 2.0}) {
    HgoConfig cfg{3, {8.0, 24.0, 32.0}, eps, 0.01};
    CHECK(spectral_radius(build_hgo_matrices(cfg).a_discrete) < 1.0);
  }
}

TEST_CASE("high-gain observer rejects non-Hurwitz gains") {
  CHECK_THROWS_AS((HgoConfig{2, {-2.0, 1.0}, 0.2, 0.01}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((HgoConfig{2, {2.0, 0.0}, 0.2, 0.01}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((HgoConfig{2, {2.0, 1.0}, 0.0, 0.01}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((HgoConfig{1, {2.0}, 0.2, 0.01}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((HgoConfig{2, {2.0}, 0.2, 0.01}.validate()), std::invalid_argument);
}

TEST_CASE("constant input drives the derivative estimate to zero") {
  HgoConfig cfg{2, {2.0, 1.0}, 0.2, 0.01};
  HighGainObserver hgo(cfg, 1);
  double peak = 0.0;
  double latest = 0.0;
  // 5 observer time constants = 5 * epsilon = 1 s = 100 steps
  for (int k = 0; k < 140; ++k) {
    const StepResult r = hgo.step(5.0);
    latest = r.estimate;
    if (k < 100) peak = std::max(peak, std::abs(r.estimate));
  }
  CHECK(std::abs(latest) < 0.05 * peak);
}

TEST_CASE("shrinking epsilon does not hurt steady-state accuracy on a slow sinusoid") {
  const double ts = 0.01;
  // Slow relative to every tested observer bandwidth (slowest pole is
  // 2 rad/s at epsilon = 0.5); for faster signals the error peaks mid-range.
  const double omega = 2.0;
  std::vector<double> rmse;
  for (double eps : {0.5, 0.2, 0.1, 0.05}) {
    HgoConfig cfg{2, {2.0, 1.0}, eps, ts};
    HighGainObserver hgo(cfg, 1);
    double acc = 0.0;
    int count = 0;
    for (int k = 0; k < 2000; ++k) {
      const double t = k * ts;
      const StepResult r = hgo.step(std::sin(omega * t));
      if (k >= 1000) {
        const double err = r.estimate - omega * std::cos(omega * t);
        acc += err * err;
        ++count;
      }
    }
    rmse.push_back(std::sqrt(acc / count));
  }
  for (std::size_t i = 1; i < rmse.size(); ++i) CHECK(rmse[i] <= rmse[i - 1]);
}
