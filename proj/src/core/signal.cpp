#include "core/signal.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace numdiff {

namespace {

// Seeded Gaussian source: mt19937_64 plus an explicit Box-Muller transform,
// so identical seeds give identical noise independent of the standard
// library's normal_distribution implementation.
class GaussianSource {
 public:
  explicit GaussianSource(std::uint64_t seed) : rng_(seed) {}

  double next() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = uniform_positive();
    const double u2 = uniform_halfopen();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    have_spare_ = true;
    return radius * std::cos(angle);
  }

 private:
  // (0, 1]: keeps log(u1) finite.
  double uniform_positive() {
    return static_cast<double>((rng_() >> 11) + 1) * 0x1.0p-53;
  }
  // [0, 1)
  double uniform_halfopen() {
    return static_cast<double>(rng_() >> 11) * 0x1.0p-53;
  }

  std::mt19937_64 rng_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace

const std::vector<double>& SampledSignal::truth(int order) const {
  auto it = truth_derivatives.find(order);
  if (it == truth_derivatives.end()) {
    throw std::invalid_argument("signal has no truth series for derivative order " +
                                std::to_string(order));
  }
  return it->second;
}

void SampledSignal::validate() const {
  if (!(sample_time_s > 0.0)) {
    throw std::invalid_argument("sample_time_s must be positive");
  }
  for (const auto& [order, series] : truth_derivatives) {
    if (order != 1 && order != 2) {
      throw std::invalid_argument("truth derivative order must be 1 or 2");
    }
    if (series.size() != values.size()) {
      throw std::invalid_argument("truth series length differs from sample count");
    }
  }
}

SampledSignal generate_two_tone(double amplitude_1, double freq_1,
                                double amplitude_2, double freq_2,
                                double sample_time_s, std::size_t num_steps) {
  if (!(sample_time_s > 0.0)) {
    throw std::invalid_argument("sample_time_s must be positive");
  }
  if (num_steps < 1) {
    throw std::invalid_argument("num_steps must be at least 1");
  }
  SampledSignal sig;
  sig.sample_time_s = sample_time_s;
  sig.values.resize(num_steps);
  std::vector<double> d1(num_steps);
  std::vector<double> d2(num_steps);
  for (std::size_t k = 0; k < num_steps; ++k) {
    const double t = static_cast<double>(k) * sample_time_s;
    sig.values[k] = amplitude_1 * std::sin(freq_1 * t) + amplitude_2 * std::sin(freq_2 * t);
    d1[k] = amplitude_1 * freq_1 * std::cos(freq_1 * t) +
            amplitude_2 * freq_2 * std::cos(freq_2 * t);
    d2[k] = -amplitude_1 * freq_1 * freq_1 * std::sin(freq_1 * t) -
            amplitude_2 * freq_2 * freq_2 * std::sin(freq_2 * t);
  }
  sig.truth_derivatives[1] = std::move(d1);
  sig.truth_derivatives[2] = std::move(d2);
  return sig;
}

double signal_rms(const std::vector<double>& values) {
  if (values.empty()) return 0.0;
  double acc = 0.0;
  for (double v : values) acc += v * v;
  return std::sqrt(acc / static_cast<double>(values.size()));
}

double noise_amplitude(double clean_rms, double snr_db) {
  const double amplitude = clean_rms * std::pow(10.0, -snr_db / 20.0);
  if (!std::isfinite(amplitude) || amplitude <= 0.0) {
    throw std::invalid_argument("noise amplitude is not finite and positive for this SNR");
  }
  return amplitude;
}

SampledSignal add_noise(const SampledSignal& signal, const NoiseSpec& spec) {
  if (signal.empty()) {
    throw std::invalid_argument("cannot add noise to an empty signal");
  }
  if (std::isinf(spec.snr_db) && spec.snr_db > 0.0) {
    return signal;  // noise disabled
  }
  if (std::isnan(spec.snr_db)) {
    throw std::invalid_argument("snr_db must not be NaN");
  }
  const double rms = signal_rms(signal.values);
  if (rms == 0.0) {
    throw std::invalid_argument("SNR is undefined for an all-zero signal");
  }
  const double amplitude = noise_amplitude(rms, spec.snr_db);
  SampledSignal noisy = signal;
  GaussianSource gauss(spec.seed);
  for (double& v : noisy.values) {
    v += amplitude * gauss.next();
  }
  return noisy;
}

SampledSignal generate_maneuver_trajectory(double duration_s,
                                           double sample_time_s,
                                           const ManeuverProfile& profile) {
  if (!(duration_s > 0.0)) {
    throw std::invalid_argument("duration_s must be positive");
  }
  if (!(sample_time_s > 0.0)) {
    throw std::invalid_argument("sample_time_s must be positive");
  }
  const auto num_steps = static_cast<std::size_t>(std::llround(duration_s / sample_time_s));
  if (num_steps < 1) {
    throw std::invalid_argument("duration_s shorter than one sample period");
  }
  SampledSignal sig;
  sig.sample_time_s = sample_time_s;
  sig.values.resize(num_steps);
  std::vector<double> d1(num_steps);
  std::vector<double> d2(num_steps);
  const double slope = profile.ramp_slope;
  const double shift = profile.lateral_shift;
  const double steep = profile.steepness;
  for (std::size_t k = 0; k < num_steps; ++k) {
    const double t = static_cast<double>(k) * sample_time_s;
    const double u = steep * (t - profile.midpoint_s);
    const double sigmoid = 1.0 / (1.0 + std::exp(-u));
    const double bell = sigmoid * (1.0 - sigmoid);
    sig.values[k] = slope * t + shift * sigmoid;
    d1[k] = slope + shift * steep * bell;
    d2[k] = shift * steep * steep * bell * (1.0 - 2.0 * sigmoid);
  }
  sig.truth_derivatives[1] = std::move(d1);
  sig.truth_derivatives[2] = std::move(d2);
  return sig;
}

}  // namespace numdiff
