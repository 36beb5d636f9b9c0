#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <vector>

namespace numdiff {

// Uniformly sampled scalar signal. Truth derivative series, when present,
// are sampled at the same instants and keyed by derivative order (1 or 2).
struct SampledSignal {
  double sample_time_s = 0.0;
  std::vector<double> values;
  std::map<int, std::vector<double>> truth_derivatives;

  std::size_t size() const { return values.size(); }
  bool empty() const { return values.empty(); }
  bool has_truth(int order) const { return truth_derivatives.count(order) > 0; }
  const std::vector<double>& truth(int order) const;

  // Throws std::invalid_argument if sample_time_s <= 0 or a truth series
  // length differs from the sample count.
  void validate() const;
};

struct NoiseSpec {
  // +infinity disables the noise entirely.
  double snr_db = std::numeric_limits<double>::infinity();
  std::uint64_t seed = 0;
};

// Lane-change-like relative position profile: a constant-rate drift plus a
// sigmoid lateral displacement.
struct ManeuverProfile {
  double ramp_slope = 2.0;     // m/s
  double lateral_shift = 3.5;  // m, total displacement across the transition
  double steepness = 1.2;      // 1/s
  double midpoint_s = 7.5;     // s, center of the transition
};

// values[k] = a1*sin(f1*k*Ts) + a2*sin(f2*k*Ts), with analytic first and
// second derivative truth series. Frequencies are in rad/s.
SampledSignal generate_two_tone(double amplitude_1, double freq_1,
                                double amplitude_2, double freq_2,
                                double sample_time_s, std::size_t num_steps);

// Adds white Gaussian noise with amplitude D = rms(values) * 10^(-snr_db/20).
// Identical (signal, spec) pairs produce bit-identical outputs on every
// platform. Truth series are carried through unchanged.
SampledSignal add_noise(const SampledSignal& signal, const NoiseSpec& spec);

SampledSignal generate_maneuver_trajectory(double duration_s,
                                           double sample_time_s,
                                           const ManeuverProfile& profile = {});

double signal_rms(const std::vector<double>& values);

// D = rms * 10^(-snr_db/20); throws std::invalid_argument when the result
// would not be finite and positive.
double noise_amplitude(double clean_rms, double snr_db);

}  // namespace numdiff
