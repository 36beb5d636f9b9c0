#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace numdiff_cli {

struct SignalSpec {
  std::string scenario = "two_tone";  // two_tone | single_tone | maneuver | csv_input
  // two_tone / single_tone
  double amplitude_1 = 1.0;
  double freq_1 = 20.0;  // rad/s
  double amplitude_2 = 1.0;
  double freq_2 = 30.0;
  double sample_time_s = 0.01;
  std::size_t num_steps = 2000;
  // maneuver
  double duration_s = 15.0;
  double ramp_slope = 2.0;
  double lateral_shift = 3.5;
  double steepness = 1.2;
  double midpoint_s = 7.5;
  // csv_input
  std::string path;
};

struct AlgorithmSpec {
  std::string name;
  std::string type;  // bd | sg | hgo | aie
  // sg
  int half_window = 2;
  int poly_degree = 3;
  // hgo
  int order = 2;
  std::vector<double> alphas = {2.0, 1.0};
  double epsilon = 0.2;
  // aie
  std::string mode = "ase";  // nse | sse | ase
  int subsystem_order = 12;
  int filter_length = 25;
  double weight_residual = 1.0;
  double weight_input = 1e-5;
  double weight_coeff = 0.1;
  double process_cov = std::numeric_limits<double>::quiet_NaN();  // fixed V1 scale
  std::optional<double> sensor_var;  // empty = derived from the injected noise
  double sensor_var_scale = 1.0;     // multiplies the derived value
  double eta_lower = 1e-6;
  double eta_upper = 1e2;
  int grid_points = 300;
  bool grid_log = true;
  double alpha = 0.5;
};

struct EtaSweepSpec {
  std::string algorithm;  // name of an aie entry providing the base parameters
  double snr_db = 20.0;
  double eta_lower = 1e-6;
  double eta_upper = 1e2;
  int points = 25;
};

struct ExperimentConfig {
  SignalSpec signal;
  int derivative_order = 1;
  std::vector<double> snr_db;  // empty = clean signal only
  std::vector<std::uint64_t> seeds = {1};
  std::optional<std::size_t> k_f;  // defaults to the last step
  int burn_in = 0;
  std::vector<AlgorithmSpec> algorithms;
  std::optional<EtaSweepSpec> eta_sweep;
  std::string output_dir = "out";
};

// Carries every problem found in a config, one per line, each prefixed with
// the offending field's path.
class ConfigError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

ExperimentConfig load_config(const std::string& path);

int cmd_generate(const ExperimentConfig& config, int jobs);
int cmd_compare(const ExperimentConfig& config, int jobs);
int cmd_eta_sweep(const ExperimentConfig& config, int jobs);
int cmd_differentiate(const ExperimentConfig& config, const std::string& input_csv,
                      const std::string& algorithm_name,
                      const std::string& output_csv);

}  // namespace numdiff_cli
