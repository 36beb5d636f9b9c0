#include "experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <thread>

#include "numdiff/numdiff.h"

namespace numdiff_cli {
namespace {

using nlohmann::json;

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string fmt(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string snr_tag(double snr) {
  if (std::isinf(snr)) return "clean";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", snr);
  return buf;
}

[[noreturn]] void throw_capi(const std::string& context) {
  throw std::runtime_error(context + ": " + nd_last_error());
}

struct SignalHandle {
  nd_signal* ptr = nullptr;
  SignalHandle() = default;
  explicit SignalHandle(nd_signal* p) : ptr(p) {}
  SignalHandle(SignalHandle&& o) noexcept : ptr(o.ptr) { o.ptr = nullptr; }
  SignalHandle& operator=(SignalHandle&& o) noexcept {
    std::swap(ptr, o.ptr);
    return *this;
  }
  SignalHandle(const SignalHandle&) = delete;
  SignalHandle& operator=(const SignalHandle&) = delete;
  ~SignalHandle() { nd_signal_free(ptr); }
  nd_signal* get() const { return ptr; }
};

struct DiffHandle {
  nd_diff* ptr = nullptr;
  DiffHandle() = default;
  explicit DiffHandle(nd_diff* p) : ptr(p) {}
  DiffHandle(DiffHandle&& o) noexcept : ptr(o.ptr) { o.ptr = nullptr; }
  DiffHandle& operator=(DiffHandle&& o) noexcept {
    std::swap(ptr, o.ptr);
    return *this;
  }
  DiffHandle(const DiffHandle&) = delete;
  DiffHandle& operator=(const DiffHandle&) = delete;
  ~DiffHandle() { nd_diff_free(ptr); }
  nd_diff* get() const { return ptr; }
};

SignalHandle build_clean_signal(const SignalSpec& spec) {
  nd_signal* sig = nullptr;
  if (spec.scenario == "two_tone") {
    if (nd_signal_two_tone(spec.amplitude_1, spec.freq_1, spec.amplitude_2, spec.freq_2,
                           spec.sample_time_s, spec.num_steps, &sig) != ND_OK) {
      throw_capi("two_tone generation failed");
    }
  } else if (spec.scenario == "single_tone") {
    if (nd_signal_two_tone(spec.amplitude_1, spec.freq_1, 0.0, 0.0, spec.sample_time_s,
                           spec.num_steps, &sig) != ND_OK) {
      throw_capi("single_tone generation failed");
    }
  } else if (spec.scenario == "maneuver") {
    nd_maneuver_params params;
    nd_maneuver_params_init(&params);
    params.ramp_slope = spec.ramp_slope;
    params.lateral_shift = spec.lateral_shift;
    params.steepness = spec.steepness;
    params.midpoint_s = spec.midpoint_s;
    if (nd_signal_maneuver(spec.duration_s, spec.sample_time_s, &params, &sig) != ND_OK) {
      throw_capi("maneuver generation failed");
    }
  } else if (spec.scenario == "csv_input") {
    if (nd_signal_read_csv(spec.path.c_str(), &sig) != ND_OK) {
      throw_capi("reading '" + spec.path + "' failed");
    }
  } else {
    throw std::runtime_error("unknown scenario '" + spec.scenario + "'");
  }
  return SignalHandle(sig);
}

// Sensor-noise variance implied by injecting SNR-calibrated noise: the noise
// amplitude is rms * 10^(-snr/20) and its variance the square of that.
double derived_sensor_var(const nd_signal* clean, double snr_db) {
  if (std::isinf(snr_db)) return 0.0;
  const double amplitude = nd_signal_rms(clean) * std::pow(10.0, -snr_db / 20.0);
  return amplitude * amplitude;
}

DiffHandle build_differentiator(const AlgorithmSpec& spec, int derivative_order,
                                double sample_time, double auto_sensor_var) {
  nd_diff* diff = nullptr;
  if (spec.type == "bd") {
    if (nd_diff_backward(derivative_order, sample_time, &diff) != ND_OK) {
      throw_capi(spec.name);
    }
  } else if (spec.type == "sg") {
    if (nd_diff_savitzky_golay(derivative_order, sample_time, spec.half_window,
                               spec.poly_degree, &diff) != ND_OK) {
      throw_capi(spec.name);
    }
  } else if (spec.type == "hgo") {
    if (nd_diff_high_gain_observer(derivative_order, sample_time, spec.order,
                                   spec.alphas.data(), spec.epsilon, &diff) != ND_OK) {
      throw_capi(spec.name);
    }
  } else if (spec.type == "aie") {
    nd_aie_params params;
    nd_aie_params_init(&params);
    params.adaptation = spec.mode == "nse"   ? ND_ADAPT_NONE
                        : spec.mode == "sse" ? ND_ADAPT_PROCESS
                                             : ND_ADAPT_FULL;
    params.subsystem_order = spec.subsystem_order;
    params.filter_length = spec.filter_length;
    params.weight_residual = spec.weight_residual;
    params.weight_input = spec.weight_input;
    params.weight_coeff = spec.weight_coeff;
    params.process_cov = spec.mode == "nse" ? spec.process_cov : kNaN;
    if (spec.mode != "ase") {
      params.sensor_var = spec.sensor_var ? *spec.sensor_var
                                          : spec.sensor_var_scale * auto_sensor_var;
    } else {
      params.sensor_var = kNaN;
    }
    params.eta_lower = spec.eta_lower;
    params.eta_upper = spec.eta_upper;
    params.grid_points = spec.grid_points;
    params.grid_log = spec.grid_log ? 1 : 0;
    params.alpha = spec.alpha;
    if (nd_diff_aie(derivative_order, sample_time, &params, &diff) != ND_OK) {
      throw_capi(spec.name);
    }
  } else {
    throw std::runtime_error(spec.name + ": unknown type '" + spec.type + "'");
  }
  return DiffHandle(diff);
}

std::string sanitize(const std::string& name) {
  std::string out;
  for (char c : name) {
    out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_') ? c : '_';
  }
  return out;
}

struct CellResult {
  std::string algorithm;
  double snr_db = 0.0;
  std::uint64_t seed = 0;
  double final_rho = kNaN;
  bool ok = false;
  std::string error;
};

double median(std::vector<double> values) {
  if (values.empty()) return kNaN;
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

// Runs one (algorithm, snr, seed) cell end to end and writes its per-run
// report files.
CellResult run_cell(const ExperimentConfig& config, const nd_signal* clean,
                    const AlgorithmSpec& spec, double snr, std::uint64_t seed) {
  CellResult result;
  result.algorithm = spec.name;
  result.snr_db = snr;
  result.seed = seed;
  try {
    nd_signal* noisy_raw = nullptr;
    if (nd_signal_add_noise(clean, snr, seed, &noisy_raw) != ND_OK) {
      throw_capi("noise injection failed");
    }
    SignalHandle noisy(noisy_raw);

    const double auto_v2 = derived_sensor_var(clean, snr);
    DiffHandle diff = build_differentiator(spec, config.derivative_order,
                                           nd_signal_sample_time(clean), auto_v2);

    const std::size_t n = nd_signal_length(noisy.get());
    std::vector<double> estimates(n, 0.0);
    if (nd_diff_run(diff.get(), nd_signal_values(noisy.get()), n, estimates.data()) !=
        ND_OK) {
      throw_capi(spec.name + " run failed");
    }

    const double* truth = nd_signal_truth(clean, config.derivative_order);
    if (truth == nullptr) {
      throw std::runtime_error("signal has no truth series for this derivative order");
    }
    const std::size_t last = std::min(config.k_f.value_or(n - 1), n - 1);
    std::vector<double> rho(n, kNaN);
    if (nd_relative_rmse(truth, last + 1, estimates.data(), last + 1,
                         nd_diff_delay(diff.get()), config.burn_in,
                         rho.data()) != ND_OK) {
      throw_capi("metric evaluation failed");
    }
    result.final_rho = rho[last];
    result.ok = true;

    nd_report* report_raw = nullptr;
    if (nd_report_create(spec.name.c_str(), config.derivative_order,
                         nd_diff_delay(diff.get()), snr, &report_raw) != ND_OK) {
      throw_capi("report creation failed");
    }
    std::unique_ptr<nd_report, decltype(&nd_report_free)> report(report_raw,
                                                                 &nd_report_free);
    nd_report_set_rho(report.get(), rho.data(), last + 1, config.burn_in);
    nd_report_set_param(report.get(), "seed", std::to_string(seed).c_str());
    nd_report_set_param(report.get(), "type", spec.type.c_str());
    nd_report_set_param(report.get(), "sample_time_s",
                        fmt(nd_signal_sample_time(clean)).c_str());
    const std::string stem = (std::filesystem::path(config.output_dir) /
                              ("rho_" + sanitize(spec.name) + "_snr" + snr_tag(snr) +
                               "_seed" + std::to_string(seed)))
                                 .string();
    if (nd_report_write_csv(report.get(), (stem + ".csv").c_str()) != ND_OK ||
        nd_report_write_json(report.get(), (stem + ".json").c_str()) != ND_OK) {
      throw_capi("report write failed");
    }
  } catch (const std::exception& e) {
    result.ok = false;
    result.error = e.what();
  }
  return result;
}

// Fixed-order work list processed by a small worker pool; results land at
// their own indices, so the output never depends on scheduling.
template <typename Work>
void run_parallel(std::size_t count, int jobs, Work&& work) {
  const int workers = std::max(1, jobs);
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) work(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      while (true) {
        const std::size_t i = next.fetch_add(1);
        if (i >= count) return;
        work(i);
      }
    });
  }
  for (auto& t : pool) t.join();
}

void write_summaries(const ExperimentConfig& config,
                     const std::vector<CellResult>& cells,
                     const std::vector<std::pair<int, double>>& delay_floors,
                     const std::vector<double>& snr_list) {
  const std::filesystem::path dir(config.output_dir);
  {
    std::ofstream out(dir / "summary.csv");
    out << "algorithm,snr_db,seed,final_rho,status\n";
    for (const auto& cell : cells) {
      out << cell.algorithm << ',' << snr_tag(cell.snr_db) << ',' << cell.seed << ',';
      if (cell.ok && std::isfinite(cell.final_rho)) out << fmt(cell.final_rho);
      out << ',' << (cell.ok ? "ok" : "failed") << '\n';
    }
    for (const auto& [delay, floor] : delay_floors) {
      for (double snr : snr_list) {
        out << "delay_floor_delta" << delay << ',' << snr_tag(snr) << ",,"
            << fmt(floor) << ",ok\n";
      }
    }
  }
  {
    std::ofstream out(dir / "summary_median.csv");
    out << "algorithm,snr_db,median_final_rho\n";
    std::map<std::pair<std::string, double>, std::vector<double>> grouped;
    std::vector<std::pair<std::string, double>> order;
    for (const auto& cell : cells) {
      const auto key = std::make_pair(cell.algorithm, cell.snr_db);
      if (grouped.find(key) == grouped.end()) order.push_back(key);
      if (cell.ok && std::isfinite(cell.final_rho)) grouped[key].push_back(cell.final_rho);
      else grouped[key];
    }
    for (const auto& key : order) {
      const double med = median(grouped[key]);
      out << key.first << ',' << snr_tag(key.second) << ',';
      if (std::isfinite(med)) out << fmt(med);
      out << '\n';
    }
    for (const auto& [delay, floor] : delay_floors) {
      for (double snr : snr_list) {
        out << "delay_floor_delta" << delay << ',' << snr_tag(snr) << ',' << fmt(floor)
            << '\n';
      }
    }
  }
  {
    std::ofstream out(dir / "summary.json");
    out << "[\n";
    bool first = true;
    for (const auto& cell : cells) {
      if (!first) out << ",\n";
      first = false;
      out << "  {\"algorithm\":\"" << cell.algorithm << "\",\"snr_db\":"
          << (std::isfinite(cell.snr_db) ? fmt(cell.snr_db) : "null")
          << ",\"seed\":" << cell.seed << ",\"final_rho\":"
          << (cell.ok && std::isfinite(cell.final_rho) ? fmt(cell.final_rho) : "null")
          << ",\"status\":\"" << (cell.ok ? "ok" : "failed") << "\"}";
    }
    out << "\n]\n";
  }
}

/* ------------------------------------------------------------ validation */

class Checker {
 public:
  void fail(const std::string& path, const std::string& message) {
    problems_.push_back(path + ": " + message);
  }
  bool ok() const { return problems_.empty(); }
  std::string report() const {
    std::string out;
    for (const auto& p : problems_) out += p + "\n";
    return out;
  }

 private:
  std::vector<std::string> problems_;
};

double get_number(const json& node, const std::string& path, const char* key,
                  double fallback, Checker& check) {
  if (!node.contains(key)) return fallback;
  if (!node[key].is_number()) {
    check.fail(path + "." + key, "must be a number");
    return fallback;
  }
  return node[key].get<double>();
}

int get_int(const json& node, const std::string& path, const char* key, int fallback,
            Checker& check) {
  if (!node.contains(key)) return fallback;
  if (!node[key].is_number_integer()) {
    check.fail(path + "." + key, "must be an integer");
    return fallback;
  }
  return node[key].get<int>();
}

std::string get_string(const json& node, const std::string& path, const char* key,
                       const std::string& fallback, Checker& check) {
  if (!node.contains(key)) return fallback;
  if (!node[key].is_string()) {
    check.fail(path + "." + key, "must be a string");
    return fallback;
  }
  return node[key].get<std::string>();
}

AlgorithmSpec parse_algorithm(const json& node, const std::string& path, Checker& check) {
  AlgorithmSpec spec;
  spec.name = get_string(node, path, "name", "", check);
  if (spec.name.empty()) check.fail(path + ".name", "is required");
  spec.type = get_string(node, path, "type", "", check);
  if (spec.type != "bd" && spec.type != "sg" && spec.type != "hgo" && spec.type != "aie") {
    check.fail(path + ".type", "must be one of bd, sg, hgo, aie");
    return spec;
  }
  if (spec.type == "sg") {
    spec.half_window = get_int(node, path, "half_window", spec.half_window, check);
    spec.poly_degree = get_int(node, path, "poly_degree", spec.poly_degree, check);
    if (spec.half_window < 1) check.fail(path + ".half_window", "must be at least 1");
  } else if (spec.type == "hgo") {
    spec.order = get_int(node, path, "order", spec.order, check);
    spec.epsilon = get_number(node, path, "epsilon", spec.epsilon, check);
    if (node.contains("alphas")) {
      if (!node["alphas"].is_array()) {
        check.fail(path + ".alphas", "must be an array of numbers");
      } else {
        spec.alphas.clear();
        for (const auto& a : node["alphas"]) {
          if (!a.is_number()) {
            check.fail(path + ".alphas", "must contain only numbers");
            break;
          }
          spec.alphas.push_back(a.get<double>());
        }
      }
    }
    if (spec.order < 2) check.fail(path + ".order", "must be at least 2");
    if (spec.alphas.size() != static_cast<std::size_t>(spec.order)) {
      check.fail(path + ".alphas", "must hold exactly `order` gains");
    }
    if (!(spec.epsilon > 0)) check.fail(path + ".epsilon", "must be positive");
  } else if (spec.type == "aie") {
    spec.mode = get_string(node, path, "mode", spec.mode, check);
    if (spec.mode != "nse" && spec.mode != "sse" && spec.mode != "ase") {
      check.fail(path + ".mode", "must be one of nse, sse, ase");
    }
    spec.subsystem_order = get_int(node, path, "subsystem_order", spec.subsystem_order, check);
    spec.filter_length = get_int(node, path, "filter_length", spec.filter_length, check);
    spec.weight_residual = get_number(node, path, "weight_residual", spec.weight_residual, check);
    spec.weight_input = get_number(node, path, "weight_input", spec.weight_input, check);
    spec.weight_coeff = get_number(node, path, "weight_coeff", spec.weight_coeff, check);
    spec.eta_lower = get_number(node, path, "eta_lower", spec.eta_lower, check);
    spec.eta_upper = get_number(node, path, "eta_upper", spec.eta_upper, check);
    spec.grid_points = get_int(node, path, "grid_points", spec.grid_points, check);
    spec.alpha = get_number(node, path, "alpha", spec.alpha, check);
    if (node.contains("grid_scale")) {
      const std::string scale = get_string(node, path, "grid_scale", "log", check);
      if (scale == "log") spec.grid_log = true;
      else if (scale == "linear") spec.grid_log = false;
      else check.fail(path + ".grid_scale", "must be 'log' or 'linear'");
    }
    if (node.contains("process_cov")) {
      spec.process_cov = get_number(node, path, "process_cov", kNaN, check);
    }
    if (node.contains("sensor_var")) {
      if (node["sensor_var"].is_number()) {
        spec.sensor_var = node["sensor_var"].get<double>();
      } else if (node["sensor_var"].is_string() &&
                 node["sensor_var"].get<std::string>() == "auto") {
        spec.sensor_var.reset();
      } else {
        check.fail(path + ".sensor_var", "must be a number or \"auto\"");
      }
    }
    spec.sensor_var_scale = get_number(node, path, "sensor_var_scale",
                                       spec.sensor_var_scale, check);
    if (spec.mode == "nse" && std::isnan(spec.process_cov)) {
      check.fail(path + ".process_cov", "is required for mode nse");
    }
    if (spec.subsystem_order < 1) check.fail(path + ".subsystem_order", "must be >= 1");
    if (spec.filter_length < 1) check.fail(path + ".filter_length", "must be >= 1");
    if (!(spec.weight_residual > 0)) check.fail(path + ".weight_residual", "must be positive");
    if (!(spec.weight_input > 0)) check.fail(path + ".weight_input", "must be positive");
    if (!(spec.weight_coeff > 0)) check.fail(path + ".weight_coeff", "must be positive");
    if (spec.mode != "nse") {
      if (!(spec.eta_lower >= 0) || !(spec.eta_upper > spec.eta_lower)) {
        check.fail(path + ".eta_lower", "need 0 <= eta_lower < eta_upper");
      }
      if (spec.grid_points < 1) check.fail(path + ".grid_points", "must be >= 1");
      if (spec.grid_log && !(spec.eta_lower > 0)) {
        check.fail(path + ".eta_lower", "log grid needs eta_lower > 0");
      }
      if (!(spec.alpha >= 0 && spec.alpha <= 1)) {
        check.fail(path + ".alpha", "must lie in [0, 1]");
      }
    }
  }
  return spec;
}

}  // namespace

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'\n");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what() + "\n");
  }

  Checker check;
  ExperimentConfig config;

  if (!doc.contains("scenario") || !doc["scenario"].is_string()) {
    check.fail("scenario", "is required (two_tone | single_tone | maneuver | csv_input)");
  } else {
    config.signal.scenario = doc["scenario"].get<std::string>();
    if (config.signal.scenario != "two_tone" && config.signal.scenario != "single_tone" &&
        config.signal.scenario != "maneuver" && config.signal.scenario != "csv_input") {
      check.fail("scenario", "must be one of two_tone, single_tone, maneuver, csv_input");
    }
  }
  if (doc.contains("signal")) {
    const json& s = doc["signal"];
    if (!s.is_object()) {
      check.fail("signal", "must be an object");
    } else {
      SignalSpec& sig = config.signal;
      sig.amplitude_1 = get_number(s, "signal", "amplitude_1", sig.amplitude_1, check);
      sig.freq_1 = get_number(s, "signal", "freq_1", sig.freq_1, check);
      sig.amplitude_2 = get_number(s, "signal", "amplitude_2", sig.amplitude_2, check);
      sig.freq_2 = get_number(s, "signal", "freq_2", sig.freq_2, check);
      sig.sample_time_s = get_number(s, "signal", "sample_time_s", sig.sample_time_s, check);
      sig.num_steps = static_cast<std::size_t>(
          get_int(s, "signal", "num_steps", static_cast<int>(sig.num_steps), check));
      sig.duration_s = get_number(s, "signal", "duration_s", sig.duration_s, check);
      sig.ramp_slope = get_number(s, "signal", "ramp_slope", sig.ramp_slope, check);
      sig.lateral_shift = get_number(s, "signal", "lateral_shift", sig.lateral_shift, check);
      sig.steepness = get_number(s, "signal", "steepness", sig.steepness, check);
      sig.midpoint_s = get_number(s, "signal", "midpoint_s", sig.midpoint_s, check);
      sig.path = get_string(s, "signal", "path", sig.path, check);
      if (!(sig.sample_time_s > 0)) check.fail("signal.sample_time_s", "must be positive");
      if (config.signal.scenario == "csv_input" && sig.path.empty()) {
        check.fail("signal.path", "is required for csv_input");
      }
    }
  } else if (config.signal.scenario == "csv_input") {
    check.fail("signal.path", "is required for csv_input");
  }

  config.derivative_order = get_int(doc, "", "derivative_order", 1, check);
  if (config.derivative_order != 1 && config.derivative_order != 2) {
    check.fail("derivative_order", "must be 1 or 2");
  }
  if (doc.contains("snr_db")) {
    if (!doc["snr_db"].is_array()) {
      check.fail("snr_db", "must be an array of numbers");
    } else {
      for (const auto& v : doc["snr_db"]) {
        if (!v.is_number()) {
          check.fail("snr_db", "must contain only numbers");
          break;
        }
        config.snr_db.push_back(v.get<double>());
      }
    }
  }
  if (doc.contains("seeds")) {
    if (!doc["seeds"].is_array()) {
      check.fail("seeds", "must be an array of unsigned integers");
    } else {
      config.seeds.clear();
      for (const auto& v : doc["seeds"]) {
        if (!v.is_number_unsigned() && !v.is_number_integer()) {
          check.fail("seeds", "must contain only integers");
          break;
        }
        config.seeds.push_back(v.get<std::uint64_t>());
      }
      if (config.seeds.empty()) check.fail("seeds", "must not be empty");
    }
  }
  if (doc.contains("k_f")) {
    const int kf = get_int(doc, "", "k_f", -1, check);
    if (kf < 1) check.fail("k_f", "must be a positive step index");
    else config.k_f = static_cast<std::size_t>(kf);
  }
  config.burn_in = get_int(doc, "", "burn_in", 0, check);
  if (config.burn_in < 0) check.fail("burn_in", "must be nonnegative");
  config.output_dir = get_string(doc, "", "output_dir", config.output_dir, check);

  if (!doc.contains("algorithms") || !doc["algorithms"].is_array() ||
      doc["algorithms"].empty()) {
    check.fail("algorithms", "must be a non-empty array");
  } else {
    for (std::size_t i = 0; i < doc["algorithms"].size(); ++i) {
      const std::string path_i = "algorithms[" + std::to_string(i) + "]";
      if (!doc["algorithms"][i].is_object()) {
        check.fail(path_i, "must be an object");
        continue;
      }
      config.algorithms.push_back(parse_algorithm(doc["algorithms"][i], path_i, check));
    }
  }

  if (doc.contains("eta_sweep")) {
    const json& e = doc["eta_sweep"];
    if (!e.is_object()) {
      check.fail("eta_sweep", "must be an object");
    } else {
      EtaSweepSpec sweep;
      sweep.algorithm = get_string(e, "eta_sweep", "algorithm", "", check);
      sweep.snr_db = get_number(e, "eta_sweep", "snr_db", sweep.snr_db, check);
      sweep.eta_lower = get_number(e, "eta_sweep", "eta_lower", sweep.eta_lower, check);
      sweep.eta_upper = get_number(e, "eta_sweep", "eta_upper", sweep.eta_upper, check);
      sweep.points = get_int(e, "eta_sweep", "points", sweep.points, check);
      if (sweep.algorithm.empty()) check.fail("eta_sweep.algorithm", "is required");
      if (sweep.points < 1) check.fail("eta_sweep.points", "must be >= 1");
      if (!(sweep.eta_lower > 0) || !(sweep.eta_upper >= sweep.eta_lower)) {
        check.fail("eta_sweep.eta_lower", "need 0 < eta_lower <= eta_upper");
      }
      config.eta_sweep = sweep;
      bool found = false;
      for (const auto& a : config.algorithms) {
        if (a.name == sweep.algorithm && a.type == "aie") found = true;
      }
      if (!found) {
        check.fail("eta_sweep.algorithm", "must name an aie entry in algorithms");
      }
    }
  }

  // Instantiate every algorithm once so module-level invariants (window
  // solvability, Hurwitz gains, weight positivity) are enforced before any
  // run starts.
  if (check.ok()) {
    for (std::size_t i = 0; i < config.algorithms.size(); ++i) {
      try {
        build_differentiator(config.algorithms[i], config.derivative_order,
                             config.signal.sample_time_s, 1.0);
      } catch (const std::exception& e) {
        check.fail("algorithms[" + std::to_string(i) + "]", e.what());
      }
    }
  }

  if (!check.ok()) throw ConfigError(check.report());
  return config;
}

int cmd_generate(const ExperimentConfig& config, int jobs) {
  (void)jobs;
  std::filesystem::create_directories(config.output_dir);
  const SignalHandle clean = build_clean_signal(config.signal);
  const std::filesystem::path dir(config.output_dir);
  if (nd_signal_write_csv(clean.get(), (dir / "clean.csv").string().c_str()) != ND_OK) {
    throw_capi("writing clean.csv failed");
  }
  for (double snr : config.snr_db) {
    for (std::uint64_t seed : config.seeds) {
      nd_signal* noisy_raw = nullptr;
      if (nd_signal_add_noise(clean.get(), snr, seed, &noisy_raw) != ND_OK) {
        throw_capi("noise injection failed");
      }
      SignalHandle noisy(noisy_raw);
      const std::string name =
          "noisy_snr" + snr_tag(snr) + "_seed" + std::to_string(seed) + ".csv";
      if (nd_signal_write_csv(noisy.get(), (dir / name).string().c_str()) != ND_OK) {
        throw_capi("writing " + name + " failed");
      }
    }
  }
  return 0;
}

int cmd_compare(const ExperimentConfig& config, int jobs) {
  std::filesystem::create_directories(config.output_dir);
  const SignalHandle clean = build_clean_signal(config.signal);
  const std::size_t n = nd_signal_length(clean.get());
  if (n == 0) throw std::runtime_error("input signal is empty");
  const double* truth = nd_signal_truth(clean.get(), config.derivative_order);
  if (truth == nullptr) {
    throw std::runtime_error("scenario provides no truth series for derivative order " +
                             std::to_string(config.derivative_order));
  }
  const std::size_t last = std::min(config.k_f.value_or(n - 1), n - 1);

  std::vector<double> snr_list = config.snr_db;
  if (snr_list.empty()) snr_list.push_back(kInf);

  struct Cell {
    const AlgorithmSpec* spec;
    double snr;
    std::uint64_t seed;
  };
  std::vector<Cell> cells;
  for (const auto& spec : config.algorithms) {
    for (double snr : snr_list) {
      for (std::uint64_t seed : config.seeds) {
        cells.push_back({&spec, snr, seed});
      }
    }
  }
  std::vector<CellResult> results(cells.size());
  run_parallel(cells.size(), jobs, [&](std::size_t i) {
    results[i] = run_cell(config, clean.get(), *cells[i].spec, cells[i].snr,
                          cells[i].seed);
  });

  // One delay-floor row per distinct availability delay among the algorithms.
  std::vector<std::pair<int, double>> floors;
  {
    std::vector<int> delays;
    for (const auto& spec : config.algorithms) {
      DiffHandle diff = build_differentiator(spec, config.derivative_order,
                                             nd_signal_sample_time(clean.get()), 1.0);
      const int d = nd_diff_delay(diff.get());
      if (std::find(delays.begin(), delays.end(), d) == delays.end()) delays.push_back(d);
    }
    std::sort(delays.begin(), delays.end());
    for (int d : delays) {
      double floor = kNaN;
      if (d >= 1 && nd_delay_floor(truth, n, d, last, &floor) != ND_OK) {
        throw_capi("delay floor evaluation failed");
      }
      if (d == 0) floor = 0.0;
      floors.emplace_back(d, floor);
    }
  }

  write_summaries(config, results, floors, snr_list);

  int failures = 0;
  for (const auto& r : results) {
    if (!r.ok) {
      ++failures;
      std::cerr << "cell failed: " << r.algorithm << " snr=" << snr_tag(r.snr_db)
                << " seed=" << r.seed << ": " << r.error << "\n";
    }
  }
  return failures == 0 ? 0 : 2;
}

int cmd_eta_sweep(const ExperimentConfig& config, int jobs) {
  if (!config.eta_sweep) {
    throw ConfigError("eta_sweep: section is required for this command\n");
  }
  std::filesystem::create_directories(config.output_dir);
  const EtaSweepSpec& sweep = *config.eta_sweep;
  const AlgorithmSpec* base = nullptr;
  for (const auto& spec : config.algorithms) {
    if (spec.name == sweep.algorithm) base = &spec;
  }
  if (base == nullptr || base->type != "aie") {
    throw ConfigError("eta_sweep.algorithm: must name an aie entry\n");
  }

  const SignalHandle clean = build_clean_signal(config.signal);
  const std::size_t n = nd_signal_length(clean.get());
  if (n == 0) throw std::runtime_error("input signal is empty");
  if (nd_signal_truth(clean.get(), config.derivative_order) == nullptr) {
    throw std::runtime_error("scenario provides no truth series for derivative order " +
                             std::to_string(config.derivative_order));
  }

  std::vector<double> etas;
  for (int i = 0; i < sweep.points; ++i) {
    const double frac = sweep.points == 1
                            ? 0.0
                            : static_cast<double>(i) / (sweep.points - 1);
    etas.push_back(std::exp(std::log(sweep.eta_lower) +
                            frac * (std::log(sweep.eta_upper) - std::log(sweep.eta_lower))));
  }

  struct Cell {
    std::string label;
    AlgorithmSpec spec;
    double eta = kNaN;  // NaN for the adaptive overlays
    std::uint64_t seed = 0;
  };
  std::vector<Cell> cells;
  for (double eta : etas) {
    for (std::uint64_t seed : config.seeds) {
      AlgorithmSpec spec = *base;
      spec.name = "nse_eta" + fmt(eta) + "_seed" + std::to_string(seed);
      spec.mode = "nse";
      spec.process_cov = eta;
      spec.sensor_var.reset();
      spec.sensor_var_scale = 1.0;
      cells.push_back({"nse", spec, eta, seed});
    }
  }
  auto add_overlay = [&](const std::string& label, const std::string& mode,
                         double v2_scale) {
    for (std::uint64_t seed : config.seeds) {
      AlgorithmSpec spec = *base;
      spec.name = label + "_seed" + std::to_string(seed);
      spec.mode = mode;
      spec.process_cov = kNaN;
      spec.sensor_var.reset();
      spec.sensor_var_scale = v2_scale;
      cells.push_back({label, spec, kNaN, seed});
    }
  };
  add_overlay("sse", "sse", 1.0);
  add_overlay("sse_x2", "sse", 2.0);
  add_overlay("ase", "ase", 1.0);

  struct Row {
    std::string label;
    double eta;
    std::uint64_t seed;
    double final_rho;
    bool ok;
  };
  std::vector<Row> rows(cells.size());
  run_parallel(cells.size(), jobs, [&](std::size_t i) {
    CellResult r =
        run_cell(config, clean.get(), cells[i].spec, sweep.snr_db, cells[i].seed);
    rows[i] = {cells[i].label, cells[i].eta, cells[i].seed, r.final_rho, r.ok};
  });

  const std::filesystem::path dir(config.output_dir);
  {
    std::ofstream out(dir / "eta_sweep.csv");
    out << "algorithm,eta,seed,final_rho\n";
    for (const auto& r : rows) {
      out << r.label << ',';
      if (std::isfinite(r.eta)) out << fmt(r.eta);
      out << ',' << r.seed << ',';
      if (r.ok && std::isfinite(r.final_rho)) out << fmt(r.final_rho);
      out << '\n';
    }
  }
  {
    std::ofstream out(dir / "eta_sweep_median.csv");
    out << "algorithm,eta,median_final_rho\n";
    std::map<std::pair<std::string, double>, std::vector<double>> grouped;
    std::vector<std::pair<std::string, double>> order;
    for (const auto& r : rows) {
      const double key_eta = std::isfinite(r.eta) ? r.eta : -1.0;
      const auto key = std::make_pair(r.label, key_eta);
      if (grouped.find(key) == grouped.end()) order.push_back(key);
      if (r.ok && std::isfinite(r.final_rho)) grouped[key].push_back(r.final_rho);
      else grouped[key];
    }
    for (const auto& key : order) {
      out << key.first << ',';
      if (key.second >= 0.0) out << fmt(key.second);
      out << ',';
      const double med = median(grouped[key]);
      if (std::isfinite(med)) out << fmt(med);
      out << '\n';
    }
  }
  int failures = 0;
  for (const auto& r : rows) {
    if (!r.ok) ++failures;
  }
  return failures == 0 ? 0 : 2;
}

int cmd_differentiate(const ExperimentConfig& config, const std::string& input_csv,
                      const std::string& algorithm_name,
                      const std::string& output_csv) {
  const AlgorithmSpec* spec = nullptr;
  for (const auto& a : config.algorithms) {
    if (a.name == algorithm_name) spec = &a;
  }
  if (spec == nullptr) {
    throw ConfigError("algorithms: no entry named '" + algorithm_name + "'\n");
  }
  if (spec->type == "aie" && spec->mode != "ase" && !spec->sensor_var) {
    throw ConfigError("algorithms." + algorithm_name +
                      ".sensor_var: an explicit value is required to differentiate "
                      "an arbitrary signal with mode " + spec->mode + "\n");
  }

  nd_signal* input_raw = nullptr;
  if (nd_signal_read_csv(input_csv.c_str(), &input_raw) != ND_OK) {
    throw std::runtime_error(std::string("reading input failed: ") + nd_last_error());
  }
  SignalHandle input(input_raw);
  const std::size_t n = nd_signal_length(input.get());
  const double sample_time = nd_signal_sample_time(input.get());
  DiffHandle diff = build_differentiator(*spec, config.derivative_order, sample_time, 0.0);
  const int delay = nd_diff_delay(diff.get());

  std::vector<double> estimates(n, kNaN);
  std::vector<double> residuals(n, kNaN);
  bool has_residuals = false;
  const double* values = nd_signal_values(input.get());
  for (std::size_t k = 0; k < n; ++k) {
    nd_step_output out;
    if (nd_diff_step(diff.get(), values[k], &out) != ND_OK) {
      throw std::runtime_error(std::string("step failed: ") + nd_last_error());
    }
    if (out.has_estimate && out.estimate_step >= 0 &&
        static_cast<std::size_t>(out.estimate_step) < n) {
      estimates[static_cast<std::size_t>(out.estimate_step)] = out.estimate;
      if (out.has_residual) {
        residuals[static_cast<std::size_t>(out.estimate_step)] = out.residual;
        has_residuals = true;
      }
    }
  }

  std::ofstream out(output_csv);
  if (!out) throw std::runtime_error("cannot open '" + output_csv + "' for writing");
  out << "k,t,y,d_hat";
  if (has_residuals) out << ",z";
  out << '\n';
  for (std::size_t k = 0; k < n; ++k) {
    out << k << ',' << fmt(static_cast<double>(k) * sample_time) << ',' << fmt(values[k])
        << ',';
    // estimates appear at the step they become available: k = origin + delay
    if (k >= static_cast<std::size_t>(delay) &&
        std::isfinite(estimates[k - static_cast<std::size_t>(delay)])) {
      out << fmt(estimates[k - static_cast<std::size_t>(delay)]);
    }
    if (has_residuals) {
      out << ',';
      if (k >= static_cast<std::size_t>(delay) &&
          std::isfinite(residuals[k - static_cast<std::size_t>(delay)])) {
        out << fmt(residuals[k - static_cast<std::size_t>(delay)]);
      }
    }
    out << '\n';
  }
  return 0;
}

}  // namespace numdiff_cli
