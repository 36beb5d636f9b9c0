#include "numdiff/numdiff.h"

#include <cmath>
#include <cstring>
#include <fstream>
#include <memory>
#include <string>

#include "core/aie.hpp"
#include "core/backward_difference.hpp"
#include "core/csv.hpp"
#include "core/differentiator.hpp"
#include "core/errors.hpp"
#include "core/high_gain_observer.hpp"
#include "core/metrics.hpp"
#include "core/savitzky_golay.hpp"
#include "core/signal.hpp"

struct nd_signal {
  numdiff::SampledSignal sig;
};

struct nd_diff {
  std::unique_ptr<numdiff::Differentiator> impl;
};

struct nd_report {
  numdiff::RmseReport report;
};

namespace {

thread_local std::string t_last_error;

nd_status fail(nd_status code, const char* what) {
  t_last_error = what != nullptr ? what : "unknown error";
  return code;
}

template <typename Fn>
nd_status guarded(Fn&& fn) {
  try {
    fn();
    return ND_OK;
  } catch (const std::invalid_argument& e) {
    return fail(ND_ERR_INVALID_ARGUMENT, e.what());
  } catch (const numdiff::ParseError& e) {
    return fail(ND_ERR_PARSE, e.what());
  } catch (const numdiff::FormatError& e) {
    return fail(ND_ERR_FORMAT, e.what());
  } catch (const numdiff::NumericalError& e) {
    return fail(ND_ERR_NUMERICAL, e.what());
  } catch (const std::ios_base::failure& e) {
    return fail(ND_ERR_IO, e.what());
  } catch (const std::runtime_error& e) {
    // File-level failures in the core surface as plain runtime errors.
    return fail(ND_ERR_IO, e.what());
  } catch (const std::exception& e) {
    return fail(ND_ERR_INTERNAL, e.what());
  }
}

nd_status require(bool ok, const char* what) {
  return ok ? ND_OK : fail(ND_ERR_INVALID_ARGUMENT, what);
}

}  // namespace

extern "C" {

const char* nd_last_error(void) { return t_last_error.c_str(); }

/* ---------------------------------------------------------------- signals */

nd_status nd_signal_two_tone(double amplitude_1, double freq_1, double amplitude_2,
                             double freq_2, double sample_time_s, size_t num_steps,
                             nd_signal** out) {
  if (require(out != nullptr, "out must not be null") != ND_OK) return ND_ERR_INVALID_ARGUMENT;
  return guarded([&] {
    auto handle = std::make_unique<nd_signal>();
    handle->sig = numdiff::generate_two_tone(amplitude_1, freq_1, amplitude_2, freq_2,
                                             sample_time_s, num_steps);
    *out = handle.release();
  });
}

void nd_maneuver_params_init(nd_maneuver_params* params) {
  if (params == nullptr) return;
  const numdiff::ManeuverProfile defaults;
  params->ramp_slope = defaults.ramp_slope;
  params->lateral_shift = defaults.lateral_shift;
  params->steepness = defaults.steepness;
  params->midpoint_s = defaults.midpoint_s;
}

nd_status nd_signal_maneuver(double duration_s, double sample_time_s,
                             const nd_maneuver_params* params, nd_signal** out) {
  if (require(out != nullptr, "out must not be null") != ND_OK) return ND_ERR_INVALID_ARGUMENT;
  return guarded([&] {
    numdiff::ManeuverProfile profile;
    if (params != nullptr) {
      profile.ramp_slope = params->ramp_slope;
      profile.lateral_shift = params->lateral_shift;
      profile.steepness = params->steepness;
      profile.midpoint_s = params->midpoint_s;
    }
    auto handle = std::make_unique<nd_signal>();
    handle->sig = numdiff::generate_maneuver_trajectory(duration_s, sample_time_s, profile);
    *out = handle.release();
  });
}

nd_status nd_signal_from_values(double sample_time_s, const double* values,
                                size_t count, nd_signal** out) {
  if (require(out != nullptr && (values != nullptr || count == 0),
              "null buffer") != ND_OK) {
    return ND_ERR_INVALID_ARGUMENT;
  }
  return guarded([&] {
    auto handle = std::make_unique<nd_signal>();
    handle->sig.sample_time_s = sample_time_s;
    handle->sig.values.assign(values, values + count);
    handle->sig.validate();
    *out = handle.release();
  });
}

nd_status nd_signal_add_noise(const nd_signal* in, double snr_db, uint64_t seed,
                              nd_signal** out) {
  if (require(in != nullptr && out != nullptr, "null signal") != ND_OK) {
    return ND_ERR_INVALID_ARGUMENT;
  }
  return guarded([&] {
    auto handle = std::make_unique<nd_signal>();
    handle->sig = numdiff::add_noise(in->sig, numdiff::NoiseSpec{snr_db, seed});
    *out = handle.release();
  });
}

nd_status nd_signal_read_csv(const char* path, nd_signal** out) {
  if (require(path != nullptr && out != nullptr, "null argument") != ND_OK) {
    return ND_ERR_INVALID_ARGUMENT;
  }
  return guarded([&] {
    auto handle = std::make_unique<nd_signal>();
    handle->sig = numdiff::read_signal_csv(path);
    *out = handle.release();
  });
}

nd_status nd_signal_write_csv(const nd_signal* sig, const char* path) {
  if (require(sig != nullptr && path != nullptr, "null argument") != ND_OK) {
    return ND_ERR_INVALID_ARGUMENT;
  }
  return guarded([&] { numdiff::write_signal_csv(sig->sig, path); });
}

size_t nd_signal_length(const nd_signal* sig) {
  return sig == nullptr ? 0 : sig->sig.size();
}

double nd_signal_sample_time(const nd_signal* sig) {
  return sig == nullptr ? 0.0 : sig->sig.sample_time_s;
}

const double* nd_signal_values(const nd_signal* sig) {
  return sig == nullptr ? nullptr : sig->sig.values.data();
}

const double* nd_signal_truth(const nd_signal* sig, int derivative_order) {
  if (sig == nullptr || !sig->sig.has_truth(derivative_order)) return nullptr;
  return sig->sig.truth(derivative_order).data();
}

double nd_signal_rms(const nd_signal* sig) {
  return sig == nullptr ? 0.0 : numdiff::signal_rms(sig->sig.values);
}

void nd_signal_free(nd_signal* sig) { delete sig; }

/* --------------------------------------------------------- differentiators */

nd_status nd_diff_backward(int derivative_order, double sample_time_s, nd_diff** out) {
  if (require(out != nullptr, "out must not be null") != ND_OK) return ND_ERR_INVALID_ARGUMENT;
  return guarded([&] {
    auto handle = std::make_unique<nd_diff>();
    handle->impl =
        std::make_unique<numdiff::BackwardDifference>(derivative_order, sample_time_s);
    *out = handle.release();
  });
}

nd_status nd_diff_savitzky_golay(int derivative_order, double sample_time_s,
                                 int half_window, int poly_degree, nd_diff** out) {
  if (require(out != nullptr, "out must not be null") != ND_OK) return ND_ERR_INVALID_ARGUMENT;
  return guarded([&] {
    numdiff::SgConfig config;
    config.half_window = half_window;
    config.poly_degree = poly_degree;
    config.derivative_order = derivative_order;
    auto handle = std::make_unique<nd_diff>();
    handle->impl = std::make_unique<numdiff::SavitzkyGolay>(config, sample_time_s);
    *out = handle.release();
  });
}

nd_status nd_diff_high_gain_observer(int derivative_order, double sample_time_s,
                                     int observer_order, const double* alphas,
                                     double epsilon, nd_diff** out) {
  if (require(out != nullptr && alphas != nullptr, "null argument") != ND_OK) {
    return ND_ERR_INVALID_ARGUMENT;
  }
  if (require(observer_order >= 2, "observer_order must be at least 2") != ND_OK) {
    return ND_ERR_INVALID_ARGUMENT;
  }
  return guarded([&] {
    numdiff::HgoConfig config;
    config.order = observer_order;
    config.alphas.assign(alphas, alphas + observer_order);
    config.epsilon = epsilon;
    config.sample_time_s = sample_time_s;
    auto handle = std::make_unique<nd_diff>();
    handle->impl = std::make_unique<numdiff::HighGainObserver>(config, derivative_order);
    *out = handle.release();
  });
}

void nd_aie_params_init(nd_aie_params* params) {
  if (params == nullptr) return;
  params->adaptation = ND_ADAPT_FULL;
  params->subsystem_order = 12;
  params->filter_length = 25;
  params->weight_residual = 1.0;
  params->weight_input = 1e-5;
  params->weight_coeff = 1e-1;
  params->process_cov = NAN;
  params->sensor_var = NAN;
  params->eta_lower = 1e-6;
  params->eta_upper = 1e2;
  params->grid_points = 100;
  params->grid_log = 1;
  params->alpha = 0.5;
}

nd_status nd_diff_aie(int derivative_order, double sample_time_s,
                      const nd_aie_params* params, nd_diff** out) {
  if (require(out != nullptr && params != nullptr, "null argument") != ND_OK) {
    return ND_ERR_INVALID_ARGUMENT;
  }
  return guarded([&] {
    numdiff::RcieConfig rcie = numdiff::RcieConfig::with_scalar_weights(
        params->subsystem_order, params->filter_length, params->weight_residual,
        params->weight_input, params->weight_coeff);

    numdiff::AieVariant variant;
    switch (params->adaptation) {
      case ND_ADAPT_NONE:
        variant.adaptation = numdiff::CovarianceAdaptation::none;
        break;
      case ND_ADAPT_PROCESS:
        variant.adaptation = numdiff::CovarianceAdaptation::process_only;
        break;
      case ND_ADAPT_FULL:
        variant.adaptation = numdiff::CovarianceAdaptation::full;
        break;
      default:
        throw std::invalid_argument("unknown adaptation mode");
    }
    const int n = derivative_order;  // integrator model order equals q
    if (!std::isnan(params->process_cov)) {
      variant.fixed_process_cov =
          params->process_cov * Eigen::MatrixXd::Identity(n, n);
    }
    if (!std::isnan(params->sensor_var)) {
      variant.fixed_sensor_var = params->sensor_var;
    }
    if (params->adaptation != ND_ADAPT_NONE) {
      numdiff::AdaptConfig adapt;
      adapt.eta_lower = params->eta_lower;
      adapt.eta_upper = params->eta_upper;
      adapt.grid_points = params->grid_points;
      adapt.scale = params->grid_log != 0 ? numdiff::GridScale::logarithmic
                                          : numdiff::GridScale::linear;
      adapt.alpha = params->alpha;
      variant.adapt = adapt;
    }
    auto handle = std::make_unique<nd_diff>();
    handle->impl = std::make_unique<numdiff::AieDifferentiator>(
        derivative_order, sample_time_s, std::move(rcie), std::move(variant));
    *out = handle.release();
  });
}

nd_status nd_diff_step(nd_diff* diff, double sample, nd_step_output* out) {
  if (require(diff != nullptr && out != nullptr, "null argument") != ND_OK) {
    return ND_ERR_INVALID_ARGUMENT;
  }
  return guarded([&] {
    const numdiff::StepResult r = diff->impl->step(sample);
    out->has_estimate = r.has_estimate ? 1 : 0;
    out->estimate_step = r.estimate_step;
    out->estimate = r.estimate;
    out->has_residual = r.has_residual ? 1 : 0;
    out->residual = r.residual;
  });
}

nd_status nd_diff_run(nd_diff* diff, const double* samples, size_t count,
                      double* estimates) {
  if (require(diff != nullptr && (samples != nullptr || count == 0) &&
                  (estimates != nullptr || count == 0),
              "null buffer") != ND_OK) {
    return ND_ERR_INVALID_ARGUMENT;
  }
  return guarded([&] {
    const std::vector<double> aligned =
        numdiff::run_aligned(*diff->impl, std::span<const double>(samples, count));
    std::memcpy(estimates, aligned.data(), count * sizeof(double));
  });
}

int nd_diff_delay(const nd_diff* diff) {
  return diff == nullptr ? 0 : diff->impl->delay_steps();
}

int nd_diff_derivative_order(const nd_diff* diff) {
  return diff == nullptr ? 0 : diff->impl->derivative_order();
}

void nd_diff_free(nd_diff* diff) { delete diff; }

/* ----------------------------------------------------------------- metrics */

nd_status nd_relative_rmse(const double* truth, size_t truth_count,
                           const double* estimates, size_t estimate_count,
                           int delay, int burn_in, double* rho) {
  if (require(truth != nullptr && estimates != nullptr && rho != nullptr,
              "null buffer") != ND_OK) {
    return ND_ERR_INVALID_ARGUMENT;
  }
  return guarded([&] {
    const std::vector<double> series = numdiff::relative_rmse(
        std::span<const double>(truth, truth_count),
        std::span<const double>(estimates, estimate_count), delay, burn_in);
    std::memcpy(rho, series.data(), truth_count * sizeof(double));
  });
}

nd_status nd_delay_floor(const double* truth, size_t count, int delay,
                         size_t last_step, double* out) {
  if (require(truth != nullptr && out != nullptr, "null buffer") != ND_OK) {
    return ND_ERR_INVALID_ARGUMENT;
  }
  return guarded([&] {
    *out = numdiff::delay_floor(std::span<const double>(truth, count), delay, last_step);
  });
}

/* ----------------------------------------------------------------- reports */

nd_status nd_report_create(const char* algorithm, int derivative_order, int delay,
                           double snr_db, nd_report** out) {
  if (require(algorithm != nullptr && out != nullptr, "null argument") != ND_OK) {
    return ND_ERR_INVALID_ARGUMENT;
  }
  return guarded([&] {
    auto handle = std::make_unique<nd_report>();
    handle->report.algorithm_name = algorithm;
    handle->report.derivative_order = derivative_order;
    handle->report.delay_steps = delay;
    handle->report.snr_db = snr_db;
    *out = handle.release();
  });
}

nd_status nd_report_set_param(nd_report* report, const char* key, const char* value) {
  if (require(report != nullptr && key != nullptr && value != nullptr,
              "null argument") != ND_OK) {
    return ND_ERR_INVALID_ARGUMENT;
  }
  return guarded([&] { report->report.params[key] = value; });
}

nd_status nd_report_set_rho(nd_report* report, const double* rho, size_t count,
                            int burn_in) {
  if (require(report != nullptr && (rho != nullptr || count == 0),
              "null buffer") != ND_OK) {
    return ND_ERR_INVALID_ARGUMENT;
  }
  return guarded([&] {
    report->report.rho_series.assign(rho, rho + count);
    report->report.burn_in = burn_in;
  });
}

double nd_report_final_rho(const nd_report* report) {
  return report == nullptr ? NAN : report->report.final_rho();
}

nd_status nd_report_write_csv(const nd_report* report, const char* path) {
  if (require(report != nullptr && path != nullptr, "null argument") != ND_OK) {
    return ND_ERR_INVALID_ARGUMENT;
  }
  return guarded([&] { numdiff::write_rho_csv(report->report, path); });
}

nd_status nd_report_write_json(const nd_report* report, const char* path) {
  if (require(report != nullptr && path != nullptr, "null argument") != ND_OK) {
    return ND_ERR_INVALID_ARGUMENT;
  }
  return guarded([&] {
    std::ofstream out(path);
    if (!out) throw std::runtime_error(std::string("cannot open '") + path + "' for writing");
    out << numdiff::summary_json(report->report) << '\n';
    if (!out) throw std::runtime_error(std::string("write to '") + path + "' failed");
  });
}

void nd_report_free(nd_report* report) { delete report; }

}  // extern "C"
