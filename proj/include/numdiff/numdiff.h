/*
 * numdiff - streaming numerical differentiation of noisy sampled signals.
 *
 * C API over opaque handles. Every function that can fail returns an
 * nd_status; on failure nd_last_error() holds a message for the calling
 * thread. Handles are single-owner: one handle must not be used from two
 * threads at once, but distinct handles are fully independent.
 */
#ifndef NUMDIFF_NUMDIFF_H
#define NUMDIFF_NUMDIFF_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define ND_API
#else
#define ND_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum nd_status {
  ND_OK = 0,
  ND_ERR_INVALID_ARGUMENT = 1,
  ND_ERR_PARSE = 2,     /* malformed number in a CSV row */
  ND_ERR_FORMAT = 3,    /* unexpected header or column count */
  ND_ERR_IO = 4,        /* file could not be opened or written */
  ND_ERR_NUMERICAL = 5, /* computation left its valid domain */
  ND_ERR_INTERNAL = 6
} nd_status;

/* Message for the most recent failure on the calling thread. */
ND_API const char* nd_last_error(void);

typedef struct nd_signal nd_signal;
typedef struct nd_diff nd_diff;
typedef struct nd_report nd_report;

/* ---------------------------------------------------------------- signals */

/* values[k] = a1*sin(f1*k*Ts) + a2*sin(f2*k*Ts) with analytic first and
 * second derivative truth series. Frequencies in rad/s. */
ND_API nd_status nd_signal_two_tone(double amplitude_1, double freq_1,
                                    double amplitude_2, double freq_2,
                                    double sample_time_s, size_t num_steps,
                                    nd_signal** out);

typedef struct nd_maneuver_params {
  double ramp_slope;    /* m/s  */
  double lateral_shift; /* m    */
  double steepness;     /* 1/s  */
  double midpoint_s;    /* s    */
} nd_maneuver_params;

ND_API void nd_maneuver_params_init(nd_maneuver_params* params);

/* Lane-change-like relative position profile (ramp plus sigmoid) with
 * analytic truth derivatives. params == NULL uses the defaults. */
ND_API nd_status nd_signal_maneuver(double duration_s, double sample_time_s,
                                    const nd_maneuver_params* params,
                                    nd_signal** out);

ND_API nd_status nd_signal_from_values(double sample_time_s, const double* values,
                                       size_t count, nd_signal** out);

/* Additive white Gaussian noise with amplitude rms(values)*10^(-snr_db/20).
 * snr_db = +infinity returns an identical copy. Equal seeds give
 * bit-identical outputs. Truth series are carried through unchanged. */
ND_API nd_status nd_signal_add_noise(const nd_signal* in, double snr_db,
                                     uint64_t seed, nd_signal** out);

/* CSV schema: header t,y[,d1,d2]; one row per step; t in seconds. */
ND_API nd_status nd_signal_read_csv(const char* path, nd_signal** out);
ND_API nd_status nd_signal_write_csv(const nd_signal* sig, const char* path);

ND_API size_t nd_signal_length(const nd_signal* sig);
ND_API double nd_signal_sample_time(const nd_signal* sig);
ND_API const double* nd_signal_values(const nd_signal* sig);
/* NULL when the signal carries no truth series of that order (1 or 2). */
ND_API const double* nd_signal_truth(const nd_signal* sig, int derivative_order);
ND_API double nd_signal_rms(const nd_signal* sig);
ND_API void nd_signal_free(nd_signal* sig);

/* --------------------------------------------------------- differentiators */

/* First/second backward difference; delay 1 step. */
ND_API nd_status nd_diff_backward(int derivative_order, double sample_time_s,
                                  nd_diff** out);

/* Sliding polynomial fit over 2*half_window+1 samples evaluated at the
 * window center; delay half_window+1 steps. Requires
 * derivative_order <= poly_degree <= 2*half_window. */
ND_API nd_status nd_diff_savitzky_golay(int derivative_order, double sample_time_s,
                                        int half_window, int poly_degree,
                                        nd_diff** out);

/* Discrete-time high-gain observer of the given order (>= 2). alphas holds
 * observer_order gain coefficients; their polynomial must be Hurwitz.
 * Estimates derivative orders 1..observer_order-1; delay 1 step. */
ND_API nd_status nd_diff_high_gain_observer(int derivative_order,
                                            double sample_time_s,
                                            int observer_order,
                                            const double* alphas, double epsilon,
                                            nd_diff** out);

typedef enum nd_adaptation {
  ND_ADAPT_NONE = 0,    /* fixed process covariance and sensor variance */
  ND_ADAPT_PROCESS = 1, /* process covariance searched, sensor variance known */
  ND_ADAPT_FULL = 2     /* both searched online */
} nd_adaptation;

typedef struct nd_aie_params {
  nd_adaptation adaptation;
  int subsystem_order; /* past inputs/residuals in the regressor */
  int filter_length;   /* Markov-parameter window of the refilter */
  double weight_residual;
  double weight_input;
  double weight_coeff; /* coefficient penalty is weight_coeff * identity */
  /* Fixed covariances; NAN = searched (only valid where the adaptation mode
   * searches that quantity). process_cov is a scalar multiple of identity. */
  double process_cov;
  double sensor_var;
  /* Search grid for the process-noise magnitude. */
  double eta_lower;
  double eta_upper;
  int grid_points; /* the grid has grid_points + 1 candidates */
  int grid_log;    /* nonzero = log spacing (needs eta_lower > 0) */
  double alpha;    /* blend between min and max of the positive metric set */
} nd_aie_params;

ND_API void nd_aie_params_init(nd_aie_params* params);

/* Adaptive input estimation against an integrator model; delay 1 step.
 * Residuals are reported through nd_step_output. */
ND_API nd_status nd_diff_aie(int derivative_order, double sample_time_s,
                             const nd_aie_params* params, nd_diff** out);

typedef struct nd_step_output {
  int has_estimate;
  long long estimate_step; /* step index the estimate belongs to */
  double estimate;
  int has_residual;
  double residual;
} nd_step_output;

ND_API nd_status nd_diff_step(nd_diff* diff, double sample, nd_step_output* out);

/* Feeds every sample; estimates land at their own step index in `estimates`
 * (length count), zeros where none was produced. */
ND_API nd_status nd_diff_run(nd_diff* diff, const double* samples, size_t count,
                             double* estimates);

ND_API int nd_diff_delay(const nd_diff* diff);
ND_API int nd_diff_derivative_order(const nd_diff* diff);
ND_API void nd_diff_free(nd_diff* diff);

/* ----------------------------------------------------------------- metrics */

/* Cumulative delay-aware relative RMSE; rho has truth_count entries, NaN
 * below delay+burn_in and while the delayed truth has no energy yet. */
ND_API nd_status nd_relative_rmse(const double* truth, size_t truth_count,
                                  const double* estimates, size_t estimate_count,
                                  int delay, int burn_in, double* rho);

/* Relative RMSE of the truth against its own delayed copy through last_step:
 * the error left to any delayed-but-exact estimator. */
ND_API nd_status nd_delay_floor(const double* truth, size_t count, int delay,
                                size_t last_step, double* out);

/* ----------------------------------------------------------------- reports */

ND_API nd_status nd_report_create(const char* algorithm, int derivative_order,
                                  int delay, double snr_db, nd_report** out);
ND_API nd_status nd_report_set_param(nd_report* report, const char* key,
                                     const char* value);
ND_API nd_status nd_report_set_rho(nd_report* report, const double* rho,
                                   size_t count, int burn_in);
ND_API double nd_report_final_rho(const nd_report* report);
/* CSV with header k,rho; absent entries have an empty rho field. */
ND_API nd_status nd_report_write_csv(const nd_report* report, const char* path);
/* Flat JSON object: name, derivative_order, delay_steps, burn_in, snr_db,
 * final_rho, params. */
ND_API nd_status nd_report_write_json(const nd_report* report, const char* path);
ND_API void nd_report_free(nd_report* report);

#ifdef __cplusplus
}
#endif

#endif /* NUMDIFF_NUMDIFF_H */
