#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

namespace numdiff {

// Cumulative delay-aware relative RMSE:
//   rho[k] = sqrt( sum_{i=s}^{k} (truth[i] - estimates[i-delay])^2
//                / sum_{i=s}^{k} truth[i-delay]^2 ),   s = delay + burn_in.
// The numerator compares the current truth against the freshest estimate a
// delay-steps-late consumer can hold; the denominator uses the delayed truth.
// Entries below s, and entries whose denominator is still zero, are NaN
// (absent), never zero. Output length equals truth length.
std::vector<double> relative_rmse(std::span<const double> truth,
                                  std::span<const double> estimates, int delay,
                                  int burn_in = 0);

// Relative RMSE of the truth against its own delay-steps-delayed copy through
// last_step: the error any delayed-but-exact estimator is left with.
// Requires last_step > delay for delay >= 1 (delay 0 gives 0).
double delay_floor(std::span<const double> truth, int delay, std::size_t last_step);

struct RmseReport {
  std::string algorithm_name;
  int derivative_order = 1;
  int delay_steps = 0;
  int burn_in = 0;
  double snr_db = 0.0;
  std::vector<double> rho_series;  // aligned to step index, NaN = absent
  std::map<std::string, std::string> params;

  double final_rho() const;
};

// CSV with header `k,rho`; rows start at delay_steps + burn_in; absent
// entries have an empty rho field.
void write_rho_csv(const RmseReport& report, const std::string& path);

// Flat JSON object (name, derivative_order, delay_steps, burn_in, snr_db,
// final_rho, params). Non-finite numbers serialize as null.
std::string summary_json(const RmseReport& report);

}  // namespace numdiff
