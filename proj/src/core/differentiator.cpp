#include "core/differentiator.hpp"

namespace numdiff {

std::vector<double> run_aligned(Differentiator& diff, std::span<const double> samples) {
  std::vector<double> estimates(samples.size(), 0.0);
  for (double sample : samples) {
    const StepResult out = diff.step(sample);
    if (out.has_estimate && out.estimate_step >= 0 &&
        static_cast<std::size_t>(out.estimate_step) < estimates.size()) {
      estimates[static_cast<std::size_t>(out.estimate_step)] = out.estimate;
    }
  }
  return estimates;
}

}  // namespace numdiff
