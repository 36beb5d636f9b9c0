#include "core/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "core/csv.hpp"

namespace numdiff {

std::vector<double> relative_rmse(std::span<const double> truth,
                                  std::span<const double> estimates, int delay,
                                  int burn_in) {
  if (delay < 0) throw std::invalid_argument("delay must be nonnegative");
  if (burn_in < 0) throw std::invalid_argument("burn_in must be nonnegative");
  const std::size_t n = truth.size();
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> rho(n, nan);
  if (n == 0) return rho;
  if (n > static_cast<std::size_t>(delay) &&
      estimates.size() < n - static_cast<std::size_t>(delay)) {
    throw std::invalid_argument("estimate sequence too short for this delay");
  }
  const std::size_t start = static_cast<std::size_t>(delay) + static_cast<std::size_t>(burn_in);
  double num = 0.0;
  double den = 0.0;
  for (std::size_t k = start; k < n; ++k) {
    const double err = truth[k] - estimates[k - delay];
    const double ref = truth[k - delay];
    num += err * err;
    den += ref * ref;
    rho[k] = den > 0.0 ? std::sqrt(num / den) : nan;
  }
  return rho;
}

double delay_floor(std::span<const double> truth, int delay, std::size_t last_step) {
  if (delay < 0) throw std::invalid_argument("delay must be nonnegative");
  if (last_step >= truth.size()) {
    throw std::invalid_argument("last_step beyond the truth sequence");
  }
  if (delay > 0 && last_step <= static_cast<std::size_t>(delay)) {
    throw std::invalid_argument("last_step must exceed the delay");
  }
  const auto head = truth.subspan(0, last_step + 1);
  return relative_rmse(head, head, delay).back();
}

double RmseReport::final_rho() const {
  if (rho_series.empty()) return std::numeric_limits<double>::quiet_NaN();
  return rho_series.back();
}

void write_rho_csv(const RmseReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << "k,rho\n";
  const std::size_t start =
      static_cast<std::size_t>(report.delay_steps) + static_cast<std::size_t>(report.burn_in);
  for (std::size_t k = start; k < report.rho_series.size(); ++k) {
    out << k << ',';
    if (std::isfinite(report.rho_series[k])) out << format_double(report.rho_series[k]);
    out << '\n';
  }
  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

namespace {

std::string json_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size() + 2);
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof(buf), "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  return out;
}

std::string json_number(double v) {
  return std::isfinite(v) ? format_double(v) : std::string("null");
}

}  // namespace

std::string summary_json(const RmseReport& report) {
  std::string out = "{";
  out += "\"name\":\"" + json_escape(report.algorithm_name) + "\",";
  out += "\"derivative_order\":" + std::to_string(report.derivative_order) + ",";
  out += "\"delay_steps\":" + std::to_string(report.delay_steps) + ",";
  out += "\"burn_in\":" + std::to_string(report.burn_in) + ",";
  out += "\"snr_db\":" + json_number(report.snr_db) + ",";
  out += "\"final_rho\":" + json_number(report.final_rho()) + ",";
  out += "\"params\":{";
  bool first = true;
  for (const auto& [key, value] : report.params) {
    if (!first) out += ",";
    first = false;
    out += "\"" + json_escape(key) + "\":\"" + json_escape(value) + "\"";
  }
  out += "}}";
  return out;
}

}  // namespace numdiff
