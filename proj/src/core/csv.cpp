#include "core/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>
#include <vector>

#include "core/errors.hpp"

namespace numdiff {

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return fields;
}

double parse_field(const std::string& field, std::size_t line_no) {
  double value = 0.0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  auto res = std::from_chars(first, last, value);
  if (res.ec != std::errc() || res.ptr != last) {
    throw ParseError("CSV parse error at line " + std::to_string(line_no) +
                         ": invalid number '" + field + "'",
                     line_no);
  }
  return value;
}

}  // namespace

void write_signal_csv(const SampledSignal& signal, const std::string& path) {
  signal.validate();
  const bool has_d1 = signal.has_truth(1);
  const bool has_d2 = signal.has_truth(2);
  if (has_d2 && !has_d1) {
    throw std::invalid_argument(
        "cannot serialize a second-derivative truth series without the first");
  }
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot open '" + path + "' for writing");
  }
  out << "t,y";
  if (has_d1) out << ",d1";
  if (has_d2) out << ",d2";
  out << '\n';
  for (std::size_t k = 0; k < signal.size(); ++k) {
    out << format_double(static_cast<double>(k) * signal.sample_time_s) << ','
        << format_double(signal.values[k]);
    if (has_d1) out << ',' << format_double(signal.truth_derivatives.at(1)[k]);
    if (has_d2) out << ',' << format_double(signal.truth_derivatives.at(2)[k]);
    out << '\n';
  }
  if (!out) {
    throw std::runtime_error("write to '" + path + "' failed");
  }
}

SampledSignal read_signal_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open '" + path + "' for reading");
  }
  std::string line;
  std::size_t line_no = 0;

  if (!std::getline(in, line)) {
    throw FormatError("empty file: missing CSV header");
  }
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();

  std::size_t columns = 0;
  if (line == "t,y") {
    columns = 2;
  } else if (line == "t,y,d1") {
    columns = 3;
  } else if (line == "t,y,d1,d2") {
    columns = 4;
  } else {
    throw FormatError("unrecognized CSV header '" + line +
                      "' (expected t,y[,d1,d2])");
  }

  std::vector<double> times;
  SampledSignal sig;
  std::vector<double> d1;
  std::vector<double> d2;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != columns) {
      throw FormatError("CSV format error at line " + std::to_string(line_no) +
                        ": expected " + std::to_string(columns) +
                        " columns, got " + std::to_string(fields.size()));
    }
    times.push_back(parse_field(fields[0], line_no));
    sig.values.push_back(parse_field(fields[1], line_no));
    if (columns >= 3) d1.push_back(parse_field(fields[2], line_no));
    if (columns >= 4) d2.push_back(parse_field(fields[3], line_no));
  }

  if (times.size() >= 2) {
    sig.sample_time_s = times[1] - times[0];
    if (!(sig.sample_time_s > 0.0)) {
      throw FormatError("time column is not strictly increasing");
    }
  } else {
    sig.sample_time_s = 1.0;  // no spacing information in the file
  }
  if (columns >= 3) sig.truth_derivatives[1] = std::move(d1);
  if (columns >= 4) sig.truth_derivatives[2] = std::move(d2);
  return sig;
}

}  // namespace numdiff
