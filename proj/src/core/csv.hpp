#pragma once

#include <string>

#include "core/signal.hpp"

namespace numdiff {

// Schema: header `t,y`, `t,y,d1` or `t,y,d1,d2`; one row per step, `t` in
// seconds. Doubles are written in their shortest round-trip form, so
// write followed by read is the identity on (sample_time_s, values).
void write_signal_csv(const SampledSignal& signal, const std::string& path);

// Throws ParseError (with the 1-based line number) for malformed numbers and
// FormatError for an unrecognized header or inconsistent column counts.
// A header-only file yields an empty signal.
SampledSignal read_signal_csv(const std::string& path);

// Shortest round-trip decimal form of v ("nan" for NaN).
std::string format_double(double v);

}  // namespace numdiff
