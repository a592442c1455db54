#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "gpsearch/model.hpp"

namespace gpsearch::cli {

enum ExitCode : int {
  kSuccess = 0,
  kVerificationFailure = 1,
  kUsageError = 2,
  kNumericalFailure = 3,
};

/// Parses a positive integer written either literally or as 2^a.
std::int64_t parse_count(const std::string& text);

/// "2^a:2^b" -> every power of two from 2^a to 2^b.
std::vector<std::int64_t> parse_power_range(const std::string& text);

/// "critical", "const:<value>", "const:1/N" or "file:<path>".
GammaPolicy parse_gamma(const std::string& text, std::int64_t n);

/// Runs the command line. Tables go to `out` unless --out is given;
/// diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace gpsearch::cli
