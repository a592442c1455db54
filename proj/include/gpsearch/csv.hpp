#pragma once

#include <istream>
#include <ostream>
#include <string>
#include <vector>

namespace gpsearch {

/// Numeric table written as comma-separated text: header row, '.' decimal
/// point, 17 significant digits, LF line endings. Lines starting with '#'
/// are comments.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
  std::vector<std::string> comments;  // written after the rows, without the '#'

  void write(std::ostream& out) const;
  static CsvTable read(std::istream& in);
};

/// Shortest round-trip formatting at 17 significant digits.
std::string format_number(double value);

/// Reads a two-column (t, gamma) schedule; the header row is optional.
std::vector<std::pair<double, double>> read_schedule(std::istream& in);

}  // namespace gpsearch
