#include "gpsearch/csv.hpp"

#include <charconv>
#include <cstdio>
#include <sstream>

#include "gpsearch/errors.hpp"

namespace gpsearch {
namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

bool parse_double(std::string s, double& out) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.pop_back();
  std::size_t start = s.find_first_not_of(' ');
  if (start == std::string::npos) return false;
  const char* first = s.data() + start;
  const char* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

}  // namespace

std::string format_number(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

void CsvTable::write(std::ostream& out) const {
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << format_number(row[i]);
    out << '\n';
  }
  for (const auto& c : comments) out << '#' << c << '\n';
}

CsvTable CsvTable::read(std::istream& in) {
  CsvTable table;
  std::string line;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.front() == '#') {
      table.comments.push_back(line.substr(1));
      continue;
    }
    auto cells = split(line);
    if (!have_header) {
      table.header = cells;
      have_header = true;
      continue;
    }
    std::vector<double> row(cells.size());
    for (std::size_t i = 0; i < cells.size(); ++i)
      if (!parse_double(cells[i], row[i]))
        throw DomainError("csv", "non-numeric cell '" + cells[i] + "'");
    table.rows.push_back(std::move(row));
  }
  return table;
}

std::vector<std::pair<double, double>> read_schedule(std::istream& in) {
  std::vector<std::pair<double, double>> knots;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    auto cells = split(line);
    double t = 0.0, g = 0.0;
    const bool numeric = cells.size() == 2 && parse_double(cells[0], t) && parse_double(cells[1], g);
    if (!numeric) {
      if (first) {
        first = false;
        continue;  // header
      }
      throw DomainError("schedule", "expected two numeric columns, got '" + line + "'");
    }
    first = false;
    knots.emplace_back(t, g);
  }
  return knots;
}

}  // namespace gpsearch
