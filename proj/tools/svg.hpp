#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "gpsearch/csv.hpp"

namespace gpsearch::cli {

/// Static line chart: column x_column on the horizontal axis, each of
/// y_columns as a polyline.
void write_svg_chart(std::ostream& out, const CsvTable& table, std::size_t x_column,
                     const std::vector<std::size_t>& y_columns, const std::string& title);

}  // namespace gpsearch::cli
