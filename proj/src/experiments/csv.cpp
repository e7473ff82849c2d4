#include "rrf/csv.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace rrf::csv {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[48];
  const double a = std::abs(v);
  if (a > 0.0 && a < 1e-3) {
    std::snprintf(buf, sizeof buf, "%.12e", v);
  } else {
    std::snprintf(buf, sizeof buf, "%.12g", v);
  }
  return buf;
}

Writer::Writer(std::ostream& os, std::vector<std::string> header) : os_(os), columns_(header.size()) {
  row(header);
}

void Writer::row(const std::vector<std::string>& cells) {
  if (cells.size() != columns_) throw std::invalid_argument("csv: row width differs from header");
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) os_ << ',';
    os_ << cells[i];
  }
  os_ << '\n';
}

}  // namespace rrf::csv
