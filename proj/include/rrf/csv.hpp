#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <type_traits>
#include <vector>

namespace rrf::csv {

/// Shortest stable text for a double: scientific notation below 1e-3 in magnitude,
/// 12 significant digits otherwise. Output does not depend on the locale.
std::string format_number(double v);

inline std::string cell(double v) { return format_number(v); }
inline std::string cell(const std::string& s) { return s; }
inline std::string cell(const char* s) { return s; }
template <class I>
  requires std::is_integral_v<I>
std::string cell(I v) {
  return std::to_string(v);
}

/// Comma separated rows under a fixed header.
class Writer {
 public:
  Writer(std::ostream& os, std::vector<std::string> header);
  void row(const std::vector<std::string>& cells);

 private:
  std::ostream& os_;
  std::size_t columns_;
};

}  // namespace rrf::csv
