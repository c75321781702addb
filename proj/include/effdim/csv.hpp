#pragma once

#include <initializer_list>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

namespace effdim {

/// Shortest decimal that reads back to the same double ('.' separator).
std::string format_double(double v);

/// Minimal RFC-4180 writer with a fixed header.
class CsvWriter {
public:
  using Cell = std::variant<double, long long, std::string>;

  CsvWriter(std::ostream &out, std::vector<std::string> header);

  void row(std::initializer_list<Cell> cells);
  void row(const std::vector<Cell> &cells);

private:
  static std::string quote(const std::string &s);
  std::ostream &out_;
  std::size_t columns_;
};

} // namespace effdim
