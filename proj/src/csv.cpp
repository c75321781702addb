#include "effdim/csv.hpp"

#include "effdim/errors.hpp"

#include <charconv>
#include <cmath>

namespace effdim {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

CsvWriter::CsvWriter(std::ostream &out, std::vector<std::string> header)
    : out_(out), columns_(header.size()) {
  for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << quote(header[i]);
  out_ << "\r\n";
}

void CsvWriter::row(std::initializer_list<Cell> cells) { row(std::vector<Cell>(cells)); }

void CsvWriter::row(const std::vector<Cell> &cells) {
  if (cells.size() != columns_) {
    throw ShapeError("csv: row has " + std::to_string(cells.size()) + " cells, header has " +
                     std::to_string(columns_));
  }
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out_ << ",";
    std::visit(
        [&](const auto &v) {
          using T = std::decay_t<decltype(v)>;
          if constexpr (std::is_same_v<T, double>) {
            out_ << format_double(v);
          } else if constexpr (std::is_same_v<T, long long>) {
            out_ << v;
          } else {
            out_ << quote(v);
          }
        },
        cells[i]);
  }
  out_ << "\r\n";
}

std::string CsvWriter::quote(const std::string &s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
}

} // namespace effdim
