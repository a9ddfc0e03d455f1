#include "mechlab/csv.hpp"

#include <charconv>
#include <cmath>

namespace mechlab {

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (x == 0.0) x = 0.0;  // drop the sign of -0
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

namespace {

std::string quote(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

}  // namespace

void CsvWriter::header(const std::vector<std::string>& names) {
  for (const auto& n : names) cell(n);
  end_row();
}

CsvWriter& CsvWriter::cell(const std::string& s) {
  if (!first_) os_ << ',';
  os_ << quote(s);
  first_ = false;
  return *this;
}

CsvWriter& CsvWriter::cell(double x) { return cell(format_number(x)); }
CsvWriter& CsvWriter::cell(int x) { return cell(std::to_string(x)); }
CsvWriter& CsvWriter::cell(bool b) { return cell(std::string(b ? "1" : "0")); }

void CsvWriter::end_row() {
  os_ << '\n';
  first_ = true;
}

}  // namespace mechlab
