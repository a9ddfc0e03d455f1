#pragma once

#include <initializer_list>
#include <ostream>
#include <string>
#include <vector>

namespace mechlab {

// Shortest round-trip decimal, locale independent ("0.1", "-0.8831", "1e-05").
std::string format_number(double x);

class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& os) : os_(os) {}

  void header(const std::vector<std::string>& names);
  CsvWriter& cell(const std::string& s);
  CsvWriter& cell(double x);
  CsvWriter& cell(int x);
  CsvWriter& cell(bool b);
  void end_row();

 private:
  std::ostream& os_;
  bool first_ = true;
};

}  // namespace mechlab
