#ifndef VMSLOD_CSV_HPP
#define VMSLOD_CSV_HPP

#include <cstdio>
#include <ostream>
#include <string>

namespace vmslod {

/// Scientific notation with 6 significant digits, '.' decimal point.
inline std::string csv_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.5e", v);
  return buf;
}

/// Minimal CSV emitter: comma separation, LF line endings, one header row.
class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& out) : out_(out) {}

  void header(const std::string& line) { out_ << line << "\n"; }

  CsvWriter& field(const std::string& s) {
    if (!first_) out_ << ",";
    out_ << s;
    first_ = false;
    return *this;
  }
  CsvWriter& field(double v) { return field(csv_number(v)); }
  CsvWriter& field(int v) { return field(std::to_string(v)); }
  void end_row() {
    out_ << "\n";
    first_ = true;
  }

 private:
  std::ostream& out_;
  bool first_ = true;
};

}  // namespace vmslod

#endif
