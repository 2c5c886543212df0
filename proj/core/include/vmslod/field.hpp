#ifndef VMSLOD_FIELD_HPP
#define VMSLOD_FIELD_HPP

#include <string>
#include <vector>

namespace vmslod {

/// Right-hand side specification: the presets "one" and "zero", or a
/// polynomial expression in x and y (e.g. "1 + 2*x*y - y^2"). Polynomials
/// keep the configuration serializable; the original text is preserved for
/// round-tripping.
class FieldSpec {
 public:
  FieldSpec();  // "one"

  static FieldSpec parse(const std::string& text);

  double operator()(double x, double y) const;
  const std::string& text() const { return text_; }

  bool operator==(const FieldSpec& o) const { return text_ == o.text_; }

 private:
  struct Term {
    double coefficient;
    int deg_x;
    int deg_y;
  };
  std::string text_;
  std::vector<Term> terms_;
};

}  // namespace vmslod

#endif
