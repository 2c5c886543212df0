#include "vmslod/field.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <map>

#include "vmslod/errors.hpp"

namespace vmslod {

namespace {

using Terms = std::vector<std::pair<std::pair<int, int>, double>>;  // (dx,dy)->coef

// Tiny recursive-descent parser for polynomials in x, y over + - * ^ ( ).
class Parser {
 public:
  explicit Parser(const std::string& s) : s_(s) {}

  Terms parse() {
    Terms t = expression();
    skip_ws();
    if (pos_ != s_.size())
      throw ConfigError("field: unexpected character '" + std::string(1, s_[pos_]) +
                        "' at position " + std::to_string(pos_) + " in \"" + s_ + "\"");
    return t;
  }

 private:
  const std::string& s_;
  std::size_t pos_ = 0;

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool eat(char c) {
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  static Terms add(const Terms& a, const Terms& b, double sign) {
    std::map<std::pair<int, int>, double> acc;
    for (const auto& [k, v] : a) acc[k] += v;
    for (const auto& [k, v] : b) acc[k] += sign * v;
    Terms out;
    for (const auto& [k, v] : acc)
      if (v != 0.0) out.push_back({k, v});
    return out;
  }
  static Terms mul(const Terms& a, const Terms& b) {
    std::map<std::pair<int, int>, double> acc;
    for (const auto& [ka, va] : a)
      for (const auto& [kb, vb] : b)
        acc[{ka.first + kb.first, ka.second + kb.second}] += va * vb;
    Terms out;
    for (const auto& [k, v] : acc)
      if (v != 0.0) out.push_back({k, v});
    return out;
  }

  Terms expression() {
    Terms acc;
    double sign = 1.0;
    if (eat('-')) sign = -1.0;
    else eat('+');
    acc = add({}, term(), sign);
    for (;;) {
      if (eat('+')) acc = add(acc, term(), 1.0);
      else if (eat('-')) acc = add(acc, term(), -1.0);
      else return acc;
    }
  }

  Terms term() {
    Terms acc = factor();
    while (eat('*')) acc = mul(acc, factor());
    return acc;
  }

  Terms factor() {
    Terms base = primary();
    if (eat('^')) {
      skip_ws();
      std::size_t start = pos_;
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      if (start == pos_) throw ConfigError("field: exponent must be a nonnegative integer in \"" + s_ + "\"");
      const int p = std::atoi(s_.substr(start, pos_ - start).c_str());
      Terms acc = {{{0, 0}, 1.0}};
      for (int k = 0; k < p; ++k) acc = mul(acc, base);
      return acc;
    }
    return base;
  }

  Terms primary() {
    skip_ws();
    if (pos_ >= s_.size()) throw ConfigError("field: unexpected end of expression in \"" + s_ + "\"");
    const char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      Terms inner = expression();
      if (!eat(')')) throw ConfigError("field: missing ')' in \"" + s_ + "\"");
      return inner;
    }
    if (c == 'x') {
      ++pos_;
      return {{{1, 0}, 1.0}};
    }
    if (c == 'y') {
      ++pos_;
      return {{{0, 1}, 1.0}};
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      char* end = nullptr;
      const double v = std::strtod(s_.c_str() + pos_, &end);
      pos_ = static_cast<std::size_t>(end - s_.c_str());
      return {{{0, 0}, v}};
    }
    throw ConfigError("field: unexpected character '" + std::string(1, c) + "' in \"" + s_ + "\"");
  }
};

}  // namespace

FieldSpec::FieldSpec() : text_("one"), terms_{{1.0, 0, 0}} {}

FieldSpec FieldSpec::parse(const std::string& text) {
  FieldSpec f;
  f.text_ = text;
  f.terms_.clear();
  if (text == "one") {
    f.terms_.push_back({1.0, 0, 0});
    return f;
  }
  if (text == "zero") return f;
  for (const auto& [k, v] : Parser(text).parse()) f.terms_.push_back({v, k.first, k.second});
  return f;
}

double FieldSpec::operator()(double x, double y) const {
  double v = 0.0;
  for (const Term& t : terms_)
    v += t.coefficient * std::pow(x, t.deg_x) * std::pow(y, t.deg_y);
  return v;
}

}  // namespace vmslod
