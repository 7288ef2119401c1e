#pragma once

// Text format for homogeneous maps:
//
//   map    := '[' expr (':' expr)+ ']'
//   expr   := term (('+' | '-') term)*
//   term   := factor ('*' factor)*
//   factor := ('+' | '-') factor | atom ('^' integer)?
//   atom   := number | 'i' | 'z' digit+ | '(' expr ')'
//   number := digits ('.' digits)? ('/' digits)? 'i'?
//
// Whitespace is ignored. A map with n components uses variables z0..z(n-1).

#include <spc/core.hpp>
#include <spc/polymap/polynomial.hpp>

#include <cctype>
#include <string>
#include <string_view>
#include <vector>

namespace spc::polymap {

class MapParser {
 public:
  explicit MapParser(std::string_view text) : s_(text) {}

  /// Parses the bracketed component list. The number of variables is the
  /// number of components.
  std::vector<ExactPoly> parse_components() {
    skip();
    expect('[');
    // First pass: count components so variables can be range-checked.
    nvars_ = count_components();
    std::vector<ExactPoly> out;
    out.push_back(expr());
    skip();
    while (peek() == ':') {
      ++pos_;
      out.push_back(expr());
      skip();
    }
    expect(']');
    skip();
    if (pos_ != s_.size()) throw ParseError("trailing characters", pos_);
    if (out.size() < 2) throw ParseError("a map needs at least two components", pos_);
    return out;
  }

  /// Parses a single polynomial in `nvars` variables.
  ExactPoly parse_polynomial(int nvars) {
    nvars_ = nvars;
    ExactPoly p = expr();
    skip();
    if (pos_ != s_.size()) throw ParseError("trailing characters", pos_);
    return p;
  }

 private:
  std::string_view s_;
  std::size_t pos_ = 0;
  int nvars_ = 0;

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  char peek() {
    skip();
    return pos_ < s_.size() ? s_[pos_] : '\0';
  }
  void expect(char c) {
    if (peek() != c) throw ParseError(std::string("expected '") + c + "'", pos_);
    ++pos_;
  }

  int count_components() const {
    int depth = 0, n = 1;
    for (std::size_t i = pos_; i < s_.size(); ++i) {
      const char c = s_[i];
      if (c == '(') ++depth;
      if (c == ')') --depth;
      if (c == ':' && depth == 0) ++n;
      if (c == ']' && depth == 0) break;
    }
    if (n > kMaxVars) throw ParseError("at most " + std::to_string(kMaxVars) + " components supported", pos_);
    return n;
  }

  ExactPoly expr() {
    ExactPoly acc = term();
    for (;;) {
      const char c = peek();
      if (c == '+') {
        ++pos_;
        acc += term();
      } else if (c == '-') {
        ++pos_;
        acc -= term();
      } else {
        return acc;
      }
    }
  }

  ExactPoly term() {
    ExactPoly acc = factor();
    while (peek() == '*') {
      ++pos_;
      acc = acc * factor();
    }
    return acc;
  }

  ExactPoly factor() {
    const char c = peek();
    if (c == '-') {
      ++pos_;
      return -factor();
    }
    if (c == '+') {
      ++pos_;
      return factor();
    }
    ExactPoly base = atom();
    if (peek() == '^') {
      ++pos_;
      skip();
      const std::size_t start = pos_;
      long e = 0;
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
        e = e * 10 + (s_[pos_] - '0');
        if (e > 4096) throw ParseError("exponent too large", start);
        ++pos_;
      }
      if (pos_ == start) throw ParseError("expected integer exponent", pos_);
      base = base.pow(static_cast<int>(e));
    }
    return base;
  }

  Integer digits(std::size_t& count) {
    Integer v = 0;
    count = 0;
    while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
      v = v * 10 + (s_[pos_] - '0');
      ++pos_;
      ++count;
    }
    return v;
  }

  ExactPoly atom() {
    const char c = peek();
    if (c == '(') {
      ++pos_;
      ExactPoly e = expr();
      expect(')');
      return e;
    }
    if (c == 'i') {
      ++pos_;
      return ExactPoly::constant(nvars_, QQi(Rational(0), Rational(1)));
    }
    if (c == 'z') {
      const std::size_t start = pos_;
      ++pos_;
      std::size_t n = 0;
      Integer idx = digits(n);
      if (n == 0) throw ParseError("expected variable index after 'z'", pos_);
      if (idx >= nvars_) throw ParseError("variable out of range for a map with " + std::to_string(nvars_) + " components", start);
      return ExactPoly::variable(nvars_, static_cast<int>(idx));
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      std::size_t n = 0;
      Integer whole = digits(n);
      Rational value(whole);
      if (pos_ < s_.size() && s_[pos_] == '.') {
        ++pos_;
        std::size_t fd = 0;
        Integer frac = digits(fd);
        if (fd == 0 && n == 0) throw ParseError("malformed number", pos_);
        Integer scale = 1;
        for (std::size_t k = 0; k < fd; ++k) scale *= 10;
        value += Rational(frac, scale);
      }
      if (pos_ < s_.size() && s_[pos_] == '/') {
        ++pos_;
        std::size_t dn = 0;
        Integer den = digits(dn);
        if (dn == 0) throw ParseError("expected denominator", pos_);
        if (den == 0) throw ParseError("zero denominator", pos_);
        value /= Rational(den);
      }
      if (pos_ < s_.size() && s_[pos_] == 'i') {
        ++pos_;
        return ExactPoly::constant(nvars_, QQi(Rational(0), value));
      }
      return ExactPoly::constant(nvars_, QQi(value));
    }
    if (c == '\0') throw ParseError("unexpected end of input", pos_);
    throw ParseError(std::string("unexpected character '") + c + "'", pos_);
  }
};

inline ExactPoly parse_polynomial(std::string_view text, int nvars) {
  return MapParser(text).parse_polynomial(nvars);
}

}  // namespace spc::polymap
