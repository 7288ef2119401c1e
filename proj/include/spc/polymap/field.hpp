#pragma once

// Exact Gaussian rationals Q(i), the coefficient field of parsed maps.

#include <boost/multiprecision/cpp_int.hpp>

#include <complex>
#include <ostream>
#include <sstream>
#include <string>

namespace spc::polymap {

using Rational = boost::multiprecision::cpp_rational;
using Integer = boost::multiprecision::cpp_int;

class QQi {
 public:
  QQi() = default;
  QQi(long v) : re_(v) {}  // NOLINT(google-explicit-constructor)
  QQi(Rational re) : re_(std::move(re)) {}  // NOLINT
  QQi(Rational re, Rational im) : re_(std::move(re)), im_(std::move(im)) {}

  const Rational& re() const { return re_; }
  const Rational& im() const { return im_; }

  bool is_zero() const { return re_ == 0 && im_ == 0; }
  bool is_real() const { return im_ == 0; }
  bool is_one() const { return re_ == 1 && im_ == 0; }

  QQi operator-() const { return {-re_, -im_}; }
  QQi conj() const { return {re_, -im_}; }
  Rational norm() const { return re_ * re_ + im_ * im_; }

  QQi& operator+=(const QQi& o) {
    re_ += o.re_;
    im_ += o.im_;
    return *this;
  }
  QQi& operator-=(const QQi& o) {
    re_ -= o.re_;
    im_ -= o.im_;
    return *this;
  }
  QQi& operator*=(const QQi& o) {
    if (o.im_ == 0) {
      re_ *= o.re_;
      im_ *= o.re_;
      return *this;
    }
    Rational r = re_ * o.re_ - im_ * o.im_;
    Rational i = re_ * o.im_ + im_ * o.re_;
    re_ = std::move(r);
    im_ = std::move(i);
    return *this;
  }
  QQi& operator/=(const QQi& o) {
    if (o.is_zero()) throw std::domain_error("division by zero in Q(i)");
    if (o.im_ == 0) {
      re_ /= o.re_;
      im_ /= o.re_;
      return *this;
    }
    Rational n = o.norm();
    QQi t = *this;
    t *= o.conj();
    re_ = t.re_ / n;
    im_ = t.im_ / n;
    return *this;
  }

  friend QQi operator+(QQi a, const QQi& b) { return a += b; }
  friend QQi operator-(QQi a, const QQi& b) { return a -= b; }
  friend QQi operator*(QQi a, const QQi& b) { return a *= b; }
  friend QQi operator/(QQi a, const QQi& b) { return a /= b; }
  friend bool operator==(const QQi& a, const QQi& b) { return a.re_ == b.re_ && a.im_ == b.im_; }
  friend bool operator!=(const QQi& a, const QQi& b) { return !(a == b); }

  std::complex<double> to_complex() const {
    return {static_cast<double>(re_), static_cast<double>(im_)};
  }

  /// Total bit size of numerators and denominators; a proxy for arithmetic cost.
  std::size_t bits() const {
    auto b = [](const Rational& q) -> std::size_t {
      auto n = boost::multiprecision::numerator(q);
      auto d = boost::multiprecision::denominator(q);
      std::size_t s = 0;
      if (n != 0) s += boost::multiprecision::msb(abs(n)) + 1;
      if (d != 0) s += boost::multiprecision::msb(d) + 1;
      return s;
    };
    return b(re_) + b(im_);
  }

 private:
  Rational re_{0};
  Rational im_{0};
};

inline std::string to_string(const Rational& q) {
  std::ostringstream os;
  os << q;
  return os.str();
}

/// Prints in a form the map grammar re-reads: `3/10`, `(1/2+3i)`, `2i`.
inline std::string to_string(const QQi& c) {
  if (c.is_real()) return to_string(c.re());
  if (c.re() == 0) {
    if (c.im() == 1) return "i";
    if (c.im() == -1) return "-i";
    return to_string(c.im()) + "i";
  }
  std::string s = "(" + to_string(c.re());
  if (c.im() < 0)
    s += "-" + (c.im() == -1 ? std::string() : to_string(Rational(-c.im()))) + "i)";
  else
    s += "+" + (c.im() == 1 ? std::string() : to_string(c.im())) + "i)";
  return s;
}

inline std::ostream& operator<<(std::ostream& os, const QQi& c) { return os << to_string(c); }

}  // namespace spc::polymap
