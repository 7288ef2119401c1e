#pragma once

// Sparse multivariate polynomials in z0..z3 over Q(i) (exact) or C (floating),
// with the algebra needed for composition and gcd-based degree reduction.

#include <spc/core.hpp>
#include <spc/polymap/field.hpp>

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace spc::polymap {

inline constexpr int kMaxVars = 4;

using Monomial = std::array<int, kMaxVars>;

inline int total_degree(const Monomial& m) {
  int d = 0;
  for (int e : m) d += e;
  return d;
}

namespace detail {
template <class C>
bool is_zero(const C& c) {
  if constexpr (std::is_same_v<C, QQi>)
    return c.is_zero();
  else
    return c == C{};
}
template <class C>
C one() {
  if constexpr (std::is_same_v<C, QQi>)
    return QQi(1);
  else
    return C{1.0};
}
}  // namespace detail

/// Cost guard for exact arithmetic; throws BudgetExceeded when a product would
/// exceed the configured number of term multiplications.
struct Budget {
  std::uint64_t max_term_products = 50'000'000;
  std::uint64_t used = 0;
  void charge(std::uint64_t n) {
    used += n;
    if (used > max_term_products) throw BudgetExceeded("polynomial arithmetic budget exhausted");
  }
};

template <class C>
class Polynomial {
 public:
  using Terms = std::map<Monomial, C, std::greater<>>;  // lex, leading term first

  Polynomial() = default;
  explicit Polynomial(int nvars) : nvars_(nvars) {}

  static Polynomial constant(int nvars, C c) {
    Polynomial p(nvars);
    if (!detail::is_zero(c)) p.terms_[Monomial{}] = std::move(c);
    return p;
  }
  static Polynomial variable(int nvars, int v) {
    Polynomial p(nvars);
    Monomial m{};
    m[v] = 1;
    p.terms_[m] = detail::one<C>();
    return p;
  }
  static Polynomial monomial(int nvars, const Monomial& m, C c) {
    Polynomial p(nvars);
    if (!detail::is_zero(c)) p.terms_[m] = std::move(c);
    return p;
  }

  int nvars() const { return nvars_; }
  const Terms& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  std::size_t size() const { return terms_.size(); }

  bool is_constant() const {
    return terms_.empty() || (terms_.size() == 1 && total_degree(terms_.begin()->first) == 0);
  }

  int degree() const {
    int d = -1;
    for (const auto& [m, c] : terms_) d = std::max(d, total_degree(m));
    return d;
  }

  bool is_homogeneous() const {
    if (terms_.empty()) return true;
    const int d = total_degree(terms_.begin()->first);
    for (const auto& [m, c] : terms_)
      if (total_degree(m) != d) return false;
    return true;
  }

  int degree_in(int v) const {
    int d = -1;
    for (const auto& [m, c] : terms_) d = std::max(d, m[v]);
    return d;
  }

  const Monomial& leading_monomial() const { return terms_.begin()->first; }
  const C& leading_coefficient() const { return terms_.begin()->second; }

  void add_term(const Monomial& m, const C& c) {
    if (detail::is_zero(c)) return;
    auto it = terms_.find(m);
    if (it == terms_.end()) {
      terms_.emplace(m, c);
      return;
    }
    it->second += c;
    if (detail::is_zero(it->second)) terms_.erase(it);
  }

  Polynomial& operator+=(const Polynomial& o) {
    for (const auto& [m, c] : o.terms_) add_term(m, c);
    return *this;
  }
  Polynomial& operator-=(const Polynomial& o) {
    for (const auto& [m, c] : o.terms_) add_term(m, -c);
    return *this;
  }
  Polynomial operator-() const {
    Polynomial r(nvars_);
    for (const auto& [m, c] : terms_) r.terms_.emplace(m, -c);
    return r;
  }
  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }

  Polynomial scaled(const C& s) const {
    Polynomial r(nvars_);
    if (detail::is_zero(s)) return r;
    for (const auto& [m, c] : terms_) r.terms_.emplace(m, c * s);
    return r;
  }

  Polynomial mul(const Polynomial& o, Budget* budget = nullptr) const {
    Polynomial r(std::max(nvars_, o.nvars_));
    if (budget) budget->charge(static_cast<std::uint64_t>(terms_.size()) * o.terms_.size());
    for (const auto& [m1, c1] : terms_)
      for (const auto& [m2, c2] : o.terms_) {
        Monomial m;
        for (int i = 0; i < kMaxVars; ++i) m[i] = m1[i] + m2[i];
        r.add_term(m, c1 * c2);
      }
    return r;
  }
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b) { return a.mul(b); }

  Polynomial pow(int e, Budget* budget = nullptr) const {
    Polynomial r = constant(nvars_, detail::one<C>());
    Polynomial base = *this;
    while (e > 0) {
      if (e & 1) r = r.mul(base, budget);
      e >>= 1;
      if (e) base = base.mul(base, budget);
    }
    return r;
  }

  Polynomial derivative(int v) const {
    Polynomial r(nvars_);
    for (const auto& [m, c] : terms_) {
      if (m[v] == 0) continue;
      Monomial n = m;
      n[v] -= 1;
      C k = c;
      if constexpr (std::is_same_v<C, QQi>)
        k *= QQi(static_cast<long>(m[v]));
      else
        k *= static_cast<double>(m[v]);
      r.add_term(n, k);
    }
    return r;
  }

  /// Substitutes polynomials for the variables.
  Polynomial substitute(const std::vector<Polynomial>& args, Budget* budget = nullptr) const {
    const int nv = args.empty() ? nvars_ : args.front().nvars();
    Polynomial r(nv);
    std::vector<std::vector<Polynomial>> powers(args.size());
    for (std::size_t v = 0; v < args.size(); ++v) powers[v].push_back(constant(nv, detail::one<C>()));
    auto power = [&](int v, int e) -> const Polynomial& {
      auto& cache = powers[v];
      while (static_cast<int>(cache.size()) <= e) cache.push_back(cache.back().mul(args[v], budget));
      return cache[e];
    };
    for (const auto& [m, c] : terms_) {
      Polynomial t = constant(nv, c);
      for (int v = 0; v < nvars_; ++v)
        if (m[v] > 0) t = t.mul(power(v, m[v]), budget);
      r += t;
    }
    return r;
  }

  std::complex<double> eval(const std::complex<double>* z) const {
    std::complex<double> s{};
    for (const auto& [m, c] : terms_) {
      std::complex<double> t;
      if constexpr (std::is_same_v<C, QQi>)
        t = c.to_complex();
      else
        t = c;
      for (int v = 0; v < nvars_; ++v)
        for (int e = 0; e < m[v]; ++e) t *= z[v];
      s += t;
    }
    return s;
  }

  /// Coefficients with respect to variable v: index = power of v.
  std::vector<Polynomial> coefficients_in(int v) const {
    std::vector<Polynomial> out(std::max(0, degree_in(v) + 1), Polynomial(nvars_));
    for (const auto& [m, c] : terms_) {
      Monomial n = m;
      n[v] = 0;
      out[m[v]].terms_.emplace(n, c);
    }
    return out;
  }

  static Polynomial from_coefficients_in(int nvars, int v, const std::vector<Polynomial>& coeffs) {
    Polynomial r(nvars);
    for (std::size_t e = 0; e < coeffs.size(); ++e)
      for (const auto& [m, c] : coeffs[e].terms_) {
        Monomial n = m;
        n[v] = static_cast<int>(e);
        r.add_term(n, c);
      }
    return r;
  }

  friend bool operator==(const Polynomial& a, const Polynomial& b) { return a.terms_ == b.terms_; }

  std::size_t coefficient_bits() const {
    std::size_t b = 0;
    if constexpr (std::is_same_v<C, QQi>)
      for (const auto& [m, c] : terms_) b += c.bits();
    return b;
  }

 private:
  int nvars_ = 0;
  Terms terms_;
};

using ExactPoly = Polynomial<QQi>;
using ComplexPoly = Polynomial<cd>;

inline ComplexPoly to_complex(const ExactPoly& p) {
  ComplexPoly r(p.nvars());
  for (const auto& [m, c] : p.terms()) r.add_term(m, c.to_complex());
  return r;
}

/// Exact division under lex order; throws DomainError if the division is not exact.
template <class C>
Polynomial<C> exact_divide(const Polynomial<C>& a, const Polynomial<C>& b, Budget* budget = nullptr) {
  if (b.is_zero()) throw DomainError("division by zero polynomial");
  Polynomial<C> q(a.nvars());
  Polynomial<C> r = a;
  const Monomial& lb = b.leading_monomial();
  const C& cb = b.leading_coefficient();
  while (!r.is_zero()) {
    const Monomial lr = r.leading_monomial();
    Monomial m;
    for (int i = 0; i < kMaxVars; ++i) {
      m[i] = lr[i] - lb[i];
      if (m[i] < 0) throw DomainError("polynomial division is not exact");
    }
    C c = r.leading_coefficient() / cb;
    auto t = Polynomial<C>::monomial(a.nvars(), m, c);
    q += t;
    r -= t.mul(b, budget);
  }
  return q;
}

/// Makes the leading (lex) coefficient 1.
inline ExactPoly monic(const ExactPoly& p) {
  if (p.is_zero()) return p;
  return p.scaled(QQi(1) / p.leading_coefficient());
}

namespace detail {

inline int main_variable(const ExactPoly& a, const ExactPoly& b) {
  for (int v = kMaxVars - 1; v >= 0; --v)
    if (a.degree_in(v) > 0 || b.degree_in(v) > 0) return v;
  return -1;
}

ExactPoly gcd_rec(const ExactPoly& a, const ExactPoly& b, Budget* budget);

inline ExactPoly content_in(const ExactPoly& p, int v, Budget* budget) {
  auto coeffs = p.coefficients_in(v);
  ExactPoly g(p.nvars());
  for (const auto& c : coeffs) {
    if (c.is_zero()) continue;
    g = g.is_zero() ? monic(c) : gcd_rec(g, c, budget);
    if (g.is_constant()) break;
  }
  return g;
}

/// Pseudo-remainder of a by b in variable v.
inline ExactPoly prem(const ExactPoly& a, const ExactPoly& b, int v, Budget* budget) {
  auto bc = b.coefficients_in(v);
  const int db = static_cast<int>(bc.size()) - 1;
  const ExactPoly& lb = bc.back();
  auto ac = a.coefficients_in(v);
  int da = static_cast<int>(ac.size()) - 1;
  while (da >= db && da >= 0) {
    ExactPoly lead = ac[da];
    for (int i = 0; i <= da; ++i) ac[i] = ac[i].mul(lb, budget);
    for (int i = 0; i <= db; ++i) ac[da - db + i] -= lead.mul(bc[i], budget);
    while (da >= 0 && ac[da].is_zero()) --da;
    ac.resize(std::max(0, da + 1), ExactPoly(a.nvars()));
  }
  return ExactPoly::from_coefficients_in(a.nvars(), v, ac);
}

inline ExactPoly gcd_rec(const ExactPoly& a, const ExactPoly& b, Budget* budget) {
  const int nv = std::max(a.nvars(), b.nvars());
  if (a.is_zero()) return monic(b);
  if (b.is_zero()) return monic(a);
  if (a.is_constant() || b.is_constant()) return ExactPoly::constant(nv, QQi(1));
  const int v = main_variable(a, b);
  if (v < 0) return ExactPoly::constant(nv, QQi(1));
  if (a.degree_in(v) <= 0) return gcd_rec(a, content_in(b, v, budget), budget);
  if (b.degree_in(v) <= 0) return gcd_rec(content_in(a, v, budget), b, budget);

  ExactPoly ca = content_in(a, v, budget);
  ExactPoly cb = content_in(b, v, budget);
  ExactPoly g = gcd_rec(ca, cb, budget);
  ExactPoly p = exact_divide(a, ca, budget);
  ExactPoly q = exact_divide(b, cb, budget);
  if (p.degree_in(v) < q.degree_in(v)) std::swap(p, q);
  while (!q.is_zero() && q.degree_in(v) > 0) {
    ExactPoly r = prem(p, q, v, budget);
    if (!r.is_zero()) r = exact_divide(r, content_in(r, v, budget), budget);
    p = std::move(q);
    q = std::move(r);
  }
  // q is zero (p is the gcd up to content) or a nonzero v-free remainder (coprime).
  ExactPoly h = q.is_zero() ? p : ExactPoly::constant(nv, QQi(1));
  if (!q.is_zero()) return monic(g);
  h = exact_divide(h, content_in(h, v, budget), budget);
  return monic(g.mul(h, budget));
}

}  // namespace detail

/// Monic gcd of two exact polynomials (content/primitive-part recursion, one
/// variable at a time).
inline ExactPoly gcd(const ExactPoly& a, const ExactPoly& b, Budget* budget = nullptr) {
  return detail::gcd_rec(a, b, budget);
}

/// Univariate Euclid over Q(i); coefficients low to high. Returns a monic gcd.
inline std::vector<QQi> univariate_gcd(std::vector<QQi> a, std::vector<QQi> b) {
  auto trim = [](std::vector<QQi>& p) {
    while (!p.empty() && p.back().is_zero()) p.pop_back();
  };
  trim(a);
  trim(b);
  while (!b.empty()) {
    // a mod b
    while (a.size() >= b.size() && !a.empty()) {
      const QQi q = a.back() / b.back();
      const std::size_t shift = a.size() - b.size();
      for (std::size_t i = 0; i < b.size(); ++i) a[shift + i] -= q * b[i];
      a.pop_back();
      trim(a);
    }
    std::swap(a, b);
  }
  if (!a.empty()) {
    const QQi lc = a.back();
    for (auto& c : a) c /= lc;
  }
  return a;
}

/// Coefficients (low to high) of t -> p(a + t b).
inline std::vector<QQi> restrict_to_line(const ExactPoly& p, const std::vector<QQi>& a, const std::vector<QQi>& b) {
  std::vector<ExactPoly> args;
  for (int v = 0; v < p.nvars(); ++v) {
    ExactPoly l = ExactPoly::constant(1, a[v]);
    l += ExactPoly::variable(1, 0).scaled(b[v]);
    args.push_back(l);
  }
  ExactPoly r = p.substitute(args);
  std::vector<QQi> out(std::max(0, r.degree() + 1));
  for (const auto& [m, c] : r.terms()) out[m[0]] = c;
  return out;
}

namespace detail {

/// Arithmetic in Z[i] / (p, i - iota) = F_p with p = 119 * 2^23 + 1.
struct ModP {
  static constexpr std::uint64_t p = 998244353;
  static std::uint64_t mul(std::uint64_t a, std::uint64_t b) { return a * b % p; }
  static std::uint64_t pow(std::uint64_t a, std::uint64_t e) {
    std::uint64_t r = 1;
    for (a %= p; e; e >>= 1, a = mul(a, a))
      if (e & 1) r = mul(r, a);
    return r;
  }
  static std::uint64_t inv(std::uint64_t a) { return pow(a, p - 2); }
  static std::uint64_t iota() { return pow(3, (p - 1) / 4); }  // 3 is a primitive root
  static std::optional<std::uint64_t> reduce(const Rational& q) {
    const Integer P(p);
    const auto d = static_cast<std::uint64_t>(Integer(boost::multiprecision::denominator(q) % P));
    if (d == 0) return std::nullopt;
    Integer n = boost::multiprecision::numerator(q) % P;
    if (n < 0) n += P;
    return mul(static_cast<std::uint64_t>(n), inv(d));
  }
  static std::optional<std::uint64_t> reduce(const QQi& c) {
    auto r = reduce(c.re()), i = reduce(c.im());
    if (!r || !i) return std::nullopt;
    return (*r + mul(*i, iota())) % p;
  }
};

inline std::vector<std::uint64_t> polymod_gcd(std::vector<std::uint64_t> a, std::vector<std::uint64_t> b) {
  using M = ModP;
  auto trim = [](std::vector<std::uint64_t>& v) {
    while (!v.empty() && v.back() == 0) v.pop_back();
  };
  trim(a);
  trim(b);
  while (!b.empty()) {
    const std::uint64_t il = M::inv(b.back());
    while (a.size() >= b.size() && !a.empty()) {
      const std::uint64_t q = M::mul(a.back(), il);
      const std::size_t shift = a.size() - b.size();
      for (std::size_t i = 0; i < b.size(); ++i) a[shift + i] = (a[shift + i] + M::p - M::mul(q, b[i])) % M::p;
      a.pop_back();
      trim(a);
    }
    std::swap(a, b);
  }
  return a;
}

}  // namespace detail

/// Proves that nonzero homogeneous polynomials have no common factor by
/// restricting them to a line t -> a + t b and taking the gcd modulo a prime.
/// If some component keeps its degree modulo p (f_j(b) != 0 mod p), a common
/// factor would survive as a nonconstant common divisor, so a constant gcd
/// is a proof. Returns false when the test is inconclusive.
inline bool coprime_modular(const std::vector<ExactPoly>& comps) {
  using M = detail::ModP;
  if (comps.empty()) return false;
  const int nv = comps.front().nvars();
  const std::uint64_t io = M::iota();
  static const int lines[3][2][4] = {{{3, -5, 7, 2}, {11, 4, -6, 9}},
                                     {{-8, 13, 1, 5}, {2, 17, 23, -3}},
                                     {{29, 6, -19, 7}, {-4, 31, 12, 15}}};
  for (const auto& line : lines) {
    // Gaussian-integer line: coordinates a_v + iota * a_{v+1} and likewise for b.
    std::vector<std::uint64_t> av(nv), bv(nv);
    auto red = [](long v) { return static_cast<std::uint64_t>((v % long(M::p) + long(M::p)) % long(M::p)); };
    for (int v = 0; v < nv; ++v) {
      av[v] = (red(line[0][v]) + M::mul(io, red(line[0][(v + 1) % 4]))) % M::p;
      bv[v] = (red(line[1][v]) + M::mul(io, red(line[1][(v + 2) % 4]))) % M::p;
    }
    std::vector<std::uint64_t> g;
    bool first = true, keeps_degree = false, ok = true;
    for (const auto& c : comps) {
      if (c.is_zero()) continue;
      const int d = c.degree();
      // pw[v][e] = (a_v + t b_v)^e
      std::vector<std::vector<std::vector<std::uint64_t>>> pw(nv);
      for (int v = 0; v < nv; ++v) {
        pw[v].push_back({1});
        for (int e = 1; e <= d; ++e) {
          const auto& prev = pw[v].back();
          std::vector<std::uint64_t> nx(prev.size() + 1, 0);
          for (std::size_t i = 0; i < prev.size(); ++i) {
            nx[i] = (nx[i] + M::mul(prev[i], av[v])) % M::p;
            nx[i + 1] = (nx[i + 1] + M::mul(prev[i], bv[v])) % M::p;
          }
          pw[v].push_back(std::move(nx));
        }
      }
      std::vector<std::uint64_t> r(d + 1, 0);
      for (const auto& [m, coef] : c.terms()) {
        auto cm = M::reduce(coef);
        if (!cm) {
          ok = false;
          break;
        }
        std::vector<std::uint64_t> acc{*cm};
        for (int v = 0; v < nv; ++v) {
          if (m[v] == 0) continue;
          const auto& f = pw[v][m[v]];
          std::vector<std::uint64_t> nx(acc.size() + f.size() - 1, 0);
          for (std::size_t i = 0; i < acc.size(); ++i)
            for (std::size_t j = 0; j < f.size(); ++j) nx[i + j] = (nx[i + j] + M::mul(acc[i], f[j])) % M::p;
          acc = std::move(nx);
        }
        for (std::size_t i = 0; i < acc.size(); ++i) r[i] = (r[i] + acc[i]) % M::p;
      }
      if (!ok) break;
      if (r[d] != 0) keeps_degree = true;
      g = first ? r : detail::polymod_gcd(g, r);
      first = false;
    }
    if (!ok) return false;
    while (!g.empty() && g.back() == 0) g.pop_back();
    if (keeps_degree && g.size() == 1) return true;
  }
  return false;
}

inline const char* variable_name(int v) {
  static const char* names[] = {"z0", "z1", "z2", "z3"};
  return names[v];
}

template <class C>
std::string to_string(const Polynomial<C>& p) {
  if (p.is_zero()) return "0";
  std::ostringstream os;
  bool first = true;
  for (const auto& [m, c] : p.terms()) {
    std::string coef;
    bool negative = false;
    if constexpr (std::is_same_v<C, QQi>) {
      if (c.is_real() && c.re() < 0) {
        negative = true;
        coef = to_string(-c);
      } else {
        coef = to_string(c);
      }
    } else {
      std::ostringstream cs;
      cs.precision(17);
      cs << "(" << c.real() << (c.imag() < 0 ? "-" : "+") << std::abs(c.imag()) << "i)";
      coef = cs.str();
    }
    if (first)
      os << (negative ? "-" : "");
    else
      os << (negative ? " - " : " + ");
    first = false;
    const bool has_vars = total_degree(m) > 0;
    if (!has_vars || coef != "1") {
      os << coef;
      if (has_vars) os << "*";
    }
    bool need_star = false;
    for (int v = 0; v < p.nvars(); ++v) {
      if (m[v] == 0) continue;
      if (need_star) os << "*";
      os << variable_name(v);
      if (m[v] > 1) os << "^" << m[v];
      need_star = true;
    }
  }
  return os.str();
}

}  // namespace spc::polymap
