#pragma once

// Quasi-potentials and (1,1)-currents S = omega + dd^c u.
//
// A potential is a sum of three kinds of terms:
//   Gram terms      w * G_Q                       (exact mean, exact trace)
//   divisor terms   c * ((1/m) log|P(Mz)| - log|z|)  (normalized [P o M = 0])
//   function terms  w * s(z)                      (evaluated pointwise; trace by
//                                                  finite differences)
// Gram and divisor weights are the masses of the corresponding currents; the
// remaining mass 1 - W sits on omega.

#include <spc/core.hpp>
#include <spc/currents/gram.hpp>
#include <spc/geom.hpp>
#include <spc/polymap/map.hpp>
#include <spc/polymap/roots.hpp>

#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

namespace spc::currents {

/// Homogeneous complex polynomial in K+1 variables, flattened for evaluation.
template <int K>
struct FlatPoly {
  struct Term {
    cd coef;
    std::array<int, K + 1> exp;
  };
  std::vector<Term> terms;
  int degree = 0;

  FlatPoly() = default;
  explicit FlatPoly(const polymap::ComplexPoly& p) : degree(p.degree()) {
    if (p.is_zero()) throw DomainError("zero polynomial");
    if (!p.is_homogeneous()) throw DomainError("polynomial must be homogeneous");
    for (const auto& [m, c] : p.terms()) {
      Term t{c, {}};
      for (int v = 0; v <= K; ++v) t.exp[v] = m[v];
      terms.push_back(t);
    }
  }
  explicit FlatPoly(const polymap::ExactPoly& p) : FlatPoly(polymap::to_complex(p)) {}

  cd operator()(const HPoint<K>& z) const {
    cd s = 0;
    for (const auto& t : terms) {
      cd m = t.coef;
      for (int v = 0; v <= K; ++v)
        for (int e = 0; e < t.exp[v]; ++e) m *= z[v];
      s += m;
    }
    return s;
  }
};

/// Coefficients c_j of t^j in p(s u + t v) at s = 1, from values on roots of unity.
template <int K, class Fn>
std::vector<cd> binary_restriction(Fn&& p, int m, const HPoint<K>& u, const HPoint<K>& v) {
  const int n = m + 1;
  std::vector<cd> vals(n), c(n, 0.0);
  for (int k = 0; k < n; ++k) {
    const cd t = std::polar(1.0, 2 * kPi * k / n);
    HPoint<K> z;
    for (int i = 0; i <= K; ++i) z[i] = u[i] + t * v[i];
    vals[k] = p(z);
  }
  for (int j = 0; j < n; ++j) {
    for (int k = 0; k < n; ++k) c[j] += vals[k] * std::polar(1.0, -2 * kPi * double(j) * k / n);
    c[j] /= double(n);
  }
  return c;
}

/// Zeros of a binary form of degree m given by its t-coefficients, as
/// coefficient pairs (s, t) of unit norm, with multiplicity; also returns the
/// Fubini-Study mean of (1/m) log|p(s,t)| - log|(s,t)|.
inline std::vector<std::array<cd, 2>> binary_zeros(const std::vector<cd>& c, int m, double* mean) {
  double cmax = 0;
  for (const auto& x : c) cmax = std::max(cmax, std::abs(x));
  if (cmax == 0) throw DomainError("binary form vanishes identically on the line");
  int top = m;
  while (top > 0 && std::abs(c[top]) <= 1e-13 * cmax) --top;
  std::vector<cd> poly(c.begin(), c.begin() + top + 1);
  const auto roots = polymap::univariate_roots(poly);
  std::vector<std::array<cd, 2>> out;
  double acc = std::log(std::abs(c[top]));
  for (const auto& r : roots) {
    const double nr = std::sqrt(1 + std::norm(r));
    out.push_back({cd(1.0 / nr), r / nr});
    acc += std::log(nr);
  }
  for (int j = top; j < m; ++j) out.push_back({cd(0.0), cd(1.0)});
  if (mean) *mean = acc / m - 0.5;
  return out;
}

/// Normalized divisor term c * [P(Mz) = 0] / m.
template <int K>
struct DivisorTerm {
  double weight = 1.0;
  FlatPoly<K> P;
  Mat<K> M = Mat<K>::Identity();
  double mean = 0;

  int degree() const { return P.degree; }

  double value(const HPoint<K>& z) const {
    const HPoint<K> y = Automorphism<K>::mul(M, z);
    return std::log(std::abs(P(y))) / P.degree - 0.5 * std::log(norm2<K>(z));
  }

  /// Restriction to the projective line spanned by orthonormal u, v.
  std::vector<cd> restricted(const HPoint<K>& u, const HPoint<K>& v) const {
    return binary_restriction<K>([&](const HPoint<K>& z) { return P(Automorphism<K>::mul(M, z)); }, P.degree, u, v);
  }
};

/// Lines of P^2 spread by Fubini-Study quadrature on the dual plane.
inline std::vector<std::pair<HPoint<2>, double>> dual_lines(int n_radial, int n_angle) {
  std::vector<std::pair<HPoint<2>, double>> out;
  const auto q = fs_quadrature<2>(n_radial, n_angle);
  for (std::size_t i = 0; i < q.size(); ++i) out.emplace_back(q.points[i], q.weights[i]);
  return out;
}

template <int K>
double divisor_mean(const DivisorTerm<K>& d) {
  if constexpr (K == 1) {
    double mean;
    binary_zeros(d.restricted({1.0, 0.0}, {0.0, 1.0}), d.degree(), &mean);
    return mean;
  } else {
    // omega^2 is the average over lines of omega restricted to the line.
    double s = 0;
    for (const auto& [l, w] : dual_lines(10, 12)) {
      const auto [u, v] = line_basis(l);
      double mean;
      binary_zeros(d.restricted(u, v), d.degree(), &mean);
      s += w * mean;
    }
    return s;
  }
}

template <int K>
DivisorTerm<K> make_divisor(const FlatPoly<K>& P, double weight, const Mat<K>& M = Mat<K>::Identity()) {
  DivisorTerm<K> d;
  d.weight = weight;
  d.P = P;
  d.M = M;
  d.mean = divisor_mean<K>(d);
  return d;
}

/// Generic potential term s, homogeneous of degree 0 in z.
template <int K>
struct FunctionTerm {
  double weight = 1.0;
  std::function<double(const HPoint<K>&)> fn;
  std::string label;
  std::shared_ptr<const double> mean_cache;  // mean of fn (unweighted)

  double value(const HPoint<K>& z) const { return weight * fn(z); }
};

/// Quadrature resolution used for the means of function terms.
template <int K>
const PointCloud<K>& mean_quadrature() {
  static const PointCloud<K> q = K == 1 ? fs_quadrature<K>(64, 128) : fs_quadrature<K>(14, 18);
  return q;
}

template <int K>
FunctionTerm<K> make_function(std::function<double(const HPoint<K>&)> fn, std::string label, double weight = 1.0) {
  FunctionTerm<K> t;
  t.weight = weight;
  t.fn = std::move(fn);
  t.label = std::move(label);
  const auto& q = mean_quadrature<K>();
  t.mean_cache = std::make_shared<const double>(q.integrate(t.fn));
  return t;
}

template <int K>
struct QuasiPotential {
  std::vector<GramTerm<K>> gram;
  std::vector<DivisorTerm<K>> divisors;
  std::vector<FunctionTerm<K>> functions;
  double constant = 0;

  /// Mass carried by omega itself.
  double background() const {
    double w = 0;
    for (const auto& g : gram) w += g.weight;
    for (const auto& d : divisors) w += d.weight;
    return 1 - w;
  }

  double operator()(const HPoint<K>& z) const {
    double s = constant;
    for (const auto& g : gram) s += g.weight * g.value(z);
    for (const auto& d : divisors) s += d.weight * d.value(z);
    for (const auto& f : functions) s += f.value(z);
    return s;
  }

  /// Sum of the function terms only.
  double function_part(const HPoint<K>& z) const {
    double s = 0;
    for (const auto& f : functions) s += f.value(z);
    return s;
  }

  /// <u, omega^K>.
  double mean() const {
    double s = constant;
    for (const auto& g : gram) s += g.weight * g.mean;
    for (const auto& d : divisors) s += d.weight * d.mean;
    for (const auto& f : functions) s += f.weight * *f.mean_cache;
    return s;
  }

  std::size_t term_count() const { return gram.size() + divisors.size() + functions.size(); }

  QuasiPotential scaled(double t) const {
    QuasiPotential r = *this;
    r.constant *= t;
    for (auto& g : r.gram) g.weight *= t;
    for (auto& d : r.divisors) d.weight *= t;
    for (auto& f : r.functions) f.weight *= t;
    return r;
  }

  void append(const QuasiPotential& o) {
    constant += o.constant;
    gram.insert(gram.end(), o.gram.begin(), o.gram.end());
    divisors.insert(divisors.end(), o.divisors.begin(), o.divisors.end());
    functions.insert(functions.end(), o.functions.begin(), o.functions.end());
  }
};

enum class Provenance { fubini_study, divisor, smooth, regularized, green, pullback, mixture };

inline const char* to_string(Provenance p) {
  switch (p) {
    case Provenance::fubini_study:
      return "fubini-study";
    case Provenance::divisor:
      return "divisor";
    case Provenance::smooth:
      return "smooth";
    case Provenance::regularized:
      return "regularized";
    case Provenance::green:
      return "green";
    case Provenance::pullback:
      return "pullback";
    case Provenance::mixture:
      return "mixture";
  }
  return "?";
}

/// Mass-one positive closed (1,1)-current omega + dd^c u on P^K.
template <int K>
struct Current11 {
  QuasiPotential<K> u;
  Provenance tag = Provenance::fubini_study;

  static Current11 fubini_study() { return {}; }

  /// Normalized hyperplane [l . z = 0] (a point mass when K = 1).
  static Current11 hyperplane(const HPoint<K>& l) {
    Current11 s;
    s.u.gram.push_back(GramTerm<K>::hyperplane(l));
    s.tag = Provenance::divisor;
    return s;
  }

  /// Dirac mass at a point of P^1.
  static Current11 point(const HPoint<1>& a)
    requires(K == 1)
  {
    return hyperplane(HPoint<1>{-a[1], a[0]});
  }

  /// omega + dd^c G_Q; smooth when Q is positive definite.
  static Current11 gram(const RowFactor<K>& B) {
    Current11 s;
    s.u.gram.push_back(GramTerm<K>::from_factor(B));
    s.tag = B.rows() == K + 1 ? Provenance::smooth : Provenance::divisor;
    return s;
  }

  /// [P = 0] / deg P.
  static Current11 divisor(const FlatPoly<K>& P) {
    Current11 s;
    s.u.divisors.push_back(make_divisor<K>(P, 1.0));
    s.tag = Provenance::divisor;
    return s;
  }

  /// omega + dd^c s for a function s with dd^c s >= -omega.
  static Current11 from_function(std::function<double(const HPoint<K>&)> fn, std::string label,
                                 Provenance tag = Provenance::smooth) {
    Current11 s;
    s.u.functions.push_back(make_function<K>(std::move(fn), std::move(label)));
    s.tag = tag;
    return s;
  }

  double potential(const HPoint<K>& z) const { return u(z); }
};

/// sum t_i S_i with t_i >= 0 summing to 1.
template <int K>
Current11<K> mixture(const std::vector<std::pair<double, Current11<K>>>& parts) {
  double total = 0;
  Current11<K> r;
  for (const auto& [t, s] : parts) {
    if (t < 0) throw DomainError("mixture weights must be nonnegative");
    total += t;
    r.u.append(s.u.scaled(t));
  }
  if (std::abs(total - 1) > 1e-12) throw DomainError("mixture weights must sum to 1");
  r.tag = parts.size() == 1 ? parts.front().second.tag : Provenance::mixture;
  return r;
}

/// Quasi-potential of tau_*(omega + dd^c u): u o tau^{-1} + log(|A^{-1}z|/|z|).
template <int K>
QuasiPotential<K> pushforward_potential(const Automorphism<K>& tau, const QuasiPotential<K>& u) {
  if (tau.is_identity(0.0)) return u;
  const Mat<K>& Ainv = tau.inverse;
  if (!Ainv.allFinite()) throw DomainError("invalid automorphism");
  QuasiPotential<K> r;
  r.constant = u.constant;
  for (const auto& g : u.gram) r.gram.push_back(g.transported(Ainv));
  for (const auto& d : u.divisors) r.divisors.push_back(make_divisor<K>(d.P, d.weight, Mat<K>(d.M * Ainv)));
  const double bg = u.background();
  if (bg > 1e-15) {
    RowFactor<K> B = Ainv;
    r.gram.push_back(GramTerm<K>::from_factor(B, bg));
  }
  for (const auto& f : u.functions) {
    auto fn = f.fn;
    r.functions.push_back(make_function<K>(
        [fn, Ainv](const HPoint<K>& z) {
          const HPoint<K> y = Automorphism<K>::mul(Ainv, z);
          return fn(y);
        },
        f.label + "@tau", f.weight));
  }
  return r;
}

template <int K>
Current11<K> pushforward(const Automorphism<K>& tau, const Current11<K>& S) {
  return {pushforward_potential<K>(tau, S.u), S.tag};
}

}  // namespace spc::currents
