#pragma once

// Homogeneous polynomial self-maps of P^k with exact coefficients, their
// composition with common-factor cancellation, and fast complex evaluation.

#include <spc/core.hpp>
#include <spc/polymap/parser.hpp>
#include <spc/polymap/polynomial.hpp>

#include <string>
#include <string_view>
#include <vector>

namespace spc::polymap {

class HomogeneousMap {
 public:
  HomogeneousMap() = default;

  /// Validates the components; with `reduce` set, divides out their gcd.
  explicit HomogeneousMap(std::vector<ExactPoly> comps, bool reduce = true, Budget* budget = nullptr)
      : comps_(std::move(comps)) {
    if (comps_.size() < 2) throw DomainError("a map needs at least two components");
    const int nv = static_cast<int>(comps_.size());
    for (auto& c : comps_)
      if (c.nvars() != nv) {
        ExactPoly r(nv);
        for (const auto& [m, v] : c.terms()) r.add_term(m, v);
        c = r;
      }
    degree_ = -1;
    bool all_zero = true;
    for (std::size_t i = 0; i < comps_.size(); ++i) {
      const auto& c = comps_[i];
      if (c.is_zero()) continue;
      all_zero = false;
      if (!c.is_homogeneous())
        throw DomainError("component " + std::to_string(i) + " is not homogeneous");
      const int d = c.degree();
      if (degree_ < 0)
        degree_ = d;
      else if (d != degree_)
        throw DomainError("degree mismatch: component " + std::to_string(i) + " has degree " +
                          std::to_string(d) + ", expected " + std::to_string(degree_));
    }
    if (all_zero) throw DomainError("all components are zero");
    if (reduce) reduce_common_factor(budget);
  }

  static HomogeneousMap parse(std::string_view text) {
    return HomogeneousMap(MapParser(text).parse_components());
  }

  static HomogeneousMap identity(int k) {
    std::vector<ExactPoly> c;
    for (int i = 0; i <= k; ++i) c.push_back(ExactPoly::variable(k + 1, i));
    return HomogeneousMap(std::move(c), false);
  }

  int k() const { return static_cast<int>(comps_.size()) - 1; }
  int degree() const { return degree_; }
  const std::vector<ExactPoly>& components() const { return comps_; }
  const ExactPoly& operator[](std::size_t i) const { return comps_[i]; }

  /// Gcd of all components (monic); constant 1 for a reduced map.
  ExactPoly common_factor(Budget* budget = nullptr) const {
    if (coprime_modular(comps_)) return ExactPoly::constant(k() + 1, QQi(1));
    ExactPoly g(k() + 1);
    for (const auto& c : comps_) {
      if (c.is_zero()) continue;
      g = g.is_zero() ? monic(c) : gcd(g, c, budget);
      if (g.is_constant()) break;
    }
    return g;
  }

  std::string to_string() const {
    std::string s = "[";
    for (std::size_t i = 0; i < comps_.size(); ++i) {
      if (i) s += " : ";
      s += polymap::to_string(comps_[i]);
    }
    return s + "]";
  }

  friend bool operator==(const HomogeneousMap& a, const HomogeneousMap& b) { return a.comps_ == b.comps_; }

  std::size_t term_count() const {
    std::size_t n = 0;
    for (const auto& c : comps_) n += c.size();
    return n;
  }

 private:
  std::vector<ExactPoly> comps_;
  int degree_ = 0;

  void reduce_common_factor(Budget* budget) {
    ExactPoly g = common_factor(budget);
    if (g.is_constant()) return;
    for (auto& c : comps_)
      if (!c.is_zero()) c = exact_divide(c, g, budget);
    degree_ -= g.degree();
  }
};

/// f∘g: substitutes the components of g into f and cancels the common factor.
inline HomogeneousMap compose(const HomogeneousMap& f, const HomogeneousMap& g, Budget* budget = nullptr) {
  if (f.k() != g.k()) throw DomainError("compose: dimension mismatch");
  std::vector<ExactPoly> out;
  out.reserve(f.components().size());
  for (const auto& c : f.components()) out.push_back(c.substitute(g.components(), budget));
  return HomogeneousMap(std::move(out), true, budget);
}

/// n-th iterate by repeated composition with f (n >= 1).
inline HomogeneousMap iterate(const HomogeneousMap& f, int n, Budget* budget = nullptr) {
  HomogeneousMap r = f;
  for (int i = 1; i < n; ++i) r = compose(f, r, budget);
  return r;
}

/// Floating-point evaluator of a homogeneous map of P^K (K = 1, 2).
template <int K>
class CompiledMap {
 public:
  struct Term {
    cd coef;
    std::array<int, K + 1> exp;
  };

  CompiledMap() = default;
  explicit CompiledMap(const HomogeneousMap& f) : degree_(f.degree()) {
    if (f.k() != K) throw DomainError("CompiledMap: dimension mismatch");
    for (int i = 0; i <= K; ++i) {
      for (const auto& [m, c] : f[i].terms()) {
        Term t{c.to_complex(), {}};
        for (int v = 0; v <= K; ++v) t.exp[v] = m[v];
        comps_[i].push_back(t);
      }
    }
  }

  int degree() const { return degree_; }

  HPoint<K> operator()(const HPoint<K>& z) const {
    if (degree_ < kSmall) {
      cd pw[K + 1][kSmall];
      for (int v = 0; v <= K; ++v) {
        pw[v][0] = 1.0;
        for (int e = 1; e <= degree_; ++e) pw[v][e] = pw[v][e - 1] * z[v];
      }
      return evaluate(pw);
    }
    std::array<std::vector<cd>, K + 1> pw;
    for (int v = 0; v <= K; ++v) {
      pw[v].resize(degree_ + 1);
      pw[v][0] = 1.0;
      for (int e = 1; e <= degree_; ++e) pw[v][e] = pw[v][e - 1] * z[v];
    }
    return evaluate(pw);
  }

 private:
  static constexpr int kSmall = 16;

  template <class Table>
  HPoint<K> evaluate(const Table& pw) const {
    HPoint<K> out{};
    for (int i = 0; i <= K; ++i) {
      cd s = 0;
      for (const auto& t : comps_[i]) {
        cd m = t.coef;
        for (int v = 0; v <= K; ++v) m *= pw[v][t.exp[v]];
        s += m;
      }
      out[i] = s;
    }
    return out;
  }

 public:

  /// Jacobian dF_i/dz_j at z.
  std::array<std::array<cd, K + 1>, K + 1> jacobian(const HPoint<K>& z) const {
    std::array<std::vector<cd>, K + 1> pw;
    for (int v = 0; v <= K; ++v) {
      pw[v].resize(degree_ + 1);
      pw[v][0] = 1.0;
      for (int e = 1; e <= degree_; ++e) pw[v][e] = pw[v][e - 1] * z[v];
    }
    std::array<std::array<cd, K + 1>, K + 1> J{};
    for (int i = 0; i <= K; ++i)
      for (const auto& t : comps_[i])
        for (int j = 0; j <= K; ++j) {
          if (t.exp[j] == 0) continue;
          cd m = t.coef * static_cast<double>(t.exp[j]);
          for (int v = 0; v <= K; ++v) m *= pw[v][v == j ? t.exp[v] - 1 : t.exp[v]];
          J[i][j] += m;
        }
    return J;
  }

  const std::vector<Term>& component(int i) const { return comps_[i]; }

 private:
  int degree_ = 0;
  std::array<std::vector<Term>, K + 1> comps_;
};

}  // namespace spc::polymap
