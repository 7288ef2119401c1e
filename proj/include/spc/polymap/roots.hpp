#pragma once

// Numerical root finding: univariate polynomials (companion matrix + Newton
// polish), fibers of maps of P^1, and square homogeneous systems on P^2 by
// total-degree homotopy continuation in a random affine patch.

#include <spc/core.hpp>
#include <spc/geom.hpp>
#include <spc/polymap/map.hpp>

#include <Eigen/Dense>

#include <random>
#include <vector>

namespace spc::polymap {

/// Roots of sum_j c[j] t^j (leading coefficient c.back() must be nonzero).
inline std::vector<cd> univariate_roots(std::vector<cd> c) {
  while (c.size() > 1 && c.back() == cd(0)) c.pop_back();
  const int n = static_cast<int>(c.size()) - 1;
  std::vector<cd> roots;
  if (n <= 0) return roots;
  if (n == 1) return {-c[0] / c[1]};
  if (n == 2) {
    const cd a = c[2], b = c[1], cc = c[0];
    const cd disc = std::sqrt(b * b - 4.0 * a * cc);
    // Avoid cancellation.
    const cd q = (std::real(std::conj(b) * disc) >= 0) ? -0.5 * (b + disc) : -0.5 * (b - disc);
    if (q == cd(0)) return {0.0, 0.0};
    return {q / a, cc / q};
  }
  Eigen::MatrixXcd comp = Eigen::MatrixXcd::Zero(n, n);
  for (int i = 1; i < n; ++i) comp(i, i - 1) = 1.0;
  for (int i = 0; i < n; ++i) comp(i, n - 1) = -c[i] / c[n];
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(comp, false);
  for (int i = 0; i < n; ++i) roots.push_back(es.eigenvalues()(i));
  // Newton polish.
  for (auto& r : roots) {
    for (int it = 0; it < 3; ++it) {
      cd p = c[n], dp = 0;
      for (int j = n - 1; j >= 0; --j) {
        dp = dp * r + p;
        p = p * r + c[j];
      }
      if (dp == cd(0)) break;
      const cd step = p / dp;
      r -= step;
      if (std::abs(step) < 1e-15 * (1 + std::abs(r))) break;
    }
  }
  return roots;
}

/// Preimages of the point b under a map of P^1, with multiplicity, as unit
/// vectors. Solves b0 F1 - b1 F0 = 0 in a chart chosen away from the roots.
inline std::vector<HPoint<1>> fiber_p1(const CompiledMap<1>& F, const HPoint<1>& b) {
  const int d = F.degree();
  // G(z) = b0 F1(z) - b1 F0(z), expanded in z1/z0 and in z0/z1.
  std::vector<cd> g(d + 1, 0.0);  // coefficient of z0^(d-j) z1^j
  for (int i = 0; i < 2; ++i) {
    const cd w = (i == 1) ? b[0] : -b[1];
    for (const auto& t : F.component(i)) g[t.exp[1]] += w * t.coef;
  }
  double gmax = 0;
  for (const auto& c : g) gmax = std::max(gmax, std::abs(c));
  std::vector<HPoint<1>> out;
  if (gmax == 0) throw DegenerateMapError("fiber is not finite");
  // Chart z0 = 1 unless the polynomial drops much degree; the reversed chart handles infinity.
  const bool use_z0 = std::abs(g[d]) >= std::abs(g[0]);
  std::vector<cd> poly(d + 1);
  for (int j = 0; j <= d; ++j) poly[j] = use_z0 ? g[j] : g[d - j];
  std::size_t top = d;
  while (top > 0 && std::abs(poly[top]) <= 1e-14 * gmax) --top;
  poly.resize(top + 1);
  for (const auto& t : univariate_roots(poly)) {
    HPoint<1> z = use_z0 ? HPoint<1>{1.0, t} : HPoint<1>{t, 1.0};
    const double n = norm<1>(z);
    out.push_back({z[0] / n, z[1] / n});
  }
  for (std::size_t j = top; j < static_cast<std::size_t>(d); ++j)
    out.push_back(use_z0 ? HPoint<1>{0.0, 1.0} : HPoint<1>{1.0, 0.0});
  return out;
}

/// Rescales x so that F(x) = target exactly (target nonzero, F(x) parallel to it).
template <int K>
HPoint<K> lift_to_target(const CompiledMap<K>& F, HPoint<K> x, const HPoint<K>& target) {
  const HPoint<K> fx = F(x);
  // s with fx = s * target, least squares.
  cd num = 0;
  double den = 0;
  for (int i = 0; i <= K; ++i) {
    num += std::conj(target[i]) * fx[i];
    den += std::norm(target[i]);
  }
  const cd s = num / den;
  const cd lam = std::pow(1.0 / s, 1.0 / F.degree());
  for (auto& c : x) c *= lam;
  return x;
}

// ---------------------------------------------------------------------------
// Homogeneous polynomial systems on P^2.

struct CPoly3 {
  struct Term {
    cd coef;
    std::array<int, 3> exp;
  };
  std::vector<Term> terms;
  int degree = 0;

  cd eval(const std::array<cd, 3>& z) const {
    cd s = 0;
    for (const auto& t : terms) {
      cd m = t.coef;
      for (int v = 0; v < 3; ++v)
        for (int e = 0; e < t.exp[v]; ++e) m *= z[v];
      s += m;
    }
    return s;
  }
  std::array<cd, 3> grad(const std::array<cd, 3>& z) const {
    std::array<cd, 3> g{};
    for (const auto& t : terms)
      for (int j = 0; j < 3; ++j) {
        if (t.exp[j] == 0) continue;
        cd m = t.coef * static_cast<double>(t.exp[j]);
        for (int v = 0; v < 3; ++v)
          for (int e = 0; e < (v == j ? t.exp[v] - 1 : t.exp[v]); ++e) m *= z[v];
        g[j] += m;
      }
    return g;
  }

  /// Linear combination sum_i w_i F_i of the components of a map of P^2.
  static CPoly3 combination(const CompiledMap<2>& F, const std::array<cd, 3>& w) {
    CPoly3 p;
    p.degree = F.degree();
    for (int i = 0; i < 3; ++i)
      for (const auto& t : F.component(i)) p.terms.push_back({w[i] * t.coef, {t.exp[0], t.exp[1], t.exp[2]}});
    return p;
  }
};

struct PathResult {
  std::array<cd, 3> z;
  bool finished = false;
};

/// Solutions of E1 = E2 = 0 on P^2 by total-degree homotopy from
/// z1^d1 - z0^d1 = z2^d2 - z0^d2 = 0, one path per start point (d1*d2 paths).
inline std::vector<PathResult> solve_p2_system(const CPoly3& E1, const CPoly3& E2, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  auto rc = [&] { return cd(nd(rng), nd(rng)); };
  const std::array<cd, 3> patch{rc(), rc(), rc()};
  const cd gamma1 = std::polar(1.0, 2 * kPi * std::uniform_real_distribution<double>()(rng));
  const cd gamma2 = std::polar(1.0, 2 * kPi * std::uniform_real_distribution<double>()(rng));
  const int d1 = E1.degree, d2 = E2.degree;

  using V3 = Eigen::Vector3cd;
  using M3 = Eigen::Matrix3cd;
  auto pw = [](cd z, int e) {
    cd r = 1;
    for (int i = 0; i < e; ++i) r *= z;
    return r;
  };
  auto start_val = [&](const std::array<cd, 3>& z) {
    return std::array<cd, 2>{pw(z[1], d1) - pw(z[0], d1), pw(z[2], d2) - pw(z[0], d2)};
  };
  auto start_grad = [&](const std::array<cd, 3>& z) {
    std::array<std::array<cd, 3>, 2> g{};
    g[0] = {-double(d1) * pw(z[0], d1 - 1), double(d1) * pw(z[1], d1 - 1), 0.0};
    g[1] = {-double(d2) * pw(z[0], d2 - 1), 0.0, double(d2) * pw(z[2], d2 - 1)};
    return g;
  };
  auto H = [&](const std::array<cd, 3>& z, double t) {
    auto s = start_val(z);
    V3 r;
    r(0) = (1 - t) * gamma1 * s[0] + t * E1.eval(z);
    r(1) = (1 - t) * gamma2 * s[1] + t * E2.eval(z);
    r(2) = patch[0] * z[0] + patch[1] * z[1] + patch[2] * z[2] - 1.0;
    return r;
  };
  auto Hz = [&](const std::array<cd, 3>& z, double t) {
    auto sg = start_grad(z);
    auto g1 = E1.grad(z), g2 = E2.grad(z);
    M3 J;
    for (int j = 0; j < 3; ++j) {
      J(0, j) = (1 - t) * gamma1 * sg[0][j] + t * g1[j];
      J(1, j) = (1 - t) * gamma2 * sg[1][j] + t * g2[j];
      J(2, j) = patch[j];
    }
    return J;
  };
  auto Ht = [&](const std::array<cd, 3>& z) {
    auto s = start_val(z);
    V3 r;
    r(0) = E1.eval(z) - gamma1 * s[0];
    r(1) = E2.eval(z) - gamma2 * s[1];
    r(2) = 0;
    return r;
  };
  auto toarr = [](const V3& v) { return std::array<cd, 3>{v(0), v(1), v(2)}; };
  auto tovec = [](const std::array<cd, 3>& a) { return V3(a[0], a[1], a[2]); };
  auto velocity = [&](const V3& z, double t) -> V3 {
    auto a = toarr(z);
    return Hz(a, t).partialPivLu().solve(-Ht(a));
  };

  std::vector<PathResult> out;
  for (int a = 0; a < d1; ++a)
    for (int b = 0; b < d2; ++b) {
      std::array<cd, 3> z0{1.0, std::polar(1.0, 2 * kPi * a / d1), std::polar(1.0, 2 * kPi * b / d2)};
      const cd mu = 1.0 / (patch[0] * z0[0] + patch[1] * z0[1] + patch[2] * z0[2]);
      for (auto& c : z0) c *= mu;
      V3 z = tovec(z0);
      double t = 0, h = 0.01;
      bool ok = true;
      int steps = 0;
      while (t < 1.0 && ok) {
        if (++steps > 20000) {
          ok = false;
          break;
        }
        const double hh = std::min(h, 1.0 - t);
        // RK4 predictor.
        const V3 k1 = velocity(z, t);
        const V3 k2 = velocity(z + 0.5 * hh * k1, t + 0.5 * hh);
        const V3 k3 = velocity(z + 0.5 * hh * k2, t + 0.5 * hh);
        const V3 k4 = velocity(z + hh * k3, t + hh);
        V3 zp = z + hh / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        // Newton corrector.
        bool conv = false;
        const double tn = t + hh;
        for (int it = 0; it < 4; ++it) {
          auto arr = toarr(zp);
          const V3 dz = Hz(arr, tn).partialPivLu().solve(-H(arr, tn));
          zp += dz;
          if (!std::isfinite(zp.norm())) break;
          if (dz.norm() <= 1e-9 * (1 + zp.norm())) {
            conv = true;
            break;
          }
        }
        const double jump = (zp - z).norm() / (1 + z.norm());
        if (conv && jump < 0.1) {
          z = zp;
          t = tn;
          h = std::min(0.1, h * 1.5);
        } else {
          h *= 0.5;
          if (h < 1e-13) {
            // Singular endpoint: stop close to t = 1 and let the end polish handle it.
            if (1.0 - t < 1e-6) break;
            ok = false;
          }
        }
      }
      // End polish at t = 1.
      for (int it = 0; it < 60 && ok; ++it) {
        auto arr = toarr(z);
        const V3 dz = Hz(arr, 1.0).partialPivLu().solve(-H(arr, 1.0));
        if (!std::isfinite(dz.norm())) break;
        z += dz;
        if (dz.norm() <= 1e-14 * (1 + z.norm())) break;
      }
      PathResult r;
      r.z = toarr(z);
      r.finished = ok && std::isfinite(z.norm());
      out.push_back(r);
    }
  return out;
}

/// Mean of |F(z)| over unit vectors; the natural scale for "F(z) is small".
template <int K>
double map_scale(const CompiledMap<K>& F, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  double s = 0;
  for (int i = 0; i < 32; ++i) {
    HPoint<K> z;
    for (auto& c : z) c = cd(nd(rng), nd(rng));
    const double n = norm<K>(z);
    for (auto& c : z) c /= n;
    s += norm<K>(F(z));
  }
  return s / 32;
}

}  // namespace spc::polymap
