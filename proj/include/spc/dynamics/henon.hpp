#pragma once

// Regular polynomial automorphisms of C^2 (Henon maps): escape-rate Green
// functions G_+ and G_-, the Green currents T_+ and T_- on P^2, the
// equilibrium measure T_+ ^ T_- and the contraction experiment for currents
// carried by the closure of K_+.
//
// Maps are stored homogenized with z0 the coordinate of the line at infinity,
// so the affine point (x, y) is [1 : x : y] and the first component of each
// homogenization is z0^d.

#include <spc/core.hpp>
#include <spc/currents/measure.hpp>
#include <spc/currents/panel.hpp>
#include <spc/currents/potential.hpp>
#include <spc/dynamics/endomorphism.hpp>
#include <spc/geom.hpp>
#include <spc/intersect.hpp>
#include <spc/polymap/degrees.hpp>
#include <spc/polymap/map.hpp>

#include <cstdio>
#include <random>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

namespace spc::dynamics {

using Affine2 = std::array<cd, 2>;

inline double affine_norm(const Affine2& x) { return std::sqrt(std::norm(x[0]) + std::norm(x[1])); }

class RegularAutomorphism {
 public:
  /// Both maps are given homogenized. Verifies that they preserve C^2, that
  /// they are inverse to each other, that the indeterminacy sets at infinity
  /// are disjoint, and that d_+^p = d_-^{k-p}.
  RegularAutomorphism(const polymap::HomogeneousMap& forward, const polymap::HomogeneousMap& inverse,
                      std::uint64_t seed = 1)
      : forward_(forward), inverse_(inverse) {
    if (forward.k() != 2 || inverse.k() != 2) throw DomainError("regular automorphisms are implemented for k = 2");
    F_ = polymap::CompiledMap<2>(forward);
    G_ = polymap::CompiledMap<2>(inverse);
    check_affine(F_, "forward");
    check_affine(G_, "inverse");
    I_plus_ = polymap::indeterminacy_points(forward, seed);
    I_minus_ = polymap::indeterminacy_points(inverse, seed);
    for (const auto& a : I_plus_)
      for (const auto& b : I_minus_)
        if (fs_distance<2>(a, b) < 1e-6) throw DomainError("I_+ and I_- meet; the map is not regular");
    if (I_plus_.empty() || I_minus_.empty()) throw DomainError("a polynomial automorphism of degree >= 2 has indeterminacy at infinity");
    // I_+ is a finite set of points, so dim I_+ = 0 = k - p - 1.
    p_ = 1;
    if (d_plus() != d_minus()) throw DomainError("d_+^p = d_-^{k-p} fails");
    if (inverse_defect(100, seed) > 1e-9) throw DomainError("the inverse map does not invert the forward map");
    escape_plus_ = escape_radius(F_);
    escape_minus_ = escape_radius(G_);
  }

  static RegularAutomorphism parse(std::string_view forward, std::string_view inverse) {
    return {polymap::HomogeneousMap::parse(forward), polymap::HomogeneousMap::parse(inverse)};
  }

  /// (x, y) -> (y, y^2 + c - a x), a != 0.
  static RegularAutomorphism henon(double c, double a) {
    if (a == 0) throw DomainError("henon map needs a != 0");
    char fw[256], inv[256];
    std::snprintf(fw, sizeof fw, "[z0^2 : z0*z2 : z2^2 + (%.17g)*z0^2 - (%.17g)*z0*z1]", c, a);
    std::snprintf(inv, sizeof inv, "[z0^2 : (%.17g)*(z1^2 + (%.17g)*z0^2 - z0*z2) : z0*z1]", 1 / a, c);
    return parse(fw, inv);
  }

  int d_plus() const { return F_.degree(); }
  int d_minus() const { return G_.degree(); }
  int p() const { return p_; }
  const std::vector<HPoint<2>>& I_plus() const { return I_plus_; }
  const std::vector<HPoint<2>>& I_minus() const { return I_minus_; }
  const polymap::CompiledMap<2>& lift(bool plus = true) const { return plus ? F_ : G_; }
  double escape_radius(bool plus) const { return plus ? escape_plus_ : escape_minus_; }

  Affine2 apply(const Affine2& x, bool plus = true) const {
    const auto z = (plus ? F_ : G_)(HPoint<2>{1.0, x[0], x[1]});
    return {z[1] / z[0], z[2] / z[0]};
  }
  Affine2 apply_inverse(const Affine2& x) const { return apply(x, false); }

  /// sup |f(f^{-1}(x)) - x| / (1 + |x|) over random points of the bidisc of radius 2.
  double inverse_defect(int points, std::uint64_t seed) const {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-2, 2);
    double worst = 0;
    for (int i = 0; i < points; ++i) {
      const Affine2 x{cd(u(rng), u(rng)), cd(u(rng), u(rng))};
      for (bool plus : {true, false}) {
        const Affine2 y = apply(apply(x, !plus), plus);
        worst = std::max(worst, affine_norm({y[0] - x[0], y[1] - x[1]}) / (1 + affine_norm(x)));
      }
    }
    return worst;
  }

 private:
  static void check_affine(const polymap::CompiledMap<2>& F, const char* name) {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> nd;
    for (int i = 0; i < 8; ++i) {
      const HPoint<2> z{1.0, cd(nd(rng), nd(rng)), cd(nd(rng), nd(rng))};
      if (std::abs(F(z)[0] - 1.0) > 1e-12)
        throw DomainError(std::string(name) + " map must have z0^d as its first component");
    }
  }

  /// 2 (1 + sum of coefficient magnitudes) of the affine components.
  static double escape_radius(const polymap::CompiledMap<2>& F) {
    double s = 0;
    for (int i = 1; i <= 2; ++i)
      for (const auto& t : F.component(i)) s += std::abs(t.coef);
    return 2 * (1 + s);
  }

  polymap::HomogeneousMap forward_, inverse_;
  polymap::CompiledMap<2> F_, G_;
  std::vector<HPoint<2>> I_plus_, I_minus_;
  int p_ = 1;
  double escape_plus_ = 0, escape_minus_ = 0;
};

/// G_+(x) (or G_-) from n iterates: d^{-n} log+ |f^n(x)|. Orbits that stay
/// inside the escape radius for all n steps count as bounded and get exactly
/// 0. Past the escape radius the orbit continues projectively with the log of
/// its size carried separately, so nothing overflows.
inline double henon_green_value(const RegularAutomorphism& f, bool plus, const Affine2& x0, int n) {
  const double R = f.escape_radius(plus);
  const int d = plus ? f.d_plus() : f.d_minus();
  const auto& F = f.lift(plus);
  Affine2 x = x0;
  int j = 0;
  for (; j < n; ++j) {
    if (affine_norm(x) > R) break;
    x = f.apply(x, plus);
  }
  if (j == n && affine_norm(x) <= R) return 0.0;
  // Projective tail: Z = e^s Zhat with |Zhat| = 1 and the z0 entry of Z equal to 1.
  HPoint<2> Z{1.0, x[0], x[1]};
  const double nz = norm<2>(Z);
  double s = std::log(nz);
  for (auto& c : Z) c /= nz;
  for (; j < n; ++j) {
    HPoint<2> Y = F(Z);
    const double ny = norm<2>(Y);
    s = d * s + std::log(ny);
    for (auto& c : Y) c /= ny;
    Z = Y;
  }
  const double log_affine = s + 0.5 * std::log(std::norm(Z[1]) + std::norm(Z[2]));
  return std::max(0.0, log_affine) * std::pow(double(d), -n);
}

struct HenonGreen {
  GreenCurrent<2> T;
  bool plus = true;
  double invariance = 0;      // sup |G o f - d G| on the check box
  double mass = 0;            // trace mass of T on P^2
  double negative_mass = 0;   // positivity defect of the finite-difference trace
  double escape_radius = 0;
  std::function<double(const Affine2&)> G;
};

/// Sample points of the box max(|x|, |y|) <= r used for residuals.
inline std::vector<Affine2> box_points(double r, int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-r, r);
  std::vector<Affine2> pts;
  while (static_cast<int>(pts.size()) < count) {
    const Affine2 x{cd(u(rng), u(rng)), cd(u(rng), u(rng))};
    if (std::abs(x[0]) <= r && std::abs(x[1]) <= r) pts.push_back(x);
  }
  return pts;
}

struct HenonOptions {
  int iterates = 40;
  double box = 3.0;        // residual box radius
  int box_points = 2000;
  std::uint64_t seed = 1;
  bool compute_mass = true;
};

/// G_+ (plus) or G_- and the Green current T = omega + dd^c u on P^2 with
/// u(Z) = lim d^{-n} log |F^n(Z)| - log |Z|, evaluated along the normalized
/// projective orbit (equal to G - log |(1, x)| on C^2).
inline HenonGreen henon_green(const RegularAutomorphism& f, bool plus, const HenonOptions& o = {}) {
  HenonGreen r;
  r.plus = plus;
  r.escape_radius = f.escape_radius(plus);
  const int n = o.iterates, d = plus ? f.d_plus() : f.d_minus();
  r.G = [f, plus, n](const Affine2& x) { return henon_green_value(f, plus, x, n); };
  const auto F = f.lift(plus);
  r.T.generator = plus ? "henon-T+" : "henon-T-";
  r.T.iterates = n;
  r.T.potential = [F, n, d](const HPoint<2>& z) { return green_sum(normalized_orbit<2>(F, z, n).logs, d, n); };
  r.T.current.u.functions.push_back(currents::make_function<2>(r.T.potential, plus ? "G+" : "G-"));
  r.T.current.tag = Provenance::green;

  const auto pts = box_points(o.box, o.box_points, o.seed);
  std::vector<double> inv(pts.size()), res(pts.size());
  parallel_for(pts.size(), [&](std::size_t i) {
    const double g = r.G(pts[i]);
    inv[i] = std::abs(r.G(f.apply(pts[i], plus)) - d * g);
    res[i] = std::abs(g - henon_green_value(f, plus, pts[i], n - 1));
  });
  for (std::size_t i = 0; i < pts.size(); ++i) {
    r.invariance = std::max(r.invariance, inv[i]);
    r.T.residual = std::max(r.T.residual, res[i]);
  }
  r.T.invariance = r.invariance;
  if (o.compute_mass) {
    const auto mu = currents::trace_measure<2>(r.T.current);
    r.mass = mu.mass();
    r.negative_mass = mu.negative_mass();
  }
  return r;
}

// ---------------------------------------------------------------------------
// Equilibrium measure

/// Saddle periodic points of period <= max_period (points of K where one
/// multiplier is expanding and one contracting), by Newton's method from a
/// grid of starts in the bidisc of radius `box`.
inline std::vector<Affine2> saddle_points(const RegularAutomorphism& f, int max_period = 2, double box = 3.0) {
  std::vector<Affine2> out;
  auto iterate = [&](Affine2 x, int p) {
    for (int i = 0; i < p; ++i) x = f.apply(x);
    return x;
  };
  // Complex derivative by forward differences (the map is holomorphic).
  auto jac = [&](const Affine2& x, int p) {
    Eigen::Matrix2cd J;
    const Affine2 fx = iterate(x, p);
    const double dl = 1e-7 * (1 + affine_norm(x));
    for (int j = 0; j < 2; ++j) {
      Affine2 y = x;
      y[j] += dl;
      const Affine2 fy = iterate(y, p);
      J(0, j) = (fy[0] - fx[0]) / dl;
      J(1, j) = (fy[1] - fx[1]) / dl;
    }
    return J;
  };
  const int m = 6;
  for (int p = 1; p <= max_period; ++p)
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b)
        for (int c = 0; c < m; ++c)
          for (int e = 0; e < m; ++e) {
            auto at = [&](int i) { return -box + (i + 0.5) * 2 * box / m; };
            Affine2 x{cd(at(a), at(b)), cd(at(c), at(e))};
            bool ok = false;
            for (int it = 0; it < 60 && affine_norm(x) < 10 * box; ++it) {
              const Affine2 fx = iterate(x, p);
              const Eigen::Vector2cd r(fx[0] - x[0], fx[1] - x[1]);
              if (r.norm() < 1e-13 * (1 + affine_norm(x))) {
                ok = true;
                break;
              }
              const Eigen::Vector2cd dx = (jac(x, p) - Eigen::Matrix2cd::Identity()).partialPivLu().solve(-r);
              x[0] += dx(0);
              x[1] += dx(1);
            }
            if (!ok) continue;
            const Eigen::Vector2cd ev = jac(x, p).eigenvalues();
            const double l0 = std::abs(ev(0)), l1 = std::abs(ev(1));
            if (!(std::max(l0, l1) > 1 + 1e-6 && std::min(l0, l1) < 1 - 1e-6)) continue;
            bool dup = false;
            for (const auto& y : out)
              if (affine_norm({y[0] - x[0], y[1] - x[1]}) < 1e-8) dup = true;
            if (!dup) out.push_back(x);
          }
  return out;
}

/// The level of max(G_+, G_-) resolvable at grid spacing h: its largest value
/// over the one-cell neighbours (each real coordinate shifted by -h, 0 or h)
/// of the saddle points.
inline double grid_epsilon(const std::vector<Affine2>& saddles, const std::function<double(const Affine2&)>& level,
                           double h) {
  double eps = 0;
  for (const auto& x : saddles)
    for (int code = 0; code < 81; ++code) {
      int c = code;
      std::array<double, 4> d;
      for (auto& v : d) {
        v = (c % 3 - 1) * h;
        c /= 3;
      }
      eps = std::max(eps, level({x[0] + cd(d[0], d[1]), x[1] + cd(d[2], d[3])}));
    }
  return eps;
}

struct HenonEquilibrium {
  currents::Patch<2> patch;  // mu = dd^c G_+ ^ dd^c G_- on the window
  GridMeasure<2> measure;
  double mass = 0;
  double negative_mass = 0;
  double support_fraction = 0;  // mass within `cells` cells of {max(G_+, G_-) <= eps}
  double volume_fraction = 0;   // share of window nodes in the same set; the check means little near 1
  double eps = 0;               // level threshold used for the support check
  std::vector<Affine2> saddles;
  double invariance = 0;        // dist_2(f_* mu, mu)
};

namespace detail {

/// Box dilation of a node mask by r cells in every axis direction.
inline std::vector<char> dilate(const ChartGrid<2>& g, std::vector<char> mask, int r) {
  const int n = g.n;
  for (int axis = 0; axis < 4; ++axis) {
    std::vector<char> out(mask.size(), 0);
    for (std::size_t i = 0; i < mask.size(); ++i) {
      if (!mask[i]) continue;
      auto m = g.multi_index(i);
      const int c = m[axis];
      for (int k = std::max(0, c - r); k <= std::min(n - 1, c + r); ++k) {
        m[axis] = k;
        out[g.index(m)] = 1;
      }
    }
    mask.swap(out);
  }
  return mask;
}

/// Fractions of the positive part of p, and of the window nodes, lying within
/// `cells` cells of the nodes where level(x) <= eps.
template <class Fn>
std::pair<double, double> support_fraction(const currents::Patch<2>& p, Fn&& level, double eps, int cells) {
  const auto& g = p.grid;
  std::vector<char> mask(g.size(), 0);
  parallel_for(g.size(), [&](std::size_t i) { mask[i] = level(g.node(i)) <= eps ? 1 : 0; });
  mask = dilate(g, std::move(mask), cells);
  double in = 0, tot = 0, nodes = 0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double w = std::max(0.0, p.weights[i]);
    tot += w;
    if (mask[i]) {
      in += w;
      nodes += 1;
    }
  }
  return {tot > 0 ? in / tot : 0.0, nodes / g.size()};
}

}  // namespace detail

struct EquilibriumOptions {
  double radius = 2.5;  // window max(|x|, |y|) <= radius, centered at 0
  int n = 40;           // nodes per real axis
  int smoothing = 2;
  int cells = 3;
  double eps = -1;      // support threshold; negative means grid_epsilon at spacing h
};

/// mu = T_+ ^ T_- as dd^c G_+ ^ dd^c G_- on a chart window of C^2.
inline HenonEquilibrium henon_equilibrium(const RegularAutomorphism& f, const HenonGreen& Gp, const HenonGreen& Gm,
                                          const EquilibriumOptions& o = {}) {
  ChartGrid<2> g;
  g.chart = 0;
  g.n = o.n;
  g.radius = o.radius;
  auto gp = [&](const ChartPoint<2>& x) { return Gp.G({x[0], x[1]}); };
  auto gm = [&](const ChartPoint<2>& x) { return Gm.G({x[0], x[1]}); };
  HenonEquilibrium r;
  r.patch = intersect::monge_ampere_window(gp, gm, g, o.smoothing, false);
  r.measure.patches.push_back(r.patch);
  r.mass = r.measure.mass();
  r.negative_mass = r.measure.negative_mass();
  const std::function<double(const Affine2&)> level = [&](const Affine2& x) { return std::max(Gp.G(x), Gm.G(x)); };
  r.saddles = saddle_points(f);
  r.eps = o.eps >= 0 ? o.eps : grid_epsilon(r.saddles, level, g.h());
  std::tie(r.support_fraction, r.volume_fraction) = detail::support_fraction(
      r.patch, [&](const ChartPoint<2>& x) { return level({x[0], x[1]}); }, r.eps, o.cells);
  // Transport the atoms by f and compare on the panel.
  const auto cloud = r.measure.as_cloud();
  GridMeasure<2> pushed;
  pushed.cloud.weights = cloud.weights;
  pushed.cloud.points.resize(cloud.size());
  const auto& F = f.lift(true);
  parallel_for(cloud.size(), [&](std::size_t i) { pushed.cloud.points[i] = normalize<2>(F(cloud.points[i])); });
  r.invariance = currents::dist_alpha<2>(pushed, r.measure, 2.0);
  return r;
}

// ---------------------------------------------------------------------------
// Contraction toward T_+

/// omega + dd^c max(u_+, eps + log(|z0| / |z|)), i.e. dd^c max(G_+, eps) on
/// C^2: a mass-one current carried by {G_+ = eps} and I_+.
inline Current11<2> green_level_current(const HenonGreen& Gp, double eps) {
  const auto u = Gp.T.potential;
  return Current11<2>::from_function(
      [u, eps](const HPoint<2>& z) {
        const double a = std::abs(z[0]);
        const double floor = a > 0 ? eps + std::log(a / norm<2>(z)) : -std::numeric_limits<double>::infinity();
        return std::max(u(z), floor);
      },
      "max(G+," + std::to_string(eps) + ")");
}

struct SupportCheck {
  double leak = 0;  // fraction of the window trace mass farther than `cells` cells from {G_+ <= level}
  double window_mass = 0;
};

/// Trace of S on a chart window of C^2 (dd^c of the affine potential wedge
/// omega), and the part of it outside {G_+ <= level} dilated by `cells` cells.
inline SupportCheck support_leak(const Current11<2>& S, const HenonGreen& Gp, double level,
                                 const EquilibriumOptions& o = {}) {
  ChartGrid<2> g;
  g.chart = 0;
  g.n = o.n;
  g.radius = o.radius;
  const auto u = S.u;
  auto affine = [&](const ChartPoint<2>& x) {
    const HPoint<2> z{1.0, x[0], x[1]};
    return u(z) + std::log(norm<2>(z));
  };
  auto fs = [](const ChartPoint<2>& x) { return 0.5 * std::log1p(std::norm(x[0]) + std::norm(x[1])); };
  const auto p = intersect::monge_ampere_window(affine, fs, g, o.smoothing, false);
  SupportCheck c;
  for (double w : p.weights) c.window_mass += std::max(0.0, w);
  c.leak = 1 - detail::support_fraction(p, [&](const ChartPoint<2>& x) { return Gp.G({x[0], x[1]}); }, level, o.cells).first;
  return c;
}

struct UniquenessReport {
  std::vector<DecayFit> to_T;            // dist(L^n S_i, T_+) per family member
  std::vector<std::vector<double>> pairwise;  // dist(L^n S_0, L^n S_i), i >= 1
  std::vector<double> leaks;
  bool decreasing = false;  // every sequence strictly decreasing over n = 0..N
};

struct UniquenessOptions {
  double alpha = 2.0;
  int green_iterates = 40;
  double support_level = 0.1;
  double max_leak = 0.01;
  bool check_support = true;
  EquilibriumOptions window{3.0, 32, 2, 3, -1};
};

/// Normalized pull-backs d_+^{-n} (f^n)^* S_i through the homogenized map,
/// u_{L^n S} = g_n + d^{-n} u(z_n), compared with T_+ and with each other on
/// the panel by potential pairings.
inline UniquenessReport henon_uniqueness_experiment(const RegularAutomorphism& f, const HenonGreen& Gp,
                                                    const std::vector<Current11<2>>& family, int N,
                                                    const UniquenessOptions& o = {}) {
  if (family.empty()) throw DomainError("empty family");
  if (N < 1) throw DomainError("N must be positive");
  UniquenessReport rep;
  if (o.check_support) {
    for (const auto& S : family) {
      const auto c = support_leak(S, Gp, o.support_level, o.window);
      rep.leaks.push_back(c.leak);
      if (c.leak > o.max_leak)
        throw DomainError("input current leaks " + std::to_string(c.leak) + " of its mass outside {G+ <= " +
                          std::to_string(o.support_level) + "}");
    }
  }
  const int d = f.d_plus(), L = N + o.green_iterates;
  const std::size_t m = family.size();
  std::vector<QuasiPotential<2>> us;
  for (const auto& S : family) us.push_back(S.u);
  const auto& F = f.lift(true);
  auto node = [&](const HPoint<2>& z, double* out) {
    const auto orb = normalized_orbit<2>(F, z, L);
    std::vector<double> G(L + 1, 0.0);
    for (int j = L - 1; j >= 0; --j) G[j] = (orb.logs[j] + G[j + 1]) / d;
    for (std::size_t i = 0; i < m; ++i) {
      double scale = 1;
      for (int n = 0; n <= N; ++n, scale /= d) out[i * (N + 1) + n] = scale * (us[i](orb.points[n]) - G[n]);
    }
  };
  const auto& panel = currents::default_panel<2>();
  const auto pairs = currents::potential_pairings<2>(node, m * (N + 1), panel);
  const std::vector<double> zero(panel.size(), 0.0);
  rep.decreasing = true;
  for (std::size_t i = 0; i < m; ++i) {
    std::vector<ExperimentRecord> recs;
    for (int n = 0; n <= N; ++n) {
      ExperimentRecord r;
      r.n = n;
      r.distance = currents::dist_from_pairings<2>(pairs[i * (N + 1) + n], zero, o.alpha, panel);
      recs.push_back(r);
      if (n > 0 && !(r.distance < recs[n - 1].distance)) rep.decreasing = false;
    }
    rep.to_T.push_back(fit_decay(std::move(recs), 1e-12, "potential-pairing"));
  }
  for (std::size_t i = 1; i < m; ++i) {
    std::vector<double> ds;
    for (int n = 0; n <= N; ++n) {
      ds.push_back(currents::dist_from_pairings<2>(pairs[n], pairs[i * (N + 1) + n], o.alpha, panel));
      if (n > 0 && !(ds[n] < ds[n - 1])) rep.decreasing = false;
    }
    rep.pairwise.push_back(std::move(ds));
  }
  return rep;
}

}  // namespace spc::dynamics
