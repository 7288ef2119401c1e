#pragma once

// Holomorphic endomorphisms of P^K: normalized pull-back of (1,1)-currents,
// Green currents, equidistribution experiments and dynamical super-potentials.
//
// With F a homogeneous lift of degree d and h(z) = log(|F(z)| / |z|^d), the
// normalized pull-back of S = omega + dd^c u is
//   L(S) = d^{-1} f^* S = omega + dd^c ((u o F + h) / d).
// Along the normalized orbit z_{j+1} = F(z_j) / |F(z_j)| this iterates to
//   u_{L^n S} = g_n + d^{-n} u(z_n),   g_n = sum_{j<n} d^{-j-1} log |F(z_j)|,
// and g_n converges uniformly to the Green potential g.

#include <spc/core.hpp>
#include <spc/currents/measure.hpp>
#include <spc/currents/panel.hpp>
#include <spc/currents/potential.hpp>
#include <spc/geom.hpp>
#include <spc/polymap/degrees.hpp>
#include <spc/polymap/map.hpp>
#include <spc/polymap/roots.hpp>
#include <spc/superpot.hpp>

#include <cmath>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

namespace spc::dynamics {

using currents::Current11;
using currents::FlatPoly;
using currents::GridMeasure;
using currents::Provenance;
using currents::QuasiPotential;

/// Normalized orbit z_0 = z / |z|, ..., with logs[j] = log |F(z_j)|.
template <int K>
struct Orbit {
  std::vector<HPoint<K>> points;
  std::vector<double> logs;
};

/// Follows the orbit for n steps. Stops early (logs padded with -inf) if the
/// orbit lands on a point where F vanishes.
template <int K>
Orbit<K> normalized_orbit(const polymap::CompiledMap<K>& F, const HPoint<K>& z, int n) {
  Orbit<K> o;
  o.points.reserve(n + 1);
  o.logs.reserve(n);
  HPoint<K> x = z;
  const double nz = norm<K>(x);
  for (auto& c : x) c /= nz;
  o.points.push_back(x);
  for (int j = 0; j < n; ++j) {
    HPoint<K> y = F(x);
    const double ny = norm<K>(y);
    if (!(ny > 0) || !std::isfinite(ny)) {
      o.logs.resize(n, -std::numeric_limits<double>::infinity());
      break;
    }
    o.logs.push_back(std::log(ny));
    for (auto& c : y) c /= ny;
    x = y;
    o.points.push_back(x);
  }
  return o;
}

/// g_n at the start of an orbit.
inline double green_sum(const std::vector<double>& logs, int d, int n) {
  double s = 0, w = 1.0 / d;
  for (int j = 0; j < n; ++j, w /= d) s += w * logs[j];
  return s;
}

template <int K>
class Endomorphism {
 public:
  /// Requires algebraic degree >= 2 and no indeterminacy (components without a
  /// common zero on P^K).
  explicit Endomorphism(const polymap::HomogeneousMap& f, std::uint64_t seed = 1) : map_(f) {
    if (f.k() != K) throw DomainError("endomorphism: dimension mismatch");
    if (f.degree() < 2) throw DomainError("endomorphism needs algebraic degree >= 2");
    if constexpr (K == 2) {
      if (!polymap::indeterminacy_points(f, seed).empty())
        throw DomainError("map has indeterminacy points; it is not a holomorphic endomorphism");
    } else {
      if (!f.common_factor().is_constant()) throw DomainError("components share a common factor");
    }
    F_ = polymap::CompiledMap<K>(f);
  }

  static Endomorphism parse(std::string_view text) { return Endomorphism(polymap::HomogeneousMap::parse(text)); }

  int degree() const { return F_.degree(); }
  const polymap::CompiledMap<K>& lift() const { return F_; }
  const polymap::HomogeneousMap& map() const { return map_; }

  /// Normalized image F(z) / |F(z)|.
  HPoint<K> operator()(const HPoint<K>& z) const {
    HPoint<K> y = F_(z);
    const double n = norm<K>(y);
    for (auto& c : y) c /= n;
    return y;
  }

  /// h(z) = log(|F(z)| / |z|^d).
  double corrector(const HPoint<K>& z) const { return std::log(norm<K>(F_(z))) - degree() * std::log(norm<K>(z)); }

  QuasiPotential<K> corrector_potential() const {
    QuasiPotential<K> q;
    const auto self = *this;
    q.functions.push_back(currents::make_function<K>([self](const HPoint<K>& z) { return self.corrector(z); }, "h"));
    return q;
  }

 private:
  polymap::HomogeneousMap map_;
  polymap::CompiledMap<K> F_;
};

namespace detail {

template <int K>
using SparsePoly = std::map<std::array<int, K + 1>, cd>;

template <int K>
SparsePoly<K> multiply(const SparsePoly<K>& a, const SparsePoly<K>& b) {
  SparsePoly<K> r;
  for (const auto& [ea, ca] : a)
    for (const auto& [eb, cb] : b) {
      std::array<int, K + 1> e;
      for (int v = 0; v <= K; ++v) e[v] = ea[v] + eb[v];
      r[e] += ca * cb;
    }
  return r;
}

/// P(M F(z)) expanded into monomials.
template <int K>
FlatPoly<K> compose(const FlatPoly<K>& P, const Mat<K>& M, const polymap::CompiledMap<K>& F) {
  std::array<SparsePoly<K>, K + 1> comp;
  for (int v = 0; v <= K; ++v)
    for (int w = 0; w <= K; ++w) {
      if (M(v, w) == cd(0)) continue;
      for (const auto& t : F.component(w)) comp[v][t.exp] += M(v, w) * t.coef;
    }
  std::array<std::vector<SparsePoly<K>>, K + 1> powers;
  for (int v = 0; v <= K; ++v) {
    SparsePoly<K> one;
    one[std::array<int, K + 1>{}] = 1.0;
    powers[v].push_back(one);
  }
  auto power = [&](int v, int e) -> const SparsePoly<K>& {
    while (static_cast<int>(powers[v].size()) <= e) powers[v].push_back(multiply<K>(powers[v].back(), comp[v]));
    return powers[v][e];
  };
  SparsePoly<K> sum;
  for (const auto& t : P.terms) {
    SparsePoly<K> m;
    m[std::array<int, K + 1>{}] = t.coef;
    for (int v = 0; v <= K; ++v)
      if (t.exp[v]) m = multiply<K>(m, power(v, t.exp[v]));
    for (const auto& [e, c] : m) sum[e] += c;
  }
  FlatPoly<K> out;
  out.degree = P.degree * F.degree();
  double cmax = 0;
  for (const auto& [e, c] : sum) cmax = std::max(cmax, std::abs(c));
  for (const auto& [e, c] : sum)
    if (std::abs(c) > 1e-15 * cmax) out.terms.push_back({c, e});
  if (out.terms.empty()) throw DomainError("pull-back of a divisor vanishes identically");
  return out;
}

template <int K>
constexpr int kMaxExactDegree = K == 1 ? 64 : 16;

}  // namespace detail

/// Normalized pull-back L(S) = d^{-1} f^* S. Hyperplane and divisor terms are
/// pulled back exactly to the divisors of P o F (while the degree stays
/// moderate); everything else becomes one function term (u o F + h)/d. The
/// potential is then shifted to mean zero.
template <int K>
Current11<K> pullback(const Endomorphism<K>& f, const Current11<K>& S) {
  const int d = f.degree();
  const auto& F = f.lift();
  QuasiPotential<K> rest;
  Current11<K> out;
  out.tag = Provenance::pullback;
  double exact_weight = 0;
  auto exact = [&](const FlatPoly<K>& P, const Mat<K>& M, double w) {
    if (P.degree * d > detail::kMaxExactDegree<K>) return false;
    out.u.divisors.push_back(currents::make_divisor<K>(detail::compose<K>(P, M, F), w));
    exact_weight += w;
    return true;
  };
  for (const auto& g : S.u.gram) {
    bool done = false;
    if (g.rank() == 1) {
      FlatPoly<K> P;
      P.degree = 1;
      for (int i = 0; i <= K; ++i) {
        std::array<int, K + 1> e{};
        e[i] = 1;
        if (g.B(0, i) != cd(0)) P.terms.push_back({g.B(0, i), e});
      }
      done = exact(P, Mat<K>::Identity(), g.weight);
    }
    if (!done) rest.gram.push_back(g);
  }
  for (const auto& dv : S.u.divisors)
    if (!exact(dv.P, dv.M, dv.weight)) rest.divisors.push_back(dv);
  for (const auto& fn : S.u.functions) rest.functions.push_back(fn);
  const double hw = 1 - exact_weight;
  const double c = S.u.constant;
  if (rest.term_count() > 0 || std::abs(hw) > 1e-15) {
    out.u.functions.push_back(currents::make_function<K>(
        [rest, hw, f, d](const HPoint<K>& z) {
          const HPoint<K> y = f.lift()(z);
          return (rest(y) + hw * f.corrector(z)) / d;
        },
        "pullback"));
  }
  out.u.constant = c / d;
  out.u.constant -= out.u.mean();
  return out;
}

/// L^n(S) as a single function term g_n + d^{-n} u(z_n) along the orbit.
template <int K>
Current11<K> pullback_iterate(const Endomorphism<K>& f, const Current11<K>& S, int n) {
  if (n < 0) throw DomainError("iteration count must be nonnegative");
  if (n == 0) return S;
  const auto u = S.u;
  const int d = f.degree();
  Current11<K> out;
  out.tag = Provenance::pullback;
  out.u.functions.push_back(currents::make_function<K>(
      [f, u, n, d](const HPoint<K>& z) {
        const auto o = normalized_orbit<K>(f.lift(), z, n);
        return green_sum(o.logs, d, n) + std::pow(double(d), -n) * u(o.points.back());
      },
      "pullback^" + std::to_string(n)));
  out.u.constant -= out.u.mean();
  return out;
}

// ---------------------------------------------------------------------------
// Green currents

template <int K>
struct GreenCurrent {
  Current11<K> current;
  std::string generator;  // endo-T, henon-T+, henon-T-, mu
  int iterates = 0;
  double residual = 0;              // sup |g_n - g_{n-1}| over P^K, estimated from samples
  std::vector<double> residuals;    // the same for every m = 1..n
  double invariance = 0;            // sup |(g o f + h)/d - g| on the check set
  std::function<double(const HPoint<K>&)> potential;  // g_n, not mean-shifted
};

/// Points on which Green-current residuals are reported.
template <int K>
PointCloud<K> check_points() {
  return K == 1 ? fs_quadrature<K>(48, 96) : fs_quadrature<K>(8, 12);
}

/// T = omega + dd^c g_n with g_n = sum_{j<n} d^{-j-1} h o f^j.
template <int K>
GreenCurrent<K> green_current_endo(const Endomorphism<K>& f, int n) {
  if (n < 1) throw DomainError("green_current_endo needs n >= 1");
  const int d = f.degree();
  GreenCurrent<K> T;
  T.generator = "endo-T";
  T.iterates = n;
  T.potential = [f, n, d](const HPoint<K>& z) { return green_sum(normalized_orbit<K>(f.lift(), z, n).logs, d, n); };
  T.current.u.functions.push_back(currents::make_function<K>(T.potential, "green"));
  T.current.tag = Provenance::green;

  const auto pts = check_points<K>();
  std::vector<std::vector<double>> steps(pts.size());
  std::vector<double> inv(pts.size());
  parallel_for(pts.size(), [&](std::size_t i) {
    const auto o = normalized_orbit<K>(f.lift(), pts.points[i], n);
    std::vector<double> s(n);
    double w = 1.0 / d;
    for (int m = 0; m < n; ++m, w /= d) s[m] = std::abs(w * o.logs[m]);
    steps[i] = std::move(s);
    const double g = green_sum(o.logs, d, n);
    const double gf = T.potential(f(pts.points[i]));
    inv[i] = std::abs((gf + f.corrector(pts.points[i])) / d - g);
  });
  // g_{m+1} - g_m = d^{-m-1} l o f^m with l = log |F(z)| / |z|^d. Since f is
  // onto, |l| at the check points themselves is also a sample of |l o f^m|;
  // the orbit samples alone cluster on the attractors and miss the sup.
  double l_sup = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) l_sup = std::max(l_sup, std::abs(f.corrector(pts.points[i])));
  T.residuals.assign(n, 0.0);
  for (int m = 0; m < n; ++m) T.residuals[m] = l_sup * std::pow(double(d), -m - 1);
  for (const auto& s : steps)
    for (int m = 0; m < n; ++m) T.residuals[m] = std::max(T.residuals[m], s[m]);
  T.residual = T.residuals.back();
  for (double v : inv) T.invariance = std::max(T.invariance, v);
  return T;
}

// ---------------------------------------------------------------------------
// Equidistribution

struct ExperimentRecord {
  int n = 0;
  double distance = 0;
  double residual = 0;        // sup-norm gap of the potentials (potential route)
  double lambda_partial = 0;  // distance(n-1) / distance(n); 0 for n = 0
};

struct DecayFit {
  std::vector<ExperimentRecord> records;
  double lambda = 0;  // fitted rate: distance ~ c lambda^{-n}
  double r2 = 0;
  bool converged_before_fit = false;  // fewer than three distances above the floor
  bool pass = false;                  // lambda > 1 and R^2 >= 0.9
  std::string route;
};

/// Least-squares fit of log distance = a - n log lambda over the records above
/// the noise floor.
inline DecayFit fit_decay(std::vector<ExperimentRecord> records, double floor, std::string route) {
  DecayFit fit;
  fit.route = std::move(route);
  for (std::size_t i = 1; i < records.size(); ++i) {
    if (records[i].n <= records[i - 1].n) throw DomainError("records must be strictly ordered in n");
    records[i].lambda_partial = records[i].distance > 0 ? records[i - 1].distance / records[i].distance : 0.0;
  }
  fit.records = std::move(records);
  std::vector<double> xs, ys;
  for (const auto& r : fit.records)
    if (r.distance > floor) {
      xs.push_back(r.n);
      ys.push_back(std::log(r.distance));
    }
  if (xs.size() < 3) {
    fit.converged_before_fit = true;
    return fit;
  }
  const double m = xs.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
    syy += ys[i] * ys[i];
  }
  const double cov = sxy - sx * sy / m, vx = sxx - sx * sx / m, vy = syy - sy * sy / m;
  const double slope = cov / vx;
  fit.lambda = std::exp(-slope);
  fit.r2 = vy > 0 ? cov * cov / (vx * vy) : 1.0;
  fit.pass = fit.lambda > 1 && fit.r2 >= 0.9;
  return fit;
}

struct EquidistributionOptions {
  double alpha = 1.0;
  int green_iterates = 40;  // tail length used for g(z_n)
  double noise_floor = 1e-9;
  int grid = 0;             // potential_pairings nodes per axis; 0 = default
};

/// dist_alpha(L^n S0, T) for n = 0..N through potential pairings:
/// u_{L^n S0} - g = d^{-n} (u_0 - g)(z_n), paired with dd^c phi ^ omega^{K-1}.
template <int K>
DecayFit equidistribution_endo(const Endomorphism<K>& f, const Current11<K>& S0, int N,
                               const EquidistributionOptions& o = {}) {
  if (N < 1 || N > 25) throw DomainError("equidistribution_endo needs 1 <= N <= 25");
  const int d = f.degree(), L = N + o.green_iterates;
  const auto u0 = S0.u;
  auto node = [&](const HPoint<K>& z, double* out) {
    const auto orb = normalized_orbit<K>(f.lift(), z, L);
    std::vector<double> G(L + 1, 0.0);
    for (int j = L - 1; j >= 0; --j) G[j] = (orb.logs[j] + G[j + 1]) / d;
    double scale = 1;
    for (int n = 0; n <= N; ++n, scale /= d) out[n] = scale * (u0(orb.points[n]) - G[n]);
  };
  const auto& panel = currents::default_panel<K>();
  const auto pairs = o.grid > 0 ? currents::potential_pairings<K>(node, N + 1, panel, o.grid)
                                : currents::potential_pairings<K>(node, N + 1, panel);
  const std::vector<double> zero(panel.size(), 0.0);

  // Sup-norm gaps on the check set (a constant offset is removed first).
  const auto pts = check_points<K>();
  std::vector<std::vector<double>> vals(pts.size(), std::vector<double>(N + 1));
  parallel_for(pts.size(), [&](std::size_t i) { node(pts.points[i], vals[i].data()); });
  std::vector<ExperimentRecord> recs;
  for (int n = 0; n <= N; ++n) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& v : vals) {
      lo = std::min(lo, v[n]);
      hi = std::max(hi, v[n]);
    }
    ExperimentRecord r;
    r.n = n;
    r.distance = currents::dist_from_pairings<K>(pairs[n], zero, o.alpha, panel);
    r.residual = 0.5 * (hi - lo);
    recs.push_back(r);
  }
  return fit_decay(std::move(recs), o.noise_floor, "potential-pairing");
}

/// Preimages of every atom down n levels, each carrying weight / d^n.
inline GridMeasure<1> preimage_cloud(const Endomorphism<1>& f, const GridMeasure<1>& mu, int n) {
  PointCloud<1> c = mu.as_cloud();
  for (int level = 0; level < n; ++level) {
    std::vector<std::vector<HPoint<1>>> pre(c.size());
    parallel_for(c.size(), [&](std::size_t i) { pre[i] = polymap::fiber_p1(f.lift(), c.points[i]); });
    PointCloud<1> next;
    for (std::size_t i = 0; i < c.size(); ++i)
      for (const auto& p : pre[i]) next.add(p, c.weights[i] / pre[i].size());
    c = std::move(next);
  }
  GridMeasure<1> out;
  out.cloud = std::move(c);
  return out;
}

/// Measure version on P^1: L^n(mu) by preimage clouds, compared with a
/// reference measure for T on the panel.
inline DecayFit equidistribution_endo(const Endomorphism<1>& f, const GridMeasure<1>& S0, int N,
                                      const GridMeasure<1>& T_measure, const EquidistributionOptions& o = {}) {
  if (N < 1 || N > 25) throw DomainError("equidistribution_endo needs 1 <= N <= 25");
  const auto& panel = currents::default_panel<1>();
  const auto ref = currents::panel_pairings<1>(T_measure, panel);
  std::vector<ExperimentRecord> recs;
  GridMeasure<1> cur = S0;
  for (int n = 0; n <= N; ++n) {
    if (n > 0) cur = preimage_cloud(f, cur, 1);
    ExperimentRecord r;
    r.n = n;
    r.distance = currents::dist_from_pairings<1>(currents::panel_pairings<1>(cur, panel), ref, o.alpha, panel);
    recs.push_back(r);
  }
  return fit_decay(std::move(recs), o.noise_floor, "preimage-cloud");
}

/// Sample of the measure of maximal entropy: the preimage tree of a generic
/// base point, `levels` deep, each branch splitting its weight equally.
template <int K>
GridMeasure<K> equilibrium_cloud(const Endomorphism<K>& f, int levels, const HPoint<K>& base, std::uint64_t seed = 1) {
  std::mt19937_64 rng(seed);
  const double scale = polymap::map_scale<K>(f.lift(), rng);
  PointCloud<K> cur;
  cur.add(normalize<K>(base), 1.0);
  for (int l = 0; l < levels; ++l) {
    std::vector<std::vector<HPoint<K>>> pre(cur.size());
    std::vector<std::uint64_t> seeds(cur.size());
    for (auto& s : seeds) s = rng();
    parallel_for(cur.size(), [&](std::size_t i) {
      std::mt19937_64 r(seeds[i]);
      pre[i] = polymap::fiber<K>(f.lift(), cur.points[i], r, scale);
    });
    PointCloud<K> next;
    for (std::size_t i = 0; i < cur.size(); ++i) {
      if (pre[i].empty()) throw ResolutionError("preimage computation failed; the base point may be exceptional");
      for (const auto& p : pre[i]) next.add(p, cur.weights[i] / pre[i].size());
    }
    cur = std::move(next);
  }
  GridMeasure<K> out;
  out.cloud = std::move(cur);
  return out;
}

// ---------------------------------------------------------------------------
// Dynamical super-potentials

/// Lambda(R) = f_* R for a measure given by atoms: the atoms are transported.
template <int K>
GridMeasure<K> pushforward_measure(const Endomorphism<K>& f, const GridMeasure<K>& R) {
  const PointCloud<K> c = R.as_cloud();
  GridMeasure<K> out;
  out.cloud.points.resize(c.size());
  out.cloud.weights = c.weights;
  parallel_for(c.size(), [&](std::size_t i) { out.cloud.points[i] = f(c.points[i]); });
  return out;
}

/// Probability measures with densities proportional to 1 + phi_j / 2 against
/// omega^K, for `count` panel functions spread over the panel.
template <int K>
std::vector<GridMeasure<K>> test_measures(std::size_t count) {
  const auto& panel = currents::default_panel<K>();
  const auto q = check_points<K>();
  std::vector<GridMeasure<K>> out;
  const std::size_t stride = std::max<std::size_t>(1, panel.size() / std::max<std::size_t>(count, 1));
  for (std::size_t j = 0; j < panel.size() && out.size() < count; j += stride) {
    const auto& f = panel.forms[j];
    GridMeasure<K> m;
    double z = 0;
    for (std::size_t i = 0; i < q.size(); ++i) {
      const double w = q.weights[i] * (1 + 0.5 * f(q.points[i]) / f.s0);
      m.cloud.add(q.points[i], w);
      z += w;
    }
    for (auto& w : m.cloud.weights) w /= z;
    out.push_back(std::move(m));
  }
  return out;
}

/// V_S = U_S - U_T - c_S with c_S = U_S(anchor) - U_T(anchor); the anchor is
/// the measure T^K (T itself on P^1), given as a sample.
template <int K>
struct DynamicalSuperPotential {
  Current11<K> S;
  Current11<K> T;
  GridMeasure<K> anchor;
  double c_S = 0;

  superpot::SuperPotentialValue operator()(const GridMeasure<K>& R) const {
    const auto us = superpot::super_potential<K>(S, R), ut = superpot::super_potential<K>(T, R);
    if (us.minus_infinity) return us;
    if (ut.minus_infinity) throw DomainError("the Green super-potential hit the floor");
    superpot::SuperPotentialValue v;
    v.value = us.value - ut.value - c_S;
    v.method = "dynamical";
    return v;
  }
};

template <int K>
DynamicalSuperPotential<K> dynamical_super_potential(const Current11<K>& S, const GreenCurrent<K>& T,
                                                     const GridMeasure<K>& anchor) {
  DynamicalSuperPotential<K> V{S, T.current, anchor, 0.0};
  const auto us = superpot::super_potential<K>(S, anchor), ut = superpot::super_potential<K>(T.current, anchor);
  if (us.minus_infinity || ut.minus_infinity)
    throw DomainError("anchor pairing is at the floor; S is too singular against the Green measure");
  V.c_S = us.value - ut.value;
  return V;
}

struct FunctionalEquationReport {
  std::vector<double> residuals;  // |V_{L(S)}(R) - d^{-1} V_S(Lambda R)| per test measure
  double max_residual = 0;
  double anchor_value = 0;  // V_S(anchor)
};

template <int K>
FunctionalEquationReport functional_equation_check(const Endomorphism<K>& f, const Current11<K>& S,
                                                   const GreenCurrent<K>& T, const GridMeasure<K>& anchor,
                                                   const std::vector<GridMeasure<K>>& tests) {
  const auto V = dynamical_super_potential<K>(S, T, anchor);
  const auto VL = dynamical_super_potential<K>(pullback<K>(f, S), T, anchor);
  FunctionalEquationReport rep;
  rep.anchor_value = V(anchor).value;
  for (const auto& R : tests) {
    const double r = std::abs(VL(R).value - V(pushforward_measure<K>(f, R)).value / f.degree());
    rep.residuals.push_back(r);
    rep.max_residual = std::max(rep.max_residual, r);
  }
  return rep;
}

}  // namespace spc::dynamics
