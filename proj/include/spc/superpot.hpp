#pragma once

// Super-potentials of (1,1)-currents and of measures on P^K.
//
// Every evaluation pairs the mean-m quasi-potential of the (1,1) side with the
// measure side: U_S(R) = int (u_S - <u_S> + m) dR. On P^1 both sides are
// measures and either one can play the (1,1) role, which is what the symmetry
// check compares.

#include <spc/core.hpp>
#include <spc/currents/measure.hpp>
#include <spc/currents/potential.hpp>
#include <spc/currents/regularize.hpp>
#include <spc/geom.hpp>

#include <random>
#include <string>
#include <vector>

namespace spc::superpot {

using currents::Current11;
using currents::GridMeasure;

struct SuperPotentialValue {
  double value = 0;
  bool minus_infinity = false;
  double mean = 0;
  std::string method = "direct-pairing";
  std::vector<std::pair<double, double>> theta_trace;

  /// Marker arithmetic is absorbing.
  SuperPotentialValue shifted(double d) const {
    SuperPotentialValue r = *this;
    if (!minus_infinity) r.value += d;
    r.mean += d;
    return r;
  }
};

namespace detail {

inline SuperPotentialValue finish(double v, double m) {
  SuperPotentialValue r;
  r.mean = m;
  if (!std::isfinite(v) || v < kMinusInfinityFloor) {
    r.value = kMinusInfinityFloor;
    r.minus_infinity = true;
  } else {
    r.value = v;
  }
  return r;
}

}  // namespace detail

/// U_S(nu) with the quasi-potential of S normalized to mean m.
template <int K>
SuperPotentialValue super_potential(const Current11<K>& S, const GridMeasure<K>& nu, double m = 0) {
  const double shift = m - S.u.mean();
  const double v = nu.integrate([&](const HPoint<K>& z) { return S.u(z) + shift; });
  return detail::finish(v, m);
}

/// U_nu(S) = U_S(nu) (measure side first).
template <int K>
SuperPotentialValue super_potential(const GridMeasure<K>& nu, const Current11<K>& S, double m = 0) {
  return super_potential<K>(S, nu, m);
}

/// P^1: U_S(R) = <trace R, u_S>, both sides (1,1).
inline SuperPotentialValue super_potential(const Current11<1>& S, const Current11<1>& R, double m = 0,
                                           const currents::TraceOptions& opts = currents::TraceOptions::defaults<1>()) {
  return super_potential<1>(S, currents::trace_measure<1>(R, opts), m);
}

// ---------------------------------------------------------------------------
// theta-profiles

struct ThetaProfile {
  std::vector<std::pair<double, double>> values;  // (|theta|, U_S(R_theta)), theta decreasing
  double A = 0;                                   // fitted, >= 0
  double limit = 0;                               // fitted value at theta = 0
  bool monotone = false;                          // value + A theta^2 non-increasing as theta -> 0
  bool diverging = false;                         // some value hit the floor
};

namespace detail {

/// Fit v = a + c t^2; A = max(0, -c), then test monotonicity of v + A t^2.
inline void fit_profile(ThetaProfile& p, double tol) {
  const std::size_t n = p.values.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& [t, v] : p.values) {
    const double x = t * t;
    sx += x;
    sy += v;
    sxx += x * x;
    sxy += x * v;
  }
  const double den = n * sxx - sx * sx;
  const double c = n > 1 && den != 0 ? (n * sxy - sx * sy) / den : 0.0;
  const double a = (sy - c * sx) / n;
  p.A = std::max(0.0, -c);
  p.limit = a;
  p.monotone = true;
  for (std::size_t i = 1; i < n; ++i) {
    const auto& [t0, v0] = p.values[i - 1];
    const auto& [t1, v1] = p.values[i];
    if (v1 + p.A * t1 * t1 > v0 + p.A * t0 * t0 + tol * (1 + std::abs(v0))) p.monotone = false;
  }
}

}  // namespace detail

/// U_S(R_theta) along decreasing |theta|, regularizing the measure side with
/// shared parameter draws.
template <int K>
ThetaProfile theta_profile(const Current11<K>& S, const GridMeasure<K>& R, const std::vector<double>& thetas,
                           int samples = 64, std::uint64_t seed = 1, double m = 0, double tol = 1e-3) {
  for (std::size_t i = 0; i < thetas.size(); ++i) {
    if (!(thetas[i] > 0) || thetas[i] > 1) throw DomainError("theta values must lie in (0, 1]");
    if (i && thetas[i] >= thetas[i - 1]) throw DomainError("theta values must be decreasing");
  }
  ThetaProfile p;
  for (double t : thetas) {
    const auto v = super_potential<K>(S, currents::regularize<K>(R, t, samples, seed), m);
    p.diverging = p.diverging || v.minus_infinity;
    p.values.emplace_back(t, v.value);
  }
  detail::fit_profile(p, tol);
  return p;
}

// ---------------------------------------------------------------------------
// Hartogs convergence

struct HartogsReport {
  std::vector<double> c;            // c_n = max_R max(0, U_S(R) - U_{S_n}(R))
  std::vector<double> final_gap;    // U_{S_N}(R) - U_S(R), per probe
  std::vector<bool> element_pass;   // per probe
  bool pass = false;
};

/// Checks U_{S_n}(R) + c_n >= U_S(R) with c_n -> 0 and limsup U_{S_n}(R) <= U_S(R)
/// on a family of probe measures.
template <int K>
HartogsReport hartogs_check(const std::vector<Current11<K>>& Sn, const Current11<K>& S,
                            const std::vector<GridMeasure<K>>& probes, double tol = 1e-2) {
  if (Sn.size() < 3) throw DomainError("hartogs_check needs a sequence of length >= 3");
  HartogsReport rep;
  std::vector<double> base;
  for (const auto& R : probes) base.push_back(super_potential<K>(S, R).value);
  std::vector<std::vector<double>> gaps(Sn.size(), std::vector<double>(probes.size()));
  for (std::size_t n = 0; n < Sn.size(); ++n) {
    double c = 0;
    for (std::size_t j = 0; j < probes.size(); ++j) {
      gaps[n][j] = super_potential<K>(Sn[n], probes[j]).value - base[j];
      c = std::max(c, -gaps[n][j]);
    }
    rep.c.push_back(c);
  }
  rep.pass = true;
  for (std::size_t j = 0; j < probes.size(); ++j) {
    const double g = gaps.back()[j];
    rep.final_gap.push_back(g);
    const bool ok = std::abs(g) <= tol * (1 + std::abs(base[j]));
    rep.element_pass.push_back(ok);
    rep.pass = rep.pass && ok;
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Log bound

struct LogBoundReport {
  std::vector<double> values, sup_norms, ratios;
  double c = 0;  // max ratio
  bool bounded = false;  // ratios show no growth trend
};

namespace detail {

inline LogBoundReport finish_log_bound(LogBoundReport r) {
  for (std::size_t i = 0; i < r.values.size(); ++i) {
    const double lp = std::max(0.0, std::log(r.sup_norms[i]));
    r.ratios.push_back(std::abs(r.values[i]) / (1 + lp));
    r.c = std::max(r.c, r.ratios.back());
  }
  // No growth: the last ratio does not exceed the first half's maximum by more
  // than 10%.
  double early = 0;
  for (std::size_t i = 0; i < (r.ratios.size() + 1) / 2; ++i) early = std::max(early, r.ratios[i]);
  r.bounded = !r.ratios.empty() && r.ratios.back() <= 1.1 * early + 1e-12;
  return r;
}

}  // namespace detail

/// |U_S(R_j)| / (1 + log+ ||R_j||_inf) for measures R_j, S a (1,1)-current.
template <int K>
LogBoundReport log_bound_check(const Current11<K>& S, const std::vector<GridMeasure<K>>& Rs) {
  LogBoundReport r;
  for (const auto& R : Rs) {
    r.values.push_back(super_potential<K>(S, R).value);
    r.sup_norms.push_back(currents::sup_density<K>(R));
  }
  return detail::finish_log_bound(std::move(r));
}

/// P^1: S a measure, R_j (1,1)-currents (regularized forms).
inline LogBoundReport log_bound_check(const GridMeasure<1>& S, const std::vector<Current11<1>>& Rs) {
  LogBoundReport r;
  for (const auto& R : Rs) {
    r.values.push_back(super_potential<1>(R, S).value);
    r.sup_norms.push_back(currents::sup_density<1>(currents::trace_measure<1>(R)));
  }
  return detail::finish_log_bound(std::move(r));
}

// ---------------------------------------------------------------------------
// Capacity

struct CapacityEstimate {
  double lower = 0, upper = 1;
  double c_fit = 0;  // max over witnesses of max(phi) - <phi>
  std::string witness;
};

/// A quasi-psh witness phi = u + shift with max phi = 0.
template <int K>
struct Witness {
  currents::QuasiPotential<K> u;
  double shift = 0;
  std::string label;

  double operator()(const HPoint<K>& z) const { return u(z) + shift; }
  double mean() const { return u.mean() + shift; }
};

namespace detail {

template <int K>
const PointCloud<K>& max_grid() {
  static const PointCloud<K> q = K == 1 ? fs_quadrature<K>(96, 192) : fs_quadrature<K>(20, 32);
  return q;
}

template <int K>
double grid_max(const currents::QuasiPotential<K>& u) {
  const auto& q = max_grid<K>();
  double m = -std::numeric_limits<double>::infinity();
  for (const auto& z : q.points) m = std::max(m, u(z));
  return m;
}

/// 1/2 log(|l.z|^2/|z|^2 + eps^2 (1 - |l.z|^2/|z|^2)) for unit l: a smoothed
/// log-distance to the hyperplane l; its maximum is exactly 0.
template <int K>
currents::GramTerm<K> smoothed_hyperplane(HPoint<K> l, double eps) {
  l = normalize<K>(l);
  Eigen::Matrix<cd, K + 1, 1> n;
  for (int i = 0; i <= K; ++i) n(i) = std::conj(l[i]);
  // B = P + eps (I - P) with P the projection on n, so B*B = P + eps^2 (I - P).
  const Mat<K> P = n * n.adjoint();
  const Mat<K> root = P + eps * (Mat<K>::Identity() - P);
  return currents::GramTerm<K>::from_factor(root);
}

template <int K>
HPoint<K> random_point(std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  HPoint<K> z;
  for (int i = 0; i <= K; ++i) z[i] = cd(nd(rng), nd(rng));
  return normalize<K>(z);
}

/// Random binary/ternary form of degree m with Gaussian coefficients.
template <int K>
currents::FlatPoly<K> random_form(int m, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  currents::FlatPoly<K> p;
  p.degree = m;
  if constexpr (K == 1) {
    for (int a = 0; a <= m; ++a) p.terms.push_back({cd(nd(rng), nd(rng)), {a, m - a}});
  } else {
    for (int a = 0; a <= m; ++a)
      for (int b = 0; a + b <= m; ++b) p.terms.push_back({cd(nd(rng), nd(rng)), {a, b, m - a - b}});
  }
  return p;
}

}  // namespace detail

/// Witness i of the capacity family. The sequence does not depend on the
/// family size, so larger families contain smaller ones. Pattern of five:
/// two divisor potentials of degree 1..3, two smoothed log-distances (one
/// centered on a point drawn from R) at scales decreasing along the sequence,
/// one convex mix of two earlier witnesses.
template <int K>
std::vector<Witness<K>> capacity_witnesses(const GridMeasure<K>& R, int count, std::uint64_t seed) {
  const PointCloud<K> cloud = R.as_cloud();
  std::vector<double> cum;
  double acc = 0;
  for (double w : cloud.weights) cum.push_back(acc += std::max(0.0, w));
  std::vector<Witness<K>> ws;
  for (int i = 0; i < count; ++i) {
    std::mt19937_64 rng(seed * 1000003ULL + static_cast<std::uint64_t>(i));
    Witness<K> w;
    switch (i % 5) {
      case 0:
      case 1: {
        const int m = 1 + static_cast<int>(rng() % 3);
        w.u.divisors.push_back(currents::make_divisor<K>(detail::random_form<K>(m, rng), 1.0));
        w.label = "divisor-degree-" + std::to_string(m);
        break;
      }
      case 2:
      case 3: {
        HPoint<K> a;
        if (i % 5 == 3 && acc > 0) {
          const double t = std::uniform_real_distribution<double>(0, acc)(rng);
          a = cloud.points[std::lower_bound(cum.begin(), cum.end(), t) - cum.begin()];
        } else {
          a = detail::random_point<K>(rng);
        }
        // Hyperplane through a (the point itself on P^1).
        HPoint<K> l;
        if constexpr (K == 1) {
          l = {-a[1], a[0]};
        } else {
          const auto b = detail::random_point<K>(rng);
          // l = a x b (bilinear), so l . a = 0.
          l = {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
        }
        // Smoothing scales shrink along the sequence.
        const double eps = std::max(1e-12, 0.3 * std::exp(-i / 8.0)) * std::uniform_real_distribution<double>(0.5, 1)(rng);
        w.u.gram.push_back(detail::smoothed_hyperplane<K>(l, eps));
        w.label = "smoothed-log-distance";
        break;
      }
      default: {
        const std::size_t j = rng() % ws.size(), k = rng() % ws.size();
        const double t = std::uniform_real_distribution<double>(0.2, 0.8)(rng);
        w.u = ws[j].u.scaled(t);
        w.u.append(ws[k].u.scaled(1 - t));
        w.label = "mix(" + ws[j].label + "," + ws[k].label + ")";
        break;
      }
    }
    w.shift = -detail::grid_max<K>(w.u);
    ws.push_back(std::move(w));
  }
  return ws;
}

/// cap(R) between exp(min_phi <R, phi - <phi>> - c_fit) and min_phi exp(<R, phi>).
template <int K>
CapacityEstimate capacity_estimate(const GridMeasure<K>& R, int family_size = 80, std::uint64_t seed = 1) {
  if (family_size < 1) throw DomainError("family size must be positive");
  const auto ws = capacity_witnesses<K>(R, family_size, seed);
  const double mass = R.mass();
  CapacityEstimate c;
  double best = std::numeric_limits<double>::infinity(), inf_u0 = std::numeric_limits<double>::infinity();
  for (const auto& w : ws) {
    double v = R.integrate(w);
    if (!std::isfinite(v)) v = kMinusInfinityFloor;
    const double mean = w.mean();
    c.c_fit = std::max(c.c_fit, -mean);
    inf_u0 = std::min(inf_u0, v - mass * mean);
    if (v < best) {
      best = v;
      c.witness = w.label;
    }
  }
  c.upper = std::min(1.0, std::exp(best));
  c.lower = std::min(c.upper, std::exp(inf_u0 - c.c_fit));
  return c;
}

}  // namespace spc::superpot
