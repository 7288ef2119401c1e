#pragma once

// Wedge products R1 ^ R2 of (1,1)-currents on P^2.
//
// Currents made of omega, Gram terms and divisor terms are multiplied
// exactly: a Gram factor is the average of its Crofton lines, and
// [L] ^ R is the restriction of R to L, a measure on a copy of P^1 computed
// from the restricted potential. Currents with function terms go through
// finite-difference mixed Hessians, either on the partition patches covering
// P^2 or on a localized chart window.

#include <spc/core.hpp>
#include <spc/currents/gram.hpp>
#include <spc/currents/measure.hpp>
#include <spc/currents/panel.hpp>
#include <spc/currents/potential.hpp>
#include <spc/currents/regularize.hpp>
#include <spc/geom.hpp>

#include <Eigen/QR>
#include <deque>
#include <limits>
#include <map>
#include <string>
#include <vector>

namespace spc::intersect {

using currents::Current11;
using currents::GridMeasure;

struct WedgeOptions {
  currents::TraceOptions trace = currents::TraceOptions::defaults<2>();
  // Crofton lines of a smooth Gram factor, and Crofton points of smooth Gram
  // terms restricted to one of those lines.
  int cross_radial = 4, cross_angular = 6;
  int line_radial = 8, line_angular = 16;
  int fd_n = 28;
  // Length scale used for "within c cells" readouts: a 48-node window of radius 2.
  double cell = 4.0 / 48;
};

struct Atom {
  HPoint<2> point;
  double weight = 0;
};

struct WedgeResult {
  GridMeasure<2> product;
  double mass = 0;
  double negative_mass = 0;
  bool wedgeable = false;
  double integrability = 0;  // int u_2 d(trace R_1), mean-0 potential
  std::string route;
  std::vector<Atom> atoms;
};

struct Wedgeability {
  bool wedgeable = false;
  double value = 0;
};

/// Potential values below this are rounding residue of a pole: a trace point
/// of R_1 lies on the polar set of u_2.
inline constexpr double kPoleCutoff = -30.0;

/// int (u_2 - <u_2>) d(trace R_1); wedgeable when finite above the floor.
inline Wedgeability wedgeable(const Current11<2>& R1, const Current11<2>& R2, const WedgeOptions& o = {}) {
  const auto mu = currents::trace_measure<2>(R1, o.trace);
  const double m = R2.u.mean();
  const double v = mu.integrate([&](const HPoint<2>& z) {
    const double x = R2.u(z);
    return x < kPoleCutoff ? -std::numeric_limits<double>::infinity() : x - m;
  });
  Wedgeability w;
  w.wedgeable = std::isfinite(v) && v > kMinusInfinityFloor;
  w.value = w.wedgeable ? v : kMinusInfinityFloor;
  return w;
}

namespace detail {

inline HPoint<2> on_line(const HPoint<2>& u, const HPoint<2>& v, const HPoint<1>& st) {
  return {st[0] * u[0] + st[1] * v[0], st[0] * u[1] + st[1] * v[1], st[0] * u[2] + st[1] * v[2]};
}

/// Upper-triangular factor R with (B E)* (B E) = R* R, at most two rows.
inline currents::RowFactor<1> restrict_factor(const currents::RowFactor<2>& B, const HPoint<2>& u,
                                              const HPoint<2>& v) {
  Eigen::Matrix<cd, 3, 2> E;
  for (int i = 0; i < 3; ++i) {
    E(i, 0) = u[i];
    E(i, 1) = v[i];
  }
  Eigen::Matrix<cd, Eigen::Dynamic, 2> BE = B * E;
  if (BE.rows() <= 2) return BE;
  Eigen::HouseholderQR<Eigen::Matrix<cd, Eigen::Dynamic, 2>> qr(BE);
  Eigen::Matrix<cd, Eigen::Dynamic, 2> R = qr.matrixQR().topRows(2).triangularView<Eigen::Upper>();
  return R;
}

enum class Kind { omega, gram, divisor };

struct Component {
  Kind kind;
  double weight;
  std::size_t index;
};

inline std::vector<Component> components(const Current11<2>& R) {
  std::vector<Component> c;
  const double bg = R.u.background();
  if (bg > 1e-15) c.push_back({Kind::omega, bg, 0});
  for (std::size_t i = 0; i < R.u.gram.size(); ++i) c.push_back({Kind::gram, R.u.gram[i].weight, i});
  for (std::size_t i = 0; i < R.u.divisors.size(); ++i) c.push_back({Kind::divisor, R.u.divisors[i].weight, i});
  return c;
}

/// w * (component restricted to the line spanned by u, v), pushed into the cloud.
inline void restrict_to_line(PointCloud<2>& cloud, const Current11<2>& R, const Component& c, const HPoint<2>& u,
                             const HPoint<2>& v, double w, const WedgeOptions& o) {
  switch (c.kind) {
    case Kind::omega: {
      const auto arc = fs_quadrature<1>(o.trace.arc_radial, o.trace.arc_angular);
      for (std::size_t i = 0; i < arc.size(); ++i) cloud.add(on_line(u, v, arc.points[i]), w * arc.weights[i]);
      break;
    }
    case Kind::gram: {
      const auto F = restrict_factor(R.u.gram[c.index].B, u, v);
      if (F.norm() < 1e-13 * (1 + R.u.gram[c.index].B.norm()))
        throw NotWedgeableError("a hyperplane factor contains the restriction line", kMinusInfinityFloor);
      for (const auto& [l, wl] : currents::crofton_hyperplanes<1>(F, o.line_radial, o.line_angular))
        cloud.add(on_line(u, v, currents::hyperplane_point(l)), w * wl);
      break;
    }
    case Kind::divisor: {
      const auto& d = R.u.divisors[c.index];
      const int m = d.degree();
      const auto coeffs = d.restricted(u, v);
      double scale = 0;
      for (const auto& x : coeffs) scale = std::max(scale, std::abs(x));
      if (scale == 0) throw NotWedgeableError("the restriction line is a component of a divisor factor", kMinusInfinityFloor);
      for (const auto& st : currents::binary_zeros(coeffs, m, nullptr))
        cloud.add(on_line(u, v, HPoint<1>{st[0], st[1]}), w / m);
      break;
    }
  }
}

inline void single_trace(PointCloud<2>& cloud, const Current11<2>& R, const Component& c, double w,
                         const WedgeOptions& o) {
  switch (c.kind) {
    case Kind::omega:
      cloud.append(fs_quadrature<2>(o.trace.fs_radial, o.trace.fs_angular), w);
      break;
    case Kind::gram: {
      auto g = R.u.gram[c.index];
      g.weight = w;
      currents::add_gram_trace<2>(cloud, g, o.trace);
      break;
    }
    case Kind::divisor: {
      auto d = R.u.divisors[c.index];
      d.weight = w;
      currents::add_divisor_trace<2>(cloud, d, o.trace);
      break;
    }
  }
}

/// Exact product of two components (weights not included).
inline void component_product(PointCloud<2>& cloud, const Current11<2>& R1, const Component& a,
                              const Current11<2>& R2, const Component& b, const WedgeOptions& o) {
  const double w = a.weight * b.weight;
  if (a.kind == Kind::omega) return single_trace(cloud, R2, b, w, o);
  if (b.kind == Kind::omega) return single_trace(cloud, R1, a, w, o);
  // Crofton lines of the first Gram factor, restriction of the other one.
  const bool first = a.kind == Kind::gram;
  if (!first && b.kind != Kind::gram)
    throw DomainError("products of two divisor curves are not supported; regularize one factor");
  const auto& G = first ? R1.u.gram[a.index] : R2.u.gram[b.index];
  const auto& other = first ? R2 : R1;
  const auto& oc = first ? b : a;
  const int nr = G.rank() == 1 ? 1 : o.cross_radial, na = G.rank() == 1 ? 1 : o.cross_angular;
  for (const auto& [l, wl] : currents::crofton_hyperplanes<2>(G.B, nr, na)) {
    const auto [u, v] = currents::line_basis(l);
    restrict_to_line(cloud, other, oc, u, v, w * wl, o);
  }
}

/// Local psh potential of S in a chart: 1/2 log(1 + |x|^2) + u(x).
inline double chart_potential(const Current11<2>& S, const ChartPoint<2>& x, int chart) {
  double r2 = 0;
  for (const auto& c : x) r2 += std::norm(c);
  return 0.5 * std::log1p(r2) + S.u(lift<2>(x, chart));
}

}  // namespace detail

/// Atoms of a point cloud: points are merged when their canonical
/// representatives (unit norm, first nonzero coordinate real positive) fall in
/// the same cell of side r; clusters of weight >= min_weight are reported.
inline std::vector<Atom> extract_atoms(const PointCloud<2>& c, double r, double min_weight) {
  std::map<std::array<long long, 6>, Atom> cells;
  for (std::size_t i = 0; i < c.size(); ++i) {
    HPoint<2> z = normalize<2>(c.points[i]);
    int j = 0;
    while (j < 2 && std::abs(z[j]) < 1e-12) ++j;
    const cd ph = std::abs(z[j]) > 0 ? std::conj(z[j]) / std::abs(z[j]) : cd(1);
    std::array<long long, 6> key;
    for (int a = 0; a < 3; ++a) {
      z[a] *= ph;
      key[2 * a] = std::llround(z[a].real() / r);
      key[2 * a + 1] = std::llround(z[a].imag() / r);
    }
    auto& atom = cells[key];
    if (atom.weight == 0) atom.point = z;
    atom.weight += c.weights[i];
  }
  std::vector<Atom> atoms;
  for (const auto& [k, a] : cells)
    if (a.weight >= min_weight) atoms.push_back(a);
  std::sort(atoms.begin(), atoms.end(), [](const Atom& a, const Atom& b) { return a.weight > b.weight; });
  return atoms;
}

/// Atoms of a window patch: connected components (face neighbours) of nodes
/// whose density exceeds `factor` times the median positive density.
inline std::vector<Atom> extract_atoms(const currents::Patch<2>& p, double factor = 10) {
  std::vector<double> pos;
  for (double w : p.weights)
    if (w > 0) pos.push_back(w);
  if (pos.empty()) return {};
  std::nth_element(pos.begin(), pos.begin() + pos.size() / 2, pos.end());
  const double thr = factor * pos[pos.size() / 2];
  std::vector<char> seen(p.weights.size(), 0);
  std::vector<Atom> atoms;
  for (std::size_t s = 0; s < p.weights.size(); ++s) {
    if (seen[s] || p.weights[s] <= thr) continue;
    std::deque<std::size_t> q{s};
    seen[s] = 1;
    double w = 0;
    HPoint<2> best = p.grid.hnode(s);
    double bw = -1;
    while (!q.empty()) {
      const std::size_t i = q.front();
      q.pop_front();
      w += p.weights[i];
      if (p.weights[i] > bw) {
        bw = p.weights[i];
        best = p.grid.hnode(i);
      }
      const auto m = p.grid.multi_index(i);
      for (int a = 0; a < 4; ++a)
        for (int d : {-1, 1}) {
          auto mm = m;
          mm[a] += d;
          if (mm[a] < 0 || mm[a] >= p.grid.n) continue;
          const std::size_t j = p.grid.index(mm);
          if (!seen[j] && p.weights[j] > thr) {
            seen[j] = 1;
            q.push_back(j);
          }
        }
    }
    atoms.push_back({normalize<2>(best), w});
  }
  std::sort(atoms.begin(), atoms.end(), [](const Atom& a, const Atom& b) { return a.weight > b.weight; });
  return atoms;
}

/// Separable binomial smoothing with 2r+1 taps along each real axis. A
/// positive kernel keeps plurisubharmonic functions plurisubharmonic.
inline void smooth_grid(const ChartGrid<2>& g, std::vector<double>& v, int r) {
  if (r <= 0) return;
  std::vector<double> k(2 * r + 1);
  double s = 0;
  for (int i = 0; i <= 2 * r; ++i) s += k[i] = std::exp(std::lgamma(2 * r + 1) - std::lgamma(i + 1) - std::lgamma(2 * r - i + 1));
  for (auto& x : k) x /= s;
  std::vector<double> out(v.size());
  for (int a = 0; a < 4; ++a) {
    parallel_for(g.size(), [&](std::size_t i) {
      const auto m = g.multi_index(i);
      double acc = 0;
      for (int t = -r; t <= r; ++t) {
        auto mm = m;
        mm[a] = std::clamp(m[a] + t, 0, g.n - 1);
        acc += k[t + r] * v[g.index(mm)];
      }
      out[i] = acc;
    });
    v.swap(out);
  }
}

/// Fourth-order complex Hessian at a node at least two cells from the edge:
/// five-point second differences and products of four-point first differences.
inline currents::CHess<2> fd_hessian4(const ChartGrid<2>& g, const std::vector<double>& v, const std::array<int, 4>& m) {
  const double h = g.h();
  auto at = [&](int a, int da, int b, int db) {
    auto mm = m;
    mm[a] += da;
    mm[b] += db;
    return v[g.index(mm)];
  };
  auto d2 = [&](int a) {
    return (-at(a, 2, a, 0) + 16 * at(a, 1, a, 0) - 30 * at(a, 0, a, 0) + 16 * at(a, -1, a, 0) - at(a, -2, a, 0)) /
           (12 * h * h);
  };
  static constexpr int s[4] = {-2, -1, 1, 2};
  static constexpr double c[4] = {1, -8, 8, -1};
  auto dx = [&](int a, int b) {
    double acc = 0;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) acc += c[i] * c[j] * at(a, s[i], b, s[j]);
    return acc / (144 * h * h);
  };
  currents::CHess<2> H{};
  for (int i = 0; i < 2; ++i) H[i][i] = 0.25 * (d2(2 * i) + d2(2 * i + 1));
  const cd h01 = 0.25 * cd(dx(0, 2) + dx(1, 3), dx(0, 3) - dx(1, 2));
  H[0][1] = h01;
  H[1][0] = std::conj(h01);
  return H;
}

/// dd^c phi1 ^ dd^c phi2 on a chart window, for local psh potentials given in
/// chart coordinates. The potentials are sampled on a grid extended by the
/// smoothing and stencil widths, smoothed, and differentiated with fourth-order
/// differences. Every node of the window gets its own weight.
template <class F1, class F2>
currents::Patch<2> monge_ampere_window(F1&& phi1, F2&& phi2, const ChartGrid<2>& window, int smoothing = 2,
                                       bool same = false) {
  window.validate();
  const int pad = smoothing + 2;
  ChartGrid<2> ext = window;
  ext.n = window.n + 2 * pad;
  ext.radius = window.radius + pad * window.h();
  std::vector<double> v1(ext.size());
  parallel_for(ext.size(), [&](std::size_t i) { v1[i] = phi1(ext.node(i)); });
  smooth_grid(ext, v1, smoothing);
  std::vector<double> v2;
  if (!same) {
    v2.resize(ext.size());
    parallel_for(ext.size(), [&](std::size_t i) { v2[i] = phi2(ext.node(i)); });
    smooth_grid(ext, v2, smoothing);
  }
  for (double x : v1)
    if (!std::isfinite(x)) throw ResolutionError("window potential is not finite; regularize the factor");
  currents::Patch<2> p{window, std::vector<double>(window.size(), 0.0)};
  const double vol = window.cell_volume();
  parallel_for(window.size(), [&](std::size_t i) {
    auto m = window.multi_index(i);
    for (auto& x : m) x += pad;
    const auto H1 = fd_hessian4(ext, v1, m);
    const auto H2 = same ? H1 : fd_hessian4(ext, v2, m);
    p.weights[i] = 4 / (kPi * kPi) * currents::mixdet(H1, H2) * vol;
  });
  return p;
}

/// Product on the partition patches covering P^2 from the full potentials.
inline GridMeasure<2> fd_product(const Current11<2>& R1, const Current11<2>& R2, int n) {
  GridMeasure<2> mu;
  for (const auto& g : currents::partition_grids<2>(n)) {
    auto f1 = [&](const HPoint<2>& z) { return R1.u(z); };
    auto f2 = [&](const HPoint<2>& z) { return R2.u(z); };
    const auto v1 = currents::sample_grid<2>(g, f1), v2 = currents::sample_grid<2>(g, f2);
    for (std::size_t i = 0; i < v1.size(); ++i)
      if (!std::isfinite(v1[i]) || !std::isfinite(v2[i]))
        throw ResolutionError("singular terms cannot be differentiated on the grid; regularize the factor");
    currents::Patch<2> p{g, std::vector<double>(g.size(), 0.0)};
    const double vol = g.cell_volume();
    parallel_for(g.size(), [&](std::size_t i) {
      const auto m = g.multi_index(i);
      if (!currents::interior<2>(g, m)) return;
      const double chi = currents::ChartPartition<2>::weight(g.hnode(i), g.chart);
      if (chi == 0) return;
      const auto x = g.node(m);
      auto H1 = currents::fd_hessian<2>(g, v1, m), H2 = currents::fd_hessian<2>(g, v2, m);
      const auto F = currents::fs_hessian<2>(x);
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
          H1[a][b] += F[a][b];
          H2[a][b] += F[a][b];
        }
      p.weights[i] = chi * 4 / (kPi * kPi) * currents::mixdet(H1, H2) * vol;
    });
    mu.patches.push_back(std::move(p));
  }
  return mu;
}

/// R1 ^ R2, a probability measure on P^2.
inline WedgeResult wedge(const Current11<2>& R1, const Current11<2>& R2, const WedgeOptions& o = {}) {
  WedgeResult r;
  const auto w = wedgeable(R1, R2, o);
  r.wedgeable = w.wedgeable;
  r.integrability = w.value;
  if (!w.wedgeable)
    throw NotWedgeableError("potential of the second factor is not integrable against the trace of the first (value " +
                            std::to_string(w.value) + ")",
                            w.value);
  if (R1.u.functions.empty() && R2.u.functions.empty()) {
    r.route = "exact";
    const auto c1 = detail::components(R1), c2 = detail::components(R2);
    for (const auto& a : c1)
      for (const auto& b : c2) detail::component_product(r.product.cloud, R1, a, R2, b, o);
    r.atoms = extract_atoms(r.product.cloud, 1e-9, 1e-3);
  } else {
    r.route = "finite-difference";
    r.product = fd_product(R1, R2, o.fd_n);
  }
  r.mass = r.product.mass();
  r.negative_mass = r.product.negative_mass();
  return r;
}

/// Fraction of the mass of mu within Fubini-Study distance d of the point a.
inline double mass_near(const GridMeasure<2>& mu, const HPoint<2>& a, double d) {
  return mu.integrate([&](const HPoint<2>& z) { return fs_distance<2>(z, a) <= d ? 1.0 : 0.0; }) / mu.mass();
}

struct WedgeLawsReport {
  double symmetry_gap = 0;           // max dist_2(R1 ^ R2, R2 ^ R1)
  double omega_gap = 0;              // max dist_2(R1 ^ omega, trace R1)
  double bilinearity_gap = 0;        // dist_2 of (tR + (1-t)R') ^ S against the combination
  std::vector<double> continuity;    // dist_2(R1_theta ^ R2_theta, R1 ^ R2), theta decreasing
  bool continuity_decreasing = false;
  bool pass = false;
};

/// Symmetry and the omega law on every pair; bilinearity and regularized
/// continuity on the first pair.
inline WedgeLawsReport wedge_laws_check(const std::vector<std::pair<Current11<2>, Current11<2>>>& pairs,
                                        const std::vector<double>& thetas = {0.1, 0.05, 0.025}, int samples = 64,
                                        std::uint64_t seed = 1, const WedgeOptions& o = {}) {
  if (pairs.empty()) throw DomainError("wedge_laws_check needs at least one pair");
  WedgeLawsReport rep;
  const auto& panel = currents::default_panel<2>();
  const auto omega = Current11<2>::fubini_study();
  for (const auto& [a, b] : pairs) {
    const auto ab = currents::panel_pairings<2>(wedge(a, b, o).product, panel);
    const auto ba = currents::panel_pairings<2>(wedge(b, a, o).product, panel);
    rep.symmetry_gap = std::max(rep.symmetry_gap, currents::dist_from_pairings<2>(ab, ba, 2.0, panel));
    const auto ao = currents::panel_pairings<2>(wedge(a, omega, o).product, panel);
    const auto ta = currents::panel_pairings<2>(currents::trace_measure<2>(a, o.trace), panel);
    rep.omega_gap = std::max(rep.omega_gap, currents::dist_from_pairings<2>(ao, ta, 2.0, panel));
  }
  const auto& [R1, R2] = pairs.front();
  {
    const double t = 0.3;
    const auto mix = currents::mixture<2>({{t, R1}, {1 - t, omega}});
    const auto lhs = currents::panel_pairings<2>(wedge(mix, R2, o).product, panel);
    const auto p1 = currents::panel_pairings<2>(wedge(R1, R2, o).product, panel);
    const auto p2 = currents::panel_pairings<2>(wedge(omega, R2, o).product, panel);
    std::vector<double> rhs(p1.size());
    for (std::size_t j = 0; j < rhs.size(); ++j) rhs[j] = t * p1[j] + (1 - t) * p2[j];
    rep.bilinearity_gap = currents::dist_from_pairings<2>(lhs, rhs, 2.0, panel);
  }
  const auto base = currents::panel_pairings<2>(wedge(R1, R2, o).product, panel);
  for (double th : thetas) {
    const auto a = currents::regularize<2>(R1, th, samples, seed), b = currents::regularize<2>(R2, th, samples, seed + 1);
    rep.continuity.push_back(
        currents::dist_from_pairings<2>(currents::panel_pairings<2>(wedge(a, b, o).product, panel), base, 2.0, panel));
  }
  rep.continuity_decreasing = true;
  for (std::size_t i = 1; i < rep.continuity.size(); ++i)
    rep.continuity_decreasing = rep.continuity_decreasing && rep.continuity[i] < rep.continuity[i - 1];
  rep.pass = rep.symmetry_gap <= 2e-2 && rep.omega_gap <= 1e-12 && rep.bilinearity_gap <= 1e-6 && rep.continuity_decreasing;
  return rep;
}

}  // namespace spc::intersect
