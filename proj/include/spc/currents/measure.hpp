#pragma once

// Positive measures on P^K and the trace measure S ^ omega^{K-1} of a
// (1,1)-current. Gram and divisor terms contribute exact weighted point sets
// (Crofton decompositions); function terms are differentiated on chart grids
// glued by a smooth partition of unity.

#include <spc/core.hpp>
#include <spc/currents/gram.hpp>
#include <spc/currents/potential.hpp>
#include <spc/geom.hpp>

#include <vector>

namespace spc::currents {

/// Nodal weights on one chart grid.
template <int K>
struct Patch {
  ChartGrid<K> grid;
  std::vector<double> weights;  // one per node; zero outside the partition support
};

template <int K>
struct GridMeasure {
  PointCloud<K> cloud;  // atoms and exact point sets
  std::vector<Patch<K>> patches;

  static GridMeasure dirac(const HPoint<K>& a) {
    GridMeasure m;
    m.cloud.add(normalize<K>(a), 1.0);
    return m;
  }

  double mass() const {
    double s = cloud.total();
    for (const auto& p : patches)
      s += parallel_sum(p.weights.size(), [&](std::size_t i) { return p.weights[i]; });
    return s;
  }

  template <class Fn>
  double integrate(Fn&& fn) const {
    double s = cloud.integrate(fn);
    for (const auto& p : patches)
      s += parallel_sum(p.weights.size(), [&](std::size_t i) {
        const double w = p.weights[i];
        return w == 0 ? 0.0 : w * fn(p.grid.hnode(i));
      });
    return s;
  }

  /// Total variation of the negative part of the nodal weights.
  double negative_mass() const {
    double s = 0;
    for (double w : cloud.weights) s += std::min(0.0, w);
    for (const auto& p : patches)
      for (double w : p.weights) s += std::min(0.0, w);
    return -s;
  }

  GridMeasure scaled(double t) const {
    GridMeasure r = *this;
    for (auto& w : r.cloud.weights) w *= t;
    for (auto& p : r.patches)
      for (auto& w : p.weights) w *= t;
    return r;
  }

  /// Flattens patches into the point cloud, dropping zero weights.
  PointCloud<K> as_cloud() const {
    PointCloud<K> c = cloud;
    for (const auto& p : patches)
      for (std::size_t i = 0; i < p.weights.size(); ++i)
        if (p.weights[i] != 0) c.add(p.grid.hnode(i), p.weights[i]);
    return c;
  }
};

/// t mu + (1 - t) nu as a concatenation.
template <int K>
GridMeasure<K> combine(const GridMeasure<K>& a, double ta, const GridMeasure<K>& b, double tb) {
  GridMeasure<K> r = a.scaled(ta);
  const auto bs = b.scaled(tb);
  r.cloud.append(bs.cloud);
  r.patches.insert(r.patches.end(), bs.patches.begin(), bs.patches.end());
  return r;
}

// ---------------------------------------------------------------------------
// Partition of unity subordinate to the standard charts.

/// C-infinity step: 0 for x <= 0, 1 for x >= 1.
inline double smooth_step(double x) {
  if (x <= 0) return 0;
  if (x >= 1) return 1;
  const double a = std::exp(-1 / x), b = std::exp(-1 / (1 - x));
  return a / (a + b);
}

/// chi_j = psi(t_j) / sum_i psi(t_i) with t_i = |z_i|^2/|z|^2 and psi rising
/// from 0 at t = a to 1 at t = 1/(K+1). Chart j's support is |x| <= sqrt(1/a - 1).
template <int K>
struct ChartPartition {
  static constexpr double a = K == 1 ? 1.0 / 17.0 : 0.1;
  static constexpr double b = 1.0 / (K + 1);

  static double support_radius() { return std::sqrt(1 / a - 1); }

  static double psi(double t) { return smooth_step((t - a) / (b - a)); }

  static double weight(const HPoint<K>& z, int chart) {
    const double n2 = norm2<K>(z);
    double num = 0, den = 0;
    for (int i = 0; i <= K; ++i) {
      const double p = psi(std::norm(z[i]) / n2);
      den += p;
      if (i == chart) num = p;
    }
    return num / den;
  }
};

// ---------------------------------------------------------------------------
// Finite-difference complex Hessians on chart grids.

template <int K>
using CHess = std::array<std::array<cd, K>, K>;

/// Complex Hessian d^2/dz_i dzbar_j of the chart potential of omega, 1/2 log(1 + |x|^2).
template <int K>
CHess<K> fs_hessian(const ChartPoint<K>& x) {
  double r2 = 0;
  for (const auto& c : x) r2 += std::norm(c);
  const double q = 1 + r2;
  CHess<K> H;
  for (int i = 0; i < K; ++i)
    for (int j = 0; j < K; ++j) H[i][j] = 0.5 * ((i == j ? q : 0.0) - std::conj(x[i]) * x[j]) / (q * q);
  return H;
}

/// Mixed determinant: dd^c u ^ dd^c v = (4/pi^2) mixdet(H_u, H_v) dV on C^2.
inline double mixdet(const CHess<2>& A, const CHess<2>& B) {
  return std::real(A[0][0] * B[1][1] + A[1][1] * B[0][0] - A[0][1] * B[1][0] - A[1][0] * B[0][1]);
}

/// Complex Hessian of nodal values at an interior node (centered differences).
template <int K>
CHess<K> fd_hessian(const ChartGrid<K>& g, const std::vector<double>& v, const std::array<int, 2 * K>& m) {
  const double h2 = g.h() * g.h();
  auto at = [&](std::array<int, 2 * K> mm) { return v[g.index(mm)]; };
  auto shifted = [&](int a, int da, int b, int db) {
    auto mm = m;
    mm[a] += da;
    if (db) mm[b] += db;
    return at(mm);
  };
  const double c = at(m);
  auto d2 = [&](int a) { return (shifted(a, 1, a, 0) - 2 * c + shifted(a, -1, a, 0)) / h2; };
  auto dx = [&](int a, int b) {
    return (shifted(a, 1, b, 1) - shifted(a, 1, b, -1) - shifted(a, -1, b, 1) + shifted(a, -1, b, -1)) / (4 * h2);
  };
  CHess<K> H{};
  if constexpr (K == 1) {
    // Fourth order along each axis; the grid keeps a two-cell ring.
    auto d4 = [&](int a) {
      return (-shifted(a, 2, a, 0) + 16 * shifted(a, 1, a, 0) - 30 * c + 16 * shifted(a, -1, a, 0) -
              shifted(a, -2, a, 0)) /
             (12 * h2);
    };
    H[0][0] = 0.25 * (d4(0) + d4(1));
    return H;
  }
  for (int i = 0; i < K; ++i) H[i][i] = 0.25 * (d2(2 * i) + d2(2 * i + 1));
  if constexpr (K == 2) {
    // d_i dbar_j = 1/4 [(xx + yy) + i (x_i y_j - y_i x_j)]
    const cd h01 = 0.25 * cd(dx(0, 2) + dx(1, 3), dx(0, 3) - dx(1, 2));
    H[0][1] = h01;
    H[1][0] = std::conj(h01);
  }
  return H;
}

/// Nodes whose stencil lies inside the grid (two-cell ring for K = 1).
template <int K>
bool interior(const ChartGrid<K>& g, const std::array<int, 2 * K>& m) {
  constexpr int ring = K == 1 ? 2 : 1;
  for (int a = 0; a < 2 * K; ++a)
    if (m[a] < ring || m[a] > g.n - 1 - ring) return false;
  return true;
}

/// Samples fn at all nodes of g (in the grid's chart).
template <int K, class Fn>
std::vector<double> sample_grid(const ChartGrid<K>& g, Fn&& fn) {
  std::vector<double> v(g.size());
  parallel_for(g.size(), [&](std::size_t i) { v[i] = fn(g.hnode(i)); });
  return v;
}

/// Density of dd^c s ^ omega^{K-1} against chart Lebesgue measure at node m.
template <int K>
double fd_trace_density(const ChartGrid<K>& g, const std::vector<double>& v, const std::array<int, 2 * K>& m) {
  const auto H = fd_hessian<K>(g, v, m);
  if constexpr (K == 1) {
    return 2 / kPi * std::real(H[0][0]);
  } else {
    return 4 / (kPi * kPi) * mixdet(H, fs_hessian<2>(g.node(m)));
  }
}

struct TraceOptions {
  // omega^K background and full-rank Gram directions.
  int fs_radial = 0, fs_angular = 0;
  // Crofton hyperplane directions for Gram terms of rank >= 2.
  int dir_radial = 0, dir_angular = 0;
  // Arc measure on lines (K = 2).
  int arc_radial = 0, arc_angular = 0;
  // Lines cutting divisor curves (K = 2).
  int cut_radial = 0, cut_angular = 0;
  // Finite-difference patches for function terms.
  int fd_n = 0;
  // Terms beyond which Gram clouds are coarsened.
  std::size_t fine_terms = 4;

  template <int K>
  static TraceOptions defaults() {
    TraceOptions o;
    if constexpr (K == 1) {
      o.fs_radial = 48;
      o.fs_angular = 96;
      o.dir_radial = 48;
      o.dir_angular = 96;
      o.fd_n = 512;
    } else {
      o.fs_radial = 12;
      o.fs_angular = 16;
      o.dir_radial = 6;
      o.dir_angular = 8;
      o.arc_radial = 8;
      o.arc_angular = 16;
      o.cut_radial = 10;
      o.cut_angular = 12;
      o.fd_n = 28;
    }
    return o;
  }

  /// Coarser settings for currents made of many terms.
  TraceOptions coarse() const {
    TraceOptions o = *this;
    auto half = [](int& v, int lo) { v = std::max(lo, v / 2); };
    half(o.dir_radial, 2);
    half(o.dir_angular, 4);
    half(o.arc_radial, 4);
    half(o.arc_angular, 8);
    half(o.fs_radial, 4);
    half(o.fs_angular, 8);
    return o;
  }
};

/// Chart grids covering the partition supports.
template <int K>
std::vector<ChartGrid<K>> partition_grids(int n) {
  std::vector<ChartGrid<K>> out;
  for (int j = 0; j <= K; ++j) {
    ChartGrid<K> g;
    g.chart = j;
    g.n = n;
    // Support radius plus two cells for the stencil.
    g.radius = ChartPartition<K>::support_radius() * n / (n - 4.0);
    g.validate();
    out.push_back(g);
  }
  return out;
}

/// Trace measure of dd^c s for a function s, on partition patches.
template <int K, class Fn>
std::vector<Patch<K>> fd_trace_patches(Fn&& s, int n) {
  std::vector<Patch<K>> out;
  for (const auto& g : partition_grids<K>(n)) {
    const auto v = sample_grid<K>(g, s);
    Patch<K> p{g, std::vector<double>(g.size(), 0.0)};
    const double vol = g.cell_volume();
    parallel_for(g.size(), [&](std::size_t i) {
      const auto m = g.multi_index(i);
      if (!interior<K>(g, m)) return;
      const double chi = ChartPartition<K>::weight(g.hnode(i), g.chart);
      if (chi == 0) return;
      p.weights[i] = chi * fd_trace_density<K>(g, v, m) * vol;
    });
    out.push_back(std::move(p));
  }
  return out;
}

/// Exact point set of the trace of one Gram term.
template <int K>
void add_gram_trace(PointCloud<K>& cloud, const GramTerm<K>& g, const TraceOptions& o) {
  const PointCloud<1> arc = K == 2 ? fs_quadrature<1>(o.arc_radial, o.arc_angular) : PointCloud<1>{};
  const int r = g.rank();
  const int nr = (r == K + 1 && K == 1) ? o.fs_radial : o.dir_radial;
  const int na = (r == K + 1 && K == 1) ? o.fs_angular : o.dir_angular;
  for (const auto& [l, w] : crofton_hyperplanes<K>(g.B, nr, na))
    add_hyperplane_trace<K>(cloud, l, g.weight * w, arc);
}

/// Exact point set of the trace of a divisor term.
template <int K>
void add_divisor_trace(PointCloud<K>& cloud, const DivisorTerm<K>& d, const TraceOptions& o) {
  const int m = d.degree();
  if constexpr (K == 1) {
    for (const auto& st : binary_zeros(d.restricted({1.0, 0.0}, {0.0, 1.0}), m, nullptr))
      cloud.add(normalize<1>(HPoint<1>{st[0], st[1]}), d.weight / m);
  } else {
    // [V] ^ omega = average over lines L of [V ^ L].
    for (const auto& [l, w] : dual_lines(o.cut_radial, o.cut_angular)) {
      const auto [u, v] = line_basis(l);
      for (const auto& st : binary_zeros(d.restricted(u, v), m, nullptr)) {
        HPoint<2> z;
        for (int i = 0; i < 3; ++i) z[i] = st[0] * u[i] + st[1] * v[i];
        cloud.add(z, d.weight * w / m);
      }
    }
  }
}

/// Trace measure S ^ omega^{K-1}.
template <int K>
GridMeasure<K> trace_measure(const Current11<K>& S, const TraceOptions& opts = TraceOptions::defaults<K>()) {
  const auto& u = S.u;
  const TraceOptions o = u.gram.size() + u.divisors.size() > opts.fine_terms ? opts.coarse() : opts;
  GridMeasure<K> mu;
  const double bg = u.background();
  if (bg < -1e-12) throw DomainError("term weights exceed the mass of the current");
  if (bg > 1e-15) mu.cloud.append(fs_quadrature<K>(opts.fs_radial, opts.fs_angular), bg);
  for (const auto& g : u.gram) add_gram_trace<K>(mu.cloud, g, o);
  for (const auto& d : u.divisors) add_divisor_trace<K>(mu.cloud, d, o);
  if (!u.functions.empty())
    mu.patches = fd_trace_patches<K>([&](const HPoint<K>& z) { return u.function_part(z); }, opts.fd_n);
  return mu;
}

/// Total mass; measures of currents in C_1 have mass 1.
template <int K>
double mass(const GridMeasure<K>& mu) {
  return mu.mass();
}

template <int K>
double mass(const Current11<K>& S, const TraceOptions& opts = TraceOptions::defaults<K>()) {
  const double m = trace_measure<K>(S, opts).mass();
  if (!std::isfinite(m)) throw ResolutionError("mass quadrature diverged; enlarge the grid radius");
  return m;
}

/// Negative part of the nodal density of (1 - W) omega^K + dd^c s ^ omega^{K-1}
/// over the function terms s; Gram and divisor terms are positive by
/// construction. Zero for currents without function terms.
template <int K>
double positivity_defect(const Current11<K>& S, const TraceOptions& opts = TraceOptions::defaults<K>()) {
  if (S.u.functions.empty()) return 0;
  const double bg = S.u.background();
  const auto patches = fd_trace_patches<K>([&](const HPoint<K>& z) { return S.u.function_part(z); }, opts.fd_n);
  double neg = 0;
  for (const auto& p : patches) {
    const double vol = p.grid.cell_volume();
    neg += parallel_sum(p.weights.size(), [&](std::size_t i) {
      if (p.weights[i] == 0) return 0.0;
      const double chi = ChartPartition<K>::weight(p.grid.hnode(i), p.grid.chart);
      return std::min(0.0, p.weights[i] + bg * chi * fs_density<K>(p.grid.node(i)) * vol);
    });
  }
  return -neg;
}

}  // namespace spc::currents
