#pragma once

// Lelong numbers nu(S, a) = lim ||S ^ beta^{K-1}||_{B_r(a)} / (pi^{K-1} r^{2K-2}),
// with beta = (i/2) sum dz ^ dzbar the Euclidean form of the chart, so that a
// line through a has Lelong number 1.

#include <spc/core.hpp>
#include <spc/currents/potential.hpp>
#include <spc/geom.hpp>

#include <vector>

namespace spc::currents {

struct LelongResult {
  double value = 0;
  std::vector<double> radii;
  std::vector<double> ratios;  // normalized ball masses, one per radius
};

namespace detail {

/// Normalized ball mass of [l . z = 0] around the chart point a.
template <int K>
double hyperplane_ball_ratio(const HPoint<K>& l, int chart, const ChartPoint<K>& a, double r) {
  // In the chart: l_c + sum_i l'_i x_i = 0.
  cd c = l[chart];
  std::array<cd, K> lin{};
  int j = 0;
  for (int i = 0; i <= K; ++i)
    if (i != chart) lin[j++] = l[i];
  double ln = 0;
  cd val = c;
  for (int i = 0; i < K; ++i) {
    ln += std::norm(lin[i]);
    val += lin[i] * a[i];
  }
  if (ln == 0) return 0;  // the hyperplane is at infinity of this chart
  const double d2 = std::norm(val) / ln;
  if constexpr (K == 1) {
    return d2 < r * r ? 1.0 : 0.0;
  } else {
    return d2 < r * r ? (r * r - d2) / (r * r) : 0.0;
  }
}

}  // namespace detail

/// Ratios for each radius and their extrapolation to r = 0 by a least-squares
/// fit nu + c r^2 on the last three radii. Radii must be decreasing.
template <int K>
LelongResult lelong_number(const Current11<K>& S, const HPoint<K>& a_h, const std::vector<double>& radii,
                           double monotone_tol = 1e-4) {
  if (radii.size() < 3) throw DomainError("lelong_number needs at least three radii");
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (!(radii[i] > 0)) throw DomainError("radii must be positive");
    if (i && radii[i] >= radii[i - 1]) throw DomainError("radii must be decreasing");
  }
  const int chart = best_chart<K>(a_h);
  const ChartPoint<K> a = to_chart<K>(a_h, chart);
  const auto& u = S.u;

  // Hyperplanes are handled exactly; the rest through its chart potential
  // v = u - sum w G_l + (1 - W_1) 1/2 log(1 + |x|^2).
  double w1 = 0;
  std::vector<const GramTerm<K>*> planes;
  for (const auto& g : u.gram)
    if (g.rank() == 1) {
      planes.push_back(&g);
      w1 += g.weight;
    }
  auto v = [&](const ChartPoint<K>& x) {
    const HPoint<K> z = lift<K>(x, chart);
    double s = u(z);
    for (const auto* g : planes) s -= g->weight * g->value(z);
    return s + (1 - w1) * 0.5 * std::log(norm2<K>(z));
  };

  // Flux of grad v through the sphere of radius r: (1/2 pi) int d_r v dsigma.
  auto flux_ratio = [&](double r) {
    const double dr = 1e-4 * r;
    auto radial = [&](const std::array<double, 2 * K>& e) {
      ChartPoint<K> xp, xm;
      for (int i = 0; i < K; ++i) {
        const cd d(e[2 * i], e[2 * i + 1]);
        xp[i] = a[i] + (r + dr) * d;
        xm[i] = a[i] + (r - dr) * d;
      }
      return (v(xp) - v(xm)) / (2 * dr);
    };
    if constexpr (K == 1) {
      const int n = 256;
      double s = parallel_sum(n, [&](std::size_t k) {
        const double t = 2 * kPi * (k + 0.5) / n;
        return radial({std::cos(t), std::sin(t)});
      });
      // (1/2 pi) * r * (2 pi / n) * sum
      return s * r / n;
    } else {
      // S^3: x = (sqrt(1-t) e^{i p1}, sqrt(t) e^{i p2}), dsigma = r^3/2 dt dp1 dp2.
      std::vector<double> gx, gw;
      gauss_legendre01(24, gx, gw);
      const int np = 48;
      const std::size_t total = gx.size() * np * np;
      double s = parallel_sum(total, [&](std::size_t k) {
        const std::size_t it = k / (np * np), rest = k % (np * np);
        const double p1 = 2 * kPi * (rest / np + 0.5) / np, p2 = 2 * kPi * (rest % np + 0.5) / np;
        const double c = std::sqrt(1 - gx[it]), d = std::sqrt(gx[it]);
        return gw[it] * radial({c * std::cos(p1), c * std::sin(p1), d * std::cos(p2), d * std::sin(p2)});
      });
      const double area_int = s * (4 * kPi * kPi / (np * np)) * r * r * r / 2;
      return area_int / (2 * kPi) / (kPi * r * r);
    }
  };

  LelongResult res;
  res.radii = radii;
  for (double r : radii) {
    double ratio = 0;
    for (const auto* g : planes) {
      HPoint<K> l;
      for (int i = 0; i <= K; ++i) l[i] = g->B(0, i);
      ratio += g->weight * detail::hyperplane_ball_ratio<K>(l, chart, a, r);
    }
    ratio += flux_ratio(r);
    res.ratios.push_back(ratio);
  }
  for (std::size_t i = 1; i < res.ratios.size(); ++i)
    if (res.ratios[i] > res.ratios[i - 1] + monotone_tol * (1 + std::abs(res.ratios[i - 1])))
      throw ResolutionError("Lelong ratios are not monotone in r; the radii are under-resolved");

  // Least squares nu + c r^2 on the last three radii.
  const std::size_t n = res.ratios.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = n - 3; i < n; ++i) {
    const double x = radii[i] * radii[i], y = res.ratios[i];
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double c = (3 * sxy - sx * sy) / (3 * sxx - sx * sx);
  res.value = (sy - c * sx) / 3;
  return res;
}

}  // namespace spc::currents
