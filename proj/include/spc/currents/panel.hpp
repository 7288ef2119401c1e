#pragma once

// Fixed panel of test functions and the pseudo-metrics dist_alpha.
//
// Each panel function is a chart bump of radius 2 modulating a plane wave,
// phi(x) = b(|x - c| / 2) cos(xi . x + psi), paired with currents through
// their trace measures (i.e. against phi omega^{K-1}). dist_alpha is the
// largest pairing gap over the panel after dividing each function by an
// estimate of its C^alpha norm.

#include <spc/core.hpp>
#include <spc/currents/measure.hpp>
#include <spc/geom.hpp>

#include <string>
#include <vector>

namespace spc::currents {

template <int K>
struct PanelForm {
  int chart = 0;
  std::array<double, 2 * K> center{};
  std::array<double, 2 * K> freq{};  // xi, real coordinates of the chart
  double phase = 0;
  double radius = 2.0;
  // Sup norms of phi and of its first and second derivatives.
  double s0 = 1, s1 = 1, s2 = 1;

  /// Chart-side value.
  double at(const std::array<double, 2 * K>& x) const {
    double r2 = 0, arg = phase;
    for (int a = 0; a < 2 * K; ++a) {
      const double d = x[a] - center[a];
      r2 += d * d;
      arg += freq[a] * x[a];
    }
    const double s2r = r2 / (radius * radius);
    if (s2r >= 1) return 0;
    return std::exp(1 - 1 / (1 - s2r)) * std::cos(arg);
  }

  double operator()(const HPoint<K>& z) const {
    if (std::abs(z[chart]) < 1e-300) return 0;
    const auto x = to_chart<K>(z, chart);
    std::array<double, 2 * K> r;
    for (int i = 0; i < K; ++i) {
      r[2 * i] = x[i].real();
      r[2 * i + 1] = x[i].imag();
    }
    return at(r);
  }

  struct Jet {
    double value = 0;
    std::array<double, 2 * K> grad{};
    std::array<std::array<double, 2 * K>, 2 * K> hess{};
  };

  /// Value, gradient and Hessian in real chart coordinates, from closed-form
  /// derivatives of b(s) cos(theta), s = |x - c|^2 / R^2, b = exp(1 - 1/(1 - s)).
  Jet jet(const std::array<double, 2 * K>& x) const {
    constexpr int D = 2 * K;
    Jet j;
    const double R2 = radius * radius;
    std::array<double, D> d;
    double s = 0, theta = phase;
    for (int a = 0; a < D; ++a) {
      d[a] = x[a] - center[a];
      s += d[a] * d[a] / R2;
      theta += freq[a] * x[a];
    }
    if (s >= 1) return j;
    const double B = std::exp(1 - 1 / (1 - s)), g = -1 / ((1 - s) * (1 - s)), gp = -2 / ((1 - s) * (1 - s) * (1 - s));
    const double C = std::cos(theta), S = std::sin(theta);
    std::array<double, D> gB;
    for (int a = 0; a < D; ++a) {
      gB[a] = B * g * 2 * d[a] / R2;
      j.grad[a] = C * gB[a] - B * S * freq[a];
    }
    for (int a = 0; a < D; ++a)
      for (int b = 0; b < D; ++b) {
        const double HB = (a == b ? 2 / R2 * B * g : 0.0) + 4 / (R2 * R2) * B * (g * g + gp) * d[a] * d[b];
        j.hess[a][b] = C * HB - S * (gB[a] * freq[b] + freq[a] * gB[b]) - B * C * freq[a] * freq[b];
      }
    j.value = B * C;
    return j;
  }

  /// Density of dd^c phi ^ omega^{K-1} against chart Lebesgue measure.
  double ddc_density(const std::array<double, 2 * K>& x) const {
    const auto j = jet(x);
    if constexpr (K == 1) {
      return (j.hess[0][0] + j.hess[1][1]) / (2 * kPi);
    } else {
      // d^2/dz_i dzbar_j = 1/4 [(d_ai d_aj + d_bi d_bj) + i (d_ai d_bj - d_bi d_aj)].
      CHess<2> H;
      for (int i = 0; i < 2; ++i)
        for (int k = 0; k < 2; ++k) {
          const auto& h = j.hess;
          H[i][k] = 0.25 * cd(h[2 * i][2 * k] + h[2 * i + 1][2 * k + 1], h[2 * i][2 * k + 1] - h[2 * i + 1][2 * k]);
        }
      const ChartPoint<2> c{cd(x[0], x[1]), cd(x[2], x[3])};
      return 4 / (kPi * kPi) * mixdet(H, fs_hessian<2>(c));
    }
  }

  double frequency() const {
    double s = 0;
    for (double f : freq) s += f * f;
    return std::sqrt(s);
  }

  /// Estimate of the C^alpha norm by interpolation between sup norms of
  /// derivatives (alpha is capped at 2).
  double calpha_norm(double alpha) const {
    if (alpha <= 0) throw DomainError("alpha must be positive");
    if (alpha <= 1) return s0 + std::pow(2 * s0, 1 - alpha) * std::pow(s1, alpha);
    if (alpha <= 2) return s0 + s1 + std::pow(2 * s1, 2 - alpha) * std::pow(s2, alpha - 1);
    return s0 + s1 + s2;
  }
};

namespace detail {

/// Sup norms of phi, |grad phi| and of the Hessian on a sample grid. The
/// Hessian norm is spectral on P^1 and Frobenius on P^2.
template <int K>
void estimate_sup_norms(PanelForm<K>& f) {
  constexpr int D = 2 * K;
  const int n = K == 1 ? 96 : 12;
  const double h = 2 * f.radius / n;
  double s0 = 0, s1 = 0, s2 = 0;
  std::size_t total = 1;
  for (int a = 0; a < D; ++a) total *= n;
  for (std::size_t idx = 0; idx < total; ++idx) {
    std::array<double, D> x;
    std::size_t r = idx;
    for (int a = 0; a < D; ++a) {
      x[a] = f.center[a] - f.radius + (r % n + 0.5) * h;
      r /= n;
    }
    const auto j = f.jet(x);
    if (j.value == 0 && j.grad == std::array<double, D>{}) continue;
    double n1 = 0;
    for (int a = 0; a < D; ++a) n1 += j.grad[a] * j.grad[a];
    const auto& H = j.hess;
    double hn;
    if constexpr (K == 1) {
      const double tr = 0.5 * (H[0][0] + H[1][1]), det = H[0][0] * H[1][1] - H[0][1] * H[1][0];
      const double disc = std::sqrt(std::max(0.0, tr * tr - det));
      hn = std::max(std::abs(tr + disc), std::abs(tr - disc));
    } else {
      hn = 0;
      for (int a = 0; a < D; ++a)
        for (int b = 0; b < D; ++b) hn += H[a][b] * H[a][b];
      hn = std::sqrt(hn);
    }
    s0 = std::max(s0, std::abs(j.value));
    s1 = std::max(s1, std::sqrt(n1));
    s2 = std::max(s2, hn);
  }
  f.s0 = s0;
  f.s1 = s1;
  f.s2 = s2;
}

}  // namespace detail

template <int K>
struct Panel {
  std::string version;
  std::vector<PanelForm<K>> forms;

  std::size_t size() const { return forms.size(); }
};

/// The default panel. P^1: |xi| = 2^0..2^7, 4 directions, 2 phases, 2 charts
/// (128 functions). P^2: |xi| in {1/2, 1, 2, 4}, 8 directions, 2 phases,
/// 3 charts (192 functions).
template <int K>
const Panel<K>& default_panel() {
  static const Panel<K> panel = [] {
    Panel<K> p;
    p.version = K == 1 ? "p1-bumpwave-v1" : "p2-bumpwave-v1";
    std::vector<double> mags;
    std::vector<std::array<double, 2 * K>> dirs;
    if constexpr (K == 1) {
      for (int j = 0; j < 8; ++j) mags.push_back(std::ldexp(1.0, j));
      for (int d = 0; d < 4; ++d) dirs.push_back({std::cos(kPi * d / 4), std::sin(kPi * d / 4)});
    } else {
      mags = {0.5, 1, 2, 4};
      const double s = 1 / std::sqrt(2.0);
      dirs = {{1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, 1},
              {s, 0, s, 0}, {0, s, 0, s}, {s, 0, 0, -s}, {0, s, s, 0}};
    }
    for (int chart = 0; chart <= K; ++chart)
      for (double m : mags)
        for (const auto& d : dirs)
          for (double phase : {0.0, kPi / 2}) {
            PanelForm<K> f;
            f.chart = chart;
            for (int a = 0; a < 2 * K; ++a) f.freq[a] = m * d[a];
            f.phase = phase;
            p.forms.push_back(f);
          }
    parallel_for(p.forms.size(), [&](std::size_t i) { detail::estimate_sup_norms<K>(p.forms[i]); });
    return p;
  }();
  return panel;
}

/// Sum over points of w_i phi_j(p_i) for every panel function j, reproducible
/// under any thread count (chunk partials summed pairwise in chunk order).
template <int K>
std::vector<double> panel_pairings(const PointCloud<K>& cloud, const Panel<K>& panel) {
  const std::size_t n = cloud.size(), m = panel.size();
  const std::size_t chunks = (n + kChunk - 1) / kChunk;
  std::vector<std::vector<double>> partial(chunks, std::vector<double>(m, 0.0));
  parallel_chunks(n, [&](std::size_t c, std::size_t b, std::size_t e) {
    auto& acc = partial[c];
    for (std::size_t i = b; i < e; ++i) {
      const double w = cloud.weights[i];
      if (w == 0) continue;
      const auto& z = cloud.points[i];
      std::array<std::array<double, 2 * K>, K + 1> xs;
      std::array<bool, K + 1> ok{};
      for (int ch = 0; ch <= K; ++ch) {
        if (std::abs(z[ch]) < 1e-300) continue;
        ok[ch] = true;
        const auto x = to_chart<K>(z, ch);
        for (int j = 0; j < K; ++j) {
          xs[ch][2 * j] = x[j].real();
          xs[ch][2 * j + 1] = x[j].imag();
        }
      }
      for (std::size_t j = 0; j < m; ++j) {
        const auto& f = panel.forms[j];
        if (ok[f.chart]) acc[j] += w * f.at(xs[f.chart]);
      }
    }
  });
  while (partial.size() > 1) {
    std::vector<std::vector<double>> next((partial.size() + 1) / 2);
    for (std::size_t i = 0; i < next.size(); ++i) {
      next[i] = partial[2 * i];
      if (2 * i + 1 < partial.size())
        for (std::size_t j = 0; j < m; ++j) next[i][j] += partial[2 * i + 1][j];
    }
    partial.swap(next);
  }
  return partial.empty() ? std::vector<double>(m, 0.0) : partial[0];
}

template <int K>
std::vector<double> panel_pairings(const GridMeasure<K>& mu, const Panel<K>& panel = default_panel<K>()) {
  return panel_pairings<K>(mu.as_cloud(), panel);
}

template <int K>
std::vector<double> panel_pairings(const Current11<K>& S, const Panel<K>& panel = default_panel<K>(),
                                   const TraceOptions& opts = TraceOptions::defaults<K>()) {
  return panel_pairings<K>(trace_measure<K>(S, opts), panel);
}

/// Pairings of dd^c v ^ omega^{K-1} with every panel function, computed by
/// moving dd^c onto the test function: int v dd^c phi_j ^ omega^{K-1}. For the
/// difference of two currents in C_1 this is the difference of their pairings,
/// with no trace measure involved. `fn(z, out)` writes m potential values at z,
/// so several potentials share one sweep; the result is indexed [value][form].
/// Midpoint rule with n nodes per real axis on each chart's support cube.
template <int K, class Fn>
std::vector<std::vector<double>> potential_pairings(Fn&& fn, std::size_t m, const Panel<K>& panel = default_panel<K>(),
                                                    int n = K == 1 ? 256 : 20) {
  constexpr int D = 2 * K;
  std::vector<std::vector<double>> out(m, std::vector<double>(panel.size(), 0.0));
  for (int chart = 0; chart <= K; ++chart) {
    std::vector<std::size_t> forms;
    double reach = 0;
    for (std::size_t j = 0; j < panel.size(); ++j)
      if (panel.forms[j].chart == chart) {
        forms.push_back(j);
        double c2 = 0;
        for (double c : panel.forms[j].center) c2 += c * c;
        reach = std::max(reach, std::sqrt(c2) + panel.forms[j].radius);
      }
    if (forms.empty()) continue;
    const double h = 2 * reach / n;
    double cell = 1;
    for (int a = 0; a < D; ++a) cell *= h;
    std::size_t total = 1;
    for (int a = 0; a < D; ++a) total *= n;
    std::vector<std::array<double, D>> nodes;
    for (std::size_t idx = 0; idx < total; ++idx) {
      std::array<double, D> x;
      std::size_t r = idx;
      for (int a = 0; a < D; ++a) {
        x[a] = -reach + (r % n + 0.5) * h;
        r /= n;
      }
      bool inside = false;
      for (std::size_t j : forms) {
        double d2 = 0;
        for (int a = 0; a < D; ++a) d2 += (x[a] - panel.forms[j].center[a]) * (x[a] - panel.forms[j].center[a]);
        if (d2 < panel.forms[j].radius * panel.forms[j].radius) {
          inside = true;
          break;
        }
      }
      if (inside) nodes.push_back(x);
    }
    std::vector<double> vals(nodes.size() * m);
    parallel_for(nodes.size(), [&](std::size_t i) {
      ChartPoint<K> c;
      for (int k = 0; k < K; ++k) c[k] = cd(nodes[i][2 * k], nodes[i][2 * k + 1]);
      fn(lift<K>(c, chart), &vals[i * m]);
    });
    parallel_for(forms.size(), [&](std::size_t q) {
      const auto& f = panel.forms[forms[q]];
      std::vector<double> acc(m, 0.0);
      for (std::size_t i = 0; i < nodes.size(); ++i) {
        const double w = f.ddc_density(nodes[i]) * cell;
        if (w == 0) continue;
        for (std::size_t k = 0; k < m; ++k) acc[k] += w * vals[i * m + k];
      }
      for (std::size_t k = 0; k < m; ++k) out[k][forms[q]] = acc[k];
    });
  }
  return out;
}

/// max_j |p_j - q_j| / ||phi_j||_{C^alpha}.
template <int K>
double dist_from_pairings(const std::vector<double>& p, const std::vector<double>& q, double alpha,
                          const Panel<K>& panel = default_panel<K>()) {
  if (p.size() != panel.size() || q.size() != panel.size()) throw DomainError("pairing vectors do not match the panel");
  double d = 0;
  for (std::size_t j = 0; j < panel.size(); ++j)
    d = std::max(d, std::abs(p[j] - q[j]) / panel.forms[j].calpha_norm(alpha));
  return d;
}

template <int K>
double dist_alpha(const GridMeasure<K>& a, const GridMeasure<K>& b, double alpha,
                  const Panel<K>& panel = default_panel<K>()) {
  return dist_from_pairings<K>(panel_pairings<K>(a, panel), panel_pairings<K>(b, panel), alpha, panel);
}

template <int K>
double dist_alpha(const Current11<K>& a, const Current11<K>& b, double alpha,
                  const Panel<K>& panel = default_panel<K>(),
                  const TraceOptions& opts = TraceOptions::defaults<K>()) {
  return dist_from_pairings<K>(panel_pairings<K>(a, panel, opts), panel_pairings<K>(b, panel, opts), alpha, panel);
}

}  // namespace spc::currents
