#pragma once

// theta-regularization S_theta = int (tau_{theta y})_* S drho(y), by Monte
// Carlo over antithetic pairs +-y. The parameter draws depend only on the
// seed, so regularizations at different theta share them.

#include <spc/core.hpp>
#include <spc/currents/measure.hpp>
#include <spc/currents/potential.hpp>
#include <spc/geom.hpp>

#include <random>
#include <vector>

namespace spc::currents {

template <int K>
std::vector<std::vector<double>> regularization_draws(int samples, std::uint64_t seed) {
  if (samples < 32) throw DomainError("regularize needs at least 32 samples");
  std::mt19937_64 rng(seed);
  std::vector<std::vector<double>> ys;
  for (int i = 0; i < (samples + 1) / 2; ++i) {
    auto y = sample_parameter<K>(rng);
    ys.push_back(y);
    for (auto& v : y) v = -v;
    ys.push_back(y);
  }
  ys.resize(samples);
  return ys;
}

template <int K>
Current11<K> regularize(const Current11<K>& S, cd theta, int samples = 64, std::uint64_t seed = 1) {
  if (!(std::abs(theta) > 0) || std::abs(theta) > 1 + 1e-12)
    throw DomainError("regularize requires 0 < |theta| <= 1");
  const auto ys = regularization_draws<K>(samples, seed);
  Current11<K> r;
  r.tag = Provenance::regularized;
  const double w = 1.0 / samples;
  for (const auto& y : ys) {
    const auto tau = Automorphism<K>::from_parameters(y, theta);
    r.u.append(pushforward_potential<K>(tau, S.u).scaled(w));
  }
  return r;
}

/// Same for a measure given as a point cloud: the points are transported.
template <int K>
GridMeasure<K> regularize(const GridMeasure<K>& mu, cd theta, int samples = 64, std::uint64_t seed = 1) {
  if (!(std::abs(theta) > 0) || std::abs(theta) > 1 + 1e-12)
    throw DomainError("regularize requires 0 < |theta| <= 1");
  const auto ys = regularization_draws<K>(samples, seed);
  const PointCloud<K> c = mu.as_cloud();
  GridMeasure<K> r;
  for (const auto& y : ys) {
    const auto tau = Automorphism<K>::from_parameters(y, theta);
    for (std::size_t i = 0; i < c.size(); ++i) r.cloud.add(normalize<K>(tau.apply(c.points[i])), c.weights[i] / samples);
  }
  return r;
}

/// Estimate of sup d mu / d omega^K: at each query point, the mass of the
/// smallest Fubini-Study ball holding a fraction `frac` of the total, divided
/// by that ball's volume sin^{2K}(r).
template <int K>
double sup_density(const GridMeasure<K>& mu, double frac = 0.1, std::size_t max_queries = 400) {
  const PointCloud<K> c = mu.as_cloud();
  const std::size_t n = c.size();
  if (n == 0) return 0;
  const double total = c.total();
  const std::size_t stride = std::max<std::size_t>(1, n / max_queries);
  std::vector<std::size_t> queries;
  for (std::size_t i = 0; i < n; i += stride) queries.push_back(i);
  std::vector<double> best(queries.size(), 0.0);
  parallel_for(queries.size(), [&](std::size_t q) {
    const auto& x = c.points[queries[q]];
    std::vector<std::pair<double, double>> dw(n);
    for (std::size_t j = 0; j < n; ++j) dw[j] = {fs_distance<K>(x, c.points[j]), c.weights[j]};
    std::sort(dw.begin(), dw.end());
    double m = 0;
    for (const auto& [d, w] : dw) {
      m += w;
      if (m >= frac * total && d > 0) {
        best[q] = m / std::pow(std::sin(d), 2 * K);
        break;
      }
    }
  });
  return *std::max_element(best.begin(), best.end());
}

}  // namespace spc::currents
