#pragma once

// Indeterminacy points, topological degree and dynamical degree sequences.

#include <spc/core.hpp>
#include <spc/geom.hpp>
#include <spc/polymap/map.hpp>
#include <spc/polymap/roots.hpp>

#include <map>
#include <random>
#include <string>
#include <vector>

namespace spc::polymap {

template <int K>
std::vector<HPoint<K>> dedup_points(const std::vector<HPoint<K>>& pts, double radius) {
  std::vector<HPoint<K>> out;
  for (const auto& p : pts) {
    bool dup = false;
    for (const auto& q : out)
      if (fs_distance<K>(p, q) < radius) {
        dup = true;
        break;
      }
    if (!dup) out.push_back(p);
  }
  return out;
}

/// Common zeros of the components. Empty for maps of P^1 (after reduction) and
/// for holomorphic maps of P^2.
inline std::vector<HPoint<2>> indeterminacy_points(const HomogeneousMap& f, std::uint64_t seed = 1) {
  if (f.k() > 2) throw DomainError("indeterminacy_points supports k <= 2");
  if (!f.common_factor().is_constant())
    throw DegenerateMapError("degenerate map: the components share a common factor (curve of indeterminacy)");
  if (f.k() == 1) return {};
  const CompiledMap<2> F(f);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  auto rc = [&] { return cd(nd(rng), nd(rng)); };
  const double scale = map_scale<2>(F, rng);
  const auto E1 = CPoly3::combination(F, {rc(), rc(), rc()});
  const auto E2 = CPoly3::combination(F, {rc(), rc(), rc()});
  std::vector<HPoint<2>> cands;
  for (const auto& r : solve_p2_system(E1, E2, rng)) {
    HPoint<2> z{r.z[0], r.z[1], r.z[2]};
    const double nz = norm<2>(z);
    if (!(nz > 0) || !std::isfinite(nz)) continue;
    for (auto& c : z) c /= nz;
    if (norm<2>(F(z)) < 1e-4 * scale) cands.push_back(normalize<2>(z));
  }
  return dedup_points<2>(cands, 1e-3);
}

/// Distinct preimages of b (generic), excluding indeterminacy.
template <int K>
std::vector<HPoint<K>> fiber(const CompiledMap<K>& F, const HPoint<K>& b, std::mt19937_64& rng, double scale) {
  if constexpr (K == 1) {
    return dedup_points<1>(fiber_p1(F, b), 1e-6);
  } else {
    // Two linear forms vanishing on b: F(z) in span(b) or F(z) = 0.
    std::normal_distribution<double> nd;
    auto rc = [&] { return cd(nd(rng), nd(rng)); };
    const double nb2 = norm2<2>(b);
    std::array<std::array<cd, 3>, 2> m;
    for (auto& row : m) {
      row = {rc(), rc(), rc()};
      const cd c = row[0] * b[0] + row[1] * b[1] + row[2] * b[2];
      for (int i = 0; i < 3; ++i) row[i] -= c * std::conj(b[i]) / nb2;
    }
    const auto E1 = CPoly3::combination(F, m[0]);
    const auto E2 = CPoly3::combination(F, m[1]);
    std::vector<HPoint<2>> pts;
    for (const auto& r : solve_p2_system(E1, E2, rng)) {
      if (!r.finished) continue;
      HPoint<2> z{r.z[0], r.z[1], r.z[2]};
      const double nz = norm<2>(z);
      if (!(nz > 0) || !std::isfinite(nz)) continue;
      for (auto& c : z) c /= nz;
      const HPoint<2> fz = F(z);
      if (norm<2>(fz) < 1e-5 * scale) continue;  // indeterminacy
      if (fs_distance<2>(fz, b) > 1e-6) continue;
      pts.push_back(normalize<2>(z));
    }
    return dedup_points<2>(pts, 1e-6);
  }
}

/// Number of points in a generic fiber: modal count over random targets.
template <int K>
int topological_degree_k(const HomogeneousMap& f, int trials, std::uint64_t seed) {
  const CompiledMap<K> F(f);
  std::mt19937_64 rng(seed);
  const double scale = map_scale<K>(F, rng);
  std::normal_distribution<double> nd;
  std::map<int, int> counts;
  for (int t = 0; t < trials; ++t) {
    HPoint<K> b;
    for (auto& c : b) c = cd(nd(rng), nd(rng));
    b = normalize<K>(b);
    counts[static_cast<int>(fiber<K>(F, b, rng, scale).size())]++;
  }
  int best = -1, freq = 0;
  for (auto [c, n] : counts)
    if (n > freq) {
      best = c;
      freq = n;
    }
  if (2 * freq <= trials)
    throw ResolutionError("fiber counts disagree across trials; increase the number of starts");
  return best;
}

inline int topological_degree(const HomogeneousMap& f, int trials = 5, std::uint64_t seed = 7) {
  if (f.k() == 1) return topological_degree_k<1>(f, trials, seed);
  if (f.k() == 2) return topological_degree_k<2>(f, trials, seed);
  throw DomainError("topological_degree supports k <= 2");
}

struct DegreeReport {
  int p = 1;
  int n = 1;
  long long lambda = 1;
  double root = 1;  // lambda^(1/n)
  std::string method;  // "exact-gcd" or "preimage-count"
};

struct DegreeTable {
  std::vector<DegreeReport> rows;
  int achieved_n = 0;
  bool truncated = false;
  std::string note;
};

/// lambda_p(f^n) for n = 1..N; p = 1 from the reduced degree of f^n, p = k
/// from the topological degree of f^n.
inline DegreeTable dynamical_degree_estimate(const HomogeneousMap& f, int p, int N,
                                             std::uint64_t max_term_products = 50'000'000) {
  if (p != 1 && p != f.k()) throw DomainError("only p = 1 and p = k are supported");
  DegreeTable t;
  Budget budget;
  budget.max_term_products = max_term_products;
  HomogeneousMap fn = f;
  for (int n = 1; n <= N; ++n) {
    try {
      if (n > 1) fn = compose(f, fn, &budget);
    } catch (const BudgetExceeded& e) {
      t.truncated = true;
      t.note = e.what();
      break;
    }
    DegreeReport r;
    r.p = p;
    r.n = n;
    if (p == 1 && f.k() > 1) {
      r.lambda = fn.degree();
      r.method = "exact-gcd";
    } else if (f.k() == 1) {
      r.lambda = fn.degree();
      r.method = "exact-gcd";
    } else {
      // Homotopy path count grows as deg^2; stop when it becomes impractical.
      if (fn.degree() > 16) {
        t.truncated = true;
        t.note = "fiber count skipped beyond degree 16";
        break;
      }
      r.lambda = topological_degree(fn, 5, 1000 + n);
      r.method = "preimage-count";
    }
    r.root = std::pow(static_cast<double>(r.lambda), 1.0 / n);
    t.rows.push_back(r);
    t.achieved_n = n;
  }
  return t;
}

/// lambda(m+n) <= lambda(m) lambda(n) on all pairs present in the table.
inline bool submultiplicative(const DegreeTable& t) {
  std::map<int, long long> lam;
  for (const auto& r : t.rows) lam[r.n] = r.lambda;
  for (auto [m, a] : lam)
    for (auto [n, b] : lam)
      if (lam.count(m + n) && lam[m + n] > a * b) return false;
  return true;
}

/// lambda_1(f^n)^2 >= lambda_2(f^n) on common iterates (k = 2).
inline bool log_concave(const DegreeTable& p1, const DegreeTable& p2) {
  std::map<int, long long> a;
  for (const auto& r : p1.rows) a[r.n] = r.lambda;
  for (const auto& r : p2.rows)
    if (a.count(r.n) && a[r.n] * a[r.n] < r.lambda) return false;
  return true;
}

}  // namespace spc::polymap
