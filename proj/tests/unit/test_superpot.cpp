#include <gtest/gtest.h>

#include <spc/currents/panel.hpp>
#include <spc/superpot.hpp>

#include <random>

using namespace spc;
using namespace spc::currents;
using namespace spc::superpot;

namespace {

RowFactor<1> random_full(std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  RowFactor<1> B(2, 2);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) B(a, b) = cd(nd(rng), nd(rng));
  return B;
}

// The pairing evaluated by FS quadrature of u_R against the density of S,
// written out with the P^1 density of omega_Q (a separate route from the
// Crofton point sets used by the library).
double gram_density(const Mat<1>& Q, const HPoint<1>& z) {
  const double det = std::real(Q.determinant());
  const double qz = std::real((Eigen::Vector2cd(z[0], z[1]).adjoint() * Q * Eigen::Vector2cd(z[0], z[1]))(0));
  const double n2 = norm2<1>(z);
  return det * n2 * n2 / (qz * qz);
}

}  // namespace

TEST(SuperPotential, ZeroPotentialAndMeanLaw) {
  const auto omega = Current11<2>::fubini_study();
  const auto nu = GridMeasure<2>::dirac({1.0, 0.3, cd(0, 1)});
  EXPECT_EQ(super_potential<2>(omega, nu).value, 0.0);
  const auto L = Current11<2>::hyperplane({1.0, 2.0, 0.5});
  const auto a = super_potential<2>(L, nu, 0.0), b = super_potential<2>(L, nu, 1.25);
  EXPECT_NEAR(b.value - a.value, 1.25, 1e-12);
  EXPECT_EQ(a.shifted(1.25).value, b.value);
}

TEST(SuperPotential, SymmetryOnP1) {
  std::mt19937_64 rng(21);
  const auto q = fs_quadrature<1>(400, 400);
  for (int i = 0; i < 20; ++i) {
    const auto B1 = random_full(rng), B2 = random_full(rng);
    auto S = Current11<1>::gram(B1);
    const auto R = Current11<1>::gram(B2);
    if (i % 2) {
      const auto g = S.u.gram[0];
      S = Current11<1>::from_function([g](const HPoint<1>& z) { return g.value(z); }, "gram");
    }
    const double a = super_potential(S, R).value, b = super_potential(R, S).value;
    EXPECT_LE(std::abs(a - b), 1e-2 * (1 + std::abs(a)));
    // Oracle: int u_S dR with the closed-form density of R.
    const auto gS = GramTerm<1>::from_factor(B1), gR = GramTerm<1>::from_factor(B2);
    const double oracle = q.integrate([&](const HPoint<1>& z) { return (gS.value(z) - gS.mean) * gram_density(gR.Q, z); });
    EXPECT_NEAR(a, oracle, 2e-3);
  }
}

TEST(SuperPotential, AffineAndBoundedAbove) {
  std::mt19937_64 rng(22);
  const auto S1 = Current11<1>::gram(random_full(rng)), S2 = Current11<1>::point({1.0, cd(0.4, -1)});
  const auto R = trace_measure<1>(Current11<1>::gram(random_full(rng)));
  const double t = 0.3;
  const auto mix = mixture<1>({{t, S1}, {1 - t, S2}});
  EXPECT_NEAR(super_potential<1>(mix, R).value,
              t * super_potential<1>(S1, R).value + (1 - t) * super_potential<1>(S2, R).value, 1e-12);
  // U_S <= m + c for one constant across currents and probes.
  double c = -1e9;
  for (int i = 0; i < 10; ++i) {
    const auto S = Current11<1>::gram(random_full(rng));
    const auto P = trace_measure<1>(Current11<1>::gram(random_full(rng)));
    c = std::max(c, super_potential<1>(S, P).value);
  }
  EXPECT_LT(c, 1.0);
}

TEST(SuperPotential, LineAgainstPointOnIt) {
  const auto L = Current11<2>::hyperplane({1.0, -1.0, 0.0});
  const auto v = super_potential<2>(L, GridMeasure<2>::dirac({1.0, 1.0, cd(0.3, 2)}));
  EXPECT_TRUE(v.minus_infinity);
  EXPECT_EQ(v.value, kMinusInfinityFloor);
  EXPECT_TRUE(v.shifted(5).minus_infinity);
  EXPECT_FALSE(super_potential<2>(L, GridMeasure<2>::dirac({1.0, 0.0, 0.0})).minus_infinity);
}

TEST(ThetaProfile, SmoothLimitAndSingularDivergence) {
  RowFactor<1> B(2, 2);
  B << 1.0, cd(0.5, 0.2), 0.0, 2.0;
  const auto S = Current11<1>::gram(B);
  const auto nu = GridMeasure<1>::dirac({1.0, cd(0.3, 0.2)});
  const auto p = theta_profile<1>(S, nu, {0.4, 0.2, 0.1, 0.05});
  EXPECT_TRUE(p.monotone);
  EXPECT_GE(p.A, 0.0);
  EXPECT_NEAR(p.limit, super_potential<1>(S, nu).value, 2e-2);
  EXPECT_NEAR(p.values.back().second, p.values[2].second, 1e-2);

  const auto D = Current11<1>::point({1.0, cd(0.3, 0.2)});
  const auto q = theta_profile<1>(D, nu, {0.4, 0.2, 0.1, 0.05, 0.025});
  EXPECT_TRUE(q.monotone);
  for (std::size_t i = 1; i < q.values.size(); ++i) EXPECT_LT(q.values[i].second, q.values[i - 1].second - 0.5);
  EXPECT_TRUE(super_potential<1>(D, nu).minus_infinity);
}

TEST(Hartogs, RegularizationsConstantAndDrift) {
  std::mt19937_64 rng(23);
  std::vector<GridMeasure<1>> probes;
  for (int i = 0; i < 6; ++i) probes.push_back(trace_measure<1>(Current11<1>::gram(random_full(rng))));
  const auto S = Current11<1>::hyperplane({1.0, cd(-0.5, 0.5)});
  std::vector<Current11<1>> reg, same, drift;
  const auto S2 = Current11<1>::hyperplane({1.0, 2.0});
  for (double th : {0.2, 0.1, 0.05, 0.025}) {
    reg.push_back(regularize<1>(S, th));
    same.push_back(S);
    drift.push_back(mixture<1>({{1 - th, S2}, {th, S}}));
  }
  const auto a = hartogs_check<1>(reg, S, probes);
  EXPECT_TRUE(a.pass);
  for (std::size_t i = 1; i < a.c.size(); ++i) EXPECT_LE(a.c[i], a.c[i - 1] + 1e-12);
  const auto b = hartogs_check<1>(same, S, probes);
  EXPECT_TRUE(b.pass);
  for (double c : b.c) EXPECT_EQ(c, 0.0);
  EXPECT_FALSE(hartogs_check<1>(drift, S, probes).pass);
}

TEST(LogBound, RegularizedDiracFamily) {
  // S: arc measure on |z| = 1/2, R_j regularized atoms on that circle.
  GridMeasure<1> S;
  for (int i = 0; i < 720; ++i) S.cloud.add(normalize<1>({1.0, 0.5 * std::polar(1.0, 2 * kPi * i / 720)}), 1.0 / 720);
  std::vector<Current11<1>> Rs;
  for (int j = 0; j < 5; ++j) Rs.push_back(regularize<1>(Current11<1>::point({1.0, 0.5}), 0.4 * std::pow(0.5, 0.5 * j)));
  const auto r = log_bound_check(S, Rs);
  EXPECT_TRUE(r.bounded);
  EXPECT_GT(r.sup_norms.back(), 3.5 * r.sup_norms.front());
  EXPECT_TRUE(std::isfinite(r.c));
  // R = omega: ratio is |U_S(omega)|.
  const auto w = log_bound_check(S, {Current11<1>::fubini_study()});
  EXPECT_NEAR(w.c, std::abs(super_potential<1>(Current11<1>::fubini_study(), S).value), 1e-12);
}

TEST(Capacity, DiracShrinksAndOmegaBounded) {
  const auto a = GridMeasure<1>::dirac({1.0, cd(0.3, 0.2)});
  double prev = 2;
  for (int n : {10, 20, 40, 80, 160}) {
    const auto c = capacity_estimate<1>(a, n, 5);
    EXPECT_LE(c.upper, prev);
    EXPECT_LE(c.lower, c.upper);
    EXPECT_GE(c.lower, 0.0);
    prev = c.upper;
  }
  EXPECT_LT(prev, 1e-6);
  const auto w = capacity_estimate<1>(trace_measure<1>(Current11<1>::fubini_study()), 80, 5);
  EXPECT_GT(w.upper, 0.1);
  EXPECT_LE(w.upper, 1.0);
  const auto w2 = capacity_estimate<2>(trace_measure<2>(Current11<2>::fubini_study()), 40, 5);
  EXPECT_GT(w2.upper, 0.1);
  EXPECT_LE(w2.upper, 1.0);
}

TEST(Capacity, SmoothFormPowerLaw) {
  std::vector<double> ls, lc;
  for (int j = 0; j < 4; ++j) {
    RowFactor<1> B(2, 2);
    B << 1.0, 0.3, 0.0, 0.5 * std::pow(0.5, 0.5 * j);
    const auto mu = trace_measure<1>(Current11<1>::gram(B));
    const auto c = capacity_estimate<1>(mu, 80, 5);
    ls.push_back(std::log(sup_density<1>(mu)));
    lc.push_back(std::log(c.lower));
  }
  // Fit log cap = log c - lambda log ||R||.
  double mx = 0, my = 0;
  for (int i = 0; i < 4; ++i) {
    mx += ls[i] / 4;
    my += lc[i] / 4;
  }
  double sxy = 0, sxx = 0, syy = 0;
  for (int i = 0; i < 4; ++i) {
    sxy += (ls[i] - mx) * (lc[i] - my);
    sxx += (ls[i] - mx) * (ls[i] - mx);
    syy += (lc[i] - my) * (lc[i] - my);
  }
  const double lambda = -sxy / sxx, r2 = sxy * sxy / (sxx * syy);
  EXPECT_GT(lambda, 0.0);
  EXPECT_LT(lambda, 4.0);
  EXPECT_GT(r2, 0.9);
}

// For a square-free P of degree m, phi = (1/m) log|P| - log|z| satisfies
// delta log dist(., V) - A <= phi <= log dist(., V) + A with delta = 1 here.
TEST(DivisorPotential, LogDistanceBounds) {
  const auto p = polymap::to_complex(polymap::parse_polynomial("z0*z1 - z2^2 + 1/3*z0^2", 3));
  const auto S = Current11<2>::divisor(FlatPoly<2>(p));
  const auto& d = S.u.divisors[0];
  // Distance to V along rays: sample points near the curve and far away.
  std::mt19937_64 rng(31);
  std::normal_distribution<double> nd;
  double lo = 1e9, hi = -1e9;
  for (int i = 0; i < 400; ++i) {
    // A point of V: solve for z1 given z0 = 1, z2.
    const cd z2(nd(rng), nd(rng));
    const HPoint<2> v{1.0, z2 * z2 - 1.0 / 3.0, z2};
    const double eps = std::pow(10.0, -1 - 5.0 * (i % 20) / 20);
    HPoint<2> z = v;
    z[1] += eps * cd(nd(rng), nd(rng));
    // dist to V ~ |P| / |grad P| near V (FS scale).
    const double n = norm<2>(z);
    const double phi = d.value(z);
    const double grad = std::sqrt(std::norm(z[1] + 2.0 / 3.0 * z[0]) + std::norm(z[0]) + std::norm(2.0 * z[2])) / n;
    const double dist = std::abs(FlatPoly<2>(p)(z)) / (n * n) / grad;
    lo = std::min(lo, phi - 0.5 * std::log(dist));
    hi = std::max(hi, phi - 0.5 * std::log(dist));
  }
  // The normalized potential is (1/2) log dist up to bounded terms.
  EXPECT_LT(hi - lo, 6.0);
}
