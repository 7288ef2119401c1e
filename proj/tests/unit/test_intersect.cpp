#include <gtest/gtest.h>

#include <spc/intersect.hpp>

#include <random>

using namespace spc;
using namespace spc::currents;
using namespace spc::intersect;

namespace {

HPoint<2> random_vec(std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  return {cd(nd(rng), nd(rng)), cd(nd(rng), nd(rng)), cd(nd(rng), nd(rng))};
}

RowFactor<2> random_full(std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  RowFactor<2> B(3, 3);
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) B(a, b) = cd(nd(rng), nd(rng));
  return B;
}

// Bilinear cross product: the common zero of l1 . z and l2 . z.
HPoint<2> cross(const HPoint<2>& a, const HPoint<2>& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

}  // namespace

TEST(Wedgeable, BasicPairs) {
  std::mt19937_64 rng(41);
  const auto omega = Current11<2>::fubini_study();
  const auto w0 = wedgeable(omega, omega);
  EXPECT_TRUE(w0.wedgeable);
  EXPECT_NEAR(w0.value, 0.0, 1e-12);
  const auto L1 = Current11<2>::hyperplane(random_vec(rng)), L2 = Current11<2>::hyperplane(random_vec(rng));
  EXPECT_TRUE(wedgeable(L1, L2).wedgeable);
  const auto same = wedgeable(L1, L1);
  EXPECT_FALSE(same.wedgeable);
  EXPECT_EQ(same.value, kMinusInfinityFloor);
  // Regularizing a factor keeps a wedgeable pair wedgeable.
  EXPECT_TRUE(wedgeable(regularize<2>(L1, 0.1), L2).wedgeable);
  EXPECT_TRUE(wedgeable(regularize<2>(L1, 0.1), L1).wedgeable);
}

TEST(Wedge, OmegaSquared) {
  const auto w = wedge(Current11<2>::fubini_study(), Current11<2>::fubini_study());
  EXPECT_NEAR(w.mass, 1.0, 1e-12);
  const auto q = fs_quadrature<2>(30, 40);
  auto f = [](const HPoint<2>& z) { return std::norm(z[0]) / norm2<2>(z); };
  EXPECT_NEAR(w.product.integrate(f), q.integrate(f), 1e-10);
}

TEST(Wedge, LinesMeetInOnePoint) {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 5; ++trial) {
    const auto l1 = random_vec(rng), l2 = random_vec(rng);
    const auto w = wedge(Current11<2>::hyperplane(l1), Current11<2>::hyperplane(l2));
    EXPECT_NEAR(w.mass, 1.0, 1e-2);
    const auto p = cross(l1, l2);
    EXPECT_GE(mass_near(w.product, p, 3 * WedgeOptions{}.cell), 0.95);
    ASSERT_EQ(w.atoms.size(), 1u);
    EXPECT_NEAR(w.atoms[0].weight, 1.0, 1e-12);
    EXPECT_LT(fs_distance<2>(w.atoms[0].point, p), 1e-9);
  }
  const auto L = Current11<2>::hyperplane({1.0, 2.0, 3.0});
  EXPECT_THROW(wedge(L, L), NotWedgeableError);
}

TEST(Wedge, LineAndConic) {
  // z2 = 0 meets z0 z1 - z2^2 + 1/3 z0^2 = 0 where z0 (z1 + z0/3) = 0:
  // [0:1:0] and [3:-1:0], each with weight 1/2.
  const auto C = Current11<2>::divisor(
      FlatPoly<2>(polymap::to_complex(polymap::parse_polynomial("z0*z1 - z2^2 + 1/3*z0^2", 3))));
  const auto L = Current11<2>::hyperplane({0.0, 0.0, 1.0});
  for (const auto& w : {wedge(L, C), wedge(C, L)}) {
    EXPECT_NEAR(w.mass, 1.0, 1e-12);
    ASSERT_EQ(w.atoms.size(), 2u);
    EXPECT_NEAR(w.atoms[0].weight, 0.5, 1e-12);
    EXPECT_NEAR(w.atoms[1].weight, 0.5, 1e-12);
    const double d0 = std::min(fs_distance<2>(w.atoms[0].point, {0.0, 1.0, 0.0}), fs_distance<2>(w.atoms[0].point, {3.0, -1.0, 0.0}));
    const double d1 = std::min(fs_distance<2>(w.atoms[1].point, {0.0, 1.0, 0.0}), fs_distance<2>(w.atoms[1].point, {3.0, -1.0, 0.0}));
    EXPECT_LT(d0, 1e-8);
    EXPECT_LT(d1, 1e-8);
  }
}

TEST(Wedge, SupportOnTheLine) {
  std::mt19937_64 rng(43);
  const auto l = random_vec(rng);
  const auto w = wedge(Current11<2>::hyperplane(l), Current11<2>::gram(random_full(rng)));
  EXPECT_NEAR(w.mass, 1.0, 1e-12);
  const double on = w.product.integrate([&](const HPoint<2>& z) {
    cd s = 0;
    for (int i = 0; i < 3; ++i) s += l[i] * z[i];
    return std::abs(s) / (norm<2>(z) * norm<2>(l)) < 1e-10 ? 1.0 : 0.0;
  });
  EXPECT_GE(on, 0.99);
}

TEST(Wedge, FiniteDifferenceRouteMatchesExact) {
  std::mt19937_64 rng(44);
  const auto B1 = random_full(rng);
  const auto g1 = GramTerm<2>::from_factor(B1);
  const auto F = Current11<2>::from_function([g1](const HPoint<2>& z) { return g1.value(z); }, "gram");
  const auto G2 = Current11<2>::gram(random_full(rng));
  const auto exact = wedge(Current11<2>::gram(B1), G2), fd = wedge(F, G2);
  EXPECT_EQ(exact.route, "exact");
  EXPECT_EQ(fd.route, "finite-difference");
  EXPECT_NEAR(fd.mass, 1.0, 1e-2);
  EXPECT_LT(dist_alpha<2>(exact.product, fd.product, 2.0), 3e-3);
}

TEST(Wedge, BilinearAssembly) {
  std::mt19937_64 rng(45);
  const auto R = Current11<2>::gram(random_full(rng)), Rp = Current11<2>::hyperplane(random_vec(rng));
  const auto S = Current11<2>::hyperplane(random_vec(rng));
  const double t = 0.35;
  const auto lhs = wedge(mixture<2>({{t, R}, {1 - t, Rp}}), S).product;
  const auto rhs = combine<2>(wedge(R, S).product, t, wedge(Rp, S).product, 1 - t);
  ASSERT_EQ(lhs.cloud.size(), rhs.cloud.size());
  for (std::size_t i = 0; i < lhs.cloud.size(); ++i) {
    EXPECT_NEAR(lhs.cloud.weights[i], rhs.cloud.weights[i], 1e-15);
    EXPECT_LT(fs_distance<2>(lhs.cloud.points[i], rhs.cloud.points[i]), 1e-12);
  }
}

// Monge-Ampere of log max(1, |z|, |w|) is the Haar measure of the unit torus.
TEST(MongeAmpere, TorusWindow) {
  ChartGrid<2> g;
  g.n = 48;
  g.radius = 1.3;
  auto phi = [](const ChartPoint<2>& x) { return std::log(std::max({1.0, std::abs(x[0]), std::abs(x[1])})); };
  const auto p = monge_ampere_window(phi, phi, g, 2, true);
  double total = 0, near = 0, arg_moment = 0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto x = g.node(i);
    total += p.weights[i];
    if (std::hypot(std::abs(x[0]) - 1, std::abs(x[1]) - 1) <= 3 * g.h()) near += p.weights[i];
    arg_moment += p.weights[i] * std::cos(std::arg(x[0]));
  }
  EXPECT_NEAR(total, 1.0, 2e-2);
  EXPECT_GE(near / total, 0.9);
  // Haar measure has vanishing Fourier modes.
  EXPECT_NEAR(arg_moment, 0.0, 1e-2);
}

TEST(MongeAmpere, SmoothWindowMatchesClosedForm) {
  // phi = 1/2 log(1 + |x|^2): dd^c phi ^ dd^c phi has density 2 / (pi^2 (1+|x|^2)^3).
  ChartGrid<2> g;
  g.n = 24;
  g.radius = 1.0;
  auto phi = [](const ChartPoint<2>& x) { return 0.5 * std::log1p(std::norm(x[0]) + std::norm(x[1])); };
  const auto p = monge_ampere_window(phi, phi, g, 0, false);
  double err = 0;
  for (std::size_t i = 0; i < g.size(); ++i)
    err = std::max(err, std::abs(p.weights[i] / g.cell_volume() - fs_density<2>(g.node(i))));
  EXPECT_LT(err, 1e-4);
}

TEST(WedgeLaws, RandomPairsAndLineContinuity) {
  std::mt19937_64 rng(46);
  std::vector<std::pair<Current11<2>, Current11<2>>> pairs;
  pairs.push_back({Current11<2>::hyperplane(random_vec(rng)), Current11<2>::hyperplane(random_vec(rng))});
  for (int i = 0; i < 4; ++i) pairs.push_back({Current11<2>::gram(random_full(rng)), Current11<2>::gram(random_full(rng))});
  const auto rep = wedge_laws_check(pairs);
  EXPECT_LE(rep.symmetry_gap, 2e-2);
  EXPECT_LE(rep.omega_gap, 1e-12);
  EXPECT_LE(rep.bilinearity_gap, 1e-6);
  EXPECT_TRUE(rep.continuity_decreasing);
  EXPECT_TRUE(rep.pass);
}
