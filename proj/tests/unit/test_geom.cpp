#include <gtest/gtest.h>

#include <spc/geom.hpp>

#include <random>

using namespace spc;

TEST(FsDensity, OriginAndNormalization) {
  EXPECT_NEAR(fs_density<1>({cd(0)}), 1 / kPi, 1e-15);
  // Oracle: Laplacian of 1/2 log(1 + |z|^2) over 2 pi by central differences.
  const double h = 1e-3;
  auto pot = [](double x, double y) { return 0.5 * std::log(1 + x * x + y * y); };
  for (double x : {0.0, 0.7, -2.0}) {
    const double y = 0.3;
    const double lap = (pot(x + h, y) + pot(x - h, y) + pot(x, y + h) + pot(x, y - h) - 4 * pot(x, y)) / (h * h);
    EXPECT_NEAR(fs_density<1>({cd(x, y)}), lap / (2 * kPi), 1e-6);
  }
  // Midpoint rule on radius 1e3: at n = 2048 (h ~ 1) aliasing costs about
  // 4 xi K_1(xi) ~ 2e-2 with xi = 2 pi / h; halving h makes it negligible.
  auto total = [](int n) {
    ChartGrid<1> g;
    g.radius = 1e3;
    g.n = n;
    double s = 0;
    for (std::size_t i = 0; i < g.size(); ++i) s += fs_density<1>(g.node(i)) * g.cell_volume();
    return s;
  };
  EXPECT_NEAR(total(2048), 1.0, 3e-2);
  EXPECT_NEAR(total(4096), 1.0, 1e-3);
  EXPECT_LT(fs_density<1>({cd(1e4)}), 1e-16);
}

TEST(FsDistance, MetricProperties) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> nd;
  auto rp = [&] { return HPoint<2>{cd(nd(rng), nd(rng)), cd(nd(rng), nd(rng)), cd(nd(rng), nd(rng))}; };
  for (int i = 0; i < 100; ++i) {
    auto p = rp(), q = rp(), r = rp();
    EXPECT_DOUBLE_EQ(fs_distance<2>(p, q), fs_distance<2>(q, p));
    EXPECT_LE(fs_distance<2>(p, r), fs_distance<2>(p, q) + fs_distance<2>(q, r) + 1e-10);
    EXPECT_LE(fs_distance<2>(p, q), kPi / 2 + 1e-12);
  }
  auto p = rp();
  HPoint<2> ph = p;
  for (auto& c : ph) c *= std::polar(2.0, 0.7);
  EXPECT_LT(fs_distance<2>(p, ph), 1e-7);
  // Near 0 in the chart the metric is Euclidean.
  for (double eps : {1e-2, 1e-3, 1e-4}) {
    HPoint<1> a{1.0, 0.0}, b{1.0, cd(eps, 0)};
    EXPECT_NEAR(fs_distance<1>(a, b) / eps, 1.0, 1e-2);
  }
}

TEST(Quadrature, IntegratesPolynomialMoments) {
  // E|z_1|^2 = 1/(K+1) and E|z_1|^4 = 2/((K+1)(K+2)) on the unit sphere.
  auto q1 = fs_quadrature<1>(8, 8);
  EXPECT_NEAR(q1.total(), 1.0, 1e-14);
  EXPECT_NEAR(q1.integrate([](const HPoint<1>& z) { return std::pow(std::abs(z[1]), 4); }), 1.0 / 3, 1e-13);
  auto q2 = fs_quadrature<2>(8, 8);
  EXPECT_NEAR(q2.integrate([](const HPoint<2>& z) { return std::norm(z[2]); }), 1.0 / 3, 1e-13);
  EXPECT_NEAR(q2.integrate([](const HPoint<2>& z) { return std::pow(std::abs(z[1]), 4); }), 1.0 / 6, 1e-13);
}

TEST(Automorphisms, ThetaZeroAndSymmetry) {
  std::mt19937_64 rng(2);
  EXPECT_TRUE(sample_automorphism<2>(rng, 0.0).is_identity());
  EXPECT_THROW(sample_automorphism<1>(rng, 1.5), DomainError);
  const int n = 10000;
  std::vector<double> mean(param_dim<1>(), 0.0);
  double r2 = 0;
  for (int i = 0; i < n; ++i) {
    auto y = sample_parameter<1>(rng);
    double s = 0;
    for (std::size_t j = 0; j < y.size(); ++j) {
      mean[j] += y[j] / n;
      s += y[j] * y[j];
    }
    EXPECT_LT(s, 1.0);
    r2 += s / n;
  }
  // Each coordinate has variance E|y|^2 / D.
  const double sigma = std::sqrt(r2 / param_dim<1>());
  for (double m : mean) EXPECT_LT(std::abs(m), 3 * sigma / 100);
  // exp(-Y) inverts exp(Y).
  auto y = sample_parameter<2>(rng);
  auto t = Automorphism<2>::from_parameters(y, cd(0, 0.6));
  EXPECT_LT((t.matrix * t.inverse - Mat<2>::Identity()).norm(), 1e-12);
  EXPECT_NEAR(std::abs(t.matrix.determinant()), 1.0, 1e-12);
}

TEST(Automorphisms, EqualModulusSameLaw) {
  // |theta| = |theta'|: spectra of the matrices have the same law; compare
  // the mean of |tr A|^2 between theta = 0.8 and 0.8 i.
  auto stat = [](cd theta, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    double s = 0;
    const int n = 4000;
    for (int i = 0; i < n; ++i) s += std::norm(sample_automorphism<1>(rng, theta).matrix.trace()) / n;
    return s;
  };
  const double a = stat(0.8, 11), b = stat(cd(0, 0.8), 12);
  EXPECT_NEAR(a, b, 0.02 * a);
}
