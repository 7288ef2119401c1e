#include <gtest/gtest.h>

#include <spc/currents/lelong.hpp>
#include <spc/currents/measure.hpp>
#include <spc/currents/panel.hpp>
#include <spc/currents/potential.hpp>
#include <spc/currents/regularize.hpp>

#include <random>

using namespace spc;
using namespace spc::currents;

namespace {

template <int K>
RowFactor<K> random_factor(int rows, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  RowFactor<K> B(rows, K + 1);
  for (int r = 0; r < rows; ++r)
    for (int i = 0; i <= K; ++i) B(r, i) = cd(nd(rng), nd(rng));
  return B;
}

// Smooth test function on P^K.
template <int K>
double probe(const HPoint<K>& z) {
  const double n2 = norm2<K>(z);
  double s = std::norm(z[0]) / n2;
  if constexpr (K == 2) s += 0.5 * std::real(z[1] * std::conj(z[2])) / n2;
  return std::cos(3 * s) + std::real(z[K] * std::conj(z[0])) / n2;
}

}  // namespace

TEST(GramMean, MatchesQuadrature) {
  std::mt19937_64 rng(3);
  const auto q1 = fs_quadrature<1>(200, 400);
  const auto q2 = fs_quadrature<2>(40, 48);
  for (int rank = 1; rank <= 2; ++rank) {
    auto g = GramTerm<1>::from_factor(random_factor<1>(rank, rng));
    // Rank one has a log singularity; the quadrature converges slowly there.
    EXPECT_NEAR(g.mean, q1.integrate([&](const HPoint<1>& z) { return g.value(z); }), rank == 1 ? 2e-3 : 1e-9);
  }
  for (int rank = 2; rank <= 3; ++rank) {
    auto g = GramTerm<2>::from_factor(random_factor<2>(rank, rng));
    EXPECT_NEAR(g.mean, q2.integrate([&](const HPoint<2>& z) { return g.value(z); }), 1e-4);
  }
}

TEST(GramMean, ClosedFormCases) {
  EXPECT_NEAR(0.5 * log_gram_mean<1>({0.0, 1.0}), -0.5, 1e-14);
  EXPECT_NEAR(0.5 * log_gram_mean<2>({0.0, 0.0, 1.0}), -0.75, 1e-14);
  EXPECT_NEAR(log_gram_mean<2>({2.0, 2.0, 2.0}), std::log(2.0), 1e-12);
  // Near-confluent eigenvalues agree with the distinct branch.
  EXPECT_NEAR(log_gram_mean<2>({0.3, 0.3 + 1e-7, 1.0}), log_gram_mean<2>({0.3, 0.3 + 1e-3, 1.0}), 2e-3);
  EXPECT_NEAR(log_gram_mean<1>({0.5, 0.5 + 1e-9}), std::log(0.5), 1e-8);
}

TEST(Divisor, MeanAndAtoms) {
  // z0^2 z1 - 4 z1^3 has roots 0 (z1 = 0) and z0 = +-2 z1.
  polymap::ComplexPoly p = polymap::to_complex(polymap::parse_polynomial("z0^2*z1 - 4*z1^3", 2));
  auto S = Current11<1>::divisor(FlatPoly<1>(p));
  const auto q = fs_quadrature<1>(400, 400);
  EXPECT_NEAR(S.u.mean(), q.integrate([&](const HPoint<1>& z) { return S.u(z); }), 2e-3);
  auto mu = trace_measure<1>(S);
  ASSERT_EQ(mu.cloud.size(), 3u);
  EXPECT_NEAR(mu.mass(), 1.0, 1e-14);
}

TEST(Divisor, ConicTraceMass) {
  auto p = polymap::to_complex(polymap::parse_polynomial("z0*z1 - z2^2 + 1/3*z0^2", 3));
  auto S = Current11<2>::divisor(FlatPoly<2>(p));
  EXPECT_NEAR(mass<2>(S), 1.0, 1e-12);
  // The trace is carried by the curve.
  auto mu = trace_measure<2>(S);
  for (std::size_t i = 0; i < mu.cloud.size(); i += 97)
    EXPECT_LT(std::abs(FlatPoly<2>(p)(mu.cloud.points[i])), 1e-9);
  const auto q = fs_quadrature<2>(30, 40);
  EXPECT_NEAR(S.u.mean(), q.integrate([&](const HPoint<2>& z) { return S.u(z); }), 5e-3);
}

TEST(Mass, BasicCurrents) {
  EXPECT_NEAR(mass<1>(Current11<1>::fubini_study()), 1.0, 1e-12);
  EXPECT_NEAR(mass<2>(Current11<2>::fubini_study()), 1.0, 1e-12);
  EXPECT_NEAR(mass<2>(Current11<2>::hyperplane({1.0, cd(0.3, 1), -2.0})), 1.0, 1e-12);
  EXPECT_NEAR(mass<1>(GridMeasure<1>::dirac({1.0, 0.5})), 1.0, 0.0);
}

// The same potential as an exact Gram term and as an opaque function term.
TEST(TraceMeasure, GramCloudMatchesFiniteDifferencesP1) {
  std::mt19937_64 rng(5);
  const auto B = random_factor<1>(2, rng);
  const auto g = GramTerm<1>::from_factor(B);
  auto exact = Current11<1>::gram(B);
  auto fd = Current11<1>::from_function([g](const HPoint<1>& z) { return g.value(z); }, "gram");
  auto mu = trace_measure<1>(exact), nu = trace_measure<1>(fd);
  EXPECT_NEAR(nu.mass(), 1.0, 1e-6);
  EXPECT_NEAR(mu.integrate(probe<1>), nu.integrate(probe<1>), 1e-4);
  EXPECT_LT(positivity_defect<1>(fd), 1e-6);
}

TEST(TraceMeasure, GramCloudMatchesFiniteDifferencesP2) {
  std::mt19937_64 rng(6);
  RowFactor<2> B = RowFactor<2>::Identity(3, 3);
  B(0, 1) = 0.4;
  B(2, 0) = cd(0, 0.3);
  B(1, 1) = 1.5;
  const auto g = GramTerm<2>::from_factor(B);
  auto exact = Current11<2>::gram(B);
  auto fd = Current11<2>::from_function([g](const HPoint<2>& z) { return g.value(z); }, "gram");
  auto mu = trace_measure<2>(exact), nu = trace_measure<2>(fd);
  EXPECT_NEAR(mu.mass(), 1.0, 1e-12);
  EXPECT_NEAR(nu.mass(), 1.0, 1e-3);
  EXPECT_NEAR(mu.integrate(probe<2>), nu.integrate(probe<2>), 5e-3);
}

TEST(Pushforward, IdentityAndMass) {
  std::mt19937_64 rng(8);
  auto S = Current11<2>::hyperplane({1.0, 2.0, cd(0, 1)});
  auto same = pushforward<2>(Automorphism<2>{}, S);
  EXPECT_EQ(same.u.gram.size(), 1u);
  auto tau = sample_automorphism<2>(rng, 0.7);
  auto T = pushforward<2>(tau, Current11<2>::fubini_study());
  EXPECT_NEAR(mass<2>(T), 1.0, 1e-12);
  // Potential law: u o tau^{-1} + log(|A^{-1} z| / |z|) with u = 0.
  HPoint<2> z{0.3, cd(1, -1), 0.5};
  const auto y = tau.apply_inverse(z);
  EXPECT_NEAR(T.u(z), std::log(norm<2>(y) / norm<2>(z)), 1e-12);
}

TEST(Pushforward, MovesAtoms) {
  std::mt19937_64 rng(9);
  auto a = HPoint<1>{1.0, cd(0.2, 0.4)};
  auto tau = sample_automorphism<1>(rng, 0.8);
  auto S = pushforward<1>(tau, Current11<1>::point(a));
  auto mu = trace_measure<1>(S);
  ASSERT_EQ(mu.cloud.size(), 1u);
  EXPECT_LT(fs_distance<1>(mu.cloud.points[0], tau.apply(a)), 1e-12);
}

TEST(Pushforward, ComposesTransports) {
  std::mt19937_64 rng(10);
  auto s = sample_automorphism<1>(rng, 0.5), t = sample_automorphism<1>(rng, 0.5);
  Automorphism<1> st;
  st.matrix = s.matrix * t.matrix;
  st.inverse = t.inverse * s.inverse;
  auto S = Current11<1>::from_function([](const HPoint<1>& z) { return 0.3 * std::real(z[0] * std::conj(z[1])) / norm2<1>(z); }, "f");
  auto a = pushforward<1>(s, pushforward<1>(t, S)), b = pushforward<1>(st, S);
  for (double x : {-1.0, 0.2, 3.0}) {
    HPoint<1> z{1.0, cd(x, 0.5)};
    EXPECT_NEAR(a.u(z) - a.u.mean(), b.u(z) - b.u.mean(), 1e-10);
  }
}

namespace {

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= x.size();
  my /= y.size();
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

}  // namespace

TEST(Panel, DiracDistanceSlopes) {
  for (double alpha : {0.5, 1.0, 2.0}) {
    std::vector<double> xs, ys;
    for (int k = 0; k < 6; ++k) {
      const double e = std::ldexp(1.0, -2 - k);
      const auto a = GridMeasure<1>::dirac({1.0, cd(0.3, 0.1)}), b = GridMeasure<1>::dirac({1.0, cd(0.3 + e, 0.1)});
      xs.push_back(std::log(e));
      ys.push_back(std::log(dist_alpha<1>(a, b, alpha)));
    }
    EXPECT_NEAR(fit_slope(xs, ys), std::min(alpha, 1.0), 0.1) << "alpha " << alpha;
  }
}

TEST(Panel, PseudoMetric) {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> nd;
  std::vector<GridMeasure<2>> ms;
  for (int i = 0; i < 6; ++i) ms.push_back(GridMeasure<2>::dirac({cd(nd(rng), nd(rng)), cd(nd(rng), nd(rng)), 1.0}));
  for (std::size_t i = 0; i < ms.size(); ++i) {
    EXPECT_EQ(dist_alpha<2>(ms[i], ms[i], 1.0), 0.0);
    for (std::size_t j = 0; j < ms.size(); ++j) {
      EXPECT_EQ(dist_alpha<2>(ms[i], ms[j], 1.0), dist_alpha<2>(ms[j], ms[i], 1.0));
      for (std::size_t k = 0; k < ms.size(); ++k)
        EXPECT_LE(dist_alpha<2>(ms[i], ms[k], 2.0), dist_alpha<2>(ms[i], ms[j], 2.0) + dist_alpha<2>(ms[j], ms[k], 2.0) + 1e-15);
    }
  }
  EXPECT_EQ(default_panel<1>().size(), 128u);
  EXPECT_EQ(default_panel<2>().size(), 192u);
}

// Pairing of a function-term current against a panel form, against the
// integration-by-parts value <omega, phi> + int s dd^c phi on P^1.
TEST(Panel, PairingMatchesIntegrationByParts) {
  auto s = [](const HPoint<1>& z) { return 0.2 * std::real(z[0] * std::conj(z[1])) / norm2<1>(z) + 0.1 * std::norm(z[1]) / norm2<1>(z); };
  const auto S = Current11<1>::from_function(s, "s");
  const auto& panel = default_panel<1>();
  const auto pairs = panel_pairings<1>(S);
  // Chart-0 forms only; dd^c phi = Delta phi / (2 pi) dx dy in the chart.
  const int n = 1024;
  const double R = 2.0, h = 2 * R / n;
  for (std::size_t j = 0; j < panel.size(); j += 9) {
    const auto& f = panel.forms[j];
    if (f.chart != 0 || f.frequency() > 16) continue;
    double a = 0, b = 0;
    for (int p = 1; p < n - 1; ++p)
      for (int q = 1; q < n - 1; ++q) {
        const double x = -R + p * h, y = -R + q * h;
        const double lap = (f.at({x + h, y}) + f.at({x - h, y}) + f.at({x, y + h}) + f.at({x, y - h}) - 4 * f.at({x, y})) / (h * h);
        const HPoint<1> z{1.0, cd(x, y)};
        a += f.at({x, y}) * fs_density<1>({cd(x, y)}) * h * h;
        b += s(z) * lap / (2 * kPi) * h * h;
      }
    EXPECT_NEAR(pairs[j], a + b, 2e-4 * (1 + f.frequency())) << "form " << j;
  }
}

TEST(Lelong, LineAndLogAtom) {
  const auto L = Current11<2>::hyperplane({0.0, 1.0, -1.0});
  const std::vector<double> radii{0.2, 0.1, 0.05, 0.025};
  EXPECT_NEAR(lelong_number<2>(L, {1.0, 0.5, 0.5}, radii).value, 1.0, 0.05);
  EXPECT_NEAR(lelong_number<2>(L, {1.0, 0.5, -0.5}, radii).value, 0.0, 0.02);
  const cd a(0.2, 0.1);
  const auto atom = Current11<1>::from_function(
      [a](const HPoint<1>& z) { return 0.5 * std::log(std::abs(z[1] - a * z[0]) / norm<1>(z)); }, "log-atom");
  const auto r = lelong_number<1>(atom, {1.0, a}, radii);
  EXPECT_NEAR(r.value, 0.5, 0.02);
  EXPECT_LE(r.value, mass<1>(atom) + 1e-6);
}

TEST(Lelong, SmoothFormsAndFiniteDifferenceLine) {
  const std::vector<double> radii{0.2, 0.1, 0.05, 0.025};
  RowFactor<2> B = RowFactor<2>::Identity(3, 3);
  B(0, 2) = 0.7;
  EXPECT_NEAR(lelong_number<2>(Current11<2>::gram(B), {1.0, 0.2, 0.1}, radii).value, 0.0, 1e-2);
  // The same line as an opaque function term goes through the flux route.
  const auto g = GramTerm<2>::hyperplane({0.0, 1.0, -1.0});
  const auto L = Current11<2>::from_function([g](const HPoint<2>& z) { return g.value(z); }, "line");
  EXPECT_NEAR(lelong_number<2>(L, {1.0, 0.5, 0.5}, radii).value, 1.0, 0.05);
  EXPECT_THROW(lelong_number<2>(L, {1.0, 0.5, 0.5}, {0.1, 0.2, 0.05}), DomainError);
}

TEST(Regularize, MassAndWeakConvergence) {
  RowFactor<1> B(2, 2);
  B << 1.0, cd(0.5, 0.2), 0.0, 2.0;
  const auto S = Current11<1>::gram(B);
  const auto pS = panel_pairings<1>(S);
  double prev = 1e9;
  for (double th : {0.2, 0.1, 0.05}) {
    const auto St = regularize<1>(S, th);
    EXPECT_EQ(St.tag, Provenance::regularized);
    EXPECT_NEAR(mass<1>(St), 1.0, 1e-6);
    const double d = dist_from_pairings<1>(panel_pairings<1>(St), pS, 2.0);
    EXPECT_LT(d, prev);
    prev = d;
  }
  EXPECT_THROW(regularize<1>(S, 0.0), DomainError);
  EXPECT_THROW(regularize<1>(S, 0.5, 16), DomainError);
}

TEST(Regularize, DivisorDensityGrowth) {
  const auto D = Current11<1>::point({1.0, cd(0.3, 0.2)});
  std::vector<double> xs, ys;
  for (double th : {0.4, 0.2, 0.1, 0.05}) {
    const auto mu = trace_measure<1>(regularize<1>(D, th, 256, 7));
    EXPECT_NEAR(mu.mass(), 1.0, 1e-12);
    xs.push_back(std::log(1 / th));
    ys.push_back(std::log(sup_density<1>(mu)));
  }
  for (std::size_t i = 1; i < ys.size(); ++i) EXPECT_GT(ys[i], ys[i - 1]);
  const double slope = fit_slope(xs, ys);
  EXPECT_GT(slope, 0.5);
  EXPECT_LE(slope, 2 * 1 + 4 * 1 + 2.0);
}

// |theta| = |theta'| gives the same law: two seeds at theta and i theta
// agree on the panel to Monte Carlo accuracy.
TEST(Regularize, EqualModulusSameLaw) {
  const auto D = Current11<1>::point({1.0, cd(0.3, 0.2)});
  const auto a = panel_pairings<1>(regularize<1>(D, 0.3, 512, 1));
  const auto b = panel_pairings<1>(regularize<1>(D, cd(0, 0.3), 512, 2));
  const auto c = panel_pairings<1>(regularize<1>(D, 0.15, 512, 2));
  const double same = dist_from_pairings<1>(a, b, 2.0), other = dist_from_pairings<1>(a, c, 2.0);
  EXPECT_LT(same, 0.5 * other);
}

TEST(Regularize, SupDensityMatchesGramClosedForm) {
  // omega_Q on P^1 has density q_max / q_min relative to omega at its peak.
  for (double e : {0.5, 0.25, 0.125}) {
    RowFactor<1> B(2, 2);
    B << 1.0, 0.3, 0.0, e;
    Eigen::SelfAdjointEigenSolver<Mat<1>> es(B.adjoint() * B);
    const double exact = es.eigenvalues()(1) / es.eigenvalues()(0);
    EXPECT_NEAR(sup_density<1>(trace_measure<1>(Current11<1>::gram(B))) / exact, 1.0, 0.15);
  }
}

TEST(Panel, PotentialPairingsMatchTracePairings) {
  RowFactor<1> B1(2, 2);
  B1 << 1.0, cd(0.4, 0.2), 0.0, 0.8;
  const auto S1 = Current11<1>::gram(B1);
  const auto g1 = S1.u;
  const auto ibp1 = potential_pairings<1>([&](const HPoint<1>& z, double* out) { out[0] = g1(z); }, 1);
  const auto a1 = panel_pairings<1>(S1), b1 = panel_pairings<1>(Current11<1>::fubini_study());
  for (std::size_t j = 0; j < a1.size(); ++j)
    EXPECT_NEAR(ibp1[0][j], a1[j] - b1[j], 2e-4 * (1 + default_panel<1>().forms[j].frequency())) << "form " << j;

  RowFactor<2> B2 = RowFactor<2>::Identity(3, 3);
  B2(0, 1) = cd(0.5, -0.2);
  B2(2, 0) = 0.3;
  const auto S2 = Current11<2>::gram(B2);
  const auto g2 = S2.u;
  const auto ibp2 = potential_pairings<2>([&](const HPoint<2>& z, double* out) { out[0] = g2(z); }, 1);
  const auto a2 = panel_pairings<2>(S2), b2 = panel_pairings<2>(Current11<2>::fubini_study());
  double worst = 0, scale = 0;
  for (std::size_t j = 0; j < a2.size(); ++j) {
    worst = std::max(worst, std::abs(ibp2[0][j] - (a2[j] - b2[j])));
    scale = std::max(scale, std::abs(a2[j] - b2[j]));
  }
  EXPECT_GT(scale, 1e-2);
  EXPECT_LT(worst, 5e-2 * scale);
}
