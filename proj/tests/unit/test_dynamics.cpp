#include <gtest/gtest.h>

#include <spc/currents/measure.hpp>
#include <spc/currents/panel.hpp>
#include <spc/currents/regularize.hpp>
#include <spc/dynamics/endomorphism.hpp>
#include <spc/dynamics/henon.hpp>

#include <algorithm>
#include <random>

using namespace spc;
using namespace spc::currents;
using namespace spc::dynamics;

namespace {

constexpr const char* kQuadP1 = "[z0^2 : z1^2 - 0.6*z0^2 + 0.3i*z0^2]";
constexpr const char* kQuadP2 = "[z0^2 + 0.3*z1*z2 : z1^2 - 0.2*z0*z2 : z2^2 + 0.25*z0*z1]";
const cd kC(-0.6, 0.3);

Current11<1> smooth_p1() {
  RowFactor<1> B(2, 2);
  B << 1.0, cd(0.4, 0.2), 0.0, 0.8;
  return Current11<1>::gram(B);
}

Current11<2> smooth_p2() {
  RowFactor<2> B = RowFactor<2>::Identity(3, 3);
  B(0, 1) = cd(0.5, -0.2);
  B(2, 0) = 0.3;
  return Current11<2>::gram(B);
}

}  // namespace

TEST(Endomorphism, RejectsDegenerateMaps) {
  EXPECT_THROW(Endomorphism<1>::parse("[z0 : z1]"), DomainError);
  EXPECT_THROW(Endomorphism<1>::parse("[z0*z1 : z1^2]"), DomainError);
  // [z0^2 : z0 z1 : z2^2] vanishes at [0:1:0].
  EXPECT_THROW(Endomorphism<2>::parse("[z0^2 : z0*z1 : z2^2]"), DomainError);
  EXPECT_NO_THROW(Endomorphism<2>::parse(kQuadP2));
}

TEST(Endomorphism, CorrectorIsLogOfNormRatio) {
  const auto f = Endomorphism<1>::parse(kQuadP1);
  const HPoint<1> z{cd(0.7, -0.2), cd(1.3, 0.4)};
  const cd w = z[1] / z[0];
  const HPoint<1> Fz{z[0] * z[0], z[1] * z[1] + kC * z[0] * z[0]};
  EXPECT_NEAR(f.corrector(z), std::log(norm<1>(Fz)) - 2 * std::log(norm<1>(z)), 1e-13);
  // Degree-0 homogeneity.
  const HPoint<1> z2{z[0] * cd(0.3, 2.0), z[1] * cd(0.3, 2.0)};
  EXPECT_NEAR(f.corrector(z), f.corrector(z2), 1e-12);
  const HPoint<1> fz = f(z);
  EXPECT_NEAR(std::abs(fz[1] / fz[0] - (w * w + kC)), 0.0, 1e-12);
}

TEST(Pullback, OmegaMatchesJacobianDensity) {
  // L(omega) = f^* omega / d has density |f'|^2 rho(f) / d against Lebesgue
  // measure in the chart; the oracle integrates panel functions against it.
  const auto f = Endomorphism<1>::parse(kQuadP1);
  const auto L = pullback<1>(f, Current11<1>::fubini_study());
  EXPECT_NEAR(mass<1>(L), 1.0, 1e-3);
  const auto& panel = default_panel<1>();
  const auto got = panel_pairings<1>(L, panel);
  const auto q = fs_quadrature<1>(200, 400);
  const auto rho = [](cd w) { return 1 / (kPi * std::pow(1 + std::norm(w), 2)); };
  double worst = 0;
  // Errors are measured as in dist_1: high-frequency forms alias on the
  // pairing grids and are discounted by their C^1 norm.
  for (std::size_t j = 0; j < panel.size(); j += 7) {
    const auto& phi = panel.forms[j];
    const double want = q.integrate([&](const HPoint<1>& z) {
      if (std::abs(z[0]) < 1e-12) return 0.0;
      const cd w = z[1] / z[0];
      return phi(z) * std::norm(2.0 * w) * rho(w * w + kC) / (2 * rho(w));
    });
    worst = std::max(worst, std::abs(got[j] - want) / phi.calpha_norm(1.0));
  }
  EXPECT_LT(worst, 1e-3);
}

TEST(Pullback, PointMassGoesToItsPreimages) {
  const auto f = Endomorphism<1>::parse(kQuadP1);
  const cd a(0.4, 0.9);
  const auto L = pullback<1>(f, Current11<1>::point({1.0, a}));
  EXPECT_TRUE(L.u.functions.empty());
  const auto mu = trace_measure<1>(L);
  ASSERT_EQ(mu.cloud.size(), 2u);
  const cd r = std::sqrt(a - kC);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_NEAR(mu.cloud.weights[i], 0.5, 1e-12);
    const auto& p = mu.cloud.points[i];
    const double d = std::min(fs_distance<1>(p, {1.0, r}), fs_distance<1>(p, {1.0, -r}));
    EXPECT_LT(d, 1e-9);
  }
}

TEST(Pullback, IterateMatchesRepeatedPullback) {
  const auto f = Endomorphism<1>::parse(kQuadP1);
  const auto S = smooth_p1();
  const auto twice = pullback<1>(f, pullback<1>(f, S));
  const auto direct = pullback_iterate<1>(f, S, 2);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> nd;
  std::vector<double> gaps;
  for (int i = 0; i < 200; ++i) {
    const HPoint<1> z{cd(nd(rng), nd(rng)), cd(nd(rng), nd(rng))};
    gaps.push_back(twice.u(z) - direct.u(z));
  }
  const auto [lo, hi] = std::minmax_element(gaps.begin(), gaps.end());
  EXPECT_LT(*hi - *lo, 1e-9);
  EXPECT_LT(std::abs(*hi), 1e-4);
  EXPECT_NEAR(mass<1>(direct), 1.0, 1e-3);
}

TEST(GreenEndo, PowerMapMatchesClosedForm) {
  const auto f = Endomorphism<1>::parse("[z0^2 : z1^2]");
  const auto T = green_current_endo<1>(f, 20);
  // g = log max(|z0|, |z1|) - log |z|, whose mean is -1/2 + log(2)/2.
  const double mean = -0.5 + 0.5 * std::log(2.0);
  const double h = 1.0 / 16;
  double worst = 0;
  for (int a = -40; a <= 40; ++a)
    for (int b = -40; b <= 40; ++b) {
      const cd w((a + 0.5) * h, (b + 0.5) * h);
      if (std::abs(std::abs(w) - 1) < 2 * h) continue;
      const HPoint<1> z{1.0, w};
      const double g = std::log(std::max(1.0, std::abs(w))) - std::log(norm<1>(z));
      worst = std::max(worst, std::abs((T.current.u(z) - T.current.u.mean()) - (g - mean)));
    }
  EXPECT_LT(worst, 1e-3);
}

TEST(GreenEndo, ResidualsAreGeometric) {
  const auto f = Endomorphism<1>::parse(kQuadP1);
  const auto T = green_current_endo<1>(f, 30);
  EXPECT_LE(T.invariance, 1e-6);
  for (int m = 12; m < 30; ++m) EXPECT_NEAR(T.residuals[m] / T.residuals[m - 1], 0.5, 0.05) << m;
  const auto T2 = green_current_endo<2>(Endomorphism<2>::parse(kQuadP2), 30);
  EXPECT_LE(T2.invariance, 1e-6);
  EXPECT_NEAR(T2.residuals[29] / T2.residuals[28], 0.5, 0.05);
}

TEST(Equidistribution, QuadraticMapsDecay) {
  const auto f1 = Endomorphism<1>::parse(kQuadP1);
  const auto fit1 = equidistribution_endo<1>(f1, smooth_p1(), 12);
  EXPECT_TRUE(fit1.pass) << fit1.lambda << " " << fit1.r2;
  EXPECT_GT(fit1.lambda, 1.0);
  ASSERT_EQ(fit1.records.size(), 13u);
  const auto f2 = Endomorphism<2>::parse(kQuadP2);
  const auto fit2 = equidistribution_endo<2>(f2, smooth_p2(), 12);
  EXPECT_TRUE(fit2.pass) << fit2.lambda << " " << fit2.r2;
}

TEST(Equidistribution, GreenCurrentIsAFixedPoint) {
  const auto f = Endomorphism<1>::parse(kQuadP1);
  const auto T = green_current_endo<1>(f, 60);
  const auto fit = equidistribution_endo<1>(f, T.current, 8);
  EXPECT_TRUE(fit.converged_before_fit);
  for (const auto& r : fit.records) EXPECT_LT(r.distance, 1e-9);
}

TEST(Equidistribution, PreimagesOfOneAreRootsOfUnity) {
  const auto f = Endomorphism<1>::parse("[z0^2 : z1^2]");
  const int n = 12, m = 1 << n;
  const auto cloud = preimage_cloud(f, GridMeasure<1>::dirac({1.0, 1.0}), n);
  ASSERT_EQ(cloud.cloud.size(), std::size_t(m));
  // Every preimage is an m-th root of unity, and all of them appear.
  std::vector<char> seen(m, 0);
  for (std::size_t i = 0; i < cloud.cloud.size(); ++i) {
    const auto& p = cloud.cloud.points[i];
    const cd w = p[1] / p[0];
    EXPECT_NEAR(std::abs(w), 1.0, 1e-9);
    const double k = std::arg(w) / (2 * kPi) * m;
    const int kk = ((int(std::lround(k)) % m) + m) % m;
    EXPECT_NEAR(k, std::round(k), 1e-6);
    seen[kk] = 1;
    EXPECT_NEAR(cloud.cloud.weights[i], 1.0 / m, 1e-15);
  }
  EXPECT_EQ(std::count(seen.begin(), seen.end(), 1), m);
}

TEST(Equidistribution, RegularizedDiracEquidistributesToTheCircle) {
  const auto f = Endomorphism<1>::parse("[z0^2 : z1^2]");
  const auto S0 = regularize<1>(GridMeasure<1>::dirac({1.0, 1.0}), 0.2);
  GridMeasure<1> arc;
  const int m = 1 << 16;
  for (int k = 0; k < m; ++k) arc.cloud.add(normalize<1>({1.0, std::polar(1.0, 2 * kPi * (k + 0.5) / m)}), 1.0 / m);
  const auto fit = equidistribution_endo(f, S0, 12, arc);
  EXPECT_EQ(fit.route, "preimage-cloud");
  EXPECT_LE(fit.records.back().distance, 5e-2);
  EXPECT_LT(fit.records.back().distance, fit.records.front().distance);
}

TEST(DynamicalSuperPotential, NormalizationAndFunctionalEquation) {
  const auto f = Endomorphism<1>::parse(kQuadP1);
  const auto T = green_current_endo<1>(f, 30);
  const auto anchor = equilibrium_cloud<1>(f, 14, HPoint<1>{1.0, cd(0.3, 0.7)});
  const auto tests = test_measures<1>(10);
  ASSERT_EQ(tests.size(), 10u);

  const auto VT = dynamical_super_potential<1>(T.current, T, anchor);
  for (const auto& R : tests) EXPECT_NEAR(VT(R).value, 0.0, 1e-3);

  const auto rep = functional_equation_check<1>(f, smooth_p1(), T, anchor, tests);
  EXPECT_NEAR(rep.anchor_value, 0.0, 1e-12);
  EXPECT_LE(rep.max_residual, 3e-2);
}

// ---------------------------------------------------------------------------

class Henon : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    f_ = new RegularAutomorphism(RegularAutomorphism::henon(-1.1, 0.3));
    Gp_ = new HenonGreen(henon_green(*f_, true));
    Gm_ = new HenonGreen(henon_green(*f_, false));
  }
  static void TearDownTestSuite() {
    delete Gm_;
    delete Gp_;
    delete f_;
  }
  static RegularAutomorphism* f_;
  static HenonGreen* Gp_;
  static HenonGreen* Gm_;
};

RegularAutomorphism* Henon::f_ = nullptr;
HenonGreen* Henon::Gp_ = nullptr;
HenonGreen* Henon::Gm_ = nullptr;

TEST_F(Henon, Structure) {
  EXPECT_EQ(f_->d_plus(), 2);
  EXPECT_EQ(f_->d_minus(), 2);
  EXPECT_EQ(f_->I_plus().size(), 1u);
  EXPECT_EQ(f_->I_minus().size(), 1u);
  EXPECT_LT(f_->inverse_defect(200, 9), 1e-9);
  // The forward map is not invertible when a = 0.
  EXPECT_THROW(RegularAutomorphism::henon(-1.1, 0.0), DomainError);
}

TEST_F(Henon, GreenFunctions) {
  EXPECT_LE(Gp_->invariance, 1e-6);
  EXPECT_LE(Gm_->invariance, 1e-6);
  EXPECT_NEAR(Gp_->mass, 1.0, 1e-2);
  // Attracting fixed point x = y = (1.3 - sqrt(1.69 + 4.4)) / 2 and its basin.
  const double x = (1.3 - std::sqrt(1.69 + 4.4)) / 2;
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-0.05, 0.05);
  for (int i = 0; i < 50; ++i) {
    const Affine2 p{cd(x + u(rng), u(rng)), cd(x + u(rng), u(rng))};
    EXPECT_EQ(Gp_->G(p), 0.0);
  }
  // Escaping points: G_+ = log|y| + O(1) for large |y|, and G_+(f) = 2 G_+.
  const Affine2 far{0.0, 50.0};
  EXPECT_NEAR(Gp_->G(f_->apply(far)), 2 * Gp_->G(far), 1e-9);
  EXPECT_NEAR(Gp_->G(far), std::log(50.0), 0.1);
}

TEST_F(Henon, EquilibriumMeasure) {
  EquilibriumOptions o;
  o.n = 32;
  const auto mu = henon_equilibrium(*f_, *Gp_, *Gm_, o);
  EXPECT_NEAR(mu.mass, 1.0, 2e-2);
  EXPECT_LE(mu.invariance, 5e-2);
  EXPECT_EQ(mu.saddles.size(), 3u);
  EXPECT_GE(mu.support_fraction, 0.95);
  // The support check separates mu from the window volume.
  EXPECT_LT(mu.volume_fraction, 0.6);
}

TEST_F(Henon, ContractionTowardGreenCurrent) {
  const std::vector<Current11<2>> family{green_level_current(*Gp_, 0.1), green_level_current(*Gp_, 0.05)};
  const auto rep = henon_uniqueness_experiment(*f_, *Gp_, family, 8);
  EXPECT_TRUE(rep.decreasing);
  for (double l : rep.leaks) EXPECT_LT(l, 1e-2);
  for (const auto& fit : rep.to_T) EXPECT_GT(fit.lambda, 1.0);
  ASSERT_EQ(rep.pairwise.size(), 1u);
  EXPECT_LT(rep.pairwise[0].back(), rep.pairwise[0].front());
}

TEST_F(Henon, RejectsLeakingInput) {
  UniquenessOptions o;
  o.window.n = 20;
  EXPECT_THROW(henon_uniqueness_experiment(*f_, *Gp_, {Current11<2>::fubini_study()}, 2, o), DomainError);
}
