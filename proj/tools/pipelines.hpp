#pragma once

// The seven experiment kinds. Each reads its fields from the config, runs the
// library, writes CSV/PNG artifacts into the run context and records verdicts
// tagged with the acceptance criterion they reproduce.

#include "run_context.hpp"

#include <spc/currents/lelong.hpp>
#include <spc/currents/measure.hpp>
#include <spc/currents/panel.hpp>
#include <spc/currents/regularize.hpp>
#include <spc/dynamics/endomorphism.hpp>
#include <spc/dynamics/henon.hpp>
#include <spc/intersect.hpp>
#include <spc/polymap/degrees.hpp>
#include <spc/polymap/map.hpp>
#include <spc/superpot.hpp>

#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

namespace spc::cli {

using currents::Current11;
using currents::GridMeasure;
using currents::RowFactor;

struct KindInfo {
  std::string name;
  std::string summary;
  std::vector<std::string> required;
  std::vector<std::string> optional;  // "field=default"
  std::vector<std::string> criteria;
  std::function<void(const Fields&, RunContext&)> run;
};

namespace detail {

inline std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

inline double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i] / x.size();
    my += y[i] / y.size();
  }
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

struct Grid {
  int n;
  double radius;
};

inline Grid read_grid(const Fields& f, int default_n, double default_radius) {
  const auto g = f.sub("grid");
  g.only({"n", "radius"});
  Grid out{g.opt<int>("n", default_n), g.opt<double>("radius", default_radius)};
  if (out.n < 8) throw ConfigError("field 'grid.n': must be at least 8");
  if (!(out.radius > 0)) throw ConfigError("field 'grid.radius': must be positive");
  return out;
}

inline polymap::HomogeneousMap read_map(const Fields& f, const std::string& key = "map") {
  try {
    return polymap::HomogeneousMap::parse(f.req<std::string>(key));
  } catch (const ParseError& e) {
    throw ConfigError("field '" + f.name(key) + "': " + e.what());
  } catch (const DomainError& e) {
    throw ConfigError("field '" + f.name(key) + "': " + e.what());
  }
}

template <int K>
RowFactor<K> read_factor(const json& v, const std::string& where) {
  if (!v.is_array() || v.empty() || v.size() > K + 1) throw ConfigError("field '" + where + "': expected 1.." + std::to_string(K + 1) + " rows");
  RowFactor<K> B(v.size(), K + 1);
  for (std::size_t r = 0; r < v.size(); ++r) {
    if (!v[r].is_array() || v[r].size() != K + 1) throw ConfigError("field '" + where + "': each row needs " + std::to_string(K + 1) + " entries");
    for (int c = 0; c <= K; ++c) B(r, c) = Fields::to_complex(v[r][c], where);
  }
  return B;
}

inline io::CsvTable decay_table(const dynamics::DecayFit& fit) {
  io::CsvTable t;
  t.schema = "decay";
  t.columns = {"n", "distance", "residual", "lambda_partial"};
  for (const auto& r : fit.records) t.add_numbers({double(r.n), r.distance, r.residual, r.lambda_partial});
  return t;
}

inline json fit_json(const dynamics::DecayFit& fit) {
  return {{"lambda", fit.lambda}, {"r2", fit.r2}, {"converged_before_fit", fit.converged_before_fit}, {"route", fit.route}};
}

// ---------------------------------------------------------------------------

template <int K>
void green_endo_k(const polymap::HomogeneousMap& m, const Fields& f, RunContext& ctx) {
  const dynamics::Endomorphism<K> map(m, ctx.seed());
  const int n = f.opt<int>("iterations", 30);
  if (n < 2) throw ConfigError("field 'iterations': must be at least 2");
  const auto grid = read_grid(f, 64, 2.0);
  const auto T = dynamics::green_current_endo<K>(map, n);
  const int d = map.degree();

  io::CsvTable t;
  t.schema = "green-residuals";
  t.columns = {"m", "residual", "ratio"};
  for (int k = 0; k < n; ++k) t.add_numbers({double(k + 1), T.residuals[k], k ? T.residuals[k] / T.residuals[k - 1] : 0.0});
  ctx.csv("residuals.csv", t);

  ctx.verdict("endo-invariance", "AC2", T.invariance <= 1e-6, "sup |(g o f + h)/d - g| = " + num(T.invariance));
  const double ratio = T.residuals[n - 1] / T.residuals[n - 2];
  ctx.verdict("residual-ratio", "invariant", std::abs(ratio - 1.0 / d) <= 0.05, "ratio " + num(ratio) + " vs 1/d");

  // Closed form for the power map [z0^d : z1^d]: g = log max(|z0|, |z1|) - log |z|.
  bool power = false;
  if constexpr (K == 1) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "[z0^%d : z1^%d]", d, d);
    power = m == polymap::HomogeneousMap::parse(buf);
  }
  double closed_err = 0;
  if (power) {
    const double h = 2 * grid.radius / grid.n, mean = -0.5 + 0.5 * std::log(2.0);
    for (int a = 0; a < grid.n; ++a)
      for (int b = 0; b < grid.n; ++b) {
        const cd w(-grid.radius + (a + 0.5) * h, -grid.radius + (b + 0.5) * h);
        if (std::abs(std::abs(w) - 1) < 2 * h) continue;
        const HPoint<K> z{1.0, w};
        const double g = std::log(std::max(1.0, std::abs(w))) - std::log(norm<K>(z));
        closed_err = std::max(closed_err, std::abs(T.current.u(z) - T.current.u.mean() - (g - mean)));
      }
    ctx.verdict("closed-form", "AC1", closed_err <= 1e-3, "sup error outside 2 cells of |z| = 1: " + num(closed_err));
  } else {
    ctx.skip("closed-form", "AC1", "no closed form for this map");
  }

  if constexpr (K == 1) {
    ctx.png("potential.png", io::chart_heatmap_p1([&](const HPoint<1>& z) { return T.potential(z); }, 0, grid.radius, 256));
  } else {
    // Slice z2 = 0 of chart 0.
    io::Heatmap hm{256, 256, std::vector<double>(256 * 256)};
    const double step = 2 * grid.radius / 256;
    parallel_for(hm.values.size(), [&](std::size_t i) {
      const cd x(-grid.radius + (i % 256 + 0.5) * step, grid.radius - (i / 256 + 0.5) * step);
      hm.values[i] = T.potential(HPoint<2>{1.0, x, 0.0});
    });
    ctx.png("potential.png", hm);
  }
  ctx.summary() = {{"k", K},
                   {"degree", d},
                   {"iterations", n},
                   {"residual", T.residual},
                   {"invariance", T.invariance},
                   {"mean", T.current.u.mean()},
                   {"closed_form_error", power ? json(closed_err) : json(nullptr)}};
}

inline void green_endo(const Fields& f, RunContext& ctx) {
  f.only({"kind", "map", "iterations", "grid", "seed", "output"});
  const auto m = read_map(f);
  if (m.k() == 1) green_endo_k<1>(m, f, ctx);
  else if (m.k() == 2) green_endo_k<2>(m, f, ctx);
  else throw ConfigError("field 'map': only P^1 and P^2 maps are supported");
}

// ---------------------------------------------------------------------------

template <int K>
void equidist_k(const polymap::HomogeneousMap& m, const Fields& f, RunContext& ctx) {
  const dynamics::Endomorphism<K> map(m, ctx.seed());
  const int N = f.opt<int>("N", 12);
  if (N < 1 || N > 25) throw ConfigError("field 'N': must lie in 1..25");
  dynamics::EquidistributionOptions o;
  o.alpha = f.opt<double>("alpha", 1.0);
  if (!(o.alpha > 0)) throw ConfigError("field 'alpha': must be positive");
  const auto grid = read_grid(f, 256, 2.0);
  const auto s0 = f.sub("S0");
  const auto type = s0.req<std::string>("type");
  dynamics::DecayFit fit;
  io::Heatmap final_map;
  bool have_png = false;

  if (type == "dirac") {
    s0.only({"type", "point", "theta", "samples", "reference", "reference_levels"});
    if constexpr (K != 1) {
      throw ConfigError("field 'S0.type': the measure route (dirac) is implemented on P^1 only");
    } else {
      const auto a = s0.point<1>("point");
      const double theta = s0.opt<double>("theta", 0.2);
      const int samples = s0.opt<int>("samples", 64);
      const auto mu0 = currents::regularize<1>(GridMeasure<1>::dirac(a), theta, samples, ctx.seed());
      const auto ref_kind = s0.opt<std::string>("reference", "equilibrium");
      GridMeasure<1> ref;
      if (ref_kind == "circle") {
        const int M = 1 << 16;
        for (int k = 0; k < M; ++k) ref.cloud.add(normalize<1>({1.0, std::polar(1.0, 2 * kPi * (k + 0.5) / M)}), 1.0 / M);
      } else if (ref_kind == "equilibrium") {
        ref = dynamics::equilibrium_cloud<1>(map, s0.opt<int>("reference_levels", 14), HPoint<1>{1.0, cd(0.3, 0.7)}, ctx.seed());
      } else {
        throw ConfigError("field 'S0.reference': expected 'circle' or 'equilibrium'");
      }
      fit = dynamics::equidistribution_endo(map, mu0, N, ref, o);
      final_map = io::measure_heatmap_p1(dynamics::preimage_cloud(map, mu0, N), 0, grid.radius, grid.n);
      have_png = true;
    }
  } else {
    Current11<K> S;
    if (type == "fubini-study") {
      s0.only({"type"});
    } else if (type == "gram") {
      s0.only({"type", "factor"});
      S = Current11<K>::gram(read_factor<K>(s0.raw("factor"), s0.name("factor")));
    } else if (type == "green") {
      s0.only({"type"});
      S = dynamics::green_current_endo<K>(map, 60).current;
    } else {
      throw ConfigError("field 'S0.type': expected fubini-study, gram, green or dirac");
    }
    fit = dynamics::equidistribution_endo<K>(map, S, N, o);
    if constexpr (K == 1) {
      // Potential of L^N S0 relative to the Green potential.
      const int L = N + o.green_iterates, d = map.degree();
      final_map = io::chart_heatmap_p1(
          [&](const HPoint<1>& z) {
            const auto orb = dynamics::normalized_orbit<1>(map.lift(), z, L);
            return dynamics::green_sum(orb.logs, d, N) + std::pow(double(d), -N) * S.u(orb.points[N]);
          },
          0, grid.radius, 256);
      have_png = true;
    }
  }
  ctx.csv("decay.csv", decay_table(fit));
  if (have_png) ctx.png("final.png", final_map);
  if (fit.converged_before_fit) {
    ctx.verdict("decay-fit", "AC8", true, "distances at the noise floor (fixed point)");
  } else {
    ctx.verdict("decay-fit", "AC8", fit.pass, "lambda " + num(fit.lambda) + ", R^2 " + num(fit.r2));
  }
  ctx.summary() = {{"k", K}, {"N", N}, {"alpha", o.alpha}, {"fit", fit_json(fit)}, {"final_distance", fit.records.back().distance}};
}

inline void equidist_endo(const Fields& f, RunContext& ctx) {
  f.only({"kind", "map", "N", "alpha", "S0", "grid", "seed", "output"});
  const auto m = read_map(f);
  if (m.k() == 1) equidist_k<1>(m, f, ctx);
  else if (m.k() == 2) equidist_k<2>(m, f, ctx);
  else throw ConfigError("field 'map': only P^1 and P^2 maps are supported");
}

// ---------------------------------------------------------------------------

inline void henon(const Fields& f, RunContext& ctx) {
  f.only({"kind", "c", "a", "map", "inverse", "iterations", "box", "grid", "mass", "equilibrium", "uniqueness", "seed", "output"});
  const auto fmap = [&] {
    if (f.has("map")) {
      try {
        return dynamics::RegularAutomorphism::parse(f.req<std::string>("map"), f.req<std::string>("inverse"));
      } catch (const ParseError& e) {
        throw ConfigError(std::string("field 'map' or 'inverse': ") + e.what());
      } catch (const DomainError& e) {
        throw ConfigError(std::string("field 'map' or 'inverse': ") + e.what());
      }
    }
    const double a = f.opt<double>("a", 0.3);
    if (a == 0) throw ConfigError("field 'a': must be nonzero");
    return dynamics::RegularAutomorphism::henon(f.opt<double>("c", -1.1), a);
  }();
  dynamics::HenonOptions ho;
  ho.iterates = f.opt<int>("iterations", 40);
  ho.box = f.opt<double>("box", 3.0);
  ho.seed = ctx.seed();
  ho.compute_mass = f.opt<bool>("mass", true);
  const auto grid = read_grid(f, 32, 2.5);
  const auto Gp = dynamics::henon_green(fmap, true, ho);
  const auto Gm = dynamics::henon_green(fmap, false, ho);
  json s = {{"d_plus", fmap.d_plus()}, {"d_minus", fmap.d_minus()}, {"iterations", ho.iterates}};
  s["invariance_plus"] = Gp.invariance;
  s["invariance_minus"] = Gm.invariance;
  ctx.verdict("henon-invariance", "AC2", Gp.invariance <= 1e-6, "sup |G+ o f - d G+| = " + num(Gp.invariance));
  {
    // sup |G_m - G_{m-1}| over box points. It is carried by orbits that escape
    // near step m, so it decays like d^{-m} until the sample runs out of late
    // escapers; escaped orbits contribute only superexponentially small terms.
    // The rate is fitted over m >= 3 while the sup stays above 1e-3 of its
    // first value.
    const auto pts = dynamics::box_points(ho.box, 2000, ho.seed + 1);
    const int M = std::min(ho.iterates, 24);
    std::vector<double> sup(M + 1, 0.0);
    std::vector<std::vector<double>> g(pts.size());
    parallel_for(pts.size(), [&](std::size_t i) {
      g[i].resize(M + 1);
      for (int m = 0; m <= M; ++m) g[i][m] = dynamics::henon_green_value(fmap, true, pts[i], m);
    });
    for (const auto& v : g)
      for (int m = 1; m <= M; ++m) sup[m] = std::max(sup[m], std::abs(v[m] - v[m - 1]));
    std::vector<double> xs, ys;
    for (int m = 3; m <= M && sup[m] > 1e-3 * sup[1]; ++m) {
      xs.push_back(m);
      ys.push_back(std::log(sup[m]));
    }
    io::CsvTable t;
    t.schema = "henon-residuals";
    t.columns = {"m", "residual"};
    for (int m = 1; m <= M; ++m) t.add_numbers({double(m), sup[m]});
    ctx.csv("residuals.csv", t);
    const double ratio = xs.size() >= 3 ? std::exp(fit_slope(xs, ys)) : 0.0;
    s["residual_ratio_plus"] = ratio;
    ctx.verdict("henon-residual-ratio", "invariant", std::abs(ratio - 1.0 / fmap.d_plus()) <= 0.05,
                "fitted ratio " + num(ratio) + " over m = 3.." + std::to_string(3 + int(xs.size()) - 1) + " vs 1/d+");
  }
  ctx.verdict("degree-consistency", "invariant", fmap.d_plus() == fmap.d_minus(), "d+ = " + std::to_string(fmap.d_plus()) + ", d- = " + std::to_string(fmap.d_minus()));
  if (ho.compute_mass) {
    s["mass_plus"] = Gp.mass;
    ctx.verdict("green-mass", "invariant", std::abs(Gp.mass - 1) <= 1e-2, "mass(T+) = " + num(Gp.mass));
  }

  // G_+ on the real slice (x, y) in [-box, box]^2, top row y = box.
  io::Heatmap hm{256, 256, std::vector<double>(256 * 256)};
  const double step = 2 * ho.box / 256;
  parallel_for(hm.values.size(), [&](std::size_t i) {
    hm.values[i] = Gp.G({cd(-ho.box + (i % 256 + 0.5) * step), cd(ho.box - (i / 256 + 0.5) * step)});
  });
  ctx.png("green_plus.png", hm);

  if (f.opt<bool>("equilibrium", true)) {
    dynamics::EquilibriumOptions eo;
    eo.n = grid.n;
    eo.radius = grid.radius;
    const auto mu = dynamics::henon_equilibrium(fmap, Gp, Gm, eo);
    s["mu"] = {{"mass", mu.mass},
               {"negative_mass", mu.negative_mass},
               {"support_fraction", mu.support_fraction},
               {"volume_fraction", mu.volume_fraction},
               {"eps", mu.eps},
               {"invariance", mu.invariance}};
    ctx.verdict("mu-mass", "invariant", std::abs(mu.mass - 1) <= 2e-2, "mass(mu) = " + num(mu.mass));
    ctx.verdict("mu-support", "invariant", mu.support_fraction >= 0.95,
                num(mu.support_fraction) + " of mu within 3 cells of {max(G+, G-) <= " + num(mu.eps) + "}");
    ctx.verdict("mu-invariance", "invariant", mu.invariance <= 5e-2, "dist_2(f_* mu, mu) = " + num(mu.invariance));
    // Marginal of mu on the (Re x, Re y) plane.
    io::Heatmap mm{grid.n, grid.n, std::vector<double>(std::size_t(grid.n) * grid.n, 0.0)};
    const auto& g = mu.patch.grid;
    for (std::size_t i = 0; i < g.size(); ++i) {
      const auto idx = g.multi_index(i);
      mm.at(grid.n - 1 - idx[2], idx[0]) += std::max(0.0, mu.patch.weights[i]);
    }
    ctx.png("mu_marginal.png", mm);
  }

  if (f.has("uniqueness")) {
    const auto u = f.sub("uniqueness");
    u.only({"levels", "N"});
    const auto levels = u.opt<std::vector<double>>("levels", {0.1, 0.05});
    const int N = u.opt<int>("N", 8);
    std::vector<Current11<2>> family;
    for (double e : levels) family.push_back(dynamics::green_level_current(Gp, e));
    const auto rep = dynamics::henon_uniqueness_experiment(fmap, Gp, family, N);
    io::CsvTable t;
    t.schema = "henon-contraction";
    t.columns = {"n"};
    for (std::size_t i = 0; i < levels.size(); ++i) t.columns.push_back("dist_T_" + std::to_string(i));
    for (std::size_t i = 1; i < levels.size(); ++i) t.columns.push_back("dist_0_" + std::to_string(i));
    for (int n = 0; n <= N; ++n) {
      std::vector<double> row{double(n)};
      for (const auto& fit : rep.to_T) row.push_back(fit.records[n].distance);
      for (const auto& p : rep.pairwise) row.push_back(p[n]);
      t.add_numbers(row);
    }
    ctx.csv("contraction.csv", t);
    s["uniqueness"] = {{"levels", levels}, {"leaks", rep.leaks}, {"decreasing", rep.decreasing}};
    ctx.verdict("contraction", "AC10", rep.decreasing, "all distance sequences strictly decreasing over n = 0.." + std::to_string(N));
  }
  ctx.summary() = s;
}

// ---------------------------------------------------------------------------

inline HPoint<2> cross3(const HPoint<2>& a, const HPoint<2>& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

inline void wedge(const Fields& f, RunContext& ctx) {
  f.only({"kind", "random_pairs", "grid", "torus", "seed", "output"});
  const auto grid = read_grid(f, 48, 2.0);
  const int pairs = f.opt<int>("random_pairs", 5);
  intersect::WedgeOptions wo;
  wo.cell = 2 * grid.radius / grid.n;
  std::mt19937_64 rng(ctx.seed());
  std::normal_distribution<double> nd;
  auto rv = [&] { return HPoint<2>{cd(nd(rng), nd(rng)), cd(nd(rng), nd(rng)), cd(nd(rng), nd(rng))}; };
  io::CsvTable t;
  t.schema = "line-intersections";
  t.columns = {"pair", "mass", "near_fraction", "atom_distance"};
  double worst_mass = 0, worst_near = 1;
  for (int i = 0; i < pairs; ++i) {
    const auto l1 = rv(), l2 = rv();
    const auto w = intersect::wedge(Current11<2>::hyperplane(l1), Current11<2>::hyperplane(l2), wo);
    const auto p = cross3(l1, l2);
    const double near = intersect::mass_near(w.product, p, 3 * wo.cell);
    double atom = w.atoms.empty() ? std::numeric_limits<double>::quiet_NaN() : fs_distance<2>(w.atoms[0].point, p);
    t.add_numbers({double(i), w.mass, near, atom});
    worst_mass = std::max(worst_mass, std::abs(w.mass - 1));
    worst_near = std::min(worst_near, near);
  }
  ctx.csv("lines.csv", t);
  if (pairs > 0)
    ctx.verdict("line-intersection", "AC6", worst_mass <= 1e-2 && worst_near >= 0.95,
                "worst |mass - 1| " + num(worst_mass) + ", worst near fraction " + num(worst_near));
  json s = {{"pairs", pairs}, {"worst_mass_error", worst_mass}, {"worst_near_fraction", worst_near}};

  if (f.has("torus")) {
    const auto tf = f.sub("torus");
    tf.only({"n", "radius"});
    ChartGrid<2> g;
    g.n = tf.opt<int>("n", 48);
    g.radius = tf.opt<double>("radius", 1.3);
    auto phi = [](const ChartPoint<2>& x) { return std::log(std::max({1.0, std::abs(x[0]), std::abs(x[1])})); };
    const auto p = intersect::monge_ampere_window(phi, phi, g, 2, true);
    double total = 0, near = 0;
    io::Heatmap hm{g.n, g.n, std::vector<double>(std::size_t(g.n) * g.n, 0.0)};
    const double rmax = std::sqrt(2.0) * g.radius;
    for (std::size_t i = 0; i < g.size(); ++i) {
      const auto x = g.node(i);
      total += p.weights[i];
      if (std::hypot(std::abs(x[0]) - 1, std::abs(x[1]) - 1) <= 3 * g.h()) near += p.weights[i];
      const int c = std::min(g.n - 1, int(std::abs(x[0]) / rmax * g.n)), r = std::min(g.n - 1, int(std::abs(x[1]) / rmax * g.n));
      hm.at(g.n - 1 - r, c) += std::max(0.0, p.weights[i]);
    }
    ctx.png("torus_moduli.png", hm);
    s["torus"] = {{"mass", total}, {"near_fraction", near / total}};
    ctx.verdict("torus-shell", "AC7", near / total >= 0.9, num(near / total) + " of the mass within 3 cells of the torus");
  }
  ctx.summary() = s;
}

// ---------------------------------------------------------------------------

inline void capacity(const Fields& f, RunContext& ctx) {
  f.only({"kind", "witnesses", "point", "smooth_steps", "symmetry_pairs", "seed", "output"});
  const auto counts = f.opt<std::vector<int>>("witnesses", {10, 20, 40, 80, 160});
  const auto a = f.has("point") ? f.point<1>("point") : HPoint<1>{1.0, cd(0.3, 0.2)};
  const auto dirac = GridMeasure<1>::dirac(a);
  io::CsvTable t;
  t.schema = "capacity-dirac";
  t.columns = {"witnesses", "upper", "lower"};
  bool shrinking = true;
  double prev = 2;
  for (int n : counts) {
    const auto c = superpot::capacity_estimate<1>(dirac, n, ctx.seed());
    t.add_numbers({double(n), c.upper, c.lower});
    shrinking = shrinking && c.upper <= prev;
    prev = c.upper;
  }
  ctx.csv("capacity_dirac.csv", t);
  ctx.verdict("dirac-capacity", "AC12", shrinking && prev < 1e-3, "upper bounds non-increasing, last " + num(prev));

  const int steps = f.opt<int>("smooth_steps", 4);
  if (steps < 3) throw ConfigError("field 'smooth_steps': at least 3 are needed for a fit");
  io::CsvTable p;
  p.schema = "capacity-powerlaw";
  p.columns = {"sup_density", "cap_lower"};
  std::vector<double> ls, lc;
  for (int j = 0; j < steps; ++j) {
    RowFactor<1> B(2, 2);
    B << 1.0, 0.3, 0.0, 0.5 * std::pow(0.5, 0.5 * j);
    const auto mu = currents::trace_measure<1>(Current11<1>::gram(B));
    const auto c = superpot::capacity_estimate<1>(mu, 80, ctx.seed());
    const double s = currents::sup_density<1>(mu);
    p.add_numbers({s, c.lower});
    ls.push_back(std::log(s));
    lc.push_back(std::log(c.lower));
  }
  ctx.csv("capacity_powerlaw.csv", p);
  bool lower_ok = true;
  for (std::size_t i = 0; i < lc.size(); ++i) lower_ok = lower_ok && std::isfinite(lc[i]);
  const double lambda = -fit_slope(ls, lc);
  double r2 = 0;
  if (lower_ok) {
    const double b = fit_slope(ls, lc);
    double my = 0, ss = 0, sr = 0, mx = 0;
    for (std::size_t i = 0; i < lc.size(); ++i) {
      my += lc[i] / lc.size();
      mx += ls[i] / ls.size();
    }
    for (std::size_t i = 0; i < lc.size(); ++i) {
      ss += (lc[i] - my) * (lc[i] - my);
      const double e = lc[i] - my - b * (ls[i] - mx);
      sr += e * e;
    }
    r2 = ss > 0 ? 1 - sr / ss : 1.0;
  }
  ctx.verdict("smooth-powerlaw", "AC12", lower_ok && lambda > 0 && r2 >= 0.9, "fitted lambda " + num(lambda) + ", R^2 " + num(r2));

  const int pairs = f.opt<int>("symmetry_pairs", 20);
  std::mt19937_64 rng(ctx.seed() + 20);
  std::normal_distribution<double> nd;
  auto full = [&] {
    RowFactor<1> B(2, 2);
    for (int r = 0; r < 2; ++r)
      for (int c = 0; c < 2; ++c) B(r, c) = cd(nd(rng), nd(rng));
    return B;
  };
  io::CsvTable sym;
  sym.schema = "superpotential-symmetry";
  sym.columns = {"pair", "U_S_R", "U_R_S"};
  double worst = 0;
  for (int i = 0; i < pairs; ++i) {
    const auto S = Current11<1>::gram(full()), R = Current11<1>::gram(full());
    const double x = superpot::super_potential(S, R).value, y = superpot::super_potential(R, S).value;
    sym.add_numbers({double(i), x, y});
    worst = std::max(worst, std::abs(x - y) / (1 + std::abs(x)));
  }
  ctx.csv("symmetry.csv", sym);
  if (pairs > 0) ctx.verdict("symmetry", "AC3", worst <= 1e-2, "worst relative gap " + num(worst));
  ctx.summary() = {{"dirac_upper_last", prev}, {"powerlaw_lambda", lambda}, {"powerlaw_r2", r2}, {"symmetry_worst", worst}};
}

// ---------------------------------------------------------------------------

inline void distance_scaling(const Fields& f, RunContext& ctx) {
  f.only({"kind", "alphas", "separations", "point", "thetas", "lelong", "seed", "output"});
  const auto alphas = f.opt<std::vector<double>>("alphas", {0.5, 1.0, 2.0});
  const int seps = f.opt<int>("separations", 6);
  if (seps < 3) throw ConfigError("field 'separations': at least 3 are needed for a fit");
  const auto a = f.has("point") ? f.point<1>("point") : HPoint<1>{1.0, cd(0.3, 0.1)};
  io::CsvTable t;
  t.schema = "dirac-distance";
  t.columns = {"alpha", "separation", "distance"};
  json slopes = json::array();
  bool ok = true;
  for (double alpha : alphas) {
    std::vector<double> xs, ys;
    for (int k = 0; k < seps; ++k) {
      const double e = std::ldexp(1.0, -2 - k);
      HPoint<1> b = a;
      b[1] += e * a[0];
      const double dist = currents::dist_alpha<1>(GridMeasure<1>::dirac(a), GridMeasure<1>::dirac(b), alpha);
      t.add_numbers({alpha, e, dist});
      xs.push_back(std::log(e));
      ys.push_back(std::log(dist));
    }
    const double s = fit_slope(xs, ys);
    slopes.push_back({{"alpha", alpha}, {"slope", s}});
    ok = ok && std::abs(s - std::min(alpha, 1.0)) <= 0.1;
  }
  ctx.csv("dirac_distance.csv", t);
  ctx.verdict("dirac-slopes", "AC4", ok, "slopes within 0.1 of min(alpha, 1)");

  const auto thetas = f.opt<std::vector<double>>("thetas", {0.2, 0.1, 0.05});
  RowFactor<1> B(2, 2);
  B << 1.0, cd(0.5, 0.2), 0.0, 2.0;
  const auto S = Current11<1>::gram(B);
  const auto pS = currents::panel_pairings<1>(S);
  io::CsvTable r;
  r.schema = "regularization";
  r.columns = {"theta", "mass", "dist2"};
  double prev = std::numeric_limits<double>::infinity(), worst_mass = 0;
  bool decreasing = true;
  for (double th : thetas) {
    const auto St = currents::regularize<1>(S, th, 64, ctx.seed());
    const double m = currents::mass<1>(St);
    const double d = currents::dist_from_pairings<1>(currents::panel_pairings<1>(St), pS, 2.0);
    r.add_numbers({th, m, d});
    worst_mass = std::max(worst_mass, std::abs(m - 1));
    decreasing = decreasing && d < prev;
    prev = d;
  }
  ctx.csv("regularization.csv", r);
  const auto nu = GridMeasure<1>::dirac({1.0, cd(0.3, 0.2)});
  const auto prof = superpot::theta_profile<1>(S, nu, {0.4, 0.2, 0.1, 0.05}, 64, ctx.seed());
  ctx.verdict("regularization", "AC11", worst_mass <= 1e-6 && decreasing && prof.monotone && prof.A >= 0,
              "mass error " + num(worst_mass) + ", dist_2 decreasing " + (decreasing ? "yes" : "no") + ", profile A " + num(prof.A));
  json s = {{"slopes", slopes}, {"regularization_mass_error", worst_mass}, {"profile_A", prof.A}};

  if (f.opt<bool>("lelong", true)) {
    const std::vector<double> radii{0.2, 0.1, 0.05, 0.025};
    const auto L = Current11<2>::hyperplane({0.0, 1.0, -1.0});
    const double on = currents::lelong_number<2>(L, {1.0, 0.5, 0.5}, radii).value;
    const double off = currents::lelong_number<2>(L, {1.0, 0.5, -0.5}, radii).value;
    const cd c(0.2, 0.1);
    const auto atom = Current11<1>::from_function(
        [c](const HPoint<1>& z) { return 0.5 * std::log(std::abs(z[1] - c * z[0]) / norm<1>(z)); }, "log-atom");
    const double half = currents::lelong_number<1>(atom, {1.0, c}, radii).value;
    io::CsvTable l;
    l.schema = "lelong";
    l.columns = {"case", "value", "expected"};
    l.add({"line-on", io::format_number(on), "1"});
    l.add({"line-off", io::format_number(off), "0"});
    l.add({"half-log-atom", io::format_number(half), "0.5"});
    ctx.csv("lelong.csv", l);
    ctx.verdict("lelong", "AC5", std::abs(on - 1) <= 0.05 && std::abs(off) <= 0.02 && std::abs(half - 0.5) <= 0.02,
                "line " + num(on) + ", off-line " + num(off) + ", half atom " + num(half));
    s["lelong"] = {{"on_line", on}, {"off_line", off}, {"half_atom", half}};
  }
  ctx.summary() = s;
}

// ---------------------------------------------------------------------------

inline void degrees(const Fields& f, RunContext& ctx) {
  f.only({"kind", "map", "iterations", "expect_topological_degree", "seed", "output"});
  const auto m = read_map(f);
  const int N = f.opt<int>("iterations", 4);
  if (N < 1) throw ConfigError("field 'iterations': must be positive");
  const int k = m.k(), d = m.degree();
  const bool holomorphic = k == 1 || polymap::indeterminacy_points(m, ctx.seed()).empty();
  std::vector<polymap::DegreeTable> tables;
  io::CsvTable t;
  t.schema = "dynamical-degrees";
  t.columns = {"p", "n", "lambda", "root", "method"};
  bool powers = true;
  for (int p : k == 1 ? std::vector<int>{1} : std::vector<int>{1, k}) {
    const auto tab = polymap::dynamical_degree_estimate(m, p, p == k && k > 1 ? std::min(N, 3) : N);
    for (const auto& r : tab.rows) {
      t.add({std::to_string(r.p), std::to_string(r.n), std::to_string(r.lambda), io::format_number(r.root), r.method});
      long long want = 1;
      for (int i = 0; i < p * r.n; ++i) want *= d;
      powers = powers && r.lambda == want;
    }
    tables.push_back(tab);
  }
  ctx.csv("degrees.csv", t);
  if (holomorphic) ctx.verdict("holomorphic-powers", "AC9", powers, "lambda_p(f^n) = d^(pn) for every row");
  else ctx.skip("holomorphic-powers", "AC9", "map has indeterminacy points");
  bool sub = true;
  for (const auto& tab : tables) sub = sub && polymap::submultiplicative(tab);
  ctx.verdict("submultiplicative", "AC9", sub, "lambda_p(f^(m+n)) <= lambda_p(f^m) lambda_p(f^n)");
  if (tables.size() == 2) ctx.verdict("log-concave", "AC9", polymap::log_concave(tables[0], tables[1]), "lambda_1^2 >= lambda_2");
  const int top = polymap::topological_degree(m);
  json s = {{"k", k}, {"degree", d}, {"holomorphic", holomorphic}, {"topological_degree", top}};
  if (f.has("expect_topological_degree")) {
    const int want = f.req<int>("expect_topological_degree");
    ctx.verdict("topological-degree", "AC9", top == want, "counted " + std::to_string(top) + ", expected " + std::to_string(want));
  }
  ctx.summary() = s;
}

}  // namespace detail

inline const std::vector<KindInfo>& catalog() {
  static const std::vector<KindInfo> kinds = {
      {"green-endo", "Green current of a holomorphic endomorphism of P^1 or P^2", {"map", "grid"},
       {"iterations=30"}, {"AC1", "AC2"}, detail::green_endo},
      {"equidist-endo", "decay of dist_alpha(L^n S0, T) and its log-linear fit", {"map", "S0", "grid"},
       {"N=12", "alpha=1"}, {"AC8"}, detail::equidist_endo},
      {"henon", "Green functions, equilibrium measure and contraction for a Henon map", {"grid"},
       {"c=-1.1", "a=0.3", "iterations=40", "box=3", "mass=true", "equilibrium=true", "uniqueness"}, {"AC2", "AC10"},
       detail::henon},
      {"wedge", "intersections of random lines and the torus Monge-Ampere window", {"grid"},
       {"random_pairs=5", "torus"}, {"AC6", "AC7"}, detail::wedge},
      {"capacity", "capacity probes and super-potential symmetry on P^1", {},
       {"witnesses=[10,20,40,80,160]", "smooth_steps=4", "symmetry_pairs=20"}, {"AC12", "AC3"}, detail::capacity},
      {"distance-scaling", "Dirac distance slopes, regularization laws and Lelong numbers", {},
       {"alphas=[0.5,1,2]", "separations=6", "thetas=[0.2,0.1,0.05]", "lelong=true"}, {"AC4", "AC11", "AC5"},
       detail::distance_scaling},
      {"degrees", "dynamical and topological degrees of a rational map", {"map"},
       {"iterations=4", "expect_topological_degree"}, {"AC9"}, detail::degrees},
  };
  return kinds;
}

inline std::string catalog_text() {
  std::string s;
  for (const auto& k : catalog()) {
    s += k.name + "\n  " + k.summary + "\n  required:";
    if (k.required.empty()) s += " (none)";
    for (const auto& r : k.required) s += " " + r;
    s += "\n  optional:";
    for (const auto& o : k.optional) s += " " + o;
    s += "\n  reproduces:";
    for (const auto& c : k.criteria) s += " " + c;
    s += "\n";
  }
  return s;
}

}  // namespace spc::cli
