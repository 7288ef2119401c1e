#include <gtest/gtest.h>

#include <spc/currents/potential.hpp>
#include <spc/currents/regularize.hpp>
#include <spc/io/binary.hpp>
#include <spc/io/csv.hpp>
#include <spc/io/png.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace spc;
using namespace spc::currents;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
  const auto d = fs::temp_directory_path() / "spc_test_io";
  fs::create_directories(d);
  return d;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST(Csv, RoundTripAndExactNumbers) {
  io::CsvTable t;
  t.schema = "experiment";
  t.version = 2;
  t.columns = {"n", "distance"};
  t.add_numbers({0, 0.1});
  t.add_numbers({1, 1.0 / 3});
  t.add_numbers({2, 6.02e-23});
  std::ostringstream os;
  io::write_csv(os, t, "abc123");
  const std::string text = os.str();
  EXPECT_EQ(text.substr(0, text.find('\n')), "# spc-csv schema=experiment version=2 config=abc123");
  EXPECT_EQ(text.find('\r'), std::string::npos);
  std::istringstream is(text);
  const auto back = io::read_csv(is);
  EXPECT_EQ(back.config_hash, "abc123");
  EXPECT_EQ(back.table.version, 2);
  ASSERT_EQ(back.table.rows.size(), 3u);
  EXPECT_EQ(std::stod(back.table.rows[1][1]), 1.0 / 3);
  EXPECT_EQ(std::stod(back.table.rows[2][1]), 6.02e-23);
  EXPECT_THROW(t.add_numbers({1.0}), DomainError);
}

TEST(Csv, MeasureTableListsAtoms) {
  GridMeasure<1> mu;
  mu.cloud.add({1.0, cd(0.5, 0.5)}, 0.25);
  mu.cloud.add({0.0, 1.0}, 0.75);
  const auto t = io::measure_table<1>(mu);
  ASSERT_EQ(t.columns.size(), 5u);
  ASSERT_EQ(t.rows.size(), 2u);
  EXPECT_EQ(t.rows[1][4], "0.75");
  EXPECT_EQ(t.rows[1][2], "1");
}

TEST(Binary, MeasureAndPanelRoundTrip) {
  auto mu = regularize<1>(GridMeasure<1>::dirac({1.0, cd(0.2, 0.1)}), 0.3);
  Patch<1> p;
  p.grid.n = 8;
  p.grid.radius = 1;
  p.weights.assign(p.grid.size(), 0.01);
  mu.patches.push_back(p);
  const auto& panel = default_panel<2>();
  const auto path = (temp_dir() / "m.spcb").string();
  io::save_container(path, {io::to_section<1>(mu), io::to_section<2>(panel)});
  const auto secs = io::load_container(path);
  ASSERT_EQ(secs.size(), 2u);
  const auto mu2 = io::measure_from_section<1>(secs[0]);
  ASSERT_EQ(mu2.cloud.size(), mu.cloud.size());
  for (std::size_t i = 0; i < mu.cloud.size(); ++i) {
    EXPECT_EQ(mu2.cloud.weights[i], mu.cloud.weights[i]);
    EXPECT_EQ(mu2.cloud.points[i], mu.cloud.points[i]);
  }
  EXPECT_EQ(mu2.mass(), mu.mass());
  const auto panel2 = io::panel_from_section<2>(secs[1]);
  EXPECT_EQ(panel2.version, panel.version);
  ASSERT_EQ(panel2.size(), panel.size());
  EXPECT_EQ(panel2.forms[77].freq, panel.forms[77].freq);
  EXPECT_EQ(panel2.forms[77].s2, panel.forms[77].s2);
  // Wrong kind or dimension is rejected.
  EXPECT_THROW(io::measure_from_section<2>(secs[0]), DomainError);
  EXPECT_THROW(io::panel_from_section<2>(secs[0]), DomainError);
}

TEST(Binary, PotentialKeepsExactTermsAndSamplesFunctions) {
  RowFactor<2> B = RowFactor<2>::Identity(3, 3);
  B(0, 2) = cd(0.3, 0.4);
  auto S = mixture<2>({{0.5, Current11<2>::gram(B)}, {0.5, Current11<2>::hyperplane({1.0, 2.0, cd(0, 1)})}});
  S.u.functions.push_back(make_function<2>([](const HPoint<2>& z) { return std::norm(z[0]) / norm2<2>(z); }, "bump", 0.1));
  S.u.constant = 0.25;
  const auto path = (temp_dir() / "u.spcb").string();
  io::save_container(path, {io::to_section<2>(S.u, 8, 1.0)});
  const auto back = io::potential_from_section<2>(io::load_container(path).at(0));
  EXPECT_EQ(back.exact.gram.size(), 2u);
  EXPECT_EQ(back.exact.constant, 0.25);
  const HPoint<2> z{cd(0.3, 0.1), 1.0, cd(-0.4, 0.9)};
  EXPECT_NEAR(back.exact(z), S.u(z) - S.u.function_part(z), 1e-12);
  EXPECT_NEAR(back.exact.mean(), S.u.mean() - 0.1 * *S.u.functions[0].mean_cache, 1e-12);
  ASSERT_EQ(back.sampled.size(), 1u);
  const auto& t = back.sampled[0];
  EXPECT_EQ(t.label, "bump");
  EXPECT_EQ(t.weight, 0.1);
  ASSERT_EQ(t.grids.size(), 3u);
  const auto& g = t.grids[1];
  EXPECT_EQ(g.chart, 1);
  const std::size_t i = 1234;
  const auto x = g.hnode(i);
  EXPECT_DOUBLE_EQ(t.values[1][i], std::norm(x[0]) / norm2<2>(x));
}

TEST(Binary, RejectsForeignFiles) {
  const auto path = (temp_dir() / "bad.spcb").string();
  std::ofstream(path) << "not a container";
  EXPECT_THROW(io::load_container(path), DomainError);
}

TEST(Png, WritesDeterministicImage) {
  const auto h = io::chart_heatmap_p1([](const HPoint<1>& z) { return std::log(std::abs(z[1] / z[0]) + 1e-3); }, 0, 2.0, 64);
  const auto a = temp_dir() / "a.png", b = temp_dir() / "b.png";
  io::write_png(a.string(), h);
  io::write_png(b.string(), h);
  const auto bytes = slurp(a);
  ASSERT_GT(bytes.size(), 8u);
  EXPECT_EQ(bytes.substr(1, 3), "PNG");
  EXPECT_EQ(bytes, slurp(b));

  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  ASSERT_TRUE(png_image_begin_read_from_file(&img, a.string().c_str()));
  EXPECT_EQ(img.width, 64u);
  EXPECT_EQ(img.height, 64u);
  png_image_free(&img);
}

TEST(Png, ColormapEndpoints) {
  EXPECT_EQ(io::inferno5(0.0), (std::array<unsigned char, 3>{0, 0, 4}));
  EXPECT_EQ(io::inferno5(1.0), (std::array<unsigned char, 3>{252, 255, 164}));
  EXPECT_EQ(io::inferno5(0.5), (std::array<unsigned char, 3>{188, 55, 84}));
  EXPECT_EQ(io::inferno5(-3.0), io::inferno5(0.0));
}
