// spc: declarative experiment runner.
//   spc list
//   spc run <config.json> [--out DIR] [--seed N] [--threads N] [--verbose]
// Exit codes: 0 all verdicts pass, 1 some verdict failed, 2 usage or config
// error, 3 internal error.

#include "pipelines.hpp"

#include <CLI11.hpp>
#include <png.h>

#include <Eigen/Core>
#include <boost/version.hpp>

#include <chrono>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <thread>

using namespace spc;
using namespace spc::cli;

namespace {

enum Exit { kPass = 0, kVerdictFail = 1, kConfigError = 2, kInternalError = 3 };

json versions() {
  return {{"spc", kToolVersion},
          {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                        std::to_string(EIGEN_MINOR_VERSION)},
          {"boost", std::to_string(BOOST_VERSION / 100000) + "." + std::to_string(BOOST_VERSION / 100 % 1000)},
          {"libpng", PNG_LIBPNG_VER_STRING},
          {"panel_p1", currents::default_panel<1>().version},
          {"panel_p2", currents::default_panel<2>().version}};
}

json load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read config file " + path);
  try {
    return json::parse(is, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
}

const KindInfo& find_kind(const json& cfg) {
  const Fields f(cfg, "");
  const auto kind = f.req<std::string>("kind");
  for (const auto& k : catalog())
    if (k.name == kind) return k;
  throw ConfigError("field 'kind': unknown experiment kind '" + kind + "' (see 'spc list')");
}

struct RunArgs {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  int threads = 0;
  bool verbose = false;
};

int run(const RunArgs& a) {
  const auto t0 = std::chrono::steady_clock::now();
  json cfg;
  const KindInfo* kind = nullptr;
  std::uint64_t seed = 1;
  fs::path out;
  try {
    cfg = load_config(a.config);
    kind = &find_kind(cfg);
    const Fields top(cfg, "");
    seed = a.seed ? *a.seed : top.opt<std::uint64_t>("seed", 1);
    // Output directory: --out, then SPC_OUT, then the config, then out/<kind>.
    if (!a.out.empty()) out = a.out;
    else if (const char* env = std::getenv("SPC_OUT"); env && *env) out = env;
    else out = top.opt<std::string>("output", "out/" + kind->name);
  } catch (const ConfigError& e) {
    std::cerr << "spc: config error: " << e.what() << '\n';
    return kConfigError;
  }
  // The hashed config is the effective one: seed folded in, output location left out.
  json effective = cfg;
  effective.erase("output");
  effective["seed"] = seed;
  RunContext ctx(out, config_hash(effective), seed, a.verbose);
  ctx.log("kind " + kind->name + ", seed " + std::to_string(seed) + ", output " + out.string());

  int code = kPass;
  std::string status = "ok", error;
  try {
    kind->run(Fields(cfg, ""), ctx);
    ctx.json_file("summary.json", {{"kind", kind->name}, {"config_hash", ctx.hash()}, {"seed", seed}, {"results", ctx.summary()}});
    if (!ctx.all_pass()) code = kVerdictFail;
  } catch (const ConfigError& e) {
    status = "config-error";
    error = e.what();
    code = kConfigError;
  } catch (const ParseError& e) {
    status = "config-error";
    error = e.what();
    code = kConfigError;
  } catch (const std::exception& e) {
    status = "internal-error";
    error = std::string(kind->name) + ": " + e.what();
    code = kInternalError;
  }
  if (code == kConfigError || code == kInternalError) std::cerr << "spc: " << status << ": " << error << '\n';

  json verdicts = json::array();
  for (const auto& v : ctx.verdicts())
    verdicts.push_back({{"check", v.check}, {"criterion", v.criterion}, {"verdict", to_string(v.verdict)}, {"detail", v.detail}});
  auto artifacts = ctx.artifacts();
  artifacts.push_back("manifest.json");
  std::sort(artifacts.begin(), artifacts.end());
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  json manifest = {{"schema", kManifestSchema},
                   {"kind", kind->name},
                   {"config_file", a.config},
                   {"config_hash", ctx.hash()},
                   {"seed", seed},
                   {"versions", versions()},
                   {"wall_time_s", wall},
                   {"status", status},
                   {"artifacts", artifacts},
                   {"verdicts", verdicts},
                   {"passed", code == kPass}};
  if (!error.empty()) manifest["error"] = error;
  std::ofstream(out / "manifest.json", std::ios::binary) << manifest.dump(2) << '\n';

  for (const auto& v : ctx.verdicts())
    std::cout << v.criterion << ' ' << v.check << ": " << to_string(v.verdict) << " (" << v.detail << ")\n";
  std::cout << "manifest: " << (out / "manifest.json").string() << '\n';
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"spc: experiments with positive closed currents and their dynamics"};
  app.require_subcommand(1);
  RunArgs args;
  auto* list = app.add_subcommand("list", "print the experiment kinds, their fields and criteria");
  auto* runc = app.add_subcommand("run", "run one experiment config");
  runc->add_option("config", args.config, "JSON config file")->required();
  runc->add_option("--out", args.out, "output directory (overrides SPC_OUT and the config)");
  runc->add_option("--seed", args.seed, "random seed (overrides the config)");
  runc->add_option("--threads", args.threads, "worker threads, 0 = hardware")->check(CLI::NonNegativeNumber);
  runc->add_flag("--verbose", args.verbose, "log progress to stderr");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kConfigError;
  }
  if (*list) {
    std::cout << catalog_text();
    return 0;
  }
  set_threads(args.threads > 0 ? args.threads : int(std::thread::hardware_concurrency()));
  try {
    return run(args);
  } catch (const std::exception& e) {
    std::cerr << "spc: internal error: " << e.what() << '\n';
    return kInternalError;
  }
}
