#pragma once

// Config access with field-level errors, the config hash, and the per-run
// context that collects artifacts and verdicts.

#include <spc/core.hpp>
#include <spc/io/csv.hpp>
#include <spc/io/png.hpp>

#include <json.hpp>
#include <openssl/evp.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

namespace spc::cli {

using json = nlohmann::json;
namespace fs = std::filesystem;

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr int kManifestSchema = 1;

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Reads fields of one JSON object, reporting the dotted path on errors.
class Fields {
 public:
  Fields(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(where() + ": expected an object");
  }

  bool has(const std::string& k) const { return j_.contains(k); }

  template <class T>
  T req(const std::string& k) const {
    if (!j_.contains(k)) throw ConfigError("missing required field '" + name(k) + "'");
    return get<T>(k);
  }

  template <class T>
  T opt(const std::string& k, T fallback) const {
    return j_.contains(k) ? get<T>(k) : fallback;
  }

  Fields sub(const std::string& k) const {
    if (!j_.contains(k)) throw ConfigError("missing required field '" + name(k) + "'");
    return Fields(j_.at(k), name(k));
  }

  const json& raw(const std::string& k) const {
    if (!j_.contains(k)) throw ConfigError("missing required field '" + name(k) + "'");
    return j_.at(k);
  }

  /// Rejects keys outside `allowed`.
  void only(const std::set<std::string>& allowed) const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!allowed.count(it.key())) throw ConfigError("unknown field '" + name(it.key()) + "'");
  }

  std::string name(const std::string& k) const { return path_.empty() ? k : path_ + "." + k; }

  cd complex(const std::string& k) const { return to_complex(raw(k), name(k)); }

  static cd to_complex(const json& v, const std::string& where) {
    if (v.is_number()) return {v.get<double>(), 0.0};
    if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number()) return {v[0].get<double>(), v[1].get<double>()};
    throw ConfigError("field '" + where + "': expected a number or [re, im]");
  }

  template <int K>
  HPoint<K> point(const std::string& k) const {
    const auto& v = raw(k);
    if (!v.is_array() || v.size() != K + 1) throw ConfigError("field '" + name(k) + "': expected " + std::to_string(K + 1) + " homogeneous coordinates");
    HPoint<K> z;
    for (int i = 0; i <= K; ++i) z[i] = to_complex(v[i], name(k) + "[" + std::to_string(i) + "]");
    if (norm<K>(z) == 0) throw ConfigError("field '" + name(k) + "': the zero vector is not a point");
    return z;
  }

 private:
  template <class T>
  T get(const std::string& k) const {
    try {
      return j_.at(k).get<T>();
    } catch (const json::exception&) {
      throw ConfigError("field '" + name(k) + "': wrong type");
    }
  }
  std::string where() const { return path_.empty() ? "config" : "field '" + path_ + "'"; }

  const json& j_;
  std::string path_;
};

inline std::string sha256_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr);
  static const char* hex = "0123456789abcdef";
  std::string s;
  for (unsigned i = 0; i < len; ++i) {
    s += hex[md[i] >> 4];
    s += hex[md[i] & 15];
  }
  return s;
}

/// Hash of the effective config (keys sorted, compact form).
inline std::string config_hash(const json& cfg) { return sha256_hex(cfg.dump()); }

enum class Verdict { pass, fail, skipped };

inline const char* to_string(Verdict v) {
  return v == Verdict::pass ? "pass" : v == Verdict::fail ? "fail" : "skipped";
}

struct VerdictEntry {
  std::string check;
  std::string criterion;  // acceptance criterion ID, e.g. "AC2"
  Verdict verdict = Verdict::skipped;
  std::string detail;
};

class RunContext {
 public:
  RunContext(fs::path out, std::string hash, std::uint64_t seed, bool verbose)
      : out_(std::move(out)), hash_(std::move(hash)), seed_(seed), verbose_(verbose) {
    fs::create_directories(out_);
  }

  const fs::path& out() const { return out_; }
  const std::string& hash() const { return hash_; }
  std::uint64_t seed() const { return seed_; }
  json& summary() { return summary_; }

  void log(const std::string& msg) const {
    if (verbose_) std::fprintf(stderr, "[spc] %s\n", msg.c_str());
  }

  void csv(const std::string& name, const io::CsvTable& t) {
    io::write_csv((out_ / name).string(), t, hash_);
    artifacts_.push_back(name);
    log("wrote " + name);
  }

  void png(const std::string& name, const io::Heatmap& h, double lo = 0, double hi = 0) {
    io::write_png((out_ / name).string(), h, lo, hi);
    artifacts_.push_back(name);
    log("wrote " + name);
  }

  void json_file(const std::string& name, const json& j) {
    std::ofstream os(out_ / name, std::ios::binary);
    os << j.dump(2) << '\n';
    artifacts_.push_back(name);
  }

  void verdict(const std::string& check, const std::string& criterion, bool ok, const std::string& detail) {
    verdicts_.push_back({check, criterion, ok ? Verdict::pass : Verdict::fail, detail});
    log(check + ": " + (ok ? "pass" : "fail") + " (" + detail + ")");
  }

  void skip(const std::string& check, const std::string& criterion, const std::string& reason) {
    verdicts_.push_back({check, criterion, Verdict::skipped, reason});
    log(check + ": skipped (" + reason + ")");
  }

  const std::vector<VerdictEntry>& verdicts() const { return verdicts_; }
  const std::vector<std::string>& artifacts() const { return artifacts_; }

  bool all_pass() const {
    for (const auto& v : verdicts_)
      if (v.verdict == Verdict::fail) return false;
    return true;
  }

 private:
  fs::path out_;
  std::string hash_;
  std::uint64_t seed_;
  bool verbose_;
  json summary_ = json::object();
  std::vector<std::string> artifacts_;
  std::vector<VerdictEntry> verdicts_;
};

}  // namespace spc::cli
