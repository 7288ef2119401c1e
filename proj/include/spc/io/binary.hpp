#pragma once

// Self-describing binary container for measures, panels and potentials.
//
//   "SPCBIN" u16 version, u32 section count
//   per section: u16 tag length, tag bytes, u8 K, u64 payload bytes, payload
//
// All integers and doubles are little-endian; a complex number is two
// doubles (re, im). Section payloads are listed in docs/formats.md. Function
// terms of a potential cannot be stored exactly and are written as samples on
// chart grids; reading gives them back as SampledTerm values.

#include <spc/core.hpp>
#include <spc/currents/measure.hpp>
#include <spc/currents/panel.hpp>
#include <spc/currents/potential.hpp>
#include <spc/geom.hpp>

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

namespace spc::io {

static_assert(std::endian::native == std::endian::little, "the binary container assumes a little-endian host");

inline constexpr std::uint16_t kBinaryVersion = 1;

class ByteWriter {
 public:
  template <class T>
  void put(T v) {
    static_assert(std::is_trivially_copyable_v<T>);
    const auto* p = reinterpret_cast<const char*>(&v);
    buf_.insert(buf_.end(), p, p + sizeof(T));
  }
  void put_c(cd z) {
    put(z.real());
    put(z.imag());
  }
  void put_str(const std::string& s) {
    put(static_cast<std::uint16_t>(s.size()));
    buf_.insert(buf_.end(), s.begin(), s.end());
  }
  const std::vector<char>& bytes() const { return buf_; }

 private:
  std::vector<char> buf_;
};

class ByteReader {
 public:
  ByteReader(const char* p, std::size_t n) : p_(p), end_(p + n) {}
  template <class T>
  T get() {
    if (std::size_t(end_ - p_) < sizeof(T)) throw DomainError("truncated binary section");
    T v;
    std::memcpy(&v, p_, sizeof(T));
    p_ += sizeof(T);
    return v;
  }
  cd get_c() {
    const double re = get<double>();
    return {re, get<double>()};
  }
  std::string get_str() {
    const auto n = get<std::uint16_t>();
    if (std::size_t(end_ - p_) < n) throw DomainError("truncated binary section");
    std::string s(p_, p_ + n);
    p_ += n;
    return s;
  }
  bool done() const { return p_ == end_; }

 private:
  const char* p_;
  const char* end_;
};

struct Section {
  std::string tag;
  int k = 0;
  std::vector<char> payload;
};

inline void save_container(const std::string& path, const std::vector<Section>& sections) {
  ByteWriter w;
  for (char c : std::string("SPCBIN")) w.put(c);
  w.put(kBinaryVersion);
  w.put(static_cast<std::uint32_t>(sections.size()));
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DomainError("cannot open " + path + " for writing");
  os.write(w.bytes().data(), w.bytes().size());
  for (const auto& s : sections) {
    ByteWriter h;
    h.put_str(s.tag);
    h.put(static_cast<std::uint8_t>(s.k));
    h.put(static_cast<std::uint64_t>(s.payload.size()));
    os.write(h.bytes().data(), h.bytes().size());
    os.write(s.payload.data(), s.payload.size());
  }
}

inline std::vector<Section> load_container(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DomainError("cannot open " + path);
  const std::vector<char> all((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  ByteReader r(all.data(), all.size());
  std::string magic;
  for (int i = 0; i < 6; ++i) magic += r.get<char>();
  if (magic != "SPCBIN") throw DomainError(path + " is not an spc binary container");
  if (r.get<std::uint16_t>() != kBinaryVersion) throw DomainError("unsupported container version");
  const auto count = r.get<std::uint32_t>();
  std::vector<Section> out;
  std::size_t offset = 6 + 2 + 4;
  for (std::uint32_t i = 0; i < count; ++i) {
    ByteReader h(all.data() + offset, all.size() - offset);
    Section s;
    s.tag = h.get_str();
    s.k = h.get<std::uint8_t>();
    const auto n = h.get<std::uint64_t>();
    offset += 2 + s.tag.size() + 1 + 8;
    if (all.size() - offset < n) throw DomainError("truncated container");
    s.payload.assign(all.begin() + offset, all.begin() + offset + n);
    offset += n;
    out.push_back(std::move(s));
  }
  return out;
}

namespace detail {

template <int K>
void put_grid(ByteWriter& w, const ChartGrid<K>& g) {
  w.put(static_cast<std::int32_t>(g.chart));
  for (const auto& c : g.center) w.put_c(c);
  w.put(g.radius);
  w.put(static_cast<std::int32_t>(g.n));
}

template <int K>
ChartGrid<K> get_grid(ByteReader& r) {
  ChartGrid<K> g;
  g.chart = r.get<std::int32_t>();
  for (auto& c : g.center) c = r.get_c();
  g.radius = r.get<double>();
  g.n = r.get<std::int32_t>();
  g.validate();
  return g;
}

inline void check_tag(const Section& s, const char* tag, int k) {
  if (s.tag != tag) throw DomainError("expected a '" + std::string(tag) + "' section, found '" + s.tag + "'");
  if (s.k != k) throw DomainError("section dimension mismatch");
}

}  // namespace detail

template <int K>
Section to_section(const currents::GridMeasure<K>& mu) {
  ByteWriter w;
  w.put(static_cast<std::uint64_t>(mu.cloud.size()));
  for (std::size_t i = 0; i < mu.cloud.size(); ++i) {
    for (const auto& z : mu.cloud.points[i]) w.put_c(z);
    w.put(mu.cloud.weights[i]);
  }
  w.put(static_cast<std::uint32_t>(mu.patches.size()));
  for (const auto& p : mu.patches) {
    detail::put_grid<K>(w, p.grid);
    for (double v : p.weights) w.put(v);
  }
  return {"measure", K, w.bytes()};
}

template <int K>
currents::GridMeasure<K> measure_from_section(const Section& s) {
  detail::check_tag(s, "measure", K);
  ByteReader r(s.payload.data(), s.payload.size());
  currents::GridMeasure<K> mu;
  const auto n = r.get<std::uint64_t>();
  for (std::uint64_t i = 0; i < n; ++i) {
    HPoint<K> z;
    for (auto& c : z) c = r.get_c();
    mu.cloud.add(z, r.get<double>());
  }
  const auto np = r.get<std::uint32_t>();
  for (std::uint32_t i = 0; i < np; ++i) {
    currents::Patch<K> p;
    p.grid = detail::get_grid<K>(r);
    p.weights.resize(p.grid.size());
    for (auto& v : p.weights) v = r.get<double>();
    mu.patches.push_back(std::move(p));
  }
  return mu;
}

template <int K>
Section to_section(const currents::Panel<K>& panel) {
  ByteWriter w;
  w.put_str(panel.version);
  w.put(static_cast<std::uint32_t>(panel.size()));
  for (const auto& f : panel.forms) {
    w.put(static_cast<std::int32_t>(f.chart));
    for (double c : f.center) w.put(c);
    for (double c : f.freq) w.put(c);
    w.put(f.phase);
    w.put(f.radius);
    w.put(f.s0);
    w.put(f.s1);
    w.put(f.s2);
  }
  return {"panel", K, w.bytes()};
}

template <int K>
currents::Panel<K> panel_from_section(const Section& s) {
  detail::check_tag(s, "panel", K);
  ByteReader r(s.payload.data(), s.payload.size());
  currents::Panel<K> p;
  p.version = r.get_str();
  const auto n = r.get<std::uint32_t>();
  for (std::uint32_t i = 0; i < n; ++i) {
    currents::PanelForm<K> f;
    f.chart = r.get<std::int32_t>();
    for (auto& c : f.center) c = r.get<double>();
    for (auto& c : f.freq) c = r.get<double>();
    f.phase = r.get<double>();
    f.radius = r.get<double>();
    f.s0 = r.get<double>();
    f.s1 = r.get<double>();
    f.s2 = r.get<double>();
    p.forms.push_back(f);
  }
  return p;
}

/// A function term stored as samples of fn (unweighted) on chart grids.
template <int K>
struct SampledTerm {
  std::string label;
  double weight = 1;
  std::vector<ChartGrid<K>> grids;
  std::vector<std::vector<double>> values;
};

template <int K>
struct StoredPotential {
  currents::QuasiPotential<K> exact;  // constant, Gram and divisor terms
  std::vector<SampledTerm<K>> sampled;
};

/// Function terms are sampled on one grid per chart, `n` nodes per real axis
/// over the window of the given radius.
template <int K>
Section to_section(const currents::QuasiPotential<K>& u, int n = K == 1 ? 128 : 16, double radius = 1.5) {
  ByteWriter w;
  w.put(u.constant);
  w.put(static_cast<std::uint32_t>(u.gram.size()));
  for (const auto& g : u.gram) {
    w.put(g.weight);
    w.put(static_cast<std::int32_t>(g.B.rows()));
    for (int i = 0; i < g.B.rows(); ++i)
      for (int j = 0; j <= K; ++j) w.put_c(g.B(i, j));
  }
  w.put(static_cast<std::uint32_t>(u.divisors.size()));
  for (const auto& d : u.divisors) {
    w.put(d.weight);
    w.put(static_cast<std::int32_t>(d.P.degree));
    w.put(static_cast<std::uint32_t>(d.P.terms.size()));
    for (const auto& t : d.P.terms) {
      w.put_c(t.coef);
      for (int e : t.exp) w.put(static_cast<std::int32_t>(e));
    }
    for (int i = 0; i <= K; ++i)
      for (int j = 0; j <= K; ++j) w.put_c(d.M(i, j));
  }
  w.put(static_cast<std::uint32_t>(u.functions.size()));
  for (const auto& f : u.functions) {
    w.put_str(f.label);
    w.put(f.weight);
    w.put(static_cast<std::uint32_t>(K + 1));
    for (int chart = 0; chart <= K; ++chart) {
      ChartGrid<K> g;
      g.chart = chart;
      g.n = n;
      g.radius = radius;
      detail::put_grid<K>(w, g);
      std::vector<double> vals(g.size());
      parallel_for(g.size(), [&](std::size_t i) { vals[i] = f.fn(g.hnode(i)); });
      for (double v : vals) w.put(v);
    }
  }
  return {"potential", K, w.bytes()};
}

template <int K>
StoredPotential<K> potential_from_section(const Section& s) {
  detail::check_tag(s, "potential", K);
  ByteReader r(s.payload.data(), s.payload.size());
  StoredPotential<K> out;
  out.exact.constant = r.get<double>();
  const auto ng = r.get<std::uint32_t>();
  for (std::uint32_t k = 0; k < ng; ++k) {
    const double weight = r.get<double>();
    const int rows = r.get<std::int32_t>();
    currents::RowFactor<K> B(rows, K + 1);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j <= K; ++j) B(i, j) = r.get_c();
    out.exact.gram.push_back(currents::GramTerm<K>::from_factor(B, weight));
  }
  const auto nd = r.get<std::uint32_t>();
  for (std::uint32_t k = 0; k < nd; ++k) {
    const double weight = r.get<double>();
    currents::FlatPoly<K> P;
    P.degree = r.get<std::int32_t>();
    const auto nt = r.get<std::uint32_t>();
    for (std::uint32_t t = 0; t < nt; ++t) {
      typename currents::FlatPoly<K>::Term term;
      term.coef = r.get_c();
      for (auto& e : term.exp) e = r.get<std::int32_t>();
      P.terms.push_back(term);
    }
    Mat<K> M;
    for (int i = 0; i <= K; ++i)
      for (int j = 0; j <= K; ++j) M(i, j) = r.get_c();
    out.exact.divisors.push_back(currents::make_divisor<K>(P, weight, M));
  }
  const auto nf = r.get<std::uint32_t>();
  for (std::uint32_t k = 0; k < nf; ++k) {
    SampledTerm<K> t;
    t.label = r.get_str();
    t.weight = r.get<double>();
    const auto ngr = r.get<std::uint32_t>();
    for (std::uint32_t j = 0; j < ngr; ++j) {
      t.grids.push_back(detail::get_grid<K>(r));
      std::vector<double> v(t.grids.back().size());
      for (auto& x : v) x = r.get<double>();
      t.values.push_back(std::move(v));
    }
    out.sampled.push_back(std::move(t));
  }
  if (!r.done()) throw DomainError("trailing bytes in potential section");
  return out;
}

}  // namespace spc::io
