#pragma once

// Shared vocabulary: complex points, error types, deterministic data-parallel loops.

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace spc {

using cd = std::complex<double>;

inline constexpr double kPi = std::numbers::pi;

/// Homogeneous coordinates of a point of P^K (not necessarily normalized).
template <int K>
using HPoint = std::array<cd, K + 1>;

/// Affine coordinates in one standard chart of P^K.
template <int K>
using ChartPoint = std::array<cd, K>;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

/// Raised when a grid or quadrature is too coarse for the requested quantity.
class ResolutionError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& msg, std::size_t pos)
      : Error(msg + " at position " + std::to_string(pos)), position_(pos) {}
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

class DegenerateMapError : public Error {
 public:
  using Error::Error;
};

class NotWedgeableError : public Error {
 public:
  NotWedgeableError(const std::string& msg, double integrability)
      : Error(msg), integrability_(integrability) {}
  double integrability() const { return integrability_; }

 private:
  double integrability_;
};

class BudgetExceeded : public Error {
 public:
  using Error::Error;
};

template <int K>
double norm2(const HPoint<K>& z) {
  double s = 0;
  for (const auto& c : z) s += std::norm(c);
  return s;
}

template <int K>
double norm(const HPoint<K>& z) {
  return std::sqrt(norm2<K>(z));
}

template <int K>
HPoint<K> lift(const ChartPoint<K>& x, int chart) {
  HPoint<K> z{};
  int j = 0;
  for (int i = 0; i <= K; ++i) z[i] = (i == chart) ? cd(1.0, 0.0) : x[j++];
  return z;
}

/// Index of the coordinate of largest modulus; the best-conditioned chart.
template <int K>
int best_chart(const HPoint<K>& z) {
  int best = 0;
  for (int i = 1; i <= K; ++i)
    if (std::abs(z[i]) > std::abs(z[best])) best = i;
  return best;
}

template <int K>
ChartPoint<K> to_chart(const HPoint<K>& z, int chart) {
  ChartPoint<K> x{};
  int j = 0;
  for (int i = 0; i <= K; ++i)
    if (i != chart) x[j++] = z[i] / z[chart];
  return x;
}

// ---------------------------------------------------------------------------
// Threading. Work is split into fixed-size chunks whose boundaries do not
// depend on the number of threads, so chunked reductions are reproducible.

inline std::atomic<int>& thread_count() {
  static std::atomic<int> n{1};
  return n;
}

inline void set_threads(int n) { thread_count() = std::max(1, n); }

inline constexpr std::size_t kChunk = 4096;

template <class Fn>
void parallel_chunks(std::size_t n, Fn&& fn) {
  const std::size_t chunks = (n + kChunk - 1) / kChunk;
  const int nt = std::min<int>(thread_count(), static_cast<int>(std::max<std::size_t>(chunks, 1)));
  if (nt <= 1) {
    for (std::size_t c = 0; c < chunks; ++c) fn(c, c * kChunk, std::min(n, (c + 1) * kChunk));
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(nt);
  for (int t = 0; t < nt; ++t) {
    pool.emplace_back([&] {
      for (std::size_t c; (c = next.fetch_add(1)) < chunks;)
        fn(c, c * kChunk, std::min(n, (c + 1) * kChunk));
    });
  }
  for (auto& th : pool) th.join();
}

template <class Fn>
void parallel_for(std::size_t n, Fn&& fn) {
  parallel_chunks(n, [&](std::size_t, std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) fn(i);
  });
}

/// Sum of fn(i) over [0, n); chunk partials are added in chunk order.
template <class Fn>
double parallel_sum(std::size_t n, Fn&& fn) {
  const std::size_t chunks = (n + kChunk - 1) / kChunk;
  std::vector<double> partial(chunks, 0.0);
  parallel_chunks(n, [&](std::size_t c, std::size_t b, std::size_t e) {
    double s = 0;
    for (std::size_t i = b; i < e; ++i) s += fn(i);
    partial[c] = s;
  });
  // pairwise
  while (partial.size() > 1) {
    std::vector<double> next((partial.size() + 1) / 2);
    for (std::size_t i = 0; i < next.size(); ++i)
      next[i] = partial[2 * i] + (2 * i + 1 < partial.size() ? partial[2 * i + 1] : 0.0);
    partial.swap(next);
  }
  return partial.empty() ? 0.0 : partial[0];
}

/// Floor standing in for -infinity in pairings that diverge.
inline constexpr double kMinusInfinityFloor = -1e6;

}  // namespace spc
