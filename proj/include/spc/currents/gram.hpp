#pragma once

// Gram potentials G_Q(z) = 1/2 log(z*Qz / |z|^2) for Hermitian positive
// semidefinite Q = B*B. The current omega + dd^c G_Q is positive, closed and of
// mass 1; rank one Q gives a hyperplane, full rank a smooth form. The class is
// closed under push-forward by automorphisms, which makes regularization exact
// term by term.

#include <spc/core.hpp>
#include <spc/geom.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <vector>

namespace spc::currents {

namespace detail {

// x^K/K! log x antiderivative family: f with f^(K)(x) = log x, up to
// polynomial terms that the divided difference kills.
inline double gram_f(int K, int order, double x) {
  if (x <= 0) {
    if (K == 1) return order == 0 ? 0.0 : -std::numeric_limits<double>::infinity();
    return order == 2 ? -std::numeric_limits<double>::infinity() : 0.0;
  }
  const double l = std::log(x);
  if (K == 1) return order == 0 ? x * l - x : l;
  switch (order) {
    case 0:
      return 0.5 * x * x * l - 0.75 * x * x;
    case 1:
      return x * l - x;
    default:
      return l;
  }
}

}  // namespace detail

/// Mean of log(z*Qz/|z|^2) against omega^K, from the eigenvalues of Q:
/// K! times the divided difference of f at the eigenvalues, with
/// f(x) = x log x - x (K = 1) or x^2/2 log x - 3x^2/4 (K = 2).
template <int K>
double log_gram_mean(std::array<double, K + 1> q) {
  std::sort(q.begin(), q.end());
  const double top = q[K];
  if (!(top > 0)) throw DomainError("Gram matrix must be nonzero");
  for (auto& v : q) v = std::max(0.0, v / top);  // scale out; adds log(top)
  const double tol = 1e-6;
  double dd;
  if constexpr (K == 1) {
    const double a = q[0], b = q[1];
    if (b - a <= tol) {
      const double m = 0.5 * (a + b);
      dd = std::log(m) - (b - a) * (b - a) / (24 * m * m);
    } else {
      dd = (detail::gram_f(1, 0, b) - detail::gram_f(1, 0, a)) / (b - a);
    }
  } else {
    auto f = [](int o, double x) { return detail::gram_f(2, o, x); };
    const double a = q[0], b = q[1], c = q[2];
    auto d1 = [&](double x, double y) {  // f[x, y]
      return (y - x <= tol) ? f(1, 0.5 * (x + y)) : (f(0, y) - f(0, x)) / (y - x);
    };
    if (c - a <= tol) {
      dd = 0.5 * f(2, (a + b + c) / 3);
    } else if (b - a <= tol) {
      const double m = 0.5 * (a + b);
      dd = (d1(m, c) - f(1, m)) / (c - m);
    } else if (c - b <= tol) {
      const double m = 0.5 * (b + c);
      dd = (f(1, m) - d1(a, m)) / (m - a);
    } else {
      dd = (d1(b, c) - d1(a, b)) / (c - a);
    }
    dd *= 2;
  }
  return dd + std::log(top);
}

template <int K>
using RowFactor = Eigen::Matrix<cd, Eigen::Dynamic, K + 1>;

/// One Gram term of a potential: weight * G_Q with Q = B*B.
template <int K>
struct GramTerm {
  double weight = 1.0;
  RowFactor<K> B;  // r x (K+1), full row rank
  Mat<K> Q;
  double mean = 0;  // mean of G_Q against omega^K

  static GramTerm from_factor(const RowFactor<K>& B, double weight = 1.0) {
    if (B.rows() < 1 || B.rows() > K + 1) throw DomainError("Gram factor must have 1..K+1 rows");
    GramTerm g;
    g.weight = weight;
    g.B = B;
    g.Q = B.adjoint() * B;
    g.Q = 0.5 * (g.Q + g.Q.adjoint()).eval();
    Eigen::SelfAdjointEigenSolver<Mat<K>> es(g.Q, Eigen::EigenvaluesOnly);
    std::array<double, K + 1> q;
    for (int i = 0; i <= K; ++i) q[i] = es.eigenvalues()(i);
    g.mean = 0.5 * log_gram_mean<K>(q);
    return g;
  }

  /// The hyperplane {l . z = 0}.
  static GramTerm hyperplane(const HPoint<K>& l, double weight = 1.0) {
    RowFactor<K> B(1, K + 1);
    for (int i = 0; i <= K; ++i) B(0, i) = l[i];
    return from_factor(B, weight);
  }

  int rank() const { return static_cast<int>(B.rows()); }

  double value(const HPoint<K>& z) const {
    double num = 0;
    for (int r = 0; r < B.rows(); ++r) {
      cd s = 0;
      for (int i = 0; i <= K; ++i) s += B(r, i) * z[i];
      num += std::norm(s);
    }
    return 0.5 * std::log(num / norm2<K>(z));
  }

  /// Push-forward by the automorphism with inverse matrix Ainv.
  GramTerm transported(const Mat<K>& Ainv) const { return from_factor(B * Ainv, weight); }
};

/// Weighted hyperplanes ker(xi* B), xi Fubini-Study distributed on P^{r-1};
/// their average is the current omega + dd^c G_Q.
template <int K>
std::vector<std::pair<HPoint<K>, double>> crofton_hyperplanes(const RowFactor<K>& B, int n_radial,
                                                             int n_angle) {
  const int r = static_cast<int>(B.rows());
  std::vector<std::pair<HPoint<K>, double>> out;
  auto push = [&](const std::vector<cd>& xi, double w) {
    HPoint<K> l{};
    for (int i = 0; i <= K; ++i)
      for (int a = 0; a < r; ++a) l[i] += std::conj(xi[a]) * B(a, i);
    out.emplace_back(l, w);
  };
  if (r == 1) {
    push({cd(1)}, 1.0);
  } else if (r == 2) {
    const auto q = fs_quadrature<1>(n_radial, n_angle);
    for (std::size_t i = 0; i < q.size(); ++i) push({q.points[i][0], q.points[i][1]}, q.weights[i]);
  } else {
    const auto q = fs_quadrature<2>(n_radial, n_angle);
    for (std::size_t i = 0; i < q.size(); ++i)
      push({q.points[i][0], q.points[i][1], q.points[i][2]}, q.weights[i]);
  }
  return out;
}

/// Orthonormal basis (u, v) of the plane {l . z = 0} in C^3.
inline std::pair<HPoint<2>, HPoint<2>> line_basis(const HPoint<2>& l) {
  Eigen::Vector3cd n(std::conj(l[0]), std::conj(l[1]), std::conj(l[2]));
  n.normalize();
  // Start from the coordinate axis least aligned with n.
  int j = 0;
  for (int i = 1; i < 3; ++i)
    if (std::abs(n(i)) < std::abs(n(j))) j = i;
  Eigen::Vector3cd e = Eigen::Vector3cd::Zero();
  e(j) = 1;
  Eigen::Vector3cd u = e - n * n.dot(e);
  u.normalize();
  Eigen::Vector3cd v = e;
  // v = conj(n x u) is orthogonal to both n and u.
  v(0) = std::conj(n(1) * u(2) - n(2) * u(1));
  v(1) = std::conj(n(2) * u(0) - n(0) * u(2));
  v(2) = std::conj(n(0) * u(1) - n(1) * u(0));
  v.normalize();
  return {HPoint<2>{u(0), u(1), u(2)}, HPoint<2>{v(0), v(1), v(2)}};
}

/// Point of P^1 cut out by l . z = 0.
inline HPoint<1> hyperplane_point(const HPoint<1>& l) {
  const double n = norm<1>(l);
  return {l[1] / n, -l[0] / n};
}

/// Trace measure of [l . z = 0] (K = 1: the point; K = 2: arc measure on the line).
template <int K>
void add_hyperplane_trace(PointCloud<K>& cloud, const HPoint<K>& l, double w, const PointCloud<1>& arc) {
  if constexpr (K == 1) {
    (void)arc;
    cloud.add(hyperplane_point(l), w);
  } else {
    const auto [u, v] = line_basis(l);
    for (std::size_t i = 0; i < arc.size(); ++i) {
      const cd s = arc.points[i][0], t = arc.points[i][1];
      cloud.add(HPoint<2>{s * u[0] + t * v[0], s * u[1] + t * v[1], s * u[2] + t * v[2]}, w * arc.weights[i]);
    }
  }
}

}  // namespace spc::currents
