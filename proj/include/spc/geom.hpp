#pragma once

// Projective geometry of P^1 and P^2: normalized points, Fubini-Study density
// and distance, chart grids, quadrature for the Fubini-Study volume, and
// automorphisms near the identity.

#include <spc/core.hpp>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <random>
#include <vector>

namespace spc {

/// Unit representative whose first nonzero coordinate is real positive.
template <int K>
HPoint<K> normalize(HPoint<K> z) {
  const double n = norm<K>(z);
  if (!(n > 0) || !std::isfinite(n)) throw DomainError("zero or non-finite homogeneous vector");
  for (auto& c : z) c /= n;
  for (const auto& c : z) {
    if (std::abs(c) > 1e-300) {
      const cd phase = std::conj(c) / std::abs(c);
      for (auto& e : z) e *= phase;
      break;
    }
  }
  return z;
}

template <int K>
cd hermitian_dot(const HPoint<K>& a, const HPoint<K>& b) {
  cd s = 0;
  for (int i = 0; i <= K; ++i) s += std::conj(a[i]) * b[i];
  return s;
}

/// Density of the Fubini-Study volume form omega^K (total mass 1) against
/// Lebesgue measure in an affine chart.
template <int K>
double fs_density(const ChartPoint<K>& x) {
  double r2 = 0;
  for (const auto& c : x) r2 += std::norm(c);
  if constexpr (K == 1)
    return 1.0 / (kPi * (1 + r2) * (1 + r2));
  else
    return 2.0 / (kPi * kPi * (1 + r2) * (1 + r2) * (1 + r2));
}

/// Fubini-Study geodesic distance: angle between the complex lines, in [0, pi/2].
template <int K>
double fs_distance(const HPoint<K>& p, const HPoint<K>& q) {
  const double np = norm<K>(p), nq = norm<K>(q);
  const cd ip = hermitian_dot<K>(p, q) / (np * nq);
  double perp = 0;
  for (int i = 0; i <= K; ++i) perp += std::norm(q[i] / nq - ip * (p[i] / np));
  return std::atan2(std::sqrt(perp), std::abs(ip));
}

// ---------------------------------------------------------------------------

/// Cell-centred grid on a cube of an affine chart: n nodes per real axis,
/// 2K real axes, axis order (Re x1, Im x1, Re x2, Im x2), axis 0 fastest.
template <int K>
struct ChartGrid {
  int chart = 0;
  ChartPoint<K> center{};
  double radius = 4.0;
  int n = 64;

  static constexpr int kAxes = 2 * K;

  void validate() const {
    if (n < 8) throw DomainError("chart grid resolution must be at least 8");
    if (!(radius > 0)) throw DomainError("chart grid radius must be positive");
    if (chart < 0 || chart > K) throw DomainError("chart index out of range");
  }

  double h() const { return 2 * radius / n; }
  double cell_volume() const { return std::pow(h(), kAxes); }
  std::size_t size() const {
    std::size_t s = 1;
    for (int a = 0; a < kAxes; ++a) s *= static_cast<std::size_t>(n);
    return s;
  }
  double coord(int i) const { return -radius + (i + 0.5) * h(); }

  std::array<int, 2 * K> multi_index(std::size_t idx) const {
    std::array<int, 2 * K> m{};
    for (int a = 0; a < kAxes; ++a) {
      m[a] = static_cast<int>(idx % n);
      idx /= n;
    }
    return m;
  }
  std::size_t index(const std::array<int, 2 * K>& m) const {
    std::size_t idx = 0;
    for (int a = kAxes - 1; a >= 0; --a) idx = idx * n + m[a];
    return idx;
  }
  ChartPoint<K> node(const std::array<int, 2 * K>& m) const {
    ChartPoint<K> x;
    for (int j = 0; j < K; ++j) x[j] = center[j] + cd(coord(m[2 * j]), coord(m[2 * j + 1]));
    return x;
  }
  ChartPoint<K> node(std::size_t idx) const { return node(multi_index(idx)); }
  HPoint<K> hnode(std::size_t idx) const { return lift<K>(node(idx), chart); }
};

// ---------------------------------------------------------------------------
// Quadrature.

/// Gauss-Legendre nodes and weights on [0, 1] (Golub-Welsch).
inline void gauss_legendre01(int n, std::vector<double>& x, std::vector<double>& w) {
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int i = 1; i < n; ++i) {
    const double b = i / std::sqrt(4.0 * i * i - 1.0);
    J(i, i - 1) = J(i - 1, i) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  x.resize(n);
  w.resize(n);
  for (int i = 0; i < n; ++i) {
    x[i] = 0.5 * (es.eigenvalues()(i) + 1.0);
    const double v = es.eigenvectors()(0, i);
    w[i] = v * v;  // weights on [-1,1] are 2 v^2; halved for [0,1]
  }
}

/// Weighted nodes on P^K (unit vectors) integrating against omega^K.
template <int K>
struct PointCloud {
  std::vector<HPoint<K>> points;
  std::vector<double> weights;

  std::size_t size() const { return points.size(); }
  double total() const {
    double s = 0;
    for (double w : weights) s += w;
    return s;
  }
  void add(const HPoint<K>& p, double w) {
    points.push_back(p);
    weights.push_back(w);
  }
  void append(const PointCloud& o, double scale = 1.0) {
    for (std::size_t i = 0; i < o.size(); ++i) add(o.points[i], o.weights[i] * scale);
  }
  template <class Fn>
  double integrate(Fn&& fn) const {
    return parallel_sum(points.size(), [&](std::size_t i) { return weights[i] * fn(points[i]); });
  }
};

/// Product rule in moment-map coordinates: |z_j|^2 / |z|^2 is uniform on the
/// simplex and the phases are uniform, so omega^K factors.
template <int K>
PointCloud<K> fs_quadrature(int n_radial, int n_angle) {
  std::vector<double> x, w;
  gauss_legendre01(n_radial, x, w);
  PointCloud<K> q;
  if constexpr (K == 1) {
    for (int i = 0; i < n_radial; ++i)
      for (int a = 0; a < n_angle; ++a) {
        const double t = x[i];
        const double phi = 2 * kPi * (a + 0.5) / n_angle;
        q.add({cd(std::sqrt(1 - t), 0), std::polar(std::sqrt(t), phi)}, w[i] / n_angle);
      }
  } else {
    for (int i = 0; i < n_radial; ++i)
      for (int j = 0; j < n_radial; ++j) {
        const double u = x[i], v = x[j];
        const double t1 = u, t2 = (1 - u) * v, t0 = std::max(0.0, 1 - t1 - t2);
        const double wt = 2 * (1 - u) * w[i] * w[j];
        for (int a = 0; a < n_angle; ++a)
          for (int b = 0; b < n_angle; ++b) {
            const double p1 = 2 * kPi * (a + 0.5) / n_angle;
            const double p2 = 2 * kPi * (b + 0.25) / n_angle;
            q.add({cd(std::sqrt(t0), 0), std::polar(std::sqrt(t1), p1), std::polar(std::sqrt(t2), p2)},
                  wt / (n_angle * n_angle));
          }
      }
  }
  return q;
}

// ---------------------------------------------------------------------------
// Automorphisms.

template <int K>
using Mat = Eigen::Matrix<cd, K + 1, K + 1>;

/// Real dimension of the parameter space sl(K+1, C).
template <int K>
constexpr int param_dim() {
  return 2 * ((K + 1) * (K + 1) - 1);
}

/// C-linear isometry from C^{(K+1)^2-1} (as real pairs) onto traceless
/// matrices with the Frobenius norm, so |y| is the Frobenius norm of Y(y).
template <int K>
Mat<K> lie_element(const std::vector<double>& y) {
  Mat<K> Y = Mat<K>::Zero();
  int j = 0;
  auto coef = [&]() {
    const cd c(y[2 * j], y[2 * j + 1]);
    ++j;
    return c;
  };
  for (int a = 0; a <= K; ++a)
    for (int b = 0; b <= K; ++b)
      if (a != b) Y(a, b) = coef();
  // Orthonormal traceless diagonal basis.
  for (int m = 1; m <= K; ++m) {
    const cd c = coef();
    const double s = 1.0 / std::sqrt(double(m) * (m + 1));
    for (int a = 0; a < m; ++a) Y(a, a) += c * s;
    Y(m, m) -= c * (m * s);
  }
  return Y;
}

template <int K>
struct Automorphism {
  Mat<K> matrix = Mat<K>::Identity();
  Mat<K> inverse = Mat<K>::Identity();
  std::vector<double> y = std::vector<double>(param_dim<K>(), 0.0);

  static Automorphism from_matrix(const Mat<K>& A) {
    Eigen::PartialPivLU<Mat<K>> lu(A);
    const cd det = lu.determinant();
    if (!(std::abs(det) > 1e-300) || !std::isfinite(std::abs(det)))
      throw DomainError("singular matrix is not an automorphism");
    Automorphism t;
    const cd scale = std::pow(det, -1.0 / (K + 1));
    t.matrix = A * scale;
    t.inverse = t.matrix.inverse();
    t.y.assign(param_dim<K>(), std::numeric_limits<double>::quiet_NaN());
    return t;
  }

  static Automorphism from_parameters(const std::vector<double>& y, cd theta) {
    Automorphism t;
    t.y = y;
    if (theta == cd(0)) return t;
    const Mat<K> Y = lie_element<K>(y) * theta;
    t.matrix = Y.exp();
    t.inverse = (-Y).exp();
    return t;
  }

  HPoint<K> apply(const HPoint<K>& z) const { return mul(matrix, z); }
  HPoint<K> apply_inverse(const HPoint<K>& z) const { return mul(inverse, z); }

  bool is_identity(double tol = 1e-14) const { return (matrix - Mat<K>::Identity()).norm() <= tol; }

  static HPoint<K> mul(const Mat<K>& A, const HPoint<K>& z) {
    HPoint<K> r{};
    for (int i = 0; i <= K; ++i)
      for (int j = 0; j <= K; ++j) r[i] += A(i, j) * z[j];
    return r;
  }
};

/// Radial bump profile of the parameter density, supported in |y| < 1.
inline double bump_profile(double r) { return r < 1 ? std::exp(-1.0 / (1 - r * r)) : 0.0; }

/// Draws y from the density proportional to bump_profile(|y|) on R^D.
template <int K>
std::vector<double> sample_parameter(std::mt19937_64& rng) {
  constexpr int D = param_dim<K>();
  std::uniform_real_distribution<double> U(0.0, 1.0);
  // Radial law: r^(D-1) bump(r) on [0,1), rejection from uniform.
  static const double fmax = [] {
    double m = 0;
    for (int i = 1; i < 4000; ++i) {
      const double r = i / 4000.0;
      m = std::max(m, std::pow(r, D - 1) * bump_profile(r));
    }
    return m * 1.01;
  }();
  double r;
  for (;;) {
    r = U(rng);
    if (U(rng) * fmax <= std::pow(r, D - 1) * bump_profile(r)) break;
  }
  std::normal_distribution<double> N;
  std::vector<double> y(D);
  double s = 0;
  for (auto& v : y) {
    v = N(rng);
    s += v * v;
  }
  s = std::sqrt(s);
  for (auto& v : y) v *= r / s;
  return y;
}

/// tau_{theta y} with y drawn from the bump density; theta = 0 gives the identity.
template <int K>
Automorphism<K> sample_automorphism(std::mt19937_64& rng, cd theta) {
  if (std::abs(theta) > 1 + 1e-12) throw DomainError("|theta| must be at most 1");
  auto y = sample_parameter<K>(rng);
  return Automorphism<K>::from_parameters(y, theta);
}

}  // namespace spc
