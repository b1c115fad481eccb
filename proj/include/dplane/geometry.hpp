// Orthonormal frames, Haar sampling on O(n) and Grassmannians, orthogonal
// projections, and the canonical relation of the d-plane transform.
#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <type_traits>

namespace dplane {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Rng = std::mt19937_64;

/// Independent generator for substream `stream` of a run seeded with `seed`.
inline Rng make_stream(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                    0x64706cu};
  return Rng(seq);
}

/// Seed for the `index`-th independent task of a run (splitmix64 finalizer).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline constexpr double kFrameTolerance = 1e-10;

namespace detail {

template <typename Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& m) {
  return m.allFinite();
}

inline void require_dims(int d, int n, const char* what) {
  if (n < 2 || d < 1 || d >= n) {
    throw std::invalid_argument(std::string(what) + ": need 1 <= d < n, got d=" + std::to_string(d) +
                                " n=" + std::to_string(n));
  }
}

}  // namespace detail

/// A d-dimensional linear subspace of R^n, stored as an n x d matrix with
/// orthonormal columns. Two frames spanning the same subspace are different
/// objects; everything downstream depends only on the span.
template <typename Scalar>
class BasicFrame {
 public:
  using Matrix = MatrixX<Scalar>;
  using Vector = VectorX<Scalar>;

  BasicFrame() = default;

  explicit BasicFrame(Matrix columns, Scalar tolerance = Scalar(kFrameTolerance))
      : columns_(std::move(columns)) {
    const auto n = columns_.rows();
    const auto d = columns_.cols();
    if (d < 1 || d >= n) {
      throw std::invalid_argument("Frame: need 1 <= d < n columns");
    }
    if (!detail::all_finite(columns_)) {
      throw std::invalid_argument("Frame: non-finite entry");
    }
    if (orthonormality_error() > tolerance) {
      throw std::invalid_argument("Frame: columns are not orthonormal");
    }
  }

  int ambient_dim() const { return static_cast<int>(columns_.rows()); }
  int sub_dim() const { return static_cast<int>(columns_.cols()); }
  const Matrix& columns() const { return columns_; }
  auto column(int j) const { return columns_.col(j); }

  /// max |G - I| over the Gram matrix G of the columns.
  Scalar orthonormality_error() const {
    const Matrix gram = columns_.transpose() * columns_;
    return (gram - Matrix::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff();
  }

  /// Orthonormal basis of the orthogonal complement, n x (n - d).
  Matrix complement_basis() const {
    const auto n = columns_.rows();
    const auto d = columns_.cols();
    Eigen::HouseholderQR<Matrix> qr(columns_);
    const Matrix q = qr.householderQ() * Matrix::Identity(n, n);
    return q.rightCols(n - d);
  }

 private:
  Matrix columns_;
};

/// A point (sigma, x'') of the affine Grassmannian: the plane sigma + x''
/// with x'' in the orthogonal complement of sigma.
template <typename Scalar>
class BasicAffinePlane {
 public:
  using Frame = BasicFrame<Scalar>;
  using Vector = VectorX<Scalar>;

  BasicAffinePlane(Frame frame, Vector offset, Scalar tolerance = Scalar(kFrameTolerance))
      : frame_(std::move(frame)), offset_(std::move(offset)) {
    if (offset_.size() != frame_.ambient_dim()) {
      throw std::invalid_argument("AffinePlane: offset dimension mismatch");
    }
    if (!offset_.allFinite()) {
      throw std::invalid_argument("AffinePlane: non-finite offset");
    }
    const Scalar leak = (frame_.columns().transpose() * offset_).cwiseAbs().maxCoeff();
    if (leak > tolerance * std::max(Scalar(1), offset_.norm())) {
      throw std::invalid_argument("AffinePlane: offset is not orthogonal to the subspace");
    }
  }

  const Frame& frame() const { return frame_; }
  const Vector& offset() const { return offset_; }
  int ambient_dim() const { return frame_.ambient_dim(); }
  int sub_dim() const { return frame_.sub_dim(); }

 private:
  Frame frame_;
  Vector offset_;
};

using Frame = BasicFrame<double>;
using AffinePlane = BasicAffinePlane<double>;

/// Haar-distributed element of O(n): QR of an i.i.d. standard normal matrix,
/// with columns flipped so the triangular factor has a positive diagonal.
template <typename Scalar = double>
MatrixX<Scalar> haar_orthogonal(int n, Rng& rng) {
  if (n < 1) {
    throw std::invalid_argument("haar_orthogonal: n must be positive");
  }
  std::normal_distribution<double> normal;
  MatrixX<Scalar> z(n, n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      z(i, j) = static_cast<Scalar>(normal(rng));
    }
  }
  Eigen::HouseholderQR<MatrixX<Scalar>> qr(z);
  MatrixX<Scalar> q = qr.householderQ() * MatrixX<Scalar>::Identity(n, n);
  const auto& r = qr.matrixQR();
  for (int j = 0; j < n; ++j) {
    if (r(j, j) < Scalar(0)) {
      q.col(j) = -q.col(j);
    }
  }
  return q;
}

template <typename Scalar = double>
BasicFrame<Scalar> sample_subspace(int d, int n, Rng& rng) {
  detail::require_dims(d, n, "sample_subspace");
  return BasicFrame<Scalar>(haar_orthogonal<Scalar>(n, rng).leftCols(d));
}

/// pi_sigma x
template <typename Scalar, typename Derived>
VectorX<Scalar> project(const BasicFrame<Scalar>& frame, const Eigen::MatrixBase<Derived>& x) {
  if (x.size() != frame.ambient_dim()) {
    throw std::invalid_argument("project: dimension mismatch");
  }
  return frame.columns() * (frame.columns().transpose() * x);
}

/// x - pi_sigma x, the component of x in sigma^perp.
template <typename Scalar, typename Derived>
VectorX<Scalar> complement_part(const BasicFrame<Scalar>& frame,
                                const Eigen::MatrixBase<Derived>& x) {
  return x - project(frame, x);
}

/// Householder reflector mapping e_n to xi/|xi|. Its first n-1 columns are an
/// orthonormal basis of xi^perp.
template <typename Scalar, typename Derived>
MatrixX<Scalar> reflector_to(const Eigen::MatrixBase<Derived>& xi) {
  const auto n = xi.size();
  const Scalar norm = xi.norm();
  if (!(norm > Scalar(0))) {
    throw std::invalid_argument("reflector_to: zero vector");
  }
  VectorX<Scalar> v = -xi / norm;
  v(n - 1) += Scalar(1);
  MatrixX<Scalar> h = MatrixX<Scalar>::Identity(n, n);
  const Scalar vv = v.squaredNorm();
  if (vv > Scalar(1e-30)) {
    h -= (Scalar(2) / vv) * v * v.transpose();
  }
  return h;
}

/// Haar-random d-frame inside the hyperplane xi^perp.
template <typename Scalar, typename Derived>
BasicFrame<Scalar> sample_subspace_in_complement(int d, int n, const Eigen::MatrixBase<Derived>& xi,
                                                 Rng& rng) {
  if (n < 2 || d < 1 || d > n - 1) {
    throw std::invalid_argument("sample_subspace_in_complement: need 1 <= d <= n-1");
  }
  if (xi.size() != n) {
    throw std::invalid_argument("sample_subspace_in_complement: dimension mismatch");
  }
  if (!(xi.norm() > Scalar(0))) {
    throw std::invalid_argument("sample_subspace_in_complement: xi must be nonzero");
  }
  const MatrixX<Scalar> basis = reflector_to<Scalar>(xi).leftCols(n - 1);
  const MatrixX<Scalar> inner = haar_orthogonal<Scalar>(n - 1, rng).leftCols(d);
  return BasicFrame<Scalar>(basis * inner);
}

/// A point of the canonical relation Lambda_d in T*G(d,n) x T*R^n. The fields
/// are stored unvalidated so that corrupted points can be represented and
/// rejected by check_lambda_descriptions.
template <typename Scalar>
struct BasicCanonicalRelationPoint {
  BasicFrame<Scalar> frame;
  VectorX<Scalar> offset;     // x''
  MatrixX<Scalar> covector;   // n x (d+1): eta_1, ..., eta_d, xi
  VectorX<Scalar> base_point;      // y
  VectorX<Scalar> base_covector;   // eta

  BasicAffinePlane<Scalar> plane() const { return BasicAffinePlane<Scalar>(frame, offset); }
};

using CanonicalRelationPoint = BasicCanonicalRelationPoint<double>;

/// ((sigma, y - pi_sigma y), eta (y.w_1, ..., y.w_d, 1); y, eta)
template <typename Scalar>
BasicCanonicalRelationPoint<Scalar> canonical_relation_point(const BasicFrame<Scalar>& frame,
                                                             const std::type_identity_t<VectorX<Scalar>>& y,
                                                             const std::type_identity_t<VectorX<Scalar>>& eta) {
  const int n = frame.ambient_dim();
  const int d = frame.sub_dim();
  if (y.size() != n || eta.size() != n) {
    throw std::invalid_argument("canonical_relation_point: dimension mismatch");
  }
  const Scalar eta_norm = eta.norm();
  if (!(eta_norm > Scalar(0))) {
    throw std::invalid_argument("canonical_relation_point: eta must be nonzero");
  }
  if ((frame.columns().transpose() * eta).cwiseAbs().maxCoeff() > Scalar(kFrameTolerance) * eta_norm) {
    throw std::invalid_argument("canonical_relation_point: eta must be orthogonal to the subspace");
  }
  BasicCanonicalRelationPoint<Scalar> p{frame, complement_part(frame, y), MatrixX<Scalar>(n, d + 1), y,
                                        eta};
  const VectorX<Scalar> coords = frame.columns().transpose() * y;
  for (int j = 0; j < d; ++j) {
    p.covector.col(j) = coords(j) * eta;
  }
  p.covector.col(d) = eta;
  return p;
}

/// True iff the point satisfies all three parametrizations of Lambda_d:
/// (a) offset = y - pi_sigma y;
/// (b) eta in sigma^perp \ {0} and covector = eta (y.w_1, ..., y.w_d, 1);
/// (c) y = x'' + sum t_j w_j for some t, with covector = xi (t_1, ..., t_d, 1),
///     xi = eta, and x'', xi in sigma^perp.
template <typename Scalar>
bool check_lambda_descriptions(const BasicCanonicalRelationPoint<Scalar>& p, Scalar tol = Scalar(1e-9)) {
  const int n = p.frame.ambient_dim();
  const int d = p.frame.sub_dim();
  if (p.offset.size() != n || p.base_point.size() != n || p.base_covector.size() != n ||
      p.covector.rows() != n || p.covector.cols() != d + 1) {
    return false;
  }
  if (!p.offset.allFinite() || !p.covector.allFinite() || !p.base_point.allFinite() ||
      !p.base_covector.allFinite()) {
    return false;
  }
  if (p.frame.orthonormality_error() > tol) {
    return false;
  }
  const auto& w = p.frame.columns();
  const auto& y = p.base_point;
  const auto& eta = p.base_covector;
  const Scalar scale = std::max(Scalar(1), std::max(y.norm(), eta.norm()));
  const Scalar eps = tol * scale * scale;
  if (!(eta.norm() > eps)) {
    return false;
  }
  // Cotangent fibre of G(d,n) at (sigma, x''): every component in sigma^perp.
  if ((w.transpose() * p.covector).cwiseAbs().maxCoeff() > eps) {
    return false;
  }

  // (a)
  const bool a = (p.offset - complement_part(p.frame, y)).cwiseAbs().maxCoeff() <= eps;

  // (b)
  const VectorX<Scalar> coords = w.transpose() * y;
  bool b = (w.transpose() * eta).cwiseAbs().maxCoeff() <= eps;
  for (int j = 0; j < d && b; ++j) {
    b = (p.covector.col(j) - coords(j) * eta).cwiseAbs().maxCoeff() <= eps;
  }
  b = b && (p.covector.col(d) - eta).cwiseAbs().maxCoeff() <= eps;

  // (c)
  const VectorX<Scalar> xi = p.covector.col(d);
  const VectorX<Scalar> t = w.transpose() * (y - p.offset);
  bool c = (w.transpose() * p.offset).cwiseAbs().maxCoeff() <= eps &&
           (w.transpose() * xi).cwiseAbs().maxCoeff() <= eps && xi.norm() > eps &&
           (y - p.offset - w * t).cwiseAbs().maxCoeff() <= eps &&
           (xi - eta).cwiseAbs().maxCoeff() <= eps;
  for (int j = 0; j < d && c; ++j) {
    c = (p.covector.col(j) - t(j) * xi).cwiseAbs().maxCoeff() <= eps;
  }
  return a && b && c;
}

}  // namespace dplane
