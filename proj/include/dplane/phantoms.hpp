// Isotropic Gaussian mixtures with closed-form values, plane integrals and
// Fourier transforms.
#pragma once

#include "dplane/geometry.hpp"

#include <complex>
#include <numbers>
#include <stdexcept>
#include <type_traits>
#include <vector>

namespace dplane {

/// a * exp(-|x - mu|^2 / (2 s^2))
template <typename Scalar>
struct BasicGaussianTerm {
  Scalar amplitude = Scalar(1);
  VectorX<Scalar> center;
  Scalar width = Scalar(1);
};

template <typename Scalar>
class BasicGaussianMixture {
 public:
  using Term = BasicGaussianTerm<Scalar>;

  explicit BasicGaussianMixture(std::vector<Term> terms) : terms_(std::move(terms)) {
    if (terms_.empty()) {
      throw std::invalid_argument("GaussianMixture: at least one term required");
    }
    dim_ = static_cast<int>(terms_.front().center.size());
    if (dim_ < 1) {
      throw std::invalid_argument("GaussianMixture: empty center");
    }
    for (const auto& t : terms_) {
      if (t.center.size() != dim_) {
        throw std::invalid_argument("GaussianMixture: terms disagree on dimension");
      }
      if (!(t.width > Scalar(0)) || !std::isfinite(t.width) || !std::isfinite(t.amplitude) ||
          !t.center.allFinite()) {
        throw std::invalid_argument("GaussianMixture: invalid term");
      }
    }
  }

  /// Single centered term of the given width and amplitude.
  static BasicGaussianMixture centered(int n, Scalar width, Scalar amplitude = Scalar(1)) {
    return BasicGaussianMixture({Term{amplitude, VectorX<Scalar>::Zero(n), width}});
  }

  int ambient_dim() const { return dim_; }
  const std::vector<Term>& terms() const { return terms_; }

 private:
  std::vector<Term> terms_;
  int dim_ = 0;
};

using GaussianTerm = BasicGaussianTerm<double>;
using GaussianMixture = BasicGaussianMixture<double>;

template <typename Scalar, typename Derived>
Scalar eval(const BasicGaussianMixture<Scalar>& f, const Eigen::MatrixBase<Derived>& x) {
  if (x.size() != f.ambient_dim()) {
    throw std::invalid_argument("eval: dimension mismatch");
  }
  Scalar sum(0);
  for (const auto& t : f.terms()) {
    sum += t.amplitude * std::exp(-(x - t.center).squaredNorm() / (Scalar(2) * t.width * t.width));
  }
  return sum;
}

/// Integral of f over the affine plane sigma + x'':
/// sum_k a_k (2 pi s_k^2)^{d/2} exp(-|x'' - pi_{sigma^perp} mu_k|^2 / (2 s_k^2)).
template <typename Scalar>
Scalar dplane_closed_form(const BasicGaussianMixture<Scalar>& f, const BasicAffinePlane<Scalar>& plane) {
  if (plane.ambient_dim() != f.ambient_dim()) {
    throw std::invalid_argument("dplane_closed_form: dimension mismatch");
  }
  const Scalar d = Scalar(plane.sub_dim());
  Scalar sum(0);
  for (const auto& t : f.terms()) {
    const Scalar s2 = t.width * t.width;
    const VectorX<Scalar> gap = complement_part(plane.frame(), plane.offset() - t.center);
    sum += t.amplitude * std::pow(Scalar(2) * std::numbers::pi_v<Scalar> * s2, d / Scalar(2)) *
           std::exp(-gap.squaredNorm() / (Scalar(2) * s2));
  }
  return sum;
}

/// Batched plane integrals: out(i) = R_d f(sigma, offsets.col(i)). Only the
/// sigma^perp component of each offset is used.
template <typename Scalar>
void dplane_closed_form_batch(const BasicGaussianMixture<Scalar>& f, const BasicFrame<Scalar>& frame,
                              const std::type_identity_t<Eigen::Ref<const MatrixX<Scalar>>>& offsets,
                              std::type_identity_t<Eigen::Ref<VectorX<Scalar>>> out) {
  const Scalar d = Scalar(frame.sub_dim());
  const auto& w = frame.columns();
  const MatrixX<Scalar> perp = offsets - w * (w.transpose() * offsets);
  const Eigen::Index rows = perp.rows();
  const Eigen::Index cols = perp.cols();
  VectorX<Scalar> dist2(cols);
  out.setZero();
  for (const auto& t : f.terms()) {
    const Scalar s2 = t.width * t.width;
    const Scalar scale = t.amplitude * std::pow(Scalar(2) * std::numbers::pi_v<Scalar> * s2, d / Scalar(2));
    const VectorX<Scalar> mu_perp = complement_part(frame, t.center);
    for (Eigen::Index i = 0; i < cols; ++i) {
      Scalar acc(0);
      for (Eigen::Index r = 0; r < rows; ++r) {
        const Scalar diff = perp(r, i) - mu_perp(r);
        acc += diff * diff;
      }
      dist2(i) = acc;
    }
    out.array() += scale * (dist2.array() * (Scalar(-1) / (Scalar(2) * s2))).exp();
  }
}

/// f^(xi) = int e^{-i y.xi} f(y) dy
template <typename Scalar, typename Derived>
std::complex<Scalar> fourier_closed_form(const BasicGaussianMixture<Scalar>& f,
                                         const Eigen::MatrixBase<Derived>& xi) {
  if (xi.size() != f.ambient_dim()) {
    throw std::invalid_argument("fourier_closed_form: dimension mismatch");
  }
  const Scalar n = Scalar(f.ambient_dim());
  std::complex<Scalar> sum(0);
  for (const auto& t : f.terms()) {
    const Scalar s2 = t.width * t.width;
    const Scalar magnitude = t.amplitude * std::pow(Scalar(2) * std::numbers::pi_v<Scalar> * s2, n / Scalar(2)) *
                             std::exp(-s2 * xi.squaredNorm() / Scalar(2));
    const Scalar phase = -t.center.dot(xi);
    sum += magnitude * std::complex<Scalar>(std::cos(phase), std::sin(phase));
  }
  return sum;
}

}  // namespace dplane
