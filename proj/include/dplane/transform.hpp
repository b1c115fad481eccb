// The d-plane transform, its adjoint as an invariant integral over the
// Grassmannian, and the normal operator R*R.
#pragma once

#include "dplane/geometry.hpp"
#include "dplane/grid_field.hpp"
#include "dplane/parallel.hpp"
#include "dplane/phantoms.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace dplane {

enum class Provenance { analytic, grid, custom };

/// A function phi(sigma, x'') on the affine Grassmannian G(d, n).
///
/// Callers may pass offsets that are orthogonal to sigma only up to rounding;
/// implementations must depend on the sigma^perp component alone. Bounded and
/// continuous along sampled planes is the only regularity assumed anywhere.
class SinogramFunction {
 public:
  using PointFn = std::function<double(const Frame&, const Eigen::VectorXd&)>;
  using BatchFn = std::function<void(const Frame&, const Eigen::Ref<const Eigen::MatrixXd>&,
                                     Eigen::Ref<Eigen::VectorXd>)>;

  SinogramFunction(int d, int n, Provenance provenance, PointFn point, BatchFn batch = {});

  static SinogramFunction constant(int d, int n, double value);

  int sub_dim() const { return d_; }
  int ambient_dim() const { return n_; }
  Provenance provenance() const { return provenance_; }

  double operator()(const AffinePlane& plane) const;
  double operator()(const Frame& frame, const Eigen::VectorXd& offset) const;
  /// out(i) = phi(frame, offsets.col(i))
  void evaluate(const Frame& frame, const Eigen::Ref<const Eigen::MatrixXd>& offsets,
                Eigen::Ref<Eigen::VectorXd> out) const;

  SinogramFunction scaled(double factor) const;

 private:
  int d_;
  int n_;
  Provenance provenance_;
  PointFn point_;
  BatchFn batch_;
};

/// Value with a Monte Carlo standard error.
struct McEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::uint64_t samples = 0;
  std::uint64_t seed = 0;
};

/// Exact R_d f for a Gaussian mixture.
SinogramFunction forward_analytic(const GaussianMixture& f, int d);

/// d-dimensional trapezoid quadrature of the multilinearly interpolated field
/// over the patch { x'' + sum t_j w_j : |t_j| <= radius }. The patch is split
/// into round(2 radius / step) intervals per direction.
double forward_grid(const GridField& field, const AffinePlane& plane, double step, double radius);

SinogramFunction forward_grid_sinogram(const GridField& field, int d, double step, double radius);

/// R_d^* phi(x) = vol(G_{d,n}) E_sigma[ phi(sigma, x - pi_sigma x) ] with sigma
/// Haar-distributed. Samples are split into fixed-size chunks, each drawn from
/// its own substream of `seed`, so the result does not depend on `threads`.
McEstimate backproject_mc(const SinogramFunction& phi, const Eigen::VectorXd& x, std::uint64_t samples,
                          std::uint64_t seed, int threads = default_thread_count());

/// R_d^* R_d f(x), computed without reference to any symbol.
McEstimate normal_operator(const GaussianMixture& f, int d, const Eigen::VectorXd& x,
                           std::uint64_t samples, std::uint64_t seed,
                           int threads = default_thread_count());

enum class SamplingScheme {
  /// i.i.d. Haar subspaces
  haar,
  /// A fixed well-spread set of subspaces moved by one Haar rotation per
  /// batch. Every member is marginally Haar, so the estimator stays unbiased;
  /// batches are independent. Available for n = 2 and n = 3; other (d, n)
  /// fall back to haar.
  rotated_design,
};

bool has_rotated_design(int d, int n);

/// Subspaces shared by every evaluation point of a grid backprojection,
/// grouped into equally sized independent batches.
struct FramePool {
  int d = 0;
  int n = 0;
  int batches = 0;
  std::size_t per_batch = 0;
  std::vector<Frame> frames;  // batch-major
};

FramePool make_frame_pool(int d, int n, std::size_t per_batch, int batches, SamplingScheme scheme,
                          std::uint64_t seed);

/// Backprojection at many points using one shared pool of subspaces.
struct PooledBackprojection {
  Eigen::MatrixXd batch_values;  // points x batches, each column a batch estimate

  Eigen::VectorXd mean() const;
  /// Standard error of the mean from the spread of the batch estimates.
  Eigen::VectorXd std_error() const;
};

PooledBackprojection backproject_pool(const SinogramFunction& phi, const FramePool& pool,
                                      const Eigen::MatrixXd& points, int threads = default_thread_count());

struct AdjointnessOptions {
  std::uint64_t samples = 100000;
  std::uint64_t seed = 0;
  /// Half-width of the quadrature boxes, in R^n and in each sigma^perp.
  double half_width = 8.0;
  int points_per_axis = 64;
  int threads = default_thread_count();
};

struct AdjointnessResult {
  McEstimate plane_side;  // <R_d f, phi> over G(d,n)
  McEstimate point_side;  // <f, R_d^* phi> over R^n

  double combined_std_error() const;
  /// |plane - point| <= k * combined_std_error (exact equality when both are exact)
  bool agree(double k) const;
};

/// Both sides of the adjoint pairing. The G(d,n) side draws Haar subspaces
/// and integrates over each sigma^perp by the trapezoid rule; the R^n side
/// integrates f * R_d^* phi over a box, with R_d^* phi estimated from an
/// independent pool of Haar subspaces. Throws std::domain_error when the
/// integrand mass on the box boundary exceeds 1e-6 of the total.
AdjointnessResult adjointness_check(const GaussianMixture& f, const SinogramFunction& phi,
                                    const AdjointnessOptions& options);

}  // namespace dplane
