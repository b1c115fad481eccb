// Grid Fourier analysis: power multipliers |xi|^p, filtered backprojection,
// and measurement of the normal-operator symbol.
#pragma once

#include "dplane/grid_field.hpp"
#include "dplane/parallel.hpp"
#include "dplane/phantoms.hpp"
#include "dplane/transform.hpp"

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <vector>

namespace dplane {

/// Samples of f^(xi) = int e^{-i y.xi} f(y) dy on the dual grid of a
/// GridField, in FFT order along every axis. The frequency step along axis a
/// is 2 pi / (N_a h); the upper half of each axis holds negative frequencies,
/// with the N/2 bin taken as -pi/h.
class SpectralField {
 public:
  SpectralField(std::vector<int> dims, double spacing, Eigen::VectorXd origin, Eigen::VectorXcd values);

  int dim() const { return static_cast<int>(dims_.size()); }
  const std::vector<int>& dims() const { return dims_; }
  double spacing() const { return spacing_; }
  const Eigen::VectorXd& origin() const { return origin_; }
  const Eigen::VectorXcd& values() const { return values_; }
  Eigen::VectorXcd& values() { return values_; }
  std::size_t size() const { return static_cast<std::size_t>(values_.size()); }

  double frequency_step(int axis) const;
  Eigen::VectorXd frequency(std::size_t flat) const;
  /// |xi| for every bin, in storage order.
  Eigen::VectorXd frequency_norms() const;

  /// F(-xi) = conj F(xi) for every bin whose mirror is a distinct bin.
  bool is_conjugate_symmetric(double tol) const;

 private:
  std::vector<int> dims_;
  double spacing_;
  Eigen::VectorXd origin_;
  Eigen::VectorXcd values_;
};

/// Riemann-sum approximation of the continuous transform: h^n sum_j f(x_j) e^{-i x_j.xi}.
SpectralField dft_forward(const GridField& field);
/// Exact inverse of dft_forward; the real part is returned.
GridField dft_inverse(const SpectralField& spectrum);

/// Multiplies every bin by |xi|^p. For p < 0 the DC bin is set to zero.
SpectralField apply_power_multiplier(SpectralField spectrum, double p);

/// Samples a Gaussian mixture on the grid of `like`.
GridField sample_field(const GaussianMixture& f, const GridField& like);

/// I_d f(0) = (2 pi)^{-n} int |xi|^{-d} f^(xi) dxi for the centered
/// unit-amplitude Gaussian of width s, in closed form.
double riesz_at_origin(int d, int n, double s);

/// kappa in a_d(xi) = kappa / |xi|^d from the identity R*R f(0) = kappa I_d f(0)
/// on the centered Gaussian of width s. R*R f(0) comes from normal_operator,
/// where the integrand is constant.
double symbol_constant_closed(int d, int n, double s = 1.0);

struct SymbolOptions {
  int size = 128;
  double spacing = 0.125;
  /// Width of the centered Gaussian probe; 0 selects 1.6 * spacing, which
  /// keeps f^ well above rounding across the fitted band.
  double width = 0.0;
  std::uint64_t samples = 20000;
  int batches = 8;
  SamplingScheme scheme = SamplingScheme::haar;
  std::uint64_t seed = 0;
  int shells = 24;
  /// Fitted band as fractions of the Nyquist frequency pi / h.
  double band_low = 0.10;
  double band_high = 0.75;
  /// Relative tolerance; 0 selects 0.02 for n = 2 and 0.05 otherwise.
  double tolerance = 0.0;
  int threads = default_thread_count();
};

struct SymbolShell {
  double radius = 0.0;      // |f^|^2-weighted geometric mean of |xi|
  double multiplier = 0.0;  // least-squares transfer function a(xi) on the shell
  std::size_t bins = 0;
};

struct SymbolReport {
  int d = 0;
  int n = 0;
  double kappa_measured = 0.0;
  double kappa_std_error = 0.0;
  double exponent = 0.0;
  double exponent_std_error = 0.0;
  double kappa_paper = 0.0;   // vol(G_{d,n})
  double kappa_gamma = 0.0;   // vol(G_{d,n}) (4 pi)^{d/2} Gamma(n/2) / Gamma((n-d)/2)
  double kappa_closed = 0.0;  // x = 0 closed-form ratio
  double band_low = 0.0;      // fitted |xi| range
  double band_high = 0.0;
  double width = 0.0;
  double tolerance = 0.0;
  std::uint64_t samples = 0;
  std::vector<SymbolShell> shells;

  /// Half-width of the measurement interval: 3 standard errors plus the
  /// relative tolerance.
  double interval_half_width() const;
  bool within_interval(double candidate) const;
  bool exponent_ok() const;
  bool oracles_agree() const;
  bool precise_enough() const;
  bool passed() const { return exponent_ok() && oracles_agree() && precise_enough(); }
};

/// Measures the transfer function of R*R on a grid: R*R f at every grid point
/// from one shared pool of subspaces, then a(xi) = (R*R f)^ / f^ aggregated
/// over radial shells inside the band, fitted as kappa |xi|^{-d}. Batch
/// estimates give the standard errors.
SymbolReport symbol_estimate_grid(int d, int n, const SymbolOptions& options);

void write_symbol_csv(std::ostream& os, const SymbolReport& report);
void write_symbol_summary(std::ostream& os, const SymbolReport& report);

enum class ConstantMode { paper, calibrated, explicit_value };

struct FbpOptions {
  int size = 128;
  double spacing = 0.125;
  ConstantMode mode = ConstantMode::calibrated;
  /// Used only with ConstantMode::explicit_value.
  double kappa = 0.0;
  /// Subspaces per batch.
  std::uint64_t samples = 256;
  int batches = 4;
  SamplingScheme scheme = SamplingScheme::rotated_design;
  /// The backprojection is computed on a grid `padding` times larger per axis
  /// and cropped after filtering, which keeps the periodic wrap-around of the
  /// slowly decaying R*R f away from the output box.
  int padding = 2;
  std::uint64_t seed = 0;
  int threads = default_thread_count();
};

double fbp_constant(int d, int n, const FbpOptions& options);

/// f = kappa^{-1} (-Delta)^{d/2} R_d^* phi on a centered size^n grid.
GridField fbp_reconstruct(const SinogramFunction& phi, const FbpOptions& options);

/// ||(a - mean a) - (b - mean b)|| / ||b - mean b||
double relative_l2_error(const GridField& reconstruction, const GridField& truth);

}  // namespace dplane
