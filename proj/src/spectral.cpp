#include "dplane/spectral.hpp"

#include "dplane/constants.hpp"

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <stdexcept>

namespace dplane {

namespace {

std::size_t total_size(const std::vector<int>& dims) {
  std::size_t total = 1;
  for (int s : dims) {
    total *= static_cast<std::size_t>(s);
  }
  return total;
}

/// Unscaled 1-D transforms along every axis of a row-major array.
void fft_all_axes(Eigen::VectorXcd& data, const std::vector<int>& dims, bool inverse) {
  Eigen::FFT<double> fft;
  fft.SetFlag(Eigen::FFT<double>::Unscaled);
  std::size_t stride = 1;
  for (std::size_t a = dims.size(); a-- > 0;) {
    const auto len = static_cast<std::size_t>(dims[a]);
    const std::size_t total = static_cast<std::size_t>(data.size());
    std::vector<std::complex<double>> in(len);
    std::vector<std::complex<double>> out(len);
    const std::size_t block = stride * len;
    for (std::size_t outer = 0; outer < total; outer += block) {
      for (std::size_t inner = 0; inner < stride; ++inner) {
        const std::size_t base = outer + inner;
        for (std::size_t k = 0; k < len; ++k) {
          in[k] = data(static_cast<Eigen::Index>(base + k * stride));
        }
        if (inverse) {
          fft.inv(out, in);
        } else {
          fft.fwd(out, in);
        }
        for (std::size_t k = 0; k < len; ++k) {
          data(static_cast<Eigen::Index>(base + k * stride)) = out[k];
        }
      }
    }
    stride *= len;
  }
}

int signed_bin(int k, int size) { return k < size / 2 ? k : k - size; }

}  // namespace

SpectralField::SpectralField(std::vector<int> dims, double spacing, Eigen::VectorXd origin, Eigen::VectorXcd values)
    : dims_(std::move(dims)), spacing_(spacing), origin_(std::move(origin)), values_(std::move(values)) {
  if (dims_.empty() || !(spacing_ > 0.0) || origin_.size() != static_cast<Eigen::Index>(dims_.size())) {
    throw std::invalid_argument("SpectralField: inconsistent geometry");
  }
  for (int s : dims_) {
    if (s < 8 || s % 2 != 0) {
      throw std::invalid_argument("SpectralField: sizes must be even and >= 8");
    }
  }
  if (values_.size() != static_cast<Eigen::Index>(total_size(dims_))) {
    throw std::invalid_argument("SpectralField: value count does not match dims");
  }
}

double SpectralField::frequency_step(int axis) const {
  return 2.0 * std::numbers::pi / (dims_[static_cast<std::size_t>(axis)] * spacing_);
}

Eigen::VectorXd SpectralField::frequency(std::size_t flat) const {
  Eigen::VectorXd xi(dim());
  for (std::size_t a = dims_.size(); a-- > 0;) {
    const int size = dims_[a];
    const int k = static_cast<int>(flat % static_cast<std::size_t>(size));
    flat /= static_cast<std::size_t>(size);
    xi(static_cast<Eigen::Index>(a)) = signed_bin(k, size) * frequency_step(static_cast<int>(a));
  }
  return xi;
}

Eigen::VectorXd SpectralField::frequency_norms() const {
  Eigen::VectorXd out(values_.size());
  for (std::size_t i = 0; i < size(); ++i) {
    out(static_cast<Eigen::Index>(i)) = frequency(i).norm();
  }
  return out;
}

bool SpectralField::is_conjugate_symmetric(double tol) const {
  const double scale = std::max(1.0, values_.cwiseAbs().maxCoeff());
  std::vector<int> mirror(dims_.size());
  for (std::size_t flat = 0; flat < size(); ++flat) {
    std::size_t rest = flat;
    bool self_paired_nyquist = false;
    for (std::size_t a = dims_.size(); a-- > 0;) {
      const int s = dims_[a];
      const int k = static_cast<int>(rest % static_cast<std::size_t>(s));
      rest /= static_cast<std::size_t>(s);
      mirror[a] = (s - k) % s;
      self_paired_nyquist = self_paired_nyquist || k == s / 2;
    }
    if (self_paired_nyquist) {
      continue;
    }
    std::size_t m = 0;
    for (std::size_t a = 0; a < dims_.size(); ++a) {
      m = m * static_cast<std::size_t>(dims_[a]) + static_cast<std::size_t>(mirror[a]);
    }
    if (std::abs(values_(static_cast<Eigen::Index>(flat)) - std::conj(values_(static_cast<Eigen::Index>(m)))) >
        tol * scale) {
      return false;
    }
  }
  return true;
}

SpectralField dft_forward(const GridField& field) {
  Eigen::VectorXcd data = field.values().cast<std::complex<double>>();
  fft_all_axes(data, field.dims(), false);
  SpectralField out(field.dims(), field.spacing(), field.origin(), std::move(data));
  const double cell = std::pow(field.spacing(), field.dim());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double phase = -field.origin().dot(out.frequency(i));
    out.values()(static_cast<Eigen::Index>(i)) *= cell * std::complex<double>(std::cos(phase), std::sin(phase));
  }
  return out;
}

GridField dft_inverse(const SpectralField& spectrum) {
  Eigen::VectorXcd data = spectrum.values();
  const double scale = 1.0 / (static_cast<double>(spectrum.size()) * std::pow(spectrum.spacing(), spectrum.dim()));
  for (std::size_t i = 0; i < spectrum.size(); ++i) {
    const double phase = spectrum.origin().dot(spectrum.frequency(i));
    data(static_cast<Eigen::Index>(i)) *= scale * std::complex<double>(std::cos(phase), std::sin(phase));
  }
  fft_all_axes(data, spectrum.dims(), true);
  return GridField(spectrum.dims(), spectrum.spacing(), spectrum.origin(), data.real());
}

SpectralField apply_power_multiplier(SpectralField spectrum, double p) {
  if (p == 0.0) {
    return spectrum;
  }
  for (std::size_t i = 0; i < spectrum.size(); ++i) {
    const double r = spectrum.frequency(i).norm();
    auto& v = spectrum.values()(static_cast<Eigen::Index>(i));
    if (r == 0.0) {
      if (p < 0.0) {
        v = 0.0;
      } else {
        v *= 0.0;
      }
      continue;
    }
    v *= std::pow(r, p);
  }
  return spectrum;
}

GridField sample_field(const GaussianMixture& f, const GridField& like) {
  if (f.ambient_dim() != like.dim()) {
    throw std::invalid_argument("sample_field: dimension mismatch");
  }
  const Eigen::MatrixXd pts = like.points();
  Eigen::VectorXd values(pts.cols());
  for (Eigen::Index i = 0; i < pts.cols(); ++i) {
    values(i) = eval(f, pts.col(i));
  }
  return like.with_values(std::move(values));
}

double riesz_at_origin(int d, int n, double s) {
  if (n < 2 || d < 1 || d >= n || !(s > 0.0)) {
    throw std::invalid_argument("riesz_at_origin: need 1 <= d < n and s > 0");
  }
  const double two_pi = 2.0 * std::numbers::pi;
  // (2 pi)^{-n} vol(S^{n-1}) (2 pi s^2)^{n/2} int_0^inf r^{n-1-d} e^{-s^2 r^2 / 2} dr
  const double radial = 0.5 * std::pow(2.0 / (s * s), 0.5 * (n - d)) * gamma_fn(0.5 * (n - d));
  return std::pow(two_pi, -n) * sphere_volume(n - 1) * std::pow(two_pi * s * s, 0.5 * n) * radial;
}

double symbol_constant_closed(int d, int n, double s) {
  const GaussianMixture f = GaussianMixture::centered(n, s);
  const McEstimate at_origin = normal_operator(f, d, Eigen::VectorXd::Zero(n), 2, 0, 1);
  return at_origin.value / riesz_at_origin(d, n, s);
}

namespace {

struct Fit {
  double kappa = 0.0;
  double exponent = 0.0;
  std::vector<SymbolShell> shells;
};

struct ShellGeometry {
  std::vector<int> shell_of_bin;  // -1 outside the band
  Eigen::VectorXd log_norm;
  int shells = 0;
};

ShellGeometry shell_geometry(const SpectralField& reference, double lo, double hi, int shells) {
  ShellGeometry g;
  g.shells = shells;
  g.shell_of_bin.assign(reference.size(), -1);
  g.log_norm = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(reference.size()));
  for (std::size_t i = 0; i < reference.size(); ++i) {
    const double r = reference.frequency(i).norm();
    if (r < lo || r >= hi) {
      continue;
    }
    g.shell_of_bin[i] = std::min(shells - 1, static_cast<int>((r - lo) / (hi - lo) * shells));
    g.log_norm(static_cast<Eigen::Index>(i)) = std::log(r);
  }
  return g;
}

Fit fit_transfer(const SpectralField& response, const SpectralField& probe, const ShellGeometry& g, int d) {
  std::vector<double> num(static_cast<std::size_t>(g.shells), 0.0);
  std::vector<double> den(static_cast<std::size_t>(g.shells), 0.0);
  std::vector<double> logr(static_cast<std::size_t>(g.shells), 0.0);
  std::vector<std::size_t> bins(static_cast<std::size_t>(g.shells), 0);
  for (std::size_t i = 0; i < probe.size(); ++i) {
    const int s = g.shell_of_bin[i];
    if (s < 0) {
      continue;
    }
    const auto idx = static_cast<Eigen::Index>(i);
    const auto us = static_cast<std::size_t>(s);
    const std::complex<double> fp = probe.values()(idx);
    const double w = std::norm(fp);
    num[us] += (response.values()(idx) * std::conj(fp)).real();
    den[us] += w;
    logr[us] += w * g.log_norm(idx);
    ++bins[us];
  }
  Fit fit;
  std::vector<double> xs;
  std::vector<double> ys;
  for (int s = 0; s < g.shells; ++s) {
    const auto us = static_cast<std::size_t>(s);
    if (bins[us] == 0 || !(den[us] > 0.0)) {
      continue;
    }
    SymbolShell shell{std::exp(logr[us] / den[us]), num[us] / den[us], bins[us]};
    fit.shells.push_back(shell);
    if (shell.multiplier > 0.0) {
      xs.push_back(std::log(shell.radius));
      ys.push_back(std::log(shell.multiplier));
    }
  }
  if (xs.size() < 3) {
    throw std::runtime_error("symbol_estimate_grid: fewer than three usable shells in the band");
  }
  const auto m = static_cast<Eigen::Index>(xs.size());
  const Eigen::Map<const Eigen::VectorXd> x(xs.data(), m);
  const Eigen::Map<const Eigen::VectorXd> y(ys.data(), m);
  const double xm = x.mean();
  const double ym = y.mean();
  fit.exponent = ((x.array() - xm) * (y.array() - ym)).sum() / (x.array() - xm).square().sum();
  // log a = log kappa - d log r with the exponent held at -d.
  fit.kappa = std::exp((y.array() + d * x.array()).mean());
  return fit;
}

}  // namespace

double SymbolReport::interval_half_width() const {
  return 3.0 * kappa_std_error + tolerance * kappa_measured;
}

bool SymbolReport::within_interval(double candidate) const {
  return std::abs(candidate - kappa_measured) <= interval_half_width();
}

bool SymbolReport::exponent_ok() const { return std::abs(exponent + d) <= tolerance * d; }

bool SymbolReport::oracles_agree() const {
  return std::abs(kappa_measured - kappa_closed) <= tolerance * kappa_closed;
}

bool SymbolReport::precise_enough() const { return kappa_std_error <= tolerance * kappa_measured; }

SymbolReport symbol_estimate_grid(int d, int n, const SymbolOptions& options) {
  if (n < 2 || d < 1 || d >= n) {
    throw std::invalid_argument("symbol_estimate_grid: need 1 <= d < n");
  }
  if (options.batches < 2) {
    throw std::invalid_argument("symbol_estimate_grid: need at least two batches");
  }
  if (!(0.0 < options.band_low && options.band_low < options.band_high && options.band_high <= 1.0)) {
    throw std::invalid_argument("symbol_estimate_grid: band must satisfy 0 < low < high <= 1");
  }
  const std::uint64_t per_batch = options.samples / static_cast<std::uint64_t>(options.batches);
  if (per_batch < 1) {
    throw std::invalid_argument("symbol_estimate_grid: fewer samples than batches");
  }
  const double h = options.spacing;
  const double width = options.width > 0.0 ? options.width : 1.6 * h;
  const GridField grid = GridField::centered(n, options.size, h);
  const GaussianMixture f = GaussianMixture::centered(n, width);

  const FramePool pool = make_frame_pool(d, n, per_batch, options.batches, options.scheme, options.seed);
  const PooledBackprojection normal =
      backproject_pool(forward_analytic(f, d), pool, grid.points(), options.threads);

  const SpectralField probe = dft_forward(sample_field(f, grid));
  const double nyquist = std::numbers::pi / h;
  const ShellGeometry geometry =
      shell_geometry(probe, options.band_low * nyquist, options.band_high * nyquist, options.shells);

  SymbolReport report;
  report.d = d;
  report.n = n;
  report.width = width;
  report.samples = per_batch * static_cast<std::uint64_t>(options.batches);
  report.tolerance = options.tolerance > 0.0 ? options.tolerance : (n == 2 ? 0.02 : 0.05);
  report.band_low = options.band_low * nyquist;
  report.band_high = options.band_high * nyquist;

  const Fit pooled = fit_transfer(dft_forward(grid.with_values(normal.mean())), probe, geometry, d);
  report.kappa_measured = pooled.kappa;
  report.exponent = pooled.exponent;
  report.shells = pooled.shells;

  std::vector<double> kappas;
  std::vector<double> exponents;
  for (int b = 0; b < options.batches; ++b) {
    const Fit fit = fit_transfer(dft_forward(grid.with_values(normal.batch_values.col(b))), probe, geometry, d);
    kappas.push_back(fit.kappa);
    exponents.push_back(fit.exponent);
  }
  auto standard_error = [](const std::vector<double>& v) {
    const auto m = static_cast<Eigen::Index>(v.size());
    const Eigen::Map<const Eigen::VectorXd> x(v.data(), m);
    return std::sqrt((x.array() - x.mean()).square().sum() / static_cast<double>((m - 1) * m));
  };
  report.kappa_std_error = standard_error(kappas);
  report.exponent_std_error = standard_error(exponents);

  report.kappa_paper = grassmannian_volume(d, n);
  report.kappa_gamma = report.kappa_paper * gamma_ratio_constant(d, n);
  report.kappa_closed = symbol_constant_closed(d, n, width);
  return report;
}

void write_symbol_csv(std::ostream& os, const SymbolReport& report) {
  const auto old_precision = os.precision(17);
  os << "shell,radius,multiplier,scaled_multiplier,bins\n";
  for (std::size_t i = 0; i < report.shells.size(); ++i) {
    const auto& s = report.shells[i];
    os << i << ',' << s.radius << ',' << s.multiplier << ',' << s.multiplier * std::pow(s.radius, report.d) << ','
       << s.bins << '\n';
  }
  os.precision(old_precision);
}

void write_symbol_summary(std::ostream& os, const SymbolReport& r) {
  const auto old_precision = os.precision(10);
  os << "symbol of R*R for d=" << r.d << " n=" << r.n << "  (a(xi) = kappa |xi|^p)\n";
  os << "  probe width            " << r.width << "\n";
  os << "  samples                " << r.samples << "\n";
  os << "  band |xi| in           [" << r.band_low << ", " << r.band_high << ")\n";
  os << "  fitted exponent p      " << r.exponent << " +- " << r.exponent_std_error << "  (expected " << -r.d
     << ")\n";
  os << "  kappa_measured         " << r.kappa_measured << " +- " << r.kappa_std_error << "\n";
  os << "  measurement interval   [" << r.kappa_measured - r.interval_half_width() << ", "
     << r.kappa_measured + r.interval_half_width() << "]\n";
  os << "  kappa_closed (x=0)     " << r.kappa_closed << "\n";
  auto verdict = [&](double v) { return r.within_interval(v) ? "inside interval" : "outside interval"; };
  os << "  kappa_paper  vol(G)    " << r.kappa_paper << "  " << verdict(r.kappa_paper) << "\n";
  os << "  kappa_gamma            " << r.kappa_gamma << "  " << verdict(r.kappa_gamma) << "\n";
  os << "  tolerance              " << r.tolerance << "\n";
  os << "  exponent check         " << (r.exponent_ok() ? "ok" : "FAILED") << "\n";
  os << "  oracle agreement       " << (r.oracles_agree() ? "ok" : "FAILED") << "\n";
  os << "  precision              " << (r.precise_enough() ? "ok" : "insufficient samples") << "\n";
  os.precision(old_precision);
}

double fbp_constant(int d, int n, const FbpOptions& options) {
  switch (options.mode) {
    case ConstantMode::paper:
      return grassmannian_volume(d, n);
    case ConstantMode::calibrated:
      return symbol_constant_closed(d, n);
    case ConstantMode::explicit_value:
      if (!(options.kappa > 0.0) || !std::isfinite(options.kappa)) {
        throw std::invalid_argument("fbp_reconstruct: explicit mode needs kappa > 0");
      }
      return options.kappa;
  }
  throw std::invalid_argument("fbp_reconstruct: unknown constant mode");
}

GridField fbp_reconstruct(const SinogramFunction& phi, const FbpOptions& options) {
  const int d = phi.sub_dim();
  const int n = phi.ambient_dim();
  const double kappa = fbp_constant(d, n, options);
  if (options.padding < 1) {
    throw std::invalid_argument("fbp_reconstruct: padding must be >= 1");
  }
  const GridField out_grid = GridField::centered(n, options.size, options.spacing);
  const int padded_size = options.size * options.padding;
  const GridField padded = GridField::centered(n, padded_size, options.spacing);

  const FramePool pool = make_frame_pool(d, n, options.samples, options.batches, options.scheme, options.seed);
  const Eigen::VectorXd backprojected = backproject_pool(phi, pool, padded.points(), options.threads).mean();
  const GridField filtered =
      dft_inverse(apply_power_multiplier(dft_forward(padded.with_values(backprojected)), d));

  const int shift = (padded_size - options.size) / 2;
  Eigen::VectorXd values(static_cast<Eigen::Index>(out_grid.size()));
  std::vector<int> idx;
  for (std::size_t i = 0; i < out_grid.size(); ++i) {
    idx = out_grid.multi_index(i);
    for (int& k : idx) {
      k += shift;
    }
    values(static_cast<Eigen::Index>(i)) = filtered.values()(static_cast<Eigen::Index>(padded.flat_index(idx))) / kappa;
  }
  return out_grid.with_values(std::move(values));
}

double relative_l2_error(const GridField& reconstruction, const GridField& truth) {
  if (reconstruction.size() != truth.size()) {
    throw std::invalid_argument("relative_l2_error: size mismatch");
  }
  const Eigen::ArrayXd a = reconstruction.values().array() - reconstruction.values().mean();
  const Eigen::ArrayXd b = truth.values().array() - truth.values().mean();
  return std::sqrt((a - b).square().sum() / b.square().sum());
}

}  // namespace dplane
