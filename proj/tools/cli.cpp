#include "cli.hpp"

#include "dplane/constants.hpp"
#include "dplane/geometry.hpp"
#include "dplane/io.hpp"
#include "dplane/parallel.hpp"
#include "dplane/phantoms.hpp"
#include "dplane/spectral.hpp"
#include "dplane/transform.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <memory>
#include <numbers>
#include <optional>
#include <ostream>
#include <iomanip>
#include <sstream>

namespace dplane::cli {

void RunConfig::validate() const {
  if (n < 2 || n > 16 || d < 1 || d >= n) {
    throw std::invalid_argument("need 1 <= d < n <= 16, got d=" + std::to_string(d) + " n=" + std::to_string(n));
  }
  if (samples < 2) {
    throw std::invalid_argument("need at least 2 samples");
  }
  if (threads < 1) {
    throw std::invalid_argument("need at least one thread");
  }
}

namespace {

struct IntRange {
  int lo = 0;
  int hi = -1;
};

IntRange parse_range(const std::string& text) {
  IntRange r;
  try {
    const auto dots = text.find("..");
    std::size_t used = 0;
    if (dots == std::string::npos) {
      r.lo = r.hi = std::stoi(text, &used);
      if (used != text.size()) {
        throw std::invalid_argument(text);
      }
    } else {
      const std::string a = text.substr(0, dots);
      const std::string b = text.substr(dots + 2);
      r.lo = std::stoi(a, &used);
      if (used != a.size()) {
        throw std::invalid_argument(text);
      }
      r.hi = std::stoi(b, &used);
      if (used != b.size()) {
        throw std::invalid_argument(text);
      }
    }
  } catch (const std::logic_error&) {
    throw std::invalid_argument("malformed range '" + text + "', expected A or A..B");
  }
  return r;
}

/// Output stream: the file named by `path`, or `fallback` when path is empty.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback, bool binary = false) {
    if (path.empty() || path == "-") {
      stream_ = &fallback;
      return;
    }
    file_ = std::make_unique<std::ofstream>(path, binary ? std::ios::binary : std::ios::out);
    if (!*file_) {
      throw std::runtime_error("cannot open '" + path + "' for writing");
    }
    stream_ = file_.get();
  }
  std::ostream& get() { return *stream_; }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* stream_ = nullptr;
};

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open '" + path + "'");
  }
  return in;
}

class StageLog {
 public:
  explicit StageLog(std::ostream& err) : err_(err), start_(std::chrono::steady_clock::now()) {}
  void operator()(const std::string& stage) {
    const double t = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    err_ << "[dplane " << std::fixed << std::setprecision(2) << t << "s] " << stage << '\n';
    err_.unsetf(std::ios::floatfield);
  }

 private:
  std::ostream& err_;
  std::chrono::steady_clock::time_point start_;
};

SamplingScheme parse_scheme(const std::string& s) {
  if (s == "haar") {
    return SamplingScheme::haar;
  }
  if (s == "design") {
    return SamplingScheme::rotated_design;
  }
  throw std::invalid_argument("unknown sampling scheme '" + s + "' (haar|design)");
}

void write_plane_header(std::ostream& os, int d, int n) {
  os << "plane";
  for (int j = 1; j <= d; ++j) {
    for (int i = 1; i <= n; ++i) {
      os << ",w" << j << '_' << i;
    }
  }
  for (int i = 1; i <= n; ++i) {
    os << ",o" << i;
  }
}

void write_plane_row(std::ostream& os, std::size_t index, const AffinePlane& plane) {
  os << index;
  const auto& w = plane.frame().columns();
  for (Eigen::Index j = 0; j < w.cols(); ++j) {
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
      os << ',' << format_double(w(i, j));
    }
  }
  for (Eigen::Index i = 0; i < plane.offset().size(); ++i) {
    os << ',' << format_double(plane.offset()(i));
  }
}

// --- subcommands ------------------------------------------------------------

struct ConstantsArgs {
  std::string d_range = "1";
  std::string n_range = "2";
  std::string output;
};

int cmd_constants(const ConstantsArgs& a, std::ostream& out) {
  const IntRange dr = parse_range(a.d_range);
  const IntRange nr = parse_range(a.n_range);
  if ((dr.lo <= dr.hi && dr.lo < 1) || (nr.lo <= nr.hi && (nr.lo < 2 || nr.hi > 64))) {
    throw std::invalid_argument("ranges must satisfy d >= 1 and 2 <= n <= 64");
  }
  Sink sink(a.output, out);
  auto& os = sink.get();
  os << "d,n,vol_grassmannian,vol_grassmannian_so,excess,fio_order,psdo_order,composed_order,dim_grassmannian,"
        "dim_affine_grassmannian,dim_lambda,dim_E,gamma_ratio_constant\n";
  for (int n = nr.lo; n <= nr.hi; ++n) {
    for (int d = dr.lo; d <= dr.hi; ++d) {
      if (d >= n) {
        continue;
      }
      const DimensionReport r = dimension_report(d, n);
      os << d << ',' << n << ',' << format_double(grassmannian_volume(d, n)) << ','
         << format_double(grassmannian_volume_so(d, n)) << ',' << r.excess << ',' << r.fio_order << ','
         << r.psdo_order << ',' << r.composed_order() << ',' << r.dim_grassmannian << ','
         << r.dim_affine_grassmannian << ',' << r.dim_lambda << ',' << r.dim_E << ','
         << format_double(gamma_ratio_constant(d, n)) << '\n';
    }
  }
  return 0;
}

struct SampleArgs {
  int d = 1;
  int n = 2;
  std::uint64_t count = 10;
  std::string output;
};

int cmd_sample(const SampleArgs& a, const RunConfig& base, std::ostream& out) {
  RunConfig cfg = base;
  cfg.d = a.d;
  cfg.n = a.n;
  cfg.validate();
  Sink sink(a.output, out);
  auto& os = sink.get();
  os << "sample";
  for (int j = 1; j <= a.d; ++j) {
    for (int i = 1; i <= a.n; ++i) {
      os << ",w" << j << '_' << i;
    }
  }
  os << '\n';
  Rng rng = make_stream(cfg.seed, 0);
  for (std::uint64_t k = 0; k < a.count; ++k) {
    const Frame frame = sample_subspace(a.d, a.n, rng);
    os << k;
    for (int j = 0; j < a.d; ++j) {
      for (int i = 0; i < a.n; ++i) {
        os << ',' << format_double(frame.columns()(i, j));
      }
    }
    os << '\n';
  }
  return 0;
}

struct ForwardArgs {
  std::string phantom;
  int d = 1;
  std::string planes;
  int angles = 0;
  int random = 0;
  int offsets = 1;
  double offset_max = 0.0;
  std::string output;
};

int cmd_forward(const ForwardArgs& a, const RunConfig& base, std::ostream& out, StageLog& log) {
  const GaussianMixture f = read_phantom(a.phantom);
  RunConfig cfg = base;
  cfg.d = a.d;
  cfg.n = f.ambient_dim();
  cfg.validate();
  const int sources = (a.planes.empty() ? 0 : 1) + (a.angles > 0 ? 1 : 0) + (a.random > 0 ? 1 : 0);
  if (sources != 1) {
    throw std::invalid_argument("give exactly one of --planes, --angles, --random");
  }
  if (a.offsets < 1) {
    throw std::invalid_argument("--offsets must be >= 1");
  }
  std::vector<AffinePlane> planes;
  auto offset_at = [&](int j) {
    return a.offsets == 1 ? 0.0 : -a.offset_max + 2.0 * a.offset_max * j / (a.offsets - 1);
  };
  if (!a.planes.empty()) {
    auto in = open_input(a.planes);
    planes = parse_planes(in, cfg.d, cfg.n);
  } else if (a.angles > 0) {
    if (cfg.n != 2 || cfg.d != 1) {
      throw std::invalid_argument("--angles is defined for lines in the plane (n=2, d=1)");
    }
    for (int k = 0; k < a.angles; ++k) {
      const double theta = std::numbers::pi * k / a.angles;
      Eigen::MatrixXd w(2, 1);
      w << std::cos(theta), std::sin(theta);
      const Eigen::Vector2d normal(-std::sin(theta), std::cos(theta));
      for (int j = 0; j < a.offsets; ++j) {
        planes.emplace_back(Frame(w), Eigen::VectorXd(offset_at(j) * normal));
      }
    }
  } else {
    Rng rng = make_stream(cfg.seed, 0);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    for (int k = 0; k < a.random; ++k) {
      Frame frame = sample_subspace(cfg.d, cfg.n, rng);
      const Eigen::MatrixXd comp = frame.complement_basis();
      Eigen::VectorXd coeff(comp.cols());
      for (Eigen::Index i = 0; i < coeff.size(); ++i) {
        coeff(i) = a.offset_max * unit(rng);
      }
      Eigen::VectorXd offset = complement_part(frame, comp * coeff);
      planes.emplace_back(std::move(frame), std::move(offset));
    }
  }
  log("evaluating " + std::to_string(planes.size()) + " planes");
  const SinogramFunction phi = forward_analytic(f, cfg.d);
  Sink sink(a.output, out);
  auto& os = sink.get();
  write_plane_header(os, cfg.d, cfg.n);
  os << ",value\n";
  for (std::size_t k = 0; k < planes.size(); ++k) {
    write_plane_row(os, k, planes[k]);
    os << ',' << format_double(phi(planes[k])) << '\n';
  }
  return 0;
}

struct BackprojectArgs {
  int d = 1;
  std::string phantom;
  std::optional<double> constant;
  int n = 0;
  std::string points;
  std::uint64_t samples = 10000;
  std::string output;
};

int cmd_backproject(const BackprojectArgs& a, const RunConfig& base, std::ostream& out, StageLog& log) {
  RunConfig cfg = base;
  cfg.d = a.d;
  cfg.samples = a.samples;
  std::optional<SinogramFunction> phi;
  if (!a.phantom.empty() == a.constant.has_value()) {
    throw std::invalid_argument("give exactly one of --phantom and --constant");
  }
  if (!a.phantom.empty()) {
    const GaussianMixture f = read_phantom(a.phantom);
    cfg.n = f.ambient_dim();
    cfg.validate();
    phi.emplace(forward_analytic(f, cfg.d));
  } else {
    cfg.n = a.n;
    cfg.validate();
    phi.emplace(SinogramFunction::constant(cfg.d, cfg.n, *a.constant));
  }
  auto in = open_input(a.points);
  const std::vector<Eigen::VectorXd> points = parse_points(in, cfg.n);
  log("backprojecting at " + std::to_string(points.size()) + " points");
  Sink sink(a.output, out);
  auto& os = sink.get();
  for (int i = 1; i <= cfg.n; ++i) {
    os << 'x' << i << ',';
  }
  os << "value,std_error,samples\n";
  for (std::size_t k = 0; k < points.size(); ++k) {
    const McEstimate e = backproject_mc(*phi, points[k], cfg.samples, derive_seed(cfg.seed, k), cfg.threads);
    for (Eigen::Index i = 0; i < points[k].size(); ++i) {
      os << format_double(points[k](i)) << ',';
    }
    os << format_double(e.value) << ',' << format_double(e.std_error) << ',' << e.samples << '\n';
  }
  return 0;
}

struct SymbolArgs {
  int d = 1;
  int n = 2;
  SymbolOptions options;
  std::string scheme = "haar";
  std::string csv;
  std::string summary;
};

int cmd_symbol(SymbolArgs a, const RunConfig& base, std::ostream& out, StageLog& log) {
  RunConfig cfg = base;
  cfg.d = a.d;
  cfg.n = a.n;
  cfg.samples = a.options.samples;
  cfg.validate();
  a.options.seed = cfg.seed;
  a.options.threads = cfg.threads;
  a.options.scheme = parse_scheme(a.scheme);
  log("measuring symbol on a " + std::to_string(a.options.size) + "^" + std::to_string(cfg.n) + " grid");
  const SymbolReport report = symbol_estimate_grid(cfg.d, cfg.n, a.options);
  log("writing report");
  if (!a.csv.empty()) {
    Sink sink(a.csv, out);
    write_symbol_csv(sink.get(), report);
  }
  Sink summary(a.summary, out);
  write_symbol_summary(summary.get(), report);
  return report.passed() ? 0 : kExitTolerance;
}

struct ReconstructArgs {
  std::string phantom;
  int d = 1;
  FbpOptions options;
  std::string mode = "calibrated";
  std::string scheme = "design";
  std::string output;
  std::string pgm;
  std::string summary;
};

int cmd_reconstruct(ReconstructArgs a, const RunConfig& base, std::ostream& out, StageLog& log) {
  const GaussianMixture f = read_phantom(a.phantom);
  RunConfig cfg = base;
  cfg.d = a.d;
  cfg.n = f.ambient_dim();
  cfg.samples = a.options.samples * static_cast<std::uint64_t>(std::max(1, a.options.batches));
  cfg.validate();
  if (a.mode == "paper") {
    a.options.mode = ConstantMode::paper;
  } else if (a.mode == "calibrated") {
    a.options.mode = ConstantMode::calibrated;
  } else if (a.mode == "explicit") {
    a.options.mode = ConstantMode::explicit_value;
  } else {
    throw std::invalid_argument("unknown mode '" + a.mode + "' (paper|calibrated|explicit)");
  }
  a.options.scheme = parse_scheme(a.scheme);
  a.options.seed = cfg.seed;
  a.options.threads = cfg.threads;
  const double kappa = fbp_constant(cfg.d, cfg.n, a.options);
  log("backprojecting and filtering");
  const GridField rec = fbp_reconstruct(forward_analytic(f, cfg.d), a.options);
  const double err = relative_l2_error(rec, sample_field(f, rec));
  log("writing outputs");
  if (!a.output.empty()) {
    Sink sink(a.output, out, true);
    write_grid_field(sink.get(), rec);
  }
  if (!a.pgm.empty()) {
    Sink sink(a.pgm, out, true);
    write_pgm_slice(sink.get(), rec);
  }
  Sink summary(a.summary, out);
  auto& os = summary.get();
  os << "d," << cfg.d << "\nn," << cfg.n << "\nmode," << a.mode << "\nkappa," << format_double(kappa)
     << "\nrelative_l2_error," << format_double(err) << '\n';
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"d-plane transform toolkit: forward transform, backprojection, symbol measurement, FBP"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Expand all help");

  RunConfig base;
  base.threads = default_thread_count();
  app.add_option("--seed", base.seed, "Seed for all randomness")->capture_default_str();
  app.fallthrough();
  app.add_option("--threads", base.threads, "Worker threads (default from DPLANE_THREADS)")->capture_default_str();

  ConstantsArgs constants;
  auto* c = app.add_subcommand("constants", "CSV table of volumes, orders and dimensions");
  c->add_option("--d", constants.d_range, "Range A or A..B")->capture_default_str();
  c->add_option("--n", constants.n_range, "Range A or A..B")->capture_default_str();
  c->add_option("-o,--output", constants.output, "Output CSV (default stdout)");

  SampleArgs sample;
  auto* s = app.add_subcommand("sample", "Haar-random subspaces as CSV");
  s->add_option("--d", sample.d)->required();
  s->add_option("--n", sample.n)->required();
  s->add_option("--count", sample.count)->capture_default_str();
  s->add_option("-o,--output", sample.output);

  ForwardArgs forward;
  auto* fw = app.add_subcommand("forward", "Evaluate R_d f of a phantom on planes");
  fw->add_option("--phantom", forward.phantom, "Phantom file")->required();
  fw->add_option("--d", forward.d, "Plane dimension")->required();
  fw->add_option("--planes", forward.planes, "Plane list file");
  fw->add_option("--angles", forward.angles, "Angular grid of lines (n=2, d=1)");
  fw->add_option("--random", forward.random, "Number of Haar-random planes");
  fw->add_option("--offsets", forward.offsets, "Offsets per direction (grid modes)")->capture_default_str();
  fw->add_option("--offset-max", forward.offset_max, "Largest offset (grid modes)")->capture_default_str();
  fw->add_option("-o,--output", forward.output);

  BackprojectArgs back;
  auto* bp = app.add_subcommand("backproject", "Monte Carlo R_d^* phi at points");
  bp->add_option("--d", back.d)->required();
  bp->add_option("--phantom", back.phantom, "phi = R_d f for this phantom");
  bp->add_option("--constant", back.constant, "phi identically equal to this value");
  bp->add_option("--n", back.n, "Ambient dimension (with --constant)");
  bp->add_option("--points", back.points, "Points file, n coordinates per line")->required();
  bp->add_option("--samples", back.samples)->capture_default_str();
  bp->add_option("-o,--output", back.output);

  SymbolArgs symbol;
  auto* se = app.add_subcommand("symbol-estimate", "Measure the symbol constant of R*R");
  se->add_option("--d", symbol.d)->required();
  se->add_option("--n", symbol.n)->required();
  se->add_option("--size", symbol.options.size, "Grid points per axis")->capture_default_str();
  se->add_option("--spacing", symbol.options.spacing)->capture_default_str();
  se->add_option("--width", symbol.options.width, "Probe width (0: 1.6 * spacing)")->capture_default_str();
  se->add_option("--samples", symbol.options.samples)->capture_default_str();
  se->add_option("--batches", symbol.options.batches)->capture_default_str();
  se->add_option("--shells", symbol.options.shells)->capture_default_str();
  se->add_option("--tolerance", symbol.options.tolerance, "0: 0.02 for n=2, else 0.05")->capture_default_str();
  se->add_option("--scheme", symbol.scheme, "haar|design")->capture_default_str();
  se->add_option("--csv", symbol.csv, "Per-shell table");
  se->add_option("--summary", symbol.summary, "Summary (default stdout)");

  ReconstructArgs recon;
  auto* rc = app.add_subcommand("reconstruct", "Filtered backprojection of a phantom");
  rc->add_option("--phantom", recon.phantom)->required();
  rc->add_option("--d", recon.d)->required();
  rc->add_option("--size", recon.options.size)->capture_default_str();
  rc->add_option("--spacing", recon.options.spacing)->capture_default_str();
  rc->add_option("--mode", recon.mode, "paper|calibrated|explicit")->capture_default_str();
  rc->add_option("--kappa", recon.options.kappa, "Constant for --mode explicit");
  rc->add_option("--samples", recon.options.samples, "Subspaces per batch")->capture_default_str();
  rc->add_option("--batches", recon.options.batches)->capture_default_str();
  rc->add_option("--padding", recon.options.padding)->capture_default_str();
  rc->add_option("--scheme", recon.scheme, "haar|design")->capture_default_str();
  rc->add_option("-o,--output", recon.output, "GridField file");
  rc->add_option("--pgm", recon.pgm, "PGM slice");
  rc->add_option("--summary", recon.summary, "Summary (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  StageLog log(err);
  try {
    if (c->parsed()) {
      return cmd_constants(constants, out);
    }
    if (s->parsed()) {
      return cmd_sample(sample, base, out);
    }
    if (fw->parsed()) {
      return cmd_forward(forward, base, out, log);
    }
    if (bp->parsed()) {
      return cmd_backproject(back, base, out, log);
    }
    if (se->parsed()) {
      return cmd_symbol(symbol, base, out, log);
    }
    if (rc->parsed()) {
      return cmd_reconstruct(recon, base, out, log);
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

}  // namespace dplane::cli
