#include "dplane/transform.hpp"

#include "dplane/constants.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace dplane {

namespace {

constexpr std::uint64_t kChunkSamples = 1024;
constexpr std::uint64_t kPlaneSideStreams = std::uint64_t{1} << 40;
constexpr std::uint64_t kPointSideStreams = std::uint64_t{2} << 40;

struct RunningStats {
  std::uint64_t count = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    ++count;
    const double delta = x - mean;
    mean += delta / static_cast<double>(count);
    m2 += delta * (x - mean);
  }

  void merge(const RunningStats& other) {
    if (other.count == 0) {
      return;
    }
    if (count == 0) {
      *this = other;
      return;
    }
    const double total = static_cast<double>(count + other.count);
    const double delta = other.mean - mean;
    mean += delta * static_cast<double>(other.count) / total;
    m2 += other.m2 + delta * delta * static_cast<double>(count) * static_cast<double>(other.count) / total;
    count += other.count;
  }

  McEstimate scaled(double factor, std::uint64_t seed) const {
    McEstimate e;
    e.value = factor * mean;
    e.samples = count;
    e.seed = seed;
    if (count > 1) {
      e.std_error = std::abs(factor) * std::sqrt(m2 / static_cast<double>(count - 1) / static_cast<double>(count));
    }
    return e;
  }
};

/// Runs `per_sample(rng, stats)` for `samples` draws split into fixed chunks,
/// chunk c using substream stream_base + c, and merges the chunks in order.
template <typename PerChunk>
RunningStats chunked_samples(std::uint64_t samples, std::uint64_t seed, std::uint64_t stream_base, int threads,
                             PerChunk&& per_chunk) {
  const std::uint64_t chunks = (samples + kChunkSamples - 1) / kChunkSamples;
  std::vector<RunningStats> stats(static_cast<std::size_t>(chunks));
  parallel_for(static_cast<std::size_t>(chunks), threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t c = begin; c < end; ++c) {
      Rng rng = make_stream(seed, stream_base + c);
      const std::uint64_t first = c * kChunkSamples;
      const std::uint64_t count = std::min(kChunkSamples, samples - first);
      per_chunk(rng, count, stats[c]);
    }
  });
  RunningStats total;
  for (const auto& s : stats) {
    total.merge(s);
  }
  return total;
}

void require_samples(std::uint64_t samples) {
  if (samples < 2) {
    throw std::invalid_argument("at least two Monte Carlo samples are required");
  }
}

/// Tensor trapezoid rule on [-L, L]^k with m nodes per axis.
struct TensorRule {
  Eigen::MatrixXd nodes;    // k x m^k
  Eigen::VectorXd weights;  // m^k
  std::vector<bool> boundary;
};

TensorRule tensor_trapezoid(int k, int m, double half_width) {
  if (m < 2) {
    throw std::invalid_argument("quadrature needs at least two points per axis");
  }
  const double h = 2.0 * half_width / (m - 1);
  std::size_t total = 1;
  for (int a = 0; a < k; ++a) {
    total *= static_cast<std::size_t>(m);
  }
  TensorRule rule{Eigen::MatrixXd(k, static_cast<Eigen::Index>(total)),
                  Eigen::VectorXd(static_cast<Eigen::Index>(total)), std::vector<bool>(total)};
  std::vector<int> idx(static_cast<std::size_t>(k), 0);
  for (std::size_t p = 0; p < total; ++p) {
    double w = 1.0;
    bool edge = false;
    for (int a = 0; a < k; ++a) {
      const int i = idx[static_cast<std::size_t>(a)];
      rule.nodes(a, static_cast<Eigen::Index>(p)) = -half_width + h * i;
      const bool end = i == 0 || i == m - 1;
      w *= end ? 0.5 * h : h;
      edge = edge || end;
    }
    rule.weights(static_cast<Eigen::Index>(p)) = w;
    rule.boundary[p] = edge;
    for (int a = k; a-- > 0;) {
      if (++idx[static_cast<std::size_t>(a)] < m) {
        break;
      }
      idx[static_cast<std::size_t>(a)] = 0;
    }
  }
  return rule;
}

}  // namespace

SinogramFunction::SinogramFunction(int d, int n, Provenance provenance, PointFn point, BatchFn batch)
    : d_(d), n_(n), provenance_(provenance), point_(std::move(point)), batch_(std::move(batch)) {
  if (n < 2 || d < 1 || d >= n) {
    throw std::invalid_argument("SinogramFunction: need 1 <= d < n");
  }
  if (!point_) {
    throw std::invalid_argument("SinogramFunction: missing evaluator");
  }
}

SinogramFunction SinogramFunction::constant(int d, int n, double value) {
  return SinogramFunction(
      d, n, Provenance::custom, [value](const Frame&, const Eigen::VectorXd&) { return value; },
      [value](const Frame&, const Eigen::Ref<const Eigen::MatrixXd>&, Eigen::Ref<Eigen::VectorXd> out) {
        out.setConstant(value);
      });
}

double SinogramFunction::operator()(const AffinePlane& plane) const {
  if (plane.ambient_dim() != n_ || plane.sub_dim() != d_) {
    throw std::invalid_argument("SinogramFunction: plane has the wrong dimensions");
  }
  return point_(plane.frame(), plane.offset());
}

double SinogramFunction::operator()(const Frame& frame, const Eigen::VectorXd& offset) const {
  return point_(frame, offset);
}

void SinogramFunction::evaluate(const Frame& frame, const Eigen::Ref<const Eigen::MatrixXd>& offsets,
                                Eigen::Ref<Eigen::VectorXd> out) const {
  if (batch_) {
    batch_(frame, offsets, out);
    return;
  }
  Eigen::VectorXd column(offsets.rows());
  for (Eigen::Index i = 0; i < offsets.cols(); ++i) {
    column = offsets.col(i);
    out(i) = point_(frame, column);
  }
}

SinogramFunction SinogramFunction::scaled(double factor) const {
  const SinogramFunction base = *this;
  BatchFn batch = [base, factor](const Frame& frame, const Eigen::Ref<const Eigen::MatrixXd>& offsets,
                                 Eigen::Ref<Eigen::VectorXd> out) {
    base.evaluate(frame, offsets, out);
    out *= factor;
  };
  return SinogramFunction(
      d_, n_, provenance_,
      [base, factor](const Frame& frame, const Eigen::VectorXd& offset) { return factor * base(frame, offset); },
      std::move(batch));
}

SinogramFunction forward_analytic(const GaussianMixture& f, int d) {
  const int n = f.ambient_dim();
  if (d < 1 || d >= n) {
    throw std::invalid_argument("forward_analytic: need 1 <= d < n");
  }
  return SinogramFunction(
      d, n, Provenance::analytic,
      [f](const Frame& frame, const Eigen::VectorXd& offset) {
        Eigen::VectorXd out(1);
        dplane_closed_form_batch(f, frame, offset, out);
        return out(0);
      },
      [f](const Frame& frame, const Eigen::Ref<const Eigen::MatrixXd>& offsets, Eigen::Ref<Eigen::VectorXd> out) {
        dplane_closed_form_batch(f, frame, offsets, out);
      });
}

double forward_grid(const GridField& field, const AffinePlane& plane, double step, double radius) {
  if (!(step > 0.0) || !(radius > 0.0)) {
    throw std::invalid_argument("forward_grid: step and radius must be positive");
  }
  if (plane.ambient_dim() != field.dim()) {
    throw std::invalid_argument("forward_grid: dimension mismatch");
  }
  const int d = plane.sub_dim();
  const int intervals = std::max(1, static_cast<int>(std::lround(2.0 * radius / step)));
  const TensorRule rule = tensor_trapezoid(d, intervals + 1, radius);
  const Eigen::MatrixXd pts = (plane.frame().columns() * rule.nodes).colwise() + plane.offset();
  double sum = 0.0;
  for (Eigen::Index i = 0; i < pts.cols(); ++i) {
    sum += rule.weights(i) * field.interpolate(pts.col(i));
  }
  return sum;
}

SinogramFunction forward_grid_sinogram(const GridField& field, int d, double step, double radius) {
  return SinogramFunction(d, field.dim(), Provenance::grid,
                          [field, step, radius](const Frame& frame, const Eigen::VectorXd& offset) {
                            return forward_grid(field, AffinePlane(frame, complement_part(frame, offset)), step,
                                                radius);
                          });
}

McEstimate backproject_mc(const SinogramFunction& phi, const Eigen::VectorXd& x, std::uint64_t samples,
                          std::uint64_t seed, int threads) {
  require_samples(samples);
  const int d = phi.sub_dim();
  const int n = phi.ambient_dim();
  if (x.size() != n) {
    throw std::invalid_argument("backproject_mc: point dimension mismatch");
  }
  const RunningStats stats =
      chunked_samples(samples, seed, 0, threads, [&](Rng& rng, std::uint64_t count, RunningStats& out) {
        Eigen::VectorXd offset(n);
        for (std::uint64_t i = 0; i < count; ++i) {
          const Frame frame = sample_subspace(d, n, rng);
          offset = x - frame.columns() * (frame.columns().transpose() * x);
          out.add(phi(frame, offset));
        }
      });
  return stats.scaled(grassmannian_volume(d, n), seed);
}

McEstimate normal_operator(const GaussianMixture& f, int d, const Eigen::VectorXd& x, std::uint64_t samples,
                           std::uint64_t seed, int threads) {
  return backproject_mc(forward_analytic(f, d), x, samples, seed, threads);
}

bool has_rotated_design(int d, int n) { return (n == 2 && d == 1) || (n == 3 && (d == 1 || d == 2)); }

namespace {

/// K well-spread subspaces: equispaced lines for n = 2, and for n = 3 lines
/// (d = 1) or planes given by their normals (d = 2) through a Fibonacci
/// lattice on the upper hemisphere.
std::vector<Eigen::MatrixXd> design_frames(int d, int n, std::size_t count) {
  std::vector<Eigen::MatrixXd> out;
  out.reserve(count);
  const double k_total = static_cast<double>(count);
  for (std::size_t k = 0; k < count; ++k) {
    const double i = static_cast<double>(k) + 0.5;
    if (n == 2) {
      const double theta = std::numbers::pi * i / k_total;
      Eigen::MatrixXd w(2, 1);
      w << std::cos(theta), std::sin(theta);
      out.push_back(w);
      continue;
    }
    const double z = i / k_total;
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = i * std::numbers::pi * (3.0 - std::sqrt(5.0));
    Eigen::Vector3d v(r * std::cos(phi), r * std::sin(phi), z);
    if (d == 1) {
      out.emplace_back(v);
    } else {
      out.push_back(reflector_to<double>(Eigen::VectorXd(v)).leftCols(2));
    }
  }
  return out;
}

}  // namespace

FramePool make_frame_pool(int d, int n, std::size_t per_batch, int batches, SamplingScheme scheme,
                          std::uint64_t seed) {
  if (n < 2 || d < 1 || d >= n) {
    throw std::invalid_argument("make_frame_pool: need 1 <= d < n");
  }
  if (batches < 1 || per_batch < 1) {
    throw std::invalid_argument("make_frame_pool: need at least one batch and one sample per batch");
  }
  FramePool pool{d, n, batches, per_batch, {}};
  pool.frames.reserve(per_batch * static_cast<std::size_t>(batches));
  const bool design = scheme == SamplingScheme::rotated_design && has_rotated_design(d, n);
  const std::vector<Eigen::MatrixXd> base = design ? design_frames(d, n, per_batch) : std::vector<Eigen::MatrixXd>{};
  for (int b = 0; b < batches; ++b) {
    Rng rng = make_stream(seed, static_cast<std::uint64_t>(b));
    if (design) {
      const Eigen::MatrixXd rotation = haar_orthogonal(n, rng);
      for (const auto& w : base) {
        pool.frames.emplace_back(rotation * w);
      }
    } else {
      for (std::size_t k = 0; k < per_batch; ++k) {
        pool.frames.push_back(sample_subspace(d, n, rng));
      }
    }
  }
  return pool;
}

Eigen::VectorXd PooledBackprojection::mean() const { return batch_values.rowwise().mean(); }

Eigen::VectorXd PooledBackprojection::std_error() const {
  const auto b = batch_values.cols();
  if (b < 2) {
    return Eigen::VectorXd::Zero(batch_values.rows());
  }
  const Eigen::MatrixXd centered = batch_values.colwise() - mean();
  return (centered.rowwise().squaredNorm() / static_cast<double>((b - 1) * b)).cwiseSqrt();
}

PooledBackprojection backproject_pool(const SinogramFunction& phi, const FramePool& pool,
                                      const Eigen::MatrixXd& points, int threads) {
  if (phi.sub_dim() != pool.d || phi.ambient_dim() != pool.n || points.rows() != pool.n) {
    throw std::invalid_argument("backproject_pool: dimension mismatch");
  }
  constexpr Eigen::Index kBlock = 1024;
  const Eigen::Index total = points.cols();
  const std::size_t blocks = static_cast<std::size_t>((total + kBlock - 1) / kBlock);
  const double scale = grassmannian_volume(pool.d, pool.n) / static_cast<double>(pool.per_batch);
  PooledBackprojection out{Eigen::MatrixXd::Zero(total, pool.batches)};

  parallel_for(blocks, threads, [&](std::size_t begin, std::size_t end) {
    Eigen::MatrixXd coords;
    Eigen::MatrixXd offsets;
    Eigen::VectorXd values;
    Eigen::VectorXd acc;
    for (std::size_t blk = begin; blk < end; ++blk) {
      const Eigen::Index first = static_cast<Eigen::Index>(blk) * kBlock;
      const Eigen::Index cols = std::min(kBlock, total - first);
      const auto pts = points.middleCols(first, cols);
      values.resize(cols);
      acc.resize(cols);
      for (int b = 0; b < pool.batches; ++b) {
        acc.setZero();
        for (std::size_t k = 0; k < pool.per_batch; ++k) {
          const Frame& frame = pool.frames[static_cast<std::size_t>(b) * pool.per_batch + k];
          coords.noalias() = frame.columns().transpose() * pts;
          offsets = pts;
          offsets.noalias() -= frame.columns() * coords;
          phi.evaluate(frame, offsets, values);
          acc += values;
        }
        out.batch_values.col(b).segment(first, cols) = scale * acc;
      }
    }
  });
  return out;
}

double AdjointnessResult::combined_std_error() const {
  return std::hypot(plane_side.std_error, point_side.std_error);
}

bool AdjointnessResult::agree(double k) const {
  return std::abs(plane_side.value - point_side.value) <= k * combined_std_error();
}

AdjointnessResult adjointness_check(const GaussianMixture& f, const SinogramFunction& phi,
                                    const AdjointnessOptions& options) {
  require_samples(options.samples);
  const int d = phi.sub_dim();
  const int n = phi.ambient_dim();
  if (f.ambient_dim() != n) {
    throw std::invalid_argument("adjointness_check: f and phi disagree on n");
  }
  const double vol = grassmannian_volume(d, n);
  const SinogramFunction rf = forward_analytic(f, d);
  const int m = options.points_per_axis;

  struct Side {
    RunningStats stats;
    double boundary = 0.0;
    double total = 0.0;
  };
  auto check_box = [](const Side& s, const char* which) {
    if (s.total > 0.0 && s.boundary > 1e-6 * s.total) {
      throw std::domain_error(std::string("adjointness_check: quadrature box too small on the ") + which +
                              " side");
    }
  };
  // Each chunk of subspaces comes from its own substream; per_chunk fills one
  // integral per subspace and the chunks are merged in order.
  auto run = [&](std::uint64_t stream_base, auto&& per_chunk) {
    const std::uint64_t chunks = (options.samples + kChunkSamples - 1) / kChunkSamples;
    std::vector<Side> parts(static_cast<std::size_t>(chunks));
    parallel_for(static_cast<std::size_t>(chunks), options.threads, [&](std::size_t begin, std::size_t end) {
      std::vector<Frame> frames;
      std::vector<double> integrals;
      for (std::size_t c = begin; c < end; ++c) {
        Rng rng = make_stream(options.seed, stream_base + c);
        const std::uint64_t count = std::min(kChunkSamples, options.samples - c * kChunkSamples);
        frames.clear();
        for (std::uint64_t i = 0; i < count; ++i) {
          frames.push_back(sample_subspace(d, n, rng));
        }
        integrals.assign(frames.size(), 0.0);
        per_chunk(frames, integrals, parts[c]);
        for (double v : integrals) {
          parts[c].stats.add(v);
        }
      }
    });
    Side total;
    for (const auto& p : parts) {
      total.stats.merge(p.stats);
      total.boundary += p.boundary;
      total.total += p.total;
    }
    return total;
  };
  // Adds sum_i weights(i) * a(i) to `integral` and tracks the absolute mass on
  // the box boundary.
  auto accumulate = [](const Eigen::ArrayXd& integrand, const Eigen::ArrayXd& edge, double& integral, Side& side) {
    integral += integrand.sum();
    const Eigen::ArrayXd mass = integrand.abs();
    side.total += mass.sum();
    side.boundary += (mass * edge).sum();
  };
  auto edge_mask = [](const TensorRule& rule) {
    Eigen::ArrayXd edge(rule.weights.size());
    for (Eigen::Index i = 0; i < edge.size(); ++i) {
      edge(i) = rule.boundary[static_cast<std::size_t>(i)] ? 1.0 : 0.0;
    }
    return edge;
  };

  // G(d,n) side: vol * E_sigma[ int_{sigma^perp} phi * R_d f dx'' ].
  const TensorRule perp_rule = tensor_trapezoid(n - d, m, options.half_width);
  const Eigen::ArrayXd perp_edge = edge_mask(perp_rule);
  const Side plane = run(kPlaneSideStreams, [&](const std::vector<Frame>& frames, std::vector<double>& integrals,
                                               Side& side) {
    Eigen::MatrixXd offsets;
    Eigen::VectorXd a(perp_rule.weights.size());
    Eigen::VectorXd b(perp_rule.weights.size());
    for (std::size_t k = 0; k < frames.size(); ++k) {
      offsets.noalias() = frames[k].complement_basis() * perp_rule.nodes;
      phi.evaluate(frames[k], offsets, a);
      rf.evaluate(frames[k], offsets, b);
      accumulate(perp_rule.weights.array() * a.array() * b.array(), perp_edge, integrals[k], side);
    }
  });

  // R^n side: int f(x) vol * E_sigma[ phi(sigma, x - pi_sigma x) ] dx, swept
  // over node blocks so the working set stays in cache.
  const TensorRule box = tensor_trapezoid(n, m, options.half_width);
  const Eigen::ArrayXd box_edge = edge_mask(box);
  Eigen::VectorXd weighted_f(box.weights.size());
  for (Eigen::Index i = 0; i < weighted_f.size(); ++i) {
    weighted_f(i) = box.weights(i) * eval(f, box.nodes.col(i));
  }
  const Side point = run(kPointSideStreams, [&](const std::vector<Frame>& frames, std::vector<double>& integrals,
                                               Side& side) {
    constexpr Eigen::Index kBlock = 1024;
    const Eigen::Index total = box.nodes.cols();
    Eigen::MatrixXd coords;
    Eigen::MatrixXd offsets;
    Eigen::VectorXd a;
    for (Eigen::Index first = 0; first < total; first += kBlock) {
      const Eigen::Index cols = std::min(kBlock, total - first);
      const auto nodes = box.nodes.middleCols(first, cols);
      a.resize(cols);
      for (std::size_t k = 0; k < frames.size(); ++k) {
        coords.noalias() = frames[k].columns().transpose() * nodes;
        offsets = nodes;
        offsets.noalias() -= frames[k].columns() * coords;
        phi.evaluate(frames[k], offsets, a);
        accumulate(weighted_f.segment(first, cols).array() * a.array(), box_edge.segment(first, cols), integrals[k],
                   side);
      }
    }
  });

  check_box(plane, "plane");
  check_box(point, "point");
  return {plane.stats.scaled(vol, options.seed), point.stats.scaled(vol, options.seed)};
}

}  // namespace dplane
