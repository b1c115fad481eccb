#include "dplane/grid_field.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace dplane {

GridField::GridField(std::vector<int> dims, double spacing, Eigen::VectorXd origin)
    : GridField(dims, spacing, origin, Eigen::VectorXd()) {}

GridField::GridField(std::vector<int> dims, double spacing, Eigen::VectorXd origin, Eigen::VectorXd values)
    : dims_(std::move(dims)), spacing_(spacing), origin_(std::move(origin)), values_(std::move(values)) {
  if (dims_.empty()) {
    throw std::invalid_argument("GridField: need at least one axis");
  }
  std::size_t total = 1;
  for (int s : dims_) {
    if (s < 8 || s % 2 != 0) {
      throw std::invalid_argument("GridField: sizes must be even and >= 8, got " + std::to_string(s));
    }
    total *= static_cast<std::size_t>(s);
  }
  if (!(spacing_ > 0.0) || !std::isfinite(spacing_)) {
    throw std::invalid_argument("GridField: spacing must be positive");
  }
  if (origin_.size() != static_cast<Eigen::Index>(dims_.size()) || !origin_.allFinite()) {
    throw std::invalid_argument("GridField: origin dimension mismatch");
  }
  if (values_.size() == 0) {
    values_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(total));
  }
  if (values_.size() != static_cast<Eigen::Index>(total)) {
    throw std::invalid_argument("GridField: value count does not match dims");
  }
  if (!values_.allFinite()) {
    throw std::invalid_argument("GridField: non-finite value");
  }
}

GridField GridField::centered(int n, int size, double spacing) {
  if (n < 1) {
    throw std::invalid_argument("GridField::centered: n must be positive");
  }
  return GridField(std::vector<int>(static_cast<std::size_t>(n), size), spacing,
                   Eigen::VectorXd::Constant(n, -0.5 * size * spacing));
}

std::vector<int> GridField::multi_index(std::size_t flat) const {
  std::vector<int> idx(dims_.size());
  for (std::size_t a = dims_.size(); a-- > 0;) {
    idx[a] = static_cast<int>(flat % static_cast<std::size_t>(dims_[a]));
    flat /= static_cast<std::size_t>(dims_[a]);
  }
  return idx;
}

std::size_t GridField::flat_index(const std::vector<int>& index) const {
  std::size_t flat = 0;
  for (std::size_t a = 0; a < dims_.size(); ++a) {
    flat = flat * static_cast<std::size_t>(dims_[a]) + static_cast<std::size_t>(index[a]);
  }
  return flat;
}

Eigen::VectorXd GridField::point(std::size_t flat) const {
  const auto idx = multi_index(flat);
  Eigen::VectorXd x(dim());
  for (int a = 0; a < dim(); ++a) {
    x(a) = origin_(a) + spacing_ * idx[static_cast<std::size_t>(a)];
  }
  return x;
}

Eigen::MatrixXd GridField::points() const { return points(0, size()); }

Eigen::MatrixXd GridField::points(std::size_t begin, std::size_t end) const {
  Eigen::MatrixXd p(dim(), static_cast<Eigen::Index>(end - begin));
  if (end <= begin) {
    return p;
  }
  auto idx = multi_index(begin);
  for (std::size_t k = begin; k < end; ++k) {
    const auto col = static_cast<Eigen::Index>(k - begin);
    for (int a = 0; a < dim(); ++a) {
      p(a, col) = origin_(a) + spacing_ * idx[static_cast<std::size_t>(a)];
    }
    for (std::size_t a = dims_.size(); a-- > 0;) {
      if (++idx[a] < dims_[a]) {
        break;
      }
      idx[a] = 0;
    }
  }
  return p;
}

double GridField::interpolate(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  const int n = dim();
  if (x.size() != n) {
    throw std::invalid_argument("GridField::interpolate: dimension mismatch");
  }
  std::vector<int> base(static_cast<std::size_t>(n));
  std::vector<double> frac(static_cast<std::size_t>(n));
  for (int a = 0; a < n; ++a) {
    const double u = (x(a) - origin_(a)) / spacing_;
    const double fl = std::floor(u);
    if (!(fl >= 0.0) || fl > dims_[static_cast<std::size_t>(a)] - 1) {
      return 0.0;
    }
    base[static_cast<std::size_t>(a)] = static_cast<int>(fl);
    frac[static_cast<std::size_t>(a)] = u - fl;
  }
  double sum = 0.0;
  std::vector<int> corner(static_cast<std::size_t>(n));
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    double weight = 1.0;
    bool inside = true;
    for (int a = 0; a < n; ++a) {
      const auto ua = static_cast<std::size_t>(a);
      const bool up = (mask >> a) & 1u;
      corner[ua] = base[ua] + (up ? 1 : 0);
      weight *= up ? frac[ua] : 1.0 - frac[ua];
      if (corner[ua] >= dims_[ua]) {
        inside = false;
      }
    }
    if (weight == 0.0) {
      continue;
    }
    if (inside) {
      sum += weight * values_(static_cast<Eigen::Index>(flat_index(corner)));
    }
  }
  return sum;
}

GridField GridField::with_values(Eigen::VectorXd values) const {
  return GridField(dims_, spacing_, origin_, std::move(values));
}

}  // namespace dplane
