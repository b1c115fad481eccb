// Uniformly sampled scalar field on an n-dimensional box.
#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

namespace dplane {

/// Samples f(origin + h * (i_0, ..., i_{n-1})) stored with the first axis
/// slowest. Sizes are even and at least 8.
class GridField {
 public:
  GridField(std::vector<int> dims, double spacing, Eigen::VectorXd origin);
  GridField(std::vector<int> dims, double spacing, Eigen::VectorXd origin, Eigen::VectorXd values);

  /// size^n grid with the origin placed so that the point 0 is the sample at
  /// index size/2 along every axis.
  static GridField centered(int n, int size, double spacing);

  int dim() const { return static_cast<int>(dims_.size()); }
  const std::vector<int>& dims() const { return dims_; }
  double spacing() const { return spacing_; }
  const Eigen::VectorXd& origin() const { return origin_; }
  const Eigen::VectorXd& values() const { return values_; }
  Eigen::VectorXd& values() { return values_; }
  std::size_t size() const { return static_cast<std::size_t>(values_.size()); }

  std::vector<int> multi_index(std::size_t flat) const;
  std::size_t flat_index(const std::vector<int>& index) const;
  Eigen::VectorXd point(std::size_t flat) const;
  /// All sample locations as an n x size() matrix.
  Eigen::MatrixXd points() const;
  /// Points for flat indices [begin, end).
  Eigen::MatrixXd points(std::size_t begin, std::size_t end) const;

  /// Multilinear interpolation; zero outside the sampled box.
  double interpolate(const Eigen::Ref<const Eigen::VectorXd>& x) const;

  /// Same geometry, new values.
  GridField with_values(Eigen::VectorXd values) const;

 private:
  std::vector<int> dims_;
  double spacing_;
  Eigen::VectorXd origin_;
  Eigen::VectorXd values_;
};

}  // namespace dplane
