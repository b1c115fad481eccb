#include "dplane/constants.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include <ostream>
#include <stdexcept>

namespace dplane {

Rational::Rational(std::int64_t num, std::int64_t den) : num_(num), den_(den) {
  if (den_ == 0) {
    throw std::invalid_argument("Rational: zero denominator");
  }
  if (den_ < 0) {
    num_ = -num_;
    den_ = -den_;
  }
  const std::int64_t g = std::gcd(num_, den_);
  if (g > 1) {
    num_ /= g;
    den_ /= g;
  }
}

std::string Rational::str() const {
  if (den_ == 1) {
    return std::to_string(num_);
  }
  return std::to_string(num_) + "/" + std::to_string(den_);
}

Rational operator+(Rational a, Rational b) {
  return {a.num_ * b.den_ + b.num_ * a.den_, a.den_ * b.den_};
}
Rational operator-(Rational a, Rational b) {
  return {a.num_ * b.den_ - b.num_ * a.den_, a.den_ * b.den_};
}
Rational operator*(Rational a, Rational b) { return {a.num_ * b.num_, a.den_ * b.den_}; }
Rational operator/(Rational a, Rational b) { return {a.num_ * b.den_, a.den_ * b.num_}; }

std::ostream& operator<<(std::ostream& os, const Rational& r) { return os << r.str(); }

double gamma_fn(double x) {
  if (!(x > 0.0) || !std::isfinite(x)) {
    throw std::domain_error("gamma_fn: argument must be positive and finite");
  }
  const double twice = 2.0 * x;
  if (twice == std::floor(twice) && x <= 170.0) {
    // Gamma(x) = (x-1)(x-2)...base * Gamma(base), base in {1/2, 1}.
    const bool half = std::fmod(twice, 2.0) != 0.0;
    double value = half ? std::sqrt(std::numbers::pi) : 1.0;
    for (double k = half ? 0.5 : 1.0; k < x; k += 1.0) {
      value *= k;
    }
    return value;
  }
  return std::tgamma(x);
}

double sphere_volume(int k) {
  if (k < 0) {
    throw std::invalid_argument("sphere_volume: k must be non-negative");
  }
  const double h = 0.5 * (k + 1);
  return 2.0 * std::pow(std::numbers::pi, h) / gamma_fn(h);
}

double so_volume(int n) {
  if (n < 1) {
    throw std::invalid_argument("so_volume: n must be positive");
  }
  double v = 1.0;
  for (int k = 1; k < n; ++k) {
    v *= std::pow(2.0, 0.5 * k) * sphere_volume(k);
  }
  return v;
}

namespace {

void require_dims(int d, int n, const char* what) {
  if (n < 2 || d < 1 || d >= n) {
    throw std::invalid_argument(std::string(what) + ": need 1 <= d < n, got d=" + std::to_string(d) +
                                " n=" + std::to_string(n));
  }
}

double grassmannian_volume_spheres(int d, int n) {
  double num = 1.0;
  for (int k = n - d; k <= n - 1; ++k) {
    num *= sphere_volume(k);
  }
  double den = 1.0;  // empty for d = 1
  for (int k = 1; k <= d - 1; ++k) {
    den *= sphere_volume(k);
  }
  return num / den;
}

}  // namespace

double grassmannian_volume_so(int d, int n) {
  require_dims(d, n, "grassmannian_volume_so");
  return so_volume(n) /
         (std::pow(2.0, 0.5 * d * (n - d)) * so_volume(d) * so_volume(n - d));
}

double grassmannian_volume(int d, int n) {
  require_dims(d, n, "grassmannian_volume");
  const double spheres = grassmannian_volume_spheres(d, n);
  const double so = grassmannian_volume_so(d, n);
  if (std::abs(spheres - so) > 1e-12 * std::abs(spheres)) {
    throw std::logic_error("grassmannian_volume: sphere-product and SO-quotient expressions disagree");
  }
  return spheres;
}

double gamma_ratio_constant(int d, int n) {
  require_dims(d, n, "gamma_ratio_constant");
  return std::pow(4.0 * std::numbers::pi, 0.5 * d) * gamma_fn(0.5 * n) / gamma_fn(0.5 * (n - d));
}

Rational DimensionReport::composed_order() const {
  return Rational(2) * fio_order + Rational(excess, 2);
}

DimensionReport dimension_report(int d, int n) {
  require_dims(d, n, "dimension_report");
  DimensionReport r;
  r.d = d;
  r.n = n;
  const std::int64_t dd = d;
  const std::int64_t nn = n;
  r.dim_grassmannian = dd * (nn - dd);
  r.dim_affine_grassmannian = (dd + 1) * (nn - dd);
  r.dim_lambda = r.dim_affine_grassmannian + nn;
  r.dim_E = 2 * nn + dd * (nn - dd - 1);
  r.excess = dd * (nn - dd - 1);
  r.fio_order = Rational(-dd * (nn - dd + 1), 4);
  r.psdo_order = Rational(-dd);
  return r;
}

bool dimension_identities_hold(const DimensionReport& r) {
  const std::int64_t d = r.d;
  const std::int64_t n = r.n;
  if (n < 2 || d < 1 || d >= n) {
    return false;
  }
  // dim T*G(d,n) = 2 dim G(d,n) is the codimension of the diagonal condition.
  const std::int64_t dim_cotangent_affine = 2 * r.dim_affine_grassmannian;
  const std::int64_t dim_product = 2 * r.dim_lambda;
  // dim E = dim T*R^n + dim G_{d,n-1}
  const std::int64_t dim_E = 2 * n + d * ((n - 1) - d);
  const std::int64_t excess = -dim_product + dim_cotangent_affine + dim_E;

  return r.dim_grassmannian == d * (n - d) && r.dim_affine_grassmannian == (d + 1) * (n - d) &&
         r.dim_lambda == (d + 1) * (n - d) + n && r.dim_E == dim_E && r.excess == excess &&
         r.excess >= 0 && r.dim_E == 2 * n + r.excess && r.fio_order == Rational(-d * (n - d + 1), 4) &&
         r.psdo_order == Rational(-d) && r.composed_order() == r.psdo_order;
}

}  // namespace dplane
