// Closed-form constants and integer invariants of the d-plane transform.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

namespace dplane {

/// Exact rational number with a positive denominator in lowest terms.
class Rational {
 public:
  constexpr Rational() = default;
  Rational(std::int64_t num, std::int64_t den = 1);

  std::int64_t num() const { return num_; }
  std::int64_t den() const { return den_; }
  double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }
  std::string str() const;

  friend Rational operator+(Rational a, Rational b);
  friend Rational operator-(Rational a, Rational b);
  friend Rational operator*(Rational a, Rational b);
  friend Rational operator/(Rational a, Rational b);
  friend bool operator==(const Rational&, const Rational&) = default;

 private:
  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

std::ostream& operator<<(std::ostream& os, const Rational& r);

/// Gamma function for x > 0. Integers and half-integers use exact recursion
/// from Gamma(1) = 1 and Gamma(1/2) = sqrt(pi).
double gamma_fn(double x);

/// Surface measure of the unit sphere S^k in R^{k+1}.
double sphere_volume(int k);

/// Volume of SO(n) under the bi-invariant metric induced by the Frobenius
/// embedding: prod_{k=1}^{n-1} 2^{k/2} vol(S^k).
double so_volume(int n);

/// vol(G_{d,n}) as vol(S^{n-1})...vol(S^{n-d}) / (vol(S^{d-1})...vol(S^1)).
/// Also evaluates the SO(n)-quotient expression and throws std::logic_error if
/// the two disagree by more than 1e-12 relative.
double grassmannian_volume(int d, int n);

/// The same volume as vol(SO(n)) / (2^{d(n-d)/2} vol(SO(d)) vol(SO(n-d))).
double grassmannian_volume_so(int d, int n);

/// (4 pi)^{d/2} Gamma(n/2) / Gamma((n-d)/2)
double gamma_ratio_constant(int d, int n);

struct DimensionReport {
  int d = 0;
  int n = 0;
  std::int64_t dim_grassmannian = 0;         // d(n-d)
  std::int64_t dim_affine_grassmannian = 0;  // (d+1)(n-d)
  std::int64_t dim_lambda = 0;               // (d+1)(n-d) + n
  std::int64_t dim_E = 0;                    // 2n + d(n-d-1)
  std::int64_t excess = 0;                   // d(n-d-1)
  Rational fio_order;                        // -d(n-d+1)/4
  Rational psdo_order;                       // -d

  /// Order of R*R from the clean-composition rule: 2 * fio_order + excess / 2.
  Rational composed_order() const;
};

DimensionReport dimension_report(int d, int n);

/// Re-derives every field of the report from (d, n) in exact arithmetic and
/// checks the identities relating them: the codimension count for the
/// excess, dim_E = 2n + excess, and composed_order() == psdo_order.
bool dimension_identities_hold(const DimensionReport& report);

}  // namespace dplane
