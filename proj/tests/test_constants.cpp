#include "dplane/constants.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

using namespace dplane;
using std::numbers::pi;

namespace {

bool rel_close(double a, double b, double tol) { return std::abs(a - b) <= tol * std::abs(b); }

}  // namespace

TEST_CASE("rational arithmetic") {
  CHECK(Rational(2, 4) == Rational(1, 2));
  CHECK(Rational(1, -2) == Rational(-1, 2));
  CHECK(Rational(1, 2) + Rational(1, 3) == Rational(5, 6));
  CHECK(Rational(1, 2) - Rational(1, 2) == Rational(0));
  CHECK(Rational(-3, 4) * Rational(2) == Rational(-3, 2));
  CHECK(Rational(1, 2) / Rational(1, 4) == Rational(2));
  CHECK(Rational(-3, 2).str() == "-3/2");
  CHECK(Rational(4, 2).str() == "2");
  CHECK_THROWS(Rational(1, 0));
}

TEST_CASE("gamma function") {
  CHECK(gamma_fn(1) == 1.0);
  CHECK(gamma_fn(5) == 24.0);
  CHECK(rel_close(gamma_fn(0.5), std::sqrt(pi), 1e-15));
  CHECK(rel_close(gamma_fn(3.5), 15.0 / 8.0 * std::sqrt(pi), 1e-15));
  for (double x = 0.5; x <= 30.0; x += 0.37) {
    CHECK(rel_close(gamma_fn(x + 1), x * gamma_fn(x), 1e-12));
  }
  CHECK_THROWS_AS(gamma_fn(0.0), std::domain_error);
  CHECK_THROWS_AS(gamma_fn(-1.5), std::domain_error);
}

TEST_CASE("sphere volumes") {
  CHECK(sphere_volume(0) == 2.0);
  CHECK(rel_close(sphere_volume(1), 2 * pi, 1e-15));
  CHECK(rel_close(sphere_volume(2), 4 * pi, 1e-15));
  CHECK(rel_close(sphere_volume(3), 2 * pi * pi, 1e-15));
  CHECK_THROWS(sphere_volume(-1));
}

TEST_CASE("rotation group volumes") {
  CHECK(so_volume(1) == 1.0);
  CHECK(rel_close(so_volume(2), 2 * std::sqrt(2.0) * pi, 1e-14));
  CHECK(rel_close(so_volume(3), 16 * std::sqrt(2.0) * pi * pi, 1e-14));
}

TEST_CASE("grassmannian volumes") {
  CHECK(rel_close(grassmannian_volume(1, 2), 2 * pi, 1e-12));
  CHECK(rel_close(grassmannian_volume(1, 3), 4 * pi, 1e-12));
  CHECK(rel_close(grassmannian_volume(2, 4), 4 * pi * pi, 1e-12));
  for (int n = 2; n <= 12; ++n) {
    for (int d = 1; d < n; ++d) {
      CAPTURE(d);
      CAPTURE(n);
      CHECK(rel_close(grassmannian_volume(d, n), grassmannian_volume_so(d, n), 1e-12));
      CHECK(rel_close(grassmannian_volume(d, n), grassmannian_volume(n - d, n), 1e-12));
    }
  }
  CHECK_THROWS_AS(grassmannian_volume(2, 2), std::invalid_argument);
}

TEST_CASE("gamma ratio constant") {
  CHECK(rel_close(gamma_ratio_constant(1, 2), 2.0, 1e-14));
  CHECK(rel_close(gamma_ratio_constant(2, 3), 2 * pi, 1e-14));
  CHECK(rel_close(gamma_ratio_constant(1, 3), pi, 1e-14));
}

TEST_CASE("dimension report") {
  const DimensionReport a = dimension_report(1, 2);
  CHECK(a.excess == 0);
  CHECK(a.fio_order == Rational(-1, 2));
  CHECK(a.psdo_order == Rational(-1));
  CHECK(a.dim_E == 4);
  CHECK(dimension_report(1, 3).excess == 1);
  CHECK(dimension_report(1, 3).psdo_order == Rational(-1));
  const DimensionReport b = dimension_report(2, 4);
  CHECK(b.excess == 2);
  CHECK(b.fio_order == Rational(-3, 2));
  CHECK(b.composed_order() == Rational(-2));
  for (int n = 2; n <= 64; ++n) {
    for (int d = 1; d < n; ++d) {
      const DimensionReport r = dimension_report(d, n);
      CHECK(r.composed_order() == Rational(-d));
      CHECK(r.composed_order() == r.psdo_order);
      CHECK(r.dim_E == 2 * n + r.excess);
      CHECK(r.excess >= 0);
      CHECK(dimension_identities_hold(r));
    }
  }
}
