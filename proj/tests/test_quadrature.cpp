#include <doctest.h>

#include "lhyp/quadrature.hpp"

#include <cmath>
#include <numbers>

using namespace lhyp;

namespace {
constexpr Real kPi = std::numbers::pi;

Vector node_values(const QuadratureGrid& g, Real (*fn)(const GeometrySample&)) {
  Vector v(Eigen::Index(g.nodes.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = fn(g.nodes[size_t(i)].sample);
  return v;
}
}  // namespace

TEST_CASE("one-dimensional rules") {
  const QuadratureRule gl = gauss_legendre(16);
  Real m8 = 0;
  for (int i = 0; i < 16; ++i) m8 += gl.weights(i) * std::pow(gl.points(i), 8);
  CHECK(m8 == doctest::Approx(2.0 / 9).epsilon(1e-13));  // ∫ x^8 on [-1,1]

  const QuadratureRule gh = gauss_hermite(10);
  Real m2 = 0;
  for (int i = 0; i < 10; ++i) m2 += gh.weights(i) * gh.points(i) * gh.points(i);
  CHECK(m2 == doctest::Approx(std::sqrt(kPi) / 2).epsilon(1e-13));
}

TEST_CASE("grid weights reproduce areas") {
  CHECK(build_grid(make_sphere(1, 1.0), 64).weight_sum() ==
        doctest::Approx(2 * kPi).epsilon(1e-12));
  CHECK(build_grid(make_sphere(2, 1.0), 32).weight_sum() ==
        doctest::Approx(4 * kPi).epsilon(1e-8));
  CHECK(build_grid(make_sphere(3, 1.2), 24).weight_sum() ==
        doctest::Approx(2 * kPi * kPi * std::pow(1.2, 3)).epsilon(1e-8));
  CHECK_THROWS_AS(build_grid(make_sphere(2, 1.0), 4), std::invalid_argument);
}

TEST_CASE("gaussian-weighted totals on a cylinder") {
  // S^1(1) x R: the weight factorizes, the flat factor integrates to sqrt(2π)
  const auto M = make_cylinder(2, 1, 1.0);
  const QuadratureGrid grid = build_grid(M, 64);
  const Real total = integrate(grid, Vector::Ones(Eigen::Index(grid.nodes.size())), true);
  CHECK(total == doctest::Approx(2 * kPi * std::exp(-0.5) * std::sqrt(2 * kPi)).epsilon(1e-8));
  CHECK(grid.truncation > 6.0);  // covered flat half-width
}

TEST_CASE("integrate basics") {
  const auto circle = make_sphere(1, 1.0);
  const QuadratureGrid g1 = build_grid(circle, 64);
  CHECK(integrate(g1, Vector::Ones(Eigen::Index(g1.nodes.size())), true) ==
        doctest::Approx(2 * kPi * std::exp(-0.5)).epsilon(1e-12));

  const auto sphere = make_sphere(2, 1.0);
  const QuadratureGrid g2 = build_grid(sphere, 32);
  CHECK(integrate(g2, Vector::Ones(Eigen::Index(g2.nodes.size())), false) ==
        doctest::Approx(4 * kPi).epsilon(1e-10));
  Vector odd(Eigen::Index(g2.nodes.size()));
  Vector z(3);
  z << 0.3, -0.7, 0.2;
  for (Eigen::Index i = 0; i < odd.size(); ++i) odd(i) = g2.nodes[size_t(i)].sample.normal.dot(z);
  CHECK(std::abs(integrate(g2, odd, true)) <= 1e-10);

  CHECK_THROWS_AS(integrate(g2, Vector::Ones(3), true), std::invalid_argument);
}

TEST_CASE("resolution doubling cuts smooth-integrand error by 4x or better") {
  Vector z(3);
  z << 0, 0, 1;
  auto value = [&](int res) {
    const QuadratureGrid g = build_grid(make_sphere(2, 1.0), res);
    Vector f(Eigen::Index(g.nodes.size()));
    for (Eigen::Index i = 0; i < f.size(); ++i)
      f(i) = 1.0 / (1.3 + g.nodes[size_t(i)].sample.normal.dot(z));
    return integrate(g, f, false);
  };
  const Real ref = value(96);
  const Real e8 = std::abs(value(8) - ref);
  const Real e16 = std::abs(value(16) - ref);
  CHECK(e8 > 1e-12);  // coarse error measurably above the floor
  CHECK(e16 <= e8 / 4);
}

TEST_CASE("gaussian truncation invariance") {
  const auto M = make_cylinder(2, 1, 1.0);
  const QuadratureGrid coarse = build_grid(M, 24);
  const QuadratureGrid fine = build_grid(M, 48);
  auto moment = [](const QuadratureGrid& g) {
    Vector f(Eigen::Index(g.nodes.size()));
    for (Eigen::Index i = 0; i < f.size(); ++i) {
      const auto& s = g.nodes[size_t(i)].sample;
      f(i) = s.position(2) * s.position(2) + s.normal(0);
    }
    return integrate(g, f, true);
  };
  const Real a = moment(coarse), b = moment(fine);
  CHECK(fine.truncation > coarse.truncation);
  CHECK(std::abs(a - b) <= 1e-10 * std::abs(b));
}

TEST_CASE("integration by parts on analytic families") {
  Vector z(3);
  z << 0.5, -0.3, 0.8;

  const auto sphere = make_sphere(2, std::sqrt(2.0));
  const QuadratureGrid g = build_grid(sphere, 32);
  const SmoothField nz = field_normal_dot(sphere, g, z);
  CHECK(integration_by_parts_residual(g, nz, nz) <= 1e-8);

  const SmoothField one = field_constant(sphere, g, 1.0);
  const SmoothField q = field_position_norm2(sphere, g);
  CHECK(integration_by_parts_residual(g, one, q) <= 1e-10);
  CHECK(integration_by_parts_residual(g, one, nz) <= 1e-10);

  // u = v = <X,a> on S^1(1): both sides equal ∓π e^{-1/2} in closed form
  const auto circle = make_sphere(1, 1.0);
  const QuadratureGrid gc = build_grid(circle, 64);
  Vector a(2);
  a << 1, 0;
  const SmoothField xa = field_position_dot(circle, gc, a);
  Vector lhs(Eigen::Index(gc.nodes.size())), rhs(lhs.size());
  for (Eigen::Index i = 0; i < lhs.size(); ++i) {
    lhs(i) = xa.values(i) * xa.drift_laplacian(i);
    rhs(i) = xa.gradients.row(i).squaredNorm();
  }
  const Real closed_form = kPi * std::exp(-0.5);
  CHECK(integrate(gc, lhs, true) == doctest::Approx(-closed_form).epsilon(1e-10));
  CHECK(integrate(gc, rhs, true) == doctest::Approx(closed_form).epsilon(1e-10));
  CHECK(integration_by_parts_residual(gc, xa, xa) <= 1e-10);

  // fields lacking derivative data are rejected
  SmoothField bare;
  bare.values = Vector::Ones(Eigen::Index(gc.nodes.size()));
  CHECK_THROWS_AS(integration_by_parts_residual(gc, bare, xa), std::invalid_argument);
}

TEST_CASE("integration by parts on the cylinder") {
  const auto M = make_cylinder(2, 1, 1.0);
  const QuadratureGrid g = build_grid(M, 40);
  Vector a(3);
  a << 0.2, -0.9, 0.4;
  const SmoothField xa = field_position_dot(M, g, a);
  const SmoothField na = field_normal_dot(M, g, a);
  CHECK(integration_by_parts_residual(g, xa, na) <= 1e-8);
  CHECK(integration_by_parts_residual(g, na, xa) <= 1e-8);
}
