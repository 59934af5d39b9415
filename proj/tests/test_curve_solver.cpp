#include <doctest.h>

#include "lhyp/curve_solver.hpp"
#include "lhyp/functionals.hpp"
#include "lhyp/flow.hpp"
#include "lhyp/identities.hpp"

#include <cmath>
#include <numbers>

using namespace lhyp;

namespace {
constexpr Real kPi = std::numbers::pi;
}

TEST_CASE("circles solve the curve equation") {
  for (Real r : {0.8, 1.0, 1.5}) {
    CurveShootingProblem p;
    p.lambda = 1.0 / r - r;
    p.rho0 = r;
    const CurveTrajectory traj = integrate_curve(p);
    // semicircle: perpendicular axis return after half the period
    CHECK(traj.arclength == doctest::Approx(kPi * r).epsilon(1e-9));
    CHECK(std::abs(traj.end_tangent_x) <= 1e-9);
    Real worst = 0;
    for (Eigen::Index i = 0; i < traj.curve.vertices.rows(); ++i)
      worst = std::max(worst, std::abs(traj.curve.vertices.row(i).norm() - r));
    CHECK(worst <= 1e-9);
    CHECK(traj.first_integral_spread <= 1e-9);
  }
}

TEST_CASE("non-circular start bends the curvature") {
  CurveShootingProblem p;
  p.lambda = -0.5;
  p.rho0 = 0.8;
  const CurveTrajectory traj = integrate_curve(p);
  CHECK(traj.kappa.maxCoeff() - traj.kappa.minCoeff() > 1e-3);
  CHECK(traj.first_integral_spread <= 1e-9);  // kappa e^{-|X|^2/2} stays conserved
}

TEST_CASE("arclength budget errors out") {
  CurveShootingProblem p;
  p.lambda = 0.0;
  p.rho0 = 1.0;
  p.max_arclength = 0.5;
  CHECK_THROWS_AS(integrate_curve(p), std::runtime_error);
}

TEST_CASE("shooting recovers the circle radius") {
  for (Real lambda : {-0.5, 0.0, 0.5, 1.0}) {
    const Real rc = circle_radius_for_lambda(lambda);
    const ShootResult res = shoot_closed(lambda, rc - 0.15, rc + 0.15);
    REQUIRE(res.found);
    CHECK(std::abs(res.rho0 - rc) <= 1e-8);
    CHECK(res.closure_gap <= 1e-8);
    CHECK(res.tangent_gap <= 1e-8);
    CHECK(res.embedded);
    CHECK(std::abs(res.total_turning - 2 * kPi) <= 1e-8);
  }
}

TEST_CASE("bracket without sign change reports not found") {
  const ShootResult res = shoot_closed(-0.5, 0.6, 0.9);
  CHECK(!res.found);
}

TEST_CASE("embedded non-circular curve at lambda = -0.5") {
  ShootOptions opts;
  opts.output_vertices = 8192;
  const ShootResult res = shoot_closed(-0.5, 3.5, 4.5, opts);
  REQUIRE(res.found);
  CHECK(res.rho0 == doctest::Approx(3.86835005).epsilon(1e-7));
  CHECK(res.closure_gap <= 1e-8);
  CHECK(res.embedded);
  CHECK(std::abs(res.total_turning - 2 * kPi) <= 1e-8);

  const PolylineGeometry pg = polyline_geometry(res.curve);
  Real kmin = 1e30, kmax = -1e30;
  for (const auto& g : pg.samples) {
    kmin = std::min(kmin, g.mean_curvature);
    kmax = std::max(kmax, g.mean_curvature);
  }
  CHECK(kmax - kmin > 1.0);     // visibly non-circular
  CHECK(kmin > 0);              // locally convex
  CHECK(kmin - (-0.5) > 0.49);  // H - lambda stays positive

  // discrete lambda-residual of the emitted polyline
  const auto M = make_polyline(res.curve);
  const ResidualField rf = lambda_residual(M, build_grid(M, 8), -0.5);
  CHECK(rf.sup_norm <= 1e-5);
}

TEST_CASE("lambda = 0: embedded closed results are circles") {
  // coarse scan for sign changes of the first-crossing mismatch, then shoot
  std::vector<Real> grid;
  for (Real rho = 0.25; rho <= 2.9; rho += 0.05) grid.push_back(rho);
  int embedded_count = 0;
  for (size_t i = 0; i + 1 < grid.size(); ++i) {
    ShootOptions opts;
    opts.output_vertices = 1024;
    opts.max_arclength = 40;
    ShootResult res;
    try {
      res = shoot_closed(0.0, grid[i], grid[i + 1], opts);
    } catch (const std::runtime_error&) {
      continue;  // trajectory escaped before returning
    }
    if (!res.found || !res.embedded) continue;
    ++embedded_count;
    Real worst = 0;
    for (Eigen::Index k = 0; k < res.curve.vertices.rows(); ++k)
      worst = std::max(worst, std::abs(res.curve.vertices.row(k).norm() - 1.0));
    CHECK(worst <= 1e-6);  // the unit circle, the only embedded shrinker curve
  }
  CHECK(embedded_count >= 1);
}

TEST_CASE("products with flat factors") {
  PolylineCurve circle = make_circle_polyline(1.0, 4096);
  circle.lambda_tag = 0.0;
  const auto P = product_with_line(circle, 1);
  CHECK(P.dimension() == 2);
  CHECK(*P.lambda_exact() == doctest::Approx(0.0));

  // matches the analytic shrinker cylinder through the functionals
  const auto C = make_cylinder(2, 1, 1.0);
  const QuadratureGrid gp = build_grid(P, 24);
  const QuadratureGrid gc = build_grid(C, 24);
  CHECK(weighted_area(P, gp) == doctest::Approx(weighted_area(C, gc)).epsilon(1e-6));
  CHECK(mean_lambda(P, gp) == doctest::Approx(0.0).epsilon(1e-6));

  // residual is preserved exactly by the flat factors
  const auto M1 = make_polyline(circle);
  const Real sup_curve = lambda_residual(M1, build_grid(M1, 8), 0.0).sup_norm;
  const Real sup_prod = lambda_residual(P, gp, 0.0).sup_norm;
  CHECK(sup_prod == doctest::Approx(sup_curve).epsilon(1e-12));

  // r = 2 circle with two flat factors: lambda = 1/2 - 2
  PolylineCurve big = make_circle_polyline(2.0, 4096);
  big.lambda_tag = 0.5 - 2.0;
  const auto P2 = product_with_line(big, 2);
  CHECK(*P2.lambda_exact() == doctest::Approx(-1.5));

  // verification gate
  PolylineCurve untagged = make_circle_polyline(1.0, 1024);
  CHECK_THROWS_AS(product_with_line(untagged, 1), std::invalid_argument);
  PolylineCurve wrong = make_circle_polyline(1.0, 1024);
  wrong.lambda_tag = 0.5;
  CHECK_THROWS_AS(product_with_line(wrong, 1), std::invalid_argument);
}

TEST_CASE("chang product feeds the counterexample diagnostics") {
  ShootOptions opts;
  opts.output_vertices = 8192;
  const ShootResult res = shoot_closed(-0.5, 3.5, 4.5, opts);
  REQUIRE(res.found);
  const auto P = product_with_line(res.curve, 1, 1e-4);
  const QuadratureGrid g = build_grid(P, 16);
  const auto d = classification_diagnostics(P, g);
  CHECK(d.min_h_minus_lambda > 0.49);
  CHECK(!d.h_constant);
  CHECK(!d.matched_cylinder.has_value());
  CHECK(d.lambda_residual_sup <= 1e-5);

  // at least linear measured area growth
  Vector radii(4);
  radii << 8, 12, 16, 24;
  const GrowthFit fit = area_growth_slope(P, radii);
  CHECK(fit.slope >= 0.95);
}
