#include <doctest.h>

#include "lhyp/variation.hpp"

#include <cmath>
#include <numbers>

using namespace lhyp;

namespace {
constexpr Real kPi = std::numbers::pi;

Vector vec3(Real a, Real b, Real c) {
  Vector v(3);
  v << a, b, c;
  return v;
}
}  // namespace

TEST_CASE("volume-preserving projection") {
  const auto sphere = make_sphere(2, 1.0);
  const QuadratureGrid g = build_grid(sphere, 24);
  const Eigen::Index m = Eigen::Index(g.nodes.size());

  const Vector zeroed = project_volume_preserving(sphere, g, Vector::Ones(m));
  CHECK(zeroed.cwiseAbs().maxCoeff() <= 1e-14);

  const Vector zn = VariationField::linear(vec3(0.4, -0.2, 0.7)).materialize(g);
  const Vector kept = project_volume_preserving(sphere, g, zn);
  CHECK((kept - zn).cwiseAbs().maxCoeff() <= 1e-12);

  const Vector shifted = project_volume_preserving(sphere, g, zn.array() + 1.0);
  CHECK((shifted - zn).cwiseAbs().maxCoeff() <= 1e-12);

  // idempotent, and the projected field integrates to zero
  const Vector twice = project_volume_preserving(sphere, g, kept);
  CHECK((twice - kept).cwiseAbs().maxCoeff() <= 1e-14);
  CHECK(std::abs(integrate(g, kept, true)) <= 1e-10 * weighted_area(sphere, g));
}

TEST_CASE("first variation of the weighted area") {
  const auto shrinker = make_sphere(2, std::sqrt(2.0));
  const QuadratureGrid g = build_grid(shrinker, 24);
  const Eigen::Index m = Eigen::Index(g.nodes.size());

  // volume-preserving speed: a smooth nodal field projected to mean zero
  Vector f(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto& s = g.nodes[size_t(i)].sample;
    f(i) = std::sin(3 * s.position(0)) + 0.5 * std::cos(2 * s.position(1)) * s.position(2);
  }
  VariationSpec spec;
  spec.f = VariationField::nodal(project_volume_preserving(shrinker, g, f));
  CHECK(std::abs(analytic_first_variation_area(shrinker, g, spec)) <= 1e-10);

  // f == 1 on S^2(1): A'(0) = -λ A
  const auto unit = make_sphere(2, 1.0);
  const QuadratureGrid gu = build_grid(unit, 24);
  VariationSpec one;
  one.f = VariationField::constant(1.0);
  CHECK(analytic_first_variation_area(unit, gu, one) ==
        doctest::Approx(-4 * kPi * std::exp(-0.5)).epsilon(1e-10));

  VariationSpec zero;
  zero.f = VariationField::constant(0.0);
  CHECK(analytic_first_variation_area(unit, gu, zero) == 0.0);
}

TEST_CASE("first variation of the weighted volume") {
  const auto circle = make_sphere(1, 1.0);
  const QuadratureGrid g = build_grid(circle, 64);
  VariationSpec one;
  one.f = VariationField::constant(1.0);
  CHECK(analytic_first_variation_volume(circle, g, one) ==
        doctest::Approx(2 * kPi * std::exp(-0.5)).epsilon(1e-12));

  const auto sphere = make_sphere(2, 1.3);
  const QuadratureGrid gs = build_grid(sphere, 24);
  VariationSpec odd;
  odd.f = VariationField::linear(vec3(0.3, 0.9, -0.4));
  CHECK(std::abs(analytic_first_variation_volume(sphere, gs, odd)) <= 1e-12);
}

TEST_CASE("first variation of F vanishes on lambda-hypersurfaces") {
  struct Entry {
    Hypersurface M;
    VariationSpec spec;
  };
  std::vector<Entry> battery;
  auto add = [&](Hypersurface M, VariationField f, Vector y, Real h) {
    VariationSpec s;
    s.f = std::move(f);
    s.y = std::move(y);
    s.h = h;
    battery.push_back({std::move(M), std::move(s)});
  };
  Matrix B = Matrix::Zero(3, 3);
  B(0, 0) = 1;
  B(1, 1) = -0.5;
  B(2, 2) = -0.5;
  add(make_sphere(1, 1.0), VariationField::constant(1.0), Vector(), 0);
  add(make_sphere(1, 1.0), VariationField::linear((Vector(2) << 0.3, -0.8).finished()),
      (Vector(2) << 1, 2).finished(), 0.5);
  add(make_sphere(2, std::sqrt(2.0)), VariationField::constant(1.0), Vector(), 1.0);
  add(make_sphere(2, std::sqrt(2.0)),
      VariationField::linear(vec3(0.4, 0.1, -0.3)).add_constant(2.0), vec3(0.4, 0.1, -0.3), -0.3);
  add(make_sphere(2, 1.3), VariationField::quadratic(B).add_constant(1.0), vec3(0, 1, 0), 0.2);
  add(make_sphere(3, 2.0), VariationField::linear((Vector(4) << 0.2, -0.1, 0.5, 0.3).finished()),
      Vector(), 0.4);
  add(make_cylinder(2, 1, 1.0), VariationField::constant(1.0),
      vec3(0, 0, 1), 0);
  add(make_cylinder(2, 1, 1.0), VariationField::linear(vec3(0.7, -0.2, 0.0)),
      vec3(0.2, 0.5, 1.0), 0.7);
  add(make_cylinder(3, 2, 1.4), VariationField::constant(0.5), Vector(), -0.6);
  add(make_sphere(2, 0.8), VariationField::linear(vec3(-0.3, 0.2, 0.9)).add_constant(-1.0),
      vec3(0.1, 0, -0.2), 0.25);

  for (const auto& e : battery) {
    const QuadratureGrid g = build_grid(e.M, 32);
    const Real lambda = *e.M.lambda_exact();
    CHECK(std::abs(analytic_first_variation_f(e.M, g, e.spec, lambda)) <= 1e-8);
  }
}

TEST_CASE("first variation of F detects a wrong multiplier") {
  const auto sphere = make_sphere(2, 1.5);
  const QuadratureGrid g = build_grid(sphere, 24);
  const Real lambda_true = 2.0 / 1.5 - 1.5;
  VariationSpec one;
  one.f = VariationField::constant(1.0);
  const Real value = analytic_first_variation_f(sphere, g, one, 1.0);
  const Real expected = (1.0 - lambda_true) * weighted_area(sphere, g) / (4 * kPi);
  CHECK(value == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("numeric derivatives match the analytic first variations") {
  FunctionalContext ctx;
  ctx.t0 = 1;
  ctx.lambda = 1.0;

  SUBCASE("area on the unit sphere, constant speed") {
    const auto M = make_sphere(2, 1.0);
    const QuadratureGrid g = build_grid(M, 32);
    VariationSpec spec;
    spec.f = VariationField::constant(1.0);
    const Real analytic = analytic_first_variation_area(M, g, spec);
    const Real e1 = std::abs(numeric_variation(M, ctx, spec, Functional::Area, 1e-3, 1, 32) -
                             analytic);
    const Real e2 = std::abs(numeric_variation(M, ctx, spec, Functional::Area, 5e-4, 1, 32) -
                             analytic);
    CHECK(e1 <= 2e-5);
    CHECK(e2 <= e1 / 3.5);  // ~4x under halving
  }

  SUBCASE("area on the sphere, first harmonic speed") {
    const auto M = make_sphere(2, 1.1);
    const QuadratureGrid g = build_grid(M, 32);
    VariationSpec spec;
    spec.f = VariationField::linear(vec3(0.5, -0.2, 0.3)).add_constant(0.4);
    const Real analytic = analytic_first_variation_area(M, g, spec);
    const Real e1 = std::abs(numeric_variation(M, ctx, spec, Functional::Area, 2e-3, 1, 32) -
                             analytic);
    const Real e2 = std::abs(numeric_variation(M, ctx, spec, Functional::Area, 1e-3, 1, 32) -
                             analytic);
    CHECK(e1 <= 1e-5);
    CHECK(e2 <= e1 / 3.2);
  }

  SUBCASE("volume derivative is exact for the frozen measure") {
    const auto M = make_sphere(2, 1.0);
    const QuadratureGrid g = build_grid(M, 32);
    VariationSpec spec;
    spec.f = VariationField::linear(vec3(0.4, 0.4, -0.1));
    const Real analytic = analytic_first_variation_volume(M, g, spec);
    CHECK(std::abs(numeric_variation(M, ctx, spec, Functional::Volume, 1e-4, 1, 32) - analytic) <=
          1e-12);
  }

  SUBCASE("F with moving base point and scale") {
    const auto M = make_sphere(2, 1.4);
    const QuadratureGrid g = build_grid(M, 32);
    VariationSpec spec;
    spec.f = VariationField::linear(vec3(0.2, -0.6, 0.1)).add_constant(0.3);
    spec.y = vec3(0.5, 0.1, -0.4);
    spec.h = 0.6;
    const Real analytic = analytic_first_variation_f(M, g, spec, ctx.lambda);
    const Real e1 =
        std::abs(numeric_variation(M, ctx, spec, Functional::F, 2e-3, 1, 32) - analytic);
    const Real e2 =
        std::abs(numeric_variation(M, ctx, spec, Functional::F, 1e-3, 1, 32) - analytic);
    CHECK(e1 <= 1e-5);
    CHECK(e2 <= e1 / 3.2);
  }

  SUBCASE("ellipse polyline, nodal speed") {
    const int m = 16384;
    const auto M = make_polyline(make_ellipse_polyline(2.0, 1.0, m));
    const QuadratureGrid g = build_grid(M, 8);
    Vector f(Eigen::Index(g.nodes.size()));
    for (Eigen::Index i = 0; i < f.size(); ++i) {
      const auto& s = g.nodes[size_t(i)].sample;
      f(i) = 1.0 + 0.3 * s.normal(0) - 0.2 * s.normal(1);
    }
    VariationSpec spec;
    spec.f = VariationField::nodal(f);
    FunctionalContext c2;
    const Real analytic = analytic_first_variation_area(M, g, spec);
    const Real e1 =
        std::abs(numeric_variation(M, c2, spec, Functional::Area, 1e-2, 1, 8) - analytic);
    const Real e2 =
        std::abs(numeric_variation(M, c2, spec, Functional::Area, 5e-3, 1, 8) - analytic);
    CHECK(e1 <= 1e-3);
    CHECK(e2 <= e1 / 3.0);
  }
}

TEST_CASE("second variation of F against central differences") {
  FunctionalContext ctx;

  for (Real r : {std::sqrt(2.0), 1.0, 1.6}) {
    const auto M = make_sphere(2, r);
    const QuadratureGrid g = build_grid(M, 48);
    const Real lambda = 2.0 / r - r;
    ctx.lambda = lambda;

    Matrix B = Matrix::Zero(3, 3);
    B(0, 1) = B(1, 0) = 0.5;
    B(2, 2) = 0.4;

    std::vector<VariationSpec> specs;
    {
      VariationSpec s;
      s.f = VariationField::constant(1.0);
      specs.push_back(s);
      s.f = VariationField::linear(vec3(0.4, 0.1, -0.3));
      specs.push_back(s);
      s.f = VariationField::quadratic(B);
      specs.push_back(s);
      s.f = VariationField::linear(vec3(0.4, 0.1, -0.3)).add_constant(0.5).add_quadratic(B);
      s.y = vec3(0.1, 0.4, -0.3);
      s.h = 0.25;
      specs.push_back(s);
    }
    for (const auto& spec : specs) {
      const Real form = analytic_second_variation_f_form(M, g, spec, lambda);
      const Real fd =
          numeric_variation(M, ctx, spec, Functional::F, 1e-3, 2, 48) * std::pow(4 * kPi, 1.0);
      const Real scale = std::max(std::abs(form), Real(1e-2));
      CHECK(std::abs(fd - form) <= 1e-5 * scale);
    }
  }
}

TEST_CASE("second variation special values") {
  // translation direction on the self-shrinker sphere: neutral
  {
    const auto M = make_sphere(2, std::sqrt(2.0));
    const QuadratureGrid g = build_grid(M, 32);
    VariationSpec s;
    const Vector z = vec3(0.4, 0.1, -0.3);
    s.f = VariationField::linear(z);
    s.y = z;
    CHECK(std::abs(analytic_second_variation_f_form(M, g, s, 0.0)) <= 1e-10);
  }
  // the (a, h) block vanishes at h = -2a/r
  {
    const Real r = 1.3;
    const auto M = make_sphere(2, r);
    const QuadratureGrid g = build_grid(M, 32);
    VariationSpec s;
    s.f = VariationField::constant(0.7);
    s.h = -2 * 0.7 / r;
    CHECK(std::abs(analytic_second_variation_f_form(M, g, s, 2.0 / r - r)) <= 1e-9);
  }
  // first harmonic on S^2(1.6): (λ²-1) ∫ <z,N>² w dμ, negative
  {
    const Real r = 1.6;
    const auto M = make_sphere(2, r);
    const QuadratureGrid g = build_grid(M, 32);
    const Real lambda = 2.0 / r - r;
    const Vector z = vec3(0.0, 0.0, 1.0);
    VariationSpec s;
    s.f = VariationField::linear(z);
    const Real value = analytic_second_variation_f_form(M, g, s, lambda);
    const Real norm2 = std::exp(-r * r / 2) * 4 * kPi * r * r / 3;
    CHECK(value == doctest::Approx((lambda * lambda - 1) * norm2).epsilon(1e-10));
    CHECK(value < 0);
  }
}

TEST_CASE("second variation of T") {
  const Real r = 1.2;
  const auto M = make_sphere(2, r);
  const QuadratureGrid g = build_grid(M, 32);
  const Real lambda = 2.0 / r - r;

  const Vector z = vec3(0.3, -0.5, 0.2);
  const Real tz = analytic_second_variation_t_form(M, g, VariationField::linear(z));
  const Real norm2 = std::exp(-r * r / 2) * 4 * kPi * r * r / 3 * z.squaredNorm();
  CHECK(tz == doctest::Approx((lambda * lambda - 1) * norm2).epsilon(1e-10));

  // second harmonic on S^2(1): coefficient μ2 - S - 1 + λ² = 6 - 2 - 1 + 1 = 4
  {
    const auto unit = make_sphere(2, 1.0);
    const QuadratureGrid gu = build_grid(unit, 32);
    Matrix B = Matrix::Zero(3, 3);
    B(0, 0) = 1;
    B(1, 1) = -1;
    const VariationField f = VariationField::quadratic(B);
    const Real val = analytic_second_variation_t_form(unit, gu, f);
    Vector f2 = f.materialize(gu);
    Vector sq = f2.cwiseProduct(f2);
    CHECK(val == doctest::Approx(4 * integrate(gu, sq, true)).epsilon(1e-10));
    CHECK(val > 0);
  }

  CHECK(analytic_second_variation_t_form(M, g, VariationField::constant(0.0)) == 0.0);
  CHECK_THROWS_AS(analytic_second_variation_t_form(M, g, VariationField::constant(1.0)),
                  std::invalid_argument);

  // numeric cross-check at fixed base point and scale
  VariationSpec s;
  s.f = VariationField::linear(z);
  FunctionalContext ctx;
  const Real fd = numeric_variation(M, ctx, s, Functional::T, 1e-3, 2, 48) * 4 * kPi;
  CHECK(std::abs(fd - tz) <= 1e-5 * std::abs(tz));
}

TEST_CASE("richardson consistency guard") {
  const auto M = make_sphere(2, 1.0);
  VariationSpec spec;
  spec.f = VariationField::constant(1.0);
  FunctionalContext ctx;
  const RichardsonResult ok =
      numeric_variation_checked(M, ctx, spec, Functional::Area, 1e-3, 1, 24);
  CHECK(ok.consistent);
  const RichardsonResult bad =
      numeric_variation_checked(M, ctx, spec, Functional::Area, 1e-14, 2, 24);
  CHECK(!bad.consistent);
}
