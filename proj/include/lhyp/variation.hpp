#pragma once

#include "lhyp/functionals.hpp"

namespace lhyp {

// Normal speed f = constant + <z,N> + <N,B N>, or free nodal values. The
// trace of B is folded into the constant on construction (it restricts to a
// constant on the sphere), so the quadratic part is a pure second harmonic.
class VariationField {
 public:
  VariationField() = default;
  static VariationField constant(Real a);
  static VariationField linear(const Vector& z);
  static VariationField quadratic(const Matrix& B);
  static VariationField nodal(Vector values);

  VariationField& add_constant(Real a);
  VariationField& add_linear(const Vector& z);
  VariationField& add_quadratic(const Matrix& B);

  bool analytic() const { return nodal_.size() == 0; }
  Real constant_part() const { return constant_; }
  const Vector& linear_part() const { return linear_; }
  const Matrix& quadratic_part() const { return quadratic_; }

  Real eval(const GeometrySample& g) const;
  // gradient on the unit sphere of f as a function of the direction u = -N
  Vector unit_sphere_gradient(const Vector& u) const;
  Vector materialize(const QuadratureGrid& grid) const;
  // drift Laplacian on an origin-centered sphere of radius r (eigenmodes)
  Vector drift_laplacian_on_sphere(const QuadratureGrid& grid, int n, Real r) const;

 private:
  Real constant_ = 0;
  Vector linear_;
  Matrix quadratic_;
  Vector nodal_;
};

struct VariationSpec {
  VariationField f;
  Vector y;  // variation of the base point; empty = 0
  Real h = 0;  // variation of the scale
};

// f - (∫ f w dμ)/(∫ w dμ); idempotent
Vector project_volume_preserving(const Hypersurface& M, const QuadratureGrid& grid,
                                 const Vector& f);

// dA/ds(0) = ∫ (-<X-X0,N>/t0 - H) f w dμ
Real analytic_first_variation_area(const Hypersurface& M, const QuadratureGrid& grid,
                                   const VariationSpec& spec);
// dV/ds(0) = ∫ f w dμ
Real analytic_first_variation_volume(const Hypersurface& M, const QuadratureGrid& grid,
                                     const VariationSpec& spec);
// dF/ds(0), all three terms (f, y, h)
Real analytic_first_variation_f(const Hypersurface& M, const QuadratureGrid& grid,
                                const VariationSpec& spec, Real lambda);

// (4π)^{n/2} F''(0) on an origin-centered sphere at X0 = 0, t0 = 1:
// -∫ f L f w dμ plus the (y, h) coupling and pure (y, h) blocks, with
// L = Δ - <X,∇·> + S + 1 - λ².
Real analytic_second_variation_f_form(const Hypersurface& M, const QuadratureGrid& grid,
                                      const VariationSpec& spec, Real lambda);

// (4π)^{n/2} T''(0) = ∫ -f (Lf) w dμ for weighted volume-preserving f
Real analytic_second_variation_t_form(const Hypersurface& M, const QuadratureGrid& grid,
                                      const VariationField& f);

enum class Functional { Area, Volume, F, J, T };

// Value of the functional on the surface deformed by s: vertices (or the
// radial graph of the sphere) moved along s f N, base point X0 + s y, scale
// t0 + s h. Spheres require analytic f; polylines re-estimate geometry on
// the moved vertices.
Real evaluate_deformed(const Hypersurface& M, const FunctionalContext& ctx,
                       const VariationSpec& spec, Real s, Functional tag, int resolution);

Real numeric_variation(const Hypersurface& M, const FunctionalContext& ctx,
                       const VariationSpec& spec, Functional tag, Real eps, int order,
                       int resolution);

// Same derivative at eps and eps/2; flags cancellation-dominated steps.
struct RichardsonResult {
  Real value = 0;       // derivative at eps/2 (the better estimate)
  Real value_full = 0;  // derivative at eps
  bool consistent = true;
};
RichardsonResult numeric_variation_checked(const Hypersurface& M, const FunctionalContext& ctx,
                                           const VariationSpec& spec, Functional tag, Real eps,
                                           int order, int resolution);

}  // namespace lhyp
