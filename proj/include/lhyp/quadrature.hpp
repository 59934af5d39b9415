#pragma once

#include "lhyp/geometry.hpp"

namespace lhyp {

struct GridNode {
  GeometrySample sample;
  Real weight = 0;    // plain area element
  Real gaussian = 0;  // e^{-|X-X0|^2/(2 t0)} at the node
};

// Quadrature nodes on a hypersurface together with the Gaussian the grid was
// built against. Sphere factors use Gauss-Legendre in the angular
// coordinates, flat factors Gauss-Hermite matched to the Gaussian weight,
// polylines the composite midpoint rule over arclength.
struct QuadratureGrid {
  std::vector<GridNode> nodes;
  Vector x0;
  Real t0 = 1;
  Real truncation = 0;  // largest |z - z0| covered on flat factors
  int dimension = 0;
  int resolution = 0;

  Real weight_sum() const;
};

QuadratureGrid build_grid(const Hypersurface& M, int resolution, const Vector& x0 = Vector(),
                          Real t0 = 1);

// Compensated (Kahan) sum of field * weight * (gaussian if requested).
Real integrate(const QuadratureGrid& grid, const Vector& field, bool use_gaussian);

// 1-d rules on [-1,1] and for weight e^{-x^2} (Golub-Welsch via Eigen).
struct QuadratureRule {
  Vector points;
  Vector weights;
};
QuadratureRule gauss_legendre(int m);
QuadratureRule gauss_hermite(int m);

// Nodes and weights on the unit sphere S^k in R^{k+1}; weights sum to its area.
struct UnitSphereGrid {
  std::vector<Vector> directions;
  Vector weights;
};
UnitSphereGrid unit_sphere_grid(int k, int resolution);

Real unit_sphere_area(int k);
Real unit_ball_volume(int m);

// A scalar field with enough derivative data for integration by parts:
// nodal values, tangential gradients, and the drift Laplacian Lv = Δv - <X,∇v>.
struct SmoothField {
  Vector values;
  Matrix gradients;       // one ambient (tangential) row per node
  Vector drift_laplacian; // size 0 when unavailable
};

// |∫ u (Lv) w dμ + ∫ <∇u,∇v> w dμ| against the grid's Gaussian.
Real integration_by_parts_residual(const QuadratureGrid& grid, const SmoothField& u,
                                   const SmoothField& v);

// Closed-form fields on the analytic families (and curve products, where the
// curvature derivatives come from finite differences along the curve).
SmoothField field_constant(const Hypersurface& M, const QuadratureGrid& grid, Real value);
SmoothField field_position_dot(const Hypersurface& M, const QuadratureGrid& grid, const Vector& a);
SmoothField field_normal_dot(const Hypersurface& M, const QuadratureGrid& grid, const Vector& a);
SmoothField field_position_norm2(const Hypersurface& M, const QuadratureGrid& grid);
// restriction of <N, B N> on a sphere, B symmetric; trace part folds into a constant
SmoothField field_sphere_quadratic(const Hypersurface& M, const QuadratureGrid& grid,
                                   const Matrix& B);

}  // namespace lhyp
