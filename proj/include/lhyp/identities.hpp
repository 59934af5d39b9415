#pragma once

#include "lhyp/functionals.hpp"

namespace lhyp {

struct IdentityReport {
  std::string id;
  std::string surface;
  Real residual_abs = 0;
  Real residual_rel = 0;
  Real tolerance = 0;
  bool pass = false;
  bool skipped = false;
  std::string note;
};

// Pointwise identities of the drift Laplacian L = Δ - <X,∇·> on a
// λ-hypersurface together with the Simons-type gradient inequalities.
// Analytic families are checked in closed form; curve products take their
// curvature derivatives from finite differences along the polyline, at a
// correspondingly looser tolerance.
std::vector<IdentityReport> check_pointwise(const Hypersurface& M, const QuadratureGrid& grid,
                                            Real tolerance_override = -1);

// Weighted integral identities; the two sides of each are integrated
// independently and compared in relative terms. The |X|^4-weighted ones are
// evaluated on a grid refined by half again.
std::vector<IdentityReport> check_integral(const Hypersurface& M, const QuadratureGrid& grid);

struct ClassificationDiagnostics {
  Real min_h_minus_lambda = 0;
  Real min_lambda_f3_term = 0;  // min of λ (f3 (H-λ) - S)
  bool h_constant = false;
  std::optional<std::pair<int, Real>> matched_cylinder;  // (k, r) when H, S constant
  Real lambda_residual_sup = 0;
  Real lambda_used = 0;
};
ClassificationDiagnostics classification_diagnostics(const Hypersurface& M,
                                                     const QuadratureGrid& grid);

// n + λ²/2 - 2β - inf(H²)/2 with β = inf(λ-H)²/4
Real growth_exponent_bound(const Hypersurface& M);

// Euclidean area of B_R(0) ∩ M: closed forms for spheres and cylinders,
// clipping quadrature for curve products.
Real ball_intersection_area(const Hypersurface& M, Real R);

struct GrowthFit {
  Real slope = 0;
  Real intercept = 0;
  Real max_residual = 0;
};
GrowthFit area_growth_slope(const Hypersurface& M, const Vector& radii);

}  // namespace lhyp
