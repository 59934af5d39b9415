#pragma once

#include "lhyp/geometry.hpp"

namespace lhyp {

// Planar λ-curve equation κ + <X,N> = λ as the arclength system
// X' = T, θ' = κ = λ - <X,N>, started on the positive x-axis with upward
// tangent (a distance-extremal point, so the solution is symmetric about
// the axis).
struct CurveShootingProblem {
  Real lambda = 0;
  Real rho0 = 1;            // starting distance from the origin
  Real tolerance = 1e-12;   // local error control of the adaptive stepper
  Real max_arclength = 80;
  int output_vertices = 4096;
};

struct CurveTrajectory {
  PolylineCurve curve;      // open; vertices at equal arclength steps
  Vector theta;             // tangent angle per vertex
  Vector kappa;             // curvature per vertex from the defining equation
  Real arclength = 0;       // of the integrated piece (up to the axis return)
  Real end_tangent_x = 0;   // cos θ at the axis return; 0 means perpendicular
  Real first_integral_spread = 0;  // max variation of κ e^{-|X|²/2} along the way
};

// Integrate until the first return to the symmetry axis. Throws when the
// arclength budget is exhausted before the axis is reached.
CurveTrajectory integrate_curve(const CurveShootingProblem& problem);

struct ShootOptions {
  Real tolerance = 1e-12;
  Real max_arclength = 80;
  int output_vertices = 4096;
  int max_iterations = 200;
};

struct ShootResult {
  bool found = false;
  PolylineCurve curve;     // closed, tagged with lambda
  Real rho0 = 0;
  Real closure_gap = 0;
  Real tangent_gap = 0;
  Real total_turning = 0;  // 2π times the rotation index
  bool embedded = false;
};

// Bisection on the axis-return angle over [rho_lo, rho_hi]; NotFound (found
// = false) when the bracket has no sign change.
ShootResult shoot_closed(Real lambda, Real rho_lo, Real rho_hi, const ShootOptions& opts = {});

// Γ x R^m; requires a closed curve whose λ-residual (with the discrete
// curvature estimate) passes the verification gate.
Hypersurface product_with_line(const PolylineCurve& gamma, int flat_dims,
                               Real residual_gate = 1e-3);

Real circle_radius_for_lambda(Real lambda);  // positive root of r² + λ r - 1 = 0

}  // namespace lhyp
