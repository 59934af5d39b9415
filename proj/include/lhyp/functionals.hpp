#pragma once

#include "lhyp/quadrature.hpp"

namespace lhyp {

struct FunctionalContext {
  Vector x0;       // empty = origin
  Real t0 = 1;
  Real lambda = 0;
};

// A = ∫ e^{-|X-X0|^2/(2 t0)} dμ
Real weighted_area(const Hypersurface& M, const QuadratureGrid& grid);

// V = ∫ <X-X0, N> e^{-|X-X0|^2/(2 t0)} dμ
Real weighted_volume(const Hypersurface& M, const QuadratureGrid& grid);

// weighted average of <(X-X0)/t0, N> + H
Real mean_lambda(const Hypersurface& M, const QuadratureGrid& grid);

// (4π t0)^{-n/2} (A + λ V), the value of the F-functional at s = 0
Real f_functional(const Hypersurface& M, const QuadratureGrid& grid, Real lambda);

// pointwise residual r = <(X-X0)/t0, N> + H - λ over the grid nodes
struct ResidualField {
  Vector values;
  Real sup_norm = 0;
};
ResidualField lambda_residual(const Hypersurface& M, const QuadratureGrid& grid, Real lambda);

}  // namespace lhyp
