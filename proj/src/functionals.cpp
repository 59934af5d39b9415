#include "lhyp/functionals.hpp"

#include <cmath>
#include <numbers>

namespace lhyp {

Real weighted_area(const Hypersurface&, const QuadratureGrid& grid) {
  return integrate(grid, Vector::Ones(Eigen::Index(grid.nodes.size())), true);
}

Real weighted_volume(const Hypersurface&, const QuadratureGrid& grid) {
  Vector field(Eigen::Index(grid.nodes.size()));
  for (Eigen::Index i = 0; i < field.size(); ++i) {
    const auto& g = grid.nodes[size_t(i)].sample;
    field(i) = (g.position - grid.x0).dot(g.normal);
  }
  return integrate(grid, field, true);
}

Real mean_lambda(const Hypersurface& M, const QuadratureGrid& grid) {
  Vector field(Eigen::Index(grid.nodes.size()));
  for (Eigen::Index i = 0; i < field.size(); ++i) {
    const auto& g = grid.nodes[size_t(i)].sample;
    field(i) = (g.position - grid.x0).dot(g.normal) / grid.t0 + g.mean_curvature;
  }
  return integrate(grid, field, true) / weighted_area(M, grid);
}

Real f_functional(const Hypersurface& M, const QuadratureGrid& grid, Real lambda) {
  const Real pref = std::pow(4 * std::numbers::pi * grid.t0, -M.dimension() / 2.0);
  return pref * (weighted_area(M, grid) + lambda * weighted_volume(M, grid));
}

ResidualField lambda_residual(const Hypersurface&, const QuadratureGrid& grid, Real lambda) {
  ResidualField r;
  r.values.resize(Eigen::Index(grid.nodes.size()));
  for (Eigen::Index i = 0; i < r.values.size(); ++i) {
    const auto& g = grid.nodes[size_t(i)].sample;
    r.values(i) = (g.position - grid.x0).dot(g.normal) / grid.t0 + g.mean_curvature - lambda;
    r.sup_norm = std::max(r.sup_norm, std::abs(r.values(i)));
  }
  return r;
}

}  // namespace lhyp
