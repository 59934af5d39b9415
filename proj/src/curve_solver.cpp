#include "lhyp/curve_solver.hpp"

#include "lhyp/flow.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace lhyp {

namespace {

using State = Eigen::Vector3d;  // (x, y, theta)

State rhs(const State& u, Real lambda) {
  const Real x = u(0), y = u(1), th = u(2);
  const Real kappa = lambda - (-x * std::sin(th) + y * std::cos(th));
  return State(std::cos(th), std::sin(th), kappa);
}

// Dormand-Prince 5(4) embedded step
struct DP54Step {
  State y5;
  Real error = 0;
};

DP54Step dp54(const State& u, Real h, Real lambda) {
  static const Real a21 = 1.0 / 5;
  static const Real a31 = 3.0 / 40, a32 = 9.0 / 40;
  static const Real a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static const Real a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                    a54 = -212.0 / 729;
  static const Real a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                    a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static const Real b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                    b6 = 11.0 / 84;
  static const Real e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                    e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

  const State k1 = rhs(u, lambda);
  const State k2 = rhs(u + h * a21 * k1, lambda);
  const State k3 = rhs(u + h * (a31 * k1 + a32 * k2), lambda);
  const State k4 = rhs(u + h * (a41 * k1 + a42 * k2 + a43 * k3), lambda);
  const State k5 = rhs(u + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4), lambda);
  const State k6 = rhs(u + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5), lambda);
  DP54Step out;
  out.y5 = u + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
  const State k7 = rhs(out.y5, lambda);
  const State err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
  out.error = err.norm();
  return out;
}

struct AxisReturn {
  Real s = 0;
  State state;
};

// adaptive integration until the first y = 0 crossing with s > s_min
AxisReturn integrate_to_axis(Real lambda, const State& start, Real tol, Real max_s) {
  State u = start;
  Real s = 0, h = 1e-3;
  const Real s_min = 1e-6;
  while (s < max_s) {
    h = std::min(h, max_s - s);
    const DP54Step step = dp54(u, h, lambda);
    const Real scale = tol * (1 + u.norm());
    if (step.error > scale) {
      h *= std::max(0.2, 0.9 * std::pow(scale / step.error, 0.2));
      continue;
    }
    const State u_next = step.y5;
    const Real s_next = s + h;
    if (s_next > s_min && u(1) != 0 && std::signbit(u(1)) != std::signbit(u_next(1)) &&
        s > s_min) {
      // bisect the crossing inside [s, s_next] with plain RK4 sub-steps
      Real lo = 0, hi = h;
      auto at = [&](Real ds) {
        State v = u;
        const int sub = 8;
        const Real hh = ds / sub;
        for (int i = 0; i < sub; ++i) {
          const State k1 = rhs(v, lambda);
          const State k2 = rhs(v + hh / 2 * k1, lambda);
          const State k3 = rhs(v + hh / 2 * k2, lambda);
          const State k4 = rhs(v + hh * k3, lambda);
          v += hh / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
        }
        return v;
      };
      for (int it = 0; it < 100 && hi - lo > 1e-15 * (1 + s); ++it) {
        const Real mid = (lo + hi) / 2;
        if (std::signbit(at(mid)(1)) == std::signbit(u(1)))
          lo = mid;
        else
          hi = mid;
      }
      const Real ds = (lo + hi) / 2;
      return {s + ds, at(ds)};
    }
    u = u_next;
    s = s_next;
    if (step.error > 0) h *= std::min(5.0, 0.9 * std::pow(scale / step.error, 0.2));
  }
  throw std::runtime_error("arclength budget exhausted before the axis return");
}

// fixed-step RK4 trace over [0, total], emitting every vertex
void trace_fixed(Real lambda, const State& start, Real total, int vertices,
                 Eigen::Matrix<Real, Eigen::Dynamic, 2>& pts, Vector& theta, Vector& kappa,
                 State& end_state) {
  const Real h = total / vertices;
  State u = start;
  pts.resize(vertices, 2);
  theta.resize(vertices);
  kappa.resize(vertices);
  for (int i = 0; i < vertices; ++i) {
    pts(i, 0) = u(0);
    pts(i, 1) = u(1);
    theta(i) = u(2);
    kappa(i) = rhs(u, lambda)(2);
    const State k1 = rhs(u, lambda);
    const State k2 = rhs(u + h / 2 * k1, lambda);
    const State k3 = rhs(u + h / 2 * k2, lambda);
    const State k4 = rhs(u + h * k3, lambda);
    u += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
  }
  end_state = u;
}

}  // namespace

Real circle_radius_for_lambda(Real lambda) {
  return (-lambda + std::sqrt(lambda * lambda + 4)) / 2;
}

CurveTrajectory integrate_curve(const CurveShootingProblem& problem) {
  if (!(problem.rho0 > 0)) throw std::invalid_argument("rho0 must be positive");
  if (!(problem.tolerance > 0)) throw std::invalid_argument("tolerance must be positive");
  const State start(problem.rho0, 0, std::numbers::pi / 2);
  const AxisReturn ret =
      integrate_to_axis(problem.lambda, start, problem.tolerance, problem.max_arclength);

  CurveTrajectory traj;
  traj.arclength = ret.s;
  traj.end_tangent_x = std::cos(ret.state(2));
  State end;
  trace_fixed(problem.lambda, start, ret.s, problem.output_vertices, traj.curve.vertices,
              traj.theta, traj.kappa, end);
  traj.curve.closed = false;
  traj.curve.lambda_tag = problem.lambda;

  Real lo = std::numeric_limits<Real>::infinity(), hi = -lo;
  for (Eigen::Index i = 0; i < traj.kappa.size(); ++i) {
    const Real e = traj.kappa(i) * std::exp(-(traj.curve.vertices.row(i).squaredNorm()) / 2);
    lo = std::min(lo, e);
    hi = std::max(hi, e);
  }
  traj.first_integral_spread = hi - lo;
  return traj;
}

ShootResult shoot_closed(Real lambda, Real rho_lo, Real rho_hi, const ShootOptions& opts) {
  if (!(rho_lo > 0) || !(rho_hi > rho_lo)) throw std::invalid_argument("bad rho bracket");
  auto mismatch = [&](Real rho) {
    const State start(rho, 0, std::numbers::pi / 2);
    const AxisReturn ret = integrate_to_axis(lambda, start, opts.tolerance, opts.max_arclength);
    return std::cos(ret.state(2));
  };

  ShootResult result;
  Real g_lo = mismatch(rho_lo), g_hi = mismatch(rho_hi);
  if (g_lo == 0) g_lo = mismatch(rho_lo * (1 + 1e-12));
  if (!(g_lo * g_hi < 0)) return result;  // NotFound

  Real lo = rho_lo, hi = rho_hi;
  for (int it = 0; it < opts.max_iterations && (hi - lo) > 1e-14 * (1 + hi); ++it) {
    const Real mid = (lo + hi) / 2;
    const Real g_mid = mismatch(mid);
    if (g_mid == 0) {
      lo = hi = mid;
      break;
    }
    if (std::signbit(g_mid) == std::signbit(g_lo)) {
      lo = mid;
      g_lo = g_mid;
    } else {
      hi = mid;
    }
  }
  const Real rho = (lo + hi) / 2;

  // full traverse: two reflected half-arcs
  const State start(rho, 0, std::numbers::pi / 2);
  const AxisReturn half = integrate_to_axis(lambda, start, opts.tolerance, opts.max_arclength);
  PolylineCurve curve;
  Vector theta, kappa;
  State end;
  trace_fixed(lambda, start, 2 * half.s, opts.output_vertices, curve.vertices, theta, kappa, end);
  curve.closed = true;
  curve.lambda_tag = lambda;

  result.rho0 = rho;
  result.closure_gap = std::hypot(end(0) - rho, end(1));
  const Real turning = end(2) - std::numbers::pi / 2;
  const Real windings = std::round(turning / (2 * std::numbers::pi));
  result.total_turning = turning;
  result.tangent_gap = std::abs(turning - 2 * std::numbers::pi * windings);
  result.curve = std::move(curve);
  result.embedded = !curve_self_intersects(result.curve);
  result.found = result.closure_gap <= 1e-6 && result.tangent_gap <= 1e-6;
  return result;
}

Hypersurface product_with_line(const PolylineCurve& gamma, int flat_dims, Real residual_gate) {
  if (!gamma.closed) throw std::invalid_argument("product needs a closed curve");
  if (!gamma.lambda_tag) throw std::invalid_argument("curve carries no lambda tag");
  const PolylineGeometry pg = polyline_geometry(gamma);
  Real sup = 0;
  for (const auto& g : pg.samples)
    sup = std::max(sup,
                   std::abs(g.position.dot(g.normal) + g.mean_curvature - *gamma.lambda_tag));
  if (sup > residual_gate)
    throw std::invalid_argument("curve fails the lambda-residual gate: sup = " +
                                std::to_string(sup));
  return make_curve_product(gamma, flat_dims);
}

}  // namespace lhyp
