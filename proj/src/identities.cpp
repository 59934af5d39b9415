#include "lhyp/identities.hpp"

#include <cmath>
#include <stdexcept>

namespace lhyp {

namespace {

Real require_lambda(const Hypersurface& M) {
  const auto lam = M.lambda_exact();
  if (!lam) throw std::invalid_argument("surface carries no lambda value: " + M.describe());
  return *lam;
}

bool analytic_family(const Hypersurface& M) {
  return M.as<Sphere>() != nullptr || M.as<Cylinder>() != nullptr;
}

// curvature and arclength derivatives of per-vertex fields on the closed
// generating curve; three-point formulas on the (mildly) nonuniform spacing
struct CurveFields {
  Vector kappa;
  Vector dual;  // arclength weights
  Eigen::Index per_vertex = 1;

  Vector d1(const Vector& f) const {
    const Eigen::Index m = f.size();
    Vector out(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      const Eigen::Index p = (i + m - 1) % m, q = (i + 1) % m;
      const Real h1 = (dual(p) + dual(i)) / 2, h2 = (dual(i) + dual(q)) / 2;
      out(i) = (f(q) * h1 * h1 - f(p) * h2 * h2 + f(i) * (h2 * h2 - h1 * h1)) /
               (h1 * h2 * (h1 + h2));
    }
    return out;
  }
  Vector d2(const Vector& f) const {
    const Eigen::Index m = f.size();
    Vector out(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      const Eigen::Index p = (i + m - 1) % m, q = (i + 1) % m;
      const Real h1 = (dual(p) + dual(i)) / 2, h2 = (dual(i) + dual(q)) / 2;
      out(i) = 2 * (f(p) * h2 + f(q) * h1 - f(i) * (h1 + h2)) / (h1 * h2 * (h1 + h2));
    }
    return out;
  }
};

std::optional<CurveFields> curve_fields(const Hypersurface& M, const QuadratureGrid& grid) {
  const PolylineCurve* curve = nullptr;
  if (const auto* p = M.as<PolylineCurve>()) curve = p;
  if (const auto* cp = M.as<CurveProduct>()) curve = &cp->curve;
  if (!curve) return std::nullopt;
  const PolylineGeometry pg = polyline_geometry(*curve);
  CurveFields cf;
  const Eigen::Index nv = Eigen::Index(pg.samples.size());
  cf.kappa.resize(nv);
  cf.dual.resize(nv);
  for (Eigen::Index i = 0; i < nv; ++i) {
    cf.kappa(i) = pg.samples[size_t(i)].mean_curvature;
    cf.dual(i) = pg.dual_lengths(i);
  }
  cf.per_vertex = Eigen::Index(grid.nodes.size()) / nv;
  return cf;
}

struct SupTracker {
  Real sup = 0;
  Real scale = 1;
  void add(Real lhs, Real rhs) {
    sup = std::max(sup, std::abs(lhs - rhs));
    scale = std::max({scale, std::abs(lhs), std::abs(rhs)});
  }
};

IdentityReport finish(const std::string& id, const Hypersurface& M, const SupTracker& t,
                      Real tol) {
  IdentityReport rep;
  rep.id = id;
  rep.surface = M.describe();
  rep.residual_abs = t.sup;
  rep.residual_rel = t.sup / t.scale;
  rep.tolerance = tol;
  rep.pass = rep.residual_rel <= tol;
  return rep;
}

IdentityReport skipped(const std::string& id, const Hypersurface& M, const std::string& why) {
  IdentityReport rep;
  rep.id = id;
  rep.surface = M.describe();
  rep.skipped = true;
  rep.pass = true;
  rep.note = why;
  return rep;
}

std::vector<Vector> direction_battery(int dim) {
  std::vector<Vector> out;
  for (int i = 0; i < dim; ++i) {
    Vector e = Vector::Zero(dim);
    e(i) = 1;
    out.push_back(e);
  }
  out.push_back(Vector::Constant(dim, 1.0 / std::sqrt(Real(dim))));
  return out;
}

}  // namespace

std::vector<IdentityReport> check_pointwise(const Hypersurface& M, const QuadratureGrid& grid,
                                            Real tolerance_override) {
  const Real lambda = require_lambda(M);
  const bool analytic = analytic_family(M);
  const Real tol = tolerance_override > 0 ? tolerance_override : (analytic ? 1e-8 : 1e-4);
  const int n = M.dimension();
  const int amb = M.ambient_dimension();
  const Eigen::Index m = Eigen::Index(grid.nodes.size());
  std::vector<IdentityReport> reports;

  // first-order fields: residuals through the closed-form drift Laplacians
  {
    SupTracker t_pos, t_nrm;
    for (const Vector& a : direction_battery(amb)) {
      const SmoothField fx = field_position_dot(M, grid, a);
      const SmoothField fn = field_normal_dot(M, grid, a);
      for (Eigen::Index i = 0; i < m; ++i) {
        const auto& g = grid.nodes[size_t(i)].sample;
        t_pos.add(fx.drift_laplacian(i), lambda * fn.values(i) - fx.values(i));
        t_nrm.add(fn.drift_laplacian(i), -g.second_form_norm2 * fn.values(i));
      }
    }
    reports.push_back(finish("drift_position", M, t_pos, tol));
    reports.push_back(finish("drift_normal", M, t_nrm, tol));
  }
  {
    SupTracker t;
    const SmoothField fq = field_position_norm2(M, grid);
    for (Eigen::Index i = 0; i < m; ++i) {
      const auto& g = grid.nodes[size_t(i)].sample;
      const Real xn = g.position.dot(g.normal);
      t.add(fq.drift_laplacian(i) / 2, n - g.position.squaredNorm() + lambda * xn);
    }
    reports.push_back(finish("drift_position_norm", M, t, tol));
  }

  // curvature fields: exact zeros on the analytic families, finite
  // differences along the generating curve otherwise
  const auto cf = curve_fields(M, grid);
  Vector kp, hijk2, xt_vertex;
  if (cf) {
    kp = cf->d1(cf->kappa);
    hijk2 = kp.cwiseProduct(kp);
    // <X, T> per vertex; T = rot(-90) N in the plane
    xt_vertex.resize(cf->kappa.size());
    for (Eigen::Index v = 0; v < xt_vertex.size(); ++v) {
      const auto& g = grid.nodes[size_t(v * cf->per_vertex)].sample;
      xt_vertex(v) = g.position(0) * g.normal(1) - g.position(1) * g.normal(0);
    }
  }
  // Lu = u'' - u' <X, T> along the curve, per vertex
  auto curve_drift = [&](const Vector& field_vertex) -> Vector {
    return cf->d2(field_vertex) - cf->d1(field_vertex).cwiseProduct(xt_vertex);
  };

  {
    SupTracker t;
    const Vector lhs_v = cf ? curve_drift(cf->kappa) : Vector();
    for (Eigen::Index i = 0; i < m; ++i) {
      const auto& g = grid.nodes[size_t(i)].sample;
      const Real rhs = g.mean_curvature + g.second_form_norm2 * (lambda - g.mean_curvature);
      t.add(cf ? lhs_v(i / cf->per_vertex) : 0, rhs);
    }
    reports.push_back(finish("drift_mean_curvature", M, t, tol));
  }
  {
    SupTracker t;
    const Vector lhs_v = cf ? curve_drift(cf->kappa.cwiseProduct(cf->kappa)) : Vector();
    for (Eigen::Index i = 0; i < m; ++i) {
      const auto& g = grid.nodes[size_t(i)].sample;
      const Real S = g.second_form_norm2;
      const Real h2 = cf ? hijk2(i / cf->per_vertex) : 0;
      const Real rhs = h2 + (1 - S) * S + lambda * g.cubic_trace;
      t.add(cf ? lhs_v(i / cf->per_vertex) / 2 : 0, rhs);
    }
    reports.push_back(finish("drift_second_form", M, t, tol));
  }
  {
    Real minS = std::numeric_limits<Real>::infinity();
    for (const auto& node : grid.nodes) minS = std::min(minS, node.sample.second_form_norm2);
    if (minS <= 1e-6) {
      reports.push_back(skipped("drift_sqrt_second_form", M, "S vanishes somewhere"));
    } else {
      SupTracker t;
      const Vector sqrtS = cf ? Vector(cf->kappa.cwiseAbs()) : Vector();
      const Vector dsq = cf ? cf->d1(sqrtS) : Vector();
      const Vector lhs_v = cf ? curve_drift(sqrtS) : Vector();
      for (Eigen::Index i = 0; i < m; ++i) {
        const auto& g = grid.nodes[size_t(i)].sample;
        const Real S = g.second_form_norm2;
        const Real rootS = std::sqrt(S);
        const Eigen::Index v = cf ? i / cf->per_vertex : 0;
        const Real h2 = cf ? hijk2(v) : 0;
        const Real grad2 = cf ? dsq(v) * dsq(v) : 0;
        const Real rhs = (h2 - grad2) / rootS + rootS * (1 - S) + lambda * g.cubic_trace / rootS;
        t.add(cf ? lhs_v(v) : 0, rhs);
      }
      reports.push_back(finish("drift_sqrt_second_form", M, t, tol));
    }
  }
  {
    Real min_hml = std::numeric_limits<Real>::infinity();
    for (const auto& node : grid.nodes)
      min_hml = std::min(min_hml, node.sample.mean_curvature - lambda);
    if (min_hml <= 1e-6) {
      reports.push_back(skipped("drift_log_h_minus_lambda", M, "H - lambda not positive"));
    } else {
      SupTracker t;
      Vector logf;
      if (cf) logf = (cf->kappa.array() - lambda).log().matrix();
      const Vector dlog = cf ? cf->d1(logf) : Vector();
      const Vector lhs_v = cf ? curve_drift(logf) : Vector();
      for (Eigen::Index i = 0; i < m; ++i) {
        const auto& g = grid.nodes[size_t(i)].sample;
        const Eigen::Index v = cf ? i / cf->per_vertex : 0;
        const Real grad2 = cf ? dlog(v) * dlog(v) : 0;
        const Real rhs = 1 - g.second_form_norm2 + lambda / (g.mean_curvature - lambda) - grad2;
        t.add(cf ? lhs_v(v) : 0, rhs);
      }
      reports.push_back(finish("drift_log_h_minus_lambda", M, t, tol));
    }
  }

  // Simons-type gradient inequalities, reported as minimal slack
  {
    Real slack_a = std::numeric_limits<Real>::infinity();
    Real slack_b = std::numeric_limits<Real>::infinity();
    Real slack_c = std::numeric_limits<Real>::infinity();
    Vector dsq;
    if (cf) {
      Vector sqrtS = cf->kappa.cwiseAbs();
      dsq = cf->d1(sqrtS);
    }
    for (Eigen::Index i = 0; i < m; ++i) {
      const Eigen::Index v = cf ? i / cf->per_vertex : 0;
      const Real grad_sqrtS2 = cf ? dsq(v) * dsq(v) : 0;
      const Real h_iik2 = cf ? hijk2(v) : 0;   // rank-one case: only h_111
      const Real h_ijk2 = cf ? hijk2(v) : 0;
      const Real gradH2 = cf ? hijk2(v) : 0;
      slack_a = std::min(slack_a, h_iik2 - grad_sqrtS2);
      slack_b = std::min(slack_b, h_ijk2 - h_iik2);
      slack_c = std::min(slack_c, h_ijk2 + 2.0 * n / (n + 1) * gradH2 -
                                      Real(n + 3) / (n + 1) * grad_sqrtS2);
    }
    auto ineq_report = [&](const std::string& id, Real slack) {
      IdentityReport rep;
      rep.id = id;
      rep.surface = M.describe();
      rep.residual_abs = std::max<Real>(0, -slack);
      rep.residual_rel = rep.residual_abs;
      rep.tolerance = tol;
      rep.pass = slack >= -tol;
      rep.note = "min slack " + std::to_string(slack);
      reports.push_back(rep);
    };
    ineq_report("simons_gradient_bound", slack_a);
    ineq_report("simons_full_gradient", slack_b);
    ineq_report("simons_refined_gradient", slack_c);
  }
  return reports;
}

std::vector<IdentityReport> check_integral(const Hypersurface& M, const QuadratureGrid& grid) {
  const Real lambda = require_lambda(M);
  if (grid.x0.norm() != 0 || grid.t0 != 1)
    throw std::invalid_argument("integral identities are stated at X0 = 0, t0 = 1");
  const bool analytic = analytic_family(M);
  const Real tol = analytic ? 1e-6 : 1e-4;
  const int n = M.dimension();
  const int amb = M.ambient_dimension();
  std::vector<IdentityReport> reports;

  // heavier |X|^4 moments get a grid refined by half again
  const QuadratureGrid fine = build_grid(M, grid.resolution + grid.resolution / 2);
  const auto battery = direction_battery(amb);

  auto node_field = [](const QuadratureGrid& g, auto&& fn) {
    Vector v(Eigen::Index(g.nodes.size()));
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = fn(g.nodes[size_t(i)].sample);
    return v;
  };
  auto report_two_sided = [&](const std::string& id, Real lhs, Real rhs, Real floor) {
    IdentityReport rep;
    rep.id = id;
    rep.surface = M.describe();
    rep.residual_abs = std::abs(lhs - rhs);
    rep.residual_rel = rep.residual_abs / std::max({std::abs(lhs), std::abs(rhs), floor});
    rep.tolerance = tol;
    rep.pass = rep.residual_rel <= tol;
    return rep;
  };
  auto worst = [](IdentityReport& acc, const IdentityReport& cand) {
    if (cand.residual_rel > acc.residual_rel) acc = cand;
  };

  const Real area = weighted_area(M, grid);

  {  // ∫ (<X,a> - λ<N,a>) w dμ = 0
    IdentityReport acc;
    acc.residual_rel = -1;
    for (const Vector& a : battery) {
      const Real lhs = integrate(grid,
                                 node_field(grid,
                                            [&](const GeometrySample& g) {
                                              return g.position.dot(a) -
                                                     lambda * g.normal.dot(a);
                                            }),
                                 true);
      const Real scale = integrate(grid,
                                   node_field(grid,
                                              [&](const GeometrySample& g) {
                                                return std::abs(g.position.dot(a)) +
                                                       std::abs(lambda * g.normal.dot(a));
                                              }),
                                   true);
      worst(acc, report_two_sided("integral_first_moment", lhs, 0, std::max(scale, area)));
    }
    reports.push_back(acc);
  }
  {  // ∫ (n - |X|^2 + λ<X,N>) w dμ = 0
    const Real lhs = integrate(grid,
                               node_field(grid,
                                          [&](const GeometrySample& g) {
                                            return n - g.position.squaredNorm() +
                                                   lambda * g.position.dot(g.normal);
                                          }),
                               true);
    reports.push_back(report_two_sided("integral_position_norm", lhs, 0, n * area));
  }
  {  // ∫ <X,a>|X|^2 w = ∫ (2nλ<N,a> + 2λ<X,a>(λ-H) - λ<N,a>|X|^2) w
    IdentityReport acc;
    acc.residual_rel = -1;
    for (const Vector& a : battery) {
      const Real lhs = integrate(fine,
                                 node_field(fine,
                                            [&](const GeometrySample& g) {
                                              return g.position.dot(a) *
                                                     g.position.squaredNorm();
                                            }),
                                 true);
      const Real rhs = integrate(
          fine,
          node_field(fine,
                     [&](const GeometrySample& g) {
                       const Real xa = g.position.dot(a), na = g.normal.dot(a);
                       return 2 * n * lambda * na + 2 * lambda * xa * (lambda - g.mean_curvature) -
                              lambda * na * g.position.squaredNorm();
                     }),
          true);
      worst(acc, report_two_sided("integral_cubic_moment", lhs, rhs, n * area));
    }
    reports.push_back(acc);
  }
  {  // ∫ <X,a>^2 w = ∫ (|a^T|^2 + λ<N,a><X,a>) w
    IdentityReport acc;
    acc.residual_rel = -1;
    for (const Vector& a : battery) {
      const Real lhs = integrate(grid,
                                 node_field(grid,
                                            [&](const GeometrySample& g) {
                                              const Real xa = g.position.dot(a);
                                              return xa * xa;
                                            }),
                                 true);
      const Real rhs = integrate(grid,
                                 node_field(grid,
                                            [&](const GeometrySample& g) {
                                              const Real xa = g.position.dot(a),
                                                         na = g.normal.dot(a);
                                              return a.squaredNorm() - na * na + lambda * na * xa;
                                            }),
                                 true);
      worst(acc, report_two_sided("integral_square_moment", lhs, rhs, area));
    }
    reports.push_back(acc);
  }
  {  // ∫ (|X|^2 - n - λ(λ-H)/2)^2 w = ∫ ((λ²/4 - 1)(λ-H)² + 2n - H² + λ²) w
    const Real lhs = integrate(
        fine,
        node_field(fine,
                   [&](const GeometrySample& g) {
                     const Real q = g.position.squaredNorm() - n -
                                    lambda * (lambda - g.mean_curvature) / 2;
                     return q * q;
                   }),
        true);
    const Real rhs = integrate(
        fine,
        node_field(fine,
                   [&](const GeometrySample& g) {
                     const Real d = lambda - g.mean_curvature;
                     return (lambda * lambda / 4 - 1) * d * d + 2 * n -
                            g.mean_curvature * g.mean_curvature + lambda * lambda;
                   }),
        true);
    reports.push_back(report_two_sided("integral_quartic_moment", lhs, rhs, n * area));
  }
  return reports;
}

ClassificationDiagnostics classification_diagnostics(const Hypersurface& M,
                                                     const QuadratureGrid& grid) {
  ClassificationDiagnostics d;
  d.lambda_used = M.lambda_exact() ? *M.lambda_exact() : mean_lambda(M, grid);
  const Real lambda = d.lambda_used;

  Real minH = std::numeric_limits<Real>::infinity(), maxH = -minH;
  Real minS = std::numeric_limits<Real>::infinity(), maxS = -minS;
  d.min_h_minus_lambda = std::numeric_limits<Real>::infinity();
  d.min_lambda_f3_term = std::numeric_limits<Real>::infinity();
  for (const auto& node : grid.nodes) {
    const auto& g = node.sample;
    const Real H = g.mean_curvature;
    minH = std::min(minH, H);
    maxH = std::max(maxH, H);
    minS = std::min(minS, g.second_form_norm2);
    maxS = std::max(maxS, g.second_form_norm2);
    d.min_h_minus_lambda = std::min(d.min_h_minus_lambda, H - lambda);
    d.min_lambda_f3_term =
        std::min(d.min_lambda_f3_term,
                 lambda * (g.cubic_trace * (H - lambda) - g.second_form_norm2));
    const Real resid = g.position.dot(g.normal) + H - lambda;
    d.lambda_residual_sup = std::max(d.lambda_residual_sup, std::abs(resid));
  }
  const Real h_scale = std::max({Real(1), std::abs(minH), std::abs(maxH)});
  d.h_constant = (maxH - minH) <= 1e-6 * h_scale;
  if (d.h_constant && (maxS - minS) <= 1e-6 * std::max(Real(1), maxS)) {
    if (maxS <= 1e-12) {
      d.matched_cylinder = std::make_pair(0, -lambda);
    } else {
      const Real H = (minH + maxH) / 2, S = (minS + maxS) / 2;
      const Real k_est = H * H / S;
      const int k = int(std::lround(k_est));
      if (k >= 1 && std::abs(k_est - k) <= 1e-6) d.matched_cylinder = std::make_pair(k, H / S);
    }
  }
  return d;
}

Real growth_exponent_bound(const Hypersurface& M) {
  const Real lambda = require_lambda(M);
  const int n = M.dimension();
  Real inf_h2 = 0, inf_dev2 = 0;
  if (const auto* s = M.as<Sphere>()) {
    inf_h2 = Real(s->n) / s->radius * Real(s->n) / s->radius;
    inf_dev2 = s->radius * s->radius;
  } else if (const auto* c = M.as<Cylinder>()) {
    const Real H = c->k == 0 ? 0 : Real(c->k) / c->radius;
    inf_h2 = H * H;
    inf_dev2 = c->radius * c->radius;
  } else {
    const PolylineCurve* curve =
        M.as<PolylineCurve>() ? M.as<PolylineCurve>() : &M.as<CurveProduct>()->curve;
    const PolylineGeometry pg = polyline_geometry(*curve);
    inf_h2 = std::numeric_limits<Real>::infinity();
    inf_dev2 = inf_h2;
    for (const auto& g : pg.samples) {
      inf_h2 = std::min(inf_h2, g.mean_curvature * g.mean_curvature);
      const Real dev = lambda - g.mean_curvature;
      inf_dev2 = std::min(inf_dev2, dev * dev);
    }
  }
  return n + lambda * lambda / 2 - inf_dev2 / 2 - inf_h2 / 2;
}

Real ball_intersection_area(const Hypersurface& M, Real R) {
  if (const auto* s = M.as<Sphere>()) {
    const Real circum = (s->center.size() ? s->center.norm() : 0) + s->radius;
    if (R <= circum) throw std::invalid_argument("R must exceed the circumradius");
    return unit_sphere_area(s->n) * std::pow(s->radius, s->n);
  }
  if (const auto* c = M.as<Cylinder>()) {
    if (R <= c->radius) throw std::invalid_argument("R must exceed the compact-factor radius");
    const Real half_width = std::sqrt(R * R - c->radius * c->radius);
    const int flat = c->n - c->k;
    const Real flat_vol = unit_ball_volume(flat) * std::pow(half_width, flat);
    if (c->k == 0) return flat_vol;
    return unit_sphere_area(c->k) * std::pow(c->radius, c->k) * flat_vol;
  }
  const PolylineCurve* curve =
      M.as<PolylineCurve>() ? M.as<PolylineCurve>() : &M.as<CurveProduct>()->curve;
  const int flat = M.as<CurveProduct>() ? M.as<CurveProduct>()->flat_dims : 0;
  const PolylineGeometry pg = polyline_geometry(*curve);
  Real circum = 0;
  for (const auto& g : pg.samples) circum = std::max(circum, g.position.norm());
  if (R <= circum) throw std::invalid_argument("R must exceed the compact-factor circumradius");
  if (flat == 0) return pg.total_length;
  Real sum = 0;
  for (size_t i = 0; i < pg.samples.size(); ++i) {
    const Real d2 = pg.samples[i].position.squaredNorm();
    sum += unit_ball_volume(flat) * std::pow(R * R - d2, flat / 2.0) *
           pg.dual_lengths(Eigen::Index(i));
  }
  return sum;
}

GrowthFit area_growth_slope(const Hypersurface& M, const Vector& radii) {
  if (radii.size() < 4) throw std::invalid_argument("need at least 4 radii");
  for (Eigen::Index i = 1; i < radii.size(); ++i)
    if (radii(i) <= radii(i - 1)) throw std::invalid_argument("radii must increase");
  Matrix A(radii.size(), 2);
  Vector b(radii.size());
  for (Eigen::Index i = 0; i < radii.size(); ++i) {
    A(i, 0) = std::log(radii(i));
    A(i, 1) = 1;
    b(i) = std::log(ball_intersection_area(M, radii(i)));
  }
  const Vector coef = A.colPivHouseholderQr().solve(b);
  GrowthFit fit;
  fit.slope = coef(0);
  fit.intercept = coef(1);
  fit.max_residual = (A * coef - b).cwiseAbs().maxCoeff();
  return fit;
}

}  // namespace lhyp
