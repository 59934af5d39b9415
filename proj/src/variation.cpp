#include "lhyp/variation.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace lhyp {

namespace {
constexpr Real kPi = std::numbers::pi;

const Sphere& require_origin_sphere(const Hypersurface& M, const char* what) {
  const auto* s = M.as<Sphere>();
  if (!s || (s->center.size() && s->center.norm() != 0))
    throw std::invalid_argument(std::string(what) + " requires an origin-centered sphere");
  return *s;
}
}  // namespace

VariationField VariationField::constant(Real a) {
  VariationField f;
  f.constant_ = a;
  return f;
}

VariationField VariationField::linear(const Vector& z) {
  VariationField f;
  f.linear_ = z;
  return f;
}

VariationField VariationField::quadratic(const Matrix& B) {
  VariationField f;
  f.add_quadratic(B);
  return f;
}

VariationField VariationField::nodal(Vector values) {
  VariationField f;
  f.nodal_ = std::move(values);
  return f;
}

VariationField& VariationField::add_constant(Real a) {
  constant_ += a;
  return *this;
}

VariationField& VariationField::add_linear(const Vector& z) {
  if (linear_.size() == 0)
    linear_ = z;
  else
    linear_ += z;
  return *this;
}

VariationField& VariationField::add_quadratic(const Matrix& B) {
  const Matrix Bs = (B + B.transpose()) / 2;
  const Real trace_part = Bs.trace() / Bs.rows();
  constant_ += trace_part;
  const Matrix B0 = Bs - trace_part * Matrix::Identity(Bs.rows(), Bs.cols());
  if (quadratic_.size() == 0)
    quadratic_ = B0;
  else
    quadratic_ += B0;
  return *this;
}

Real VariationField::eval(const GeometrySample& g) const {
  if (nodal_.size()) throw std::logic_error("nodal variation field has no pointwise form");
  Real v = constant_;
  if (linear_.size()) v += g.normal.dot(linear_);
  if (quadratic_.size()) v += g.normal.dot(quadratic_ * g.normal);
  return v;
}

Vector VariationField::unit_sphere_gradient(const Vector& u) const {
  Vector grad = Vector::Zero(u.size());
  if (linear_.size()) grad -= linear_ - linear_.dot(u) * u;  // f has <z,N> = -<z,u>
  if (quadratic_.size()) {
    const Vector Bu = quadratic_ * u;
    grad += 2 * (Bu - u.dot(Bu) * u);
  }
  return grad;
}

Vector VariationField::materialize(const QuadratureGrid& grid) const {
  const Eigen::Index m = Eigen::Index(grid.nodes.size());
  if (nodal_.size()) {
    if (nodal_.size() != m) throw std::invalid_argument("nodal field length mismatch");
    return nodal_;
  }
  Vector v(m);
  for (Eigen::Index i = 0; i < m; ++i) v(i) = eval(grid.nodes[size_t(i)].sample);
  return v;
}

Vector VariationField::drift_laplacian_on_sphere(const QuadratureGrid& grid, int n, Real r) const {
  if (nodal_.size())
    throw std::invalid_argument("drift Laplacian needs an analytic variation field");
  const Real mu1 = n / (r * r);
  const Real mu2 = (2.0 * n + 2.0) / (r * r);
  const Eigen::Index m = Eigen::Index(grid.nodes.size());
  Vector out = Vector::Zero(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto& g = grid.nodes[size_t(i)].sample;
    if (linear_.size()) out(i) -= mu1 * g.normal.dot(linear_);
    if (quadratic_.size()) out(i) -= mu2 * g.normal.dot(quadratic_ * g.normal);
  }
  return out;
}

Vector project_volume_preserving(const Hypersurface& M, const QuadratureGrid& grid,
                                 const Vector& f) {
  const Real mean = integrate(grid, f, true) / weighted_area(M, grid);
  return f.array() - mean;
}

Real analytic_first_variation_area(const Hypersurface&, const QuadratureGrid& grid,
                                   const VariationSpec& spec) {
  const Vector f = spec.f.materialize(grid);
  Vector field(f.size());
  for (Eigen::Index i = 0; i < f.size(); ++i) {
    const auto& g = grid.nodes[size_t(i)].sample;
    field(i) = (-(g.position - grid.x0).dot(g.normal) / grid.t0 - g.mean_curvature) * f(i);
  }
  return integrate(grid, field, true);
}

Real analytic_first_variation_volume(const Hypersurface&, const QuadratureGrid& grid,
                                     const VariationSpec& spec) {
  return integrate(grid, spec.f.materialize(grid), true);
}

Real analytic_first_variation_f(const Hypersurface& M, const QuadratureGrid& grid,
                                const VariationSpec& spec, Real lambda) {
  const Vector f = spec.f.materialize(grid);
  const int n = M.dimension();
  const Vector y = spec.y.size() ? spec.y : Vector::Zero(M.ambient_dimension());
  Vector field(f.size());
  for (Eigen::Index i = 0; i < f.size(); ++i) {
    const auto& g = grid.nodes[size_t(i)].sample;
    const Vector d = g.position - grid.x0;
    const Real xn = d.dot(g.normal);
    Real term = (lambda - (g.mean_curvature + xn / grid.t0)) * f(i);
    term += d.dot(y) / grid.t0 - lambda * g.normal.dot(y);
    term += (d.squaredNorm() / grid.t0 - n - lambda * xn) * spec.h / (2 * grid.t0);
    field(i) = term;
  }
  return std::pow(4 * kPi * grid.t0, -n / 2.0) * integrate(grid, field, true);
}

Real analytic_second_variation_f_form(const Hypersurface& M, const QuadratureGrid& grid,
                                      const VariationSpec& spec, Real lambda) {
  const Sphere& s = require_origin_sphere(M, "second variation");
  if (grid.t0 != 1 || grid.x0.norm() != 0)
    throw std::invalid_argument("second variation is evaluated at X0 = 0, t0 = 1");
  const int n = s.n;
  const Vector f = spec.f.materialize(grid);
  const Vector Lcal = spec.f.drift_laplacian_on_sphere(grid, n, s.radius);
  const Vector y = spec.y.size() ? spec.y : Vector::Zero(n + 1);
  const Real h = spec.h;

  const Eigen::Index m = f.size();
  Vector field(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto& g = grid.nodes[size_t(i)].sample;
    const Real S = g.second_form_norm2;
    const Real H = g.mean_curvature;
    const Real x2 = g.position.squaredNorm();
    const Real xy = g.position.dot(y);
    const Real ny = g.normal.dot(y);
    const Real Lf = Lcal(i) + (S + 1 - lambda * lambda) * f(i);
    Real term = -f(i) * Lf;
    term += -y.squaredNorm() + xy * xy;
    term += (2 * ny + (n + 1 - x2) * lambda * h - 2 * h * H - 2 * lambda * xy) * f(i);
    term += (lambda * ny - (n + 2) * xy + xy * x2) * h;
    term += ((n * n + 2.0 * n) / 4 - (n + 2) / 2.0 * x2 + x2 * x2 / 4 +
             3 * lambda / 4 * (lambda - H)) *
            h * h;
    field(i) = term;
  }
  return integrate(grid, field, true);
}

Real analytic_second_variation_t_form(const Hypersurface& M, const QuadratureGrid& grid,
                                      const VariationField& fin) {
  const Sphere& s = require_origin_sphere(M, "T second variation");
  if (grid.t0 != 1 || grid.x0.norm() != 0)
    throw std::invalid_argument("T second variation is evaluated at X0 = 0, t0 = 1");
  const Real lambda = s.n / s.radius - s.radius;
  const Vector f = fin.materialize(grid);
  const Real mean = std::abs(integrate(grid, f, true));
  const Real scale = weighted_area(M, grid) * (1 + f.cwiseAbs().maxCoeff());
  if (mean > 1e-8 * scale)
    throw std::invalid_argument("T second variation needs a weighted volume-preserving field");
  const Vector Lcal = fin.drift_laplacian_on_sphere(grid, s.n, s.radius);
  Vector field(f.size());
  for (Eigen::Index i = 0; i < f.size(); ++i) {
    const auto& g = grid.nodes[size_t(i)].sample;
    field(i) = -f(i) * (Lcal(i) + (g.second_form_norm2 + 1 - lambda * lambda) * f(i));
  }
  return integrate(grid, field, true);
}

namespace {

// F-functional pieces of a deformed surface described by per-node data.
struct DeformedEval {
  // current surface
  std::vector<Vector> positions;
  Vector area_elements;
  // frozen reference for the volume term
  std::vector<Vector> ref_normals;
  Vector ref_weights;  // frozen gaussian * frozen measure
  int n = 1;
};

Real eval_tag(const DeformedEval& d, const FunctionalContext& ctx, const Vector& y, Real h,
              Real s, Functional tag) {
  const Real ts = ctx.t0 + s * h;
  if (!(ts > 0)) throw std::invalid_argument("deformation step collapses the scale t_s");
  const Vector x0 = ctx.x0;
  const Vector xc = x0 + s * y;
  const Eigen::Index m = d.area_elements.size();

  auto kahan = [](const Vector& v) {
    Real sum = 0, comp = 0;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      const Real yk = v(i) - comp;
      const Real t = sum + yk;
      comp = (t - sum) - yk;
      sum = t;
    }
    return sum;
  };

  Vector area_terms(m), vol_terms(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const Vector& X = d.positions[size_t(i)];
    area_terms(i) = std::exp(-(X - xc).squaredNorm() / (2 * ts)) * d.area_elements(i);
    vol_terms(i) = (X - xc).dot(d.ref_normals[size_t(i)]) * d.ref_weights(i);
  }
  const Real A = kahan(area_terms);
  const Real V = kahan(vol_terms);
  switch (tag) {
    case Functional::Area:
      return A;
    case Functional::Volume:
      return V;
    case Functional::J:
      return A + ctx.lambda * V;
    case Functional::T:
      return std::pow(4 * kPi * ts, -d.n / 2.0) * A;
    case Functional::F:
      return std::pow(4 * kPi * ts, -d.n / 2.0) * A +
             ctx.lambda * std::pow(4 * kPi * ctx.t0, -d.n / 2.0) * std::sqrt(ctx.t0 / ts) * V;
  }
  throw std::logic_error("unknown functional tag");
}

DeformedEval deform_sphere(const Sphere& s, const FunctionalContext& ctx,
                           const VariationField& f, Real step, int resolution) {
  if (!f.analytic())
    throw std::invalid_argument("sphere deformation needs an analytic variation field");
  const int n = s.n;
  const UnitSphereGrid ug = unit_sphere_grid(n, resolution);
  const Eigen::Index m = Eigen::Index(ug.directions.size());
  DeformedEval d;
  d.n = n;
  d.positions.resize(size_t(m));
  d.area_elements.resize(m);
  d.ref_normals.resize(size_t(m));
  d.ref_weights.resize(m);
  const Real rn = std::pow(s.radius, n);
  for (Eigen::Index i = 0; i < m; ++i) {
    const Vector& u = ug.directions[size_t(i)];
    GeometrySample g;
    g.normal = -u;
    const Real fv = f.constant_part() + (f.linear_part().size() ? (-u).dot(f.linear_part()) : 0) +
                    (f.quadratic_part().size() ? Real(u.dot(f.quadratic_part() * u)) : 0);
    const Real rho = s.radius - step * fv;
    if (!(rho > 0)) throw std::invalid_argument("deformation step collapses the radius");
    const Vector grad_rho = -step * f.unit_sphere_gradient(u);
    d.positions[size_t(i)] = rho * u;
    d.area_elements(i) = std::pow(rho, n - 1) *
                         std::sqrt(rho * rho + grad_rho.squaredNorm()) * ug.weights(i);
    d.ref_normals[size_t(i)] = -u;
    d.ref_weights(i) =
        std::exp(-(s.radius * u - ctx.x0).squaredNorm() / (2 * ctx.t0)) * rn * ug.weights(i);
  }
  return d;
}

DeformedEval deform_polyline(const PolylineCurve& curve, const FunctionalContext& ctx,
                             const VariationField& f, Real step) {
  const PolylineGeometry pg = polyline_geometry(curve);
  const Eigen::Index m = Eigen::Index(pg.samples.size());
  Vector fv(m);
  if (f.analytic()) {
    for (Eigen::Index i = 0; i < m; ++i) fv(i) = f.eval(pg.samples[size_t(i)]);
  } else {
    // nodal values are indexed by vertex
    QuadratureGrid vertex_grid;
    vertex_grid.nodes.resize(size_t(m));
    fv = f.materialize([&] {
      for (Eigen::Index i = 0; i < m; ++i) vertex_grid.nodes[size_t(i)].sample = pg.samples[size_t(i)];
      return vertex_grid;
    }());
  }

  PolylineCurve moved = curve;
  for (Eigen::Index i = 0; i < m; ++i)
    moved.vertices.row(i) += step * fv(i) * pg.samples[size_t(i)].normal.transpose();
  const PolylineGeometry mg = polyline_geometry(moved);

  DeformedEval d;
  d.n = 1;
  d.positions.resize(size_t(m));
  d.area_elements.resize(m);
  d.ref_normals.resize(size_t(m));
  d.ref_weights.resize(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    d.positions[size_t(i)] = mg.samples[size_t(i)].position;
    d.area_elements(i) = mg.dual_lengths(i);
    d.ref_normals[size_t(i)] = pg.samples[size_t(i)].normal;
    d.ref_weights(i) =
        std::exp(-(pg.samples[size_t(i)].position - ctx.x0).squaredNorm() / (2 * ctx.t0)) *
        pg.dual_lengths(i);
  }
  return d;
}

}  // namespace

Real evaluate_deformed(const Hypersurface& M, const FunctionalContext& ctx,
                       const VariationSpec& spec, Real s, Functional tag, int resolution) {
  FunctionalContext c = ctx;
  if (c.x0.size() == 0) c.x0 = Vector::Zero(M.ambient_dimension());
  const Vector y = spec.y.size() ? spec.y : Vector::Zero(M.ambient_dimension());
  if ((tag == Functional::Area || tag == Functional::Volume || tag == Functional::J) &&
      (y.norm() != 0 || spec.h != 0))
    throw std::invalid_argument("this functional has fixed base point and scale");

  if (const auto* sp = M.as<Sphere>()) {
    require_origin_sphere(M, "deformed evaluation");
    const DeformedEval d = deform_sphere(*sp, c, spec.f, s, resolution);
    return eval_tag(d, c, y, spec.h, s, tag);
  }
  if (const auto* p = M.as<PolylineCurve>()) {
    const DeformedEval d = deform_polyline(*p, c, spec.f, s);
    return eval_tag(d, c, y, spec.h, s, tag);
  }
  throw std::invalid_argument("deformed evaluation supports spheres and plane curves");
}

Real numeric_variation(const Hypersurface& M, const FunctionalContext& ctx,
                       const VariationSpec& spec, Functional tag, Real eps, int order,
                       int resolution) {
  if (!(eps > 0)) throw std::invalid_argument("eps must be positive");
  const Real fp = evaluate_deformed(M, ctx, spec, eps, tag, resolution);
  const Real fm = evaluate_deformed(M, ctx, spec, -eps, tag, resolution);
  if (order == 1) return (fp - fm) / (2 * eps);
  if (order == 2) {
    const Real f0 = evaluate_deformed(M, ctx, spec, 0, tag, resolution);
    return (fp - 2 * f0 + fm) / (eps * eps);
  }
  throw std::invalid_argument("derivative order must be 1 or 2");
}

RichardsonResult numeric_variation_checked(const Hypersurface& M, const FunctionalContext& ctx,
                                           const VariationSpec& spec, Functional tag, Real eps,
                                           int order, int resolution) {
  RichardsonResult r;
  r.value_full = numeric_variation(M, ctx, spec, tag, eps, order, resolution);
  r.value = numeric_variation(M, ctx, spec, tag, eps / 2, order, resolution);
  const Real scale = std::max({std::abs(r.value), std::abs(r.value_full), Real(1e-12)});
  r.consistent = std::abs(r.value - r.value_full) <= 0.5 * scale;
  return r;
}

}  // namespace lhyp
