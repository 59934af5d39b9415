#include "lhyp/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace lhyp {

namespace {

constexpr Real kPi = std::numbers::pi;

QuadratureRule golub_welsch(const Vector& offdiag, Real moment0) {
  const int m = int(offdiag.size()) + 1;
  Matrix J = Matrix::Zero(m, m);
  for (int i = 0; i + 1 < m; ++i) {
    J(i, i + 1) = offdiag(i);
    J(i + 1, i) = offdiag(i);
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(J);
  QuadratureRule rule;
  rule.points = es.eigenvalues();
  rule.weights.resize(m);
  for (int i = 0; i < m; ++i) {
    const Real v0 = es.eigenvectors()(0, i);
    rule.weights(i) = moment0 * v0 * v0;
  }
  return rule;
}

struct FlatTensor {
  Matrix coords;   // one row per tensor node, n-k columns (actual z values)
  Vector weights;  // plain Lebesgue weights
  Vector gaussian; // e^{-|z - z0|^2 / (2 t0)}
  Real truncation = 0;
};

// Tensor Gauss-Hermite grid matched to e^{-|z - z0|^2/(2 t0)}; plain weights
// are recovered by dividing out the sampled Gaussian.
FlatTensor flat_tensor(int dims, int order, const Vector& z0, Real t0) {
  FlatTensor out;
  if (dims == 0) {
    out.coords.resize(1, 0);
    out.weights = Vector::Ones(1);
    out.gaussian = Vector::Ones(1);
    return out;
  }
  const QuadratureRule gh = gauss_hermite(order);
  const Real scale = std::sqrt(2 * t0);
  long total = 1;
  for (int d = 0; d < dims; ++d) total *= order;
  out.coords.resize(total, dims);
  out.weights.resize(total);
  out.gaussian.resize(total);
  for (long idx = 0; idx < total; ++idx) {
    long rest = idx;
    Real w = 1, g = 1;
    for (int d = 0; d < dims; ++d) {
      const int j = int(rest % order);
      rest /= order;
      const Real x = gh.points(j);
      out.coords(idx, d) = z0(d) + scale * x;
      w *= scale * gh.weights(j) * std::exp(x * x);
      g *= std::exp(-x * x);
      out.truncation = std::max(out.truncation, std::abs(scale * x));
    }
    out.weights(idx) = w;
    out.gaussian(idx) = g;
  }
  return out;
}

}  // namespace

Real QuadratureGrid::weight_sum() const {
  Real s = 0, c = 0;
  for (const auto& n : nodes) {
    const Real y = n.weight - c;
    const Real t = s + y;
    c = (t - s) - y;
    s = t;
  }
  return s;
}

QuadratureRule gauss_legendre(int m) {
  if (m < 1) throw std::invalid_argument("gauss_legendre order must be positive");
  Vector off(m - 1);
  for (int k = 1; k < m; ++k) off(k - 1) = k / std::sqrt(4.0 * k * k - 1.0);
  return golub_welsch(off, 2.0);
}

QuadratureRule gauss_hermite(int m) {
  if (m < 1) throw std::invalid_argument("gauss_hermite order must be positive");
  Vector off(m - 1);
  for (int k = 1; k < m; ++k) off(k - 1) = std::sqrt(k / 2.0);
  return golub_welsch(off, std::sqrt(kPi));
}

Real unit_sphere_area(int k) {
  return 2 * std::pow(kPi, (k + 1) / 2.0) / std::tgamma((k + 1) / 2.0);
}

Real unit_ball_volume(int m) { return std::pow(kPi, m / 2.0) / std::tgamma(m / 2.0 + 1); }

UnitSphereGrid unit_sphere_grid(int k, int resolution) {
  UnitSphereGrid g;
  if (k == 0) {
    // S^0 = two points
    g.directions = {Vector::Constant(1, 1.0), Vector::Constant(1, -1.0)};
    g.weights = Vector::Ones(2);
    return g;
  }
  if (k == 1) {
    const int m = 2 * resolution;
    g.directions.reserve(m);
    g.weights = Vector::Constant(m, 2 * kPi / m);
    for (int i = 0; i < m; ++i) {
      const Real t = 2 * kPi * i / m;
      Vector u(2);
      u << std::cos(t), std::sin(t);
      g.directions.push_back(u);
    }
    return g;
  }
  const UnitSphereGrid sub = unit_sphere_grid(k - 1, resolution);
  const QuadratureRule gl = gauss_legendre(resolution);
  g.directions.reserve(size_t(resolution) * sub.directions.size());
  g.weights.resize(Eigen::Index(resolution) * Eigen::Index(sub.directions.size()));
  Eigen::Index idx = 0;
  for (int i = 0; i < resolution; ++i) {
    const Real theta = kPi * (gl.points(i) + 1) / 2;
    const Real wt = (kPi / 2) * gl.weights(i) * std::pow(std::sin(theta), k - 1);
    for (size_t j = 0; j < sub.directions.size(); ++j) {
      Vector u(k + 1);
      u(0) = std::cos(theta);
      u.tail(k) = std::sin(theta) * sub.directions[j];
      g.directions.push_back(std::move(u));
      g.weights(idx++) = wt * sub.weights(Eigen::Index(j));
    }
  }
  return g;
}

QuadratureGrid build_grid(const Hypersurface& M, int resolution, const Vector& x0_in, Real t0) {
  if (resolution < 8) throw std::invalid_argument("grid resolution must be at least 8");
  if (!(t0 > 0)) throw std::invalid_argument("t0 must be positive");
  const int amb = M.ambient_dimension();
  Vector x0 = x0_in.size() ? x0_in : Vector::Zero(amb);
  if (x0.size() != amb) throw std::invalid_argument("gaussian center dimension mismatch");

  QuadratureGrid grid;
  grid.x0 = x0;
  grid.t0 = t0;
  grid.dimension = M.dimension();
  grid.resolution = resolution;

  auto gaussian_at = [&](const Vector& X) {
    return std::exp(-(X - x0).squaredNorm() / (2 * t0));
  };

  if (const auto* s = M.as<Sphere>()) {
    const UnitSphereGrid ug = unit_sphere_grid(s->n, resolution);
    const Real rn = std::pow(s->radius, s->n);
    grid.nodes.reserve(ug.directions.size());
    for (size_t i = 0; i < ug.directions.size(); ++i) {
      GridNode node;
      node.sample = sphere_sample(*s, ug.directions[i]);
      node.weight = rn * ug.weights(Eigen::Index(i));
      node.gaussian = gaussian_at(node.sample.position);
      grid.nodes.push_back(std::move(node));
    }
    return grid;
  }

  if (const auto* c = M.as<Cylinder>()) {
    const int flat = c->n - c->k;
    const int order = std::max(24, resolution);
    const FlatTensor ft = flat_tensor(flat, order, x0.tail(flat), t0);
    grid.truncation = ft.truncation;
    if (c->k == 0) {
      grid.nodes.reserve(size_t(ft.coords.rows()));
      for (Eigen::Index j = 0; j < ft.coords.rows(); ++j) {
        GridNode node;
        node.sample = cylinder_sample(*c, Vector(), ft.coords.row(j).transpose());
        node.weight = ft.weights(j);
        node.gaussian = gaussian_at(node.sample.position);
        grid.nodes.push_back(std::move(node));
      }
      return grid;
    }
    const UnitSphereGrid ug = unit_sphere_grid(c->k, resolution);
    const Real rk = std::pow(c->radius, c->k);
    grid.nodes.reserve(ug.directions.size() * size_t(ft.coords.rows()));
    for (size_t i = 0; i < ug.directions.size(); ++i) {
      for (Eigen::Index j = 0; j < ft.coords.rows(); ++j) {
        GridNode node;
        node.sample = cylinder_sample(*c, ug.directions[i], ft.coords.row(j).transpose());
        node.weight = rk * ug.weights(Eigen::Index(i)) * ft.weights(j);
        node.gaussian = gaussian_at(node.sample.position);
        grid.nodes.push_back(std::move(node));
      }
    }
    return grid;
  }

  if (const auto* p = M.as<PolylineCurve>()) {
    if (!p->closed) throw std::invalid_argument("grids are built on closed polylines only");
    const PolylineGeometry pg = polyline_geometry(*p);
    grid.nodes.reserve(pg.samples.size());
    for (size_t i = 0; i < pg.samples.size(); ++i) {
      GridNode node;
      node.sample = pg.samples[i];
      node.weight = pg.dual_lengths(Eigen::Index(i));
      node.gaussian = gaussian_at(node.sample.position);
      grid.nodes.push_back(std::move(node));
    }
    return grid;
  }

  const auto* cp = M.as<CurveProduct>();
  if (!cp->curve.closed) throw std::invalid_argument("curve product needs a closed curve");
  const PolylineGeometry pg = polyline_geometry(cp->curve);
  const int m = cp->flat_dims;
  const int order = std::max(24, resolution);
  const FlatTensor ft = flat_tensor(m, order, x0.tail(m), t0);
  grid.truncation = ft.truncation;
  grid.nodes.reserve(pg.samples.size() * size_t(ft.coords.rows()));
  for (size_t i = 0; i < pg.samples.size(); ++i) {
    const GeometrySample& cs = pg.samples[i];
    for (Eigen::Index j = 0; j < ft.coords.rows(); ++j) {
      GridNode node;
      GeometrySample g;
      g.position = Vector(2 + m);
      g.position.head(2) = cs.position;
      g.position.tail(m) = ft.coords.row(j).transpose();
      g.normal = Vector::Zero(2 + m);
      g.normal.head(2) = cs.normal;
      g.mean_curvature = cs.mean_curvature;
      g.second_form_norm2 = cs.second_form_norm2;
      g.cubic_trace = cs.cubic_trace;
      g.principal_curvatures = Vector::Zero(1 + m);
      g.principal_curvatures(0) = cs.mean_curvature;
      node.sample = std::move(g);
      node.weight = pg.dual_lengths(Eigen::Index(i)) * ft.weights(j);
      node.gaussian = gaussian_at(node.sample.position);
      grid.nodes.push_back(std::move(node));
    }
  }
  return grid;
}

Real integrate(const QuadratureGrid& grid, const Vector& field, bool use_gaussian) {
  if (field.size() != Eigen::Index(grid.nodes.size()))
    throw std::invalid_argument("field length does not match node count");
  Real s = 0, comp = 0;
  for (Eigen::Index i = 0; i < field.size(); ++i) {
    const auto& n = grid.nodes[size_t(i)];
    Real term = field(i) * n.weight;
    if (use_gaussian) term *= n.gaussian;
    const Real y = term - comp;
    const Real t = s + y;
    comp = (t - s) - y;
    s = t;
  }
  return s;
}

Real integration_by_parts_residual(const QuadratureGrid& grid, const SmoothField& u,
                                   const SmoothField& v) {
  const Eigen::Index m = Eigen::Index(grid.nodes.size());
  if (u.values.size() != m || v.values.size() != m)
    throw std::invalid_argument("field size mismatch");
  if (v.drift_laplacian.size() != m)
    throw std::invalid_argument("second field lacks drift-Laplacian data");
  if (u.gradients.rows() != m || v.gradients.rows() != m)
    throw std::invalid_argument("fields lack gradient data");
  Vector lhs(m), rhs(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    lhs(i) = u.values(i) * v.drift_laplacian(i);
    rhs(i) = u.gradients.row(i).dot(v.gradients.row(i));
  }
  return std::abs(integrate(grid, lhs, true) + integrate(grid, rhs, true));
}

namespace {

// shape-operator action on an ambient vector's tangential part
Vector shape_apply(const Hypersurface& M, const GeometrySample& g, const Vector& w) {
  const Vector wt = w - g.normal.dot(w) * g.normal;
  if (const auto* s = M.as<Sphere>()) return wt / s->radius;
  if (const auto* c = M.as<Cylinder>()) {
    Vector out = Vector::Zero(w.size());
    if (c->k >= 1) out.head(c->k + 1) = wt.head(c->k + 1) / c->radius;
    return out;
  }
  // curve or curve product: A = kappa on the curve tangent direction
  Vector tangent = Vector::Zero(w.size());
  tangent(0) = g.normal(1);
  tangent(1) = -g.normal(0);
  return g.mean_curvature * tangent.dot(wt) * tangent;
}

// nabla H per node; zero on spheres/cylinders, finite differences of the
// discrete curvature along the curve otherwise
Matrix gradient_of_h(const Hypersurface& M, const QuadratureGrid& grid) {
  const Eigen::Index m = Eigen::Index(grid.nodes.size());
  const int amb = M.ambient_dimension();
  Matrix out = Matrix::Zero(m, amb);
  const PolylineCurve* curve = nullptr;
  if (const auto* p = M.as<PolylineCurve>()) curve = p;
  if (const auto* cp = M.as<CurveProduct>()) curve = &cp->curve;
  if (!curve) return out;
  const PolylineGeometry pg = polyline_geometry(*curve);
  const Eigen::Index nv = Eigen::Index(pg.samples.size());
  Vector dkappa(nv);
  for (Eigen::Index i = 0; i < nv; ++i) {
    const Eigen::Index prev = (i + nv - 1) % nv, next = (i + 1) % nv;
    const Real ds = pg.dual_lengths(prev) / 2 + pg.dual_lengths(i) + pg.dual_lengths(next) / 2;
    dkappa(i) = (pg.samples[size_t(next)].mean_curvature -
                 pg.samples[size_t(prev)].mean_curvature) /
                ds;
  }
  const Eigen::Index per_vertex = m / nv;
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto& g = grid.nodes[size_t(i)].sample;
    const Eigen::Index vtx = i / per_vertex;
    Vector tangent = Vector::Zero(amb);
    tangent(0) = g.normal(1);
    tangent(1) = -g.normal(0);
    out.row(i) = dkappa(vtx) * tangent;
  }
  return out;
}

}  // namespace

SmoothField field_constant(const Hypersurface& M, const QuadratureGrid& grid, Real value) {
  SmoothField f;
  const Eigen::Index m = Eigen::Index(grid.nodes.size());
  f.values = Vector::Constant(m, value);
  f.gradients = Matrix::Zero(m, M.ambient_dimension());
  f.drift_laplacian = Vector::Zero(m);
  return f;
}

SmoothField field_position_dot(const Hypersurface& M, const QuadratureGrid& grid,
                               const Vector& a) {
  SmoothField f;
  const Eigen::Index m = Eigen::Index(grid.nodes.size());
  f.values.resize(m);
  f.gradients.resize(m, M.ambient_dimension());
  f.drift_laplacian.resize(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto& g = grid.nodes[size_t(i)].sample;
    const Real xa = g.position.dot(a);
    const Real na = g.normal.dot(a);
    const Real xn = g.position.dot(g.normal);
    f.values(i) = xa;
    f.gradients.row(i) = a - na * g.normal;
    f.drift_laplacian(i) = g.mean_curvature * na - xa + xn * na;
  }
  return f;
}

SmoothField field_normal_dot(const Hypersurface& M, const QuadratureGrid& grid, const Vector& a) {
  SmoothField f;
  const Eigen::Index m = Eigen::Index(grid.nodes.size());
  const Matrix gradH = gradient_of_h(M, grid);
  f.values.resize(m);
  f.gradients.resize(m, M.ambient_dimension());
  f.drift_laplacian.resize(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto& g = grid.nodes[size_t(i)].sample;
    const Vector xt = g.position - g.position.dot(g.normal) * g.normal;
    f.values(i) = g.normal.dot(a);
    f.gradients.row(i) = -shape_apply(M, g, a);
    f.drift_laplacian(i) = -gradH.row(i).dot(a) - g.second_form_norm2 * g.normal.dot(a) +
                           shape_apply(M, g, xt).dot(a);
  }
  return f;
}

SmoothField field_position_norm2(const Hypersurface& M, const QuadratureGrid& grid) {
  SmoothField f;
  const Eigen::Index m = Eigen::Index(grid.nodes.size());
  const int n = M.dimension();
  f.values.resize(m);
  f.gradients.resize(m, M.ambient_dimension());
  f.drift_laplacian.resize(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto& g = grid.nodes[size_t(i)].sample;
    const Real xn = g.position.dot(g.normal);
    const Vector xt = g.position - xn * g.normal;
    f.values(i) = g.position.squaredNorm();
    f.gradients.row(i) = 2 * xt;
    f.drift_laplacian(i) = 2 * (n + g.mean_curvature * xn - xt.squaredNorm());
  }
  return f;
}

SmoothField field_sphere_quadratic(const Hypersurface& M, const QuadratureGrid& grid,
                                   const Matrix& B) {
  const auto* s = M.as<Sphere>();
  if (!s || (s->center.size() && s->center.norm() != 0))
    throw std::invalid_argument("quadratic harmonic requires an origin-centered sphere");
  const int n = s->n;
  if (B.rows() != n + 1 || B.cols() != n + 1) throw std::invalid_argument("B dimension mismatch");
  const Matrix Bs = (B + B.transpose()) / 2;
  const Real trace_part = Bs.trace() / (n + 1);
  const Matrix B0 = Bs - trace_part * Matrix::Identity(n + 1, n + 1);
  const Real mu2 = (4.0 + 2.0 * (n - 1)) / (s->radius * s->radius);
  SmoothField f;
  const Eigen::Index m = Eigen::Index(grid.nodes.size());
  f.values.resize(m);
  f.gradients.resize(m, n + 1);
  f.drift_laplacian.resize(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto& g = grid.nodes[size_t(i)].sample;
    const Vector u = -g.normal;
    const Real q = u.dot(B0 * u);
    f.values(i) = q + trace_part;
    f.gradients.row(i) = (2.0 / s->radius) * (B0 * u - q * u);
    f.drift_laplacian(i) = -mu2 * q;
  }
  return f;
}

}  // namespace lhyp
