#include "lhyp/geometry.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace lhyp {

namespace {

void validate_polyline(const PolylineCurve& c) {
  const auto m = c.vertices.rows();
  if (c.closed && m < 8)
    throw std::invalid_argument("closed polyline needs at least 8 vertices, got " +
                                std::to_string(m));
  if (!c.closed && m < 2) throw std::invalid_argument("open polyline needs at least 2 vertices");
  const auto last = c.closed ? m : m - 1;
  for (Eigen::Index i = 0; i < last; ++i) {
    const Eigen::Index j = (i + 1) % m;
    if ((c.vertices.row(j) - c.vertices.row(i)).norm() == 0.0)
      throw std::invalid_argument("degenerate polyline segment at vertex " + std::to_string(i));
  }
}

Real wrap_angle(Real a) {
  while (a > std::numbers::pi) a -= 2 * std::numbers::pi;
  while (a < -std::numbers::pi) a += 2 * std::numbers::pi;
  return a;
}

}  // namespace

Hypersurface::Hypersurface(Shape shape) : shape_(std::move(shape)) {
  if (const auto* s = as<Sphere>()) {
    if (s->n < 1) throw std::invalid_argument("sphere dimension must be >= 1");
    if (!(s->radius > 0)) throw std::invalid_argument("sphere radius must be positive");
    if (s->center.size() != 0 && s->center.size() != s->n + 1)
      throw std::invalid_argument("sphere center dimension mismatch");
  } else if (const auto* c = as<Cylinder>()) {
    if (c->n < 1) throw std::invalid_argument("cylinder dimension must be >= 1");
    if (c->k < 0 || c->k > c->n)
      throw std::invalid_argument("cylinder sphere-factor dimension out of range");
    if (c->k >= 1 && !(c->radius > 0))
      throw std::invalid_argument("cylinder radius must be positive");
    if (c->k == 0 && c->radius < 0)
      throw std::invalid_argument("hyperplane offset must be nonnegative");
  } else if (const auto* p = as<PolylineCurve>()) {
    validate_polyline(*p);
  } else if (const auto* cp = as<CurveProduct>()) {
    if (cp->flat_dims < 1) throw std::invalid_argument("curve product needs >= 1 flat dimension");
    validate_polyline(cp->curve);
  }
}

int Hypersurface::dimension() const {
  if (const auto* s = as<Sphere>()) return s->n;
  if (const auto* c = as<Cylinder>()) return c->n;
  if (as<PolylineCurve>()) return 1;
  return 1 + as<CurveProduct>()->flat_dims;
}

int Hypersurface::ambient_dimension() const { return dimension() + 1; }

bool Hypersurface::compact() const {
  if (const auto* c = as<Cylinder>()) return c->k == c->n;
  if (const auto* p = as<PolylineCurve>()) return p->closed;
  if (as<CurveProduct>()) return false;
  return true;
}

std::string Hypersurface::describe() const {
  std::ostringstream os;
  if (const auto* s = as<Sphere>()) {
    os << "S^" << s->n << "(" << s->radius << ")";
  } else if (const auto* c = as<Cylinder>()) {
    os << "S^" << c->k << "(" << c->radius << ")xR^" << c->n - c->k;
  } else if (const auto* p = as<PolylineCurve>()) {
    os << (p->closed ? "closed" : "open") << " polyline[" << p->vertices.rows() << "]";
  } else {
    const auto* cp = as<CurveProduct>();
    os << "polyline[" << cp->curve.vertices.rows() << "]xR^" << cp->flat_dims;
  }
  return os.str();
}

std::optional<Real> Hypersurface::lambda_exact() const {
  if (const auto* s = as<Sphere>()) return Real(s->n) / s->radius - s->radius;
  if (const auto* c = as<Cylinder>()) {
    if (c->k == 0) return -c->radius;
    return Real(c->k) / c->radius - c->radius;
  }
  if (const auto* p = as<PolylineCurve>()) return p->lambda_tag;
  return as<CurveProduct>()->curve.lambda_tag;
}

Hypersurface make_sphere(int n, Real r, const Vector& center) {
  return Hypersurface(Sphere{n, r, center});
}

Hypersurface make_cylinder(int n, int k, Real r) { return Hypersurface(Cylinder{n, k, r}); }

Hypersurface make_polyline(PolylineCurve curve) { return Hypersurface(std::move(curve)); }

Hypersurface make_curve_product(PolylineCurve curve, int flat_dims) {
  return Hypersurface(CurveProduct{std::move(curve), flat_dims});
}

GeometrySample sphere_sample(const Sphere& s, const Vector& direction) {
  if (direction.size() != s.n + 1) throw std::invalid_argument("sphere direction dimension mismatch");
  Vector u = direction.normalized();
  GeometrySample g;
  g.position = s.center.size() ? Vector(s.center + s.radius * u) : Vector(s.radius * u);
  g.normal = -u;
  g.mean_curvature = Real(s.n) / s.radius;
  g.second_form_norm2 = Real(s.n) / (s.radius * s.radius);
  g.cubic_trace = Real(s.n) / (s.radius * s.radius * s.radius);
  g.principal_curvatures = Vector::Constant(s.n, 1.0 / s.radius);
  return g;
}

GeometrySample cylinder_sample(const Cylinder& c, const Vector& sphere_direction,
                               const Vector& flat_coords) {
  if (flat_coords.size() != c.n - c.k) throw std::invalid_argument("cylinder flat coords mismatch");
  GeometrySample g;
  g.position = Vector(c.n + 1);
  g.normal = Vector::Zero(c.n + 1);
  if (c.k == 0) {
    g.position(0) = c.radius;
    g.position.tail(c.n) = flat_coords;
    g.normal(0) = -1;
    g.mean_curvature = 0;
    g.second_form_norm2 = 0;
    g.cubic_trace = 0;
    g.principal_curvatures = Vector::Zero(c.n);
    return g;
  }
  if (sphere_direction.size() != c.k + 1)
    throw std::invalid_argument("cylinder sphere direction mismatch");
  Vector u = sphere_direction.normalized();
  g.position.head(c.k + 1) = c.radius * u;
  g.position.tail(c.n - c.k) = flat_coords;
  g.normal.head(c.k + 1) = -u;
  g.mean_curvature = Real(c.k) / c.radius;
  g.second_form_norm2 = Real(c.k) / (c.radius * c.radius);
  g.cubic_trace = Real(c.k) / (c.radius * c.radius * c.radius);
  g.principal_curvatures = Vector::Zero(c.n);
  g.principal_curvatures.head(c.k).setConstant(1.0 / c.radius);
  return g;
}

PolylineGeometry polyline_geometry(const PolylineCurve& curve) {
  validate_polyline(curve);
  const auto& V = curve.vertices;
  const Eigen::Index m = V.rows();
  PolylineGeometry out;
  out.samples.resize(m);
  out.dual_lengths.resize(m);

  // segment angles: ang[i] is the direction of V[i] -> V[i+1]
  std::vector<Real> seg_len(m), seg_ang(m);
  const Eigen::Index nseg = curve.closed ? m : m - 1;
  for (Eigen::Index i = 0; i < nseg; ++i) {
    const Eigen::Index j = (i + 1) % m;
    const Real dx = V(j, 0) - V(i, 0);
    const Real dy = V(j, 1) - V(i, 1);
    seg_len[i] = std::hypot(dx, dy);
    seg_ang[i] = std::atan2(dy, dx);
    out.total_length += seg_len[i];
  }

  for (Eigen::Index i = 0; i < m; ++i) {
    const bool interior = curve.closed || (i > 0 && i < m - 1);
    Real theta, kappa, dual;
    if (interior) {
      const Eigen::Index prev = (i + m - 1) % m;
      const Real dang = wrap_angle(seg_ang[i] - seg_ang[prev]);
      dual = 0.5 * (seg_len[prev] + seg_len[i]);
      kappa = dang / dual;
      theta = seg_ang[prev] + 0.5 * dang;
    } else if (i == 0) {
      theta = seg_ang[0];
      kappa = 0;
      dual = 0.5 * seg_len[0];
    } else {
      theta = seg_ang[m - 2];
      kappa = 0;
      dual = 0.5 * seg_len[m - 2];
    }
    GeometrySample& g = out.samples[i];
    g.position = V.row(i).transpose();
    g.normal = Vector(2);
    g.normal << -std::sin(theta), std::cos(theta);
    g.mean_curvature = kappa;
    g.second_form_norm2 = kappa * kappa;
    g.cubic_trace = kappa * kappa * kappa;
    g.principal_curvatures = Vector::Constant(1, kappa);
    out.dual_lengths(i) = dual;
  }
  // open-curve endpoints copy the nearest interior curvature
  if (!curve.closed && m >= 3) {
    for (auto [e, n] : {std::pair<Eigen::Index, Eigen::Index>{0, 1}, {m - 1, m - 2}}) {
      out.samples[e].mean_curvature = out.samples[n].mean_curvature;
      out.samples[e].second_form_norm2 = out.samples[n].second_form_norm2;
      out.samples[e].cubic_trace = out.samples[n].cubic_trace;
      out.samples[e].principal_curvatures = out.samples[n].principal_curvatures;
    }
  }
  return out;
}

PolylineCurve reversed(const PolylineCurve& curve) {
  PolylineCurve r = curve;
  r.vertices = curve.vertices.colwise().reverse().eval();
  return r;
}

void write_curve_csv(const std::string& path, const PolylineCurve& curve) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  f.precision(17);
  f << "x,y\n";
  for (Eigen::Index i = 0; i < curve.vertices.rows(); ++i)
    f << curve.vertices(i, 0) << "," << curve.vertices(i, 1) << "\n";
  f << "# closed=" << (curve.closed ? "true" : "false") << "\n";
  if (curve.lambda_tag) f << "# lambda=" << *curve.lambda_tag << "\n";
}

PolylineCurve read_curve_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open: " + path);
  std::string line;
  if (!std::getline(f, line) || line.rfind("x,y", 0) != 0)
    throw std::runtime_error(path + ": expected header 'x,y'");
  std::vector<std::pair<Real, Real>> pts;
  PolylineCurve curve;
  bool saw_closed = false;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::string meta = line.substr(1);
      const auto eq = meta.find('=');
      if (eq == std::string::npos) throw std::runtime_error(path + ": bad metadata line: " + line);
      std::string key = meta.substr(0, eq);
      key.erase(0, key.find_first_not_of(' '));
      key.erase(key.find_last_not_of(' ') + 1);
      const std::string val = meta.substr(eq + 1);
      if (key == "closed") {
        curve.closed = (val == "true" || val == "1");
        saw_closed = true;
      } else if (key == "lambda") {
        curve.lambda_tag = std::stod(val);
      } else {
        throw std::runtime_error(path + ": unknown metadata key: " + key);
      }
      continue;
    }
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw std::runtime_error(path + ": bad row: " + line);
    pts.emplace_back(std::stod(line.substr(0, comma)), std::stod(line.substr(comma + 1)));
  }
  if (!saw_closed) throw std::runtime_error(path + ": missing '# closed=' metadata");
  curve.vertices.resize(Eigen::Index(pts.size()), 2);
  for (Eigen::Index i = 0; i < curve.vertices.rows(); ++i) {
    curve.vertices(i, 0) = pts[size_t(i)].first;
    curve.vertices(i, 1) = pts[size_t(i)].second;
  }
  validate_polyline(curve);
  return curve;
}

PolylineCurve make_circle_polyline(Real r, int vertices, const Eigen::Vector2d& center) {
  PolylineCurve c;
  c.vertices.resize(vertices, 2);
  for (int i = 0; i < vertices; ++i) {
    const Real t = 2 * std::numbers::pi * i / vertices;
    c.vertices(i, 0) = center.x() + r * std::cos(t);
    c.vertices(i, 1) = center.y() + r * std::sin(t);
  }
  c.closed = true;
  return c;
}

PolylineCurve make_ellipse_polyline(Real a, Real b, int vertices) {
  PolylineCurve c;
  c.vertices.resize(vertices, 2);
  for (int i = 0; i < vertices; ++i) {
    const Real t = 2 * std::numbers::pi * i / vertices;
    c.vertices(i, 0) = a * std::cos(t);
    c.vertices(i, 1) = b * std::sin(t);
  }
  c.closed = true;
  return c;
}

}  // namespace lhyp
