#pragma once

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace lhyp {

using Real = double;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Per-point geometric data of an n-dimensional hypersurface in R^{n+1}.
//
// Orientation convention used throughout: on the origin-centered sphere the
// stored normal points inward, N = -X/r, so that H = n/r > 0 and <X,N> = -r.
// Plane curves follow the same convention: a counterclockwise circle has
// N = rot90(T) pointing inward and curvature +1/r.
struct GeometrySample {
  Vector position;              // X
  Vector normal;                // unit N
  Real mean_curvature = 0;      // H, sum of principal curvatures
  Real second_form_norm2 = 0;   // S = sum_ij h_ij^2
  Real cubic_trace = 0;         // f3 = sum h_ij h_jk h_ki
  Vector principal_curvatures;  // n values
};

struct Sphere {
  int n = 1;       // hypersurface dimension
  Real radius = 1;
  Vector center;   // in R^{n+1}; empty means origin
};

// S^k(r) x R^{n-k} embedded in R^{n+1}; the sphere factor occupies the first
// k+1 coordinates. k = 0 degenerates to the hyperplane {x_0 = r} (r = 0
// allowed there: hyperplane through the origin).
struct Cylinder {
  int n = 1;
  int k = 1;
  Real radius = 1;
};

struct PolylineCurve {
  Eigen::Matrix<Real, Eigen::Dynamic, 2> vertices;
  bool closed = true;
  std::optional<Real> lambda_tag;  // set when the curve was solved for a given lambda
};

// Gamma x R^m in R^{2+m}; flat factors add zero principal curvatures.
struct CurveProduct {
  PolylineCurve curve;
  int flat_dims = 1;
};

class Hypersurface {
 public:
  using Shape = std::variant<Sphere, Cylinder, PolylineCurve, CurveProduct>;

  explicit Hypersurface(Shape shape);

  const Shape& shape() const { return shape_; }
  template <class T>
  const T* as() const { return std::get_if<T>(&shape_); }

  int dimension() const;          // n
  int ambient_dimension() const;  // n + 1
  bool compact() const;
  std::string describe() const;

  // n/r - r for spheres, k/r - r for cylinders, the solver tag for curves
  // and curve products. Empty when the surface carries no such value.
  std::optional<Real> lambda_exact() const;

 private:
  Shape shape_;
};

Hypersurface make_sphere(int n, Real r, const Vector& center = Vector());
Hypersurface make_cylinder(int n, int k, Real r);
Hypersurface make_polyline(PolylineCurve curve);
Hypersurface make_curve_product(PolylineCurve curve, int flat_dims);

// Discrete geometry of a polyline: curvature from the turning angle between
// consecutive segments divided by the dual arclength (second order on smooth
// curves), normal from the bisector direction.
struct PolylineGeometry {
  std::vector<GeometrySample> samples;
  Vector dual_lengths;
  Real total_length = 0;
};
PolylineGeometry polyline_geometry(const PolylineCurve& curve);

PolylineCurve reversed(const PolylineCurve& curve);

GeometrySample sphere_sample(const Sphere& s, const Vector& direction);
GeometrySample cylinder_sample(const Cylinder& c, const Vector& sphere_direction,
                               const Vector& flat_coords);

// CSV serialization: header "x,y", one row per vertex, trailing metadata
// lines "# closed=<bool>" and optionally "# lambda=<value>".
void write_curve_csv(const std::string& path, const PolylineCurve& curve);
PolylineCurve read_curve_csv(const std::string& path);

PolylineCurve make_circle_polyline(Real r, int vertices, const Eigen::Vector2d& center = {0, 0});
PolylineCurve make_ellipse_polyline(Real a, Real b, int vertices);

}  // namespace lhyp
