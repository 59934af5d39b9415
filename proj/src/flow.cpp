#include "lhyp/flow.hpp"

#include <cmath>
#include <stdexcept>

namespace lhyp {

namespace {

Real min_segment_length(const PolylineCurve& c) {
  const Eigen::Index m = c.vertices.rows();
  Real mn = std::numeric_limits<Real>::infinity();
  for (Eigen::Index i = 0; i < m; ++i) {
    const Eigen::Index j = (i + 1) % m;
    mn = std::min(mn, (c.vertices.row(j) - c.vertices.row(i)).norm());
  }
  return mn;
}

struct AlphaParts {
  Real numerator = 0;
  Real denominator = 0;
  Real weight_mass = 0;
};

AlphaParts alpha_parts(const FlowState& state) {
  const PolylineGeometry pg = polyline_geometry(state.curve);
  AlphaParts p;
  for (Eigen::Index i = 0; i < state.ref_weights.size(); ++i) {
    const Real dot = pg.samples[size_t(i)].normal.dot(state.ref_normals.row(i));
    const Real w = state.ref_weights(i);
    p.numerator += pg.samples[size_t(i)].mean_curvature * dot * w;
    p.denominator += dot * w;
    p.weight_mass += w;
  }
  return p;
}

}  // namespace

FlowState make_flow_state(const PolylineCurve& initial) {
  if (!initial.closed) throw std::invalid_argument("flow runs on closed curves");
  FlowState st;
  st.curve = initial;
  const PolylineGeometry pg = polyline_geometry(initial);
  const Eigen::Index m = Eigen::Index(pg.samples.size());
  st.ref_normals.resize(m, 2);
  st.ref_weights.resize(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    st.ref_normals.row(i) = pg.samples[size_t(i)].normal;
    st.ref_weights(i) =
        std::exp(-pg.samples[size_t(i)].position.squaredNorm() / 2) * pg.dual_lengths(i);
  }
  st.initial_volume = flow_weighted_volume(st);
  return st;
}

Real compute_alpha(const FlowState& state, Real denominator_floor) {
  const AlphaParts p = alpha_parts(state);
  if (std::abs(p.denominator) < denominator_floor * p.weight_mass)
    throw std::runtime_error(
        "alpha denominator degenerated: the flow left the graph-over-initial regime");
  return p.numerator / p.denominator;
}

Real flow_weighted_volume(const FlowState& state) {
  Real sum = 0, comp = 0;
  for (Eigen::Index i = 0; i < state.ref_weights.size(); ++i) {
    const Real term =
        state.curve.vertices.row(i).dot(state.ref_normals.row(i)) * state.ref_weights(i);
    const Real y = term - comp;
    const Real t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
  return sum;
}

FlowState flow_step(const FlowState& state, Real dt, Real cfl_safety, Real denominator_floor) {
  if (!(dt > 0)) throw std::invalid_argument("dt must be positive");
  const Real min_seg = min_segment_length(state.curve);
  if (dt > cfl_safety * min_seg * min_seg)
    throw std::invalid_argument("dt violates the CFL bound " +
                                std::to_string(cfl_safety * min_seg * min_seg));
  const Real alpha = compute_alpha(state, denominator_floor);
  const PolylineGeometry pg = polyline_geometry(state.curve);
  FlowState next = state;
  next.t = state.t + dt;
  for (Eigen::Index i = 0; i < state.curve.vertices.rows(); ++i) {
    const auto& g = pg.samples[size_t(i)];
    next.curve.vertices.row(i) +=
        dt * (g.mean_curvature - alpha) * g.normal.transpose();
  }
  return next;
}

FlowHistory flow_run(const PolylineCurve& initial, const FlowOptions& opts) {
  FlowState st = make_flow_state(initial);
  FlowHistory hist;
  const long steps = std::lround(opts.duration / opts.dt);
  Real max_disp = 0;

  auto record = [&](const FlowState& s) {
    FlowObservation obs;
    obs.t = s.t;
    obs.weighted_volume = flow_weighted_volume(s);
    obs.alpha = compute_alpha(s, opts.alpha_denominator_floor);
    obs.min_segment = min_segment_length(s.curve);
    obs.max_displacement = max_disp;
    hist.samples.push_back(obs);
  };

  record(st);
  for (long k = 0; k < steps; ++k) {
    FlowState next = flow_step(st, opts.dt, opts.cfl_safety, opts.alpha_denominator_floor);
    max_disp = std::max(max_disp,
                        Real((next.curve.vertices - st.curve.vertices).rowwise().norm().maxCoeff()));
    st = std::move(next);
    if ((k + 1) % opts.sample_every == 0 || k + 1 == steps) record(st);
    if (opts.check_self_intersection && (k + 1) % (opts.sample_every * 10) == 0 &&
        curve_self_intersects(st.curve))
      hist.self_intersection_flag = true;
  }
  if (opts.check_self_intersection && curve_self_intersects(st.curve))
    hist.self_intersection_flag = true;
  hist.final_curve = st.curve;
  return hist;
}

Real self_similar_residual(const Hypersurface& M, const QuadratureGrid& grid, Real beta0) {
  // α(0) over the hypersurface itself: frozen normals coincide with current ones
  Vector H(Eigen::Index(grid.nodes.size())), ones = Vector::Ones(Eigen::Index(grid.nodes.size()));
  for (Eigen::Index i = 0; i < H.size(); ++i)
    H(i) = grid.nodes[size_t(i)].sample.mean_curvature;
  const Real alpha0 = integrate(grid, H, true) / integrate(grid, ones, true);
  (void)M;
  Real sup = 0;
  for (const auto& node : grid.nodes) {
    const auto& g = node.sample;
    const Real xn = g.position.dot(g.normal);
    sup = std::max(sup, std::abs(beta0 / 2 * xn - (g.mean_curvature - alpha0)));
  }
  return sup;
}

bool curve_self_intersects(const PolylineCurve& curve) {
  const auto& V = curve.vertices;
  const Eigen::Index m = V.rows();
  const Eigen::Index nseg = curve.closed ? m : m - 1;
  auto cross2 = [](Real ax, Real ay, Real bx, Real by) { return ax * by - ay * bx; };
  for (Eigen::Index i = 0; i < nseg; ++i) {
    const Eigen::Index i2 = (i + 1) % m;
    const Real ax = V(i, 0), ay = V(i, 1), bx = V(i2, 0), by = V(i2, 1);
    const Real ilo_x = std::min(ax, bx), ihi_x = std::max(ax, bx);
    const Real ilo_y = std::min(ay, by), ihi_y = std::max(ay, by);
    for (Eigen::Index j = i + 2; j < nseg; ++j) {
      const Eigen::Index j2 = (j + 1) % m;
      if (curve.closed && i == 0 && j == nseg - 1) continue;  // shared endpoint
      const Real cx = V(j, 0), cy = V(j, 1), dx = V(j2, 0), dy = V(j2, 1);
      if (std::max(cx, dx) < ilo_x || std::min(cx, dx) > ihi_x ||
          std::max(cy, dy) < ilo_y || std::min(cy, dy) > ihi_y)
        continue;
      const Real d1 = cross2(bx - ax, by - ay, cx - ax, cy - ay);
      const Real d2 = cross2(bx - ax, by - ay, dx - ax, dy - ay);
      const Real d3 = cross2(dx - cx, dy - cy, ax - cx, ay - cy);
      const Real d4 = cross2(dx - cx, dy - cy, bx - cx, by - cy);
      if (d1 * d2 < 0 && d3 * d4 < 0) return true;
    }
  }
  return false;
}

}  // namespace lhyp
