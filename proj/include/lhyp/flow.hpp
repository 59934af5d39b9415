#pragma once

#include "lhyp/quadrature.hpp"

namespace lhyp {

// Discrete state of the weighted volume-preserving flow on a closed plane
// curve. The normals and weights e^{-|X|^2/2} dμ of the initial curve are
// frozen at construction; the weighted volume V(t) and the forcing α(t)
// integrate against them for the whole run.
struct FlowState {
  Real t = 0;
  PolylineCurve curve;
  Matrix ref_normals;   // one row per vertex
  Vector ref_weights;   // e^{-|X(0)|^2/2} * dual arclength
  Real initial_volume = 0;
};

struct FlowOptions {
  Real dt = 1e-4;
  Real duration = 0.1;
  int sample_every = 10;
  Real cfl_safety = 0.5;               // dt must stay below cfl_safety * min_seg^2
  Real alpha_denominator_floor = 1e-8; // relative to the frozen weight mass
  bool check_self_intersection = false;
};

struct FlowObservation {
  Real t = 0;
  Real weighted_volume = 0;
  Real alpha = 0;
  Real min_segment = 0;
  Real max_displacement = 0;
};

struct FlowHistory {
  std::vector<FlowObservation> samples;
  PolylineCurve final_curve;
  bool self_intersection_flag = false;
};

FlowState make_flow_state(const PolylineCurve& initial);

// α(t): weighted mean of the current curvature against the frozen normals
// and weights. Throws when the denominator degenerates (the evolving normal
// has turned away from the initial one on average).
Real compute_alpha(const FlowState& state, Real denominator_floor = 1e-8);

// forward Euler step with velocity (H(t) - α(t)) N(t); rejects dt above the
// CFL bound cfl_safety * min_segment^2
FlowState flow_step(const FlowState& state, Real dt, Real cfl_safety = 0.5,
                    Real denominator_floor = 1e-8);

Real flow_weighted_volume(const FlowState& state);

FlowHistory flow_run(const PolylineCurve& initial, const FlowOptions& opts);

// sup over grid nodes of |(β0/2) <X,N> - (H - α(0))|, the defect of the
// self-similar ansatz X(t) = sqrt(1 + β0 t) X at t = 0
Real self_similar_residual(const Hypersurface& M, const QuadratureGrid& grid, Real beta0);

bool curve_self_intersects(const PolylineCurve& curve);

}  // namespace lhyp
