#pragma once

#include <vector>

#include "magtomo/metric.hpp"

namespace magtomo {

// Point of the unit sphere bundle: chart position plus a g-unit direction.
struct PhasePoint {
  Vec2 x;
  Vec2 theta;
};

// Geodesic sampled at uniform parameter spacing h, first sample at t = 0.
// The final sample sits on the chart boundary (located by bisection); its
// parameter is tau_plus, which is generally not a multiple of h.
struct Geodesic {
  std::vector<PhasePoint> samples;
  double h = 0.0;
  double tau_plus = 0.0;
  double tau_minus = 0.0;
  double renorm_drift = 0.0;  // max |theta|_g - 1 seen before renormalizing

  const PhasePoint& exit() const { return samples.back(); }
};

struct GeodesicOptions {
  double h = 5e-3;
  std::size_t max_steps = 1'000'000;
  bool compute_backward_exit = false;  // fill tau_minus for interior starts
};

// Integrates the geodesic flow (2.7-style first-order system) with classical
// RK4 until the trajectory crosses |x| = chart_radius; the crossing is then
// located by bisection to 1e-10 in the parameter. theta is renormalized to
// unit g-norm after every step and the worst drift is recorded.
Geodesic integrate_geodesic(const MetricField& m, PhasePoint p,
                            const GeodesicOptions& opt = {});

// Flows for a fixed parameter time without stopping at the boundary; throws
// GeometryError if the trajectory leaves the chart disk.
PhasePoint flow_fixed_time(const MetricField& m, PhasePoint p, double time,
                           double h_target = 5e-3);

// exp_map: returns gamma_{y, v/|v|}(|v|_g).
Vec2 exp_map(const MetricField& m, Vec2 y, Vec2 v, double h_target = 5e-3);

// Re-samples the geodesic from p with exactly n uniform steps covering
// [0, total_time]; used by ray quadratures that need Simpson nodes dividing
// tau_plus evenly. No boundary stopping.
std::vector<PhasePoint> sample_geodesic(const MetricField& m, PhasePoint p,
                                        double total_time, int n_steps);

// Parallel transport by joint RK4 integration of (x, theta, V); 4th-order
// accurate, so the isometry |V|_g is preserved to discretization error.
Vec2 parallel_transport(const MetricField& m, PhasePoint start, double time,
                        Vec2 X, double h_target = 5e-3);
Vec2 parallel_transport(const MetricField& m, const Geodesic& gamma, Vec2 X);

// Joint integration that also records the transported chart frame at every
// sample: frames[k] holds the images of e1, e2 at path[k].
struct TransportedFrame {
  std::vector<PhasePoint> path;
  std::vector<std::array<Vec2, 2>> frames;
};
TransportedFrame transport_frames(const MetricField& m, PhasePoint start,
                                  double time, int n_steps);

}  // namespace magtomo
