#pragma once

#include <functional>

#include "magtomo/geodesic.hpp"

namespace magtomo {

// Inward boundary direction with its fan weight mu = |<theta, nu>|_g.
struct BoundaryDirection {
  Vec2 y;
  Vec2 theta;
  double mu = 0.0;
};

// Fan discretization of the inward boundary sphere bundle: midpoint nodes in
// the chart boundary angle phi (periodic) and in the fan angle alpha measured
// from the inward normal, alpha in (-pi/2, pi/2).
struct FanSpec {
  int n_s = 128;
  int n_alpha = 64;

  double phi(int i) const { return 2.0 * M_PI * (i + 0.5) / n_s; }
  double alpha(int j) const { return -0.5 * M_PI + M_PI * (j + 0.5) / n_alpha; }
  double dphi() const { return 2.0 * M_PI / n_s; }
  double dalpha() const { return M_PI / n_alpha; }
};

// g-orthonormal boundary frame at the boundary point with chart angle phi:
// nu is the outward unit normal, tangent the unit tangent (positively
// oriented), arc_weight = |dy/dphi|_g the boundary arc-length density.
struct BoundaryFrame {
  Vec2 y;
  Vec2 nu;
  Vec2 tangent;
  double arc_weight = 0.0;
};

BoundaryFrame boundary_frame(const MetricField& m, double phi);

// (phi, alpha) -> inward direction; exact inverse up to roundoff.
BoundaryDirection fan_node(const MetricField& m, double phi, double alpha);
void fan_coordinates(const MetricField& m, Vec2 y, Vec2 theta_in, double& phi,
                     double& alpha);

struct DistanceResult {
  double psi = 0.0;           // d_g(y, x)
  Vec2 grad;                  // unit gradient at x (= geodesic velocity)
  double initial_angle = 0.0; // chart angle of the departing direction at y
  int iterations = 0;
};

// Geodesic distance by two-variable Newton shooting (initial chart angle and
// arrival time); the arrival velocity is the gradient of the distance
// function. Throws GeometryError after 50 failed iterations, which on a
// metric that passed simplicity_check indicates a conjugate-point problem.
DistanceResult distance_and_gradient(const MetricField& m, Vec2 y, Vec2 x,
                                     double tol = 1e-9);

struct SimplicityReport {
  bool convex = false;
  bool no_conjugate = false;
  double min_jacobi = 0.0;  // min over rays of the terminal Jacobi value
  double min_convexity = 0.0;
};

// Integrates the scalar Jacobi equation J'' + K J = 0 (J(0)=0, J'(0)=1)
// along a fan of n_rays boundary-inward geodesics and checks the second
// fundamental form at boundary samples.
SimplicityReport simplicity_check(const MetricField& m, int n_rays);

// Jacobi field magnitude along a single geodesic; returns J at every sample
// of the path (used by the simplicity check and by polar volume densities).
std::vector<double> jacobi_along(const MetricField& m,
                                 const std::vector<PhasePoint>& path,
                                 double h, double J0 = 0.0, double dJ0 = 1.0);

// Right-hand side of the Santalo formula: quadrature over the inward fan of
// the ray integrals of F, weighted by mu.
double santalo_integrate(const MetricField& m,
                         const std::function<double(Vec2, Vec2)>& F,
                         const FanSpec& fan, double h_quad = 0.01);

}  // namespace magtomo
