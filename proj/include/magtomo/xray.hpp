#pragma once

#include <complex>

#include "magtomo/fields.hpp"
#include "magtomo/geometry.hpp"

namespace magtomo {

using Complex = std::complex<double>;

// Samples over the inward boundary fan of the chart disk. `values` is stored
// complex (ray data of real fields is real; the pipeline intermediates are
// not). Node (i, j) sits at boundary angle fan.phi(i), fan angle
// fan.alpha(j), with weight mu = cos(alpha) and arc quadrature weight
// w(i) = |dy/dphi|_g dphi dalpha.
struct BoundaryRayGrid {
  FanSpec fan;
  double radius = 1.0;
  std::vector<Complex> values;
  std::vector<double> mu;
  std::vector<double> quad_w;  // arc weight x dphi x dalpha, no mu

  BoundaryRayGrid() = default;
  BoundaryRayGrid(const MetricField& m, const FanSpec& f);

  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(i) * fan.n_alpha + j;
  }
  Complex& at(int i, int j) { return values[index(i, j)]; }
  Complex at(int i, int j) const { return values[index(i, j)]; }

  // Bilinear interpolation of Re(values); periodic in phi, clamped in alpha.
  double interp_real(double phi, double alpha) const;

  double sup_norm() const;
};

// mu-weighted inner product and norm on the fan (Re/Im handled complexly).
Complex inner_mu(const BoundaryRayGrid& a, const BoundaryRayGrid& b);
double norm_mu(const BoundaryRayGrid& a);

enum class TransformKind { I0, I1 };

struct RayTransformRecord {
  TransformKind kind = TransformKind::I0;
  std::uint64_t metric_hash = 0;
  BoundaryRayGrid data;
};

// Quadrature/backtrace resolutions shared by the transform family.
struct XrayOptions {
  FanSpec fan{128, 64};
  int n_fiber = 64;       // fiber directions for the adjoints
  double h_geo = 5e-3;    // geodesic integration step
  double h_quad = 1e-2;   // target spacing of ray quadrature nodes
};

// Forward transforms: composite Simpson along each fan geodesic with bicubic
// field interpolation. Atlases of ray sample points are cached per metric.
RayTransformRecord i0_forward(const MetricField& m, const ScalarField& f,
                              const XrayOptions& opt = {});
RayTransformRecord i1_forward(const MetricField& m, const OneForm& A,
                              const XrayOptions& opt = {});

// mu-weighted adjoints: fiber quadrature of the flow-constant extension,
// which is found by tracing every (node, direction) back to the fan.
ScalarField i0_adjoint(const MetricField& m, const BoundaryRayGrid& psi,
                       const ChartGrid& grid, const XrayOptions& opt = {});
OneForm i1_adjoint(const MetricField& m, const BoundaryRayGrid& psi,
                   const ChartGrid& grid, const XrayOptions& opt = {});

ScalarField normal_apply(const MetricField& m, const ScalarField& f,
                         const XrayOptions& opt = {});
OneForm normal_apply(const MetricField& m, const OneForm& A,
                     const XrayOptions& opt = {});

// Appendix-B composition oracle: polar quadrature over the tangent plane of
// the parallel-transported symbol. In polar coordinates the |v|^{-(n+1)}
// kernel cancels against the volume factor, so the v = 0 singularity never
// appears. Returns covariant components at x.
Vec2 normal_kernel_apply(const MetricField& m, const OneForm& A, Vec2 x,
                         int n_dir = 96, double h_quad = 1e-2);

struct InversionResult {
  ScalarField scalar;
  OneForm oneform;
  std::vector<double> residuals;  // relative residual per iteration
  bool converged = false;
  bool stagnated = false;
  int iterations = 0;
};

struct InvertOptions {
  int max_iters = 40;
  double tol = 1e-6;
  XrayOptions xray;
  double support_radius = 1.0;  // unknowns live strictly inside this disk
};

// Conjugate gradients on the normal operator. The I1 path re-projects the
// Krylov vectors onto solenoidal forms every iteration (N1 annihilates
// potentials, so the kernel has to be quotiented away).
InversionResult invert_normal(const MetricField& m, const ScalarField& rhs,
                              const InvertOptions& opt = {});
InversionResult invert_normal(const MetricField& m, const OneForm& rhs,
                              const HodgeSolver& projector,
                              const InvertOptions& opt = {});

struct SymbolCheckReport {
  double fitted_decay = 0.0;     // log-log slope of the N0 response
  double projector_ratio = 0.0;  // N1 parallel/orthogonal response
  bool degenerate = false;       // constant input, no fit attempted
  std::vector<double> freqs;
  std::vector<double> amplitudes;
};

// Euclidean-only diagnostic: Rayleigh response of N on plane-wave-modulated
// bumps over a dyadic frequency ladder (cycles per diameter).
SymbolCheckReport symbol_check_euclidean(TransformKind kind, int grid_n,
                                         const std::vector<double>& cycles,
                                         const XrayOptions& opt = {});

}  // namespace magtomo
