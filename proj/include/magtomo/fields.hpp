#pragma once

#include <memory>
#include <vector>

#include "magtomo/geodesic.hpp"
#include "magtomo/metric.hpp"

namespace magtomo {

// Uniform N x N grid over the chart square [-extent, extent]^2 that
// circumscribes the extended disk; shared by field storage, the Hodge solve
// and the ray quadratures.
struct ChartGrid {
  int n = 128;
  double extent = 1.3;

  double h() const { return 2.0 * extent / (n - 1); }
  Vec2 point(int i, int j) const {
    return {-extent + i * h(), -extent + j * h()};
  }
  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(j) * n + i;
  }
  std::size_t size() const { return static_cast<std::size_t>(n) * n; }
  bool operator==(const ChartGrid& o) const {
    return n == o.n && extent == o.extent;
  }
};

// Real scalar samples on a ChartGrid, extended by zero outside the support
// disk |x| <= mask_radius when representing coefficients.
struct ScalarField {
  ChartGrid grid;
  double mask_radius = 1.0;
  std::vector<double> v;

  ScalarField() = default;
  ScalarField(const ChartGrid& g, double mask = 1.0)
      : grid(g), mask_radius(mask), v(g.size(), 0.0) {}

  double& at(int i, int j) { return v[grid.index(i, j)]; }
  double at(int i, int j) const { return v[grid.index(i, j)]; }

  void zero_outside_mask();
  double max_abs_outside_mask() const;
  double max_abs() const;
};

// Covariant components (a1, a2) of a 1-form in the chart basis.
struct OneForm {
  ScalarField a1, a2;

  OneForm() = default;
  OneForm(const ChartGrid& g, double mask = 1.0) : a1(g, mask), a2(g, mask) {}
  const ChartGrid& grid() const { return a1.grid; }
};

struct HodgeSplit {
  OneForm solenoidal;   // A^s
  ScalarField potential;  // phi, vanishing outside the mask disk
};

// Bicubic sampler for interpolating a field along geodesics.
class FieldSampler {
 public:
  explicit FieldSampler(const ScalarField& f);
  double operator()(Vec2 x) const { return spline_.eval(x); }
  Vec2 grad(Vec2 x) const { return spline_.grad(x); }

 private:
  CubicSpline2D spline_;
};

class OneFormSampler {
 public:
  explicit OneFormSampler(const OneForm& A) : s1_(A.a1), s2_(A.a2) {}
  Vec2 operator()(Vec2 x) const { return {s1_(x), s2_(x)}; }

 private:
  FieldSampler s1_, s2_;
};

// Symbol sigma_A(x, theta) = sum_j a_j(x) theta^j = <A^sharp, theta>_g.
double sigma_symbol(const MetricField& m, const OneFormSampler& A,
                    const PhasePoint& p);
double sigma_symbol(const MetricField& m, const OneForm& A,
                    const PhasePoint& p);

// 4th-order central difference operators, zero-padded past the square.
OneForm grid_gradient(const ScalarField& phi);           // d phi
ScalarField grid_divergence(const MetricField& m, const OneForm& A);  // div A#
ScalarField codifferential(const MetricField& m, const OneForm& A);   // -div A#
ScalarField curl_coefficient(const OneForm& A);  // dA = (d1 a2 - d2 a1) dx1^dx2

// Weighted L^2(M) inner products and norms over the mask disk.
double inner_l2(const MetricField& m, const ScalarField& f,
                const ScalarField& g, double radius);
double inner_l2(const MetricField& m, const OneForm& A, const OneForm& B,
                double radius);
double norm_l2(const MetricField& m, const ScalarField& f, double radius);
double norm_l2(const MetricField& m, const OneForm& A, double radius);

// Discrete H^1 norm over the disk of the given radius; one-sided differences
// where the stencil would leave the disk.
double norm_h1(const MetricField& m, const ScalarField& f, double radius);
double norm_h1(const MetricField& m, const OneForm& A, double radius);

// Dirichlet solver for the Hodge decomposition A = A^s + d phi with
// phi = 0 on the mask circle: solves div(grad phi) = div(A#) with the same
// 4th-order stencils on both sides, so delta(A^s) vanishes at solver
// precision. The factorization is reused across calls (CG re-projection).
class HodgeSolver {
 public:
  HodgeSolver(const MetricField& m, const ChartGrid& grid, double mask_radius);
  ~HodgeSolver();
  HodgeSolver(HodgeSolver&&) noexcept;

  HodgeSplit decompose(const OneForm& A) const;
  OneForm project_solenoidal(const OneForm& A) const;

  double mask_radius() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

HodgeSplit hodge_decompose(const MetricField& m, const OneForm& A);

// Gauge companion (A, V) -> (A + d phi, V); phi must vanish outside the mask
// disk to 1e-10.
std::pair<OneForm, ScalarField> gauge_transform(const OneForm& A,
                                                const ScalarField& V,
                                                const ScalarField& phi);

// --- synthetic field builders (tests, pipeline, CLI) ---

// amp * exp(-|x-c|^2 / w^2) * cutoff(|x| / support_radius), cutoff C^2.
ScalarField gaussian_bump_scalar(const ChartGrid& g, Vec2 center, double width,
                                 double amp, double support_radius,
                                 double mask_radius = 1.0);

// Exactly grid-solenoidal 1-form (for euclidean/conformal metrics): the
// rotated grid gradient of a bump stream function.
OneForm solenoidal_bump(const ChartGrid& g, Vec2 center, double width,
                        double amp, double support_radius,
                        double mask_radius = 1.0);

}  // namespace magtomo
