#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>

#include "magtomo/interp.hpp"
#include "magtomo/util.hpp"

namespace magtomo {

// Symmetric 2x2 metric tensor at a point, chart components.
struct Metric2x2 {
  double g11 = 1.0, g12 = 0.0, g22 = 1.0;

  double det() const { return g11 * g22 - g12 * g12; }
  Metric2x2 inverse() const {
    double d = det();
    return {g22 / d, -g12 / d, g11 / d};
  }
};

// Christoffel symbols Gamma^k_{ij}, symmetric in (i,j).
struct Christoffel {
  double gamma[2][2][2] = {};
  double operator()(int k, int i, int j) const { return gamma[k][i][j]; }
};

// Riemannian metric on a closed disk chart |x| <= chart_radius. Two modes:
// analytic callbacks (with exact first derivatives) or grid samples with
// bicubic interpolation. Immutable after construction; shareable across
// threads.
class MetricField {
 public:
  using GFn = std::function<Metric2x2(Vec2)>;
  // dg[k] = d g / d x_{k+1}
  using DGFn = std::function<std::array<Metric2x2, 2>(Vec2)>;
  using ScalarFn = std::function<double(Vec2)>;

  static MetricField euclidean(double chart_radius = 1.0);
  // g = e^{2u} delta, with u, du and (optionally) Laplacian of u analytic.
  static MetricField conformal(ScalarFn u, std::function<Vec2(Vec2)> du,
                               ScalarFn lap_u, double chart_radius,
                               const std::string& tag);
  // g = (1 + amp * exp(-k |x|^2)) delta
  static MetricField gaussian_bump(double amp, double k, double chart_radius);
  // Grid-sampled metric over [-extent, extent]^2, row-major x1-fastest.
  static MetricField from_grid(const std::vector<double>& g11,
                               const std::vector<double>& g12,
                               const std::vector<double>& g22, int n,
                               double extent, double chart_radius);

  double chart_radius() const { return radius_; }
  // Same metric, viewed on a disk of a different radius (used to pass from
  // the inner manifold to the extended one and back).
  MetricField with_radius(double r) const;

  bool analytic() const { return mode_ == Mode::Analytic; }

  Metric2x2 g(Vec2 x) const;
  Metric2x2 g_inv(Vec2 x) const { return g(x).inverse(); }
  double sqrt_det(Vec2 x) const { return std::sqrt(g(x).det()); }

  double inner(Vec2 x, Vec2 v, Vec2 w) const {
    Metric2x2 m = g(x);
    return m.g11 * v.x * w.x + m.g12 * (v.x * w.y + v.y * w.x) +
           m.g22 * v.y * w.y;
  }
  double norm(Vec2 x, Vec2 v) const { return std::sqrt(inner(x, v, v)); }
  Vec2 normalized(Vec2 x, Vec2 v) const { return v / norm(x, v); }

  // Gamma^k_{ij} from analytic derivatives or from the spline's derivative
  // in grid mode. Throws GeometryError outside the chart square.
  Christoffel christoffel(Vec2 x) const;

  // Gauss curvature; analytic for conformal metrics, otherwise via
  // differences of the Christoffel symbols.
  double gauss_curvature(Vec2 x) const;

  // g-orthonormal frame {e1, e2} at x obtained by Gram-Schmidt from the
  // chart basis; e2 is oriented so that (e1, e2) is positively oriented.
  std::array<Vec2, 2> orthonormal_frame(Vec2 x) const;

  std::uint64_t hash() const { return hash_; }
  const std::string& tag() const { return tag_; }

 private:
  enum class Mode { Analytic, Grid };

  MetricField() = default;

  std::array<Metric2x2, 2> dg(Vec2 x) const;

  Mode mode_ = Mode::Analytic;
  double radius_ = 1.0;
  GFn g_fn_;
  DGFn dg_fn_;
  ScalarFn curvature_fn_;  // optional closed form
  std::shared_ptr<const std::array<CubicSpline2D, 3>> splines_;
  double grid_extent_ = 0.0;
  std::string tag_;
  std::uint64_t hash_ = 0;
};

}  // namespace magtomo
