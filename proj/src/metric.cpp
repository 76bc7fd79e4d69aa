#include "magtomo/metric.hpp"

#include <cmath>

namespace magtomo {

MetricField MetricField::euclidean(double chart_radius) {
  MetricField m;
  m.mode_ = Mode::Analytic;
  m.radius_ = chart_radius;
  m.g_fn_ = [](Vec2) { return Metric2x2{1.0, 0.0, 1.0}; };
  m.dg_fn_ = [](Vec2) { return std::array<Metric2x2, 2>{Metric2x2{0, 0, 0}, Metric2x2{0, 0, 0}}; };
  m.curvature_fn_ = [](Vec2) { return 0.0; };
  m.tag_ = "euclidean";
  m.hash_ = hash_mix(hash_mix(kHashSeed, m.tag_), chart_radius);
  return m;
}

MetricField MetricField::conformal(ScalarFn u, std::function<Vec2(Vec2)> du,
                                   ScalarFn lap_u, double chart_radius,
                                   const std::string& tag) {
  MetricField m;
  m.mode_ = Mode::Analytic;
  m.radius_ = chart_radius;
  m.g_fn_ = [u](Vec2 x) {
    double c = std::exp(2.0 * u(x));
    return Metric2x2{c, 0.0, c};
  };
  m.dg_fn_ = [u, du](Vec2 x) {
    double c = std::exp(2.0 * u(x));
    Vec2 d = du(x);
    return std::array<Metric2x2, 2>{
        Metric2x2{2.0 * c * d.x, 0.0, 2.0 * c * d.x},
        Metric2x2{2.0 * c * d.y, 0.0, 2.0 * c * d.y}};
  };
  if (lap_u) {
    m.curvature_fn_ = [u, lap_u](Vec2 x) {
      return -std::exp(-2.0 * u(x)) * lap_u(x);
    };
  }
  m.tag_ = tag;
  m.hash_ = hash_mix(hash_mix(kHashSeed, tag), chart_radius);
  return m;
}

MetricField MetricField::gaussian_bump(double amp, double k,
                                       double chart_radius) {
  // g = (1 + amp e^{-k r^2}) delta = e^{2u} delta with
  // u = log(1 + amp e^{-k r^2}) / 2.
  auto u = [amp, k](Vec2 x) {
    return 0.5 * std::log(1.0 + amp * std::exp(-k * (x.x * x.x + x.y * x.y)));
  };
  auto du = [amp, k](Vec2 x) {
    double e = amp * std::exp(-k * (x.x * x.x + x.y * x.y));
    double f = -k * e / (1.0 + e);
    return Vec2{f * x.x, f * x.y};
  };
  auto lap = [amp, k](Vec2 x) {
    double r2 = x.x * x.x + x.y * x.y;
    double e = amp * std::exp(-k * r2);
    double c = 1.0 + e;
    // u = log(c)/2, grad u = -k e/c x, lap u = div(grad u)
    double de_dr2 = -k * e;
    double f = de_dr2 / c;  // radial factor of grad u
    // lap u = 2 f + r^2 (df/dr2 * 2) with df/dr2 = (c de' - e' de)/c^2 ...
    double ddf = (-k * de_dr2 * c - de_dr2 * de_dr2) / (c * c);
    return 2.0 * f + 2.0 * r2 * ddf;
  };
  MetricField m = conformal(u, du, lap, chart_radius, "gaussian_bump");
  m.hash_ = hash_mix(hash_mix(hash_mix(hash_mix(kHashSeed, m.tag_), amp), k),
                     chart_radius);
  return m;
}

MetricField MetricField::from_grid(const std::vector<double>& g11,
                                   const std::vector<double>& g12,
                                   const std::vector<double>& g22, int n,
                                   double extent, double chart_radius) {
  MetricField m;
  m.mode_ = Mode::Grid;
  m.radius_ = chart_radius;
  m.grid_extent_ = extent;
  double h = 2.0 * extent / (n - 1);
  m.splines_ = std::make_shared<const std::array<CubicSpline2D, 3>>(
      std::array<CubicSpline2D, 3>{CubicSpline2D(g11, n, -extent, h),
                                   CubicSpline2D(g12, n, -extent, h),
                                   CubicSpline2D(g22, n, -extent, h)});
  m.tag_ = "grid";
  std::uint64_t h64 = hash_mix(kHashSeed, m.tag_);
  for (double v : g11) h64 = hash_mix(h64, v);
  for (double v : g12) h64 = hash_mix(h64, v);
  for (double v : g22) h64 = hash_mix(h64, v);
  m.hash_ = hash_mix(hash_mix(h64, extent), chart_radius);
  return m;
}

MetricField MetricField::with_radius(double r) const {
  MetricField m = *this;
  m.radius_ = r;
  m.hash_ = hash_mix(m.hash_, r);
  return m;
}

Metric2x2 MetricField::g(Vec2 x) const {
  if (mode_ == Mode::Analytic) return g_fn_(x);
  return Metric2x2{(*splines_)[0].eval(x), (*splines_)[1].eval(x),
                   (*splines_)[2].eval(x)};
}

std::array<Metric2x2, 2> MetricField::dg(Vec2 x) const {
  if (mode_ == Mode::Analytic) return dg_fn_(x);
  Vec2 d11 = (*splines_)[0].grad(x);
  Vec2 d12 = (*splines_)[1].grad(x);
  Vec2 d22 = (*splines_)[2].grad(x);
  return {Metric2x2{d11.x, d12.x, d22.x}, Metric2x2{d11.y, d12.y, d22.y}};
}

Christoffel MetricField::christoffel(Vec2 x) const {
  if (mode_ == Mode::Grid) {
    if (std::abs(x.x) > grid_extent_ || std::abs(x.y) > grid_extent_)
      throw GeometryError("christoffel: point outside sampled chart square");
  } else if (std::hypot(x.x, x.y) > radius_ * 1.05 + 1e-12) {
    // 5% slack: integrator stages may probe just past the boundary before
    // the exit bisection locates the crossing.
    throw GeometryError("christoffel: point outside chart disk");
  }
  Metric2x2 gi = g_inv(x);
  auto d = dg(x);
  // dg[l](i,j) = d_l g_{ij}
  auto dgv = [&](int l, int i, int j) {
    const Metric2x2& m = d[l];
    if (i == 0 && j == 0) return m.g11;
    if (i == 1 && j == 1) return m.g22;
    return m.g12;
  };
  auto giv = [&](int i, int j) {
    if (i == 0 && j == 0) return gi.g11;
    if (i == 1 && j == 1) return gi.g22;
    return gi.g12;
  };
  Christoffel c;
  for (int k = 0; k < 2; ++k)
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        double s = 0.0;
        for (int l = 0; l < 2; ++l)
          s += giv(k, l) * (dgv(i, l, j) + dgv(j, l, i) - dgv(l, i, j));
        c.gamma[k][i][j] = 0.5 * s;
      }
  return c;
}

double MetricField::gauss_curvature(Vec2 x) const {
  if (curvature_fn_) return curvature_fn_(x);
  // K = <R(e1,e2)e2, e1> with R^l_{kij} = d_i G^l_{jk} - d_j G^l_{ik}
  //     + G^l_{is} G^s_{jk} - G^l_{js} G^s_{ik}, via 4th-order differences
  // of the Christoffel symbols.
  double step = 1e-4 * std::max(1.0, radius_);
  Christoffel cp1 = christoffel({x.x + step, x.y});
  Christoffel cm1 = christoffel({x.x - step, x.y});
  Christoffel cp2 = christoffel({x.x + 2 * step, x.y});
  Christoffel cm2 = christoffel({x.x - 2 * step, x.y});
  Christoffel dp1 = christoffel({x.x, x.y + step});
  Christoffel dm1 = christoffel({x.x, x.y - step});
  Christoffel dp2 = christoffel({x.x, x.y + 2 * step});
  Christoffel dm2 = christoffel({x.x, x.y - 2 * step});
  auto d1 = [&](int k, int i, int j) {
    return (8.0 * (cp1(k, i, j) - cm1(k, i, j)) -
            (cp2(k, i, j) - cm2(k, i, j))) /
           (12.0 * step);
  };
  auto d2 = [&](int k, int i, int j) {
    return (8.0 * (dp1(k, i, j) - dm1(k, i, j)) -
            (dp2(k, i, j) - dm2(k, i, j))) /
           (12.0 * step);
  };
  Christoffel c0 = christoffel(x);
  // R^l_{k 1 2} = d_1 G^l_{2k} - d_2 G^l_{1k} + G^l_{1s}G^s_{2k} - G^l_{2s}G^s_{1k}
  double R[2][2];  // R[l][k] = R^l_{k12}
  for (int l = 0; l < 2; ++l)
    for (int k = 0; k < 2; ++k) {
      double v = d1(l, 1, k) - d2(l, 0, k);
      for (int s = 0; s < 2; ++s)
        v += c0(l, 0, s) * c0(s, 1, k) - c0(l, 1, s) * c0(s, 0, k);
      R[l][k] = v;
    }
  // Sectional curvature with the coordinate plane:
  // K = g_{1l} R^l_{2 1 2} ... computed invariantly as
  // K = <R(d1,d2)d2, d1> / (|d1|^2 |d2|^2 - <d1,d2>^2).
  Metric2x2 m = g(x);
  auto gv = [&](int i, int j) {
    if (i == 0 && j == 0) return m.g11;
    if (i == 1 && j == 1) return m.g22;
    return m.g12;
  };
  // R(d1, d2) d2 has components R^l_{k12} (d2)^k = R[l][1]
  double num = gv(0, 0) * R[0][1] + gv(0, 1) * R[1][1];
  double den = m.g11 * m.g22 - m.g12 * m.g12;
  return num / den;
}

std::array<Vec2, 2> MetricField::orthonormal_frame(Vec2 x) const {
  Vec2 e1{1.0, 0.0};
  Vec2 e2{0.0, 1.0};
  e1 = e1 / norm(x, e1);
  double proj = inner(x, e2, e1);
  e2 = e2 - proj * e1;
  e2 = e2 / norm(x, e2);
  return {e1, e2};
}

}  // namespace magtomo
