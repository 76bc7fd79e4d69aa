#include "magtomo/geometry.hpp"

#include <cmath>
#include <limits>

namespace magtomo {

BoundaryFrame boundary_frame(const MetricField& m, double phi) {
  const double R = m.chart_radius();
  BoundaryFrame f;
  f.y = {R * std::cos(phi), R * std::sin(phi)};
  // Outward normal: sharp of d|x|, normalized.
  Vec2 drho{std::cos(phi), std::sin(phi)};
  Metric2x2 gi = m.g_inv(f.y);
  Vec2 nu{gi.g11 * drho.x + gi.g12 * drho.y,
          gi.g12 * drho.x + gi.g22 * drho.y};
  f.nu = nu / m.norm(f.y, nu);
  Vec2 tc{-std::sin(phi), std::cos(phi)};
  Vec2 t = tc - m.inner(f.y, tc, f.nu) * f.nu;
  f.tangent = t / m.norm(f.y, t);
  f.arc_weight = R * m.norm(f.y, tc);
  return f;
}

BoundaryDirection fan_node(const MetricField& m, double phi, double alpha) {
  BoundaryFrame f = boundary_frame(m, phi);
  Vec2 nu_in = -1.0 * f.nu;
  BoundaryDirection d;
  d.y = f.y;
  d.theta = std::cos(alpha) * nu_in + std::sin(alpha) * f.tangent;
  d.mu = std::cos(alpha);
  return d;
}

void fan_coordinates(const MetricField& m, Vec2 y, Vec2 theta_in, double& phi,
                     double& alpha) {
  phi = std::atan2(y.y, y.x);
  if (phi < 0.0) phi += 2.0 * M_PI;
  BoundaryFrame f = boundary_frame(m, phi);
  double cn = m.inner(y, theta_in, -1.0 * f.nu);
  double ct = m.inner(y, theta_in, f.tangent);
  alpha = std::atan2(ct, cn);
}

DistanceResult distance_and_gradient(const MetricField& m, Vec2 y, Vec2 x,
                                     double tol) {
  Vec2 d = x - y;
  double chi = std::atan2(d.y, d.x);
  Vec2 mid = 0.5 * (x + y);
  double r = m.norm(mid, d);
  if (r < 1e-14) return {0.0, {0.0, 0.0}, chi, 0};

  auto shoot = [&](double angle, double time) {
    Vec2 th{std::cos(angle), std::sin(angle)};
    double h = time / std::max(4, static_cast<int>(std::ceil(time / 5e-3)));
    return flow_fixed_time(m, {y, th}, time, h);
  };

  DistanceResult res;
  const double dchi = 1e-7;
  for (int it = 0; it < 50; ++it) {
    PhasePoint end = shoot(chi, r);
    Vec2 F = end.x - x;
    double fn = F.norm();
    if (fn < tol) {
      res.psi = r;
      res.grad = end.theta;
      res.initial_angle = chi;
      res.iterations = it;
      return res;
    }
    PhasePoint endp = shoot(chi + dchi, r);
    Vec2 Jchi = (endp.x - end.x) / dchi;
    Vec2 Jr = end.theta;
    // Solve [Jchi Jr] [dchi_step; dr_step] = -F
    double det = Jchi.x * Jr.y - Jchi.y * Jr.x;
    if (std::abs(det) < 1e-16)
      throw GeometryError("distance_and_gradient: singular shooting Jacobian");
    double sc = (-F.x * Jr.y + F.y * Jr.x) / det;
    double sr = (-Jchi.x * F.y + Jchi.y * F.x) / det;
    // Backtracking to keep the iteration from overshooting on curved metrics.
    double scale = 1.0;
    for (int bt = 0; bt < 6; ++bt) {
      double nchi = chi + scale * sc;
      double nr = r + scale * sr;
      if (nr <= 0.0) {
        scale *= 0.5;
        continue;
      }
      Vec2 Ft = shoot(nchi, nr).x - x;
      if (Ft.norm() < fn || bt == 5) {
        chi = nchi;
        r = nr;
        break;
      }
      scale *= 0.5;
    }
  }
  throw GeometryError(
      "distance_and_gradient: shooting did not converge in 50 iterations "
      "(non-simplicity suspected)");
}

std::vector<double> jacobi_along(const MetricField& m,
                                 const std::vector<PhasePoint>& path,
                                 double h, double J0, double dJ0) {
  std::vector<double> J(path.size());
  double j = J0, dj = dJ0;
  J[0] = j;
  for (std::size_t k = 0; k + 1 < path.size(); ++k) {
    double seg = h;
    if (k + 2 == path.size()) {
      Vec2 d = path[k + 1].x - path[k].x;
      seg = m.norm(0.5 * (path[k].x + path[k + 1].x), d);
    }
    double K0 = m.gauss_curvature(path[k].x);
    Vec2 xm = 0.5 * (path[k].x + path[k + 1].x);
    double Km = m.gauss_curvature(xm);
    double K1 = m.gauss_curvature(path[k + 1].x);
    // RK4 on (J, J')' = (J', -K J) with K frozen per stage position.
    auto f = [](double K, double jj, double djj) {
      return std::pair<double, double>{djj, -K * jj};
    };
    auto [k1a, k1b] = f(K0, j, dj);
    auto [k2a, k2b] = f(Km, j + 0.5 * seg * k1a, dj + 0.5 * seg * k1b);
    auto [k3a, k3b] = f(Km, j + 0.5 * seg * k2a, dj + 0.5 * seg * k2b);
    auto [k4a, k4b] = f(K1, j + seg * k3a, dj + seg * k3b);
    j += (seg / 6.0) * (k1a + 2 * k2a + 2 * k3a + k4a);
    dj += (seg / 6.0) * (k1b + 2 * k2b + 2 * k3b + k4b);
    J[k + 1] = j;
  }
  return J;
}

SimplicityReport simplicity_check(const MetricField& m, int n_rays) {
  if (n_rays < 1) throw ConfigError("simplicity_check: n_rays must be >= 1");
  int n_s = std::max(1, static_cast<int>(std::lround(std::sqrt(n_rays))));
  int n_a = (n_rays + n_s - 1) / n_s;
  FanSpec fan{n_s, n_a};

  SimplicityReport rep;
  rep.no_conjugate = true;
  rep.min_jacobi = std::numeric_limits<double>::infinity();
  rep.min_convexity = std::numeric_limits<double>::infinity();

  for (int i = 0; i < n_s; ++i) {
    BoundaryFrame f = boundary_frame(m, fan.phi(i));
    // Second fundamental form Pi(t, t) = <D_t nu, t> with nu the outward
    // g-unit normal field of the level sets of |x|.
    auto nu_field = [&](Vec2 x) {
      Vec2 drho = x / x.norm();
      Metric2x2 gi = m.g_inv(x);
      Vec2 nv{gi.g11 * drho.x + gi.g12 * drho.y,
              gi.g12 * drho.x + gi.g22 * drho.y};
      return nv / m.norm(x, nv);
    };
    const double fd = 1e-5;
    Vec2 t = f.tangent;
    Vec2 np = nu_field(f.y + fd * t);
    Vec2 nm = nu_field(f.y - fd * t);
    Vec2 dnu = (np - nm) / (2.0 * fd);
    Christoffel c = m.christoffel(f.y);
    Vec2 cov = dnu;
    double tv[2] = {t.x, t.y};
    double nv[2] = {f.nu.x, f.nu.y};
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) {
        cov.x += c(0, a, b) * tv[a] * nv[b];
        cov.y += c(1, a, b) * tv[a] * nv[b];
      }
    double Pi = m.inner(f.y, cov, t);
    rep.min_convexity = std::min(rep.min_convexity, Pi);
  }
  rep.convex = rep.min_convexity > 0.0;

  int produced = 0;
  for (int i = 0; i < n_s && produced < n_rays; ++i)
    for (int j = 0; j < n_a && produced < n_rays; ++j, ++produced) {
      BoundaryDirection bd = fan_node(m, fan.phi(i), fan.alpha(j));
      Geodesic geo = integrate_geodesic(m, {bd.y, bd.theta});
      auto J = jacobi_along(m, geo.samples, geo.h);
      for (std::size_t k = 1; k < J.size(); ++k)
        if (J[k] <= 0.0) rep.no_conjugate = false;
      rep.min_jacobi = std::min(rep.min_jacobi, J.back());
    }
  return rep;
}

double santalo_integrate(const MetricField& m,
                         const std::function<double(Vec2, Vec2)>& F,
                         const FanSpec& fan, double h_quad) {
  std::vector<double> slot(static_cast<std::size_t>(fan.n_s) * fan.n_alpha);
  parallel_for(slot.size(), [&](std::size_t idx) {
    int i = static_cast<int>(idx) / fan.n_alpha;
    int j = static_cast<int>(idx) % fan.n_alpha;
    BoundaryFrame bf = boundary_frame(m, fan.phi(i));
    double ws = bf.arc_weight * fan.dphi();
    BoundaryDirection bd = fan_node(m, fan.phi(i), fan.alpha(j));
    Geodesic geo = integrate_geodesic(m, {bd.y, bd.theta});
    int n = std::max(2, static_cast<int>(std::ceil(geo.tau_plus / h_quad)));
    if (n % 2) ++n;
    auto path = sample_geodesic(m, {bd.y, bd.theta}, geo.tau_plus, n);
    double hq = geo.tau_plus / n;
    double ray = 0.0;
    for (int k = 0; k <= n; ++k) {
      double w = (k == 0 || k == n) ? 1.0 : (k % 2 ? 4.0 : 2.0);
      ray += w * F(path[k].x, path[k].theta);
    }
    slot[idx] = (hq / 3.0) * ray * bd.mu * ws * fan.dalpha();
  });
  double total = 0.0;
  for (double v : slot) total += v;
  return total;
}

}  // namespace magtomo
