#include <doctest.h>

#include <cmath>
#include <random>

#include "magtomo/geometry.hpp"

using namespace magtomo;

namespace {

MetricField tilt_metric(double radius = 1.0) {
  // g = e^{2u} delta with u = 0.1 x1
  return MetricField::conformal(
      [](Vec2 x) { return 0.1 * x.x; }, [](Vec2) { return Vec2{0.1, 0.0}; },
      [](Vec2) { return 0.0; }, radius, "tilt");
}

MetricField bump_metric(double radius = 1.0) {
  return MetricField::gaussian_bump(0.05, 4.0, radius);
}

// Symbolic Christoffels of a conformal metric g = e^{2u} delta:
// Gamma^k_{ij} = d_ij u terms: delta_{ki} u_j + delta_{kj} u_i - delta_{ij} u_k.
Christoffel conformal_christoffel_oracle(Vec2 du) {
  double d[2] = {du.x, du.y};
  Christoffel c;
  for (int k = 0; k < 2; ++k)
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        c.gamma[k][i][j] = (k == i ? d[j] : 0.0) + (k == j ? d[i] : 0.0) -
                           (i == j ? d[k] : 0.0);
  return c;
}

}  // namespace

TEST_CASE("christoffel: euclidean vanishes") {
  auto m = MetricField::euclidean();
  Christoffel c = m.christoffel({0.3, -0.4});
  for (int k = 0; k < 2; ++k)
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) CHECK(c(k, i, j) == doctest::Approx(0.0));
}

TEST_CASE("christoffel: conformal tilt matches symbolic oracle") {
  auto m = tilt_metric();
  Vec2 pts[] = {{0.0, 0.0}, {0.2, 0.5}, {-0.6, 0.1}};
  for (Vec2 p : pts) {
    Christoffel c = m.christoffel(p);
    Christoffel o = conformal_christoffel_oracle({0.1, 0.0});
    for (int k = 0; k < 2; ++k)
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
          CHECK(c(k, i, j) == doctest::Approx(o(k, i, j)).epsilon(1e-12));
  }
  Christoffel c = m.christoffel({0.0, 0.0});
  CHECK(c(0, 0, 0) == doctest::Approx(0.1));
  CHECK(c(0, 1, 1) == doctest::Approx(-0.1));
  CHECK(c(1, 0, 1) == doctest::Approx(0.1));
  CHECK(c(0, 0, 1) == doctest::Approx(0.0));
}

TEST_CASE("christoffel: grid-sampled euclidean stays flat") {
  int n = 33;
  double ext = 1.3;
  std::vector<double> one(n * n, 1.0), zero(n * n, 0.0);
  auto m = MetricField::from_grid(one, zero, one, n, ext, 1.0);
  Christoffel c = m.christoffel({0.37, -0.21});
  for (int k = 0; k < 2; ++k)
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) CHECK(std::abs(c(k, i, j)) <= 1e-8);
}

TEST_CASE("christoffel: outside chart throws") {
  auto m = MetricField::euclidean();
  CHECK_THROWS_AS(m.christoffel({2.0, 0.0}), GeometryError);
}

TEST_CASE("gauss curvature matches conformal closed form") {
  // curvature of the bump metric via the generic Christoffel-difference
  // path against the analytic conformal expression
  auto generic = MetricField::conformal(
      [](Vec2 x) {
        return 0.5 * std::log(1.0 + 0.05 * std::exp(-4.0 * x.dot(x)));
      },
      [](Vec2 x) {
        double e = 0.05 * std::exp(-4.0 * x.dot(x));
        double f = -4.0 * e / (1.0 + e);
        return Vec2{f * x.x, f * x.y};
      },
      nullptr, 1.0, "bump_fd");  // no closed-form curvature: forces FD path
  auto closed = bump_metric();
  Vec2 pts[] = {{0.0, 0.0}, {0.3, 0.2}, {-0.5, 0.4}};
  for (Vec2 p : pts)
    CHECK(generic.gauss_curvature(p) ==
          doctest::Approx(closed.gauss_curvature(p)).epsilon(1e-5));
}

TEST_CASE("integrate_geodesic: euclidean radius and diameter chords") {
  auto m = MetricField::euclidean();
  Geodesic g1 = integrate_geodesic(m, {{0.0, 0.0}, {1.0, 0.0}});
  CHECK(g1.tau_plus == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(g1.exit().x.x == doctest::Approx(1.0).epsilon(1e-8));

  Geodesic g2 = integrate_geodesic(m, {{-1.0, 0.0}, {1.0, 0.0}});
  CHECK(g2.tau_plus == doctest::Approx(2.0).epsilon(1e-9));
  CHECK((g2.exit().x - Vec2{1.0, 0.0}).norm() <= 1e-6);
}

TEST_CASE("integrate_geodesic: exit lands on the boundary") {
  auto m = bump_metric();
  BoundaryDirection bd = fan_node(m, 1.1, 0.4);
  Geodesic g = integrate_geodesic(m, {bd.y, bd.theta});
  CHECK(std::abs(g.exit().x.norm() - 1.0) <= 1e-6);
  CHECK(g.tau_minus == 0.0);
}

TEST_CASE("integrate_geodesic: perturbed metric self-convergence") {
  auto m = bump_metric();
  BoundaryDirection bd = fan_node(m, 2.3, -0.3);
  GeodesicOptions coarse{5e-3};
  GeodesicOptions fine{5e-3 / 16.0};
  double t1 = integrate_geodesic(m, {bd.y, bd.theta}, coarse).tau_plus;
  double t2 = integrate_geodesic(m, {bd.y, bd.theta}, fine).tau_plus;
  CHECK(std::abs(t1 - t2) <= 1e-6);
}

TEST_CASE("integrate_geodesic: tau_plus self-convergence order >= 3.8") {
  // Steps coarse enough that the RK4 error dominates the 1e-10 exit
  // bisection quantum; the metric is a strong (still simple) lens.
  auto m = MetricField::gaussian_bump(0.8, 2.0, 1.0);
  BoundaryDirection bd = fan_node(m, 0.7, 0.25);
  double hs[] = {6.4e-2, 3.2e-2, 4e-3};
  double taus[3];
  for (int k = 0; k < 3; ++k) {
    GeodesicOptions o;
    o.h = hs[k];
    taus[k] = integrate_geodesic(m, {bd.y, bd.theta}, o).tau_plus;
  }
  double e0 = std::abs(taus[0] - taus[2]);
  double e1 = std::abs(taus[1] - taus[2]);
  double order = std::log2(e0 / e1);
  CHECK(order >= 3.8);
}

TEST_CASE("integrate_geodesic: energy drift and reversal") {
  auto m = bump_metric();
  BoundaryDirection bd = fan_node(m, 4.0, 0.55);
  Geodesic g = integrate_geodesic(m, {bd.y, bd.theta});
  CHECK(g.renorm_drift / std::max(1.0, g.tau_plus) <= 1e-9);

  // Flow group property: reverse from the exit returns to the start.
  PhasePoint back{g.exit().x, -1.0 * g.exit().theta};
  Geodesic gb = integrate_geodesic(m, back);
  CHECK((gb.exit().x - bd.y).norm() <= 1e-6 * m.chart_radius());
}

TEST_CASE("time reversal identity for exit times") {
  auto m = bump_metric();
  PhasePoint p{{0.2, -0.3}, {0.6, 0.8}};
  p.theta = m.normalized(p.x, p.theta);
  GeodesicOptions o;
  o.h = 1e-3;
  o.compute_backward_exit = true;
  Geodesic g = integrate_geodesic(m, p, o);
  CHECK(g.tau_minus < 0.0);
  // Total chord from the entry point equals tau_plus - tau_minus.
  Geodesic gb = integrate_geodesic(m, {p.x, -1.0 * p.theta}, {1e-3});
  PhasePoint entry{gb.exit().x, -1.0 * gb.exit().theta};
  Geodesic full = integrate_geodesic(m, entry, {1e-3});
  CHECK(full.tau_plus ==
        doctest::Approx(g.tau_plus - g.tau_minus).epsilon(1e-8));
}

TEST_CASE("exp_map basics") {
  auto m = MetricField::euclidean();
  Vec2 p = exp_map(m, {0.0, 0.0}, {0.5, 0.0});
  CHECK(p.x == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(p.y == doctest::Approx(0.0));
  Vec2 q = exp_map(m, {0.1, 0.2}, {0.0, 0.0});
  CHECK(q.x == doctest::Approx(0.1));
  CHECK(q.y == doctest::Approx(0.2));
}

TEST_CASE("exp_map self-convergence on conformal metric") {
  auto m = bump_metric(1.3);
  Vec2 y{-1.3, 0.0};
  Vec2 v{1.1, 0.35};
  Vec2 a = exp_map(m, y, v, 5e-3);
  Vec2 b = exp_map(m, y, v, 5e-3 / 16.0);
  CHECK((a - b).norm() <= 1e-6);
}

TEST_CASE("exp_map: leaving the chart disk throws") {
  auto m = MetricField::euclidean();
  CHECK_THROWS_AS(exp_map(m, {0.0, 0.0}, {3.0, 0.0}), GeometryError);
}

TEST_CASE("distance_and_gradient: euclidean rays") {
  auto m = MetricField::euclidean();
  auto r1 = distance_and_gradient(m, {-1.0, 0.0}, {0.0, 0.0});
  CHECK(r1.psi == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(r1.grad.x == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(r1.grad.y == doctest::Approx(0.0).epsilon(1e-8));

  auto r2 = distance_and_gradient(m, {-1.0, 0.0}, {0.0, 0.5});
  CHECK(r2.psi == doctest::Approx(std::sqrt(1.25)).epsilon(1e-9));
  double s = std::sqrt(1.25);
  CHECK(r2.grad.x == doctest::Approx(1.0 / s).epsilon(1e-8));
  CHECK(r2.grad.y == doctest::Approx(0.5 / s).epsilon(1e-8));
}

TEST_CASE("distance gradient is g-unit at random interior points") {
  auto m = bump_metric(1.3);
  Vec2 y{1.3 * std::cos(2.4), 1.3 * std::sin(2.4)};
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  int tested = 0;
  while (tested < 100) {
    Vec2 x{U(rng), U(rng)};
    if (x.norm() > 0.95) continue;
    auto r = distance_and_gradient(m, y, x);
    CHECK(std::abs(m.norm(x, r.grad) - 1.0) <= 1e-7);
    ++tested;
  }
}

TEST_CASE("distance self-convergence via shooting consistency") {
  auto m = bump_metric(1.3);
  Vec2 y{-1.3, 0.0};
  Vec2 x{0.2, 0.4};
  auto r = distance_and_gradient(m, y, x);
  // re-shoot with a 16x finer step: endpoint must still hit x
  Vec2 th{std::cos(r.initial_angle), std::sin(r.initial_angle)};
  PhasePoint end = flow_fixed_time(m, {y, th}, r.psi, 5e-3 / 16.0);
  CHECK((end.x - x).norm() <= 1e-6);
}

TEST_CASE("simplicity_check: euclidean disk is simple") {
  auto m = MetricField::euclidean();
  auto rep = simplicity_check(m, 64);
  CHECK(rep.convex);
  CHECK(rep.no_conjugate);
  CHECK(rep.min_jacobi > 0.0);
}

TEST_CASE("simplicity_check: single euclidean ray gives J = tau") {
  auto m = MetricField::euclidean();
  auto rep = simplicity_check(m, 1);
  BoundaryDirection bd = fan_node(m, FanSpec{1, 1}.phi(0), 0.0);
  Geodesic g = integrate_geodesic(m, {bd.y, bd.theta});
  CHECK(rep.min_jacobi == doctest::Approx(g.tau_plus).epsilon(1e-6));
}

TEST_CASE("simplicity_check: strong lens bump is reported") {
  auto m = MetricField::gaussian_bump(2.0, 1.0, 3.0);
  auto rep = simplicity_check(m, 32);
  CHECK(rep.min_jacobi < std::numeric_limits<double>::infinity());
  // A lens this strong focuses: the check must flag conjugate points.
  CHECK_FALSE(rep.no_conjugate);
}

TEST_CASE("santalo: F == 1 on the euclidean disk gives 2 pi^2") {
  auto m = MetricField::euclidean();
  double v = santalo_integrate(
      m, [](Vec2, Vec2) { return 1.0; }, FanSpec{128, 64});
  double target = 2.0 * M_PI * M_PI;
  CHECK(std::abs(v - target) / target <= 0.005);
}

TEST_CASE("santalo: zero integrand") {
  auto m = MetricField::euclidean();
  double v = santalo_integrate(
      m, [](Vec2, Vec2) { return 0.0; }, FanSpec{16, 8});
  CHECK(v == doctest::Approx(0.0));
}

namespace {

// Direct phase-space quadrature of int_SM F: polar x-grid times fiber grid.
double direct_sm_quadrature(const MetricField& m,
                            const std::function<double(Vec2, Vec2)>& F,
                            int nr = 200, int nphi = 256, int nth = 64) {
  double R = m.chart_radius();
  double total = 0.0;
  for (int i = 0; i < nr; ++i) {
    double r = R * (i + 0.5) / nr;
    double dr = R / nr;
    for (int k = 0; k < nphi; ++k) {
      double ph = 2.0 * M_PI * k / nphi;
      Vec2 x{r * std::cos(ph), r * std::sin(ph)};
      double w = r * dr * (2.0 * M_PI / nphi) * m.sqrt_det(x);
      auto frame = m.orthonormal_frame(x);
      double fiber = 0.0;
      for (int t = 0; t < nth; ++t) {
        double a = 2.0 * M_PI * t / nth;
        Vec2 th = std::cos(a) * frame[0] + std::sin(a) * frame[1];
        fiber += F(x, th);
      }
      total += w * fiber * (2.0 * M_PI / nth);
    }
  }
  return total;
}

}  // namespace

TEST_CASE("santalo: |x|^2 matches direct phase-space quadrature") {
  auto m = MetricField::euclidean();
  auto F = [](Vec2 x, Vec2) { return x.dot(x); };
  double lhs = direct_sm_quadrature(m, F);
  double rhs = santalo_integrate(m, F, FanSpec{128, 64});
  CHECK(std::abs(lhs - rhs) / std::abs(lhs) <= 0.005);
}

TEST_CASE("santalo consistency for random smooth F on a curved metric") {
  auto m = bump_metric();
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  for (int trial = 0; trial < 5; ++trial) {
    double a = U(rng), b = U(rng), c = U(rng), d = U(rng);
    auto F = [=](Vec2 x, Vec2 th) {
      return 1.5 + a * x.x + b * x.y * x.y + c * std::sin(x.x + x.y) +
             d * th.x * th.x;
    };
    double lhs = direct_sm_quadrature(m, F);
    double rhs = santalo_integrate(m, F, FanSpec{128, 64});
    CHECK(std::abs(lhs - rhs) / std::abs(lhs) <= 0.01);
  }
}

TEST_CASE("fan node round trip") {
  auto m = bump_metric();
  FanSpec fan{16, 8};
  for (int i : {0, 5, 11})
    for (int j : {0, 3, 7}) {
      double phi0 = fan.phi(i), al0 = fan.alpha(j);
      BoundaryDirection bd = fan_node(m, phi0, al0);
      CHECK(m.inner(bd.y, bd.theta, boundary_frame(m, phi0).nu) < 0.0);
      CHECK(std::abs(m.norm(bd.y, bd.theta) - 1.0) <= 1e-12);
      double phi1, al1;
      fan_coordinates(m, bd.y, bd.theta, phi1, al1);
      CHECK(phi1 == doctest::Approx(phi0).epsilon(1e-12));
      CHECK(al1 == doctest::Approx(al0).epsilon(1e-12));
      double mu = std::abs(m.inner(bd.y, bd.theta, boundary_frame(m, phi0).nu));
      CHECK(mu == doctest::Approx(bd.mu).epsilon(1e-12));
    }
}
