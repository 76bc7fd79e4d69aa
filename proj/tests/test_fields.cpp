#include <doctest.h>

#include <cmath>
#include <random>

#include "magtomo/fields.hpp"

using namespace magtomo;

namespace {

const ChartGrid kGrid{128, 1.3};

MetricField bump_metric(double radius = 1.0) {
  return MetricField::gaussian_bump(0.05, 4.0, radius);
}

// phi0 = (1 - |x|^2)^2 extended by zero outside the unit disk
ScalarField phi_paraboloid(const ChartGrid& g) {
  ScalarField f(g, 1.0);
  for (int j = 0; j < g.n; ++j)
    for (int i = 0; i < g.n; ++i) {
      Vec2 x = g.point(i, j);
      double r2 = x.dot(x);
      if (r2 < 1.0) f.at(i, j) = (1.0 - r2) * (1.0 - r2);
    }
  return f;
}

OneForm random_oneform(const ChartGrid& g, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> U(-0.5, 0.5);
  OneForm A(g, 1.0);
  for (int b = 0; b < 3; ++b) {
    Vec2 c{U(rng), U(rng)};
    double w = 0.2 + 0.2 * std::abs(U(rng));
    ScalarField s1 = gaussian_bump_scalar(g, c, w, U(rng), 0.9);
    Vec2 c2{U(rng), U(rng)};
    ScalarField s2 = gaussian_bump_scalar(g, c2, w, U(rng), 0.9);
    for (std::size_t k = 0; k < A.a1.v.size(); ++k) {
      A.a1.v[k] += s1.v[k];
      A.a2.v[k] += s2.v[k];
    }
  }
  return A;
}

double rel_l2(const MetricField& m, const OneForm& A, const OneForm& B,
              double R) {
  OneForm d = A;
  for (std::size_t k = 0; k < d.a1.v.size(); ++k) {
    d.a1.v[k] -= B.a1.v[k];
    d.a2.v[k] -= B.a2.v[k];
  }
  return norm_l2(m, d, R) / norm_l2(m, B, R);
}

}  // namespace

TEST_CASE("sigma_symbol on euclidean constant forms") {
  auto m = MetricField::euclidean();
  OneForm A(kGrid);
  for (double& v : A.a1.v) v = 1.0;  // A = dx^1
  CHECK(sigma_symbol(m, A, {{0.2, 0.1}, {0.0, 1.0}}) ==
        doctest::Approx(0.0).epsilon(1e-10));
  CHECK(sigma_symbol(m, A, {{0.2, 0.1}, {1.0, 0.0}}) ==
        doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("sigma_symbol two-route agreement on a conformal metric") {
  auto m = bump_metric();
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  OneForm A = random_oneform(kGrid, rng);
  OneFormSampler samp(A);
  for (int t = 0; t < 20; ++t) {
    Vec2 x{0.7 * U(rng), 0.7 * U(rng)};
    Vec2 th = m.normalized(x, {U(rng), U(rng) + 1.3});
    double route1 = sigma_symbol(m, samp, {x, th});
    // independent route: raise the index, then take the g-inner product
    Vec2 a = samp(x);
    Metric2x2 gi = m.g_inv(x);
    Vec2 sharp{gi.g11 * a.x + gi.g12 * a.y, gi.g12 * a.x + gi.g22 * a.y};
    double route2 = m.inner(x, sharp, th);
    CHECK(route1 == doctest::Approx(route2).epsilon(1e-12));
  }
}

TEST_CASE("codifferential of a gradient equals minus the laplacian") {
  auto m = MetricField::euclidean();
  // Quartic phi: the 5-point stencils differentiate it exactly inside.
  ScalarField phi = phi_paraboloid(kGrid);
  ScalarField delta = codifferential(m, grid_gradient(phi));
  double emax = 0.0;
  for (int j = 0; j < kGrid.n; ++j)
    for (int i = 0; i < kGrid.n; ++i) {
      Vec2 x = kGrid.point(i, j);
      if (x.norm() > 0.85) continue;
      double lap = -8.0 + 16.0 * x.dot(x);
      emax = std::max(emax, std::abs(delta.at(i, j) + lap));
    }
  CHECK(emax <= 5e-5);

  // Non-polynomial phi: error drops ~16x under grid halving.
  double errs[2];
  int sizes[2] = {96, 192};
  const double w2 = 0.16;
  for (int t = 0; t < 2; ++t) {
    ChartGrid g{sizes[t], 1.3};
    ScalarField gphi(g, 1.0);
    for (int j = 0; j < g.n; ++j)
      for (int i = 0; i < g.n; ++i) {
        Vec2 x = g.point(i, j);
        if (x.norm() < 1.0) gphi.at(i, j) = std::exp(-x.dot(x) / w2);
      }
    ScalarField d = codifferential(m, grid_gradient(gphi));
    double emax2 = 0.0;
    for (int j = 0; j < g.n; ++j)
      for (int i = 0; i < g.n; ++i) {
        Vec2 x = g.point(i, j);
        if (x.norm() > 0.7) continue;
        double r2 = x.dot(x);
        double lap = std::exp(-r2 / w2) * (4.0 * r2 / (w2 * w2) - 4.0 / w2);
        emax2 = std::max(emax2, std::abs(d.at(i, j) + lap));
      }
    errs[t] = emax2;
  }
  CHECK(errs[0] / errs[1] >= 8.0);
}

TEST_CASE("codifferential of the rotational field vanishes") {
  auto m = MetricField::euclidean();
  OneForm A(kGrid);
  for (int j = 0; j < kGrid.n; ++j)
    for (int i = 0; i < kGrid.n; ++i) {
      Vec2 x = kGrid.point(i, j);
      A.a1.at(i, j) = -x.y;
      A.a2.at(i, j) = x.x;
    }
  ScalarField d = codifferential(m, A);
  double emax = 0.0;
  for (int j = 0; j < kGrid.n; ++j)
    for (int i = 0; i < kGrid.n; ++i)
      if (kGrid.point(i, j).norm() <= 1.0)
        emax = std::max(emax, std::abs(d.at(i, j)));
  CHECK(emax <= 1e-8);
}

TEST_CASE("discrete adjointness of delta and d") {
  auto m = bump_metric();
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> U(-0.5, 0.5);
  OneForm A = random_oneform(kGrid, rng);
  for (int t = 0; t < 10; ++t) {
    ScalarField v = gaussian_bump_scalar(kGrid, {U(rng), U(rng)},
                                         0.25 + 0.1 * std::abs(U(rng)),
                                         1.0, 0.9);
    double lhs = inner_l2(m, codifferential(m, A), v, 1.3);
    double rhs = inner_l2(m, A, grid_gradient(v), 1.3);
    CHECK(std::abs(lhs - rhs) <= 1e-4 * std::max(std::abs(lhs), 1e-12));
  }
}

TEST_CASE("hodge: pure potential input") {
  auto m = bump_metric();
  ScalarField phi0 = phi_paraboloid(kGrid);
  OneForm A = grid_gradient(phi0);
  HodgeSplit split = hodge_decompose(m, A);
  CHECK(norm_l2(m, split.solenoidal, 1.0) <= 1e-6 * norm_l2(m, A, 1.0));
  double emax = 0.0;
  for (std::size_t k = 0; k < phi0.v.size(); ++k)
    emax = std::max(emax, std::abs(split.potential.v[k] - phi0.v[k]));
  CHECK(emax <= 1e-5 * phi0.max_abs());
}

TEST_CASE("hodge: solenoidal input is untouched") {
  auto m = bump_metric();
  OneForm A = solenoidal_bump(kGrid, {0.15, -0.1}, 0.3, 1.0, 0.9);
  HodgeSplit split = hodge_decompose(m, A);
  CHECK(rel_l2(m, split.solenoidal, A, 1.0) <= 1e-6);
}

TEST_CASE("hodge: idempotence, solenoidal residual, reconstruction") {
  auto m = bump_metric();
  std::mt19937_64 rng(9);
  OneForm A = random_oneform(kGrid, rng);
  HodgeSolver solver(m, kGrid, 1.0);
  HodgeSplit s1 = solver.decompose(A);

  // delta(A^s) small relative to A^s
  ScalarField res = codifferential(m, s1.solenoidal);
  CHECK(norm_l2(m, res, 1.0) <= 1e-6 * norm_l2(m, s1.solenoidal, 1.0));

  // A = A^s + d phi
  OneForm rec = grid_gradient(s1.potential);
  for (std::size_t k = 0; k < rec.a1.v.size(); ++k) {
    rec.a1.v[k] += s1.solenoidal.a1.v[k];
    rec.a2.v[k] += s1.solenoidal.a2.v[k];
  }
  CHECK(rel_l2(m, rec, A, 1.0) <= 1e-6);

  // phi vanishes on the boundary circle
  CHECK(s1.potential.max_abs_outside_mask() == 0.0);

  // applying the decomposition again does not move A^s
  HodgeSplit s2 = solver.decompose(s1.solenoidal);
  CHECK(norm_l2(m, s2.potential, 1.0) <=
        1e-6 * norm_l2(m, s1.solenoidal, 1.0));
  CHECK(rel_l2(m, s2.solenoidal, s1.solenoidal, 1.0) <= 1e-8);
}

TEST_CASE("hodge: linearity") {
  auto m = bump_metric();
  std::mt19937_64 rng(13);
  OneForm A = random_oneform(kGrid, rng);
  OneForm B = random_oneform(kGrid, rng);
  HodgeSolver solver(m, kGrid, 1.0);
  double al = 0.7, be = -1.4;
  OneForm comb(kGrid);
  for (std::size_t k = 0; k < comb.a1.v.size(); ++k) {
    comb.a1.v[k] = al * A.a1.v[k] + be * B.a1.v[k];
    comb.a2.v[k] = al * A.a2.v[k] + be * B.a2.v[k];
  }
  OneForm lhs = solver.decompose(comb).solenoidal;
  OneForm pa = solver.decompose(A).solenoidal;
  OneForm pb = solver.decompose(B).solenoidal;
  OneForm rhs(kGrid);
  for (std::size_t k = 0; k < rhs.a1.v.size(); ++k) {
    rhs.a1.v[k] = al * pa.a1.v[k] + be * pb.a1.v[k];
    rhs.a2.v[k] = al * pa.a2.v[k] + be * pb.a2.v[k];
  }
  CHECK(rel_l2(m, lhs, rhs, 1.0) <= 1e-8);
}

TEST_CASE("d compose d vanishes and curl passes through the decomposition") {
  auto m = bump_metric();
  ScalarField phi = gaussian_bump_scalar(kGrid, {0.2, 0.1}, 0.35, 1.0, 0.9);
  ScalarField dd = curl_coefficient(grid_gradient(phi));
  CHECK(dd.max_abs() <= 1e-12 * phi.max_abs() / kGrid.h());

  std::mt19937_64 rng(17);
  OneForm A = random_oneform(kGrid, rng);
  HodgeSplit split = hodge_decompose(m, A);
  ScalarField cA = curl_coefficient(A);
  ScalarField cAs = curl_coefficient(split.solenoidal);
  double diff = 0.0;
  for (std::size_t k = 0; k < cA.v.size(); ++k)
    diff = std::max(diff, std::abs(cA.v[k] - cAs.v[k]));
  CHECK(diff <= 1e-6 * cA.max_abs());
}

TEST_CASE("gauge transform identities") {
  auto m = bump_metric();
  std::mt19937_64 rng(21);
  OneForm A = random_oneform(kGrid, rng);
  ScalarField V = gaussian_bump_scalar(kGrid, {0.0, 0.2}, 0.3, 0.1, 0.9);
  ScalarField zero(kGrid);

  auto [A1, V1] = gauge_transform(A, V, zero);
  for (std::size_t k = 0; k < A.a1.v.size(); ++k) {
    CHECK(A1.a1.v[k] == A.a1.v[k]);
    CHECK(A1.a2.v[k] == A.a2.v[k]);
  }

  ScalarField phi = phi_paraboloid(kGrid);
  OneForm zeroForm(kGrid);
  auto [A2, V2] = gauge_transform(zeroForm, V, phi);
  OneForm dphi = grid_gradient(phi);
  for (std::size_t k = 0; k < A2.a1.v.size(); ++k) {
    CHECK(A2.a1.v[k] == dphi.a1.v[k]);
    CHECK(A2.a2.v[k] == dphi.a2.v[k]);
  }

  ScalarField neg = phi;
  for (double& x : neg.v) x = -x;
  auto [A3, V3] = gauge_transform(A, V, phi);
  auto [A4, V4] = gauge_transform(A3, V3, neg);
  double emax = 0.0;
  for (std::size_t k = 0; k < A.a1.v.size(); ++k) {
    emax = std::max(emax, std::abs(A4.a1.v[k] - A.a1.v[k]));
    emax = std::max(emax, std::abs(A4.a2.v[k] - A.a2.v[k]));
  }
  CHECK(emax <= 1e-12);

  ScalarField bad(kGrid);
  for (double& x : bad.v) x = 1.0;
  CHECK_THROWS_AS(gauge_transform(A, V, bad), NumericError);
}
