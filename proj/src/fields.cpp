#include "magtomo/fields.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <cmath>

namespace magtomo {

void ScalarField::zero_outside_mask() {
  for (int j = 0; j < grid.n; ++j)
    for (int i = 0; i < grid.n; ++i)
      if (grid.point(i, j).norm() > mask_radius) at(i, j) = 0.0;
}

double ScalarField::max_abs_outside_mask() const {
  double w = 0.0;
  for (int j = 0; j < grid.n; ++j)
    for (int i = 0; i < grid.n; ++i)
      if (grid.point(i, j).norm() > mask_radius)
        w = std::max(w, std::abs(at(i, j)));
  return w;
}

double ScalarField::max_abs() const {
  double w = 0.0;
  for (double x : v) w = std::max(w, std::abs(x));
  return w;
}

FieldSampler::FieldSampler(const ScalarField& f)
    : spline_(f.v, f.grid.n, -f.grid.extent, f.grid.h()) {}

double sigma_symbol(const MetricField& m, const OneFormSampler& A,
                    const PhasePoint& p) {
  double bound =
      m.analytic() ? m.chart_radius() * 1.05 : m.chart_radius() + 1e-12;
  if (p.x.norm() > bound)
    throw GeometryError("sigma_symbol: point outside chart");
  Vec2 a = A(p.x);
  return a.x * p.theta.x + a.y * p.theta.y;
}

double sigma_symbol(const MetricField& m, const OneForm& A,
                    const PhasePoint& p) {
  return sigma_symbol(m, OneFormSampler(A), p);
}

namespace {

// 4th-order central difference along axis `ax`, zero beyond the square.
inline double diff4(const ScalarField& f, int i, int j, int ax) {
  const int n = f.grid.n;
  auto val = [&](int ii, int jj) -> double {
    if (ii < 0 || jj < 0 || ii >= n || jj >= n) return 0.0;
    return f.at(ii, jj);
  };
  double p1, m1, p2, m2;
  if (ax == 0) {
    p1 = val(i + 1, j);
    m1 = val(i - 1, j);
    p2 = val(i + 2, j);
    m2 = val(i - 2, j);
  } else {
    p1 = val(i, j + 1);
    m1 = val(i, j - 1);
    p2 = val(i, j + 2);
    m2 = val(i, j - 2);
  }
  return (8.0 * (p1 - m1) - (p2 - m2)) / (12.0 * f.grid.h());
}

}  // namespace

OneForm grid_gradient(const ScalarField& phi) {
  OneForm d(phi.grid, phi.mask_radius);
  for (int j = 0; j < phi.grid.n; ++j)
    for (int i = 0; i < phi.grid.n; ++i) {
      d.a1.at(i, j) = diff4(phi, i, j, 0);
      d.a2.at(i, j) = diff4(phi, i, j, 1);
    }
  return d;
}

ScalarField grid_divergence(const MetricField& m, const OneForm& A) {
  const ChartGrid& g = A.grid();
  // X^j = sqrt|g| g^{jk} a_k, then div = (1/sqrt|g|) d_j X^j.
  ScalarField X1(g), X2(g);
  for (int j = 0; j < g.n; ++j)
    for (int i = 0; i < g.n; ++i) {
      Vec2 x = g.point(i, j);
      Metric2x2 gi = m.g_inv(x);
      double sd = m.sqrt_det(x);
      double a1 = A.a1.at(i, j), a2 = A.a2.at(i, j);
      X1.at(i, j) = sd * (gi.g11 * a1 + gi.g12 * a2);
      X2.at(i, j) = sd * (gi.g12 * a1 + gi.g22 * a2);
    }
  ScalarField out(g, A.a1.mask_radius);
  for (int j = 0; j < g.n; ++j)
    for (int i = 0; i < g.n; ++i) {
      double sd = m.sqrt_det(g.point(i, j));
      out.at(i, j) = (diff4(X1, i, j, 0) + diff4(X2, i, j, 1)) / sd;
    }
  return out;
}

ScalarField codifferential(const MetricField& m, const OneForm& A) {
  ScalarField d = grid_divergence(m, A);
  for (double& x : d.v) x = -x;
  return d;
}

ScalarField curl_coefficient(const OneForm& A) {
  const ChartGrid& g = A.grid();
  ScalarField out(g, A.a1.mask_radius);
  for (int j = 0; j < g.n; ++j)
    for (int i = 0; i < g.n; ++i)
      out.at(i, j) = diff4(A.a2, i, j, 0) - diff4(A.a1, i, j, 1);
  return out;
}

double inner_l2(const MetricField& m, const ScalarField& f,
                const ScalarField& g, double radius) {
  const ChartGrid& gr = f.grid;
  double h2 = gr.h() * gr.h();
  double s = 0.0;
  for (int j = 0; j < gr.n; ++j)
    for (int i = 0; i < gr.n; ++i) {
      Vec2 x = gr.point(i, j);
      if (x.norm() > radius) continue;
      s += f.at(i, j) * g.at(i, j) * m.sqrt_det(x) * h2;
    }
  return s;
}

double inner_l2(const MetricField& m, const OneForm& A, const OneForm& B,
                double radius) {
  const ChartGrid& gr = A.grid();
  double h2 = gr.h() * gr.h();
  double s = 0.0;
  for (int j = 0; j < gr.n; ++j)
    for (int i = 0; i < gr.n; ++i) {
      Vec2 x = gr.point(i, j);
      if (x.norm() > radius) continue;
      Metric2x2 gi = m.g_inv(x);
      double a1 = A.a1.at(i, j), a2 = A.a2.at(i, j);
      double b1 = B.a1.at(i, j), b2 = B.a2.at(i, j);
      double ip = gi.g11 * a1 * b1 + gi.g12 * (a1 * b2 + a2 * b1) +
                  gi.g22 * a2 * b2;
      s += ip * m.sqrt_det(x) * h2;
    }
  return s;
}

double norm_l2(const MetricField& m, const ScalarField& f, double radius) {
  return std::sqrt(std::max(0.0, inner_l2(m, f, f, radius)));
}

double norm_l2(const MetricField& m, const OneForm& A, double radius) {
  return std::sqrt(std::max(0.0, inner_l2(m, A, A, radius)));
}

namespace {

// One-sided/central first difference staying inside the disk of `radius`.
double diff_inside(const ScalarField& f, int i, int j, int ax, double radius) {
  const ChartGrid& g = f.grid;
  int di = ax == 0 ? 1 : 0, dj = ax == 0 ? 0 : 1;
  auto ok = [&](int ii, int jj) {
    return ii >= 0 && jj >= 0 && ii < g.n && jj < g.n &&
           g.point(ii, jj).norm() <= radius;
  };
  bool fwd = ok(i + di, j + dj), bwd = ok(i - di, j - dj);
  if (fwd && bwd)
    return (f.at(i + di, j + dj) - f.at(i - di, j - dj)) / (2.0 * g.h());
  if (fwd) return (f.at(i + di, j + dj) - f.at(i, j)) / g.h();
  if (bwd) return (f.at(i, j) - f.at(i - di, j - dj)) / g.h();
  return 0.0;
}

}  // namespace

double norm_h1(const MetricField& m, const ScalarField& f, double radius) {
  const ChartGrid& g = f.grid;
  double h2 = g.h() * g.h();
  double s = 0.0;
  for (int j = 0; j < g.n; ++j)
    for (int i = 0; i < g.n; ++i) {
      Vec2 x = g.point(i, j);
      if (x.norm() > radius) continue;
      Vec2 df{diff_inside(f, i, j, 0, radius), diff_inside(f, i, j, 1, radius)};
      Metric2x2 gi = m.g_inv(x);
      double grad2 = gi.g11 * df.x * df.x + 2.0 * gi.g12 * df.x * df.y +
                     gi.g22 * df.y * df.y;
      s += (f.at(i, j) * f.at(i, j) + grad2) * m.sqrt_det(x) * h2;
    }
  return std::sqrt(s);
}

double norm_h1(const MetricField& m, const OneForm& A, double radius) {
  double n1 = norm_h1(m, A.a1, radius);
  double n2 = norm_h1(m, A.a2, radius);
  return std::sqrt(n1 * n1 + n2 * n2);
}

// ---------------------------------------------------------------------------
// Hodge solver

struct HodgeSolver::Impl {
  Impl(const MetricField& m, const ChartGrid& g, double mask)
      : metric(m), grid(g), mask_radius(mask) {}

  MetricField metric;
  ChartGrid grid;
  double mask_radius;
  std::vector<int> node_id;   // grid index -> interior unknown id or -1
  std::vector<std::size_t> nodes;  // unknown id -> grid index
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
};

HodgeSolver::~HodgeSolver() = default;
HodgeSolver::HodgeSolver(HodgeSolver&&) noexcept = default;

HodgeSolver::HodgeSolver(const MetricField& m, const ChartGrid& grid,
                         double mask_radius)
    : impl_(std::make_unique<Impl>(m, grid, mask_radius)) {
  const int n = grid.n;
  impl_->node_id.assign(grid.size(), -1);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      if (grid.point(i, j).norm() < mask_radius) {
        impl_->node_id[grid.index(i, j)] =
            static_cast<int>(impl_->nodes.size());
        impl_->nodes.push_back(grid.index(i, j));
      }

  // Row of L = div(grad .) at node p: the two stencils composed symbolically.
  const double h = grid.h();
  const double c1 = 8.0 / 12.0, c2 = -1.0 / 12.0;
  struct Off {
    int d;
    double w;
  };
  const Off offs[4] = {{1, c1}, {-1, -c1}, {2, c2}, {-2, -c2}};

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(impl_->nodes.size() * 80);
  for (std::size_t row = 0; row < impl_->nodes.size(); ++row) {
    std::size_t gi = impl_->nodes[row];
    int i = static_cast<int>(gi % n), j = static_cast<int>(gi / n);
    double sd_p = impl_->metric.sqrt_det(grid.point(i, j));
    for (int ax = 0; ax < 2; ++ax) {
      for (const Off& o : offs) {
        int qi = i + (ax == 0 ? o.d : 0);
        int qj = j + (ax == 1 ? o.d : 0);
        if (qi < 0 || qj < 0 || qi >= n || qj >= n) continue;
        Vec2 xq = grid.point(qi, qj);
        Metric2x2 ginv = impl_->metric.g_inv(xq);
        double sd_q = impl_->metric.sqrt_det(xq);
        double outer = o.w / (h * sd_p) * sd_q;
        // X^{ax}(q) = sd g^{ax,k} (grad phi)_k(q)
        for (int k = 0; k < 2; ++k) {
          double gik = (ax == 0) ? (k == 0 ? ginv.g11 : ginv.g12)
                                 : (k == 0 ? ginv.g12 : ginv.g22);
          if (gik == 0.0) continue;
          for (const Off& o2 : offs) {
            int ri = qi + (k == 0 ? o2.d : 0);
            int rj = qj + (k == 1 ? o2.d : 0);
            if (ri < 0 || rj < 0 || ri >= n || rj >= n) continue;
            int col = impl_->node_id[grid.index(ri, rj)];
            if (col < 0) continue;  // phi = 0 outside the disk
            trips.emplace_back(static_cast<int>(row), col,
                               outer * gik * o2.w / h);
          }
        }
      }
    }
  }
  Eigen::SparseMatrix<double> L(static_cast<int>(impl_->nodes.size()),
                                static_cast<int>(impl_->nodes.size()));
  L.setFromTriplets(trips.begin(), trips.end());
  impl_->lu.compute(L);
  if (impl_->lu.info() != Eigen::Success)
    throw NumericError("HodgeSolver: factorization of the Laplacian failed");
}

double HodgeSolver::mask_radius() const { return impl_->mask_radius; }

HodgeSplit HodgeSolver::decompose(const OneForm& A) const {
  const auto& im = *impl_;
  ScalarField div = grid_divergence(im.metric, A);
  Eigen::VectorXd rhs(im.nodes.size());
  for (std::size_t r = 0; r < im.nodes.size(); ++r) rhs[r] = div.v[im.nodes[r]];
  Eigen::VectorXd phi_v = im.lu.solve(rhs);
  if (im.lu.info() != Eigen::Success)
    throw NumericError("HodgeSolver: linear solve failed");

  HodgeSplit out;
  out.potential = ScalarField(im.grid, im.mask_radius);
  for (std::size_t r = 0; r < im.nodes.size(); ++r)
    out.potential.v[im.nodes[r]] = phi_v[r];
  OneForm dphi = grid_gradient(out.potential);
  out.solenoidal = OneForm(im.grid, A.a1.mask_radius);
  for (std::size_t k = 0; k < A.a1.v.size(); ++k) {
    out.solenoidal.a1.v[k] = A.a1.v[k] - dphi.a1.v[k];
    out.solenoidal.a2.v[k] = A.a2.v[k] - dphi.a2.v[k];
  }
  return out;
}

OneForm HodgeSolver::project_solenoidal(const OneForm& A) const {
  return decompose(A).solenoidal;
}

HodgeSplit hodge_decompose(const MetricField& m, const OneForm& A) {
  HodgeSolver solver(m, A.grid(), A.a1.mask_radius);
  return solver.decompose(A);
}

std::pair<OneForm, ScalarField> gauge_transform(const OneForm& A,
                                                const ScalarField& V,
                                                const ScalarField& phi) {
  if (phi.max_abs_outside_mask() > 1e-10)
    throw NumericError(
        "gauge_transform: phi does not vanish on the boundary circle");
  OneForm dphi = grid_gradient(phi);
  OneForm out = A;
  for (std::size_t k = 0; k < out.a1.v.size(); ++k) {
    out.a1.v[k] += dphi.a1.v[k];
    out.a2.v[k] += dphi.a2.v[k];
  }
  return {out, V};
}

namespace {

inline double cutoff_c2(double s) {
  if (s >= 1.0) return 0.0;
  double t = 1.0 - s * s;
  return t * t * t;
}

}  // namespace

ScalarField gaussian_bump_scalar(const ChartGrid& g, Vec2 center, double width,
                                 double amp, double support_radius,
                                 double mask_radius) {
  ScalarField f(g, mask_radius);
  for (int j = 0; j < g.n; ++j)
    for (int i = 0; i < g.n; ++i) {
      Vec2 x = g.point(i, j);
      double r = x.norm();
      if (r >= support_radius) continue;
      Vec2 d = x - center;
      f.at(i, j) = amp * std::exp(-d.dot(d) / (width * width)) *
                   cutoff_c2(r / support_radius);
    }
  return f;
}

OneForm solenoidal_bump(const ChartGrid& g, Vec2 center, double width,
                        double amp, double support_radius,
                        double mask_radius) {
  ScalarField stream =
      gaussian_bump_scalar(g, center, width, amp, support_radius, mask_radius);
  OneForm ds = grid_gradient(stream);
  OneForm A(g, mask_radius);
  for (std::size_t k = 0; k < A.a1.v.size(); ++k) {
    A.a1.v[k] = -ds.a2.v[k];
    A.a2.v[k] = ds.a1.v[k];
  }
  return A;
}

}  // namespace magtomo
