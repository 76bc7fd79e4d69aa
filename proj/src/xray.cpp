#include "magtomo/xray.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

namespace magtomo {

BoundaryRayGrid::BoundaryRayGrid(const MetricField& m, const FanSpec& f)
    : fan(f), radius(m.chart_radius()) {
  std::size_t n = static_cast<std::size_t>(f.n_s) * f.n_alpha;
  values.assign(n, Complex{0.0, 0.0});
  mu.resize(n);
  quad_w.resize(n);
  for (int i = 0; i < f.n_s; ++i) {
    double ws = boundary_frame(m, f.phi(i)).arc_weight * f.dphi();
    for (int j = 0; j < f.n_alpha; ++j) {
      mu[index(i, j)] = std::cos(f.alpha(j));
      quad_w[index(i, j)] = ws * f.dalpha();
    }
  }
}

double BoundaryRayGrid::interp_real(double phi, double alpha) const {
  double u = phi / fan.dphi() - 0.5;
  double w = (alpha + 0.5 * M_PI) / fan.dalpha() - 0.5;
  double iu = std::floor(u);
  double tu = u - iu;
  int i0 = static_cast<int>(iu);
  i0 = ((i0 % fan.n_s) + fan.n_s) % fan.n_s;
  int i1 = (i0 + 1) % fan.n_s;
  int j0;
  double tw;
  if (w <= 0.0) {
    j0 = 0;
    tw = 0.0;
  } else if (w >= fan.n_alpha - 1) {
    j0 = fan.n_alpha - 2;
    tw = 1.0;
  } else {
    j0 = static_cast<int>(std::floor(w));
    tw = w - j0;
  }
  int j1 = std::min(j0 + 1, fan.n_alpha - 1);
  double v00 = values[index(i0, j0)].real();
  double v10 = values[index(i1, j0)].real();
  double v01 = values[index(i0, j1)].real();
  double v11 = values[index(i1, j1)].real();
  return (1 - tu) * ((1 - tw) * v00 + tw * v01) +
         tu * ((1 - tw) * v10 + tw * v11);
}

double BoundaryRayGrid::sup_norm() const {
  double s = 0.0;
  for (const Complex& v : values) s = std::max(s, std::abs(v));
  return s;
}

Complex inner_mu(const BoundaryRayGrid& a, const BoundaryRayGrid& b) {
  Complex s{0.0, 0.0};
  for (std::size_t k = 0; k < a.values.size(); ++k)
    s += a.values[k] * std::conj(b.values[k]) * a.mu[k] * a.quad_w[k];
  return s;
}

double norm_mu(const BoundaryRayGrid& a) {
  return std::sqrt(std::abs(inner_mu(a, a)));
}

// ---------------------------------------------------------------------------
// Cached geometry atlases

namespace {

struct Ray {
  double tau = 0.0;
  int n = 0;  // even number of Simpson intervals
  std::vector<Vec2> x;
  std::vector<Vec2> th;
};

struct RayAtlas {
  FanSpec fan;
  std::vector<Ray> rays;
};

struct FiberAtlas {
  ChartGrid grid;
  int n_fiber = 0;
  std::vector<std::uint32_t> nodes;  // grid indices with |x| < radius
  // per (node, fiber direction): entry fan coordinates and the direction
  std::vector<double> phi, alpha;
  std::vector<Vec2> theta;
};

std::uint64_t atlas_key(const MetricField& m, const FanSpec& fan,
                        double h_geo, double h_quad) {
  std::uint64_t h = m.hash();
  h = hash_mix(h, static_cast<double>(fan.n_s));
  h = hash_mix(h, static_cast<double>(fan.n_alpha));
  h = hash_mix(h, h_geo);
  h = hash_mix(h, h_quad);
  return h;
}

std::uint64_t fiber_key(const MetricField& m, const ChartGrid& g, int n_fiber,
                        double h_geo) {
  std::uint64_t h = m.hash();
  h = hash_mix(h, static_cast<double>(g.n));
  h = hash_mix(h, g.extent);
  h = hash_mix(h, static_cast<double>(n_fiber));
  h = hash_mix(h, h_geo);
  return h;
}

const RayAtlas& ray_atlas(const MetricField& m, const XrayOptions& opt) {
  static std::map<std::uint64_t, std::unique_ptr<RayAtlas>> cache;
  static std::mutex mtx;
  std::uint64_t key = atlas_key(m, opt.fan, opt.h_geo, opt.h_quad);
  {
    std::lock_guard<std::mutex> lk(mtx);
    auto it = cache.find(key);
    if (it != cache.end()) return *it->second;
  }
  auto atlas = std::make_unique<RayAtlas>();
  atlas->fan = opt.fan;
  atlas->rays.resize(static_cast<std::size_t>(opt.fan.n_s) * opt.fan.n_alpha);
  parallel_for(atlas->rays.size(), [&](std::size_t idx) {
    int i = static_cast<int>(idx) / opt.fan.n_alpha;
    int j = static_cast<int>(idx) % opt.fan.n_alpha;
    BoundaryDirection bd = fan_node(m, opt.fan.phi(i), opt.fan.alpha(j));
    Geodesic geo = integrate_geodesic(m, {bd.y, bd.theta}, {opt.h_geo});
    Ray& r = atlas->rays[idx];
    r.tau = geo.tau_plus;
    r.n = std::max(2, static_cast<int>(std::ceil(r.tau / opt.h_quad)));
    if (r.n % 2) ++r.n;
    auto path = sample_geodesic(m, {bd.y, bd.theta}, r.tau, r.n);
    r.x.resize(path.size());
    r.th.resize(path.size());
    for (std::size_t k = 0; k < path.size(); ++k) {
      r.x[k] = path[k].x;
      r.th[k] = path[k].theta;
    }
  });
  std::lock_guard<std::mutex> lk(mtx);
  auto [it, inserted] = cache.emplace(key, std::move(atlas));
  return *it->second;
}

const FiberAtlas& fiber_atlas(const MetricField& m, const ChartGrid& g,
                              const XrayOptions& opt) {
  static std::map<std::uint64_t, std::unique_ptr<FiberAtlas>> cache;
  static std::mutex mtx;
  std::uint64_t key = fiber_key(m, g, opt.n_fiber, opt.h_geo);
  {
    std::lock_guard<std::mutex> lk(mtx);
    auto it = cache.find(key);
    if (it != cache.end()) return *it->second;
  }
  auto atlas = std::make_unique<FiberAtlas>();
  atlas->grid = g;
  atlas->n_fiber = opt.n_fiber;
  const double R = m.chart_radius();
  for (int j = 0; j < g.n; ++j)
    for (int i = 0; i < g.n; ++i)
      if (g.point(i, j).norm() < R)
        atlas->nodes.push_back(static_cast<std::uint32_t>(g.index(i, j)));
  std::size_t total = atlas->nodes.size() * opt.n_fiber;
  atlas->phi.resize(total);
  atlas->alpha.resize(total);
  atlas->theta.resize(total);
  parallel_for(atlas->nodes.size(), [&](std::size_t ni) {
    std::uint32_t gi = atlas->nodes[ni];
    int ix = static_cast<int>(gi % g.n), jx = static_cast<int>(gi / g.n);
    Vec2 x = g.point(ix, jx);
    auto frame = m.orthonormal_frame(x);
    for (int f = 0; f < opt.n_fiber; ++f) {
      double a = 2.0 * M_PI * f / opt.n_fiber;
      Vec2 th = std::cos(a) * frame[0] + std::sin(a) * frame[1];
      // Trace backwards: exit of (x, -theta) is the entry point of the
      // orbit through (x, theta).
      Geodesic back = integrate_geodesic(m, {x, -1.0 * th}, {opt.h_geo});
      Vec2 y = back.exit().x;
      Vec2 th_in = -1.0 * back.exit().theta;
      double phi_b, alpha_b;
      fan_coordinates(m, y, th_in, phi_b, alpha_b);
      std::size_t slot = ni * opt.n_fiber + f;
      atlas->phi[slot] = phi_b;
      atlas->alpha[slot] = alpha_b;
      atlas->theta[slot] = th;
    }
  });
  std::lock_guard<std::mutex> lk(mtx);
  auto [it, inserted] = cache.emplace(key, std::move(atlas));
  return *it->second;
}

template <class Fn>
double simpson_ray(const Ray& r, Fn&& f) {
  double s = 0.0;
  for (int k = 0; k <= r.n; ++k) {
    double w = (k == 0 || k == r.n) ? 1.0 : (k % 2 ? 4.0 : 2.0);
    s += w * f(static_cast<std::size_t>(k));
  }
  return s * (r.tau / r.n) / 3.0;
}

}  // namespace

RayTransformRecord i0_forward(const MetricField& m, const ScalarField& f,
                              const XrayOptions& opt) {
  const RayAtlas& atlas = ray_atlas(m, opt);
  FieldSampler samp(f);
  RayTransformRecord rec;
  rec.kind = TransformKind::I0;
  rec.metric_hash = m.hash();
  rec.data = BoundaryRayGrid(m, opt.fan);
  parallel_for(atlas.rays.size(), [&](std::size_t idx) {
    const Ray& r = atlas.rays[idx];
    rec.data.values[idx] =
        simpson_ray(r, [&](std::size_t k) { return samp(r.x[k]); });
  });
  return rec;
}

RayTransformRecord i1_forward(const MetricField& m, const OneForm& A,
                              const XrayOptions& opt) {
  const RayAtlas& atlas = ray_atlas(m, opt);
  OneFormSampler samp(A);
  RayTransformRecord rec;
  rec.kind = TransformKind::I1;
  rec.metric_hash = m.hash();
  rec.data = BoundaryRayGrid(m, opt.fan);
  parallel_for(atlas.rays.size(), [&](std::size_t idx) {
    const Ray& r = atlas.rays[idx];
    rec.data.values[idx] = simpson_ray(r, [&](std::size_t k) {
      Vec2 a = samp(r.x[k]);
      return a.x * r.th[k].x + a.y * r.th[k].y;
    });
  });
  return rec;
}

ScalarField i0_adjoint(const MetricField& m, const BoundaryRayGrid& psi,
                       const ChartGrid& grid, const XrayOptions& opt) {
  const FiberAtlas& atlas = fiber_atlas(m, grid, opt);
  ScalarField out(grid, m.chart_radius());
  double dw = 2.0 * M_PI / atlas.n_fiber;
  parallel_for(atlas.nodes.size(), [&](std::size_t ni) {
    double s = 0.0;
    for (int f = 0; f < atlas.n_fiber; ++f) {
      std::size_t slot = ni * atlas.n_fiber + f;
      s += psi.interp_real(atlas.phi[slot], atlas.alpha[slot]);
    }
    out.v[atlas.nodes[ni]] = s * dw;
  });
  return out;
}

OneForm i1_adjoint(const MetricField& m, const BoundaryRayGrid& psi,
                   const ChartGrid& grid, const XrayOptions& opt) {
  const FiberAtlas& atlas = fiber_atlas(m, grid, opt);
  OneForm out(grid, m.chart_radius());
  double dw = 2.0 * M_PI / atlas.n_fiber;
  parallel_for(atlas.nodes.size(), [&](std::size_t ni) {
    std::uint32_t gi = atlas.nodes[ni];
    int ix = static_cast<int>(gi % grid.n), jx = static_cast<int>(gi / grid.n);
    Vec2 x = grid.point(ix, jx);
    Metric2x2 gx = m.g(x);
    Vec2 mom{0.0, 0.0};
    for (int f = 0; f < atlas.n_fiber; ++f) {
      std::size_t slot = ni * atlas.n_fiber + f;
      double val = psi.interp_real(atlas.phi[slot], atlas.alpha[slot]);
      mom += val * atlas.theta[slot];
    }
    mom = dw * mom;
    // lower the theta-moment: (I1* psi)_j = g_{jk} moment^k
    out.a1.v[gi] = gx.g11 * mom.x + gx.g12 * mom.y;
    out.a2.v[gi] = gx.g12 * mom.x + gx.g22 * mom.y;
  });
  return out;
}

ScalarField normal_apply(const MetricField& m, const ScalarField& f,
                         const XrayOptions& opt) {
  return i0_adjoint(m, i0_forward(m, f, opt).data, f.grid, opt);
}

OneForm normal_apply(const MetricField& m, const OneForm& A,
                     const XrayOptions& opt) {
  return i1_adjoint(m, i1_forward(m, A, opt).data, A.grid(), opt);
}

// ---------------------------------------------------------------------------
// Appendix-B kernel oracle

Vec2 normal_kernel_apply(const MetricField& m, const OneForm& A, Vec2 x,
                         int n_dir, double h_quad) {
  OneFormSampler samp(A);
  Metric2x2 gx = m.g(x);
  auto frame = m.orthonormal_frame(x);
  Vec2 moment{0.0, 0.0};  // contravariant theta-moment
  double dw = 2.0 * M_PI / n_dir;
  for (int d = 0; d < n_dir; ++d) {
    double a = 2.0 * M_PI * d / n_dir;
    Vec2 th = std::cos(a) * frame[0] + std::sin(a) * frame[1];
    Geodesic geo = integrate_geodesic(m, {x, th}, {h_quad});
    int n = std::max(2, static_cast<int>(std::ceil(geo.tau_plus / h_quad)));
    if (n % 2) ++n;
    TransportedFrame tf = transport_frames(m, {x, th}, geo.tau_plus, n);
    // integrand(t) = <J_back A#(gamma(t)), theta>_{g(x)}; J_back = T^{-1}.
    double ray = 0.0;
    for (int k = 0; k <= n; ++k) {
      Vec2 p = tf.path[k].x;
      Vec2 a_cov = samp(p);
      Metric2x2 gi = m.g_inv(p);
      Vec2 sharp{gi.g11 * a_cov.x + gi.g12 * a_cov.y,
                 gi.g12 * a_cov.x + gi.g22 * a_cov.y};
      const Vec2& c0 = tf.frames[k][0];
      const Vec2& c1 = tf.frames[k][1];
      double det = c0.x * c1.y - c1.x * c0.y;
      Vec2 back{(c1.y * sharp.x - c1.x * sharp.y) / det,
                (-c0.y * sharp.x + c0.x * sharp.y) / det};
      double w = (k == 0 || k == n) ? 1.0 : (k % 2 ? 4.0 : 2.0);
      ray += w * m.inner(x, back, th);
    }
    ray *= (geo.tau_plus / n) / 3.0;
    moment += (2.0 * ray * dw) * th;
  }
  // lower the index at x
  return {gx.g11 * moment.x + gx.g12 * moment.y,
          gx.g12 * moment.x + gx.g22 * moment.y};
}

// ---------------------------------------------------------------------------
// Conjugate gradients on the normal operator

namespace {

double dot_field(const MetricField& m, const ScalarField& a,
                 const ScalarField& b, double R) {
  return inner_l2(m, a, b, R);
}
double dot_field(const MetricField& m, const OneForm& a, const OneForm& b,
                 double R) {
  return inner_l2(m, a, b, R);
}

void restrict_support(ScalarField& f, double R) {
  for (int j = 0; j < f.grid.n; ++j)
    for (int i = 0; i < f.grid.n; ++i)
      if (f.grid.point(i, j).norm() >= R) f.at(i, j) = 0.0;
}
void restrict_support(OneForm& A, double R) {
  restrict_support(A.a1, R);
  restrict_support(A.a2, R);
}

void axpy(ScalarField& y, double a, const ScalarField& x) {
  for (std::size_t k = 0; k < y.v.size(); ++k) y.v[k] += a * x.v[k];
}
void axpy(OneForm& y, double a, const OneForm& x) {
  axpy(y.a1, a, x.a1);
  axpy(y.a2, a, x.a2);
}
void scale_add(ScalarField& p, const ScalarField& r, double beta) {
  for (std::size_t k = 0; k < p.v.size(); ++k)
    p.v[k] = r.v[k] + beta * p.v[k];
}
void scale_add(OneForm& p, const OneForm& r, double beta) {
  scale_add(p.a1, r.a1, beta);
  scale_add(p.a2, r.a2, beta);
}

void assign_result(InversionResult& res, const ScalarField& x) {
  res.scalar = x;
}
void assign_result(InversionResult& res, const OneForm& x) { res.oneform = x; }

template <class FieldT, class ApplyFn, class ProjectFn>
InversionResult cg_normal(const MetricField& m, const FieldT& rhs,
                          ApplyFn&& apply, ProjectFn&& project,
                          const InvertOptions& opt, FieldT zero) {
  InversionResult res;
  FieldT x = zero;
  FieldT r = rhs;
  restrict_support(r, opt.support_radius);
  project(r);
  FieldT p = r;
  double rs = dot_field(m, r, r, opt.support_radius);
  double rs0 = rs;
  if (rs0 == 0.0) {
    res.converged = true;
    res.residuals.push_back(0.0);
    assign_result(res, x);
    return res;
  }
  res.residuals.push_back(1.0);
  for (int it = 0; it < opt.max_iters; ++it) {
    FieldT q = apply(p);
    restrict_support(q, opt.support_radius);
    project(q);
    double pq = dot_field(m, p, q, opt.support_radius);
    if (pq <= 0.0) break;
    double alpha = rs / pq;
    axpy(x, alpha, p);
    axpy(r, -alpha, q);
    double rs_new = dot_field(m, r, r, opt.support_radius);
    res.residuals.push_back(std::sqrt(rs_new / rs0));
    res.iterations = it + 1;
    if (std::sqrt(rs_new / rs0) < opt.tol) {
      res.converged = true;
      rs = rs_new;
      break;
    }
    // stagnation: < 1e-3 relative reduction over the last 20 iterations
    std::size_t nh = res.residuals.size();
    if (nh > 20) {
      double recent = res.residuals[nh - 1] / res.residuals[nh - 21];
      if (recent > 1.0 - 1e-3) {
        res.stagnated = true;
        rs = rs_new;
        break;
      }
    }
    double beta = rs_new / rs;
    rs = rs_new;
    scale_add(p, r, beta);
  }
  assign_result(res, x);
  return res;
}

}  // namespace

InversionResult invert_normal(const MetricField& m, const ScalarField& rhs,
                              const InvertOptions& opt) {
  return cg_normal(
      m, rhs,
      [&](const ScalarField& p) { return normal_apply(m, p, opt.xray); },
      [](ScalarField&) {}, opt, ScalarField(rhs.grid, opt.support_radius));
}

InversionResult invert_normal(const MetricField& m, const OneForm& rhs,
                              const HodgeSolver& projector,
                              const InvertOptions& opt) {
  return cg_normal(
      m, rhs,
      [&](const OneForm& p) { return normal_apply(m, p, opt.xray); },
      [&](OneForm& v) { v = projector.project_solenoidal(v); }, opt,
      OneForm(rhs.grid(), opt.support_radius));
}

// ---------------------------------------------------------------------------
// Symbol diagnostic

SymbolCheckReport symbol_check_euclidean(TransformKind kind, int grid_n,
                                         const std::vector<double>& cycles,
                                         const XrayOptions& opt) {
  MetricField m = MetricField::euclidean(1.0);
  ChartGrid grid{grid_n, 1.3};
  SymbolCheckReport rep;
  ScalarField env = gaussian_bump_scalar(grid, {0.0, 0.0}, 0.35, 1.0, 0.8);
  const Vec2 dir{std::cos(0.3), std::sin(0.3)};
  for (double c : cycles) {
    if (c == 0.0) {
      rep.degenerate = true;
      continue;
    }
    double xi = M_PI * c;  // cycles per diameter -> wavenumber on radius 1
    rep.freqs.push_back(xi);
    if (kind == TransformKind::I0) {
      ScalarField f = env;
      for (int j = 0; j < grid.n; ++j)
        for (int i = 0; i < grid.n; ++i) {
          Vec2 x = grid.point(i, j);
          f.at(i, j) *= std::cos(xi * x.dot(dir));
        }
      ScalarField Nf = normal_apply(m, f, opt);
      rep.amplitudes.push_back(inner_l2(m, Nf, f, 1.0) /
                               inner_l2(m, f, f, 1.0));
    } else {
      auto modulated = [&](Vec2 pol) {
        OneForm A(grid, 1.0);
        for (int j = 0; j < grid.n; ++j)
          for (int i = 0; i < grid.n; ++i) {
            Vec2 x = grid.point(i, j);
            double v = env.at(i, j) * std::cos(xi * x.dot(dir));
            A.a1.at(i, j) = pol.x * v;
            A.a2.at(i, j) = pol.y * v;
          }
        return A;
      };
      OneForm Apar = modulated(dir);
      OneForm Aperp = modulated({-dir.y, dir.x});
      OneForm Npar = normal_apply(m, Apar, opt);
      OneForm Nperp = normal_apply(m, Aperp, opt);
      double rpar = inner_l2(m, Npar, Apar, 1.0) / inner_l2(m, Apar, Apar, 1.0);
      double rperp =
          inner_l2(m, Nperp, Aperp, 1.0) / inner_l2(m, Aperp, Aperp, 1.0);
      rep.amplitudes.push_back(rperp);
      rep.projector_ratio = rpar / rperp;  // last (highest) frequency wins
    }
  }
  if (rep.freqs.size() >= 2) {
    // least-squares slope of log amplitude vs log frequency
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = static_cast<int>(rep.freqs.size());
    for (int k = 0; k < n; ++k) {
      double lx = std::log(rep.freqs[k]);
      double ly = std::log(std::abs(rep.amplitudes[k]));
      sx += lx;
      sy += ly;
      sxx += lx * lx;
      sxy += lx * ly;
    }
    rep.fitted_decay = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  }
  return rep;
}

}  // namespace magtomo
