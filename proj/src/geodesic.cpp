#include "magtomo/geodesic.hpp"

#include <cmath>

namespace magtomo {

namespace {

struct State {
  Vec2 x, th;
};

inline State rhs(const MetricField& m, const State& s) {
  Christoffel c = m.christoffel(s.x);
  double a1 = 0.0, a2 = 0.0;
  double t[2] = {s.th.x, s.th.y};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      a1 -= c(0, i, j) * t[i] * t[j];
      a2 -= c(1, i, j) * t[i] * t[j];
    }
  return {s.th, {a1, a2}};
}

inline State rk4_step(const MetricField& m, const State& s, double h) {
  State k1 = rhs(m, s);
  State k2 = rhs(m, {s.x + 0.5 * h * k1.x, s.th + 0.5 * h * k1.th});
  State k3 = rhs(m, {s.x + 0.5 * h * k2.x, s.th + 0.5 * h * k2.th});
  State k4 = rhs(m, {s.x + h * k3.x, s.th + h * k3.th});
  return {s.x + (h / 6.0) * (k1.x + 2.0 * k2.x + 2.0 * k3.x + k4.x),
          s.th + (h / 6.0) * (k1.th + 2.0 * k2.th + 2.0 * k3.th + k4.th)};
}

inline double level(const Vec2& x, double R) {
  return x.x * x.x + x.y * x.y - R * R;
}

}  // namespace

Geodesic integrate_geodesic(const MetricField& m, PhasePoint p,
                            const GeodesicOptions& opt) {
  const double R = m.chart_radius();
  Geodesic out;
  out.h = opt.h;
  p.theta = m.normalized(p.x, p.theta);
  out.samples.push_back(p);

  State s{p.x, p.theta};
  double drift = 0.0;
  bool crossed = false;
  State prev = s;
  std::size_t step = 0;
  for (; step < opt.max_steps; ++step) {
    prev = s;
    s = rk4_step(m, s, opt.h);
    double nrm = m.norm(s.x, s.th);
    drift = std::max(drift, std::abs(nrm - 1.0));
    s.th = s.th / nrm;
    if (level(s.x, R) > 0.0) {
      crossed = true;
      break;
    }
    out.samples.push_back({s.x, s.th});
  }
  if (!crossed)
    throw GeometryError(
        "integrate_geodesic: step budget exhausted; trajectory looks trapped "
        "(non-trapping assumption violated)");

  // Bisect the partial step from `prev` for the boundary crossing.
  double lo = 0.0, hi = opt.h;
  State at_hi = s;
  for (int it = 0; it < 80 && (hi - lo) > 1e-10; ++it) {
    double mid = 0.5 * (lo + hi);
    State sm = rk4_step(m, prev, mid);
    if (level(sm.x, R) > 0.0) {
      hi = mid;
      at_hi = sm;
    } else {
      lo = mid;
    }
  }
  at_hi.th = m.normalized(at_hi.x, at_hi.th);
  out.samples.push_back({at_hi.x, at_hi.th});
  out.tau_plus = static_cast<double>(step) * opt.h + hi;
  out.renorm_drift = drift;

  if (opt.compute_backward_exit) {
    if (level(p.x, R) > -1e-14 * R * R) {
      out.tau_minus = 0.0;
    } else {
      GeodesicOptions back = opt;
      back.compute_backward_exit = false;
      Geodesic gb = integrate_geodesic(m, {p.x, {-p.theta.x, -p.theta.y}}, back);
      out.tau_minus = -gb.tau_plus;
    }
  }
  return out;
}

PhasePoint flow_fixed_time(const MetricField& m, PhasePoint p, double time,
                           double h_target) {
  if (time == 0.0) return {p.x, m.normalized(p.x, p.theta)};
  const double R = m.chart_radius();
  int n = std::max(1, static_cast<int>(std::ceil(std::abs(time) / h_target)));
  double h = time / n;
  State s{p.x, m.normalized(p.x, p.theta)};
  for (int k = 0; k < n; ++k) {
    s = rk4_step(m, s, h);
    s.th = s.th / m.norm(s.x, s.th);
    if (std::hypot(s.x.x, s.x.y) > R + 1e-9)
      throw GeometryError("flow_fixed_time: trajectory left the chart disk");
  }
  return {s.x, s.th};
}

Vec2 exp_map(const MetricField& m, Vec2 y, Vec2 v, double h_target) {
  double len = m.norm(y, v);
  if (len == 0.0) return y;
  return flow_fixed_time(m, {y, v / len}, len, h_target).x;
}

std::vector<PhasePoint> sample_geodesic(const MetricField& m, PhasePoint p,
                                        double total_time, int n_steps) {
  std::vector<PhasePoint> out;
  out.reserve(n_steps + 1);
  State s{p.x, m.normalized(p.x, p.theta)};
  out.push_back({s.x, s.th});
  double h = total_time / n_steps;
  for (int k = 0; k < n_steps; ++k) {
    s = rk4_step(m, s, h);
    s.th = s.th / m.norm(s.x, s.th);
    out.push_back({s.x, s.th});
  }
  return out;
}

namespace {

// Joint state for geodesic + two transported vectors.
struct JointState {
  Vec2 x, th, v1, v2;
};

inline JointState joint_rhs(const MetricField& m, const JointState& s) {
  Christoffel c = m.christoffel(s.x);
  auto cov = [&](const Vec2& w) {
    double t[2] = {s.th.x, s.th.y};
    double ww[2] = {w.x, w.y};
    double d1 = 0.0, d2 = 0.0;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        d1 -= c(0, i, j) * t[i] * ww[j];
        d2 -= c(1, i, j) * t[i] * ww[j];
      }
    return Vec2{d1, d2};
  };
  return {s.th, cov(s.th), cov(s.v1), cov(s.v2)};
}

inline JointState joint_rk4(const MetricField& m, const JointState& s,
                            double h) {
  auto adv = [](const JointState& a, double f, const JointState& d) {
    return JointState{a.x + f * d.x, a.th + f * d.th, a.v1 + f * d.v1,
                      a.v2 + f * d.v2};
  };
  JointState k1 = joint_rhs(m, s);
  JointState k2 = joint_rhs(m, adv(s, 0.5 * h, k1));
  JointState k3 = joint_rhs(m, adv(s, 0.5 * h, k2));
  JointState k4 = joint_rhs(m, adv(s, h, k3));
  JointState out = s;
  out.x += (h / 6.0) * (k1.x + 2.0 * k2.x + 2.0 * k3.x + k4.x);
  out.th += (h / 6.0) * (k1.th + 2.0 * k2.th + 2.0 * k3.th + k4.th);
  out.v1 += (h / 6.0) * (k1.v1 + 2.0 * k2.v1 + 2.0 * k3.v1 + k4.v1);
  out.v2 += (h / 6.0) * (k1.v2 + 2.0 * k2.v2 + 2.0 * k3.v2 + k4.v2);
  return out;
}

}  // namespace

Vec2 parallel_transport(const MetricField& m, PhasePoint start, double time,
                        Vec2 X, double h_target) {
  if (time == 0.0) return X;
  int n = std::max(1, static_cast<int>(std::ceil(std::abs(time) / h_target)));
  double h = time / n;
  JointState s{start.x, m.normalized(start.x, start.theta), X, {0.0, 0.0}};
  for (int k = 0; k < n; ++k) s = joint_rk4(m, s, h);
  return s.v1;
}

Vec2 parallel_transport(const MetricField& m, const Geodesic& gamma, Vec2 X) {
  return parallel_transport(m, gamma.samples.front(), gamma.tau_plus, X,
                            gamma.h);
}

TransportedFrame transport_frames(const MetricField& m, PhasePoint start,
                                  double time, int n_steps) {
  TransportedFrame out;
  out.path.reserve(n_steps + 1);
  out.frames.reserve(n_steps + 1);
  JointState s{start.x, m.normalized(start.x, start.theta), {1.0, 0.0},
               {0.0, 1.0}};
  out.path.push_back({s.x, s.th});
  out.frames.push_back({s.v1, s.v2});
  double h = time / n_steps;
  for (int k = 0; k < n_steps; ++k) {
    s = joint_rk4(m, s, h);
    out.path.push_back({s.x, s.th});
    out.frames.push_back({s.v1, s.v2});
  }
  return out;
}

}  // namespace magtomo
