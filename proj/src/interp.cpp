#include "magtomo/interp.hpp"

#include <algorithm>
#include <cmath>

namespace magtomo {

namespace {

// Solves the (1 4 1)/6 prefilter with mirror ends, returning coefficients
// padded with one ghost value on each side.
std::vector<double> prefilter(const double* f, int n, int stride) {
  // Mirror end condition folded into the first and last rows gives
  // c_0 = f_0 and c_{n-1} = f_{n-1}; Thomas elimination handles the
  // interior tridiagonal rows c_{i-1} + 4 c_i + c_{i+1} = 6 f_i.
  std::vector<double> c(n + 2);
  if (n == 1) {
    c[0] = c[1] = c[2] = f[0];
    return c;
  }
  c[1] = f[0];
  c[n] = f[(n - 1) * stride];
  int m = n - 2;  // interior unknowns c_1 .. c_{n-2}
  if (m > 0) {
    std::vector<double> d(m), w(m);
    d[0] = 4.0;
    w[0] = 6.0 * f[stride] - c[1];
    for (int k = 1; k < m; ++k) {
      d[k] = 4.0 - 1.0 / d[k - 1];
      w[k] = 6.0 * f[(k + 1) * stride] - w[k - 1] / d[k - 1];
    }
    w[m - 1] -= c[n];
    c[m + 1] = w[m - 1] / d[m - 1];
    for (int k = m - 2; k >= 0; --k) c[k + 2] = (w[k] - c[k + 3]) / d[k];
  }
  c[0] = 2.0 * c[1] - c[2];
  c[n + 1] = 2.0 * c[n] - c[n - 1];
  return c;
}

inline void bspline_weights(double t, double w[4]) {
  double t2 = t * t, t3 = t2 * t;
  w[0] = (1.0 - 3.0 * t + 3.0 * t2 - t3) / 6.0;
  w[1] = (4.0 - 6.0 * t2 + 3.0 * t3) / 6.0;
  w[2] = (1.0 + 3.0 * t + 3.0 * t2 - 3.0 * t3) / 6.0;
  w[3] = t3 / 6.0;
}

inline void bspline_dweights(double t, double w[4]) {
  double t2 = t * t;
  w[0] = (-1.0 + 2.0 * t - t2) / 2.0;
  w[1] = (-4.0 * t + 3.0 * t2) / 2.0;
  w[2] = (1.0 + 2.0 * t - 3.0 * t2) / 2.0;
  w[3] = t2 / 2.0;
}

}  // namespace

CubicSpline1D::CubicSpline1D(std::vector<double> values, double x0, double h)
    : x0_(x0), h_(h) {
  coef_ = prefilter(values.data(), static_cast<int>(values.size()), 1);
}

double CubicSpline1D::eval(double x) const {
  int n = size();
  double u = (x - x0_) / h_;
  int cell = static_cast<int>(std::floor(u));
  cell = std::clamp(cell, 0, n - 2);
  double t = u - cell;
  double w[4];
  bspline_weights(t, w);
  const double* c = coef_.data() + cell;
  return w[0] * c[0] + w[1] * c[1] + w[2] * c[2] + w[3] * c[3];
}

double CubicSpline1D::deriv(double x) const {
  int n = size();
  double u = (x - x0_) / h_;
  int cell = static_cast<int>(std::floor(u));
  cell = std::clamp(cell, 0, n - 2);
  double t = u - cell;
  double w[4];
  bspline_dweights(t, w);
  const double* c = coef_.data() + cell;
  return (w[0] * c[0] + w[1] * c[1] + w[2] * c[2] + w[3] * c[3]) / h_;
}

CubicSpline2D::CubicSpline2D(const std::vector<double>& values, int n,
                             double x0, double h)
    : n_(n), x0_(x0), h_(h) {
  if (static_cast<int>(values.size()) != n * n)
    throw NumericError("CubicSpline2D: value count does not match grid");
  // Prefilter rows, then columns of the row coefficients.
  std::vector<double> tmp((n + 2) * n);
  for (int j = 0; j < n; ++j) {
    auto row = prefilter(values.data() + j * n, n, 1);
    for (int i = 0; i < n + 2; ++i) tmp[j * (n + 2) + i] = row[i];
  }
  coef_.assign((n + 2) * (n + 2), 0.0);
  std::vector<double> col(n);
  for (int i = 0; i < n + 2; ++i) {
    for (int j = 0; j < n; ++j) col[j] = tmp[j * (n + 2) + i];
    auto cc = prefilter(col.data(), n, 1);
    for (int j = 0; j < n + 2; ++j) coef_[j * (n + 2) + i] = cc[j];
  }
}

void CubicSpline2D::locate(double x, int& cell, double& t) const {
  double u = (x - x0_) / h_;
  cell = static_cast<int>(std::floor(u));
  cell = std::clamp(cell, 0, n_ - 2);
  t = u - cell;
}

double CubicSpline2D::eval(Vec2 p) const {
  int ci, cj;
  double ti, tj;
  locate(p.x, ci, ti);
  locate(p.y, cj, tj);
  double wi[4], wj[4];
  bspline_weights(ti, wi);
  bspline_weights(tj, wj);
  double s = 0.0;
  for (int b = 0; b < 4; ++b) {
    const double* row = coef_.data() + (cj + b) * (n_ + 2) + ci;
    s += wj[b] * (wi[0] * row[0] + wi[1] * row[1] + wi[2] * row[2] +
                  wi[3] * row[3]);
  }
  return s;
}

Vec2 CubicSpline2D::grad(Vec2 p) const {
  int ci, cj;
  double ti, tj;
  locate(p.x, ci, ti);
  locate(p.y, cj, tj);
  double wi[4], wj[4], dwi[4], dwj[4];
  bspline_weights(ti, wi);
  bspline_weights(tj, wj);
  bspline_dweights(ti, dwi);
  bspline_dweights(tj, dwj);
  double gx = 0.0, gy = 0.0;
  for (int b = 0; b < 4; ++b) {
    const double* row = coef_.data() + (cj + b) * (n_ + 2) + ci;
    double sx = dwi[0] * row[0] + dwi[1] * row[1] + dwi[2] * row[2] +
                dwi[3] * row[3];
    double sv = wi[0] * row[0] + wi[1] * row[1] + wi[2] * row[2] +
                wi[3] * row[3];
    gx += wj[b] * sx;
    gy += dwj[b] * sv;
  }
  return {gx / h_, gy / h_};
}

}  // namespace magtomo
