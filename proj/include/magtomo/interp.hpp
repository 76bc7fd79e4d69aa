#pragma once

#include <vector>

#include "magtomo/util.hpp"

namespace magtomo {

// Interpolating cubic B-spline on a uniform 1D grid. Coefficients are
// obtained from the node values by the tridiagonal prefilter
//   (c[i-1] + 4 c[i] + c[i+1]) / 6 = f[i],
// closed with mirror end conditions c[-1] = 2c[0] - c[1]. Evaluation is C^2
// and reproduces the node values exactly.
class CubicSpline1D {
 public:
  CubicSpline1D() = default;
  CubicSpline1D(std::vector<double> values, double x0, double h);

  double eval(double x) const;
  double deriv(double x) const;

  int size() const { return static_cast<int>(coef_.size()) - 2; }

 private:
  std::vector<double> coef_;  // padded with one ghost on each side
  double x0_ = 0.0, h_ = 1.0;
};

// Tensor-product bicubic B-spline over a uniform N x N grid on
// [x0, x0 + (N-1) h]^2. Row-major storage, first index along x1.
class CubicSpline2D {
 public:
  CubicSpline2D() = default;
  CubicSpline2D(const std::vector<double>& values, int n, double x0, double h);

  double eval(Vec2 p) const;
  Vec2 grad(Vec2 p) const;

  int size() const { return n_; }
  double origin() const { return x0_; }
  double spacing() const { return h_; }

 private:
  void locate(double x, int& cell, double& t) const;

  std::vector<double> coef_;  // (n+2) x (n+2), ghost ring included
  int n_ = 0;
  double x0_ = 0.0, h_ = 1.0;
};

}  // namespace magtomo
