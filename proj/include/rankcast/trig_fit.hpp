#pragma once
// Least-squares fitting of a truncated trigonometric series
//
//   f(x) = a0 + sum_{k=1..K} (a_k cos(k w t) + b_k sin(k w t)),  t = x - origin
//
// with the fundamental frequency w fitted alongside the coefficients by a
// Levenberg-Marquardt iteration. Coefficients for a fixed w come from a
// linear least-squares solve, which also seeds the iteration.

#include <span>
#include <vector>

namespace rankcast {

struct TrigSeries {
  double origin = 0.0;
  double omega = 1.0;
  double a0 = 0.0;
  std::vector<double> a;  // cosine coefficients, k = 1..K
  std::vector<double> b;  // sine coefficients, k = 1..K

  int order() const { return static_cast<int>(a.size()); }
  double operator()(double x) const;
  // Partial derivative of f(x) with respect to omega.
  double d_omega(double x) const;
};

enum class TrigWeighting {
  uniform,   // ordinary least squares
  relative,  // residuals divided by max(|y|, 1)
};

struct TrigFitOptions {
  double relative_tolerance = 1e-8;
  int max_iterations = 200;
  TrigWeighting weighting = TrigWeighting::uniform;
};

struct TrigFitStats {
  int order_requested = 0;
  int order_used = 0;
  int iterations = 0;
  bool converged = false;
  double rms = 0.0;
  double max_abs = 0.0;
  std::size_t points = 0;
};

struct TrigFit {
  TrigSeries series;
  TrigFitStats stats;
};

// Solves for the coefficients at a fixed omega (no frequency update).
TrigSeries fit_trig_linear(std::span<const double> x, std::span<const double> y, int order,
                           double omega, double origin);

// Full fit. The order is reduced until 2K + 2 <= point count; with fewer than
// two points a constant is returned. The iteration starts from several
// multiples of pi / span and keeps the lowest-cost result.
TrigFit fit_trig_series(std::span<const double> x, std::span<const double> y, int order,
                        const TrigFitOptions& options = {});

}  // namespace rankcast
