#include "rankcast/trig_fit.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "rankcast/domain.hpp"

namespace rankcast {

double TrigSeries::operator()(double x) const {
  const double t = x - origin;
  double value = a0;
  for (int k = 1; k <= order(); ++k) {
    const double phase = k * omega * t;
    value += a[k - 1] * std::cos(phase) + b[k - 1] * std::sin(phase);
  }
  return value;
}

double TrigSeries::d_omega(double x) const {
  const double t = x - origin;
  double value = 0.0;
  for (int k = 1; k <= order(); ++k) {
    const double phase = k * omega * t;
    value += k * t * (-a[k - 1] * std::sin(phase) + b[k - 1] * std::cos(phase));
  }
  return value;
}

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Parameter layout: [a0, a1..aK, b1..bK, omega].
VectorXd pack(const TrigSeries& s) {
  const int k = s.order();
  VectorXd p(2 * k + 2);
  p[0] = s.a0;
  for (int i = 0; i < k; ++i) {
    p[1 + i] = s.a[i];
    p[1 + k + i] = s.b[i];
  }
  p[2 * k + 1] = s.omega;
  return p;
}

TrigSeries unpack(const VectorXd& p, int k, double origin) {
  TrigSeries s;
  s.origin = origin;
  s.a0 = p[0];
  s.a.resize(k);
  s.b.resize(k);
  for (int i = 0; i < k; ++i) {
    s.a[i] = p[1 + i];
    s.b[i] = p[1 + k + i];
  }
  s.omega = p[2 * k + 1];
  return s;
}

double cost_of(const TrigSeries& s, std::span<const double> x, std::span<const double> y,
               std::span<const double> w) {
  double c = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = (s(x[i]) - y[i]) * w[i];
    c += r * r;
  }
  return 0.5 * c;
}

void fill_stats(const TrigSeries& s, std::span<const double> x, std::span<const double> y,
                TrigFitStats& stats) {
  double sum = 0.0, worst = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = std::abs(s(x[i]) - y[i]);
    sum += r * r;
    worst = std::max(worst, r);
  }
  stats.points = x.size();
  stats.rms = x.empty() ? 0.0 : std::sqrt(sum / static_cast<double>(x.size()));
  stats.max_abs = worst;
}

TrigSeries solve_linear(std::span<const double> x, std::span<const double> y, std::span<const double> w,
                        int order, double omega, double origin) {
  const int cols = 2 * order + 1;
  MatrixXd design(static_cast<Eigen::Index>(x.size()), cols);
  VectorXd rhs(static_cast<Eigen::Index>(x.size()));
  for (std::size_t i = 0; i < x.size(); ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    const double t = x[i] - origin;
    design(row, 0) = w[i];
    for (int k = 1; k <= order; ++k) {
      design(row, k) = w[i] * std::cos(k * omega * t);
      design(row, order + k) = w[i] * std::sin(k * omega * t);
    }
    rhs[row] = w[i] * y[i];
  }
  const VectorXd coef = design.completeOrthogonalDecomposition().solve(rhs);
  TrigSeries s;
  s.origin = origin;
  s.omega = omega;
  s.a0 = coef[0];
  s.a.resize(order);
  s.b.resize(order);
  for (int k = 1; k <= order; ++k) {
    s.a[k - 1] = coef[k];
    s.b[k - 1] = coef[order + k];
  }
  return s;
}

// Levenberg-Marquardt on all coefficients and omega. Returns the final cost.
double refine(TrigSeries& current, std::span<const double> x, std::span<const double> yn,
              std::span<const double> w, const TrigFitOptions& options, TrigFitStats& stats) {
  const int k = current.order();
  const double origin = current.origin;
  const int np = 2 * k + 2;
  const auto n = static_cast<Eigen::Index>(x.size());
  double cost = cost_of(current, x, yn, w);
  double lambda = 1e-3;
  for (int iter = 0; iter < options.max_iterations; ++iter) {
    stats.iterations = iter + 1;
    MatrixXd jac(n, np);
    VectorXd res(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto u = static_cast<std::size_t>(i);
      const double t = x[u] - origin;
      jac(i, 0) = w[u];
      for (int j = 1; j <= k; ++j) {
        jac(i, j) = w[u] * std::cos(j * current.omega * t);
        jac(i, k + j) = w[u] * std::sin(j * current.omega * t);
      }
      jac(i, np - 1) = w[u] * current.d_omega(x[u]);
      res[i] = w[u] * (current(x[u]) - yn[u]);
    }
    const MatrixXd normal = jac.transpose() * jac;
    const VectorXd grad = jac.transpose() * res;
    const double diag_floor = 1e-12 * std::max(1.0, normal.diagonal().maxCoeff());

    bool accepted = false;
    while (lambda < 1e12) {
      MatrixXd damped = normal;
      for (int d = 0; d < np; ++d) damped(d, d) += lambda * (normal(d, d) + diag_floor);
      const VectorXd step = damped.ldlt().solve(-grad);
      const TrigSeries trial = unpack(pack(current) + step, k, origin);
      const double trial_cost = trial.omega > 0.0 ? cost_of(trial, x, yn, w) : cost + 1.0;
      if (std::isfinite(trial_cost) && trial_cost < cost) {
        const double change = (cost - trial_cost) / std::max(cost, 1e-300);
        current = trial;
        cost = trial_cost;
        lambda = std::max(lambda / 10.0, 1e-12);
        accepted = true;
        if (change < options.relative_tolerance) stats.converged = true;
        break;
      }
      lambda *= 10.0;
    }
    // No descent step left: the current point is a local minimum.
    if (!accepted || cost == 0.0) stats.converged = true;
    if (stats.converged) break;
  }
  return cost;
}

}  // namespace

TrigSeries fit_trig_linear(std::span<const double> x, std::span<const double> y, int order,
                           double omega, double origin) {
  if (x.size() != y.size())
    throw Error(ErrorKind::invalid_argument, "size-mismatch", "x and y differ in length");
  if (x.empty()) throw Error(ErrorKind::too_few, "too-few", "no points to fit");
  const std::vector<double> w(x.size(), 1.0);
  return solve_linear(x, y, w, order, omega, origin);
}

TrigFit fit_trig_series(std::span<const double> x, std::span<const double> y, int order,
                        const TrigFitOptions& options) {
  if (x.size() != y.size())
    throw Error(ErrorKind::invalid_argument, "size-mismatch", "x and y differ in length");
  if (x.empty()) throw Error(ErrorKind::too_few, "too-few", "no points to fit");
  if (order < 0) throw Error(ErrorKind::invalid_argument, "order<0", "series order is negative");

  TrigFit fit;
  fit.stats.order_requested = order;
  const auto [lo_it, hi_it] = std::minmax_element(x.begin(), x.end());
  const double origin = *lo_it;
  const double span = *hi_it - *lo_it;

  int k = order;
  while (k > 0 && 2 * k + 2 > static_cast<int>(x.size())) --k;
  if (span <= 0.0) k = 0;
  fit.stats.order_used = k;

  // Normalize the response so the damping scale is independent of rank size.
  double scale = 0.0;
  for (double v : y) scale = std::max(scale, std::abs(v));
  if (scale == 0.0) scale = 1.0;
  std::vector<double> yn(y.begin(), y.end());
  for (double& v : yn) v /= scale;
  // Relative weighting divides each residual by its own target instead.
  std::vector<double> w(x.size(), 1.0);
  if (options.weighting == TrigWeighting::relative)
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = scale / std::max(std::abs(y[i]), 1.0);

  TrigSeries current;
  if (k > 0) {
    // Several starting frequencies; the cost surface in omega has local minima.
    double best_cost = std::numeric_limits<double>::infinity();
    for (double m : {0.25, 0.5, 0.75, 1.0, 1.5, 2.0}) {
      TrigFitStats trial_stats;
      TrigSeries trial = solve_linear(x, yn, w, k, m * std::numbers::pi / span, origin);
      const double c = refine(trial, x, yn, w, options, trial_stats);
      if (c < best_cost) {
        best_cost = c;
        current = trial;
        fit.stats.iterations = trial_stats.iterations;
        fit.stats.converged = trial_stats.converged;
      }
    }
  } else {
    current = solve_linear(x, yn, w, 0, 1.0, origin);
    fit.stats.converged = true;
  }

  current.a0 *= scale;
  for (double& v : current.a) v *= scale;
  for (double& v : current.b) v *= scale;
  fit.series = current;
  fill_stats(fit.series, x, y, fit.stats);
  return fit;
}

}  // namespace rankcast
