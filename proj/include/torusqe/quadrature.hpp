#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace torusqe {

/// Gauss-Legendre nodes and weights on [-1, 1], by Newton iteration on P_n.
struct GaussLegendre {
  std::vector<double> nodes;
  std::vector<double> weights;

  explicit GaussLegendre(int n) : nodes(static_cast<std::size_t>(n)), weights(static_cast<std::size_t>(n)) {
    if (n < 1) throw std::invalid_argument("Gauss-Legendre order must be >= 1");
    for (int i = 0; i < (n + 1) / 2; ++i) {
      double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
      double dp = 0.0;
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= n; ++k) {
          const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        if (n == 1) p0 = 1.0;
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        const double dx = p1 / dp;
        x -= dx;
        if (std::fabs(dx) < 1e-16) break;
      }
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double w = 2.0 / ((1.0 - x * x) * dp * dp);
      nodes[static_cast<std::size_t>(i)] = -x;
      nodes[static_cast<std::size_t>(n - 1 - i)] = x;
      weights[static_cast<std::size_t>(i)] = w;
      weights[static_cast<std::size_t>(n - 1 - i)] = w;
    }
  }
};

inline constexpr int kPanelOrder = 10;

inline const GaussLegendre& panel_rule() {
  static const GaussLegendre rule(kPanelOrder);
  return rule;
}

/// Nodes and weights of a 1-D rule on [a, b]: the periodic trapezoid rule with
/// n points, or composite Gauss-Legendre with n panels.
struct Rule1D {
  std::vector<double> nodes;
  std::vector<double> weights;

  static Rule1D trapezoid(double a, double b, int n) {
    Rule1D r;
    const double h = (b - a) / n;
    for (int j = 0; j < n; ++j) {
      r.nodes.push_back(a + h * j);
      r.weights.push_back(h);
    }
    return r;
  }

  static Rule1D gauss_panels(double a, double b, int panels) {
    Rule1D r;
    const auto& g = panel_rule();
    const double h = (b - a) / panels;
    for (int p = 0; p < panels; ++p) {
      const double mid = a + h * (p + 0.5);
      for (std::size_t i = 0; i < g.nodes.size(); ++i) {
        r.nodes.push_back(mid + 0.5 * h * g.nodes[i]);
        r.weights.push_back(0.5 * h * g.weights[i]);
      }
    }
    return r;
  }

  static Rule1D make(double a, double b, int n, bool periodic) {
    return periodic ? trapezoid(a, b, n) : gauss_panels(a, b, n);
  }
};

struct QuadResult {
  std::complex<double> value;
  double error = 0.0;  // |last refinement - previous|
  int level = 0;       // points (periodic) or panels per direction
};

/// Refines `level` by doubling until two successive estimates differ by less
/// than tol. `eval(level)` returns the estimate at that level.
template <typename Eval>
QuadResult refine_until(Eval&& eval, int start, int max_level, double tol) {
  int level = start;
  auto prev = eval(level);
  while (level * 2 <= max_level) {
    level *= 2;
    auto cur = eval(level);
    const double err = std::abs(cur - prev);
    if (err < tol) return {cur, err, level};
    prev = cur;
  }
  throw std::runtime_error("quadrature did not converge within the refinement budget");
}

}  // namespace torusqe
