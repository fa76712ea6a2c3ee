#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <vector>

namespace opmap {

struct NelderMeadOptions {
  int max_iterations = 2000;
  /// Stop when the spread of simplex values is below
  /// tolerance * (|f_best| + tolerance).
  double tolerance = 1e-10;
  double initial_step = 0.5;
};

template <int Dim>
struct NelderMeadResult {
  Eigen::Matrix<double, Dim, 1> x;
  double value = std::numeric_limits<double>::infinity();
  int iterations = 0;
  bool converged = false;
};

/// Derivative-free simplex minimisation (standard reflection / expansion /
/// contraction / shrink coefficients 1, 2, 1/2, 1/2). Non-finite objective
/// values are treated as +inf, so infeasible regions simply repel the simplex.
template <int Dim, typename Objective>
NelderMeadResult<Dim> nelder_mead(Objective&& f, const Eigen::Matrix<double, Dim, 1>& start,
                                  const NelderMeadOptions& options = {}) {
  using Point = Eigen::Matrix<double, Dim, 1>;
  constexpr double kInf = std::numeric_limits<double>::infinity();
  auto eval = [&](const Point& p) {
    const double v = f(p);
    return std::isfinite(v) ? v : kInf;
  };

  std::vector<Point> simplex(Dim + 1, start);
  std::vector<double> values(Dim + 1);
  for (int i = 0; i < Dim; ++i) simplex[i + 1](i) += options.initial_step;
  for (int i = 0; i <= Dim; ++i) values[i] = eval(simplex[i]);

  std::vector<int> order(Dim + 1);
  NelderMeadResult<Dim> result;
  int it = 0;
  for (; it < options.max_iterations; ++it) {
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return values[a] < values[b]; });
    const int best = order.front();
    const int worst = order.back();
    const int second_worst = order[Dim - 1];

    const double spread = values[worst] - values[best];
    if (std::isfinite(values[worst]) &&
        spread <= options.tolerance * (std::abs(values[best]) + options.tolerance)) {
      result.converged = true;
      break;
    }

    Point centroid = Point::Zero();
    for (int i = 0; i <= Dim; ++i)
      if (i != worst) centroid += simplex[i];
    centroid /= Dim;

    const Point reflected = centroid + (centroid - simplex[worst]);
    const double f_reflected = eval(reflected);
    if (f_reflected < values[best]) {
      const Point expanded = centroid + 2.0 * (centroid - simplex[worst]);
      const double f_expanded = eval(expanded);
      if (f_expanded < f_reflected) {
        simplex[worst] = expanded;
        values[worst] = f_expanded;
      } else {
        simplex[worst] = reflected;
        values[worst] = f_reflected;
      }
      continue;
    }
    if (f_reflected < values[second_worst]) {
      simplex[worst] = reflected;
      values[worst] = f_reflected;
      continue;
    }
    const bool outside = f_reflected < values[worst];
    const Point contracted = outside ? Point(centroid + 0.5 * (reflected - centroid))
                                     : Point(centroid + 0.5 * (simplex[worst] - centroid));
    const double f_contracted = eval(contracted);
    if (f_contracted < std::min(f_reflected, values[worst])) {
      simplex[worst] = contracted;
      values[worst] = f_contracted;
      continue;
    }
    for (int i = 0; i <= Dim; ++i) {
      if (i == best) continue;
      simplex[i] = simplex[best] + 0.5 * (simplex[i] - simplex[best]);
      values[i] = eval(simplex[i]);
    }
  }
  const auto best = std::min_element(values.begin(), values.end()) - values.begin();
  result.x = simplex[best];
  result.value = values[best];
  result.iterations = it;
  return result;
}

}  // namespace opmap
