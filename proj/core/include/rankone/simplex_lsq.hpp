#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace rankone {

/// Euclidean projection onto {w : w_i >= 0, sum w_i = 1}, in place.
void project_to_simplex(std::span<double> w);

struct SimplexLsqOptions {
  int max_iterations = 10000;
  /// Stop once an iteration improves the objective by less than this.
  double tolerance = 1e-10;
};

struct SimplexLsqResult {
  std::vector<double> weights;
  /// w^T G w - 2 b^T w + c at the returned weights (clamped at 0).
  double objective = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Minimize w^T G w - 2 b^T w + c over the probability simplex by
/// accelerated projected gradient with adaptive restart.
///
/// `gram` is the dense row-major m x m matrix G (symmetric positive
/// semidefinite), `rhs` is b and `constant` is c.
SimplexLsqResult solve_simplex_lsq(std::span<const double> gram, std::span<const double> rhs, double constant,
                                   const SimplexLsqOptions& options = {});

}  // namespace rankone
