#include "rankone/simplex_lsq.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include <Eigen/Dense>

#include "rankone/error.hpp"

namespace rankone {

void project_to_simplex(std::span<double> w) {
  if (w.empty()) return;
  std::vector<double> sorted(w.begin(), w.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double cumulative = 0.0;
  double threshold = 0.0;
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    cumulative += sorted[k];
    const double t = (cumulative - 1.0) / static_cast<double>(k + 1);
    if (sorted[k] - t > 0.0) threshold = t;
  }
  for (double& v : w) v = std::max(v - threshold, 0.0);
}

SimplexLsqResult solve_simplex_lsq(std::span<const double> gram, std::span<const double> rhs, double constant,
                                   const SimplexLsqOptions& options) {
  const auto m = static_cast<Eigen::Index>(rhs.size());
  if (m == 0 || gram.size() != rhs.size() * rhs.size()) {
    throw InvalidArgument("limits", "simplex least squares: Gram matrix and right-hand side disagree in size");
  }
  const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> G(gram.data(), m, m);
  const Eigen::Map<const Eigen::VectorXd> b(rhs.data(), m);

  auto objective = [&](const Eigen::VectorXd& w) { return w.dot(G * w) - 2.0 * b.dot(w) + constant; };

  const double top = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(G, Eigen::EigenvaluesOnly).eigenvalues().maxCoeff();
  const double step = 1.0 / (2.0 * std::max(top, 1e-300));

  Eigen::VectorXd w = Eigen::VectorXd::Constant(m, 1.0 / static_cast<double>(m));
  Eigen::VectorXd y = w;
  Eigen::VectorXd next(m);
  double t = 1.0;
  double value = objective(w);

  SimplexLsqResult out;
  for (int it = 1; it <= options.max_iterations; ++it) {
    next = y - step * 2.0 * (G * y - b);
    project_to_simplex(std::span<double>(next.data(), static_cast<std::size_t>(m)));
    const double next_value = objective(next);
    out.iterations = it;
    if (next_value > value) {
      // Momentum overshot: restart from the last iterate.
      y = w;
      t = 1.0;
      continue;
    }
    const double improvement = value - next_value;
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    y = next + ((t - 1.0) / t_next) * (next - w);
    t = t_next;
    w = next;
    value = next_value;
    if (improvement < options.tolerance) {
      // Confirm with a plain projected-gradient step before stopping.
      Eigen::VectorXd probe = w - step * 2.0 * (G * w - b);
      project_to_simplex(std::span<double>(probe.data(), static_cast<std::size_t>(m)));
      if (value - objective(probe) < options.tolerance) {
        out.converged = true;
        break;
      }
    }
  }
  out.weights.assign(w.data(), w.data() + m);
  out.objective = std::max(value, 0.0);
  return out;
}

}  // namespace rankone
