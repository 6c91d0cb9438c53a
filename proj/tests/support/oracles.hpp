#pragma once

// Test-only oracles, independent of the library's solver and enumeration
// code paths.

#include <vector>

#include <Eigen/Dense>

namespace schwarz::testing {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Exact E(delta_m^2) for the randomized incremental iteration on a complete
// orthonormal atom system, by propagating first and second moments of the
// error coordinates.
//
// After a genuine update the selected coordinate of the error is exactly
// zero; selecting that same coordinate next (and only that event) degenerates
// the update into the plain shrink. The recursion therefore tracks, per
// "pattern" (which coordinate is currently exactly zero, or none), the
// pattern probability and the unnormalized coordinate moments. This is exact
// as long as no error coordinate vanishes by coincidence, which holds for
// targets with strictly positive coordinates and holds almost surely for
// generic targets.
inline std::vector<double> rec_orthonormal_expected_sq_errors(const VectorXd& target,
                                                              const VectorXd& weights,
                                                              int m_max) {
  const int d = static_cast<int>(target.size());
  const int free_state = d; // index of the "no guaranteed zero" pattern

  VectorXd pattern_prob = VectorXd::Zero(d + 1);
  MatrixXd first = MatrixXd::Zero(d + 1, d);  // E[e_k ; pattern]
  MatrixXd second = MatrixXd::Zero(d + 1, d); // E[e_k^2 ; pattern]
  pattern_prob(free_state) = 1.0;
  first.row(free_state) = target.transpose();
  second.row(free_state) = target.array().square().transpose();

  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(m_max) + 1);
  out.push_back(second.sum());

  for (int m = 0; m < m_max; ++m) {
    const double a = 1.0 - 1.0 / (m + 2.0);
    const double b = 1.0 / (m + 2.0);

    // Moments of w = a e + b u per pattern.
    MatrixXd w_first = a * first + b * pattern_prob * target.transpose();
    MatrixXd w_second = a * a * second;
    for (int p = 0; p <= d; ++p) {
      const Eigen::ArrayXd extra =
          2.0 * a * b * target.array() * first.row(p).transpose().array() +
          b * b * target.array().square() * pattern_prob(p);
      w_second.row(p) += extra.matrix().transpose();
    }

    VectorXd next_prob = VectorXd::Zero(d + 1);
    MatrixXd next_first = MatrixXd::Zero(d + 1, d);
    MatrixXd next_second = MatrixXd::Zero(d + 1, d);

    const double total_prob = pattern_prob.sum();
    const VectorXd total_first = w_first.colwise().sum();
    const VectorXd total_second = w_second.colwise().sum();

    for (int i = 0; i < d; ++i) {
      // Genuine update: any source pattern except i itself zeroes coordinate i.
      next_prob(i) = weights(i) * (total_prob - pattern_prob(i));
      next_first.row(i) = weights(i) * (total_first.transpose() - w_first.row(i));
      next_second.row(i) = weights(i) * (total_second.transpose() - w_second.row(i));
      next_first(i, i) = 0.0;
      next_second(i, i) = 0.0;
      // Degenerate update: pattern i selects i again, no projection happens.
      next_prob(free_state) += weights(i) * pattern_prob(i);
      next_first.row(free_state) += weights(i) * w_first.row(i);
      next_second.row(free_state) += weights(i) * w_second.row(i);
    }

    pattern_prob = std::move(next_prob);
    first = std::move(next_first);
    second = std::move(next_second);
    out.push_back(second.sum());
  }
  return out;
}

// Closed-form expected squared error of the projection variant on a complete
// orthonormal atom system: sum_j u_j^2 (1 - rho_j)^m.
inline std::vector<double> omp_orthonormal_expected_sq_errors(const VectorXd& target,
                                                              const VectorXd& weights,
                                                              int m_max) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(m_max) + 1);
  for (int m = 0; m <= m_max; ++m) {
    double acc = 0.0;
    for (int j = 0; j < target.size(); ++j) {
      acc += target(j) * target(j) * std::pow(1.0 - weights(j), m);
    }
    out.push_back(acc);
  }
  return out;
}

} // namespace schwarz::testing
