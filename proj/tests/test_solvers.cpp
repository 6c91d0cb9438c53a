#include <doctest.h>

#include <cmath>

#include "schwarz/instances.hpp"
#include "schwarz/solvers.hpp"
#include "support/oracles.hpp"

using namespace schwarz;

namespace {

Vector vec2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

std::vector<int> all_indices(const SubspaceFamily& family) {
  std::vector<int> pool(family.size());
  for (int i = 0; i < family.size(); ++i) pool[static_cast<std::size_t>(i)] = i;
  return pool;
}

} // namespace

TEST_CASE("averaging weights") {
  CHECK(alpha(0) == doctest::Approx(0.5));
  CHECK(alpha(1) == doctest::Approx(2.0 / 3.0));
  double prev = 0.0;
  for (int m = 0; m < 1000; ++m) {
    const double a = alpha(m);
    CHECK(a > prev);
    CHECK(a < 1.0);
    prev = a;
  }
  CHECK_THROWS_AS(alpha(-1), std::invalid_argument);
}

TEST_CASE("optimal step size") {
  Instance inst = orthonormal_instance(2, Vector::Constant(2, 0.5));
  const Problem problem = inst.problem(vec2(1, 0));

  // From zero along e_1 the first step lands exactly on the target.
  CHECK(xi_optimal(problem, Vector::Zero(2), 0, vec2(1, 0)) == doctest::Approx(1.0));
  CHECK(xi_optimal(problem, Vector::Zero(2), 0, Vector::Zero(2)) == 0.0);

  // No perturbation of the step beats it.
  RandomStream stream(17);
  for (int t = 0; t < 100; ++t) {
    const Vector u_m = vec2(stream.next_gaussian(), stream.next_gaussian());
    const Vector direction = vec2(stream.next_gaussian(), stream.next_gaussian());
    const int m = t % 7;
    const double xi = xi_optimal(problem, u_m, m, direction);
    const auto err_sq = [&](double step) {
      const Vector e = problem.target - alpha(m) * u_m - step * direction;
      return e.squaredNorm();
    };
    const double best = err_sq(xi);
    CHECK(err_sq(xi + stream.next_gaussian()) >= best - 1e-12);
  }
}

TEST_CASE("run_random at the solution stays at zero error") {
  Instance inst = orthonormal_instance(3, Vector::Constant(3, 1.0 / 3));
  const Problem problem = inst.problem(Vector::Zero(3));
  const SolverTrajectory traj = run_random(problem, inst.measure, 30, RandomStream(4));
  for (double e : traj.sq_errors) CHECK(e == 0.0);
}

TEST_CASE("run_random matches the independent moment oracle") {
  // d=2, target e_1: hand-checked exact expectations 1, 1/2, 11/36.
  const Vector w = Vector::Constant(2, 0.5);
  const Vector u = vec2(1, 0);
  const auto oracle = testing::rec_orthonormal_expected_sq_errors(u, w, 2);
  CHECK(oracle[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(oracle[1] == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(oracle[2] == doctest::Approx(11.0 / 36.0).epsilon(1e-13));

  // Monte Carlo agreement at d=4 with skewed weights and positive target.
  Vector weights(4);
  weights << 0.1, 0.2, 0.3, 0.4;
  Vector target(4);
  target << 0.5, 1.0, 0.25, 0.75;
  Instance inst = orthonormal_instance(4, weights);
  const Problem problem = inst.problem(target);
  const int m_max = 40;
  const auto exact = testing::rec_orthonormal_expected_sq_errors(target, weights, m_max);

  const int runs = 4000;
  std::vector<double> mean(m_max + 1, 0.0), sq(m_max + 1, 0.0);
  RandomStream root(2025);
  for (int r = 0; r < runs; ++r) {
    const SolverTrajectory traj = run_random(problem, inst.measure, m_max, root.derive(r));
    for (int m = 0; m <= m_max; ++m) {
      mean[m] += traj.sq_errors[m];
      sq[m] += traj.sq_errors[m] * traj.sq_errors[m];
    }
  }
  for (int m = 0; m <= m_max; ++m) {
    mean[m] /= runs;
    const double var = (sq[m] - runs * mean[m] * mean[m]) / (runs - 1);
    const double se = std::sqrt(std::max(var, 0.0) / runs);
    CHECK(std::abs(mean[m] - exact[m]) <= std::max(5.0 * se, 1e-12));
  }
}

TEST_CASE("energy identity holds along a run") {
  Vector weights(3);
  weights << 0.2, 0.3, 0.5;
  Instance inst = orthonormal_instance(3, weights);
  Vector target(3);
  target << 1.0, -2.0, 0.5;
  const Problem problem = inst.problem(target);
  SolverOptions opts;
  opts.record_iterates = true;
  const SolverTrajectory traj = run_random(problem, inst.measure, 50, RandomStream(9), opts);
  const InnerProductSpace& space = inst.family->space();
  for (int m = 0; m < 50; ++m) {
    const Vector& u_m = traj.iterates[m];
    const Vector e = target - u_m;
    const Vector w = alpha(m) * e + (1.0 - alpha(m)) * target;
    const Vector psi = psi_tilde(*inst.family, traj.chosen[m], e);
    double predicted = space.inner(w, w);
    if (psi.squaredNorm() > 0.0) {
      const double proj = space.inner(w, psi);
      predicted -= proj * proj;
    }
    CHECK(std::abs(traj.sq_errors[m + 1] - predicted) <= 1e-10 * std::max(1.0, predicted));
  }
}

TEST_CASE("functional mode reproduces direct mode") {
  RandomStream stream(31);
  Matrix g(4, 4);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) g(i, j) = stream.next_gaussian();
  auto space = std::make_shared<InnerProductSpace>(
      Matrix(g * g.transpose() + 4.0 * Matrix::Identity(4, 4)));
  const Matrix atoms = random_unit_atoms(*space, 8, stream);
  Instance inst = unit_dictionary_instance(space, atoms, Vector::Constant(8, 0.125));
  Vector target(4);
  for (int i = 0; i < 4; ++i) target(i) = stream.next_gaussian();

  const Problem direct = inst.problem(target, RhsMode::direct);
  const Problem functional = inst.problem(target, RhsMode::functional);
  const RandomStream run_stream(77);
  const SolverTrajectory a = run_random(direct, inst.measure, 60, run_stream);
  const SolverTrajectory b = run_random(functional, inst.measure, 60, run_stream);
  REQUIRE(a.chosen == b.chosen);
  for (std::size_t m = 0; m < a.sq_errors.size(); ++m) {
    CHECK(a.sq_errors[m] == doctest::Approx(b.sq_errors[m]).epsilon(1e-12));
  }
}

TEST_CASE("omp trajectory properties") {
  const Vector w = Vector::Constant(2, 0.5);
  Instance inst = orthonormal_instance(2, w);
  const Problem problem = inst.problem(vec2(1, 0));

  SUBCASE("zero target gives a zero trajectory") {
    const Problem zero = inst.problem(Vector::Zero(2));
    const SolverTrajectory traj = run_omp(zero, inst.measure, 10, RandomStream(1));
    for (double e : traj.sq_errors) CHECK(e == 0.0);
  }

  SUBCASE("errors never increase and the projection beats one rank-one step") {
    Vector weights(5);
    weights << 0.1, 0.15, 0.2, 0.25, 0.3;
    Instance big = orthonormal_instance(5, weights);
    Vector target(5);
    target << 1, 2, 3, 4, 5;
    const Problem p = big.problem(target);
    SolverOptions opts;
    opts.record_iterates = true;
    const SolverTrajectory traj = run_omp(p, big.measure, 50, RandomStream(5), opts);
    for (int m = 0; m < 50; ++m) {
      CHECK(traj.sq_errors[m + 1] <= traj.sq_errors[m] + 1e-12);
      const Vector& u_m = traj.iterates[m];
      const Vector e = target - u_m;
      const Vector direction =
          apply_R(*big.family, traj.chosen[m], apply_T(*big.family, traj.chosen[m], e));
      const Vector after_step = target - alpha(m) * u_m - traj.xis[m] * direction;
      CHECK(traj.sq_errors[m + 1] <= after_step.squaredNorm() + 1e-12);
    }
  }

  SUBCASE("expected decay matches the closed form") {
    // Estimated over many runs; the closed form is exact for this setting.
    const int m_max = 10;
    const auto closed = testing::omp_orthonormal_expected_sq_errors(vec2(1, 0), w, m_max);
    const int runs = 20000;
    std::vector<double> mean(m_max + 1, 0.0);
    RandomStream root(88);
    for (int r = 0; r < runs; ++r) {
      const SolverTrajectory traj = run_omp(problem, inst.measure, m_max, root.derive(r));
      for (int m = 0; m <= m_max; ++m) mean[m] += traj.sq_errors[m];
    }
    for (int m = 0; m <= m_max; ++m) {
      mean[m] /= runs;
      const double se = std::sqrt(closed[m] * (1 - closed[m]) / runs); // Bernoulli errors here
      CHECK(std::abs(mean[m] - closed[m]) <= std::max(5.0 * se, 1e-12));
    }
  }
}

TEST_CASE("greedy follows the spec'd hand execution") {
  Instance inst = orthonormal_instance(2, Vector::Constant(2, 0.5));
  const Problem problem = inst.problem(vec2(1.0, 0.5));
  const SolverTrajectory traj =
      run_greedy(problem, 1.0, 2, all_indices(*inst.family));
  CHECK(traj.chosen[0] == 0);
  CHECK(traj.chosen[1] == 1);
  CHECK(traj.sq_errors[0] == doctest::Approx(1.25));
  CHECK(traj.sq_errors[1] == doctest::Approx(0.25));
  CHECK(traj.sq_errors[2] == doctest::Approx(1.0 / 9.0));

  CHECK_THROWS_AS(run_greedy(problem, 1.0, 2, {}), std::invalid_argument);
  CHECK_THROWS_AS(run_greedy(problem, 0.0, 2, all_indices(*inst.family)), std::invalid_argument);
  CHECK_THROWS_AS(run_greedy(problem, 1.5, 2, all_indices(*inst.family)), std::invalid_argument);

  const Problem zero = inst.problem(Vector::Zero(2));
  const SolverTrajectory z = run_greedy(zero, 1.0, 5, all_indices(*inst.family));
  for (double e : z.sq_errors) CHECK(e == 0.0);
}

TEST_CASE("noisy runs degenerate to the noiseless path at sigma zero") {
  Vector weights(3);
  weights << 0.5, 0.3, 0.2;
  Instance inst = orthonormal_instance(3, weights);
  Vector target(3);
  target << 1, 2, 3;
  const Problem problem = inst.problem(target);
  const RandomStream stream(1234);
  NoiseSpec zero;
  zero.sigma = 0.0;
  const SolverTrajectory plain = run_random(problem, inst.measure, 40, stream);
  const SolverTrajectory noisy = run_noisy(problem, inst.measure, zero, 40, stream);
  CHECK(plain.sq_errors == noisy.sq_errors);
  CHECK(plain.chosen == noisy.chosen);
  CHECK(plain.xis == noisy.xis);
}

TEST_CASE("noise keeps the iteration away from the solution") {
  Instance inst = orthonormal_instance(4, Vector::Constant(4, 0.25));
  Vector target(4);
  target << 1, 1, 1, 1;
  const Problem problem = inst.problem(target);
  NoiseSpec noise;
  noise.sigma = 0.5;
  const int m_max = 300;
  const int runs = 50;
  double min_mean = 1e300;
  std::vector<double> mean(m_max + 1, 0.0);
  RandomStream root(5150);
  for (int r = 0; r < runs; ++r) {
    const SolverTrajectory traj = run_noisy(problem, inst.measure, noise, m_max, root.derive(r));
    for (int m = 0; m <= m_max; ++m) mean[m] += traj.sq_errors[m];
  }
  for (int m = 1; m <= m_max; ++m) min_mean = std::min(min_mean, mean[m] / runs);
  CHECK(min_mean > noise.sigma * noise.sigma / 4.0);
}

TEST_CASE("prescribed step schedule is applied verbatim") {
  Instance inst = orthonormal_instance(2, Vector::Constant(2, 0.5));
  const Problem problem = inst.problem(vec2(1, 1));
  NoiseSpec noise;
  noise.sigma = 0.0;
  noise.xi_schedule.optimal = false;
  noise.xi_schedule.xi0 = 0.7;
  const SolverTrajectory traj = run_noisy(problem, inst.measure, noise, 10, RandomStream(3));
  for (int m = 0; m < 10; ++m) {
    CHECK(traj.xis[m] == doctest::Approx(0.7 / (m + 1)));
  }
}
