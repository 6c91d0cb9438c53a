#include "schwarz/solvers.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

namespace schwarz {

namespace {

// The correction direction counts as zero (no step taken) when its a-norm
// does not exceed this fraction of the current error's a-norm.
constexpr double kZeroDirectionRel = 1e-14;

void validate_run_inputs(const Problem& problem, int m_max) {
  if (!problem.family) {
    throw std::invalid_argument("solver: problem has no subspace family");
  }
  if (problem.target.size() != problem.family->space().dim()) {
    throw std::invalid_argument("solver: target dimension does not match the space");
  }
  if (m_max < 0) {
    throw std::invalid_argument("solver: m_max must be nonnegative");
  }
}

void validate_measure(const Problem& problem, const DiscreteMeasure& measure) {
  if (measure.size() != problem.family->size()) {
    throw std::invalid_argument("solver: measure size does not match the subspace family");
  }
}

// Shared state of one incremental-correction run. Keeps the Gram image of
// the target so functional mode never touches the error vector directly.
class RecRunner {
public:
  explicit RecRunner(const Problem& problem)
      : problem_(problem),
        space_(problem.family->space()),
        u_m_(Vector::Zero(space_.dim())),
        g_target_(space_.gram_times(problem.target)) {}

  const Vector& iterate() const { return u_m_; }

  double sq_error() const {
    const double err = space_.norm(problem_.target - u_m_);
    return err * err;
  }

  // Local residual coefficients t with a_w(t, s) = a(u - u_m, R s).
  Vector residual(int index) const {
    const LocalSubspace& sub = problem_.family->subspace(index);
    if (problem_.rhs_mode == RhsMode::functional) {
      Vector rhs = sub.basis().transpose() * g_target_ -
                   sub.basis().transpose() * space_.gram_times(u_m_);
      return sub.solve_local(rhs);
    }
    return apply_T(*problem_.family, index, problem_.target - u_m_);
  }

  double residual_norm(int index) const {
    return problem_.family->subspace(index).local_norm(residual(index));
  }

  // One update u_{m+1} = alpha_m u_m + xi * R t with the minimizing step, or
  // the plain shrink when the direction vanishes. Returns the applied xi.
  double step_optimal(int m, int index) {
    Vector direction = apply_R(*problem_.family, index, residual(index));
    const double xi = minimizing_xi(m, direction);
    u_m_ = alpha(m) * u_m_ + xi * direction;
    return xi;
  }

  // One update with an externally prescribed step size.
  double step_prescribed(int m, int index, double xi) {
    Vector direction = apply_R(*problem_.family, index, residual(index));
    u_m_ = alpha(m) * u_m_ + xi * direction;
    return xi;
  }

  void add_to_iterate(const Vector& perturbation) { u_m_ += perturbation; }

private:
  double minimizing_xi(int m, const Vector& direction) const {
    const double direction_norm = space_.norm(direction);
    const double error_norm = space_.norm(problem_.target - u_m_);
    if (direction_norm <= kZeroDirectionRel * error_norm) {
      return 0.0;
    }
    const Vector g_dir = space_.gram_times(direction);
    const double dd = direction.dot(g_dir);
    if (problem_.rhs_mode == RhsMode::functional) {
      return (g_target_.dot(direction) - alpha(m) * u_m_.dot(g_dir)) / dd;
    }
    const Vector w = problem_.target - alpha(m) * u_m_;
    return w.dot(g_dir) / dd;
  }

  const Problem& problem_;
  const InnerProductSpace& space_;
  Vector u_m_;
  Vector g_target_;
};

void record_start(SolverTrajectory& traj, const RecRunner& runner, int m_max,
                  const SolverOptions& options) {
  traj.sq_errors.reserve(static_cast<std::size_t>(m_max) + 1);
  traj.chosen.reserve(static_cast<std::size_t>(m_max));
  traj.xis.reserve(static_cast<std::size_t>(m_max));
  traj.sq_errors.push_back(runner.sq_error());
  if (options.record_iterates) {
    traj.iterates.reserve(static_cast<std::size_t>(m_max) + 1);
    traj.iterates.push_back(runner.iterate());
  }
}

void record_step(SolverTrajectory& traj, const RecRunner& runner, int index, double xi,
                 const SolverOptions& options) {
  traj.sq_errors.push_back(runner.sq_error());
  traj.chosen.push_back(index);
  traj.xis.push_back(xi);
  if (options.record_iterates) {
    traj.iterates.push_back(runner.iterate());
  }
}

} // namespace

Problem make_problem(std::shared_ptr<const SubspaceFamily> family, Vector target, RhsMode mode) {
  if (!family) {
    throw std::invalid_argument("make_problem: null family");
  }
  if (target.size() != family->space().dim()) {
    throw std::invalid_argument("make_problem: target dimension does not match the space");
  }
  return Problem{std::move(family), std::move(target), mode};
}

double alpha(int m) {
  if (m < 0) {
    throw std::invalid_argument("alpha: negative iteration index");
  }
  return 1.0 - 1.0 / (m + 2.0);
}

double xi_optimal(const Problem& problem, const Vector& u_m, int m, const Vector& direction) {
  const InnerProductSpace& space = problem.family->space();
  const double dd = space.inner(direction, direction);
  if (!(dd > 0.0)) {
    return 0.0;
  }
  const Vector g_dir = space.gram_times(direction);
  if (problem.rhs_mode == RhsMode::functional) {
    return (problem.target.dot(space.gram_times(direction)) - alpha(m) * u_m.dot(g_dir)) / dd;
  }
  const Vector w = problem.target - alpha(m) * u_m;
  return w.dot(g_dir) / dd;
}

SolverTrajectory run_random(const Problem& problem, const DiscreteMeasure& measure, int m_max,
                            RandomStream stream, const SolverOptions& options) {
  validate_run_inputs(problem, m_max);
  validate_measure(problem, measure);
  RandomStream sampling = stream.derive(0);

  RecRunner runner(problem);
  SolverTrajectory traj;
  record_start(traj, runner, m_max, options);
  for (int m = 0; m < m_max; ++m) {
    const int index = measure.sample(sampling);
    const double xi = runner.step_optimal(m, index);
    record_step(traj, runner, index, xi, options);
  }
  return traj;
}

SolverTrajectory run_omp(const Problem& problem, const DiscreteMeasure& measure, int m_max,
                         RandomStream stream, const SolverOptions& options) {
  validate_run_inputs(problem, m_max);
  validate_measure(problem, measure);
  RandomStream sampling = stream.derive(0);

  const InnerProductSpace& space = problem.family->space();
  const double target_norm = space.norm(problem.target);
  const double reject_tol = 1e-12 * target_norm;

  std::vector<Vector> basis; // a-orthonormal basis of the correction span
  Vector u_m = Vector::Zero(space.dim());

  SolverTrajectory traj;
  traj.sq_errors.reserve(static_cast<std::size_t>(m_max) + 1);
  const double err0 = space.norm(problem.target);
  traj.sq_errors.push_back(err0 * err0);
  if (options.record_iterates) traj.iterates.push_back(u_m);

  for (int m = 0; m < m_max; ++m) {
    const int index = measure.sample(sampling);
    const Vector error = problem.target - u_m;
    Vector direction = apply_R(*problem.family, index, apply_T(*problem.family, index, error));

    // Step size the rank-one update would have taken; kept for diagnostics
    // and for the projection-optimality comparison.
    const double xi = xi_optimal(problem, u_m, m, direction);

    // Modified Gram-Schmidt with a re-orthogonalization pass.
    Vector q = direction;
    for (int pass = 0; pass < 2; ++pass) {
      for (const Vector& b : basis) {
        q -= space.inner(q, b) * b;
      }
    }
    const double qn = space.norm(q);
    if (qn > reject_tol) {
      q /= qn;
      u_m += space.inner(problem.target, q) * q;
      basis.push_back(std::move(q));
    }

    const double err = space.norm(problem.target - u_m);
    traj.sq_errors.push_back(err * err);
    traj.chosen.push_back(index);
    traj.xis.push_back(xi);
    if (options.record_iterates) traj.iterates.push_back(u_m);
  }
  return traj;
}

SolverTrajectory run_greedy(const Problem& problem, double beta, int m_max,
                            const std::vector<int>& candidate_pool,
                            const SolverOptions& options) {
  validate_run_inputs(problem, m_max);
  if (candidate_pool.empty()) {
    throw std::invalid_argument("run_greedy: empty candidate pool");
  }
  if (!(beta > 0.0 && beta <= 1.0)) {
    throw std::invalid_argument("run_greedy: beta must lie in (0, 1]");
  }
  for (int index : candidate_pool) {
    if (index < 0 || index >= problem.family->size()) {
      throw std::invalid_argument("run_greedy: pool index " + std::to_string(index) +
                                  " out of range");
    }
  }

  RecRunner runner(problem);
  SolverTrajectory traj;
  record_start(traj, runner, m_max, options);
  for (int m = 0; m < m_max; ++m) {
    // Taking the exact pool maximum satisfies the weak-greedy rule for
    // every beta; ties break toward the first index.
    int best = candidate_pool.front();
    double best_norm = runner.residual_norm(best);
    for (std::size_t i = 1; i < candidate_pool.size(); ++i) {
      const double rn = runner.residual_norm(candidate_pool[i]);
      if (rn > best_norm) {
        best = candidate_pool[i];
        best_norm = rn;
      }
    }
    const double xi = runner.step_optimal(m, best);
    record_step(traj, runner, best, xi, options);
  }
  return traj;
}

SolverTrajectory run_noisy(const Problem& problem, const DiscreteMeasure& measure,
                           const NoiseSpec& noise, int m_max, RandomStream stream,
                           const SolverOptions& options) {
  validate_run_inputs(problem, m_max);
  validate_measure(problem, measure);
  if (noise.sigma < 0.0) {
    throw std::invalid_argument("run_noisy: sigma must be nonnegative");
  }
  RandomStream sampling = stream.derive(0);
  RandomStream gauss = stream.derive(1);

  const InnerProductSpace& space = problem.family->space();
  const int dim = space.dim();
  const double coord_scale = noise.sigma / std::sqrt(static_cast<double>(dim));

  RecRunner runner(problem);
  SolverTrajectory traj;
  record_start(traj, runner, m_max, options);
  for (int m = 0; m < m_max; ++m) {
    const int index = measure.sample(sampling);
    const double xi = noise.xi_schedule.optimal
                          ? runner.step_optimal(m, index)
                          : runner.step_prescribed(m, index, noise.xi_schedule.xi0 / (m + 1.0));
    if (noise.sigma > 0.0) {
      Vector g(dim);
      for (int i = 0; i < dim; ++i) g(i) = gauss.next_gaussian();
      // Coordinates of an a-orthonormal basis image: eps = sigma/sqrt(d) U^-1 g
      // with U the upper Cholesky factor, so E||eps||_a^2 = sigma^2.
      Vector eps = coord_scale * space.chol().matrixU().solve(g);
      runner.add_to_iterate(eps);
    }
    record_step(traj, runner, index, xi, options);
  }
  return traj;
}

} // namespace schwarz
