#pragma once

#include <memory>
#include <vector>

#include "schwarz/hilbert.hpp"
#include "schwarz/measures.hpp"
#include "schwarz/types.hpp"

namespace schwarz {

/// How a run obtains its right-hand side information. `direct` forms the
/// error u - u_m explicitly; `functional` only ever evaluates the linear
/// functional F(v) = a(u, v) and a(u_m, v), which is what is available when
/// the solution is known through F alone. Both produce the same trajectory
/// up to round-off.
enum class RhsMode { direct, functional };

/// A quadratic variational problem posed over a subspace family. The exact
/// solution is stored so that runs can track their true error decay.
struct Problem {
  std::shared_ptr<const SubspaceFamily> family;
  Vector target;
  RhsMode rhs_mode = RhsMode::direct;
};

Problem make_problem(std::shared_ptr<const SubspaceFamily> family, Vector target,
                     RhsMode mode = RhsMode::direct);

/// Per-iteration record of a single run. sq_errors[m] is the squared a-norm
/// error after m steps (so sq_errors[0] = ||target||^2); chosen and xis hold
/// the selected index and step size of each update. Iterates are stored only
/// on request.
struct SolverTrajectory {
  std::vector<double> sq_errors;
  std::vector<int> chosen;
  std::vector<double> xis;
  std::vector<Vector> iterates;
};

struct SolverOptions {
  bool record_iterates = false;
};

/// Step-size schedule for the noisy variant: either the error-minimizing
/// step, or the prescribed decaying sequence xi_m = xi0 / (m + 1).
struct XiSchedule {
  bool optimal = true;
  double xi0 = 1.0;
};

/// Additive iterate noise with E||eps||^2 = sigma^2, isotropic in an
/// a-orthonormal basis.
struct NoiseSpec {
  double sigma = 0.0;
  XiSchedule xi_schedule{};
};

/// Averaging weight of the recursion, alpha_m = 1 - 1/(m+2).
double alpha(int m);

/// Error-minimizing step size for the update u' = alpha_m u_m + xi * direction:
/// (F(direction) - alpha_m a(u_m, direction)) / a(direction, direction),
/// and 0 for a zero direction.
double xi_optimal(const Problem& problem, const Vector& u_m, int m, const Vector& direction);

/// Randomized incremental correction: samples an index each step and applies
/// u_{m+1} = alpha_m u_m + xi_m R t with t the local residual solve of the
/// current error. On a zero correction direction the step degenerates to the
/// plain shrink u_{m+1} = alpha_m u_m.
SolverTrajectory run_random(const Problem& problem, const DiscreteMeasure& measure, int m_max,
                            RandomStream stream, const SolverOptions& options = {});

/// Stochastic orthogonal matching pursuit: the iterate is the a-orthogonal
/// projection of the target onto the span of all correction directions drawn
/// so far. Near-dependent directions (norm below 1e-12 ||target||) are not
/// added to the basis.
SolverTrajectory run_omp(const Problem& problem, const DiscreteMeasure& measure, int m_max,
                         RandomStream stream, const SolverOptions& options = {});

/// Weak-greedy variant: each step selects the pool index with the largest
/// local residual norm (which satisfies the weak-greedy rule for every
/// beta in (0,1]) and applies the same update as run_random.
SolverTrajectory run_greedy(const Problem& problem, double beta, int m_max,
                            const std::vector<int>& candidate_pool,
                            const SolverOptions& options = {});

/// run_random with independent zero-mean noise added to the iterate after
/// each update. The passed stream is split: substream 0 drives the index
/// draws (exactly as run_random uses it), substream 1 the noise, so
/// sigma = 0 reproduces run_random bitwise on the same stream argument.
SolverTrajectory run_noisy(const Problem& problem, const DiscreteMeasure& measure,
                           const NoiseSpec& noise, int m_max, RandomStream stream,
                           const SolverOptions& options = {});

} // namespace schwarz
