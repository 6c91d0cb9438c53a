#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "schwarz/instances.hpp"
#include "schwarz/solvers.hpp"
#include "schwarz/spectral.hpp"

namespace schwarz {

enum class SolverVariant { random, omp, greedy, noisy };

/// Which iteration to run and its parameters. The greedy pool defaults to
/// the full index set when left empty.
struct SolverSpec {
  SolverVariant variant = SolverVariant::random;
  double beta = 1.0;
  NoiseSpec noise{};
  std::vector<int> pool{};
};

SolverTrajectory run_variant(const Problem& problem, const DiscreteMeasure& measure,
                             const SolverSpec& spec, int m_max, RandomStream stream,
                             const SolverOptions& options = {});

/// Estimated (or exact) expected squared error per iteration.
struct ExpectationCurve {
  enum class Mode { monte_carlo, enumeration };
  std::vector<double> means;
  std::vector<double> stderrs;
  int runs = 0;
  Mode mode = Mode::monte_carlo;
};

/// Averages the squared-error trajectories of independent runs; run r uses
/// the substream derived from (seed, r), so results are reproducible and
/// independent of the thread count. threads <= 0 consults the
/// SCHWARZ_RAND_THREADS environment variable, then hardware concurrency.
ExpectationCurve mc_expectation(const Problem& problem, const DiscreteMeasure& measure,
                                const SolverSpec& spec, int m_max, int runs, std::uint64_t seed,
                                int threads = 0);

/// Exact expectation by summing the squared error over every sample sequence,
/// weighted by the product measure: the brute-force oracle for small index
/// sets. Refuses when the tree exceeds the node budget.
ExpectationCurve enumerate_expectation(const Problem& problem, const DiscreteMeasure& measure,
                                       const SolverSpec& spec, int m_max, double budget = 1e7);

/// One named bound (or scalar check) together with its verdict against a
/// measured curve.
struct BoundCheck {
  std::string name;
  std::vector<double> values; // bound curve; empty for scalar checks
  bool skipped = false;
  bool satisfied = false;
  double worst_margin_sigma = 0.0; // max over m of (mean - bound) / stderr
  std::string note;
};

/// Machine-checkable verdict collection for one experiment or suite.
struct BoundReport {
  std::string suite;
  std::string instance;
  std::uint64_t seed = 0;
  int runs = 0;
  bool low_power = false; // too few runs for the 3-sigma rule to mean much
  std::vector<BoundCheck> checks;

  bool all_satisfied() const;
};

/// Everything the theorem-bound formulas can consume. Optional entries
/// produce skipped curves instead of errors.
struct BoundInputs {
  double lambda = 1.0;
  double beta = 1.0;
  double norm_u = 0.0;
  std::optional<double> a2;
  std::optional<double> a1;
  std::map<double, double> hs; // s -> ||u||_{H^s}
  const SpectralDecomposition* decomp = nullptr; // enables the split-target curves
  const Vector* u = nullptr;
};

/// Emits the convergence-bound curves that the available norms support:
///   ec2     (lambda ||u||_A2 + ||u||)^2 / (m+1)
///   ec2a    ||u||_{H^1/2}^2 / (m+1)
///   cg1     2 ((lambda/beta)^2 ||u||_A1^2 + ||u||^2) / (m+1)
///   ecvr(s) (2(1+sqrt 2))^2 (m+1)^(-2s) ||u||_{H^s}^2   for each s < 1/2
///   ecv / ecva   split-target bounds with the spectral truncation choice
/// Bounds whose inputs are missing are returned with skipped = true.
std::vector<BoundCheck> bound_curves(const BoundInputs& inputs, int m_max);

/// Fills satisfied / worst_margin_sigma of a bound check against a curve
/// using the one-sided rule mean <= bound + 3 stderr.
void evaluate_check(BoundCheck& check, const ExpectationCurve& curve);

/// For a complete orthonormal atom system: sum_j a(u, e_j)^2 (1 - rho_j)^m,
/// the floor for any m-term method built from sampled atoms.
std::vector<double> lower_bound_curve(const Instance& instance, const Vector& u, int m_max);

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  int m_lo = 0;
  int m_hi = 0;
  bool window_shrunk = false;
};

/// Least-squares slope of log curve[m] against log(m+1) over [m_min, m_max].
/// Nonpositive entries are excluded (shrinking the window with a flag).
RateFit rate_fit(const std::vector<double>& curve, int m_min, int m_max);

/// CSV with the fixed column set
///   m, mean_sq_error, stderr, bound_ec2, bound_ec2a, bound_cg1, bound_ecvr, lower_bound
/// where columns without data stay empty. Output is deterministic.
void write_curve_csv(std::ostream& out, const ExpectationCurve& curve,
                     const std::map<std::string, std::vector<double>>& bound_columns);

/// JSON form of a report (instance descriptor, seed, runs, per-bound verdicts).
std::string report_to_json(const BoundReport& report);

struct VerifyConfig {
  std::uint64_t seed = 42;
  int threads = 0;
  double runs_scale = 1.0; // scales the default run counts of each suite
};

/// Named verification suites (see verify_suites()); "all" concatenates every
/// suite into one report per suite.
std::vector<BoundReport> verify(const std::string& suite, const VerifyConfig& config = {});
std::vector<std::string> verify_suites();

} // namespace schwarz
