#include "schwarz/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <stdexcept>
#include <string>
#include <thread>

#include <nlohmann/json.hpp>

namespace schwarz {

namespace {

std::vector<int> full_pool(const Problem& problem) {
  std::vector<int> pool(static_cast<std::size_t>(problem.family->size()));
  for (int i = 0; i < problem.family->size(); ++i) pool[static_cast<std::size_t>(i)] = i;
  return pool;
}

int resolve_threads(int requested, int runs) {
  int threads = requested;
  if (threads <= 0) {
    if (const char* env = std::getenv("SCHWARZ_RAND_THREADS")) {
      threads = std::atoi(env);
    }
  }
  if (threads <= 0) {
    threads = static_cast<int>(std::thread::hardware_concurrency());
  }
  return std::clamp(threads, 1, std::max(1, runs));
}

} // namespace

SolverTrajectory run_variant(const Problem& problem, const DiscreteMeasure& measure,
                             const SolverSpec& spec, int m_max, RandomStream stream,
                             const SolverOptions& options) {
  switch (spec.variant) {
    case SolverVariant::random:
      return run_random(problem, measure, m_max, stream, options);
    case SolverVariant::omp:
      return run_omp(problem, measure, m_max, stream, options);
    case SolverVariant::greedy:
      return run_greedy(problem, spec.beta, m_max, spec.pool.empty() ? full_pool(problem) : spec.pool,
                        options);
    case SolverVariant::noisy:
      return run_noisy(problem, measure, spec.noise, m_max, stream, options);
  }
  throw std::invalid_argument("run_variant: unknown solver variant");
}

ExpectationCurve mc_expectation(const Problem& problem, const DiscreteMeasure& measure,
                                const SolverSpec& spec, int m_max, int runs, std::uint64_t seed,
                                int threads) {
  if (runs < 1) {
    throw std::invalid_argument("mc_expectation: runs must be at least 1");
  }
  const int n_threads = resolve_threads(threads, runs);
  const RandomStream root(seed);

  // One row per run; filled in parallel, reduced in run order afterwards so
  // the result never depends on scheduling.
  Matrix samples(runs, m_max + 1);
  auto worker = [&](int lo, int hi) {
    for (int r = lo; r < hi; ++r) {
      SolverTrajectory traj = run_variant(problem, measure, spec, m_max,
                                          root.derive(static_cast<std::uint64_t>(r)));
      for (int m = 0; m <= m_max; ++m) {
        samples(r, m) = traj.sq_errors[static_cast<std::size_t>(m)];
      }
    }
  };
  if (n_threads == 1) {
    worker(0, runs);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(n_threads));
    const int chunk = (runs + n_threads - 1) / n_threads;
    for (int t = 0; t < n_threads; ++t) {
      const int lo = t * chunk;
      const int hi = std::min(runs, lo + chunk);
      if (lo >= hi) break;
      pool.emplace_back(worker, lo, hi);
    }
    for (auto& th : pool) th.join();
  }

  ExpectationCurve curve;
  curve.mode = ExpectationCurve::Mode::monte_carlo;
  curve.runs = runs;
  curve.means.resize(static_cast<std::size_t>(m_max) + 1);
  curve.stderrs.resize(static_cast<std::size_t>(m_max) + 1);
  for (int m = 0; m <= m_max; ++m) {
    const double mean = samples.col(m).sum() / runs;
    curve.means[static_cast<std::size_t>(m)] = mean;
    if (runs > 1) {
      const double ss = (samples.col(m).array() - mean).square().sum();
      curve.stderrs[static_cast<std::size_t>(m)] =
          std::sqrt(std::max(0.0, ss / (runs - 1)) / runs);
    } else {
      curve.stderrs[static_cast<std::size_t>(m)] = 0.0;
    }
  }
  return curve;
}

namespace {

// Enumeration keeps its own update rule (projection form, via psi_tilde)
// so the oracle does not share the solvers' stepping code.
struct RecEnumerator {
  const Problem& problem;
  const DiscreteMeasure& measure;
  int m_max;
  std::vector<double> acc;

  void walk(const Vector& u_m, int m, double prob) {
    if (m == m_max) return;
    const double a = alpha(m);
    const Vector w = problem.target - a * u_m;
    for (int i = 0; i < measure.size(); ++i) {
      const Vector psi = psi_tilde(*problem.family, i, problem.target - u_m);
      Vector next = a * u_m;
      if (psi.squaredNorm() > 0.0) {
        next += problem.family->space().inner(w, psi) * psi;
      }
      const double p = prob * measure.weight(i);
      const double err = problem.family->space().norm(problem.target - next);
      acc[static_cast<std::size_t>(m) + 1] += p * err * err;
      walk(next, m + 1, p);
    }
  }
};

struct OmpEnumerator {
  const Problem& problem;
  const DiscreteMeasure& measure;
  int m_max;
  double reject_tol;
  std::vector<double> acc;

  void walk(const Vector& u_m, const std::vector<Vector>& basis, int m, double prob) {
    if (m == m_max) return;
    const InnerProductSpace& space = problem.family->space();
    for (int i = 0; i < measure.size(); ++i) {
      const Vector error = problem.target - u_m;
      Vector q = apply_R(*problem.family, i, apply_T(*problem.family, i, error));
      for (int pass = 0; pass < 2; ++pass) {
        for (const Vector& b : basis) q -= space.inner(q, b) * b;
      }
      Vector next = u_m;
      std::vector<Vector> next_basis = basis;
      const double qn = space.norm(q);
      if (qn > reject_tol) {
        q /= qn;
        next += space.inner(problem.target, q) * q;
        next_basis.push_back(q);
      }
      const double p = prob * measure.weight(i);
      const double err = space.norm(problem.target - next);
      acc[static_cast<std::size_t>(m) + 1] += p * err * err;
      walk(next, next_basis, m + 1, p);
    }
  }
};

} // namespace

ExpectationCurve enumerate_expectation(const Problem& problem, const DiscreteMeasure& measure,
                                       const SolverSpec& spec, int m_max, double budget) {
  if (m_max < 0) {
    throw std::invalid_argument("enumerate_expectation: m_max must be nonnegative");
  }
  if (measure.size() != problem.family->size()) {
    throw std::invalid_argument("enumerate_expectation: measure does not match the family");
  }

  ExpectationCurve curve;
  curve.mode = ExpectationCurve::Mode::enumeration;
  curve.runs = 0;
  curve.stderrs.assign(static_cast<std::size_t>(m_max) + 1, 0.0);

  if (spec.variant == SolverVariant::greedy) {
    // Deterministic: the single greedy trajectory is its own expectation.
    SolverTrajectory traj =
        run_greedy(problem, spec.beta, m_max, spec.pool.empty() ? full_pool(problem) : spec.pool);
    curve.means = traj.sq_errors;
    return curve;
  }
  if (spec.variant == SolverVariant::noisy &&
      (spec.noise.sigma != 0.0 || !spec.noise.xi_schedule.optimal)) {
    throw std::invalid_argument(
        "enumerate_expectation: only noiseless optimal-step runs can be enumerated");
  }

  double nodes = 0.0;
  double level = 1.0;
  for (int m = 0; m < m_max; ++m) {
    level *= measure.size();
    nodes += level;
    if (nodes > budget) {
      throw std::invalid_argument(
          "enumerate_expectation: sequence tree needs about " + std::to_string(nodes) +
          " nodes, over the budget of " + std::to_string(budget) +
          "; lower m_max or raise the budget");
    }
  }

  const InnerProductSpace& space = problem.family->space();
  const double u0 = space.norm(problem.target);
  std::vector<double> acc(static_cast<std::size_t>(m_max) + 1, 0.0);
  acc[0] = u0 * u0;

  if (spec.variant == SolverVariant::omp) {
    OmpEnumerator in{problem, measure, m_max, 1e-12 * u0, acc};
    in.walk(Vector::Zero(space.dim()), {}, 0, 1.0);
    curve.means = std::move(in.acc);
  } else {
    RecEnumerator in{problem, measure, m_max, acc};
    in.walk(Vector::Zero(space.dim()), 0, 1.0);
    curve.means = std::move(in.acc);
  }
  return curve;
}

bool BoundReport::all_satisfied() const {
  for (const auto& check : checks) {
    if (!check.skipped && !check.satisfied) return false;
  }
  return true;
}

std::vector<BoundCheck> bound_curves(const BoundInputs& inputs, int m_max) {
  std::vector<BoundCheck> out;
  auto curve_over_m = [m_max](auto&& f) {
    std::vector<double> v(static_cast<std::size_t>(m_max) + 1);
    for (int m = 0; m <= m_max; ++m) v[static_cast<std::size_t>(m)] = f(m);
    return v;
  };

  {
    BoundCheck ec2{.name = "ec2"};
    if (inputs.a2) {
      const double c = inputs.lambda * *inputs.a2 + inputs.norm_u;
      ec2.values = curve_over_m([c](int m) { return c * c / (m + 1.0); });
    } else {
      ec2.skipped = true;
      ec2.note = "needs the a2 norm";
    }
    out.push_back(std::move(ec2));
  }
  {
    BoundCheck ec2a{.name = "ec2a"};
    const auto it = inputs.hs.find(0.5);
    if (it != inputs.hs.end()) {
      const double c = it->second * it->second;
      ec2a.values = curve_over_m([c](int m) { return c / (m + 1.0); });
    } else {
      ec2a.skipped = true;
      ec2a.note = "needs the H^1/2 norm";
    }
    out.push_back(std::move(ec2a));
  }
  {
    BoundCheck cg1{.name = "cg1"};
    if (inputs.a1) {
      const double lb = inputs.lambda / inputs.beta;
      const double c = 2.0 * (lb * lb * *inputs.a1 * *inputs.a1 + inputs.norm_u * inputs.norm_u);
      cg1.values = curve_over_m([c](int m) { return c / (m + 1.0); });
    } else {
      cg1.skipped = true;
      cg1.note = "needs the a1 norm (or an upper bound)";
    }
    out.push_back(std::move(cg1));
  }
  for (const auto& [s, norm] : inputs.hs) {
    if (!(s > 0.0 && s < 0.5)) continue;
    BoundCheck ecvr{.name = "ecvr(s=" + std::to_string(s) + ")"};
    const double kappa = 2.0 * (1.0 + std::sqrt(2.0));
    const double c = kappa * kappa * norm * norm;
    ecvr.values = curve_over_m([c, s](int m) { return c * std::pow(m + 1.0, -2.0 * s); });
    out.push_back(std::move(ecvr));
  }
  {
    BoundCheck ecv{.name = "ecv"};
    BoundCheck ecva{.name = "ecva"};
    if (inputs.decomp != nullptr && inputs.u != nullptr) {
      // Split target h_m: the part of the eigenexpansion with mu_k >= 1/(m+1).
      const Vector c = inputs.decomp->coefficients(*inputs.u);
      const Vector& mu = inputs.decomp->eigenvalues;
      const double lambda = inputs.lambda;
      const double norm_u = inputs.norm_u;
      auto split_bound = [&](int m, bool with_lambda) {
        const double threshold = 1.0 / (m + 1.0);
        double h_sq = 0.0, h_half_sq = 0.0, tail_sq = 0.0;
        for (int k = 0; k < inputs.decomp->rank; ++k) {
          if (mu(k) >= threshold) {
            h_sq += c(k) * c(k);
            h_half_sq += c(k) * c(k) / mu(k);
          } else {
            tail_sq += c(k) * c(k);
          }
        }
        const double h_norm = std::sqrt(h_sq);
        const double h_a2 = std::sqrt(h_half_sq);
        const double head = with_lambda ? (lambda * h_a2 + h_norm) * (lambda * h_a2 + h_norm)
                                        : h_half_sq;
        const double root = std::sqrt(std::max(0.0, tail_sq)) +
                            std::sqrt(head + norm_u * norm_u) / std::sqrt(m + 1.0);
        return 4.0 * root * root;
      };
      ecv.values = curve_over_m([&](int m) { return split_bound(m, true); });
      ecva.values = curve_over_m([&](int m) { return split_bound(m, false); });
    } else {
      ecv.skipped = ecva.skipped = true;
      ecv.note = ecva.note = "needs the spectral decomposition of the target";
    }
    out.push_back(std::move(ecv));
    out.push_back(std::move(ecva));
  }
  return out;
}

void evaluate_check(BoundCheck& check, const ExpectationCurve& curve) {
  if (check.skipped) return;
  if (check.values.size() != curve.means.size()) {
    throw std::invalid_argument("evaluate_check: bound and curve lengths differ");
  }
  bool ok = true;
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t m = 0; m < curve.means.size(); ++m) {
    const double gap = curve.means[m] - check.values[m];
    const double se = curve.stderrs[m];
    if (se > 0.0) {
      worst = std::max(worst, gap / se);
      ok = ok && gap <= 3.0 * se;
    } else {
      const double tol = 1e-12 * std::max(1.0, std::abs(check.values[m]));
      if (gap > tol) {
        ok = false;
        worst = std::numeric_limits<double>::infinity();
      }
    }
  }
  check.satisfied = ok;
  check.worst_margin_sigma = worst;
}

std::vector<double> lower_bound_curve(const Instance& instance, const Vector& u, int m_max) {
  if (!instance.orthonormal_atoms) {
    throw std::invalid_argument("lower_bound_curve: needs a complete orthonormal atom system");
  }
  const Vector c = instance.atoms.transpose() * instance.family->space().gram_times(u);
  const Vector& rho = instance.measure.weights();
  std::vector<double> out(static_cast<std::size_t>(m_max) + 1);
  for (int m = 0; m <= m_max; ++m) {
    double acc = 0.0;
    for (int j = 0; j < c.size(); ++j) {
      acc += c(j) * c(j) * std::pow(1.0 - rho(j), m);
    }
    out[static_cast<std::size_t>(m)] = acc;
  }
  return out;
}

RateFit rate_fit(const std::vector<double>& curve, int m_min, int m_max) {
  if (m_min < 0 || m_max >= static_cast<int>(curve.size()) || m_min >= m_max) {
    throw std::invalid_argument("rate_fit: bad fit window");
  }
  RateFit fit;
  fit.m_lo = m_min;
  fit.m_hi = m_max;
  std::vector<double> xs, ys;
  for (int m = m_min; m <= m_max; ++m) {
    const double v = curve[static_cast<std::size_t>(m)];
    if (v > 0.0) {
      xs.push_back(std::log(m + 1.0));
      ys.push_back(std::log(v));
    } else {
      fit.window_shrunk = true;
    }
  }
  if (xs.size() < 2) {
    throw std::runtime_error("rate_fit: fewer than two positive entries in the window");
  }
  const double n = static_cast<double>(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  const double denom = n * sxx - sx * sx;
  fit.slope = (n * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.slope * sx) / n;
  return fit;
}

void write_curve_csv(std::ostream& out, const ExpectationCurve& curve,
                     const std::map<std::string, std::vector<double>>& bound_columns) {
  static const char* kColumns[] = {"bound_ec2", "bound_ec2a", "bound_cg1", "bound_ecvr",
                                   "lower_bound"};
  out << "m,mean_sq_error,stderr";
  for (const char* col : kColumns) out << ',' << col;
  out << '\n';
  char buf[64];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out << buf;
  };
  for (std::size_t m = 0; m < curve.means.size(); ++m) {
    out << m << ',';
    put(curve.means[m]);
    out << ',';
    put(curve.stderrs[m]);
    for (const char* col : kColumns) {
      out << ',';
      const auto it = bound_columns.find(col);
      if (it != bound_columns.end() && m < it->second.size()) {
        put(it->second[m]);
      }
    }
    out << '\n';
  }
}

std::string report_to_json(const BoundReport& report) {
  nlohmann::json j;
  j["suite"] = report.suite;
  j["instance"] = report.instance;
  j["seed"] = report.seed;
  j["runs"] = report.runs;
  j["low_power"] = report.low_power;
  j["all_satisfied"] = report.all_satisfied();
  j["checks"] = nlohmann::json::array();
  for (const auto& check : report.checks) {
    nlohmann::json c;
    c["name"] = check.name;
    c["skipped"] = check.skipped;
    c["satisfied"] = check.satisfied;
    if (std::isfinite(check.worst_margin_sigma)) {
      c["worst_margin_sigma"] = check.worst_margin_sigma;
    } else {
      c["worst_margin_sigma"] = check.worst_margin_sigma > 0 ? "inf" : "-inf";
    }
    if (!check.note.empty()) c["note"] = check.note;
    j["checks"].push_back(std::move(c));
  }
  return j.dump(2);
}

} // namespace schwarz
