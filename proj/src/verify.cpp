#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "schwarz/harness.hpp"

namespace schwarz {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

BoundCheck scalar_check(std::string name, bool satisfied, std::string note) {
  BoundCheck check;
  check.name = std::move(name);
  check.satisfied = satisfied;
  check.note = std::move(note);
  return check;
}

BoundCheck runtime_check(Clock::time_point start, double limit_s) {
  const double elapsed = seconds_since(start);
  return scalar_check("runtime", elapsed < limit_s,
                      format_double(elapsed) + " s (limit " + format_double(limit_s) + " s)");
}

Vector uniform_weights(int n) { return Vector::Constant(n, 1.0 / n); }

Vector geometric_weights(int n, double ratio) {
  Vector w(n);
  double v = 1.0;
  for (int i = 0; i < n; ++i) {
    w(i) = v;
    v *= ratio;
  }
  return w / w.sum();
}

Vector random_weights(int n, RandomStream& stream) {
  Vector w(n);
  for (int i = 0; i < n; ++i) w(i) = 0.05 + stream.next_u01();
  return w / w.sum();
}

Vector random_gaussian(int n, RandomStream& stream) {
  Vector v(n);
  for (int i = 0; i < n; ++i) v(i) = stream.next_gaussian();
  return v;
}

int scaled_runs(int base, const VerifyConfig& config) {
  return std::max(2, static_cast<int>(base * config.runs_scale));
}

// Curve check against "mean <= bound + 3 stderr" with a readable margin note.
BoundCheck curve_check(std::string name, std::vector<double> bound,
                       const ExpectationCurve& curve) {
  BoundCheck check;
  check.name = std::move(name);
  check.values = std::move(bound);
  evaluate_check(check, curve);
  check.note = "worst margin " + format_double(check.worst_margin_sigma) + " sigma";
  return check;
}

// ---------------------------------------------------------------------------
// Suite: exact enumeration on the two-dimensional uniform setting.
// ---------------------------------------------------------------------------
BoundReport suite_oracle_d2(const VerifyConfig& config) {
  const auto start = Clock::now();
  BoundReport report;
  report.suite = "oracle-d2";
  report.instance = "orthonormal d=2, uniform weights, target e_1";
  report.seed = config.seed;

  Instance inst = orthonormal_instance(2, uniform_weights(2));
  Vector u(2);
  u << 1.0, 0.0;
  const Problem problem = inst.problem(u);

  const int m_max = 8;
  const ExpectationCurve exact =
      enumerate_expectation(problem, inst.measure, SolverSpec{}, m_max);
  const double expected[3] = {1.0, 0.5, 11.0 / 36.0};
  double worst = 0.0;
  for (int m = 0; m <= 2; ++m) {
    worst = std::max(worst, std::abs(exact.means[static_cast<std::size_t>(m)] - expected[m]));
  }
  report.checks.push_back(scalar_check("enum-values", worst <= 1e-12,
                                       "max deviation " + format_double(worst)));

  const int runs = scaled_runs(10000, config);
  report.runs = runs;
  const ExpectationCurve mc =
      mc_expectation(problem, inst.measure, SolverSpec{}, m_max, runs, config.seed, config.threads);
  bool agrees = true;
  double worst_sigma = 0.0;
  for (int m = 0; m <= m_max; ++m) {
    const double gap = std::abs(mc.means[static_cast<std::size_t>(m)] -
                                exact.means[static_cast<std::size_t>(m)]);
    const double se = mc.stderrs[static_cast<std::size_t>(m)];
    if (se > 0.0) {
      worst_sigma = std::max(worst_sigma, gap / se);
      agrees = agrees && gap <= 4.0 * se;
    } else {
      agrees = agrees && gap <= 1e-12;
    }
  }
  report.checks.push_back(scalar_check("mc-agrees-4sigma", agrees,
                                       "worst " + format_double(worst_sigma) + " sigma over " +
                                           std::to_string(runs) + " runs"));
  report.checks.push_back(runtime_check(start, 1.0));
  return report;
}

// ---------------------------------------------------------------------------
// Suite: O(1/m) rate on the d=16 uniform orthonormal setting.
// ---------------------------------------------------------------------------
BoundReport suite_theorem1_orthonormal(const VerifyConfig& config) {
  const auto start = Clock::now();
  BoundReport report;
  report.suite = "theorem1-orthonormal";
  report.instance = "orthonormal d=16, uniform weights, unit H^1/2 target";
  report.seed = config.seed;

  const int d = 16;
  Instance inst = orthonormal_instance(d, uniform_weights(d));
  auto space = std::make_shared<InnerProductSpace>(inst.family->space());
  const SpectralDecomposition decomp = spectral_decomp(inst.covariance(), space);

  RandomStream coeff_stream = RandomStream(config.seed).derive(1001);
  const Vector u = make_hs_element(decomp, 0.5, coeff_stream);
  const Problem problem = inst.problem(u);

  const int m_max = 256;
  const int runs = scaled_runs(2000, config);
  report.runs = runs;
  const ExpectationCurve mc =
      mc_expectation(problem, inst.measure, SolverSpec{}, m_max, runs, config.seed, config.threads);

  const double hs_half = hs_norm(u, 0.5, decomp); // 1 by construction
  BoundInputs inputs;
  inputs.lambda = inst.family->lambda();
  inputs.norm_u = inst.family->space().norm(u);
  inputs.a2 = a2_norm(*inst.family, inst.measure, u);
  inputs.hs[0.5] = hs_half;
  for (auto& check : bound_curves(inputs, m_max)) {
    if (check.name == "ec2a" || check.name == "ec2") {
      evaluate_check(check, mc);
      check.note = "worst margin " + format_double(check.worst_margin_sigma) + " sigma";
      report.checks.push_back(std::move(check));
    }
  }

  const RateFit fit = rate_fit(mc.means, 16, 256);
  const bool slope_ok = fit.slope >= -1.15 && fit.slope <= -0.85;
  std::string note = "fitted slope " + format_double(fit.slope) + " on [16,256], window [-1.15,-0.85]";
  if (!slope_ok) {
    note += "; at fixed dimension the uniform setting leaves the 1/m regime once every "
            "direction has been visited a few times (m of order 2d), so the windowed decay is "
            "steeper than 1/m while the bound above still holds";
  }
  report.checks.push_back(scalar_check("rate-slope", slope_ok, std::move(note)));
  report.checks.push_back(runtime_check(start, 30.0));
  return report;
}

// ---------------------------------------------------------------------------
// Suite: exact OMP expectation and the sampling floor.
// ---------------------------------------------------------------------------
BoundReport suite_omp_optimality(const VerifyConfig& config) {
  BoundReport report;
  report.suite = "omp-optimality";
  report.instance = "orthonormal d=2,3; uniform and skewed weights";
  report.seed = config.seed;

  RandomStream stream(config.seed);
  double worst_eq = 0.0;
  double worst_dom = 0.0;
  const int m_max = 8;
  for (int d : {2, 3}) {
    std::vector<Vector> weight_choices;
    weight_choices.push_back(uniform_weights(d));
    Vector skewed(d);
    for (int j = 0; j < d; ++j) skewed(j) = std::pow(2.0, j);
    weight_choices.push_back(skewed / skewed.sum());
    for (const Vector& w : weight_choices) {
      Instance inst = orthonormal_instance(d, w);
      for (int trial = 0; trial < 3; ++trial) {
        const Vector u = random_gaussian(d, stream);
        const Problem problem = inst.problem(u);
        const std::vector<double> floor_curve = lower_bound_curve(inst, u, m_max);

        SolverSpec omp;
        omp.variant = SolverVariant::omp;
        const ExpectationCurve omp_curve =
            enumerate_expectation(problem, inst.measure, omp, m_max);
        const ExpectationCurve rec_curve =
            enumerate_expectation(problem, inst.measure, SolverSpec{}, m_max);
        for (int m = 0; m <= m_max; ++m) {
          const auto mi = static_cast<std::size_t>(m);
          worst_eq = std::max(worst_eq, std::abs(omp_curve.means[mi] - floor_curve[mi]));
          worst_dom = std::max(worst_dom, floor_curve[mi] - rec_curve.means[mi]);
        }
      }
    }
  }
  report.checks.push_back(scalar_check("omp-attains-floor", worst_eq <= 1e-12,
                                       "max |enumerated - closed form| = " +
                                           format_double(worst_eq)));
  report.checks.push_back(scalar_check("rec-dominates-floor", worst_dom <= 1e-12,
                                       "max floor excess " + format_double(worst_dom)));
  return report;
}

// ---------------------------------------------------------------------------
// Suite: representation norm equals the spectral norm at exponent 1/2.
// ---------------------------------------------------------------------------
BoundReport suite_theorem3_norms(const VerifyConfig& config) {
  BoundReport report;
  report.suite = "theorem3-norms";
  report.instance = "two-atom d=2 and random 16-atom frame in d=8";
  report.seed = config.seed;

  RandomStream stream = RandomStream(config.seed).derive(3001);

  // Hand-checkable two-atom dictionary.
  auto space2 = std::make_shared<InnerProductSpace>(InnerProductSpace::euclidean(2));
  Matrix atoms2(2, 2);
  atoms2 << 1.0, 1.0 / std::sqrt(2.0), 0.0, 1.0 / std::sqrt(2.0);
  Instance two_atoms = unit_dictionary_instance(space2, atoms2, uniform_weights(2));
  Vector e2(2);
  e2 << 0.0, 1.0;
  const double a2_e2 = a2_norm(*two_atoms.family, two_atoms.measure, e2);
  report.checks.push_back(scalar_check("two-atom-a2-squared-6",
                                       std::abs(a2_e2 * a2_e2 - 6.0) <= 1e-8 * 6.0,
                                       "got " + format_double(a2_e2 * a2_e2)));

  auto identity_deviation = [&](const Instance& inst, int trials) {
    auto sp = std::make_shared<InnerProductSpace>(inst.family->space());
    const SpectralDecomposition decomp = spectral_decomp(inst.covariance(), sp);
    const Matrix cov = inst.covariance();
    double worst = 0.0;
    for (int t = 0; t < trials; ++t) {
      // u = L g is representable by construction.
      const Vector u = cov * random_gaussian(inst.family->space().dim(), stream);
      const double a2 = a2_norm(*inst.family, inst.measure, u);
      const double hs = hs_norm(u, 0.5, decomp);
      worst = std::max(worst, std::abs(a2 * a2 - hs * hs) / (hs * hs));
    }
    return worst;
  };

  const double worst2 = identity_deviation(two_atoms, 200);
  report.checks.push_back(scalar_check("identity-two-atom", worst2 <= 1e-8,
                                       "worst relative gap " + format_double(worst2)));

  auto space8 = std::make_shared<InnerProductSpace>(InnerProductSpace::euclidean(8));
  const Matrix atoms8 = random_unit_atoms(*space8, 16, stream);
  Instance frame = unit_dictionary_instance(space8, atoms8, uniform_weights(16));
  const double worst8 = identity_deviation(frame, 200);
  report.checks.push_back(scalar_check("identity-frame", worst8 <= 1e-8,
                                       "worst relative gap " + format_double(worst8)));
  return report;
}

// ---------------------------------------------------------------------------
// Suite: class-norm ordering on random orthonormal settings.
// ---------------------------------------------------------------------------
BoundReport suite_lemma1_chain(const VerifyConfig& config) {
  BoundReport report;
  report.suite = "lemma1-chain";
  report.instance = "orthonormal d=8, random weights";
  report.seed = config.seed;

  RandomStream stream = RandomStream(config.seed).derive(5001);
  const int d = 8;
  const int trials = 500;
  int ordered = 0;
  int strict = 0;
  for (int t = 0; t < trials; ++t) {
    const Vector w = random_weights(d, stream);
    Instance inst = orthonormal_instance(d, w);
    const Vector u = random_gaussian(d, stream);
    const double a1 = aq_gamma_norm(*inst.family, u, LqExponent::one, Vector::Ones(d));
    const double a2 =
        aq_gamma_norm(*inst.family, u, LqExponent::two, w.array().sqrt().matrix());
    const double ainf = aq_gamma_norm(*inst.family, u, LqExponent::inf, w);
    const double slack = 1e-12 * std::max({a1, a2, ainf});
    if (a1 <= a2 + slack && a2 <= ainf + slack) ++ordered;
    if (a1 < a2 - slack && a2 < ainf - slack) ++strict;
  }
  report.checks.push_back(scalar_check("chain-holds", ordered == trials,
                                       std::to_string(ordered) + "/" + std::to_string(trials)));
  report.checks.push_back(
      scalar_check("strict-in-95-percent", strict >= (trials * 95) / 100,
                   std::to_string(strict) + "/" + std::to_string(trials) + " strict"));
  return report;
}

// ---------------------------------------------------------------------------
// Suite: deterministic greedy bound.
// ---------------------------------------------------------------------------
BoundReport suite_theorem4_greedy(const VerifyConfig& config) {
  BoundReport report;
  report.suite = "theorem4-greedy";
  report.instance = "orthonormal d=16 and random 32-atom frame in d=8, beta=1";
  report.seed = config.seed;

  RandomStream stream = RandomStream(config.seed).derive(6001);
  const int m_max = 256;

  {
    const int d = 16;
    Instance inst = orthonormal_instance(d, uniform_weights(d));
    const Vector u = random_gaussian(d, stream);
    const Problem problem = inst.problem(u);
    const double a1 = aq_gamma_norm(*inst.family, u, LqExponent::one, Vector::Ones(d));
    const double norm_u = inst.family->space().norm(u);
    std::vector<int> pool(d);
    for (int i = 0; i < d; ++i) pool[static_cast<std::size_t>(i)] = i;
    const SolverTrajectory traj = run_greedy(problem, 1.0, m_max, pool);
    ExpectationCurve curve;
    curve.mode = ExpectationCurve::Mode::enumeration;
    curve.means = traj.sq_errors;
    curve.stderrs.assign(traj.sq_errors.size(), 0.0);
    std::vector<double> bound(static_cast<std::size_t>(m_max) + 1);
    for (int m = 0; m <= m_max; ++m) {
      bound[static_cast<std::size_t>(m)] = 2.0 * (a1 * a1 + norm_u * norm_u) / (m + 1.0);
    }
    report.checks.push_back(curve_check("cg1-orthonormal", std::move(bound), curve));
  }
  {
    auto space = std::make_shared<InnerProductSpace>(InnerProductSpace::euclidean(8));
    const Matrix atoms = random_unit_atoms(*space, 32, stream);
    Instance inst = unit_dictionary_instance(space, atoms, uniform_weights(32));
    // Target assembled from a known sparse combination, whose coefficient
    // sum is a certified upper bound for the representation norm.
    std::vector<std::pair<int, Vector>> rep;
    Vector u = Vector::Zero(8);
    for (int j = 0; j < 6; ++j) {
      const int idx = static_cast<int>(stream.next_u64() % 32);
      Vector c(1);
      c(0) = stream.next_gaussian();
      u += c(0) * atoms.col(idx);
      rep.emplace_back(idx, c);
    }
    const double a1u = a1_upper(*inst.family, rep, u);
    const double norm_u = inst.family->space().norm(u);
    const Problem problem = inst.problem(u);
    const SolverTrajectory traj = run_greedy(problem, 1.0, m_max, [] {
      std::vector<int> pool(32);
      for (int i = 0; i < 32; ++i) pool[static_cast<std::size_t>(i)] = i;
      return pool;
    }());
    ExpectationCurve curve;
    curve.mode = ExpectationCurve::Mode::enumeration;
    curve.means = traj.sq_errors;
    curve.stderrs.assign(traj.sq_errors.size(), 0.0);
    std::vector<double> bound(static_cast<std::size_t>(m_max) + 1);
    for (int m = 0; m <= m_max; ++m) {
      bound[static_cast<std::size_t>(m)] = 2.0 * (a1u * a1u + norm_u * norm_u) / (m + 1.0);
    }
    report.checks.push_back(curve_check("cg1-frame", std::move(bound), curve));
  }
  return report;
}

// ---------------------------------------------------------------------------
// Suite: interpolated rates for rough targets under a geometric measure.
// ---------------------------------------------------------------------------
BoundReport suite_remark3_interpolation(const VerifyConfig& config) {
  BoundReport report;
  report.suite = "remark3-interpolation";
  report.instance = "orthonormal d=64, geometric weights (ratio 0.85), flat coefficients";
  report.seed = config.seed;

  const int d = 64;
  Instance inst = orthonormal_instance(d, geometric_weights(d, 0.85));
  auto space = std::make_shared<InnerProductSpace>(inst.family->space());
  const SpectralDecomposition decomp = spectral_decomp(inst.covariance(), space);

  const int m_max = 512;
  const int runs = scaled_runs(800, config);
  report.runs = runs;
  const Vector flat = Vector::Constant(d, 1.0 / std::sqrt(static_cast<double>(d)));

  for (double s : {0.125, 0.25, 0.375}) {
    const Vector u = make_hs_element(decomp, s, flat);
    const Problem problem = inst.problem(u);
    const ExpectationCurve mc = mc_expectation(problem, inst.measure, SolverSpec{}, m_max, runs,
                                               config.seed + static_cast<std::uint64_t>(s * 1000),
                                               config.threads);
    BoundInputs inputs;
    inputs.lambda = inst.family->lambda();
    inputs.norm_u = inst.family->space().norm(u);
    inputs.hs[s] = hs_norm(u, s, decomp);
    for (auto& check : bound_curves(inputs, m_max)) {
      if (check.name.rfind("ecvr", 0) == 0) {
        evaluate_check(check, mc);
        check.name = "ecvr-bound(s=" + format_double(s) + ")";
        check.note = "worst margin " + format_double(check.worst_margin_sigma) + " sigma";
        report.checks.push_back(std::move(check));
      }
    }
    const RateFit fit = rate_fit(mc.means, 32, 512);
    const bool ok = std::abs(fit.slope + 2.0 * s) <= 0.2;
    report.checks.push_back(scalar_check(
        "rate-slope(s=" + format_double(s) + ")", ok,
        "fitted " + format_double(fit.slope) + ", expected " + format_double(-2.0 * s) + " +- 0.2"));
  }
  return report;
}

// ---------------------------------------------------------------------------
// Suite: kernel-space realization.
// ---------------------------------------------------------------------------
BoundReport suite_rkhs(const VerifyConfig& config) {
  const auto start = Clock::now();
  BoundReport report;
  report.suite = "rkhs";
  report.instance = "gaussian kernel (width 0.2) on 64 uniform nodes in [0,1]";
  report.seed = config.seed;

  const int n = 64;
  RkhsSpec spec;
  spec.kernel = KernelKind::gaussian;
  spec.width = 0.2;
  spec.nodes = Vector::LinSpaced(n, 0.0, 1.0);
  RkhsRealization rkhs(spec, uniform_weights(n));
  const Instance& inst = rkhs.instance();

  RandomStream stream = RandomStream(config.seed).derive(8001);

  // Point evaluation against the scalar-product route.
  double worst_repr = 0.0;
  for (int trial = 0; trial < 5; ++trial) {
    const Vector coeffs = random_gaussian(n, stream);
    for (int i = 0; i < n; ++i) {
      Vector section = Vector::Zero(n);
      section(i) = 1.0;
      const double via_inner = inst.family->space().inner(section, coeffs);
      const double via_kernel = rkhs.evaluate(coeffs, i);
      worst_repr = std::max(worst_repr,
                            std::abs(via_inner - via_kernel) / (1.0 + std::abs(via_kernel)));
    }
  }
  report.checks.push_back(scalar_check("reproducing-property", worst_repr <= 1e-9,
                                       "worst relative gap " + format_double(worst_repr)));

  // Smooth target in the image of the kernel integral operator.
  const Vector g = random_gaussian(n, stream);
  const Vector u = rkhs.apply_kernel_integral(g);
  const Problem problem = inst.problem(u);

  double a2 = 0.0;
  bool a2_finite = true;
  try {
    a2 = a2_norm(*inst.family, inst.measure, u);
  } catch (const std::invalid_argument&) {
    a2_finite = false;
  }
  report.checks.push_back(
      scalar_check("integral-image-in-a2", a2_finite, "a2 = " + format_double(a2)));

  const int m_max = 256;
  const int runs = scaled_runs(2000, config);
  report.runs = runs;
  const ExpectationCurve mc =
      mc_expectation(problem, inst.measure, SolverSpec{}, m_max, runs, config.seed, config.threads);
  const double norm_u = inst.family->space().norm(u);
  std::vector<double> bound(static_cast<std::size_t>(m_max) + 1);
  const double c = inst.family->lambda() * a2 + norm_u;
  for (int m = 0; m <= m_max; ++m) bound[static_cast<std::size_t>(m)] = c * c / (m + 1.0);
  report.checks.push_back(curve_check("ec2-bound", std::move(bound), mc));

  // The decay here is much faster than 1/m because the kernel spectrum decays
  // quickly; the fitted slope is reported for reference, not gated.
  const RateFit fit = rate_fit(mc.means, 16, m_max);
  report.checks.push_back(scalar_check("rate-slope-report", true,
                                       "fitted slope " + format_double(fit.slope) +
                                           (fit.window_shrunk ? " (window shrunk)" : "")));
  report.checks.push_back(runtime_check(start, 30.0));
  return report;
}

// ---------------------------------------------------------------------------
// Suite: simultaneous approximation of an orthonormal block.
// ---------------------------------------------------------------------------
BoundReport suite_collective(const VerifyConfig& config) {
  BoundReport report;
  report.suite = "collective";
  report.instance = "H = R^32, n = 4, random 64-atom dictionary";
  report.seed = config.seed;

  const int d = 32;
  const int n = 4;
  const int atom_count = 64;
  RandomStream stream = RandomStream(config.seed).derive(9001);

  auto h_space = std::make_shared<InnerProductSpace>(InnerProductSpace::euclidean(d));
  const Matrix dict = random_unit_atoms(*h_space, atom_count, stream);
  Matrix raw(d, n);
  for (int j = 0; j < n; ++j) raw.col(j) = random_gaussian(d, stream);
  const Matrix phi = Eigen::HouseholderQR<Matrix>(raw).householderQ() * Matrix::Identity(d, n);

  CollectiveSpec cspec;
  cspec.ambient_dim = d;
  cspec.n = n;
  cspec.phi = phi;
  cspec.dictionary = dict;
  CollectiveRealization collective(cspec, uniform_weights(atom_count), h_space);
  const Instance& inst = collective.instance();
  const Problem problem = inst.problem(collective.target());

  // Componentwise spectral norm of the target block.
  const SpectralDecomposition h_decomp = spectral_decomp(collective.h_covariance(), h_space);
  double phi_a2_sq = 0.0;
  for (int j = 0; j < n; ++j) {
    const double hn = hs_norm(phi.col(j), 0.5, h_decomp);
    phi_a2_sq += hn * hn;
  }

  const int m_max = 128;
  const int runs = scaled_runs(400, config);
  report.runs = runs;

  // Shared trajectory loop: accumulates the expectation curve and checks the
  // per-step approximation-quality ordering on every run. The atom span is
  // orthonormalized incrementally; the standalone sigma_eps is cross-checked
  // on the first run.
  Matrix samples(runs, m_max + 1);
  double worst_sigma_eps = -1.0;
  double worst_eps_delta = -1.0;
  double worst_incremental_gap = 0.0;
  const InnerProductSpace& h = *h_space;
  const RandomStream root(config.seed);
  for (int r = 0; r < runs; ++r) {
    const SolverTrajectory traj =
        run_random(problem, inst.measure, m_max, root.derive(static_cast<std::uint64_t>(r)));
    for (int m = 0; m <= m_max; ++m) {
      samples(r, m) = traj.sq_errors[static_cast<std::size_t>(m)];
    }
    std::vector<Vector> ortho;
    Matrix deflected = phi; // (I - P_W) Phi, updated as the span grows
    std::vector<Vector> w_basis;
    for (int m = 1; m <= m_max; ++m) {
      const Vector atom = dict.col(traj.chosen[static_cast<std::size_t>(m - 1)]);
      w_basis.push_back(atom);
      Vector q = atom;
      for (int pass = 0; pass < 2; ++pass) {
        for (const Vector& b : ortho) q -= h.inner(q, b) * b;
      }
      const double qn = h.norm(q);
      if (qn > 1e-12) {
        q /= qn;
        for (int i = 0; i < n; ++i) {
          deflected.col(i) -= h.inner(deflected.col(i), q) * q;
        }
        ortho.push_back(std::move(q));
      }
      double eps_sq = 0.0;
      for (int i = 0; i < n; ++i) {
        const double rn = h.norm(deflected.col(i));
        eps_sq += rn * rn;
      }
      Matrix small = deflected.transpose() * h.gram() * deflected;
      small = 0.5 * (small + small.transpose());
      Eigen::SelfAdjointEigenSolver<Matrix> es(small);
      const double sigma = std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
      const double eps = std::sqrt(eps_sq);

      if (r == 0 && (m <= 8 || m == m_max)) {
        const auto [sigma_ref, eps_ref] = sigma_eps(collective, w_basis);
        worst_incremental_gap = std::max(
            worst_incremental_gap,
            std::max(std::abs(sigma - sigma_ref), std::abs(eps - eps_ref)));
      }

      const double delta = std::sqrt(traj.sq_errors[static_cast<std::size_t>(m)]);
      worst_sigma_eps = std::max(worst_sigma_eps, sigma - eps);
      worst_eps_delta = std::max(worst_eps_delta, eps - delta);
    }
  }
  ExpectationCurve mc;
  mc.mode = ExpectationCurve::Mode::monte_carlo;
  mc.runs = runs;
  mc.means.resize(static_cast<std::size_t>(m_max) + 1);
  mc.stderrs.resize(static_cast<std::size_t>(m_max) + 1);
  for (int m = 0; m <= m_max; ++m) {
    const double mean = samples.col(m).sum() / runs;
    const double ss = (samples.col(m).array() - mean).square().sum();
    mc.means[static_cast<std::size_t>(m)] = mean;
    mc.stderrs[static_cast<std::size_t>(m)] = std::sqrt(std::max(0.0, ss / (runs - 1)) / runs);
  }

  const double tol = 1e-9;
  report.checks.push_back(scalar_check("sigma-le-eps", worst_sigma_eps <= tol,
                                       "worst sigma - eps = " + format_double(worst_sigma_eps)));
  report.checks.push_back(scalar_check("eps-le-delta", worst_eps_delta <= tol,
                                       "worst eps - delta = " + format_double(worst_eps_delta)));
  report.checks.push_back(
      scalar_check("incremental-projection-agrees", worst_incremental_gap <= 1e-9,
                   "worst gap vs standalone " + format_double(worst_incremental_gap)));

  std::vector<double> bound(static_cast<std::size_t>(m_max) + 1);
  for (int m = 0; m <= m_max; ++m) bound[static_cast<std::size_t>(m)] = phi_a2_sq / (m + 1.0);
  report.checks.push_back(curve_check("ec2b-bound", std::move(bound), mc));
  return report;
}

// ---------------------------------------------------------------------------
// Suite: additive noise floor and the perturbed one-step recursion.
// ---------------------------------------------------------------------------
BoundReport suite_remark2_noisy(const VerifyConfig& config) {
  BoundReport report;
  report.suite = "remark2-noisy";
  report.instance = "orthonormal d=16 uniform, unit H^1/2 target, sigma = 0.05";
  report.seed = config.seed;

  const int d = 16;
  const double sigma = 0.05;
  Instance inst = orthonormal_instance(d, uniform_weights(d));
  auto space = std::make_shared<InnerProductSpace>(inst.family->space());
  const SpectralDecomposition decomp = spectral_decomp(inst.covariance(), space);
  RandomStream coeff_stream = RandomStream(config.seed).derive(1001);
  const Vector u = make_hs_element(decomp, 0.5, coeff_stream);
  const Problem problem = inst.problem(u);

  SolverSpec spec;
  spec.variant = SolverVariant::noisy;
  spec.noise.sigma = sigma;

  const int m_max = 10000;
  const int runs = scaled_runs(120, config);
  report.runs = runs;
  const ExpectationCurve mc =
      mc_expectation(problem, inst.measure, spec, m_max, runs, config.seed, config.threads);

  double curve_min = mc.means[0];
  for (double v : mc.means) curve_min = std::min(curve_min, v);
  const double floor = sigma * sigma / 4.0;
  report.checks.push_back(scalar_check("no-convergence-floor", curve_min > floor,
                                       "min mean " + format_double(curve_min) + " vs floor " +
                                           format_double(floor)));

  const double a2 = a2_norm(*inst.family, inst.measure, u);
  const double cst = inst.family->lambda() * a2 + inst.family->space().norm(u);
  bool recursion_ok = true;
  double worst = -std::numeric_limits<double>::infinity();
  for (int m = 0; m < m_max; ++m) {
    const double am = alpha(m);
    const double bm = 1.0 - am;
    const auto mi = static_cast<std::size_t>(m);
    const double rhs = am * am * mc.means[mi] + bm * bm * cst * cst + sigma * sigma;
    const double se = mc.stderrs[mi + 1] + am * am * mc.stderrs[mi];
    const double gap = mc.means[mi + 1] - rhs;
    if (se > 0.0) worst = std::max(worst, gap / se);
    recursion_ok = recursion_ok && gap <= 3.0 * se;
  }
  report.checks.push_back(scalar_check("noisy-step-recursion", recursion_ok,
                                       "worst margin " + format_double(worst) + " sigma"));
  return report;
}

// ---------------------------------------------------------------------------
// Suite: structural invariants across instance types.
// ---------------------------------------------------------------------------
BoundReport suite_invariants(const VerifyConfig& config) {
  BoundReport report;
  report.suite = "invariants";
  report.instance = "orthonormal, two-atom, random frame, kernel, collective";
  report.seed = config.seed;

  RandomStream stream = RandomStream(config.seed).derive(11001);

  std::vector<std::pair<std::string, Instance>> instances;
  {
    Vector w(5);
    w << 1, 2, 3, 4, 5;
    instances.emplace_back("orthonormal-d5", orthonormal_instance(5, w / w.sum()));
  }
  {
    auto space = std::make_shared<InnerProductSpace>(InnerProductSpace::euclidean(2));
    Matrix atoms(2, 2);
    atoms << 1.0, 1.0 / std::sqrt(2.0), 0.0, 1.0 / std::sqrt(2.0);
    instances.emplace_back("two-atom", unit_dictionary_instance(space, atoms, uniform_weights(2)));
  }
  {
    // Random well-conditioned Gram matrix.
    const int d = 6;
    Matrix a(d, d);
    for (int i = 0; i < d; ++i) a.row(i) = random_gaussian(d, stream).transpose();
    Matrix gram = a * a.transpose() + d * Matrix::Identity(d, d);
    auto space = std::make_shared<InnerProductSpace>(std::move(gram));
    const Matrix atoms = random_unit_atoms(*space, 12, stream);
    instances.emplace_back("frame-d6", unit_dictionary_instance(space, atoms, uniform_weights(12)));
  }
  {
    RkhsSpec spec;
    spec.kernel = KernelKind::gaussian;
    spec.width = 0.25;
    spec.nodes = Vector::LinSpaced(16, 0.0, 1.0);
    RkhsRealization rkhs(spec, uniform_weights(16));
    instances.emplace_back("kernel-16", rkhs.instance());
  }
  {
    const int d = 8, n = 2, atoms = 16;
    auto h_space = std::make_shared<InnerProductSpace>(InnerProductSpace::euclidean(d));
    const Matrix dict = random_unit_atoms(*h_space, atoms, stream);
    Matrix raw(d, n);
    for (int j = 0; j < n; ++j) raw.col(j) = random_gaussian(d, stream);
    const Matrix phi = Eigen::HouseholderQR<Matrix>(raw).householderQ() * Matrix::Identity(d, n);
    CollectiveSpec cspec{d, n, phi, dict};
    CollectiveRealization collective(cspec, uniform_weights(atoms), h_space);
    instances.emplace_back("collective-8x2", collective.instance());
  }

  // Adjoint identity and operator-norm bounds.
  double worst_adjoint = 0.0;
  double worst_norm_bound = -std::numeric_limits<double>::infinity();
  double worst_psi = 0.0;
  for (auto& [name, inst] : instances) {
    const InnerProductSpace& space = inst.family->space();
    const double lambda = inst.family->lambda();
    for (int t = 0; t < 40; ++t) {
      const int w = static_cast<int>(stream.next_u64() % static_cast<std::uint64_t>(
                                                             inst.family->size()));
      const LocalSubspace& sub = inst.family->subspace(w);
      const Vector v = random_gaussian(space.dim(), stream);
      const Vector v_local = random_gaussian(sub.local_dim(), stream);
      const Vector tv = apply_T(*inst.family, w, v);
      const double lhs = v_local.dot(sub.local_gram() * tv);
      const double rhs = space.inner(v, apply_R(*inst.family, w, v_local));
      const double scale = space.norm(v) * sub.local_norm(v_local) * std::max(1.0, lambda);
      worst_adjoint = std::max(worst_adjoint, std::abs(lhs - rhs) / std::max(scale, 1e-300));

      worst_norm_bound = std::max(
          worst_norm_bound, space.norm(apply_R(*inst.family, w, v_local)) -
                                lambda * sub.local_norm(v_local) - 1e-10 * scale);
      worst_norm_bound = std::max(worst_norm_bound, sub.local_norm(tv) - lambda * space.norm(v) -
                                                        1e-10 * scale);

      const Vector psi = psi_tilde(*inst.family, w, v);
      const double pn = space.norm(psi);
      worst_psi = std::max(worst_psi, std::min(std::abs(pn), std::abs(pn - 1.0)));
    }
  }
  report.checks.push_back(scalar_check("adjoint-identity", worst_adjoint <= 1e-10,
                                       "worst relative gap " + format_double(worst_adjoint)));
  report.checks.push_back(scalar_check("operator-norm-bounds", worst_norm_bound <= 0.0,
                                       "worst excess " + format_double(worst_norm_bound)));
  report.checks.push_back(scalar_check("psi-norm-zero-or-one", worst_psi <= 1e-12,
                                       "worst deviation " + format_double(worst_psi)));

  // Per-step trajectory identities.
  double worst_energy = 0.0;
  double worst_xi_opt = -std::numeric_limits<double>::infinity();
  double worst_mode_gap = 0.0;
  double worst_omp_monotone = -std::numeric_limits<double>::infinity();
  double worst_omp_vs_step = -std::numeric_limits<double>::infinity();
  double worst_greedy_gap = -std::numeric_limits<double>::infinity();
  bool deterministic = true;

  SolverOptions record;
  record.record_iterates = true;
  int battery_index = 0;
  for (auto& [name, inst] : instances) {
    const InnerProductSpace& space = inst.family->space();
    Vector target = random_gaussian(space.dim(), stream);
    target /= space.norm(target);
    const Problem problem = inst.problem(target);
    const Problem functional = inst.problem(target, RhsMode::functional);
    const int m_steps = 50;
    const RandomStream run_stream = RandomStream(config.seed).derive(12000 + battery_index);
    ++battery_index;

    const SolverTrajectory traj = run_random(problem, inst.measure, m_steps, run_stream, record);
    const SolverTrajectory again = run_random(problem, inst.measure, m_steps, run_stream, record);
    deterministic = deterministic && traj.sq_errors == again.sq_errors &&
                    traj.chosen == again.chosen && traj.xis == again.xis;

    const SolverTrajectory func = run_random(functional, inst.measure, m_steps, run_stream);
    for (std::size_t m = 0; m < traj.sq_errors.size(); ++m) {
      worst_mode_gap =
          std::max(worst_mode_gap, std::abs(traj.sq_errors[m] - func.sq_errors[m]) /
                                       std::max(1e-300, traj.sq_errors[m] + 1e-30));
    }

    for (int m = 0; m < m_steps; ++m) {
      const auto mi = static_cast<std::size_t>(m);
      const Vector& u_m = traj.iterates[mi];
      const Vector e = target - u_m;
      const double am = alpha(m);
      const Vector w = am * e + (1.0 - am) * target;
      const Vector psi = psi_tilde(*inst.family, traj.chosen[mi], e);
      const double w_sq = space.norm(w) * space.norm(w);
      double predicted = w_sq;
      if (psi.squaredNorm() > 0.0) {
        const double proj = space.inner(w, psi);
        predicted -= proj * proj;
      }
      worst_energy = std::max(worst_energy, std::abs(traj.sq_errors[mi + 1] - predicted) /
                                                std::max(w_sq, 1e-300));

      // Perturbing the step size must never beat the recorded error.
      const Vector direction =
          apply_R(*inst.family, traj.chosen[mi], apply_T(*inst.family, traj.chosen[mi], e));
      for (int p = 0; p < 2; ++p) {
        const double xi_p = traj.xis[mi] + stream.next_gaussian();
        const Vector perturbed = target - (am * u_m + xi_p * direction);
        const double err_sq = space.norm(perturbed) * space.norm(perturbed);
        worst_xi_opt =
            std::max(worst_xi_opt, traj.sq_errors[mi + 1] - err_sq - 1e-12 * std::max(1.0, err_sq));
      }
    }

    const SolverTrajectory omp = run_omp(problem, inst.measure, m_steps, run_stream, record);
    for (int m = 0; m < m_steps; ++m) {
      const auto mi = static_cast<std::size_t>(m);
      worst_omp_monotone = std::max(
          worst_omp_monotone,
          omp.sq_errors[mi + 1] - omp.sq_errors[mi] - 1e-12 * std::max(1.0, omp.sq_errors[mi]));
      const Vector& u_m = omp.iterates[mi];
      const Vector e = target - u_m;
      const Vector direction =
          apply_R(*inst.family, omp.chosen[mi], apply_T(*inst.family, omp.chosen[mi], e));
      const Vector single_step = target - (alpha(m) * u_m + omp.xis[mi] * direction);
      const double step_sq = space.norm(single_step) * space.norm(single_step);
      worst_omp_vs_step =
          std::max(worst_omp_vs_step,
                   omp.sq_errors[mi + 1] - step_sq - 1e-12 * std::max(1.0, step_sq));
    }

    std::vector<int> pool(inst.family->size());
    for (int w = 0; w < inst.family->size(); ++w) pool[static_cast<std::size_t>(w)] = w;
    const SolverTrajectory greedy = run_greedy(problem, 1.0, 20, pool, record);
    for (int m = 0; m < 20; ++m) {
      const auto mi = static_cast<std::size_t>(m);
      const Vector e = target - greedy.iterates[mi];
      double pool_max = 0.0;
      for (int w = 0; w < inst.family->size(); ++w) {
        pool_max = std::max(pool_max,
                            inst.family->subspace(w).local_norm(apply_T(*inst.family, w, e)));
      }
      const double selected =
          inst.family->subspace(greedy.chosen[mi]).local_norm(apply_T(*inst.family,
                                                                      greedy.chosen[mi], e));
      worst_greedy_gap =
          std::max(worst_greedy_gap, pool_max - selected - 1e-12 * std::max(1.0, pool_max));
    }
  }

  // Zero-noise runs must reproduce the noiseless ones bitwise, and noisy runs
  // must be reproducible from the seed.
  {
    const auto& inst = instances.front().second;
    Vector target = random_gaussian(inst.family->space().dim(), stream);
    const Problem problem = inst.problem(target);
    const RandomStream rs = RandomStream(config.seed).derive(13001);
    NoiseSpec zero;
    zero.sigma = 0.0;
    const SolverTrajectory plain = run_random(problem, inst.measure, 40, rs);
    const SolverTrajectory noiseless = run_noisy(problem, inst.measure, zero, 40, rs);
    deterministic = deterministic && plain.sq_errors == noiseless.sq_errors &&
                    plain.chosen == noiseless.chosen;
    NoiseSpec noisy;
    noisy.sigma = 0.3;
    const SolverTrajectory n1 = run_noisy(problem, inst.measure, noisy, 40, rs);
    const SolverTrajectory n2 = run_noisy(problem, inst.measure, noisy, 40, rs);
    deterministic = deterministic && n1.sq_errors == n2.sq_errors;
  }

  report.checks.push_back(scalar_check("energy-identity", worst_energy <= 1e-10,
                                       "worst relative gap " + format_double(worst_energy)));
  report.checks.push_back(scalar_check("xi-optimality", worst_xi_opt <= 0.0,
                                       "worst improvement " + format_double(worst_xi_opt)));
  report.checks.push_back(scalar_check("functional-mode-equivalence", worst_mode_gap <= 1e-12,
                                       "worst relative gap " + format_double(worst_mode_gap)));
  report.checks.push_back(scalar_check("omp-monotone", worst_omp_monotone <= 0.0,
                                       "worst increase " + format_double(worst_omp_monotone)));
  report.checks.push_back(scalar_check("omp-beats-single-step", worst_omp_vs_step <= 0.0,
                                       "worst excess " + format_double(worst_omp_vs_step)));
  report.checks.push_back(scalar_check("greedy-attains-pool-max", worst_greedy_gap <= 0.0,
                                       "worst gap " + format_double(worst_greedy_gap)));
  report.checks.push_back(scalar_check("determinism-by-seed", deterministic, ""));
  return report;
}

using SuiteFn = BoundReport (*)(const VerifyConfig&);

const std::vector<std::pair<std::string, SuiteFn>>& suite_table() {
  static const std::vector<std::pair<std::string, SuiteFn>> table = {
      {"oracle-d2", suite_oracle_d2},
      {"theorem1-orthonormal", suite_theorem1_orthonormal},
      {"omp-optimality", suite_omp_optimality},
      {"theorem3-norms", suite_theorem3_norms},
      {"lemma1-chain", suite_lemma1_chain},
      {"theorem4-greedy", suite_theorem4_greedy},
      {"remark3-interpolation", suite_remark3_interpolation},
      {"rkhs", suite_rkhs},
      {"collective", suite_collective},
      {"remark2-noisy", suite_remark2_noisy},
      {"invariants", suite_invariants},
  };
  return table;
}

} // namespace

std::vector<std::string> verify_suites() {
  std::vector<std::string> names;
  for (const auto& [name, fn] : suite_table()) names.push_back(name);
  return names;
}

std::vector<BoundReport> verify(const std::string& suite, const VerifyConfig& config) {
  std::vector<BoundReport> reports;
  bool found = false;
  for (const auto& [name, fn] : suite_table()) {
    if (suite == "all" || suite == name) {
      found = true;
      BoundReport report = fn(config);
      report.low_power = report.runs > 0 && report.runs < 30;
      reports.push_back(std::move(report));
    }
  }
  if (!found) {
    throw std::invalid_argument("verify: unknown suite '" + suite + "'; see verify_suites()");
  }
  return reports;
}

} // namespace schwarz
