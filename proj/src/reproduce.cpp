#include "detloop/reproduce.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <numeric>
#include <thread>

#include "detloop/efficiency.hpp"
#include "detloop/errors.hpp"
#include "detloop/npa.hpp"
#include "detloop/quantum.hpp"
#include "detloop/separation.hpp"

namespace detloop {

namespace {

// Runs body(t) for t in [0, count); results are written by index so the
// aggregate does not depend on the thread count.
void parallel_for(long count, int threads, const std::function<void(long)>& body) {
  threads = std::max(1, threads);
  if (threads == 1 || count < 2) {
    for (long t = 0; t < count; ++t) body(t);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(threads));
  for (int w = 0; w < threads; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (long t = w; t < count; t += threads) body(t);
      } catch (...) {
        errors[static_cast<std::size_t>(w)] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

ModelSpec model_for_level(int level) { return level <= 0 ? ModelSpec::nonsignalling() : ModelSpec::npa(level); }

ReproductionCheck check(std::string label, double observed, double lower, double upper) {
  return {std::move(label), observed, lower, upper, observed >= lower && observed <= upper};
}

// Directions for trial t: Alice's n, then Bob's m, from stream (salt, t).
BehaviorVector random_phi_plus_behavior(int n, int m, std::mt19937_64& rng) {
  std::vector<MeasurementDirection> a, b;
  for (int i = 0; i < n; ++i) a.push_back(random_direction(rng));
  for (int j = 0; j < m; ++j) b.push_back(random_direction(rng));
  return quantum_behavior(maximally_entangled_state(), a, b);
}

constexpr std::uint64_t kReconstructionStream = 1ULL << 40;
constexpr int kMaxRedraws = 10000;

double mean(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

bool non_increasing(const std::vector<CurvePoint>& curve, double slack) {
  for (std::size_t k = 1; k < curve.size(); ++k) {
    if (!curve[k].bound || !curve[k - 1].bound) continue;
    if (*curve[k].bound > *curve[k - 1].bound + slack) return false;
  }
  return true;
}

}  // namespace

double random_success_fraction(int n, int m, long trials, std::uint64_t seed, int threads) {
  if (trials < 1) throw InvalidArgument("trials must be positive");
  std::vector<char> hit(static_cast<std::size_t>(trials), 0);
  SeparationOptions opts;
  opts.with_certificate = false;
  parallel_for(trials, threads, [&](long t) {
    auto rng = make_rng(seed, static_cast<std::uint64_t>(t));
    const BehaviorVector p = random_phi_plus_behavior(n, m, rng);
    hit[static_cast<std::size_t>(t)] = find_violated_inequality(p, opts).status == SeparationStatus::Violated;
  });
  const long wins = std::count(hit.begin(), hit.end(), 1);
  return static_cast<double>(wins) / static_cast<double>(trials);
}

std::vector<double> reconstruction_bounds(double eta, int model_level, long trials, std::uint64_t seed, int threads,
                                          double tolerance) {
  if (trials < 1) throw InvalidArgument("trials must be positive");
  std::vector<double> bounds(static_cast<std::size_t>(trials), 0.0);
  const ModelSpec model = model_for_level(model_level);
  SeparationOptions opts;
  opts.with_certificate = false;
  parallel_for(trials, threads, [&](long t) {
    auto rng = make_rng(seed, kReconstructionStream + static_cast<std::uint64_t>(t));
    for (int attempt = 0; attempt < kMaxRedraws; ++attempt) {
      const BehaviorVector observed =
          apply_detection_efficiency(random_phi_plus_behavior(2, 2, rng), DetectionModel::symmetric(eta));
      if (find_violated_inequality(observed, opts).status != SeparationStatus::Violated) continue;
      bounds[static_cast<std::size_t>(t)] = certify_from_observation(observed, model, tolerance).bound.eta_lower;
      return;
    }
    throw SolverFailure("no violated instance found after redraws");
  });
  return bounds;
}

nlohmann::json ReproductionReport::to_json() const {
  nlohmann::json cs = nlohmann::json::array();
  for (const auto& c : checks) {
    cs.push_back({{"label", c.label}, {"observed", c.observed}, {"lower", c.lower}, {"upper", c.upper},
                  {"status", c.pass ? "PASS" : "FAIL"}});
  }
  return {{"case", name},         {"description", description}, {"provenance", provenance},
          {"checks", cs},         {"runtime_s", runtime_seconds}, {"status", pass ? "PASS" : "FAIL"}};
}

const std::vector<std::string>& reproduction_case_names() {
  static const std::vector<std::string> names = {"ch-eta",         "i6522-q2",         "i6522-eta",
                                                 "i6522-onesided", "random-success",   "eta-recon-quantum",
                                                 "eta-recon-ns",   "known-detector-curve"};
  return names;
}

ReproductionReport run_reproduction(const std::string& name, const ReproductionOptions& o) {
  const auto start = std::chrono::steady_clock::now();
  ReproductionReport r;
  r.name = name;
  const double tol = o.tolerance;

  if (name == "ch-eta") {
    const int level = o.level.value_or(0);
    const auto bound = bound_via_bisection(ch_inequality(), model_for_level(level), EfficiencyMode::symmetric(), 0.0, tol);
    r.description = "CH symmetric efficiency bound, " + model_for_level(level).name();
    r.provenance = "nonsignalling and quantum bound 2/3";
    const double band = level == 0 ? 0.002 : 0.01;
    r.checks.push_back(check("eta_lower", bound.eta_lower, 2.0 / 3.0 - band, 2.0 / 3.0 + band));
  } else if (name == "i6522-q2") {
    const int level = o.level.value_or(2);
    r.description = "I6522 maximum over the level-" + std::to_string(level) + " relaxation";
    r.provenance = "Q2 = 3.6791";
    r.checks.push_back(check("value", npa_max_value(builtin_i6522(), level), 3.6791 - 0.005, 3.6791 + 0.005));
  } else if (name == "i6522-eta") {
    const int level = o.level.value_or(2);
    const auto bound = bound_via_bisection(builtin_i6522(), model_for_level(level), EfficiencyMode::symmetric(), 0.0, tol);
    r.description = "I6522 symmetric efficiency bound, " + model_for_level(level).name();
    r.provenance = "eta_crit > 0.86";
    r.checks.push_back(check("eta_lower", bound.eta_lower, 0.86, 0.95));
  } else if (name == "i6522-onesided") {
    const int level = o.level.value_or(2);
    // The bounded detector is Alice's in the published inequality, Bob's in
    // one-sided mode, hence the transposition.
    const BellInequality ineq = builtin_i6522().transposed();
    const ModelOracle oracle(ineq.scenario(), model_for_level(level));
    const auto plain = bound_via_bisection(oracle, ineq, EfficiencyMode::one_sided_known(1.0), 0.0, tol);
    const auto with_q = bound_via_bisection(oracle, ineq, EfficiencyMode::one_sided_known(1.0), 1.971, tol);
    r.description = "I6522 one-sided bound with the other detector perfect, " + oracle.model().name();
    r.provenance = "eta_A,crit > 0.751 (q = 0) and > 0.886 (q = 1.971)";
    r.checks.push_back(check("eta_lower(q=0)", plain.eta_lower, 0.751 - 0.005, 1.0));
    r.checks.push_back(check("eta_lower(q=1.971)", with_q.eta_lower, 0.886 - 0.005, 1.0));
  } else if (name == "random-success") {
    const long trials = o.trials.value_or(10000);
    r.description = "fraction of random-measurement instances on |Phi+> that are separated";
    r.provenance = "more than half at n=m=3, above 99% at n=m=6 (5e5 trials); margin widened for sample size";
    r.checks.push_back(check("fraction(n=m=3)", random_success_fraction(3, 3, trials, o.seed, o.threads), 0.5 + 1e-12, 1.0));
    r.checks.push_back(check("fraction(n=m=6)", random_success_fraction(6, 6, trials, o.seed, o.threads), 0.97 + 1e-12, 1.0));
  } else if (name == "eta-recon-quantum" || name == "eta-recon-ns") {
    const bool quantum = name == "eta-recon-quantum";
    const int level = quantum ? o.level.value_or(2) : 0;
    const long trials = o.trials.value_or(100);
    const auto bounds = reconstruction_bounds(0.9, level, trials, o.seed, o.threads, tol);
    r.description = "mean certified efficiency at eta = 0.9, " + model_for_level(level).name() + ", " +
                    std::to_string(trials) + " trials";
    if (quantum) {
      r.provenance = "eta >= 0.785 +- 0.003 (1e3 trials); band widened for 100 trials";
      r.checks.push_back(check("mean eta_lower", mean(bounds), 0.765, 0.805));
    } else {
      r.provenance = "eta >= 0.683 +- 0.001 (1e3 trials); band widened for 100 trials";
      r.checks.push_back(check("mean eta_lower", mean(bounds), 0.663, 0.703));
    }
  } else if (name == "known-detector-curve") {
    const int level = o.level.value_or(0);
    const std::vector<double> qs = {0.04, 0.08, 0.12, 0.16, 0.2};
    std::vector<double> known;
    for (int k = 0; k <= 10; ++k) known.push_back(0.75 + 0.025 * k);
    std::vector<std::vector<CurvePoint>> curves;
    for (double q : qs) curves.push_back(unknown_vs_known_curve(ch_inequality(), known, q, model_for_level(level), tol));
    r.description = "CH unknown-vs-known detector curves, " + model_for_level(level).name();
    r.provenance = "curves fall with the known efficiency and rise with Q";
    int monotone = 0;
    int ordered = 0;
    int points = 0;
    for (std::size_t c = 0; c < curves.size(); ++c) {
      monotone += non_increasing(curves[c], tol) ? 1 : 0;
      for (std::size_t k = 0; k < known.size(); ++k) points += curves[c][k].bound ? 1 : 0;
      bool in_order = true;
      if (c > 0) {
        for (std::size_t k = 0; k < known.size(); ++k) {
          const auto& lo = curves[c - 1][k].bound;
          const auto& hi = curves[c][k].bound;
          // A higher q either has a bound at least as high or none at all.
          if (hi && (!lo || *hi + tol < *lo)) in_order = false;
        }
      }
      ordered += in_order ? 1 : 0;
    }
    r.checks.push_back(check("non-increasing curves", monotone, 5, 5));
    r.checks.push_back(check("q-ordered curves", ordered, 5, 5));
    r.checks.push_back(check("points with a bound", points, 1, 55));
  } else {
    throw InvalidArgument("unknown reproduction case \"" + name + "\"");
  }

  r.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  r.pass = std::all_of(r.checks.begin(), r.checks.end(), [](const ReproductionCheck& c) { return c.pass; });
  return r;
}

}  // namespace detloop
