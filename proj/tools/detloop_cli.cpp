// detloop command-line front end.
//
// Exit codes: 0 success, 2 negative-but-valid result (Classical behavior,
// nothing to certify), 1 error.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "detloop/efficiency.hpp"
#include "detloop/errors.hpp"
#include "detloop/io.hpp"
#include "detloop/npa.hpp"
#include "detloop/quantum.hpp"
#include "detloop/reproduce.hpp"
#include "detloop/separation.hpp"

using namespace detloop;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitNegative = 2;

BellInequality load_inequality(const std::string& spec) {
  if (spec == "builtin:ch") return ch_inequality();
  if (spec == "builtin:i6522") return builtin_i6522();
  return io::read_inequality(spec);
}

ModelSpec parse_model(const std::string& model, int level) {
  if (model == "classical") return ModelSpec::classical();
  if (model == "ns") return ModelSpec::nonsignalling();
  if (level <= 0) return ModelSpec::nonsignalling();
  return ModelSpec::npa(level);
}

void emit(const json& j, const std::string& out) {
  if (out.empty()) {
    std::cout << j.dump(2) << "\n";
  } else {
    io::write_json(out, j);
  }
}

const char* kSchemaHelp =
    "file formats:\n"
    "  behavior   {\"n\":N, \"m\":M, \"pA\":[N], \"pB\":[M], \"pAB\":[[M] x N]}\n"
    "  inequality {\"n\":N, \"m\":M, \"hA\":[N], \"hB\":[M], \"hAB\":[[M] x N]}   (or builtin:ch, builtin:i6522)\n"
    "  counts     {\"n\":N, \"m\":M, \"nA\":[N], \"nB\":[M], \"nAB\":[[M] x N], \"trialsPerContext\":T}\n";

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Detection-loophole-free Bell inequalities and certified detector efficiencies"};
  app.footer(kSchemaHelp);
  app.require_subcommand(1);

  std::uint64_t seed = 20160301;
  int threads = 1;
  double tol = 1e-3;
  std::string out;
  app.add_option("--seed", seed, "RNG seed")->capture_default_str();
  app.add_option("--threads", threads, "worker threads for trial loops")->check(CLI::Range(1, 256))->capture_default_str();
  app.add_option("--tol", tol, "bisection tolerance (or violation tolerance for find-inequality)");
  app.add_option("--out", out, "output file (stdout when omitted)");

  // find-inequality
  auto* find = app.add_subcommand("find-inequality", "synthesize a maximally violated inequality for a behavior");
  std::string behavior_path;
  std::optional<double> violation_tol;
  find->add_option("--behavior", behavior_path, "behavior JSON")->required();
  find->add_option("--tolerance", violation_tol, "violation tolerance (default 1e-7)");
  find->add_option("--out", out, "inequality JSON");

  // simulate
  auto* sim = app.add_subcommand("simulate", "random measurements on |Phi+> with lossy detectors");
  int sn = 2, sm = 2;
  long trials = 10000;
  double eta = 1.0;
  std::optional<double> eta_b;
  std::string emit_kind = "counts";
  sim->add_option("--n", sn, "Alice's settings")->check(CLI::Range(1, 16));
  sim->add_option("--m", sm, "Bob's settings")->check(CLI::Range(1, 16));
  sim->add_option("--trials", trials, "trials per context")->check(CLI::PositiveNumber);
  sim->add_option("--eta", eta, "detector efficiency (Alice, and Bob unless --eta-b)")->check(CLI::Range(0.0, 1.0));
  sim->add_option("--eta-b", eta_b, "Bob's detector efficiency")->check(CLI::Range(0.0, 1.0));
  sim->add_option("--seed", seed, "RNG seed");
  sim->add_option("--out", out, "output JSON");
  sim->add_option("--emit", emit_kind, "counts or exact behavior")->check(CLI::IsMember({"counts", "behavior"}));

  // eta-bound
  auto* bound = app.add_subcommand("eta-bound", "certified lower bound on detector efficiency");
  std::string ineq_path;
  std::string model = "ns";
  int level = 0;
  double q = 0.0;
  std::optional<double> known_eta;
  bound->add_option("--ineq", ineq_path, "inequality JSON, builtin:ch or builtin:i6522")->required();
  bound->add_option("--model", model, "model class")->check(CLI::IsMember({"classical", "ns", "npa"}));
  bound->add_option("--level", level, "NPA level (0 = nonsignalling)")->check(CLI::Range(0, 4));
  bound->add_option("--q", q, "required value")->check(CLI::NonNegativeNumber);
  bound->add_option("--known-eta", known_eta, "known efficiency of Alice's detector (one-sided mode)")
      ->check(CLI::Range(0.0, 1.0));
  bound->add_option("--tol", tol, "bisection tolerance");
  bound->add_option("--out", out, "output JSON");

  // eta-curve
  auto* curve = app.add_subcommand("eta-curve", "unknown-detector bound versus the known detector's efficiency");
  double from = 0.5, to = 1.0;
  int points = 21;
  curve->add_option("--ineq", ineq_path, "inequality JSON, builtin:ch or builtin:i6522")->required();
  curve->add_option("--model", model, "model class")->check(CLI::IsMember({"classical", "ns", "npa"}));
  curve->add_option("--level", level, "NPA level (0 = nonsignalling)")->check(CLI::Range(0, 4));
  curve->add_option("--q", q, "required value (> 0)")->required();
  curve->add_option("--from", from, "smallest known efficiency")->check(CLI::Range(0.0, 1.0));
  curve->add_option("--to", to, "largest known efficiency")->check(CLI::Range(0.0, 1.0));
  curve->add_option("--points", points, "grid size")->check(CLI::Range(1, 1000));
  curve->add_option("--tol", tol, "bisection tolerance");
  curve->add_option("--out", out, "output CSV");

  // npa-max / npa-check
  auto* nmax = app.add_subcommand("npa-max", "maximum of an inequality over a relaxation of the quantum set");
  nmax->add_option("--ineq", ineq_path, "inequality JSON, builtin:ch or builtin:i6522")->required();
  nmax->add_option("--level", level, "NPA level (0 = nonsignalling)")->required()->check(CLI::Range(0, 4));
  nmax->add_option("--out", out, "output JSON");

  auto* ncheck = app.add_subcommand("npa-check", "membership of a behavior in a relaxation of the quantum set");
  ncheck->add_option("--behavior", behavior_path, "behavior JSON")->required();
  ncheck->add_option("--level", level, "NPA level (0 = nonsignalling)")->required()->check(CLI::Range(0, 4));
  ncheck->add_option("--out", out, "output JSON");

  // reproduce
  auto* repro = app.add_subcommand("reproduce", "run a named reproduction case (or all)");
  std::string case_name = "all";
  std::optional<int> repro_level;
  std::optional<long> repro_trials;
  repro->add_option("--case", case_name, "case name or all");
  repro->add_option("--level", repro_level, "override the case's NPA level")->check(CLI::Range(0, 4));
  repro->add_option("--trials", repro_trials, "override the case's trial count")->check(CLI::PositiveNumber);
  repro->add_option("--seed", seed, "RNG seed");
  repro->add_option("--threads", threads, "worker threads")->check(CLI::Range(1, 256));
  repro->add_option("--tol", tol, "bisection tolerance");
  repro->add_option("--out", out, "JSON report");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitError;
  }

  try {
    if (*find) {
      SeparationOptions opts;
      if (violation_tol) opts.violation_tolerance = *violation_tol;
      const BehaviorVector p = io::read_behavior(behavior_path);
      const SeparationResult r = find_violated_inequality(p, opts);
      std::cerr << "status: " << to_string(r.status) << "  lp optimum: " << r.lp_optimum << "\n";
      if (r.status == SeparationStatus::Violated) {
        json j = io::to_json(*r.inequality);
        j["quantumValue"] = *r.quantum_value;
        emit(j, out);
        return kExitOk;
      }
      if (r.status == SeparationStatus::Classical) {
        if (r.certificate) std::cerr << "classical certificate: scale " << r.certificate->scale << ", "
                                     << r.certificate->weights.size() << " vertices\n";
        return kExitNegative;
      }
      return kExitError;
    }

    if (*sim) {
      std::mt19937_64 rng = make_rng(seed, 0);
      std::vector<MeasurementDirection> a, b;
      for (int i = 0; i < sn; ++i) a.push_back(random_direction(rng));
      for (int j = 0; j < sm; ++j) b.push_back(random_direction(rng));
      const BehaviorVector exact = apply_detection_efficiency(quantum_behavior(maximally_entangled_state(), a, b),
                                                              DetectionModel(eta, eta_b.value_or(eta)));
      if (emit_kind == "behavior") {
        emit(io::to_json(exact), out);
      } else {
        emit(io::to_json(sample_counts(exact, trials, seed)), out);
      }
      return kExitOk;
    }

    if (*bound) {
      const BellInequality ineq = load_inequality(ineq_path);
      const ModelSpec ms = parse_model(model, level);
      const EfficiencyMode mode = known_eta ? EfficiencyMode::one_sided_known(*known_eta) : EfficiencyMode::symmetric();
      try {
        const EfficiencyBound b = bound_via_bisection(ineq, ms, mode, q, tol);
        emit({{"etaLower", b.eta_lower}, {"etaUpper", b.eta_upper}, {"modelClass", ms.name()}, {"q", q}}, out);
        return kExitOk;
      } catch (const NeverViolated& e) {
        emit({{"etaLower", nullptr}, {"modelClass", ms.name()}, {"q", q}, {"status", "NeverViolated"}}, out);
        std::cerr << e.what() << "\n";
        return kExitNegative;
      }
    }

    if (*curve) {
      const BellInequality ineq = load_inequality(ineq_path);
      std::vector<double> grid;
      for (int k = 0; k < points; ++k) grid.push_back(points == 1 ? to : from + (to - from) * k / (points - 1));
      const std::string csv = io::curve_csv(unknown_vs_known_curve(ineq, grid, q, parse_model(model, level), tol));
      if (out.empty()) {
        std::cout << csv;
      } else {
        io::write_text_atomic(out, csv);
      }
      return kExitOk;
    }

    if (*nmax) {
      const BellInequality ineq = load_inequality(ineq_path);
      const double v = level == 0 ? nonsignalling_max_value(ineq) : npa_max_value(ineq, level);
      emit({{"value", v}, {"status", "Optimal"}, {"level", level}}, out);
      return kExitOk;
    }

    if (*ncheck) {
      const BehaviorVector p = io::read_behavior(behavior_path);
      json j;
      if (level == 0) {
        const bool ok = nonsignalling_feasible(p);
        j = {{"value", ok ? 1.0 : 0.0}, {"status", ok ? "Feasible" : "Infeasible"}, {"level", 0}};
      } else {
        const auto ms = build_moment_structure(p.scenario(), NpaLevel{level, false});
        const NpaCheck c = npa_check(ms, p);
        j = {{"value", c.margin}, {"status", c.feasible ? "Feasible" : "Infeasible"}, {"level", level}};
      }
      emit(j, out);
      return j["status"] == "Feasible" ? kExitOk : kExitNegative;
    }

    if (*repro) {
      ReproductionOptions opts;
      opts.level = repro_level;
      opts.seed = seed;
      opts.threads = threads;
      opts.tolerance = tol;
      opts.trials = repro_trials;
      std::vector<std::string> names;
      if (case_name == "all") {
        names = reproduction_case_names();
      } else {
        names = {case_name};
      }
      json reports = json::array();
      bool all_pass = true;
      for (const auto& n : names) {
        const ReproductionReport r = run_reproduction(n, opts);
        for (const auto& c : r.checks) {
          std::printf("%-22s %-22s observed %.6f  expected [%.4f, %.4f]  %s\n", r.name.c_str(), c.label.c_str(),
                      c.observed, c.lower, c.upper, c.pass ? "PASS" : "FAIL");
        }
        std::printf("%-22s %s (%.2f s)\n", r.name.c_str(), r.pass ? "PASS" : "FAIL", r.runtime_seconds);
        std::fflush(stdout);
        all_pass = all_pass && r.pass;
        reports.push_back(r.to_json());
      }
      if (!out.empty()) io::write_json(out, reports);
      return all_pass ? kExitOk : kExitError;
    }
  } catch (const NotViolated& e) {
    std::cerr << "not violated: " << e.what() << "\n";
    return kExitNegative;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}
