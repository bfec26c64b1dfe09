// One PASS/FAIL line per acceptance criterion. Exit status is nonzero when
// any criterion fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>

#include "detloop/efficiency.hpp"
#include "detloop/errors.hpp"
#include "detloop/npa.hpp"
#include "detloop/quantum.hpp"
#include "detloop/reproduce.hpp"
#include "detloop/separation.hpp"

using namespace detloop;

namespace {

int failures = 0;

void report(int id, bool pass, const std::string& detail) {
  std::printf("criterion %d: %s  %s\n", id, pass ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

// Reports a reproduction case with a runtime limit.
void reproduction(int id, const std::string& name, std::optional<int> level, double limit_s) {
  ReproductionOptions o;
  o.level = level;
  const ReproductionReport r = run_reproduction(name, o);
  std::string detail = name;
  for (const auto& c : r.checks) {
    char buf[160];
    std::snprintf(buf, sizeof buf, " %s=%.6f [%.4f, %.4f]", c.label.c_str(), c.observed, c.lower, c.upper);
    detail += buf;
  }
  detail += fmt(" runtime=%.1fs (limit %.0fs)", r.runtime_seconds, limit_s);
  report(id, r.pass && r.runtime_seconds < limit_s, detail);
}

BehaviorVector random_mixture(const Scenario& s, std::mt19937_64& rng, int terms) {
  std::uniform_int_distribution<std::uint64_t> pick(0, (std::uint64_t{1} << (s.n() + s.m())) - 1);
  std::exponential_distribution<double> e(1.0);
  std::vector<double> w(static_cast<std::size_t>(terms));
  double total = 0.0;
  for (auto& x : w) total += (x = e(rng));
  BehaviorVector p = BehaviorVector::zeros(s);
  for (int t = 0; t < terms; ++t) {
    const BehaviorVector v = vertex(s, pick(rng));
    for (std::size_t l = 0; l < s.dimension(); ++l) p.values()[l] += w[static_cast<std::size_t>(t)] / total * v.values()[l];
  }
  return p;
}

BehaviorVector random_quantum(int n, int m, std::mt19937_64& rng) {
  std::vector<MeasurementDirection> a, b;
  for (int i = 0; i < n; ++i) a.push_back(random_direction(rng));
  for (int j = 0; j < m; ++j) b.push_back(random_direction(rng));
  return quantum_behavior(maximally_entangled_state(), a, b);
}

void property_suite() {
  const auto start = std::chrono::steady_clock::now();
  std::string detail;
  bool all = true;

  // (a) vertex mixtures are never separated.
  {
    auto rng = make_rng(101);
    int violated = 0;
    SeparationOptions o;
    o.with_certificate = false;
    for (int t = 0; t < 1000; ++t) {
      const Scenario s = t % 2 ? Scenario(3, 3) : Scenario(2, 3);
      if (find_violated_inequality(random_mixture(s, rng, 1 + t % 8), o).status == SeparationStatus::Violated) ++violated;
    }
    all = all && violated == 0;
    detail += fmt("(a) violated mixtures %.0f/1000;", violated);
  }

  // (b) separation and decomposition LPs agree.
  {
    auto rng = make_rng(102);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int disagree = 0;
    SeparationOptions o;
    o.with_certificate = false;
    for (int t = 0; t < 1000; ++t) {
      const Scenario s = t % 2 ? Scenario(2, 2) : Scenario(2, 3);
      const BehaviorVector p = random_quantum(s.n(), s.m(), rng).mix(random_mixture(s, rng, 4), u(rng));
      const bool violated = find_violated_inequality(p, o).status == SeparationStatus::Violated;
      const auto cert = is_classical(p);
      bool ok = violated != cert.has_value();
      if (cert) {
        const BehaviorVector back = cert->reconstruct(s);
        for (std::size_t l = 0; l < s.dimension(); ++l) ok = ok && std::abs(back.values()[l] - p.values()[l]) <= kCertificateTolerance;
      }
      disagree += ok ? 0 : 1;
    }
    all = all && disagree == 0;
    detail += fmt(" (b) disagreements %.0f/1000;", disagree);
  }

  // (c) the closed-form threshold zeroes the scaled value.
  {
    auto rng = make_rng(103);
    int found = 0;
    double worst = 0.0;
    SeparationOptions o;
    o.with_certificate = false;
    for (int draw = 0; found < 100 && draw < 100000; ++draw) {
      const BehaviorVector p = random_quantum(2 + draw % 2, 2 + draw % 2, rng);
      const auto r = find_violated_inequality(p, o);
      if (r.status != SeparationStatus::Violated) continue;
      double eta = 0.0;
      try {
        eta = eta_crit_symmetric(*r.inequality, p);
      } catch (const NoThreshold&) {
        continue;
      }
      const double q = evaluate_inequality(*r.inequality, apply_detection_efficiency(p, DetectionModel::symmetric(eta)));
      worst = std::max(worst, std::abs(q));
      ++found;
    }
    all = all && found == 100 && worst <= 1e-9;
    detail += fmt(" (c) %.0f instances, max |Q(eta_crit)| %.2e;", found, worst);
  }

  // (d) level 1 >= level 2 on random inequalities.
  {
    auto rng = make_rng(104);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    int bad = 0;
    double worst = 0.0;
    for (int t = 0; t < 20; ++t) {
      const Scenario s = t % 2 ? Scenario(3, 3) : Scenario(2, 2);
      std::vector<double> h(s.dimension());
      for (auto& x : h) x = u(rng);
      const BellInequality ineq(s, h);
      const double gap = npa_max_value(ineq, 1) - npa_max_value(ineq, 2);
      worst = std::min(worst, gap);
      bad += gap >= -1e-6 ? 0 : 1;
    }
    all = all && bad == 0;
    detail += fmt(" (d) level-order violations %.0f/20 (min gap %.1e);", bad, worst);
  }

  // (e) known-detector curves.
  {
    const ReproductionReport r = run_reproduction("known-detector-curve", {});
    all = all && r.pass;
    for (const auto& c : r.checks) {
      char buf[96];
      std::snprintf(buf, sizeof buf, " %s %.0f", c.label.c_str(), c.observed);
      detail += buf;
    }
    detail += r.pass ? " (e) ok;" : " (e) failed;";
  }

  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  detail += fmt(" runtime=%.1fs", secs);
  report(10, all, detail);
}

void guarded(int id, const std::function<void()>& body) {
  try {
    body();
  } catch (const std::exception& e) {
    report(id, false, std::string("error: ") + e.what());
  }
}

}  // namespace

int main() {
  guarded(1, [] { reproduction(1, "ch-eta", 0, 10.0); });
  guarded(2, [] { reproduction(2, "ch-eta", 2, 120.0); });
  guarded(3, [] { reproduction(3, "i6522-q2", 2, 300.0); });
  guarded(4, [] { reproduction(4, "i6522-eta", 2, 1e9); });
  try {
    const ReproductionReport r = run_reproduction("i6522-onesided", {});
    const auto& a = r.checks.at(0);
    const auto& b = r.checks.at(1);
    report(5, a.pass, fmt("one-sided bound (q = 0) %.6f, required > %.3f", a.observed, a.lower));
    report(6, b.pass, fmt("one-sided bound (q = 1.971) %.6f, required > %.3f", b.observed, b.lower));
  } catch (const std::exception& e) {
    report(5, false, std::string("error: ") + e.what());
    report(6, false, std::string("error: ") + e.what());
  }
  guarded(7, [] { reproduction(7, "random-success", std::nullopt, 1800.0); });
  guarded(8, [] { reproduction(8, "eta-recon-quantum", 2, 1e9); });
  guarded(9, [] { reproduction(9, "eta-recon-ns", 0, 1e9); });
  guarded(10, property_suite);
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
