#include "doctest.h"

#include <cmath>
#include <random>

#include "detloop/efficiency.hpp"
#include "detloop/errors.hpp"
#include "detloop/quantum.hpp"
#include "detloop/separation.hpp"

using namespace detloop;

namespace {

BehaviorVector tsirelson_point() {
  const auto st = tsirelson_ch_settings();
  return quantum_behavior(maximally_entangled_state(), st.a, st.b);
}

}  // namespace

TEST_CASE("efficiency: scaled coefficients reproduce the scaled value") {
  const BellInequality ch = ch_inequality();
  const BehaviorVector p = tsirelson_point();
  const auto h = scaled_coefficients(ch, EfficiencyMode::symmetric(), 0.8);
  double q = 0.0;
  for (std::size_t l = 0; l < h.size(); ++l) q += h[l] * p.values()[l];
  CHECK(q == doctest::Approx(evaluate_inequality(ch, apply_detection_efficiency(p, DetectionModel::symmetric(0.8)))));
  const auto g = scaled_coefficients(ch, EfficiencyMode::one_sided_known(0.9), 0.7);
  double r = 0.0;
  for (std::size_t l = 0; l < g.size(); ++l) r += g[l] * p.values()[l];
  CHECK(r == doctest::Approx(evaluate_inequality(ch, apply_detection_efficiency(p, DetectionModel(0.9, 0.7)))));
}

TEST_CASE("efficiency: closed-form threshold is a zero crossing") {
  const BellInequality ch = ch_inequality();
  const BehaviorVector p = tsirelson_point();
  const double eta = eta_crit_symmetric(ch, p);
  CHECK(eta == doctest::Approx(2.0 / (1.0 + std::sqrt(2.0))).epsilon(1e-12));
  const double q = evaluate_inequality(ch, apply_detection_efficiency(p, DetectionModel::symmetric(eta)));
  CHECK(std::abs(q) <= 1e-12);
}

TEST_CASE("efficiency: one-sided closed form") {
  const BellInequality ch = ch_inequality();
  const BehaviorVector p = tsirelson_point();
  const double eta = eta_crit_one_sided(ch, p, 0.0);
  const double q = evaluate_inequality(ch, apply_detection_efficiency(p, DetectionModel(eta, 1.0)));
  CHECK(std::abs(q) <= 1e-12);
  CHECK(eta_crit_one_sided(ch, p, 0.05) > eta);
}

TEST_CASE("efficiency: no threshold for non-violating data") {
  const BehaviorVector v = vertex(Scenario(2, 2), 5);
  CHECK_THROWS_AS(eta_crit_symmetric(ch_inequality(), v), NoThreshold);
}

TEST_CASE("efficiency: CH bounds") {
  const auto ns = bound_via_bisection(ch_inequality(), ModelSpec::nonsignalling(), EfficiencyMode::symmetric());
  CHECK(ns.eta_lower == doctest::Approx(2.0 / 3.0).epsilon(2e-3));
  CHECK(ns.eta_upper - ns.eta_lower <= ns.tolerance);
  CHECK(ns.eta_lower <= 2.0 / 3.0);
  REQUIRE(ns.witness);
  const auto cl = bound_via_bisection(ch_inequality(), ModelSpec::nonsignalling(), EfficiencyMode::symmetric(), 0.0, 1e-4);
  CHECK(cl.eta_upper - cl.eta_lower <= 1e-4);
  CHECK_THROWS_AS(bound_via_bisection(ch_inequality(), ModelSpec::classical(), EfficiencyMode::symmetric()),
                  NeverViolated);
  CHECK_THROWS_AS(bound_via_bisection(ch_inequality(), ModelSpec::nonsignalling(), EfficiencyMode::symmetric(), 0.6),
                  NeverViolated);
}

TEST_CASE("efficiency: bounds grow with the required value") {
  double last = 0.0;
  for (double q : {0.0, 0.05, 0.1, 0.2}) {
    const auto b = bound_via_bisection(ch_inequality(), ModelSpec::nonsignalling(), EfficiencyMode::symmetric(), q);
    CHECK(b.eta_lower >= last - 1e-3);
    last = b.eta_lower;
  }
}

TEST_CASE("efficiency: nonsignalling bound lies below the quantum bound") {
  const auto ns = bound_via_bisection(ch_inequality(), ModelSpec::nonsignalling(), EfficiencyMode::symmetric(), 0.05);
  const auto qu = bound_via_bisection(ch_inequality(), ModelSpec::npa(2), EfficiencyMode::symmetric(), 0.05);
  CHECK(ns.eta_lower <= qu.eta_lower + 1e-3);
}

TEST_CASE("efficiency: argument validation") {
  CHECK_THROWS_AS(bound_via_bisection(ch_inequality(), ModelSpec::nonsignalling(), EfficiencyMode::symmetric(), 0.0, 1e-6),
                  InvalidArgument);
  CHECK_THROWS_AS(bound_via_bisection(ch_inequality(), ModelSpec::nonsignalling(), EfficiencyMode::symmetric(), -1.0),
                  InvalidArgument);
  CHECK_THROWS_AS(bound_via_bisection(ch_inequality(), ModelSpec::nonsignalling(), EfficiencyMode::one_sided_known(0.0)),
                  InvalidArgument);
  const BellInequality bad(Scenario(1, 1), {1.0, 0.0, 0.0});
  CHECK_THROWS_AS(bound_via_bisection(bad, ModelSpec::nonsignalling(), EfficiencyMode::symmetric()), InvalidArgument);
}

TEST_CASE("efficiency: certification from an observed behavior") {
  const BehaviorVector p = apply_detection_efficiency(tsirelson_point(), DetectionModel::symmetric(0.9));
  const auto c = certify_from_observation(p, ModelSpec::nonsignalling());
  CHECK(c.quantum_value > 0.0);
  CHECK(c.bound.eta_lower < 0.9);
  CHECK(c.bound.eta_lower > 0.5);
  CHECK_THROWS_AS(certify_from_observation(vertex(Scenario(2, 2), 3), ModelSpec::nonsignalling()), NotViolated);
}

TEST_CASE("efficiency: known-detector curve") {
  const std::vector<double> known = {0.8, 0.9, 1.0};
  const auto curve = unknown_vs_known_curve(ch_inequality(), known, 0.04, ModelSpec::nonsignalling());
  REQUIRE(curve.size() == 3);
  for (std::size_t k = 0; k < curve.size(); ++k) {
    REQUIRE(curve[k].bound);
    CHECK(curve[k].q == 0.04);
    if (k > 0) CHECK(*curve[k].bound <= *curve[k - 1].bound + 1e-3);
  }
  // Unreachable points carry no bound.
  const auto high = unknown_vs_known_curve(ch_inequality(), {0.5}, 0.4, ModelSpec::nonsignalling());
  CHECK_FALSE(high[0].bound);
}

TEST_CASE("efficiency: curve endpoint matches the closed form on the optimal behavior") {
  const double q = 0.1;
  const auto curve = unknown_vs_known_curve(ch_inequality().transposed(), {1.0}, q, ModelSpec::nonsignalling(), 1e-4);
  REQUIRE(curve[0].bound);
  // The oracle's optimum at the threshold reaches q; the closed form on
  // that behavior reproduces the threshold.
  const auto b = bound_via_bisection(ch_inequality().transposed(), ModelSpec::nonsignalling(),
                                     EfficiencyMode::one_sided_known(1.0), q, 1e-4);
  REQUIRE(b.witness);
  const double closed = eta_crit_one_sided(ch_inequality(), b.witness->transposed(), q);
  CHECK(closed == doctest::Approx(*curve[0].bound).epsilon(2e-3));
}
