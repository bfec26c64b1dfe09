#include "doctest.h"

#include <cmath>
#include <random>

#include "detloop/errors.hpp"
#include "detloop/npa.hpp"
#include "detloop/quantum.hpp"

using namespace detloop;

TEST_CASE("npa: word reduction") {
  const MonomialWord w = reduce_word({{Party::B, 1}, {Party::A, 0}, {Party::A, 0}, {Party::B, 1}, {Party::A, 2}});
  CHECK(w.a == std::vector<int>{0, 2});
  CHECK(w.b == std::vector<int>{1});
  CHECK(w.adjoint().a == std::vector<int>{2, 0});
  CHECK(reduce_word({}).is_identity());
  // A1 A2 and its adjoint A2 A1 share an entry.
  const MonomialWord a1{{0}, {}}, a2{{1}, {}};
  CHECK(entry_word(a1, a2) == entry_word(a2, a1));
}

TEST_CASE("npa: moment matrix dimensions") {
  CHECK(build_moment_structure(Scenario(2, 2), {1, false}).dimension() == 5);
  CHECK(build_moment_structure(Scenario(2, 2), {1, true}).dimension() == 9);
  CHECK(build_moment_structure(Scenario(6, 5), {2, false}).dimension() == 92);
  CHECK_THROWS_AS(build_moment_structure(Scenario(6, 5), {3, false}, 100), CapExceeded);
}

TEST_CASE("npa: CH maximum is the Tsirelson value") {
  const double tsirelson = (std::sqrt(2.0) - 1) / 2;
  CHECK(npa_max_value(ch_inequality(), 1) == doctest::Approx(tsirelson).epsilon(1e-6));
  CHECK(npa_max_value(ch_inequality(), 2) == doctest::Approx(tsirelson).epsilon(1e-6));
}

TEST_CASE("npa: nonsignalling CH maximum is the PR-box value") {
  const auto opt = nonsignalling_maximize(Scenario(2, 2), ch_inequality().coefficients());
  CHECK(opt.value == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(nonsignalling_feasible(opt.behavior));
  CHECK(evaluate_inequality(ch_inequality(), opt.behavior) == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("npa: levels are nested on random inequalities") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int t = 0; t < 5; ++t) {
    std::vector<double> h(8);
    for (auto& x : h) x = u(rng);
    const BellInequality ineq(Scenario(2, 2), h);
    const double ns = nonsignalling_max_value(ineq);
    const double l1 = npa_max_value(ineq, 1);
    const double l2 = npa_max_value(ineq, 2);
    // Level 1 need not lie inside the nonsignalling polytope: its moment
    // matrix does not force every four-outcome probability to be
    // nonnegative. From level 2 on the A_i B_j words imply positivity.
    CHECK(ns >= l2 - 1e-6);
    CHECK(l1 >= l2 - 1e-6);
  }
}

TEST_CASE("npa: quantum behaviors pass, the PR box fails") {
  const auto st = tsirelson_ch_settings();
  const auto q = quantum_behavior(maximally_entangled_state(), st.a, st.b);
  CHECK(npa_feasible(q, 1));
  CHECK(npa_feasible(q, 2));
  CHECK(nonsignalling_feasible(q));
  const auto pr = BehaviorVector::from_parts({0.5, 0.5}, {0.5, 0.5}, {{0.5, 0.5}, {0.5, 0.0}});
  CHECK(nonsignalling_feasible(pr));
  CHECK_FALSE(npa_feasible(pr, 1));
  const auto check = npa_check(build_moment_structure(Scenario(2, 2), {1, false}), pr);
  CHECK_FALSE(check.feasible);
  CHECK(check.margin < 0.0);
  CHECK(check.moment_matrix.rows() == 5);
}

TEST_CASE("npa: signalling behavior is not nonsignalling") {
  const auto p = BehaviorVector::from_parts({0.5, 0.5}, {0.5, 0.5}, {{0.5, 0.0}, {0.0, 0.5}});
  // pAB(0,0) = pA(0) but pAB(0,1) = 0: feasible; pAB(1,1) = 0.5 too.
  CHECK(nonsignalling_feasible(p));
  const auto bad = BehaviorVector::from_parts({0.2, 0.5}, {0.5, 0.5}, {{0.4, 0.0}, {0.0, 0.0}});
  CHECK_FALSE(nonsignalling_feasible(bad));
}

TEST_CASE("npa: objective dimension is checked") {
  const auto ms = build_moment_structure(Scenario(2, 2), {1, false});
  const std::vector<double> wrong(3, 1.0);
  CHECK_THROWS_AS(npa_maximize(ms, wrong), DimensionMismatch);
}
