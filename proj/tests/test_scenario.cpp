#include "doctest.h"

#include <cmath>
#include <random>

#include "detloop/errors.hpp"
#include "detloop/scenario.hpp"

using namespace detloop;

TEST_CASE("scenario: dimension and index layout") {
  const Scenario s(3, 2);
  CHECK(s.dimension() == 11);
  CHECK(s.index_a(2) == 2);
  CHECK(s.index_b(0) == 3);
  CHECK(s.index_ab(0, 0) == 5);
  CHECK(s.index_ab(2, 1) == 10);
  CHECK_THROWS_AS(Scenario(0, 2), InvalidArgument);
}

TEST_CASE("scenario: vertex count and bit order") {
  const Scenario s(2, 3);
  const auto vs = enumerate_vertices(s);
  REQUIRE(vs.size() == 32);
  // k = 0b10 001: a_1 = 1, a_2 = 0, b = (0, 0, 1).
  const BehaviorVector v = vertex(s, 0b10001);
  CHECK(v.pA(0) == 1.0);
  CHECK(v.pA(1) == 0.0);
  CHECK(v.pB(2) == 1.0);
  CHECK(v.pAB(0, 2) == 1.0);
  CHECK(v.pAB(1, 2) == 0.0);
  CHECK(v.pAB(0, 0) == 0.0);
  CHECK_THROWS_AS(vertex(s, 32), InvalidArgument);
  CHECK_THROWS_AS(vertex_table(Scenario(11, 11)), CapExceeded);
}

TEST_CASE("scenario: every vertex has product joints") {
  const Scenario s(3, 3);
  const VertexTable t = vertex_table(s);
  for (std::size_t k = 0; k < t.count; ++k) {
    const auto row = t.row(k);
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) CHECK(row[s.index_ab(i, j)] == row[s.index_a(i)] * row[s.index_b(j)]);
    }
  }
}

TEST_CASE("scenario: evaluation is linear") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const BellInequality ch = ch_inequality();
  for (int t = 0; t < 50; ++t) {
    std::vector<double> a(8), b(8);
    for (auto& x : a) x = u(rng);
    for (auto& x : b) x = u(rng);
    const BehaviorVector pa(Scenario(2, 2), a), pb(Scenario(2, 2), b);
    const double alpha = u(rng);
    const double mixed = evaluate_inequality(ch, pa.mix(pb, alpha));
    CHECK(mixed == doctest::Approx(alpha * evaluate_inequality(ch, pa) + (1 - alpha) * evaluate_inequality(ch, pb)));
  }
}

TEST_CASE("scenario: count normalization is scale invariant in sign") {
  CountRecord c;
  c.scenario = Scenario(2, 2);
  c.nA = {400, 500};
  c.nB = {450, 520};
  c.nAB = {300, 310, 320, 100};
  c.trialsPerContext = 1000;
  const BellInequality ch = ch_inequality();
  const double q1 = evaluate_inequality(ch, behavior_from_counts(c, 1000));
  const double q2 = evaluate_inequality(ch, behavior_from_counts(c, 2000));
  CHECK(q2 == doctest::Approx(q1 / 2.0));
  CHECK(std::signbit(q1) == std::signbit(q2));
  CHECK_THROWS_AS(behavior_from_counts(c, 100), InvalidBaseRate);
  CHECK_THROWS_AS(behavior_from_counts(c, 0), InvalidBaseRate);
}

TEST_CASE("scenario: invalid count records") {
  CountRecord c;
  c.scenario = Scenario(1, 1);
  c.nA = {5};
  c.nB = {5};
  c.nAB = {11};
  c.trialsPerContext = 10;
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
  c.nAB = {-1};
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
  c.nAB = {1, 2};
  CHECK_THROWS_AS(c.validate(), DimensionMismatch);
}

TEST_CASE("scenario: CH examples") {
  const BellInequality ch = ch_inequality();
  CHECK(validate_inequality(ch));
  // PR box: pA = pB = 1/2, joints 1/2 except (2, 2) which is 0.
  const auto pr = BehaviorVector::from_parts({0.5, 0.5}, {0.5, 0.5}, {{0.5, 0.5}, {0.5, 0.0}});
  CHECK(evaluate_inequality(ch, pr) == doctest::Approx(0.5));
  const double c = std::cos(M_PI / 8);
  const double s = std::sin(M_PI / 8);
  const auto ts = BehaviorVector::from_parts({0.5, 0.5}, {0.5, 0.5}, {{c * c / 2, c * c / 2}, {c * c / 2, s * s / 2}});
  CHECK(evaluate_inequality(ch, ts) == doctest::Approx((std::sqrt(2.0) - 1) / 2).epsilon(1e-12));
  for (const auto& v : enumerate_vertices(Scenario(2, 2))) CHECK(evaluate_inequality(ch, v) <= 0.0);
}

TEST_CASE("scenario: builtin 6x5 inequality") {
  const BellInequality i = builtin_i6522();
  CHECK(i.scenario() == Scenario(6, 5));
  CHECK(validate_inequality(i));
  CHECK(i.hAB(4, 0) == 6);
  CHECK(i.hAB(4, 3) == -6);
  CHECK(i.hA(5) == 0);
  const BellInequality t = i.transposed();
  CHECK(t.scenario() == Scenario(5, 6));
  CHECK(t.hAB(3, 4) == i.hAB(4, 3));
  CHECK(t.hA(0) == i.hB(0));
}

TEST_CASE("scenario: broken inequality fails validation") {
  const BellInequality bad(Scenario(1, 1), {1.0, 0.0, 0.0});
  CHECK_FALSE(validate_inequality(bad));
}

TEST_CASE("scenario: malformed inputs") {
  CHECK_THROWS_AS(BehaviorVector(Scenario(2, 2), std::vector<double>(7, 0.0)), DimensionMismatch);
  CHECK_THROWS_AS(BellInequality(Scenario(1, 1), {NAN, 0, 0}), InvalidArgument);
  CHECK_THROWS_AS(BehaviorVector::from_parts({0.1}, {0.1}, {{0.1, 0.2}}), DimensionMismatch);
  const BehaviorVector p(Scenario(1, 1), {0.1, 0.2, 0.05});
  CHECK_THROWS_AS(evaluate_inequality(ch_inequality(), p), DimensionMismatch);
}
