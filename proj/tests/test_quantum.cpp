#include "doctest.h"

#include <cmath>

#include "detloop/errors.hpp"
#include "detloop/quantum.hpp"

using namespace detloop;

TEST_CASE("quantum: Tsirelson behavior of the maximally entangled state") {
  const auto st = tsirelson_ch_settings();
  const auto p = quantum_behavior(maximally_entangled_state(), st.a, st.b);
  const double c2 = std::pow(std::cos(M_PI / 8), 2) / 2;
  CHECK(p.pA(0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(p.pB(1) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(p.pAB(0, 0) == doctest::Approx(c2).epsilon(1e-12));
  CHECK(p.pAB(1, 1) == doctest::Approx(0.5 - c2).epsilon(1e-12));
  CHECK(evaluate_inequality(ch_inequality(), p) == doctest::Approx((std::sqrt(2.0) - 1) / 2).epsilon(1e-12));
}

TEST_CASE("quantum: correlations follow the Bloch angle") {
  const auto a = MeasurementDirection::normalized(1.0, 0.0, 1.0);
  const auto b = MeasurementDirection(0.0, 0.0, 1.0);
  const auto p = quantum_behavior(maximally_entangled_state(), {a}, {b});
  // p(++) = (1 + a.b') / 4 with b' = b reflected in y for Phi+.
  CHECK(p.pAB(0, 0) == doctest::Approx((1 + std::sqrt(0.5)) / 4).epsilon(1e-12));
}

TEST_CASE("quantum: product states give product statistics") {
  const auto a = MeasurementDirection::normalized(0.3, -0.2, 0.9);
  const auto b = MeasurementDirection::normalized(-0.5, 0.1, 0.4);
  const auto x = MeasurementDirection::normalized(0.2, 0.7, -0.1);
  const auto p = quantum_behavior(product_state(a, b), {x, a}, {b, x});
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) CHECK(p.pAB(i, j) == doctest::Approx(p.pA(i) * p.pB(j)).epsilon(1e-12));
  }
  CHECK(p.pA(1) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("quantum: efficiency scaling") {
  const auto st = tsirelson_ch_settings();
  const auto p = quantum_behavior(maximally_entangled_state(), st.a, st.b);
  const auto lossy = apply_detection_efficiency(p, DetectionModel(0.8, 0.6));
  CHECK(lossy.pA(1) == doctest::Approx(0.8 * p.pA(1)));
  CHECK(lossy.pB(0) == doctest::Approx(0.6 * p.pB(0)));
  CHECK(lossy.pAB(1, 0) == doctest::Approx(0.48 * p.pAB(1, 0)));
  CHECK_THROWS_AS(DetectionModel(1.2, 0.5), InvalidArgument);
  CHECK_THROWS_AS(DetectionModel(-0.1, 0.5), InvalidArgument);
}

TEST_CASE("quantum: state validation") {
  Eigen::Matrix4cd bad = Eigen::Matrix4cd::Identity() / 2.0;
  CHECK_THROWS_AS(TwoQubitState{bad}, InvalidArgument);
  Eigen::Matrix4cd neg = Eigen::Matrix4cd::Zero();
  neg(0, 0) = 1.5;
  neg(1, 1) = -0.5;
  CHECK_THROWS_AS(TwoQubitState{neg}, InvalidArgument);
  CHECK_THROWS_AS(MeasurementDirection(1.0, 1.0, 0.0), InvalidArgument);
  CHECK(maximally_entangled_state().purity() == doctest::Approx(1.0));
  CHECK(depolarized_maximally_entangled(0.0).purity() == doctest::Approx(0.25));
  CHECK(maximally_entangled_state().reduced_a().isApprox(Eigen::Matrix2cd::Identity() / 2.0, 1e-12));
}

TEST_CASE("quantum: random directions are unit and reproducible") {
  auto r1 = make_rng(5, 3);
  auto r2 = make_rng(5, 3);
  auto r3 = make_rng(5, 4);
  for (int t = 0; t < 100; ++t) {
    const auto a = random_direction(r1);
    const auto b = random_direction(r2);
    const auto c = random_direction(r3);
    CHECK(a.bloch() == b.bloch());
    CHECK(a.bloch() != c.bloch());
    CHECK(a.x() * a.x() + a.y() * a.y() + a.z() * a.z() == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("quantum: sampling is deterministic per seed and consistent") {
  const auto st = tsirelson_ch_settings();
  const auto p = quantum_behavior(maximally_entangled_state(), st.a, st.b);
  const auto c1 = sample_counts(p, 20000, 99);
  const auto c2 = sample_counts(p, 20000, 99);
  const auto c3 = sample_counts(p, 20000, 100);
  CHECK(c1.nAB == c2.nAB);
  CHECK(c1.nA == c2.nA);
  CHECK(c1.nAB != c3.nAB);
  c1.validate();
  const auto est = behavior_from_counts(c1, 20000);
  for (std::size_t l = 0; l < p.values().size(); ++l) CHECK(std::abs(est.values()[l] - p.values()[l]) < 0.02);
}

TEST_CASE("quantum: sampling rejects behaviors without a four-outcome table") {
  const auto p = BehaviorVector::from_parts({0.2}, {0.5}, {{0.4}});
  CHECK_THROWS_AS(sample_counts(p, 10, 1), InvalidBehavior);
  const auto q = BehaviorVector::from_parts({0.9}, {0.9}, {{0.1}});
  CHECK_THROWS_AS(sample_counts(q, 10, 1), InvalidBehavior);
}
