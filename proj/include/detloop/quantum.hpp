#pragma once

// Two-qubit states, projective dichotomic measurements along Bloch
// directions, lossy detection and finite-sample counts.

#include <array>
#include <complex>
#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "detloop/scenario.hpp"

namespace detloop {

class TwoQubitState {
 public:
  /// Validates hermiticity (1e-12), trace (1e-12) and eigenvalues (>= -1e-10).
  explicit TwoQubitState(const Eigen::Matrix4cd& density);

  const Eigen::Matrix4cd& density() const noexcept { return rho_; }
  double purity() const;
  Eigen::Matrix2cd reduced_a() const;
  Eigen::Matrix2cd reduced_b() const;

 private:
  Eigen::Matrix4cd rho_;
};

class MeasurementDirection {
 public:
  /// Requires unit norm within 1e-12.
  MeasurementDirection(double x, double y, double z);
  static MeasurementDirection normalized(double x, double y, double z);

  const std::array<double, 3>& bloch() const noexcept { return v_; }
  double x() const noexcept { return v_[0]; }
  double y() const noexcept { return v_[1]; }
  double z() const noexcept { return v_[2]; }

  /// (1 + n.sigma) / 2
  Eigen::Matrix2cd projector() const;

 private:
  std::array<double, 3> v_;
};

struct DetectionModel {
  double etaA = 1.0;
  double etaB = 1.0;

  DetectionModel() = default;
  DetectionModel(double eta_a, double eta_b);
  static DetectionModel symmetric(double eta) { return {eta, eta}; }
};

/// Seeded generator for a (seed, stream) pair; streams give independent
/// reproducible sequences for parallel trials.
std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream = 0);

/// |Phi+><Phi+| with |Phi+> = (|00> + |11>) / sqrt 2.
TwoQubitState maximally_entangled_state();

/// v |Phi+><Phi+| + (1 - v) I/4.
TwoQubitState depolarized_maximally_entangled(double visibility);

/// Pure product of two Bloch directions.
TwoQubitState product_state(const MeasurementDirection& a, const MeasurementDirection& b);

MeasurementDirection random_direction(std::mt19937_64& rng);
MeasurementDirection random_direction(std::uint64_t seed);

BehaviorVector quantum_behavior(const TwoQubitState& state, const std::vector<MeasurementDirection>& a_dirs,
                                const std::vector<MeasurementDirection>& b_dirs);

/// Singles scaled by their detector's efficiency, joints by the product.
BehaviorVector apply_detection_efficiency(const BehaviorVector& behavior, const DetectionModel& model);

struct SamplingOptions {
  /// Context (i, singles_context_a) supplies Alice's count for setting i,
  /// and (singles_context_b, j) Bob's count for setting j.
  int singles_context_a = 0;
  int singles_context_b = 0;
};

/// Draws trials_per_context four-outcome trials per setting pair from
/// p(++) = pAB, p(+-) = pA - pAB, p(-+) = pB - pAB, p(--) = 1 - pA - pB + pAB.
CountRecord sample_counts(const BehaviorVector& behavior, std::int64_t trials_per_context, std::uint64_t seed,
                          const SamplingOptions& options = {});

/// The optimal Clauser-Horne point of |Phi+>: settings at 0 and 90 degrees
/// for Alice, 45 and -45 for Bob, all in the x-z plane.
struct CHSettings {
  std::vector<MeasurementDirection> a;
  std::vector<MeasurementDirection> b;
};
CHSettings tsirelson_ch_settings();

}  // namespace detloop
