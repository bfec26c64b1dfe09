#pragma once

// Critical detection efficiencies, closed form and certified.
//
// With detector efficiencies (etaA, etaB) a +1-only behavior scales as
// pA -> etaA pA, pB -> etaB pB, pAB -> etaA etaB pAB, so an inequality's
// value splits into a joint part J = hAB.pAB and singles parts
// SA = hA.pA, SB = hB.pB:
//
//   Q(etaA, etaB) = etaA etaB J + etaA SA + etaB SB.
//
// The certified bound is the smallest eta for which some behavior of the
// chosen model class still reaches the required value; it is located by
// bisection over an oracle that maximizes the (linear) scaled functional.

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "detloop/npa.hpp"
#include "detloop/scenario.hpp"

namespace detloop {

enum class ModelClass { Classical, Nonsignalling, QuantumNpa };

struct ModelSpec {
  ModelClass model = ModelClass::Nonsignalling;
  int level = 0;  // NPA level for QuantumNpa

  static ModelSpec classical() { return {ModelClass::Classical, 0}; }
  static ModelSpec nonsignalling() { return {ModelClass::Nonsignalling, 0}; }
  static ModelSpec npa(int k) { return {ModelClass::QuantumNpa, k}; }
  std::string name() const;
};

/// Symmetric: etaA = etaB = eta. OneSided: Alice's detector has the known
/// efficiency, eta is Bob's. Transpose the inequality to bound Alice.
struct EfficiencyMode {
  bool one_sided = false;
  double known_eta = 1.0;

  static EfficiencyMode symmetric() { return {false, 1.0}; }
  static EfficiencyMode one_sided_known(double eta) { return {true, eta}; }
};

inline constexpr double kDefaultBisectionTolerance = 1e-3;

struct EfficiencyBound {
  double eta_lower = 0.0;
  double eta_upper = 1.0;
  ModelSpec model;
  EfficiencyMode mode;
  double tolerance = kDefaultBisectionTolerance;
  std::optional<double> used_quantum_value;
  /// Optimal behavior of the oracle at eta_upper (unscaled).
  std::optional<BehaviorVector> witness;
  int oracle_calls = 0;
};

/// Coefficients of the scaled functional, in the behavior layout.
std::vector<double> scaled_coefficients(const BellInequality& ineq, EfficiencyMode mode, double eta);

/// Maximizes a linear functional over the behaviors of one model class.
class ModelOracle {
 public:
  ModelOracle(const Scenario& scenario, ModelSpec model);

  const Scenario& scenario() const noexcept { return scenario_; }
  const ModelSpec& model() const noexcept { return model_; }

  struct Result {
    double value;
    BehaviorVector behavior;
  };
  Result maximize(std::span<const double> coefficients) const;

 private:
  Scenario scenario_;
  ModelSpec model_;
  std::optional<VertexTable> vertices_;
  std::optional<MomentStructure> moments_;
};

/// -(SA + SB) / J; throws NoThreshold when J <= 1e-12 or the ratio exceeds 1.
double eta_crit_symmetric(const BellInequality& ineq, const BehaviorVector& behavior);

/// (q - SB) / (J + SA): Alice's threshold with Bob's detector perfect.
double eta_crit_one_sided(const BellInequality& ineq, const BehaviorVector& behavior, double q);

/// Bisects eta over [0, 1] until the bracket is narrower than `tolerance`.
/// Throws NeverViolated when the oracle cannot exceed q even at eta = 1.
EfficiencyBound bound_via_bisection(const BellInequality& ineq, ModelSpec model, EfficiencyMode mode, double q = 0.0,
                                    double tolerance = kDefaultBisectionTolerance);

/// Same, reusing an oracle built for the inequality's scenario.
EfficiencyBound bound_via_bisection(const ModelOracle& oracle, const BellInequality& ineq, EfficiencyMode mode,
                                    double q = 0.0, double tolerance = kDefaultBisectionTolerance);

struct Certification {
  EfficiencyBound bound;
  BellInequality inequality;
  double quantum_value;
};

/// Synthesizes the maximally violated inequality for the observed behavior
/// and bounds the symmetric efficiency needed to reach its observed value.
/// Throws NotViolated when the behavior cannot be separated.
Certification certify_from_observation(const BehaviorVector& observed, ModelSpec model,
                                       double tolerance = kDefaultBisectionTolerance);

struct CurvePoint {
  double known_eta;
  std::optional<double> bound;  // empty: q unreachable at this known efficiency
  double q;
};

std::vector<CurvePoint> unknown_vs_known_curve(const BellInequality& ineq, const std::vector<double>& known_etas,
                                               double q, ModelSpec model,
                                               double tolerance = kDefaultBisectionTolerance);

}  // namespace detloop
