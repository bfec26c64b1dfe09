#include "detloop/efficiency.hpp"

#include <algorithm>
#include <cmath>

#include "detloop/errors.hpp"
#include "detloop/separation.hpp"
#include "detloop/simd.hpp"

namespace detloop {

std::string ModelSpec::name() const {
  switch (model) {
    case ModelClass::Classical:
      return "classical";
    case ModelClass::Nonsignalling:
      return "nonsignalling";
    case ModelClass::QuantumNpa:
      return "npa" + std::to_string(level);
  }
  return "unknown";
}

std::vector<double> scaled_coefficients(const BellInequality& ineq, EfficiencyMode mode, double eta) {
  const Scenario& s = ineq.scenario();
  const double ea = mode.one_sided ? mode.known_eta : eta;
  const double eb = eta;
  std::vector<double> c(ineq.coefficients().begin(), ineq.coefficients().end());
  for (int i = 0; i < s.n(); ++i) c[s.index_a(i)] *= ea;
  for (int j = 0; j < s.m(); ++j) c[s.index_b(j)] *= eb;
  for (int i = 0; i < s.n(); ++i) {
    for (int j = 0; j < s.m(); ++j) c[s.index_ab(i, j)] *= ea * eb;
  }
  return c;
}

ModelOracle::ModelOracle(const Scenario& scenario, ModelSpec model) : scenario_(scenario), model_(model) {
  switch (model.model) {
    case ModelClass::Classical:
      vertices_ = vertex_table(scenario);
      break;
    case ModelClass::Nonsignalling:
      break;
    case ModelClass::QuantumNpa:
      moments_ = build_moment_structure(scenario, NpaLevel{model.level, false});
      break;
  }
}

ModelOracle::Result ModelOracle::maximize(std::span<const double> coefficients) const {
  switch (model_.model) {
    case ModelClass::Classical: {
      // A linear functional peaks at a vertex of the polytope.
      std::size_t best = 0;
      const double value = simd::max_row_dot(vertices_->entries, vertices_->count, scenario_.dimension(), coefficients, &best);
      return {value, vertex(scenario_, best)};
    }
    case ModelClass::Nonsignalling: {
      auto opt = nonsignalling_maximize(scenario_, coefficients);
      return {opt.value, std::move(opt.behavior)};
    }
    case ModelClass::QuantumNpa: {
      auto opt = npa_maximize(*moments_, coefficients);
      return {opt.value, std::move(opt.behavior)};
    }
  }
  throw InvalidArgument("unknown model class");
}

namespace {

struct Parts {
  double joint = 0.0;
  double singles_a = 0.0;
  double singles_b = 0.0;
};

Parts split(const BellInequality& ineq, const BehaviorVector& p) {
  if (!(ineq.scenario() == p.scenario())) throw DimensionMismatch("inequality and behavior belong to different scenarios");
  const Scenario& s = ineq.scenario();
  Parts parts;
  for (int i = 0; i < s.n(); ++i) parts.singles_a += ineq.hA(i) * p.pA(i);
  for (int j = 0; j < s.m(); ++j) parts.singles_b += ineq.hB(j) * p.pB(j);
  for (int i = 0; i < s.n(); ++i) {
    for (int j = 0; j < s.m(); ++j) parts.joint += ineq.hAB(i, j) * p.pAB(i, j);
  }
  return parts;
}

constexpr double kDenominatorFloor = 1e-12;

}  // namespace

double eta_crit_symmetric(const BellInequality& ineq, const BehaviorVector& behavior) {
  const Parts p = split(ineq, behavior);
  if (p.joint <= kDenominatorFloor) throw NoThreshold("joint part is not positive; no efficiency yields a violation");
  const double eta = -(p.singles_a + p.singles_b) / p.joint;
  if (eta > 1.0 + kGeometryTolerance) throw NoThreshold("threshold above 1: not violated even with perfect detectors");
  return std::clamp(eta, 0.0, 1.0);
}

double eta_crit_one_sided(const BellInequality& ineq, const BehaviorVector& behavior, double q) {
  const Parts p = split(ineq, behavior);
  const double denom = p.joint + p.singles_a;
  if (denom <= kDenominatorFloor) throw NoThreshold("denominator is not positive; no efficiency reaches the value");
  const double eta = (q - p.singles_b) / denom;
  if (eta > 1.0 + kGeometryTolerance) throw NoThreshold("threshold above 1: value unreachable with perfect detectors");
  return std::clamp(eta, 0.0, 1.0);
}

EfficiencyBound bound_via_bisection(const ModelOracle& oracle, const BellInequality& ineq, EfficiencyMode mode,
                                    double q, double tolerance) {
  if (!(ineq.scenario() == oracle.scenario())) throw DimensionMismatch("oracle built for a different scenario");
  if (tolerance < 1e-4) throw InvalidArgument("bisection tolerance must be at least 1e-4");
  if (q < 0.0) throw InvalidArgument("required value must be nonnegative");
  if (mode.one_sided && !(mode.known_eta > 0.0 && mode.known_eta <= 1.0)) {
    throw InvalidArgument("known efficiency must lie in (0, 1]");
  }
  if (!validate_inequality(ineq)) throw InvalidArgument("inequality is not valid on the classical polytope");

  EfficiencyBound bound;
  bound.model = oracle.model();
  bound.mode = mode;
  bound.tolerance = tolerance;
  if (q > 0.0) bound.used_quantum_value = q;

  const double threshold = q + Tolerances::value;
  auto reaches = [&](double eta, std::optional<BehaviorVector>* witness) {
    ++bound.oracle_calls;
    auto result = oracle.maximize(scaled_coefficients(ineq, mode, eta));
    const bool ok = result.value > threshold;
    if (ok && witness != nullptr) *witness = std::move(result.behavior);
    return ok;
  };

  if (!reaches(1.0, &bound.witness)) {
    throw NeverViolated("the " + oracle.model().name() + " set cannot reach the required value even at eta = 1");
  }
  double lo = 0.0;
  double hi = 1.0;
  while (hi - lo > tolerance) {
    const double mid = 0.5 * (lo + hi);
    if (reaches(mid, &bound.witness)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  bound.eta_lower = lo;
  bound.eta_upper = hi;
  return bound;
}

EfficiencyBound bound_via_bisection(const BellInequality& ineq, ModelSpec model, EfficiencyMode mode, double q,
                                    double tolerance) {
  const ModelOracle oracle(ineq.scenario(), model);
  return bound_via_bisection(oracle, ineq, mode, q, tolerance);
}

Certification certify_from_observation(const BehaviorVector& observed, ModelSpec model, double tolerance) {
  SeparationOptions opts;
  opts.with_certificate = false;
  SeparationResult sep = find_violated_inequality(observed, opts);
  if (sep.status != SeparationStatus::Violated) {
    throw NotViolated("observed behavior is not separated from the classical cone");
  }
  const double q = *sep.quantum_value;
  EfficiencyBound bound = bound_via_bisection(*sep.inequality, model, EfficiencyMode::symmetric(), q, tolerance);
  return Certification{std::move(bound), std::move(*sep.inequality), q};
}

std::vector<CurvePoint> unknown_vs_known_curve(const BellInequality& ineq, const std::vector<double>& known_etas,
                                               double q, ModelSpec model, double tolerance) {
  if (!(q > 0.0)) throw InvalidArgument("curve requires a positive quantum value");
  const ModelOracle oracle(ineq.scenario(), model);
  std::vector<CurvePoint> curve;
  curve.reserve(known_etas.size());
  for (double known : known_etas) {
    if (!(known > 0.0 && known <= 1.0)) throw InvalidArgument("known efficiencies must lie in (0, 1]");
    CurvePoint point{known, std::nullopt, q};
    try {
      point.bound = bound_via_bisection(oracle, ineq, EfficiencyMode::one_sided_known(known), q, tolerance).eta_lower;
    } catch (const NeverViolated&) {
    }
    curve.push_back(point);
  }
  return curve;
}

}  // namespace detloop
