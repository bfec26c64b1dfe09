#pragma once

// Measurement scenarios, behaviors and Bell inequalities for two parties with
// dichotomic observables. Only +1 outcomes are tracked.
//
// Flattened layout used everywhere (behaviors, inequalities, vertices):
//   [ pA_1 .. pA_n | pB_1 .. pB_m | pAB_11 pAB_12 .. pAB_1m pAB_21 .. pAB_nm ]
// i.e. Alice singles, Bob singles, then joints row-major over (i, j).

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace detloop {

inline constexpr double kGeometryTolerance = 1e-9;
inline constexpr double kCertificateTolerance = 1e-7;
inline constexpr int kDefaultVertexCapLog2 = 20;

class Scenario {
 public:
  Scenario(int n, int m);

  int n() const noexcept { return n_; }
  int m() const noexcept { return m_; }
  std::size_t dimension() const noexcept { return static_cast<std::size_t>(n_ + m_ + n_ * m_); }

  std::size_t index_a(int i) const noexcept { return static_cast<std::size_t>(i); }
  std::size_t index_b(int j) const noexcept { return static_cast<std::size_t>(n_ + j); }
  std::size_t index_ab(int i, int j) const noexcept { return static_cast<std::size_t>(n_ + m_ + i * m_ + j); }

  /// Swaps the roles of Alice and Bob.
  Scenario transposed() const { return {m_, n_}; }

  friend bool operator==(const Scenario&, const Scenario&) = default;

 private:
  int n_;
  int m_;
};

/// Probabilities of +1 outcomes in the flattened layout.
class BehaviorVector {
 public:
  BehaviorVector(Scenario scenario, std::vector<double> values);
  static BehaviorVector zeros(Scenario scenario);
  static BehaviorVector from_parts(const std::vector<double>& pA, const std::vector<double>& pB,
                                   const std::vector<std::vector<double>>& pAB);

  const Scenario& scenario() const noexcept { return scenario_; }
  std::span<const double> values() const noexcept { return values_; }
  std::span<double> values() noexcept { return values_; }

  double pA(int i) const noexcept { return values_[scenario_.index_a(i)]; }
  double pB(int j) const noexcept { return values_[scenario_.index_b(j)]; }
  double pAB(int i, int j) const noexcept { return values_[scenario_.index_ab(i, j)]; }
  double& pA(int i) noexcept { return values_[scenario_.index_a(i)]; }
  double& pB(int j) noexcept { return values_[scenario_.index_b(j)]; }
  double& pAB(int i, int j) noexcept { return values_[scenario_.index_ab(i, j)]; }

  /// alpha * this + (1 - alpha) * other.
  BehaviorVector mix(const BehaviorVector& other, double alpha) const;

  /// Every entry within [-tol, 1 + tol].
  bool in_unit_box(double tol = kGeometryTolerance) const noexcept;

  BehaviorVector transposed() const;

 private:
  Scenario scenario_;
  std::vector<double> values_;
};

/// Coefficients h of the inequality h . P <= 0 (classical bound fixed at 0).
class BellInequality {
 public:
  BellInequality(Scenario scenario, std::vector<double> coefficients);
  static BellInequality from_parts(const std::vector<double>& hA, const std::vector<double>& hB,
                                   const std::vector<std::vector<double>>& hAB);

  const Scenario& scenario() const noexcept { return scenario_; }
  std::span<const double> coefficients() const noexcept { return h_; }

  double hA(int i) const noexcept { return h_[scenario_.index_a(i)]; }
  double hB(int j) const noexcept { return h_[scenario_.index_b(j)]; }
  double hAB(int i, int j) const noexcept { return h_[scenario_.index_ab(i, j)]; }

  BellInequality transposed() const;

 private:
  Scenario scenario_;
  std::vector<double> h_;
};

/// Observed +1 counts; the singles come from one designated context each.
struct CountRecord {
  Scenario scenario{1, 1};
  std::vector<std::int64_t> nA;
  std::vector<std::int64_t> nB;
  std::vector<std::int64_t> nAB;  // row-major n x m
  std::int64_t trialsPerContext = 0;

  std::int64_t joint(int i, int j) const { return nAB[static_cast<std::size_t>(i * scenario.m() + j)]; }

  /// Throws InvalidArgument on negative counts, wrong sizes or counts above
  /// trialsPerContext.
  void validate() const;
};

/// Convex (or, for the detection-loophole-free test, conic) decomposition of
/// a behavior into polytope vertices:  behavior = scale * sum_k w_k v_k,
/// with w_k >= 0 and sum_k w_k = 1. scale <= 1 means the behavior lies in
/// the classical polytope itself.
struct ClassicalityCertificate {
  std::vector<std::pair<std::size_t, double>> weights;
  double scale = 1.0;

  BehaviorVector reconstruct(const Scenario& scenario) const;
};

/// Row-major table of all 2^(n+m) deterministic vertices.
struct VertexTable {
  Scenario scenario{1, 1};
  std::size_t count = 0;
  std::vector<double> entries;  // count x dimension

  std::span<const double> row(std::size_t k) const {
    const std::size_t d = scenario.dimension();
    return {entries.data() + k * d, d};
  }
};

/// Vertex k from the binary expansion (a_1..a_n, b_1..b_m) of k, a_1 the
/// most significant bit.
BehaviorVector vertex(const Scenario& scenario, std::uint64_t k);

std::vector<BehaviorVector> enumerate_vertices(const Scenario& scenario,
                                               int cap_log2 = kDefaultVertexCapLog2);

VertexTable vertex_table(const Scenario& scenario, int cap_log2 = kDefaultVertexCapLog2);

BehaviorVector behavior_from_counts(const CountRecord& counts, std::int64_t base_rate);

/// Q = h . P. Violation iff Q > 0.
double evaluate_inequality(const BellInequality& ineq, const BehaviorVector& behavior);

/// h . v <= tol on every vertex.
bool validate_inequality(const BellInequality& ineq, double tol = kGeometryTolerance,
                         int cap_log2 = kDefaultVertexCapLog2);

/// Clauser-Horne inequality, h = (-1, 0, -1, 0, 1, 1, 1, -1).
BellInequality ch_inequality();

/// The 6 x 5 inequality with integer coefficients found from random
/// measurements on a maximally entangled state.
BellInequality builtin_i6522();

}  // namespace detloop
