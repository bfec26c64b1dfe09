#pragma once

// Detection-loophole-free Bell inequality synthesis.
//
// With the classical bound fixed at 0, an inequality h satisfies h.v <= 0 on
// every deterministic vertex. A behavior P is certified nonclassical when
//
//   maximize h.P   s.t.   h.v_k <= 0  for all k,   -1 <= h_l <= 1
//
// has a positive optimum. The LP is solved through its dual
//
//   minimize || P - sum_k lambda_k v_k ||_1   over lambda >= 0,
//
// which has d rows instead of 2^(n+m); h is read off the optimal simplex
// multipliers and re-checked against every vertex. Since c = 0 inequalities
// are invariant under rescaling P, the region they cannot separate is the
// cone over the classical polytope; classicality certificates therefore
// carry a scale factor (see ClassicalityCertificate).

#include <optional>

#include "detloop/scenario.hpp"

namespace detloop {

enum class SeparationStatus { Violated, Classical, Inconclusive };

const char* to_string(SeparationStatus status) noexcept;

struct SeparationOptions {
  double violation_tolerance = 1e-7;
  int vertex_cap_log2 = kDefaultVertexCapLog2;
  /// Solve the decomposition LP for Classical results.
  bool with_certificate = true;
};

struct SeparationResult {
  SeparationStatus status = SeparationStatus::Inconclusive;
  std::optional<BellInequality> inequality;
  std::optional<double> quantum_value;
  std::optional<ClassicalityCertificate> certificate;
  /// Optimum of the separation LP (Q for Violated, <= tolerance otherwise).
  double lp_optimum = 0.0;
};

SeparationResult find_violated_inequality(const BehaviorVector& behavior, const SeparationOptions& options = {});

/// Conic decomposition P = scale * sum_k w_k v_k with the smallest scale;
/// nullopt when P lies outside the cone (NotClassical).
std::optional<ClassicalityCertificate> is_classical(const BehaviorVector& behavior,
                                                    int vertex_cap_log2 = kDefaultVertexCapLog2);

}  // namespace detloop
