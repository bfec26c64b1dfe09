#include "detloop/separation.hpp"

#include <algorithm>
#include <cmath>

#include "detloop/errors.hpp"
#include "detloop/simd.hpp"
#include "detloop/solver.hpp"

namespace detloop {

const char* to_string(SeparationStatus status) noexcept {
  switch (status) {
    case SeparationStatus::Violated:
      return "violated";
    case SeparationStatus::Classical:
      return "classical";
    case SeparationStatus::Inconclusive:
      return "inconclusive";
  }
  return "unknown";
}

namespace {

// Columns 0 .. K-2 are vertices 1 .. K-1 (vertex 0 is the zero vector).
LinearProgram cone_rows(const VertexTable& table, std::span<const double> behavior, std::size_t extra_columns) {
  const std::size_t d = table.scenario.dimension();
  const std::size_t k = table.count - 1;
  LinearProgram lp(k + extra_columns);
  for (std::size_t l = 0; l < d; ++l) {
    std::vector<double> row(k + extra_columns, 0.0);
    for (std::size_t v = 1; v < table.count; ++v) row[v - 1] = table.entries[v * d + l];
    lp.add_constraint(std::move(row), Relation::Equal, behavior[l]);
  }
  return lp;
}

void require_solved(const SolveReport& rep, const char* what) {
  if (rep.status == SolveStatus::NumericalFailure) {
    throw SolverFailure(std::string(what) + ": " + rep.message);
  }
}

}  // namespace

std::optional<ClassicalityCertificate> is_classical(const BehaviorVector& behavior, int vertex_cap_log2) {
  const VertexTable table = vertex_table(behavior.scenario(), vertex_cap_log2);
  LinearProgram lp = cone_rows(table, behavior.values(), 0);
  for (auto& c : lp.objective) c = -1.0;  // minimal total weight
  const SolveReport rep = solve_lp(lp);
  require_solved(rep, "decomposition LP");
  if (rep.status != SolveStatus::Optimal) return std::nullopt;

  double total = 0.0;
  for (double w : rep.x) total += std::max(w, 0.0);
  ClassicalityCertificate cert;
  if (total <= 1.0) {
    cert.scale = 1.0;
    if (1.0 - total > 0.0) cert.weights.push_back({0, 1.0 - total});
    for (std::size_t v = 0; v < rep.x.size(); ++v) {
      if (rep.x[v] > 1e-13) cert.weights.push_back({v + 1, rep.x[v]});
    }
  } else {
    cert.scale = total;
    for (std::size_t v = 0; v < rep.x.size(); ++v) {
      if (rep.x[v] > 1e-13) cert.weights.push_back({v + 1, rep.x[v] / total});
    }
  }
  return cert;
}

SeparationResult find_violated_inequality(const BehaviorVector& behavior, const SeparationOptions& options) {
  const Scenario& s = behavior.scenario();
  const std::size_t d = s.dimension();
  const VertexTable table = vertex_table(s, options.vertex_cap_log2);
  const std::size_t k = table.count - 1;

  // Residual split P - V^T lambda = mu_plus - mu_minus.
  LinearProgram lp = cone_rows(table, behavior.values(), 2 * d);
  for (std::size_t l = 0; l < d; ++l) {
    lp.constraints[l].coefficients[k + l] = 1.0;
    lp.constraints[l].coefficients[k + d + l] = -1.0;
    lp.objective[k + l] = -1.0;
    lp.objective[k + d + l] = -1.0;
  }
  const SolveReport rep = solve_lp(lp);
  require_solved(rep, "separation LP");
  if (rep.status != SolveStatus::Optimal) {
    throw SolverFailure(std::string("separation LP reported ") + to_string(rep.status));
  }

  SeparationResult result;
  result.lp_optimum = -rep.value;
  std::vector<double> h(d);
  for (std::size_t l = 0; l < d; ++l) h[l] = std::clamp(-rep.duals[l], -1.0, 1.0);
  // Multipliers of rows with P_l = 0 are determined only up to roundoff;
  // re-check the vertex constraints independently of the solver.
  const double worst = simd::max_row_dot(table.entries, table.count, d, h, nullptr);
  BellInequality ineq(s, h);
  const double q = evaluate_inequality(ineq, behavior);

  if (result.lp_optimum > options.violation_tolerance) {
    if (worst <= kGeometryTolerance && q > options.violation_tolerance) {
      result.status = SeparationStatus::Violated;
      result.inequality = std::move(ineq);
      result.quantum_value = q;
    } else {
      result.status = SeparationStatus::Inconclusive;
    }
    return result;
  }

  result.status = SeparationStatus::Classical;
  if (options.with_certificate) {
    result.certificate = is_classical(behavior, options.vertex_cap_log2);
    if (!result.certificate) result.status = SeparationStatus::Inconclusive;
  }
  return result;
}

}  // namespace detloop
