#pragma once

// Backend-agnostic contract for the linear and semidefinite programs used by
// the separation, nonsignalling and NPA modules.
//
// solve_lp is a dense two-phase simplex; solve_sdp is an infeasible-start
// primal-dual interior-point method (HKM direction, Mehrotra corrector).
// Both maximize.

#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace detloop {

struct Tolerances {
  static constexpr double lp_feasibility = 1e-9;
  static constexpr double lp_optimality = 1e-9;
  static constexpr double sdp_gap = 1e-8;
  static constexpr double sdp_feasibility = 1e-8;
  static constexpr double psd_eigenvalue = 1e-7;
  static constexpr double pinned_entry = 1e-7;
  /// Threshold for "strictly positive" optimal values; a few times the
  /// SDP noise near a zero optimum (about 1e-9).
  static constexpr double value = 1e-8;
};

enum class SolveStatus { Optimal, Infeasible, Unbounded, NumericalFailure };

const char* to_string(SolveStatus status) noexcept;

enum class Relation { LessEqual, Equal, GreaterEqual };

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

struct LinearProgram {
  struct Constraint {
    std::vector<double> coefficients;
    Relation relation = Relation::LessEqual;
    double rhs = 0.0;
  };
  struct Bound {
    double lower = 0.0;
    double upper = kInfinity;
  };

  explicit LinearProgram(std::size_t num_variables = 0)
      : objective(num_variables, 0.0), bounds(num_variables) {}

  std::size_t num_variables() const noexcept { return objective.size(); }
  void add_constraint(std::vector<double> coefficients, Relation relation, double rhs) {
    constraints.push_back({std::move(coefficients), relation, rhs});
  }

  std::vector<double> objective;  // maximize objective . x
  std::vector<Constraint> constraints;
  std::vector<Bound> bounds;      // default [0, +inf)
};

struct SolveReport {
  SolveStatus status = SolveStatus::NumericalFailure;
  double value = 0.0;
  std::vector<double> x;
  /// LP: d value / d rhs_i per constraint.  SDP: unused.
  std::vector<double> duals;
  /// SDP: the optimal matrix with pinned and shared entries filled in.
  Eigen::MatrixXd matrix;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  int iterations = 0;
  std::string message;

  bool optimal() const noexcept { return status == SolveStatus::Optimal; }
};

SolveReport solve_lp(const LinearProgram& problem);

/// Symmetric matrix variable whose entries are pinned to constants, tied to
/// shared scalar variables, or (if never mentioned) left free. The objective
/// is linear in the variables and may also reference pinned entries.
class SemidefiniteProgram {
 public:
  explicit SemidefiniteProgram(int dimension);

  int dimension() const noexcept { return dim_; }
  int num_variables() const noexcept { return static_cast<int>(objective_.size()); }

  int add_variable();
  void pin(int row, int col, double value);
  void tie(int row, int col, int variable);
  void maximize_variable(int variable, double coefficient);
  void maximize_entry(int row, int col, double coefficient);

  /// Entry assignment: variable index, or -1 with the constant in `value`.
  struct Slot {
    int variable = -1;
    double value = 0.0;
    bool assigned = false;
  };
  const Slot& slot(int row, int col) const;

  /// Free entries receive their own variables; called by the solver.
  SemidefiniteProgram finalized() const;

  const std::vector<double>& objective() const noexcept { return objective_; }
  double objective_offset() const noexcept { return offset_; }
  const std::vector<Slot>& slots() const noexcept { return slots_; }

 private:
  std::size_t key(int row, int col) const;

  int dim_;
  std::vector<Slot> slots_;  // upper triangle, row-major over (r <= c)
  std::vector<double> objective_;
  std::vector<std::pair<std::size_t, double>> entry_objective_;
  double offset_ = 0.0;
};

struct SdpOptions {
  int max_iterations = 100;
  double gap_tolerance = Tolerances::sdp_gap;
  double feasibility_tolerance = Tolerances::sdp_feasibility;
};

/// On Optimal, report.x holds the variable values and report.matrix the
/// completed PSD matrix.
SolveReport solve_sdp(const SemidefiniteProgram& problem, const SdpOptions& options = {});

/// Largest t such that the pinned structure admits a completion M with
/// M - t I PSD (objective ignored). Positive semidefinite completions exist
/// iff t >= 0; report.value is t, report.status Unbounded when t is.
SolveReport sdp_feasibility_margin(const SemidefiniteProgram& problem, const SdpOptions& options = {});

}  // namespace detloop
