// Dense two-phase tableau simplex with periodic refactorization.
//
// The problem is brought to  min c.x  s.t.  A x = b, x >= 0, b >= 0  and
// solved on a full tableau. Pivot row elimination is the hot loop and goes
// through simd::axpy. After each phase (and every kRefactorInterval pivots)
// the tableau is rebuilt from the original columns with an LU factorization
// of the basis so that roundoff does not accumulate across long runs.

#include <algorithm>
#include <cmath>
#include <string>

#include "detloop/errors.hpp"
#include "detloop/simd.hpp"
#include "detloop/solver.hpp"

namespace detloop {

const char* to_string(SolveStatus status) noexcept {
  switch (status) {
    case SolveStatus::Optimal:
      return "optimal";
    case SolveStatus::Infeasible:
      return "infeasible";
    case SolveStatus::Unbounded:
      return "unbounded";
    case SolveStatus::NumericalFailure:
      return "numerical_failure";
  }
  return "unknown";
}

namespace {

constexpr double kPivotTolerance = 1e-9;
constexpr int kRefactorInterval = 400;
constexpr int kDegenerateSwitch = 40;

// x_original = offset + sum coef * x_std[col]
struct VariableMap {
  double offset = 0.0;
  std::vector<std::pair<std::size_t, double>> terms;
};

struct StandardForm {
  std::size_t rows = 0;
  std::size_t structural = 0;  // columns carrying original variables
  std::size_t columns = 0;     // structural + slack
  std::vector<double> a;       // rows x columns, row-major
  std::vector<double> b;
  std::vector<double> cost;    // minimization costs per column
  std::vector<double> row_sign;
  std::vector<int> constraint_of_row;  // -1 for bound rows
  std::vector<long> slack_of_row;      // column index or -1
  std::vector<VariableMap> variables;
  double cost_offset = 0.0;

  double& at(std::size_t r, std::size_t c) { return a[r * columns + c]; }
  double at(std::size_t r, std::size_t c) const { return a[r * columns + c]; }
};

StandardForm to_standard_form(const LinearProgram& lp) {
  const std::size_t nv = lp.num_variables();
  if (lp.bounds.size() != nv) throw InvalidArgument("LP bounds size does not match the objective");
  StandardForm sf;
  sf.variables.resize(nv);

  struct BoundRow {
    std::size_t column;
    double width;
  };
  std::vector<BoundRow> bound_rows;
  std::size_t col = 0;
  for (std::size_t j = 0; j < nv; ++j) {
    const auto [lo, hi] = lp.bounds[j];
    if (std::isnan(lo) || std::isnan(hi) || lo > hi) throw InvalidArgument("LP variable has an empty bound interval");
    if (!std::isfinite(lp.objective[j])) throw InvalidArgument("LP objective must be finite");
    VariableMap& vm = sf.variables[j];
    if (std::isfinite(lo)) {
      vm.offset = lo;
      vm.terms.push_back({col, 1.0});
      if (std::isfinite(hi)) bound_rows.push_back({col, hi - lo});
      ++col;
    } else if (std::isfinite(hi)) {
      vm.offset = hi;
      vm.terms.push_back({col++, -1.0});
    } else {
      vm.terms.push_back({col++, 1.0});
      vm.terms.push_back({col++, -1.0});
    }
  }
  sf.structural = col;

  struct Row {
    std::vector<std::pair<std::size_t, double>> entries;
    Relation relation;
    double rhs;
    int constraint;
  };
  std::vector<Row> rows;
  rows.reserve(lp.constraints.size() + bound_rows.size());
  for (std::size_t i = 0; i < lp.constraints.size(); ++i) {
    const auto& c = lp.constraints[i];
    if (c.coefficients.size() != nv) throw DimensionMismatch("LP constraint width does not match variable count");
    Row row{{}, c.relation, c.rhs, static_cast<int>(i)};
    for (std::size_t j = 0; j < nv; ++j) {
      const double a = c.coefficients[j];
      if (a == 0.0) continue;
      if (!std::isfinite(a)) throw InvalidArgument("LP constraint coefficient must be finite");
      row.rhs -= a * sf.variables[j].offset;
      for (const auto& [sc, coef] : sf.variables[j].terms) row.entries.push_back({sc, a * coef});
    }
    rows.push_back(std::move(row));
  }
  for (const auto& br : bound_rows) rows.push_back({{{br.column, 1.0}}, Relation::LessEqual, br.width, -1});

  std::size_t slacks = 0;
  for (const auto& r : rows) slacks += r.relation != Relation::Equal ? 1 : 0;
  sf.rows = rows.size();
  sf.columns = sf.structural + slacks;
  sf.a.assign(sf.rows * sf.columns, 0.0);
  sf.b.assign(sf.rows, 0.0);
  sf.row_sign.assign(sf.rows, 1.0);
  sf.constraint_of_row.assign(sf.rows, -1);
  sf.slack_of_row.assign(sf.rows, -1);
  std::size_t next_slack = sf.structural;
  for (std::size_t r = 0; r < sf.rows; ++r) {
    const Row& row = rows[r];
    const double sign = row.rhs < 0.0 ? -1.0 : 1.0;
    sf.row_sign[r] = sign;
    sf.constraint_of_row[r] = row.constraint;
    for (const auto& [c, v] : row.entries) sf.at(r, c) += sign * v;
    sf.b[r] = sign * row.rhs;
    if (row.relation != Relation::Equal) {
      const double slack = row.relation == Relation::LessEqual ? 1.0 : -1.0;
      sf.at(r, next_slack) = sign * slack;
      sf.slack_of_row[r] = static_cast<long>(next_slack++);
    }
  }

  sf.cost.assign(sf.columns, 0.0);
  for (std::size_t j = 0; j < nv; ++j) {
    sf.cost_offset += lp.objective[j] * sf.variables[j].offset;
    for (const auto& [c, coef] : sf.variables[j].terms) sf.cost[c] -= lp.objective[j] * coef;
  }
  return sf;
}

class Tableau {
 public:
  Tableau(const StandardForm& sf, std::vector<std::size_t> basis, std::size_t artificials)
      : sf_(sf),
        rows_(sf.rows),
        cols_(sf.columns + artificials),
        width_(cols_ + 1),
        basis_(std::move(basis)),
        banned_(cols_, false),
        t_(rows_ * width_, 0.0),
        obj_(width_, 0.0) {
    art_rows_.assign(artificials, 0);
    std::size_t next = sf.columns;
    for (std::size_t r = 0; r < rows_; ++r) {
      if (basis_[r] >= sf.columns) art_rows_[next++ - sf.columns] = r;
    }
  }

  std::size_t rows() const { return rows_; }
  std::size_t columns() const { return cols_; }
  const std::vector<std::size_t>& basis() const { return basis_; }
  bool is_artificial(std::size_t c) const { return c >= sf_.columns; }
  void ban(std::size_t c) { banned_[c] = true; }
  double rhs(std::size_t r) const { return t_[r * width_ + cols_]; }
  double entry(std::size_t r, std::size_t c) const { return t_[r * width_ + c]; }

  // Original column c of [A | I_art].
  double original(std::size_t r, std::size_t c) const {
    if (c < sf_.columns) return sf_.at(r, c);
    return art_rows_[c - sf_.columns] == r ? 1.0 : 0.0;
  }

  void set_costs(std::vector<double> costs) { costs_ = std::move(costs); }

  // Rebuilds tableau rows and reduced costs from the basis. Returns false if
  // the basis matrix is numerically singular.
  bool refactor() {
    const auto m = static_cast<Eigen::Index>(rows_);
    if (m == 0) {
      for (std::size_t c = 0; c < cols_; ++c) obj_[c] = costs_[c];
      obj_[cols_] = 0.0;
      return true;
    }
    Eigen::MatrixXd bmat(m, m);
    for (Eigen::Index r = 0; r < m; ++r) {
      for (Eigen::Index k = 0; k < m; ++k) bmat(r, k) = original(static_cast<std::size_t>(r), basis_[static_cast<std::size_t>(k)]);
    }
    Eigen::MatrixXd full(m, static_cast<Eigen::Index>(width_));
    for (Eigen::Index r = 0; r < m; ++r) {
      for (std::size_t c = 0; c < cols_; ++c) full(r, static_cast<Eigen::Index>(c)) = original(static_cast<std::size_t>(r), c);
      full(r, static_cast<Eigen::Index>(cols_)) = sf_.b[static_cast<std::size_t>(r)];
    }
    Eigen::VectorXd cb(m);
    for (Eigen::Index k = 0; k < m; ++k) cb(k) = costs_[basis_[static_cast<std::size_t>(k)]];
    // The starting basis is usually a permutation-free identity.
    const bool identity = bmat.isIdentity(0.0);
    Eigen::FullPivLU<Eigen::MatrixXd> lu;
    if (identity) {
      duals_ = cb;
    } else {
      lu.compute(bmat);
      if (!lu.isInvertible()) return false;
      full = lu.solve(full).eval();
      duals_ = lu.transpose().solve(cb);
    }
    for (std::size_t r = 0; r < rows_; ++r) {
      for (std::size_t c = 0; c < width_; ++c) t_[r * width_ + c] = full(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
      double& b = t_[r * width_ + cols_];
      if (b < 0.0 && b > -1e-7) b = 0.0;
      // Basic columns are exact unit vectors by definition.
      for (std::size_t k = 0; k < rows_; ++k) t_[k * width_ + basis_[r]] = k == r ? 1.0 : 0.0;
    }
    for (std::size_t c = 0; c < cols_; ++c) {
      double d = costs_[c];
      for (std::size_t r = 0; r < rows_; ++r) d -= duals_(static_cast<Eigen::Index>(r)) * original(r, c);
      obj_[c] = d;
    }
    for (std::size_t r = 0; r < rows_; ++r) obj_[basis_[r]] = 0.0;
    double z = 0.0;
    for (std::size_t r = 0; r < rows_; ++r) z += costs_[basis_[r]] * rhs(r);
    obj_[cols_] = -z;
    fresh_ = true;
    return true;
  }

  // Reduced costs for new costs from the current tableau rows, without
  // refactoring.
  void reprice() {
    for (std::size_t c = 0; c < width_; ++c) obj_[c] = c < cols_ ? costs_[c] : 0.0;
    for (std::size_t r = 0; r < rows_; ++r) {
      const double cb = costs_[basis_[r]];
      if (cb != 0.0) simd::axpy(-cb, std::span<const double>(&t_[r * width_], width_), std::span<double>(obj_.data(), width_));
    }
    for (std::size_t r = 0; r < rows_; ++r) obj_[basis_[r]] = 0.0;
    fresh_ = false;
  }

  bool fresh() const { return fresh_; }

  const Eigen::VectorXd& duals() const { return duals_; }
  double reduced_cost(std::size_t c) const { return obj_[c]; }
  double objective_value() const { return -obj_[cols_]; }

  enum class Outcome { Optimal, Unbounded, IterationLimit, Singular };

  Outcome optimize(int& iterations, int max_iterations) {
    int since_refactor = 0;
    int degenerate_run = 0;
    for (;;) {
      const bool bland = degenerate_run >= kDegenerateSwitch;
      const long q = choose_entering(bland);
      if (q < 0) {
        // Confirm optimality on a fresh factorization.
        if (since_refactor == 0) return Outcome::Optimal;
        if (!refactor()) return Outcome::Singular;
        since_refactor = 0;
        if (choose_entering(false) < 0) return Outcome::Optimal;
        continue;
      }
      const long r = choose_leaving(static_cast<std::size_t>(q), bland);
      if (r < 0) return Outcome::Unbounded;
      if (rhs(static_cast<std::size_t>(r)) <= 1e-12) {
        ++degenerate_run;
      } else {
        degenerate_run = 0;
      }
      pivot(static_cast<std::size_t>(r), static_cast<std::size_t>(q));
      if (++iterations >= max_iterations) return Outcome::IterationLimit;
      if (++since_refactor >= kRefactorInterval) {
        if (!refactor()) return Outcome::Singular;
        since_refactor = 0;
      }
    }
  }

  void pivot(std::size_t r, std::size_t q) {
    double* prow = &t_[r * width_];
    const double inv = 1.0 / prow[q];
    for (std::size_t c = 0; c < width_; ++c) prow[c] *= inv;
    prow[q] = 1.0;
    const std::span<const double> pivot_row(prow, width_);
    for (std::size_t i = 0; i < rows_; ++i) {
      if (i == r) continue;
      double* row = &t_[i * width_];
      const double f = row[q];
      if (f == 0.0) continue;
      simd::axpy(-f, pivot_row, std::span<double>(row, width_));
      row[q] = 0.0;
    }
    const double f = obj_[q];
    if (f != 0.0) {
      simd::axpy(-f, pivot_row, std::span<double>(obj_.data(), width_));
      obj_[q] = 0.0;
    }
    basis_[r] = q;
    fresh_ = false;
  }

 private:
  long choose_entering(bool bland) const {
    long best = -1;
    double best_value = -Tolerances::lp_optimality;
    for (std::size_t c = 0; c < cols_; ++c) {
      if (banned_[c]) continue;
      const double d = obj_[c];
      if (d < best_value) {
        best = static_cast<long>(c);
        if (bland) return best;
        best_value = d;
      }
    }
    return best;
  }

  long choose_leaving(std::size_t q, bool bland) const {
    long best = -1;
    double best_ratio = kInfinity;
    double best_pivot = 0.0;
    for (std::size_t i = 0; i < rows_; ++i) {
      const double a = entry(i, q);
      if (a <= kPivotTolerance) continue;
      const double ratio = std::max(rhs(i), 0.0) / a;
      bool take = false;
      if (ratio < best_ratio - 1e-12) {
        take = true;
      } else if (ratio <= best_ratio + 1e-12) {
        take = bland ? basis_[i] < basis_[static_cast<std::size_t>(best)] : a > best_pivot;
      }
      if (take) {
        best = static_cast<long>(i);
        best_ratio = std::min(ratio, best_ratio);
        best_pivot = a;
      }
    }
    return best;
  }

  const StandardForm& sf_;
  std::size_t rows_;
  std::size_t cols_;
  std::size_t width_;
  std::vector<std::size_t> basis_;
  std::vector<bool> banned_;
  std::vector<std::size_t> art_rows_;
  std::vector<double> t_;
  std::vector<double> obj_;
  std::vector<double> costs_;
  Eigen::VectorXd duals_;
  bool fresh_ = false;
};

}  // namespace

SolveReport solve_lp(const LinearProgram& problem) {
  const StandardForm sf = to_standard_form(problem);
  SolveReport report;

  // Initial basis: slacks with +1, then positive unit structural columns,
  // artificials for what remains.
  std::vector<long> basic(sf.rows, -1);
  for (std::size_t r = 0; r < sf.rows; ++r) {
    if (sf.slack_of_row[r] >= 0 && sf.at(r, static_cast<std::size_t>(sf.slack_of_row[r])) > 0.0) basic[r] = sf.slack_of_row[r];
  }
  for (std::size_t c = 0; c < sf.structural; ++c) {
    long row = -1;
    bool unit = true;
    for (std::size_t r = 0; r < sf.rows && unit; ++r) {
      const double v = sf.at(r, c);
      if (v == 0.0) continue;
      if (row >= 0 || v < 0.0) unit = false;
      row = static_cast<long>(r);
    }
    if (unit && row >= 0 && basic[static_cast<std::size_t>(row)] < 0) basic[static_cast<std::size_t>(row)] = static_cast<long>(c);
  }
  std::size_t artificials = 0;
  std::vector<std::size_t> basis(sf.rows);
  for (std::size_t r = 0; r < sf.rows; ++r) {
    basis[r] = basic[r] >= 0 ? static_cast<std::size_t>(basic[r]) : sf.columns + artificials++;
  }

  Tableau tab(sf, basis, artificials);
  const int max_iterations = 50 * static_cast<int>(sf.rows + sf.columns + artificials) + 1000;

  if (artificials > 0) {
    std::vector<double> phase1(tab.columns(), 0.0);
    for (std::size_t c = sf.columns; c < tab.columns(); ++c) phase1[c] = 1.0;
    tab.set_costs(phase1);
    if (!tab.refactor()) throw SolverFailure("simplex: singular initial basis");
    const auto outcome = tab.optimize(report.iterations, max_iterations);
    if (outcome == Tableau::Outcome::IterationLimit || outcome == Tableau::Outcome::Singular) {
      report.status = SolveStatus::NumericalFailure;
      report.message = "phase 1 did not terminate";
      return report;
    }
    double bnorm = 0.0;
    for (double b : sf.b) bnorm = std::max(bnorm, std::abs(b));
    if (tab.objective_value() > Tolerances::lp_feasibility * (1.0 + bnorm) * 10.0) {
      report.status = SolveStatus::Infeasible;
      report.value = 0.0;
      report.message = "phase 1 optimum " + std::to_string(tab.objective_value());
      return report;
    }
    // Drive artificials out of the basis where a structural pivot exists;
    // rows without one are redundant and keep a zero-valued artificial.
    for (std::size_t r = 0; r < tab.rows(); ++r) {
      if (!tab.is_artificial(tab.basis()[r])) continue;
      long best = -1;
      double best_abs = 1e-7;
      for (std::size_t c = 0; c < sf.columns; ++c) {
        const double a = std::abs(tab.entry(r, c));
        if (a > best_abs) {
          best_abs = a;
          best = static_cast<long>(c);
        }
      }
      if (best >= 0) tab.pivot(r, static_cast<std::size_t>(best));
    }
    for (std::size_t c = sf.columns; c < tab.columns(); ++c) tab.ban(c);
  }

  std::vector<double> phase2(tab.columns(), 0.0);
  std::copy(sf.cost.begin(), sf.cost.end(), phase2.begin());
  tab.set_costs(phase2);
  if (artificials > 0) {
    tab.reprice();
  } else if (!tab.refactor()) {
    report.status = SolveStatus::NumericalFailure;
    report.message = "singular initial basis";
    return report;
  }
  const auto outcome = tab.optimize(report.iterations, max_iterations);
  if (outcome == Tableau::Outcome::Unbounded) {
    report.status = SolveStatus::Unbounded;
    return report;
  }
  if (outcome != Tableau::Outcome::Optimal) {
    report.status = SolveStatus::NumericalFailure;
    report.message = outcome == Tableau::Outcome::Singular ? "singular basis" : "iteration limit";
    return report;
  }
  if (!tab.fresh() && !tab.refactor()) {
    report.status = SolveStatus::NumericalFailure;
    report.message = "singular final basis";
    return report;
  }

  std::vector<double> xs(tab.columns(), 0.0);
  for (std::size_t r = 0; r < tab.rows(); ++r) xs[tab.basis()[r]] = std::max(tab.rhs(r), 0.0);

  double primal = 0.0;
  for (std::size_t r = 0; r < sf.rows; ++r) {
    double lhs = 0.0;
    for (std::size_t c = 0; c < sf.columns; ++c) lhs += sf.at(r, c) * xs[c];
    primal = std::max(primal, std::abs(lhs - sf.b[r]));
  }
  double dual = 0.0;
  for (std::size_t c = 0; c < sf.columns; ++c) dual = std::max(dual, -tab.reduced_cost(c));
  report.primal_residual = primal;
  report.dual_residual = dual;

  report.x.assign(problem.num_variables(), 0.0);
  for (std::size_t j = 0; j < problem.num_variables(); ++j) {
    double v = sf.variables[j].offset;
    for (const auto& [c, coef] : sf.variables[j].terms) v += coef * xs[c];
    report.x[j] = v;
  }
  report.value = 0.0;
  for (std::size_t j = 0; j < problem.num_variables(); ++j) report.value += problem.objective[j] * report.x[j];

  report.duals.assign(problem.constraints.size(), 0.0);
  for (std::size_t r = 0; r < sf.rows; ++r) {
    const int ci = sf.constraint_of_row[r];
    if (ci >= 0) report.duals[static_cast<std::size_t>(ci)] = -sf.row_sign[r] * tab.duals()(static_cast<Eigen::Index>(r));
  }
  double scale = 1.0;
  for (double b : sf.b) scale = std::max(scale, std::abs(b));
  const bool ok = primal <= 1e-7 * scale && dual <= 1e-7;
  report.status = ok ? SolveStatus::Optimal : SolveStatus::NumericalFailure;
  if (!ok) report.message = "residuals above tolerance";
  return report;
}

}  // namespace detloop
