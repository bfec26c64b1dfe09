#pragma once

// Outer approximations of the quantum set for dichotomic two-party
// scenarios: level-k NPA moment matrices over the +1 projectors, and the
// nonsignalling polytope as level 0.

#include <compare>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "detloop/scenario.hpp"
#include "detloop/solver.hpp"

namespace detloop {

inline constexpr int kDefaultMomentMatrixCap = 2000;

/// Product of projectors in canonical form: Alice's block then Bob's block
/// (the parties commute), no two adjacent equal symbols (P P = P). Settings
/// are 0-based. The empty word is the identity.
struct MonomialWord {
  std::vector<int> a;
  std::vector<int> b;

  std::size_t length() const noexcept { return a.size() + b.size(); }
  bool is_identity() const noexcept { return a.empty() && b.empty(); }
  /// Reverses each block: (A_1 A_2 B_1)^dagger = A_2 A_1 B_1.
  MonomialWord adjoint() const;
  std::string to_string() const;

  auto operator<=>(const MonomialWord&) const = default;
};

enum class Party { A, B };

struct ProjectorSymbol {
  Party party;
  int setting;
};

/// Moves Alice's symbols in front (keeping the order within each party)
/// and merges adjacent repeats.
MonomialWord reduce_word(const std::vector<ProjectorSymbol>& symbols);

/// Canonical word of left^dagger * right, identified with its adjoint (the
/// relaxation works with the real part of the moment matrix).
MonomialWord entry_word(const MonomialWord& left, const MonomialWord& right);

struct NpaLevel {
  int k = 1;
  /// Adds the A_i B_j products to the level-1 generating set ("1+AB").
  bool extra_ab = false;
};

class MomentStructure {
 public:
  const Scenario& scenario() const noexcept { return scenario_; }
  const NpaLevel& level() const noexcept { return level_; }
  int dimension() const noexcept { return static_cast<int>(generating_.size()); }
  const std::vector<MonomialWord>& generating_words() const noexcept { return generating_; }
  const std::vector<MonomialWord>& words() const noexcept { return words_; }
  /// Word id of entry (row, col).
  int entry(int row, int col) const { return entries_[static_cast<std::size_t>(row * dimension() + col)]; }
  int identity_word() const noexcept { return identity_; }
  /// Word ids of pA_1.., pB_1.., pAB_11.. in the behavior layout.
  const std::vector<int>& behavior_words() const noexcept { return behavior_words_; }

  friend MomentStructure build_moment_structure(const Scenario&, NpaLevel, int);

 private:
  MomentStructure(Scenario s, NpaLevel level) : scenario_(s), level_(level) {}

  Scenario scenario_;
  NpaLevel level_;
  std::vector<MonomialWord> generating_;
  std::vector<MonomialWord> words_;
  std::vector<int> entries_;
  std::vector<int> behavior_words_;
  int identity_ = 0;
};

/// Throws CapExceeded when the moment matrix would exceed `size_cap`.
MomentStructure build_moment_structure(const Scenario& scenario, NpaLevel level,
                                       int size_cap = kDefaultMomentMatrixCap);

struct RelaxationOptimum {
  double value = 0.0;
  BehaviorVector behavior;
  SolveReport report;
};

/// Maximizes coefficients . P over behaviors with a PSD moment matrix.
RelaxationOptimum npa_maximize(const MomentStructure& structure, std::span<const double> coefficients,
                               const SdpOptions& options = {});

double npa_max_value(const BellInequality& ineq, int level);

struct NpaCheck {
  bool feasible = false;
  /// Largest t with Gamma - t I PSD; feasible iff t >= -psd tolerance.
  double margin = 0.0;
  Eigen::MatrixXd moment_matrix;
};

NpaCheck npa_check(const MomentStructure& structure, const BehaviorVector& behavior, const SdpOptions& options = {});
bool npa_feasible(const BehaviorVector& behavior, int level);

/// Maximizes coefficients . P over nonsignalling behaviors (full
/// four-outcome tables per context, context-independent marginals).
RelaxationOptimum nonsignalling_maximize(const Scenario& scenario, std::span<const double> coefficients);
double nonsignalling_max_value(const BellInequality& ineq);
bool nonsignalling_feasible(const BehaviorVector& behavior);

}  // namespace detloop
