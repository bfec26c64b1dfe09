#include "detloop/npa.hpp"

#include <algorithm>
#include <map>

#include "detloop/errors.hpp"

namespace detloop {

MonomialWord MonomialWord::adjoint() const {
  MonomialWord out{{a.rbegin(), a.rend()}, {b.rbegin(), b.rend()}};
  return out;
}

std::string MonomialWord::to_string() const {
  if (is_identity()) return "1";
  std::string s;
  for (int i : a) s += "A" + std::to_string(i + 1);
  for (int j : b) s += "B" + std::to_string(j + 1);
  return s;
}

namespace {

void push_reduced(std::vector<int>& block, int setting) {
  if (block.empty() || block.back() != setting) block.push_back(setting);
}

}  // namespace

MonomialWord reduce_word(const std::vector<ProjectorSymbol>& symbols) {
  MonomialWord w;
  for (const auto& s : symbols) push_reduced(s.party == Party::A ? w.a : w.b, s.setting);
  return w;
}

MonomialWord entry_word(const MonomialWord& left, const MonomialWord& right) {
  MonomialWord w;
  for (auto it = left.a.rbegin(); it != left.a.rend(); ++it) push_reduced(w.a, *it);
  for (int s : right.a) push_reduced(w.a, s);
  for (auto it = left.b.rbegin(); it != left.b.rend(); ++it) push_reduced(w.b, *it);
  for (int s : right.b) push_reduced(w.b, s);
  MonomialWord adj = w.adjoint();
  return std::min(w, adj);
}

namespace {

// Canonical words of exactly `length` symbols in lexicographic order, with
// A settings ordered before B settings.
void enumerate_words(const Scenario& s, std::size_t length, std::vector<MonomialWord>& out) {
  const int n = s.n();
  const int alphabet = s.n() + s.m();
  std::vector<int> seq;
  auto rec = [&](auto&& self) -> void {
    if (seq.size() == length) {
      MonomialWord w;
      for (int sym : seq) (sym < n ? w.a : w.b).push_back(sym < n ? sym : sym - n);
      out.push_back(std::move(w));
      return;
    }
    for (int sym = 0; sym < alphabet; ++sym) {
      if (!seq.empty()) {
        const int last = seq.back();
        if (sym == last) continue;
        if (last >= n && sym < n) continue;  // B before A is not canonical
      }
      seq.push_back(sym);
      self(self);
      seq.pop_back();
    }
  };
  rec(rec);
}

}  // namespace

MomentStructure build_moment_structure(const Scenario& scenario, NpaLevel level, int size_cap) {
  if (level.k < 1) throw InvalidArgument("NPA level must be at least 1");
  MomentStructure ms(scenario, level);
  for (int len = 0; len <= level.k; ++len) {
    enumerate_words(scenario, static_cast<std::size_t>(len), ms.generating_);
    if (static_cast<int>(ms.generating_.size()) > size_cap) {
      throw CapExceeded("moment matrix dimension exceeds the cap of " + std::to_string(size_cap));
    }
  }
  if (level.extra_ab && level.k == 1) {
    for (int i = 0; i < scenario.n(); ++i) {
      for (int j = 0; j < scenario.m(); ++j) ms.generating_.push_back(MonomialWord{{i}, {j}});
    }
    if (static_cast<int>(ms.generating_.size()) > size_cap) {
      throw CapExceeded("moment matrix dimension exceeds the cap of " + std::to_string(size_cap));
    }
  }

  const int dim = ms.dimension();
  std::map<MonomialWord, int> ids;
  ms.entries_.assign(static_cast<std::size_t>(dim) * static_cast<std::size_t>(dim), -1);
  for (int r = 0; r < dim; ++r) {
    for (int c = r; c < dim; ++c) {
      MonomialWord w = entry_word(ms.generating_[static_cast<std::size_t>(r)], ms.generating_[static_cast<std::size_t>(c)]);
      auto [it, inserted] = ids.try_emplace(std::move(w), static_cast<int>(ms.words_.size()));
      if (inserted) ms.words_.push_back(it->first);
      ms.entries_[static_cast<std::size_t>(r * dim + c)] = it->second;
      ms.entries_[static_cast<std::size_t>(c * dim + r)] = it->second;
    }
  }
  ms.identity_ = ids.at(MonomialWord{});
  ms.behavior_words_.resize(scenario.dimension());
  for (int i = 0; i < scenario.n(); ++i) ms.behavior_words_[scenario.index_a(i)] = ids.at(MonomialWord{{i}, {}});
  for (int j = 0; j < scenario.m(); ++j) ms.behavior_words_[scenario.index_b(j)] = ids.at(MonomialWord{{}, {j}});
  for (int i = 0; i < scenario.n(); ++i) {
    for (int j = 0; j < scenario.m(); ++j) ms.behavior_words_[scenario.index_ab(i, j)] = ids.at(MonomialWord{{i}, {j}});
  }
  return ms;
}

namespace {

// Variables are word ids; the identity word is pinned to 1 and, when
// `fixed` is given, the behavior words are pinned to its entries.
SemidefiniteProgram moment_program(const MomentStructure& ms, const BehaviorVector* fixed, std::vector<int>& var_of_word) {
  const int dim = ms.dimension();
  SemidefiniteProgram sdp(dim);
  std::vector<double> pinned(ms.words().size(), 0.0);
  std::vector<bool> is_pinned(ms.words().size(), false);
  is_pinned[static_cast<std::size_t>(ms.identity_word())] = true;
  pinned[static_cast<std::size_t>(ms.identity_word())] = 1.0;
  if (fixed != nullptr) {
    for (std::size_t l = 0; l < ms.behavior_words().size(); ++l) {
      const auto w = static_cast<std::size_t>(ms.behavior_words()[l]);
      is_pinned[w] = true;
      pinned[w] = fixed->values()[l];
    }
  }
  var_of_word.assign(ms.words().size(), -1);
  for (std::size_t w = 0; w < ms.words().size(); ++w) {
    if (!is_pinned[w]) var_of_word[w] = sdp.add_variable();
  }
  for (int r = 0; r < dim; ++r) {
    for (int c = r; c < dim; ++c) {
      const auto w = static_cast<std::size_t>(ms.entry(r, c));
      if (is_pinned[w]) {
        sdp.pin(r, c, pinned[w]);
      } else {
        sdp.tie(r, c, var_of_word[w]);
      }
    }
  }
  return sdp;
}

}  // namespace

RelaxationOptimum npa_maximize(const MomentStructure& ms, std::span<const double> coefficients,
                               const SdpOptions& options) {
  const Scenario& s = ms.scenario();
  if (coefficients.size() != s.dimension()) throw DimensionMismatch("NPA objective has the wrong dimension");
  std::vector<int> var_of_word;
  SemidefiniteProgram sdp = moment_program(ms, nullptr, var_of_word);
  for (std::size_t l = 0; l < coefficients.size(); ++l) {
    const int v = var_of_word[static_cast<std::size_t>(ms.behavior_words()[l])];
    if (coefficients[l] != 0.0) sdp.maximize_variable(v, coefficients[l]);
  }
  SolveReport rep = solve_sdp(sdp, options);
  if (rep.status != SolveStatus::Optimal) {
    throw SolverFailure(std::string("NPA relaxation: ") + to_string(rep.status) + " " + rep.message);
  }
  std::vector<double> p(s.dimension());
  for (std::size_t l = 0; l < p.size(); ++l) {
    p[l] = rep.x[static_cast<std::size_t>(var_of_word[static_cast<std::size_t>(ms.behavior_words()[l])])];
  }
  const double value = rep.value;
  return RelaxationOptimum{value, BehaviorVector(s, std::move(p)), std::move(rep)};
}

double npa_max_value(const BellInequality& ineq, int level) {
  const MomentStructure ms = build_moment_structure(ineq.scenario(), NpaLevel{level, false});
  return npa_maximize(ms, ineq.coefficients()).value;
}

NpaCheck npa_check(const MomentStructure& ms, const BehaviorVector& behavior, const SdpOptions& options) {
  if (!(behavior.scenario() == ms.scenario())) throw DimensionMismatch("behavior does not match the moment structure");
  std::vector<int> var_of_word;
  const SemidefiniteProgram sdp = moment_program(ms, &behavior, var_of_word);
  const SolveReport rep = sdp_feasibility_margin(sdp, options);
  if (rep.status != SolveStatus::Optimal) {
    throw SolverFailure(std::string("NPA feasibility: ") + to_string(rep.status) + " " + rep.message);
  }
  return NpaCheck{rep.value >= -Tolerances::psd_eigenvalue, rep.value, rep.matrix};
}

bool npa_feasible(const BehaviorVector& behavior, int level) {
  const MomentStructure ms = build_moment_structure(behavior.scenario(), NpaLevel{level, false});
  return npa_check(ms, behavior).feasible;
}

namespace {

enum Outcome { kPP = 0, kPM = 1, kMP = 2, kMM = 3 };

std::size_t table_index(const Scenario& s, int i, int j, int o) {
  return static_cast<std::size_t>(((i * s.m() + j) * 4) + o);
}

LinearProgram nonsignalling_program(const Scenario& s) {
  const std::size_t nv = static_cast<std::size_t>(4 * s.n() * s.m());
  LinearProgram lp(nv);
  for (int i = 0; i < s.n(); ++i) {
    for (int j = 0; j < s.m(); ++j) {
      std::vector<double> row(nv, 0.0);
      for (int o = 0; o < 4; ++o) row[table_index(s, i, j, o)] = 1.0;
      lp.add_constraint(std::move(row), Relation::Equal, 1.0);
    }
  }
  // Alice's marginal in context (i, j) equals the one in (i, 0).
  for (int i = 0; i < s.n(); ++i) {
    for (int j = 1; j < s.m(); ++j) {
      std::vector<double> row(nv, 0.0);
      row[table_index(s, i, j, kPP)] = 1.0;
      row[table_index(s, i, j, kPM)] = 1.0;
      row[table_index(s, i, 0, kPP)] = -1.0;
      row[table_index(s, i, 0, kPM)] = -1.0;
      lp.add_constraint(std::move(row), Relation::Equal, 0.0);
    }
  }
  for (int j = 0; j < s.m(); ++j) {
    for (int i = 1; i < s.n(); ++i) {
      std::vector<double> row(nv, 0.0);
      row[table_index(s, i, j, kPP)] = 1.0;
      row[table_index(s, i, j, kMP)] = 1.0;
      row[table_index(s, 0, j, kPP)] = -1.0;
      row[table_index(s, 0, j, kMP)] = -1.0;
      lp.add_constraint(std::move(row), Relation::Equal, 0.0);
    }
  }
  return lp;
}

// Linear map from the table to behavior entry l.
std::vector<std::pair<std::size_t, double>> behavior_entry(const Scenario& s, std::size_t l) {
  const auto n = static_cast<std::size_t>(s.n());
  const auto m = static_cast<std::size_t>(s.m());
  if (l < n) {
    const int i = static_cast<int>(l);
    return {{table_index(s, i, 0, kPP), 1.0}, {table_index(s, i, 0, kPM), 1.0}};
  }
  if (l < n + m) {
    const int j = static_cast<int>(l - n);
    return {{table_index(s, 0, j, kPP), 1.0}, {table_index(s, 0, j, kMP), 1.0}};
  }
  const auto k = l - n - m;
  return {{table_index(s, static_cast<int>(k / m), static_cast<int>(k % m), kPP), 1.0}};
}

BehaviorVector behavior_of_table(const Scenario& s, const std::vector<double>& table) {
  std::vector<double> p(s.dimension(), 0.0);
  for (std::size_t l = 0; l < p.size(); ++l) {
    for (const auto& [idx, coef] : behavior_entry(s, l)) p[l] += coef * table[idx];
    p[l] = std::clamp(p[l], 0.0, 1.0);
  }
  return {s, std::move(p)};
}

}  // namespace

RelaxationOptimum nonsignalling_maximize(const Scenario& s, std::span<const double> coefficients) {
  if (coefficients.size() != s.dimension()) throw DimensionMismatch("nonsignalling objective has the wrong dimension");
  LinearProgram lp = nonsignalling_program(s);
  for (std::size_t l = 0; l < coefficients.size(); ++l) {
    for (const auto& [idx, coef] : behavior_entry(s, l)) lp.objective[idx] += coefficients[l] * coef;
  }
  SolveReport rep = solve_lp(lp);
  if (rep.status != SolveStatus::Optimal) {
    throw SolverFailure(std::string("nonsignalling LP: ") + to_string(rep.status) + " " + rep.message);
  }
  BehaviorVector p = behavior_of_table(s, rep.x);
  const double value = rep.value;
  return RelaxationOptimum{value, std::move(p), std::move(rep)};
}

double nonsignalling_max_value(const BellInequality& ineq) {
  return nonsignalling_maximize(ineq.scenario(), ineq.coefficients()).value;
}

bool nonsignalling_feasible(const BehaviorVector& behavior) {
  const Scenario& s = behavior.scenario();
  LinearProgram lp = nonsignalling_program(s);
  for (std::size_t l = 0; l < s.dimension(); ++l) {
    std::vector<double> row(lp.num_variables(), 0.0);
    for (const auto& [idx, coef] : behavior_entry(s, l)) row[idx] = coef;
    lp.add_constraint(std::move(row), Relation::Equal, behavior.values()[l]);
  }
  const SolveReport rep = solve_lp(lp);
  if (rep.status == SolveStatus::NumericalFailure) throw SolverFailure("nonsignalling LP: " + rep.message);
  return rep.status == SolveStatus::Optimal;
}

}  // namespace detloop
