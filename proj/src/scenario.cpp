#include "detloop/scenario.hpp"

#include <cmath>
#include <string>

#include "detloop/errors.hpp"
#include "detloop/simd.hpp"

namespace detloop {

Scenario::Scenario(int n, int m) : n_(n), m_(m) {
  if (n < 1 || m < 1) {
    throw InvalidArgument("scenario needs n >= 1 and m >= 1, got n=" + std::to_string(n) +
                          " m=" + std::to_string(m));
  }
}

namespace {

void require_size(const Scenario& s, std::size_t size, const char* what) {
  if (size != s.dimension()) {
    throw DimensionMismatch(std::string(what) + ": expected " + std::to_string(s.dimension()) +
                            " entries, got " + std::to_string(size));
  }
}

void require_finite(std::span<const double> v, const char* what) {
  for (double x : v) {
    if (!std::isfinite(x)) throw InvalidArgument(std::string(what) + " contains a non-finite value");
  }
}

template <typename T>
std::vector<T> flatten(const std::vector<T>& a, const std::vector<T>& b,
                       const std::vector<std::vector<T>>& ab, const char* what) {
  if (ab.size() != a.size()) throw DimensionMismatch(std::string(what) + ": joint table needs n rows");
  std::vector<T> flat(a);
  flat.insert(flat.end(), b.begin(), b.end());
  for (const auto& row : ab) {
    if (row.size() != b.size()) throw DimensionMismatch(std::string(what) + ": joint table needs m columns");
    flat.insert(flat.end(), row.begin(), row.end());
  }
  return flat;
}

// Permutation taking the (n, m) layout to the (m, n) layout.
std::vector<double> transpose_values(const Scenario& s, std::span<const double> v) {
  const Scenario t = s.transposed();
  std::vector<double> out(v.size());
  for (int i = 0; i < s.n(); ++i) out[t.index_b(i)] = v[s.index_a(i)];
  for (int j = 0; j < s.m(); ++j) out[t.index_a(j)] = v[s.index_b(j)];
  for (int i = 0; i < s.n(); ++i) {
    for (int j = 0; j < s.m(); ++j) out[t.index_ab(j, i)] = v[s.index_ab(i, j)];
  }
  return out;
}

}  // namespace

BehaviorVector::BehaviorVector(Scenario scenario, std::vector<double> values)
    : scenario_(scenario), values_(std::move(values)) {
  require_size(scenario_, values_.size(), "behavior");
  require_finite(values_, "behavior");
}

BehaviorVector BehaviorVector::zeros(Scenario scenario) {
  return {scenario, std::vector<double>(scenario.dimension(), 0.0)};
}

BehaviorVector BehaviorVector::from_parts(const std::vector<double>& pA, const std::vector<double>& pB,
                                          const std::vector<std::vector<double>>& pAB) {
  return {Scenario(static_cast<int>(pA.size()), static_cast<int>(pB.size())), flatten(pA, pB, pAB, "behavior")};
}

BehaviorVector BehaviorVector::mix(const BehaviorVector& other, double alpha) const {
  if (!(other.scenario_ == scenario_)) throw DimensionMismatch("mixing behaviors of different scenarios");
  std::vector<double> out(values_.size());
  for (std::size_t l = 0; l < out.size(); ++l) out[l] = alpha * values_[l] + (1.0 - alpha) * other.values_[l];
  return {scenario_, std::move(out)};
}

bool BehaviorVector::in_unit_box(double tol) const noexcept {
  for (double x : values_) {
    if (x < -tol || x > 1.0 + tol) return false;
  }
  return true;
}

BehaviorVector BehaviorVector::transposed() const {
  return {scenario_.transposed(), transpose_values(scenario_, values_)};
}

BellInequality::BellInequality(Scenario scenario, std::vector<double> coefficients)
    : scenario_(scenario), h_(std::move(coefficients)) {
  require_size(scenario_, h_.size(), "inequality");
  require_finite(h_, "inequality");
}

BellInequality BellInequality::from_parts(const std::vector<double>& hA, const std::vector<double>& hB,
                                          const std::vector<std::vector<double>>& hAB) {
  return {Scenario(static_cast<int>(hA.size()), static_cast<int>(hB.size())), flatten(hA, hB, hAB, "inequality")};
}

BellInequality BellInequality::transposed() const {
  return {scenario_.transposed(), transpose_values(scenario_, h_)};
}

void CountRecord::validate() const {
  const auto n = static_cast<std::size_t>(scenario.n());
  const auto m = static_cast<std::size_t>(scenario.m());
  if (nA.size() != n || nB.size() != m || nAB.size() != n * m) {
    throw DimensionMismatch("count record sizes do not match the scenario");
  }
  if (trialsPerContext < 1) throw InvalidArgument("trialsPerContext must be positive");
  auto check = [&](std::int64_t c, const char* what) {
    if (c < 0) throw InvalidArgument(std::string("negative count in ") + what);
    if (c > trialsPerContext) throw InvalidArgument(std::string("count above trialsPerContext in ") + what);
  };
  for (auto c : nA) check(c, "nA");
  for (auto c : nB) check(c, "nB");
  for (auto c : nAB) check(c, "nAB");
}

BehaviorVector ClassicalityCertificate::reconstruct(const Scenario& scenario) const {
  std::vector<double> out(scenario.dimension(), 0.0);
  for (const auto& [k, w] : weights) {
    const BehaviorVector v = vertex(scenario, k);
    for (std::size_t l = 0; l < out.size(); ++l) out[l] += scale * w * v.values()[l];
  }
  return {scenario, std::move(out)};
}

namespace {

void fill_vertex(const Scenario& s, std::uint64_t k, double* out) {
  const int n = s.n();
  const int m = s.m();
  for (int i = 0; i < n; ++i) out[s.index_a(i)] = static_cast<double>((k >> (m + n - 1 - i)) & 1U);
  for (int j = 0; j < m; ++j) out[s.index_b(j)] = static_cast<double>((k >> (m - 1 - j)) & 1U);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < m; ++j) out[s.index_ab(i, j)] = out[s.index_a(i)] * out[s.index_b(j)];
  }
}

std::uint64_t vertex_count(const Scenario& s, int cap_log2) {
  if (s.n() + s.m() > cap_log2) {
    throw CapExceeded("2^(n+m) = 2^" + std::to_string(s.n() + s.m()) + " vertices exceeds the cap 2^" +
                      std::to_string(cap_log2));
  }
  return std::uint64_t{1} << (s.n() + s.m());
}

}  // namespace

BehaviorVector vertex(const Scenario& scenario, std::uint64_t k) {
  if (k >= (std::uint64_t{1} << (scenario.n() + scenario.m()))) throw InvalidArgument("vertex index out of range");
  std::vector<double> v(scenario.dimension());
  fill_vertex(scenario, k, v.data());
  return {scenario, std::move(v)};
}

std::vector<BehaviorVector> enumerate_vertices(const Scenario& scenario, int cap_log2) {
  const std::uint64_t count = vertex_count(scenario, cap_log2);
  std::vector<BehaviorVector> out;
  out.reserve(count);
  for (std::uint64_t k = 0; k < count; ++k) out.push_back(vertex(scenario, k));
  return out;
}

VertexTable vertex_table(const Scenario& scenario, int cap_log2) {
  VertexTable table;
  table.scenario = scenario;
  table.count = vertex_count(scenario, cap_log2);
  const std::size_t d = scenario.dimension();
  table.entries.assign(table.count * d, 0.0);
  for (std::size_t k = 0; k < table.count; ++k) fill_vertex(scenario, k, table.entries.data() + k * d);
  return table;
}

BehaviorVector behavior_from_counts(const CountRecord& counts, std::int64_t base_rate) {
  if (base_rate <= 0) throw InvalidBaseRate("base rate must be positive");
  counts.validate();
  const Scenario& s = counts.scenario;
  std::vector<double> v(s.dimension());
  const auto rate = static_cast<double>(base_rate);
  for (int i = 0; i < s.n(); ++i) v[s.index_a(i)] = static_cast<double>(counts.nA[i]) / rate;
  for (int j = 0; j < s.m(); ++j) v[s.index_b(j)] = static_cast<double>(counts.nB[j]) / rate;
  for (int i = 0; i < s.n(); ++i) {
    for (int j = 0; j < s.m(); ++j) v[s.index_ab(i, j)] = static_cast<double>(counts.joint(i, j)) / rate;
  }
  for (double x : v) {
    if (x > 1.0 + kGeometryTolerance) {
      throw InvalidBaseRate("count / base rate exceeds 1; the base rate underestimates the event total");
    }
  }
  return {s, std::move(v)};
}

double evaluate_inequality(const BellInequality& ineq, const BehaviorVector& behavior) {
  if (!(ineq.scenario() == behavior.scenario())) {
    throw DimensionMismatch("inequality and behavior belong to different scenarios");
  }
  // Plain summation in layout order keeps the result independent of the
  // active vector ISA.
  double q = 0.0;
  const auto h = ineq.coefficients();
  const auto p = behavior.values();
  for (std::size_t l = 0; l < h.size(); ++l) q += h[l] * p[l];
  return q;
}

bool validate_inequality(const BellInequality& ineq, double tol, int cap_log2) {
  const VertexTable table = vertex_table(ineq.scenario(), cap_log2);
  const double worst = simd::max_row_dot(table.entries, table.count, ineq.scenario().dimension(),
                                         ineq.coefficients(), nullptr);
  return worst <= tol;
}

BellInequality ch_inequality() {
  return {Scenario(2, 2), {-1, 0, -1, 0, 1, 1, 1, -1}};
}

BellInequality builtin_i6522() {
  return BellInequality::from_parts({-4, -6, -6, -4, -6, 0}, {-2, -6, -4, -6, -6},
                                    {{6, 0, 2, 2, -2},
                                     {-6, 6, 6, 2, 4},
                                     {0, 3, -2, 5, 5},
                                     {0, -3, -2, 6, 6},
                                     {6, 6, 0, -6, 6},
                                     {-2, 0, 4, 4, -6}});
}

}  // namespace detloop
