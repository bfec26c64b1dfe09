#include "detloop/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "detloop/errors.hpp"

namespace detloop::io {

using nlohmann::json;

namespace {

int read_dim(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_number_integer()) throw FormatError(std::string("missing integer field \"") + key + "\"");
  const auto v = j.at(key).get<std::int64_t>();
  if (v < 1 || v > 64) throw FormatError(std::string("field \"") + key + "\" out of range");
  return static_cast<int>(v);
}

double finite_number(const json& v, const std::string& where) {
  if (!v.is_number()) throw FormatError(where + ": expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw FormatError(where + ": non-finite number");
  return x;
}

std::vector<double> read_vector(const json& j, const char* key, int size) {
  if (!j.contains(key) || !j.at(key).is_array()) throw FormatError(std::string("missing array \"") + key + "\"");
  const json& arr = j.at(key);
  if (static_cast<int>(arr.size()) != size) {
    throw FormatError(std::string("array \"") + key + "\" has " + std::to_string(arr.size()) + " entries, expected " +
                      std::to_string(size));
  }
  std::vector<double> out;
  out.reserve(arr.size());
  for (std::size_t k = 0; k < arr.size(); ++k) out.push_back(finite_number(arr[k], std::string(key) + "[" + std::to_string(k) + "]"));
  return out;
}

std::vector<std::vector<double>> read_matrix(const json& j, const char* key, int rows, int cols) {
  if (!j.contains(key) || !j.at(key).is_array()) throw FormatError(std::string("missing array \"") + key + "\"");
  const json& arr = j.at(key);
  if (static_cast<int>(arr.size()) != rows) throw FormatError(std::string("matrix \"") + key + "\" has wrong row count");
  std::vector<std::vector<double>> out;
  for (int r = 0; r < rows; ++r) {
    json row_holder = {{"row", arr[static_cast<std::size_t>(r)]}};
    out.push_back(read_vector(row_holder, "row", cols));
  }
  return out;
}

std::vector<std::int64_t> to_counts(const std::vector<double>& v, const char* key) {
  std::vector<std::int64_t> out;
  out.reserve(v.size());
  for (double x : v) {
    if (x != std::floor(x) || std::abs(x) > 9.0e15) throw FormatError(std::string("\"") + key + "\" entries must be integers");
    out.push_back(static_cast<std::int64_t>(x));
  }
  return out;
}

void check_object(const json& j) {
  if (!j.is_object()) throw FormatError("expected a JSON object");
}

}  // namespace

json to_json(const BehaviorVector& behavior) {
  const Scenario& s = behavior.scenario();
  json pA = json::array(), pB = json::array(), pAB = json::array();
  for (int i = 0; i < s.n(); ++i) pA.push_back(behavior.pA(i));
  for (int j = 0; j < s.m(); ++j) pB.push_back(behavior.pB(j));
  for (int i = 0; i < s.n(); ++i) {
    json row = json::array();
    for (int j = 0; j < s.m(); ++j) row.push_back(behavior.pAB(i, j));
    pAB.push_back(std::move(row));
  }
  return {{"n", s.n()}, {"m", s.m()}, {"pA", pA}, {"pB", pB}, {"pAB", pAB}};
}

json to_json(const BellInequality& ineq) {
  const Scenario& s = ineq.scenario();
  json hA = json::array(), hB = json::array(), hAB = json::array();
  for (int i = 0; i < s.n(); ++i) hA.push_back(ineq.hA(i));
  for (int j = 0; j < s.m(); ++j) hB.push_back(ineq.hB(j));
  for (int i = 0; i < s.n(); ++i) {
    json row = json::array();
    for (int j = 0; j < s.m(); ++j) row.push_back(ineq.hAB(i, j));
    hAB.push_back(std::move(row));
  }
  return {{"n", s.n()}, {"m", s.m()}, {"hA", hA}, {"hB", hB}, {"hAB", hAB}};
}

json to_json(const CountRecord& counts) {
  const Scenario& s = counts.scenario;
  json nAB = json::array();
  for (int i = 0; i < s.n(); ++i) {
    json row = json::array();
    for (int j = 0; j < s.m(); ++j) row.push_back(counts.joint(i, j));
    nAB.push_back(std::move(row));
  }
  return {{"n", s.n()},      {"m", s.m()},     {"nA", counts.nA},
          {"nB", counts.nB}, {"nAB", nAB},     {"trialsPerContext", counts.trialsPerContext}};
}

BehaviorVector behavior_from_json(const json& j) {
  check_object(j);
  const int n = read_dim(j, "n");
  const int m = read_dim(j, "m");
  auto b = BehaviorVector::from_parts(read_vector(j, "pA", n), read_vector(j, "pB", m), read_matrix(j, "pAB", n, m));
  return b;
}

BellInequality inequality_from_json(const json& j) {
  check_object(j);
  const int n = read_dim(j, "n");
  const int m = read_dim(j, "m");
  return BellInequality::from_parts(read_vector(j, "hA", n), read_vector(j, "hB", m), read_matrix(j, "hAB", n, m));
}

CountRecord counts_from_json(const json& j) {
  check_object(j);
  const int n = read_dim(j, "n");
  const int m = read_dim(j, "m");
  CountRecord c;
  c.scenario = Scenario(n, m);
  c.nA = to_counts(read_vector(j, "nA", n), "nA");
  c.nB = to_counts(read_vector(j, "nB", m), "nB");
  for (const auto& row : read_matrix(j, "nAB", n, m)) {
    auto r = to_counts(row, "nAB");
    c.nAB.insert(c.nAB.end(), r.begin(), r.end());
  }
  if (!j.contains("trialsPerContext") || !j.at("trialsPerContext").is_number_integer()) {
    throw FormatError("missing integer field \"trialsPerContext\"");
  }
  c.trialsPerContext = j.at("trialsPerContext").get<std::int64_t>();
  try {
    c.validate();
  } catch (const InvalidArgument& e) {
    throw FormatError(e.what());
  }
  return c;
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  try {
    // NaN and Infinity are not JSON literals, so the parser already rejects them.
    return json::parse(in);
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

BehaviorVector read_behavior(const std::filesystem::path& path) { return behavior_from_json(read_json(path)); }
BellInequality read_inequality(const std::filesystem::path& path) { return inequality_from_json(read_json(path)); }
CountRecord read_counts(const std::filesystem::path& path) { return counts_from_json(read_json(path)); }

void write_text_atomic(const std::filesystem::path& path, const std::string& text) {
  const std::filesystem::path dir = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
  const std::filesystem::path tmp = dir / ("." + path.filename().string() + ".tmp" + std::to_string(::getpid()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot write " + tmp.string());
    out << text;
    out.flush();
    if (!out) {
      std::filesystem::remove(tmp);
      throw FormatError("write failed for " + tmp.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw FormatError("cannot rename onto " + path.string() + ": " + ec.message());
  }
}

void write_json(const std::filesystem::path& path, const json& j) { write_text_atomic(path, j.dump(2) + "\n"); }

std::string curve_csv(const std::vector<CurvePoint>& curve) {
  std::ostringstream out;
  out << "known_eta,bound,q\n";
  char line[96];
  for (const auto& p : curve) {
    if (!p.bound) continue;
    std::snprintf(line, sizeof line, "%.6f,%.6f,%.6f\n", p.known_eta, *p.bound, p.q);
    out << line;
  }
  return out.str();
}

}  // namespace detloop::io
