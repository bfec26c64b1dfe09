#pragma once

// JSON files for behaviors, inequalities and counts; CSV for curves.
//
//   behavior:   {"n", "m", "pA": [n], "pB": [m], "pAB": [[m] x n]}
//   inequality: {"n", "m", "hA", "hB", "hAB"}
//   counts:     {"n", "m", "nA", "nB", "nAB", "trialsPerContext"}
//
// Readers throw FormatError on schema violations and non-finite numbers.

#include <filesystem>
#include <string>

#include "json.hpp"

#include "detloop/efficiency.hpp"
#include "detloop/scenario.hpp"

namespace detloop::io {

nlohmann::json to_json(const BehaviorVector& behavior);
nlohmann::json to_json(const BellInequality& ineq);
nlohmann::json to_json(const CountRecord& counts);

BehaviorVector behavior_from_json(const nlohmann::json& j);
BellInequality inequality_from_json(const nlohmann::json& j);
CountRecord counts_from_json(const nlohmann::json& j);

nlohmann::json read_json(const std::filesystem::path& path);

BehaviorVector read_behavior(const std::filesystem::path& path);
BellInequality read_inequality(const std::filesystem::path& path);
CountRecord read_counts(const std::filesystem::path& path);

/// Writes to a sibling temporary file, then renames it over `path`.
void write_text_atomic(const std::filesystem::path& path, const std::string& text);
void write_json(const std::filesystem::path& path, const nlohmann::json& j);

/// "known_eta,bound,q" rows; points without a bound are skipped.
std::string curve_csv(const std::vector<CurvePoint>& curve);

}  // namespace detloop::io
