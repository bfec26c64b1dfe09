#pragma once

// Named end-to-end checks binding published numbers to executable runs.
// Each case is deterministic given its seed and reports observed values
// against an expected band.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace detloop {

struct ReproductionOptions {
  std::optional<int> level;  // case default when empty
  std::uint64_t seed = 20160301;
  int threads = 1;
  double tolerance = 1e-3;   // bisection tolerance
  std::optional<long> trials;  // case default when empty
};

struct ReproductionCheck {
  std::string label;
  double observed = 0.0;
  double lower = 0.0;  // accepted band, inclusive
  double upper = 0.0;
  bool pass = false;
};

struct ReproductionReport {
  std::string name;
  std::string description;
  std::string provenance;
  std::vector<ReproductionCheck> checks;
  double runtime_seconds = 0.0;
  bool pass = false;

  nlohmann::json to_json() const;
};

const std::vector<std::string>& reproduction_case_names();

/// Throws InvalidArgument for an unknown name.
ReproductionReport run_reproduction(const std::string& name, const ReproductionOptions& options = {});

/// Fraction of trials whose random-measurement behavior on |Phi+> is
/// separated from the classical cone. Trial t uses rng stream t.
double random_success_fraction(int n, int m, long trials, std::uint64_t seed, int threads = 1);

/// Certified symmetric efficiency bounds from lossy random-measurement
/// behaviors on |Phi+> (n = m = 2); settings are redrawn until the lossy
/// behavior is separated. One entry per trial, in trial order.
std::vector<double> reconstruction_bounds(double eta, int model_level, long trials, std::uint64_t seed,
                                          int threads = 1, double tolerance = 1e-3);

}  // namespace detloop
