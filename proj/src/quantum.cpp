#include "detloop/quantum.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "detloop/errors.hpp"

namespace detloop {

using Complex = std::complex<double>;

namespace {

Eigen::Matrix4cd kron(const Eigen::Matrix2cd& a, const Eigen::Matrix2cd& b) {
  Eigen::Matrix4cd out;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) out.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
  }
  return out;
}

}  // namespace

TwoQubitState::TwoQubitState(const Eigen::Matrix4cd& density) : rho_(density) {
  if ((rho_ - rho_.adjoint()).cwiseAbs().maxCoeff() > 1e-12) throw InvalidArgument("density matrix is not Hermitian");
  if (std::abs(rho_.trace() - Complex(1.0, 0.0)) > 1e-12) throw InvalidArgument("density matrix trace is not 1");
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(rho_, Eigen::EigenvaluesOnly);
  if (es.eigenvalues()(0) < -1e-10) throw InvalidArgument("density matrix has a negative eigenvalue");
}

double TwoQubitState::purity() const { return (rho_ * rho_).trace().real(); }

Eigen::Matrix2cd TwoQubitState::reduced_a() const {
  Eigen::Matrix2cd out;
  for (int a = 0; a < 2; ++a) {
    for (int c = 0; c < 2; ++c) out(a, c) = rho_(2 * a, 2 * c) + rho_(2 * a + 1, 2 * c + 1);
  }
  return out;
}

Eigen::Matrix2cd TwoQubitState::reduced_b() const {
  Eigen::Matrix2cd out;
  for (int b = 0; b < 2; ++b) {
    for (int d = 0; d < 2; ++d) out(b, d) = rho_(b, d) + rho_(2 + b, 2 + d);
  }
  return out;
}

MeasurementDirection::MeasurementDirection(double x, double y, double z) : v_{x, y, z} {
  const double norm = std::sqrt(x * x + y * y + z * z);
  if (!std::isfinite(norm) || std::abs(norm - 1.0) > 1e-12) throw InvalidArgument("measurement direction is not a unit vector");
}

MeasurementDirection MeasurementDirection::normalized(double x, double y, double z) {
  const double norm = std::sqrt(x * x + y * y + z * z);
  if (!(norm > 0.0) || !std::isfinite(norm)) throw InvalidArgument("cannot normalize a zero direction");
  // Renormalize once more so the rounding error stays far below 1e-12.
  double nx = x / norm, ny = y / norm, nz = z / norm;
  const double again = std::sqrt(nx * nx + ny * ny + nz * nz);
  return {nx / again, ny / again, nz / again};
}

Eigen::Matrix2cd MeasurementDirection::projector() const {
  Eigen::Matrix2cd p;
  p(0, 0) = Complex(0.5 * (1.0 + v_[2]), 0.0);
  p(1, 1) = Complex(0.5 * (1.0 - v_[2]), 0.0);
  p(0, 1) = Complex(0.5 * v_[0], -0.5 * v_[1]);
  p(1, 0) = Complex(0.5 * v_[0], 0.5 * v_[1]);
  return p;
}

DetectionModel::DetectionModel(double eta_a, double eta_b) : etaA(eta_a), etaB(eta_b) {
  if (!(eta_a >= 0.0 && eta_a <= 1.0 && eta_b >= 0.0 && eta_b <= 1.0)) {
    throw InvalidArgument("detection efficiencies must lie in [0, 1]");
  }
}

std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32), 0x5eedU};
  return std::mt19937_64(seq);
}

TwoQubitState maximally_entangled_state() { return depolarized_maximally_entangled(1.0); }

TwoQubitState depolarized_maximally_entangled(double visibility) {
  if (!(visibility >= 0.0 && visibility <= 1.0)) throw InvalidArgument("visibility must lie in [0, 1]");
  Eigen::Matrix4cd rho = Eigen::Matrix4cd::Identity() * Complex((1.0 - visibility) / 4.0, 0.0);
  const Complex half(0.5 * visibility, 0.0);
  rho(0, 0) += half;
  rho(0, 3) += half;
  rho(3, 0) += half;
  rho(3, 3) += half;
  return TwoQubitState(rho);
}

TwoQubitState product_state(const MeasurementDirection& a, const MeasurementDirection& b) {
  const Eigen::Matrix4cd rho = kron(a.projector(), b.projector());
  return TwoQubitState(rho);
}

MeasurementDirection random_direction(std::mt19937_64& rng) {
  // Archimedes: z uniform on [-1, 1] and an independent uniform azimuth give
  // the rotation-invariant measure on the sphere.
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  const double z = unit(rng);
  const double phi = angle(rng);
  const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
  return MeasurementDirection::normalized(r * std::cos(phi), r * std::sin(phi), z);
}

MeasurementDirection random_direction(std::uint64_t seed) {
  auto rng = make_rng(seed);
  return random_direction(rng);
}

BehaviorVector quantum_behavior(const TwoQubitState& state, const std::vector<MeasurementDirection>& a_dirs,
                                const std::vector<MeasurementDirection>& b_dirs) {
  const Scenario s(static_cast<int>(a_dirs.size()), static_cast<int>(b_dirs.size()));
  const Eigen::Matrix4cd& rho = state.density();
  const Eigen::Matrix2cd id = Eigen::Matrix2cd::Identity();
  auto expect = [&](const Eigen::Matrix4cd& op) { return std::clamp((rho * op).trace().real(), 0.0, 1.0); };
  std::vector<double> v(s.dimension());
  for (int i = 0; i < s.n(); ++i) v[s.index_a(i)] = expect(kron(a_dirs[i].projector(), id));
  for (int j = 0; j < s.m(); ++j) v[s.index_b(j)] = expect(kron(id, b_dirs[j].projector()));
  for (int i = 0; i < s.n(); ++i) {
    for (int j = 0; j < s.m(); ++j) {
      v[s.index_ab(i, j)] = expect(kron(a_dirs[i].projector(), b_dirs[j].projector()));
    }
  }
  return {s, std::move(v)};
}

BehaviorVector apply_detection_efficiency(const BehaviorVector& behavior, const DetectionModel& model) {
  const DetectionModel checked(model.etaA, model.etaB);
  const Scenario& s = behavior.scenario();
  BehaviorVector out = behavior;
  for (int i = 0; i < s.n(); ++i) out.pA(i) *= checked.etaA;
  for (int j = 0; j < s.m(); ++j) out.pB(j) *= checked.etaB;
  for (int i = 0; i < s.n(); ++i) {
    for (int j = 0; j < s.m(); ++j) out.pAB(i, j) *= checked.etaA * checked.etaB;
  }
  return out;
}

namespace {

std::int64_t draw_binomial(std::mt19937_64& rng, std::int64_t trials, double p) {
  if (trials <= 0 || p <= 0.0) return 0;
  if (p >= 1.0) return trials;
  std::binomial_distribution<std::int64_t> dist(trials, p);
  return dist(rng);
}

}  // namespace

CountRecord sample_counts(const BehaviorVector& behavior, std::int64_t trials_per_context, std::uint64_t seed,
                          const SamplingOptions& options) {
  if (trials_per_context < 1) throw InvalidArgument("trialsPerContext must be at least 1");
  const Scenario& s = behavior.scenario();
  if (options.singles_context_a < 0 || options.singles_context_a >= s.m() || options.singles_context_b < 0 ||
      options.singles_context_b >= s.n()) {
    throw InvalidArgument("designated singles context out of range");
  }
  CountRecord counts;
  counts.scenario = s;
  counts.trialsPerContext = trials_per_context;
  counts.nA.assign(static_cast<std::size_t>(s.n()), 0);
  counts.nB.assign(static_cast<std::size_t>(s.m()), 0);
  counts.nAB.assign(static_cast<std::size_t>(s.n() * s.m()), 0);

  for (int i = 0; i < s.n(); ++i) {
    for (int j = 0; j < s.m(); ++j) {
      const double pa = behavior.pA(i);
      const double pb = behavior.pB(j);
      const double pab = behavior.pAB(i, j);
      if (pab > std::min(pa, pb) + 1e-9 || pa + pb - pab > 1.0 + 1e-9 || pab < -1e-9) {
        throw InvalidBehavior("no four-outcome distribution for context (" + std::to_string(i) + ", " +
                              std::to_string(j) + ")");
      }
      const double p_pp = std::clamp(pab, 0.0, 1.0);
      const double p_pm = std::clamp(pa - pab, 0.0, 1.0);
      const double p_mp = std::clamp(pb - pab, 0.0, 1.0);
      auto rng = make_rng(seed, static_cast<std::uint64_t>(i * s.m() + j));
      // Sequential conditional binomials reproduce the multinomial draw.
      const std::int64_t n_pp = draw_binomial(rng, trials_per_context, p_pp);
      const double rest1 = 1.0 - p_pp;
      const std::int64_t n_pm = rest1 > 0.0 ? draw_binomial(rng, trials_per_context - n_pp, p_pm / rest1) : 0;
      const double rest2 = rest1 - p_pm;
      const std::int64_t n_mp =
          rest2 > 0.0 ? draw_binomial(rng, trials_per_context - n_pp - n_pm, std::min(1.0, p_mp / rest2)) : 0;
      counts.nAB[static_cast<std::size_t>(i * s.m() + j)] = n_pp;
      if (j == options.singles_context_a) counts.nA[static_cast<std::size_t>(i)] = n_pp + n_pm;
      if (i == options.singles_context_b) counts.nB[static_cast<std::size_t>(j)] = n_pp + n_mp;
    }
  }
  return counts;
}

CHSettings tsirelson_ch_settings() {
  const double r = std::numbers::sqrt2 / 2.0;
  return {{MeasurementDirection(0.0, 0.0, 1.0), MeasurementDirection(1.0, 0.0, 0.0)},
          {MeasurementDirection::normalized(r, 0.0, r), MeasurementDirection::normalized(-r, 0.0, r)}};
}

}  // namespace detloop
