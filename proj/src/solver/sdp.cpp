// Primal-dual interior-point method for
//
//   maximize  b.y   subject to   Z(y) = C + sum_v y_v F_v  PSD,
//
// paired with  minimize <C, X>  s.t.  <F_v, X> = -b_v,  X PSD.
// Infeasible start, HKM search direction, Mehrotra predictor-corrector.
// Each F_v is sparse (the entries a shared variable occupies), so the Schur
// complement is assembled from G_v = Z^-1 F_v X by rank-one updates.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

#include "detloop/errors.hpp"
#include "detloop/simd.hpp"
#include "detloop/solver.hpp"

namespace detloop {

SemidefiniteProgram::SemidefiniteProgram(int dimension) : dim_(dimension) {
  if (dimension < 1) throw InvalidArgument("SDP dimension must be positive");
  slots_.resize(static_cast<std::size_t>(dimension) * static_cast<std::size_t>(dimension + 1) / 2);
}

std::size_t SemidefiniteProgram::key(int row, int col) const {
  if (row < 0 || col < 0 || row >= dim_ || col >= dim_) throw InvalidArgument("SDP entry index out of range");
  if (row > col) std::swap(row, col);
  // Row-major upper triangle: rows before `row` hold sum_{i<row} (dim - i) slots.
  const auto r = static_cast<std::size_t>(row);
  const auto d = static_cast<std::size_t>(dim_);
  return r * d - (r * (r + 1)) / 2 + static_cast<std::size_t>(col);
}

int SemidefiniteProgram::add_variable() {
  objective_.push_back(0.0);
  return static_cast<int>(objective_.size()) - 1;
}

void SemidefiniteProgram::pin(int row, int col, double value) {
  if (!std::isfinite(value)) throw InvalidArgument("SDP pinned value must be finite");
  Slot& s = slots_[key(row, col)];
  s = Slot{-1, value, true};
}

void SemidefiniteProgram::tie(int row, int col, int variable) {
  if (variable < 0 || variable >= num_variables()) throw InvalidArgument("SDP variable index out of range");
  slots_[key(row, col)] = Slot{variable, 0.0, true};
}

void SemidefiniteProgram::maximize_variable(int variable, double coefficient) {
  if (variable < 0 || variable >= num_variables()) throw InvalidArgument("SDP variable index out of range");
  objective_[static_cast<std::size_t>(variable)] += coefficient;
}

void SemidefiniteProgram::maximize_entry(int row, int col, double coefficient) {
  entry_objective_.push_back({key(row, col), coefficient});
}

const SemidefiniteProgram::Slot& SemidefiniteProgram::slot(int row, int col) const { return slots_[key(row, col)]; }

SemidefiniteProgram SemidefiniteProgram::finalized() const {
  SemidefiniteProgram out = *this;
  for (auto& s : out.slots_) {
    if (!s.assigned) s = Slot{out.add_variable(), 0.0, true};
  }
  for (const auto& [k, coef] : out.entry_objective_) {
    const Slot& s = out.slots_[k];
    if (s.variable >= 0) {
      out.objective_[static_cast<std::size_t>(s.variable)] += coef;
    } else {
      out.offset_ += coef * s.value;
    }
  }
  out.entry_objective_.clear();
  return out;
}

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

struct Entry {
  int row;
  int col;
  double value;
};

// Internal standard form; every F_v stored as its full (both triangles)
// entry list.
struct SdpData {
  int n = 0;
  MatrixXd c;
  std::vector<std::vector<Entry>> f;
  VectorXd b;
  double offset = 0.0;
  std::vector<int> original;  // compact index -> caller's variable index
  int original_count = 0;
  bool free_objective = false;
};

SdpData lower(const SemidefiniteProgram& program, bool margin) {
  const SemidefiniteProgram p = program.finalized();
  SdpData d;
  d.n = p.dimension();
  d.c = MatrixXd::Zero(d.n, d.n);
  const int nv = p.num_variables();
  d.f.resize(static_cast<std::size_t>(nv) + (margin ? 1 : 0));
  d.b = VectorXd::Zero(static_cast<Index>(d.f.size()));
  for (int r = 0; r < d.n; ++r) {
    for (int c = r; c < d.n; ++c) {
      const auto& s = p.slot(r, c);
      if (s.variable < 0) {
        d.c(r, c) = s.value;
        d.c(c, r) = s.value;
      } else {
        auto& list = d.f[static_cast<std::size_t>(s.variable)];
        list.push_back({r, c, 1.0});
        if (r != c) list.push_back({c, r, 1.0});
      }
    }
  }
  if (margin) {
    auto& list = d.f.back();
    for (int r = 0; r < d.n; ++r) list.push_back({r, r, -1.0});
    d.b(static_cast<Index>(nv)) = 1.0;
  } else {
    for (int v = 0; v < nv; ++v) d.b(v) = p.objective()[static_cast<std::size_t>(v)];
    d.offset = p.objective_offset();
  }
  // Variables that occupy no entry would make the Schur complement singular;
  // drop them, remembering whether one carried objective weight.
  std::vector<std::vector<Entry>> kept;
  std::vector<double> kept_b;
  for (std::size_t v = 0; v < d.f.size(); ++v) {
    if (d.f[v].empty()) {
      if (d.b(static_cast<Index>(v)) != 0.0) d.free_objective = true;
      continue;
    }
    kept.push_back(std::move(d.f[v]));
    kept_b.push_back(d.b(static_cast<Index>(v)));
    d.original.push_back(static_cast<int>(v));
  }
  d.original_count = static_cast<int>(d.f.size());
  d.f = std::move(kept);
  d.b = Eigen::Map<VectorXd>(kept_b.data(), static_cast<Index>(kept_b.size()));
  return d;
}

// Written through a temporary: assigning (a + a^T) / 2 straight into `a`
// aliases the transpose.
void symmetrize(MatrixXd& a) {
  MatrixXd t = 0.5 * (a + a.transpose());
  a.swap(t);
}

double inner(const std::vector<Entry>& f, const MatrixXd& k) {
  double s = 0.0;
  for (const auto& e : f) s += e.value * k(e.row, e.col);
  return s;
}

void accumulate(const std::vector<Entry>& f, double scale, MatrixXd& out) {
  for (const auto& e : f) out(e.row, e.col) += scale * e.value;
}

// Largest alpha in (0, inf] with X + alpha dX PSD, given chol(X).
double max_step(const Eigen::LLT<MatrixXd>& chol, const MatrixXd& dx) {
  const MatrixXd l = chol.matrixL();
  const MatrixXd half = l.triangularView<Eigen::Lower>().solve(dx);
  const MatrixXd half_t = half.transpose();
  MatrixXd w = l.triangularView<Eigen::Lower>().solve(half_t);
  symmetrize(w);
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(w, Eigen::EigenvaluesOnly);
  const double lmin = es.eigenvalues()(0);
  return lmin >= 0.0 ? kInfinity : -1.0 / lmin;
}

class InteriorPoint {
 public:
  InteriorPoint(const SdpData& data, const SdpOptions& options) : d_(data), opt_(options) {}

  SolveReport run() {
    const int n = d_.n;
    const auto m = static_cast<Index>(d_.f.size());
    SolveReport rep;

    if (m == 0) {
      Eigen::SelfAdjointEigenSolver<MatrixXd> es(d_.c, Eigen::EigenvaluesOnly);
      rep.matrix = d_.c;
      rep.value = d_.offset;
      rep.status = es.eigenvalues()(0) >= -Tolerances::psd_eigenvalue ? SolveStatus::Optimal : SolveStatus::Infeasible;
      rep.x.assign(static_cast<std::size_t>(d_.original_count), 0.0);
      return rep;
    }

    double fmax = 0.0;
    double ratio = 0.0;
    for (Index v = 0; v < m; ++v) {
      double norm = 0.0;
      for (const auto& e : d_.f[static_cast<std::size_t>(v)]) norm += e.value * e.value;
      norm = std::sqrt(norm);
      fmax = std::max(fmax, norm);
      ratio = std::max(ratio, (1.0 + std::abs(d_.b(v))) / (1.0 + norm));
    }
    const double cnorm = d_.c.norm();
    const double bnorm = d_.b.norm();
    const double xi = std::max({10.0, std::sqrt(static_cast<double>(n)), static_cast<double>(n) * ratio});
    const double zeta = std::max({10.0, std::sqrt(static_cast<double>(n)), fmax, cnorm});

    MatrixXd x = xi * MatrixXd::Identity(n, n);
    MatrixXd z = zeta * MatrixXd::Identity(n, n);
    VectorXd y = VectorXd::Zero(m);

    MatrixXd g(n, n);
    MatrixXd schur(m, m);
    int stalled = 0;

    for (int it = 0; it < opt_.max_iterations; ++it) {
      rep.iterations = it + 1;
      // Residuals.
      MatrixXd rd = d_.c - z;
      for (Index v = 0; v < m; ++v) accumulate(d_.f[static_cast<std::size_t>(v)], y(v), rd);
      VectorXd rp(m);
      for (Index v = 0; v < m; ++v) rp(v) = -d_.b(v) - inner(d_.f[static_cast<std::size_t>(v)], x);
      const double pobj = (d_.c.cwiseProduct(x)).sum();
      const double dobj = d_.b.dot(y);
      const double mu = (x.cwiseProduct(z)).sum() / n;
      const double relgap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));
      const double pinf = rp.norm() / (1.0 + bnorm);
      const double dinf = rd.norm() / (1.0 + cnorm);
      rep.primal_residual = pinf;
      rep.dual_residual = dinf;

      if (relgap < opt_.gap_tolerance && pinf < opt_.feasibility_tolerance && dinf < opt_.feasibility_tolerance) {
        return finish(rep, y, SolveStatus::Optimal);
      }
      if (relgap < kFallbackTolerance && pinf < kFallbackTolerance && dinf < kFallbackTolerance) {
        fallback_ = y;
        fallback_pinf_ = pinf;
        fallback_dinf_ = dinf;
      }
      if (x.norm() > 1e12 || y.norm() > 1e12) {
        rep.message = "primal iterate diverged";
        return fail(rep, y);
      }

      const Eigen::LLT<MatrixXd> zchol(z);
      const Eigen::LLT<MatrixXd> xchol(x);
      if (zchol.info() != Eigen::Success || xchol.info() != Eigen::Success) {
        rep.message = "iterate lost positive definiteness";
        return fail(rep, y);
      }
      MatrixXd zi = zchol.solve(MatrixXd::Identity(n, n));
      symmetrize(zi);

      assemble_schur(x, zi, g, schur);
      Eigen::LLT<MatrixXd> mchol(schur);
      if (mchol.info() != Eigen::Success) {
        const double shift = 1e-12 * std::max(1.0, schur.diagonal().cwiseAbs().maxCoeff());
        schur.diagonal().array() += shift;
        mchol.compute(schur);
        if (mchol.info() != Eigen::Success) {
          rep.message = "Schur complement not positive definite";
          return fail(rep, y);
        }
      }

      const MatrixXd xrdzi = x * rd * zi;
      // Predictor.
      MatrixXd k = -x - xrdzi;
      MatrixXd dx, dz;
      VectorXd dy;
      direction(k, rp, mchol, x, zi, rd, dx, dy, dz);
      double ap = std::min(1.0, max_step(xchol, dx));
      double ad = std::min(1.0, max_step(zchol, dz));
      const double mu_aff = ((x + ap * dx).cwiseProduct(z + ad * dz)).sum() / n;
      const double sigma = std::clamp(std::pow(mu_aff / mu, 3.0), 0.0, 1.0);

      // Corrector.
      k = (sigma * mu * MatrixXd::Identity(n, n) - dx * dz) * zi - x - xrdzi;
      direction(k, rp, mchol, x, zi, rd, dx, dy, dz);
      const double gamma = 0.95;
      ap = std::min(1.0, gamma * max_step(xchol, dx));
      ad = std::min(1.0, gamma * max_step(zchol, dz));

      // Near the boundary rounding can leave the full step indefinite.
      MatrixXd xn, zn;
      for (int back = 0;; ++back) {
        xn = x + ap * dx;
        symmetrize(xn);
        if (Eigen::LLT<MatrixXd>(xn).info() == Eigen::Success || back == 30) break;
        ap *= 0.8;
      }
      for (int back = 0;; ++back) {
        zn = z + ad * dz;
        symmetrize(zn);
        if (Eigen::LLT<MatrixXd>(zn).info() == Eigen::Success || back == 30) break;
        ad *= 0.8;
      }
      x = std::move(xn);
      y += ad * dy;
      z = std::move(zn);

      if (std::max(ap, ad) < 1e-9) {
        if (++stalled >= 3) {
          rep.message = "step length collapsed";
          return fail(rep, y);
        }
      } else {
        stalled = 0;
      }
    }
    rep.message = "iteration limit";
    return fail(rep, y);
  }

 private:
  void assemble_schur(const MatrixXd& x, const MatrixXd& zi, MatrixXd& g, MatrixXd& schur) const {
    const int n = d_.n;
    const auto m = static_cast<Index>(d_.f.size());
    for (Index v = 0; v < m; ++v) {
      const auto& fv = d_.f[static_cast<std::size_t>(v)];
      // G = Z^-1 F_v X;  G(d, c) = sum_(a,b) Zi(d, a) F(a, b) X(b, c).
      if (static_cast<int>(fv.size()) > n) {
        MatrixXd fx = MatrixXd::Zero(n, n);
        for (const auto& e : fv) fx.row(e.row) += e.value * x.row(e.col);
        g.noalias() = zi * fx;
      } else {
        g.setZero();
        for (const auto& e : fv) {
          const std::span<const double> zcol(zi.col(e.row).data(), static_cast<std::size_t>(n));
          for (int c = 0; c < n; ++c) {
            const double s = e.value * x(e.col, c);
            if (s != 0.0) simd::axpy(s, zcol, std::span<double>(g.col(c).data(), static_cast<std::size_t>(n)));
          }
        }
      }
      for (Index w = v; w < m; ++w) {
        double s = 0.0;
        for (const auto& e : d_.f[static_cast<std::size_t>(w)]) s += e.value * g(e.col, e.row);
        schur(v, w) = s;
        schur(w, v) = s;
      }
    }
  }

  void direction(const MatrixXd& k, const VectorXd& rp, const Eigen::LLT<MatrixXd>& mchol, const MatrixXd& x,
                 const MatrixXd& zi, const MatrixXd& rd, MatrixXd& dx, VectorXd& dy, MatrixXd& dz) const {
    const auto m = static_cast<Index>(d_.f.size());
    const MatrixXd ks = 0.5 * (k + k.transpose());
    VectorXd rhs(m);
    for (Index v = 0; v < m; ++v) rhs(v) = inner(d_.f[static_cast<std::size_t>(v)], ks) - rp(v);
    dy = mchol.solve(rhs);
    MatrixXd s = MatrixXd::Zero(d_.n, d_.n);
    for (Index v = 0; v < m; ++v) accumulate(d_.f[static_cast<std::size_t>(v)], dy(v), s);
    dz = rd + s;
    dx = k - x * s * zi;
    symmetrize(dx);
  }

  // Falls back to the last iterate that met the looser tolerances; flags
  // divergence of y for the caller's classification.
  SolveReport& fail(SolveReport& rep, const VectorXd& y) const {
    if (fallback_) {
      rep.message = "converged to reduced accuracy (" + rep.message + ")";
      rep.primal_residual = fallback_pinf_;
      rep.dual_residual = fallback_dinf_;
      return finish(rep, *fallback_, SolveStatus::Optimal);
    }
    if (y.norm() > kDivergence) rep.message = "dual iterate diverged";
    return finish(rep, y, SolveStatus::NumericalFailure);
  }

  SolveReport& finish(SolveReport& rep, const VectorXd& y, SolveStatus status) const {
    rep.status = status;
    rep.x.assign(static_cast<std::size_t>(d_.original_count), 0.0);
    for (Index v = 0; v < y.size(); ++v) rep.x[static_cast<std::size_t>(d_.original[static_cast<std::size_t>(v)])] = y(v);
    rep.value = d_.b.dot(y) + d_.offset;
    MatrixXd full = d_.c;
    for (Index v = 0; v < y.size(); ++v) accumulate(d_.f[static_cast<std::size_t>(v)], y(v), full);
    rep.matrix = std::move(full);
    return rep;
  }

  static constexpr double kFallbackTolerance = 1e-6;
  static constexpr double kDivergence = 1e8;

  const SdpData& d_;
  SdpOptions opt_;
  std::optional<VectorXd> fallback_;
  double fallback_pinf_ = 0.0;
  double fallback_dinf_ = 0.0;
};

double min_eigenvalue(const MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

}  // namespace

SolveReport sdp_feasibility_margin(const SemidefiniteProgram& problem, const SdpOptions& options) {
  const SdpData data = lower(problem, true);
  SolveReport rep = InteriorPoint(data, options).run();
  if (rep.status == SolveStatus::Optimal) {
    rep.value = rep.x.back();
    rep.x.pop_back();
    // rep.matrix holds M - tI; restore M.
    rep.matrix.diagonal().array() += rep.value;
  } else if (!rep.x.empty() && rep.x.back() > 1e6) {
    rep.status = SolveStatus::Unbounded;
    rep.value = kInfinity;
  }
  return rep;
}

SolveReport solve_sdp(const SemidefiniteProgram& problem, const SdpOptions& options) {
  const SdpData data = lower(problem, false);
  SolveReport rep = InteriorPoint(data, options).run();
  if (data.free_objective && rep.status == SolveStatus::Optimal) {
    rep.status = SolveStatus::Unbounded;
    rep.message = "objective weights a variable that occupies no entry";
    return rep;
  }
  if (rep.status == SolveStatus::Optimal) {
    const double lmin = min_eigenvalue(rep.matrix);
    if (lmin < -Tolerances::psd_eigenvalue) {
      rep.status = SolveStatus::NumericalFailure;
      rep.message = "completed matrix has eigenvalue " + std::to_string(lmin);
    }
    return rep;
  }
  // Classify the failure with the phase-one margin problem.
  const SolveReport margin = sdp_feasibility_margin(problem, options);
  if (margin.status == SolveStatus::Optimal && margin.value < -Tolerances::psd_eigenvalue) {
    rep.status = SolveStatus::Infeasible;
    rep.message = "no PSD completion (margin " + std::to_string(margin.value) + ")";
  } else if ((margin.status == SolveStatus::Optimal || margin.status == SolveStatus::Unbounded) &&
             rep.message == "dual iterate diverged") {
    rep.status = SolveStatus::Unbounded;
  }
  return rep;
}

}  // namespace detloop
