#pragma once

// First and second moment dynamics of a Gaussian state under
//
//   d<x>/dt = A <x>,    dV/dt = A V + V Aᵀ + D.
//
// Vacuum covariance is I/2 (ħ = 1, [q, p] = i).

#include <cmath>
#include <cstdint>
#include <cstring>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "linqs/core_model.hpp"
#include "linqs/errors.hpp"
#include "linqs/linalg.hpp"
#include "linqs/rk4.hpp"

namespace linqs {

inline constexpr double kHurwitzTol = 1e-10;
inline constexpr double kPhysTol = 1e-9;

/// Mean and covariance at one instant. The covariance is symmetrized on
/// construction, so V == Vᵀ holds bit-for-bit.
class GaussianMomentState {
 public:
  GaussianMomentState() = default;
  GaussianMomentState(double time, VectorXd mean, const MatrixXd& covariance)
      : time_(time), mean_(std::move(mean)) {
    if (covariance.rows() != mean_.size() || covariance.cols() != mean_.size())
      throw DimensionError("covariance must be square with the mean's dimension");
    if (mean_.size() % 2 != 0) throw DimensionError("moment dimension must be even (2N)");
    covariance_ = symmetrized(covariance);
  }

  static GaussianMomentState vacuum(Index n_modes, double time = 0.0) {
    return {time, VectorXd::Zero(2 * n_modes), 0.5 * MatrixXd::Identity(2 * n_modes, 2 * n_modes)};
  }

  double time() const { return time_; }
  const VectorXd& mean() const { return mean_; }
  const MatrixXd& covariance() const { return covariance_; }
  Index dim() const { return mean_.size(); }
  Index n_modes() const { return mean_.size() / 2; }

 private:
  double time_ = 0.0;
  VectorXd mean_;
  MatrixXd covariance_;
};

struct MomentDerivative {
  VectorXd mean;
  MatrixXd covariance;
};

/// Time-ordered samples plus provenance of how they were produced.
class Trajectory {
 public:
  std::string integrator;
  double step = 0.0;
  std::string fingerprint;
  Index dimension = 0;  // 2N; known even when there are no samples

  const std::vector<GaussianMomentState>& samples() const { return samples_; }
  std::size_t size() const { return samples_.size(); }
  bool empty() const { return samples_.empty(); }
  const GaussianMomentState& operator[](std::size_t i) const { return samples_[i]; }
  const GaussianMomentState& back() const { return samples_.back(); }

  void push_back(GaussianMomentState s) {
    if (!samples_.empty()) {
      if (s.dim() != samples_.front().dim())
        throw DimensionError("trajectory samples must share one dimension");
      if (!(s.time() > samples_.back().time()))
        throw Error("trajectory times must be strictly increasing");
    }
    if (dimension == 0) dimension = s.dim();
    if (s.dim() != dimension) throw DimensionError("sample dimension differs from trajectory");
    samples_.push_back(std::move(s));
  }

 private:
  std::vector<GaussianMomentState> samples_;
};

/// Hex FNV-1a digest of the drift and diffusion matrices.
inline std::string fingerprint(const DriftDiffusion& ad) {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](const void* data, std::size_t n) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= bytes[i];
      h *= 1099511628211ULL;
    }
  };
  const auto dim = static_cast<std::int64_t>(ad.dim());
  mix(&dim, sizeof dim);
  for (const MatrixXd* m : {&ad.drift, &ad.diffusion})
    for (Index i = 0; i < m->size(); ++i) {
      const double v = canonical_zero(m->data()[i]);
      mix(&v, sizeof v);
    }
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << h;
  return os.str();
}

namespace detail {

inline void check_dims(const DriftDiffusion& ad, Index dim) {
  if (ad.drift.rows() != ad.drift.cols() || ad.diffusion.rows() != ad.diffusion.cols() ||
      ad.drift.rows() != ad.diffusion.rows())
    throw DimensionError("drift and diffusion must be square and of equal size");
  if (ad.drift.rows() != dim)
    throw DimensionError("drift is " + std::to_string(ad.drift.rows()) +
                         "-dimensional but the state is " + std::to_string(dim) + "-dimensional");
}

// (mean, V) packed for the generic RK4 step.
struct Moments {
  VectorXd mean;
  MatrixXd cov;
};

inline Moments operator+(const Moments& a, const Moments& b) {
  return {a.mean + b.mean, a.cov + b.cov};
}
inline Moments operator-(const Moments& a, const Moments& b) {
  return {a.mean - b.mean, a.cov - b.cov};
}
inline Moments operator*(double s, const Moments& a) { return {s * a.mean, s * a.cov}; }

}  // namespace detail

inline MomentDerivative moment_rhs(const DriftDiffusion& ad, const GaussianMomentState& state) {
  detail::check_dims(ad, state.dim());
  const MatrixXd& a = ad.drift;
  const MatrixXd av = a * state.covariance();
  return {a * state.mean(), symmetrized(MatrixXd(av + av.transpose() + ad.diffusion))};
}

/// Fixed-step RK4 on the coupled (mean, V) system. Records the initial state,
/// every `sample_every`-th step, and the final state at exactly t_final.
inline Trajectory integrate(const DriftDiffusion& ad, const GaussianMomentState& initial,
                            double t_final, double dt, std::size_t sample_every = 1) {
  detail::check_dims(ad, initial.dim());
  if (sample_every == 0) throw Error("sample_every must be positive");
  const TimeGrid grid(initial.time(), t_final, dt);

  const MatrixXd& a = ad.drift;
  const MatrixXd& d = ad.diffusion;
  auto rhs = [&](double, const detail::Moments& y) {
    const MatrixXd av = a * y.cov;
    return detail::Moments{a * y.mean, av + av.transpose() + d};
  };

  Trajectory traj;
  traj.integrator = "rk4";
  traj.step = dt;
  traj.fingerprint = fingerprint(ad);
  traj.push_back(initial);

  // Kahan-compensated accumulation of the step increments: over 10^4+ steps
  // plain summation leaves ~1e-15 of rounding noise, which would otherwise
  // swamp the O(dt^4) truncation error at small dt.
  detail::Moments y{initial.mean(), initial.covariance()};
  detail::Moments carry{VectorXd::Zero(y.mean.size()), MatrixXd::Zero(y.cov.rows(), y.cov.cols())};
  for (std::size_t k = 0; k < grid.steps(); ++k) {
    const double t = grid.time(k);
    const double h = grid.time(k + 1) - t;
    const detail::Moments inc = rk4_increment(rhs, t, y, h) - carry;
    detail::Moments next = y + inc;
    carry = (next - y) - inc;
    next.cov = symmetrized(next.cov);
    y = std::move(next);
    if (!y.mean.allFinite() || !y.cov.allFinite()) {
      std::ostringstream os;
      os << "non-finite moments at t = " << grid.time(k + 1) << "; try a smaller dt (<= "
         << 0.1 / std::max(1.0, spectral_norm(a)) << ")";
      throw IntegrationError(os.str());
    }
    if (grid.is_sample(k + 1, sample_every))
      traj.push_back(GaussianMomentState(grid.time(k + 1), y.mean, y.cov));
  }
  return traj;
}

/// exp(A t) · mean0: exact solution of the mean equation.
inline VectorXd mean_closed_form(const DriftDiffusion& ad, const VectorXd& mean0, double t) {
  detail::check_dims(ad, mean0.size());
  if (!(t >= 0.0)) throw Error("mean_closed_form requires t >= 0");
  if (t == 0.0) return mean0;
  return expm(MatrixXd(ad.drift * t)) * mean0;
}

inline VectorXcd drift_eigenvalues(const DriftDiffusion& ad) {
  if (ad.dim() == 0) return {};
  Eigen::EigenSolver<MatrixXd> es(ad.drift, false);
  return es.eigenvalues();
}

inline bool is_hurwitz(const VectorXcd& eigenvalues, double tol = kHurwitzTol) {
  for (Index i = 0; i < eigenvalues.size(); ++i)
    if (!(eigenvalues(i).real() < -tol)) return false;
  return true;
}

struct SteadyState {
  std::optional<MatrixXd> covariance;  // empty when A is not Hurwitz
  double residual = 0.0;               // ‖A V + V Aᵀ + D‖_max
  VectorXcd drift_eigenvalues;

  bool stable() const { return covariance.has_value(); }
};

/// Solves A V + V Aᵀ + D = 0 by the Kronecker form
/// (I ⊗ A + A ⊗ I) vec(V) = −vec(D), provided A is Hurwitz.
inline SteadyState steady_state(const DriftDiffusion& ad) {
  detail::check_dims(ad, ad.drift.rows());
  SteadyState out;
  out.drift_eigenvalues = drift_eigenvalues(ad);
  if (!is_hurwitz(out.drift_eigenvalues)) return out;

  const Index n = ad.dim();
  const MatrixXd id = MatrixXd::Identity(n, n);
  const MatrixXd op = kron(id, ad.drift) + kron(ad.drift, id);
  const VectorXd rhs = -Eigen::Map<const VectorXd>(ad.diffusion.data(), n * n);
  const VectorXd sol = op.fullPivLu().solve(rhs);
  MatrixXd v = symmetrized(MatrixXd(Eigen::Map<const MatrixXd>(sol.data(), n, n)));
  out.residual = max_abs(ad.drift * v + v * ad.drift.transpose() + ad.diffusion);
  out.covariance = std::move(v);
  return out;
}

/// Gaussian purity tr(ρ²) = 1 / (2^N √det V).
inline double purity(const GaussianMomentState& state) {
  const double det = state.covariance().determinant();
  if (!(det > 0.0))
    throw PhysicsError("purity needs det V > 0 (got " + std::to_string(det) + ")");
  return 1.0 / (std::ldexp(1.0, static_cast<int>(state.n_modes())) * std::sqrt(det));
}

struct PhysicalityCheck {
  bool physical = false;
  double min_eigenvalue = 0.0;
};

/// Uncertainty relation V + (i/2)Σ ⪰ 0, up to kPhysTol.
inline PhysicalityCheck check_physical(const GaussianMomentState& state,
                                       const SymplecticForm& sigma, double tol = kPhysTol) {
  if (sigma.dim() != state.dim())
    throw DimensionError("symplectic form and state dimensions differ");
  const MatrixXcd herm =
      state.covariance().cast<Complex>() + Complex(0.0, 0.5) * sigma.matrix().cast<Complex>();
  const double lo = min_hermitian_eigenvalue(herm);
  return {lo >= -tol, lo};
}

/// Step-size hint for RK4: 0.1 / max(1, ‖A‖₂).
inline double suggested_dt(const DriftDiffusion& ad) {
  return 0.1 / std::max(1.0, spectral_norm(ad.drift));
}

}  // namespace linqs
