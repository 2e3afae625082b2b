#pragma once

// Brute-force reference: the same linear open system written out in a
// truncated Fock basis, with the Lindblad master equation
//
//   dρ/dt = −i[H, ρ] + Σ_j ( c_j ρ c_j† − ½{c_j† c_j, ρ} )
//
// integrated directly on the density matrix. Quadratures use
// q = (a + a†)/√2, p = (a − a†)/(i√2), so [q, p] = i away from the top level.
// Multi-mode states are ordered with mode 0 as the most significant index.

#include <Eigen/SparseCore>

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "linqs/core_model.hpp"
#include "linqs/errors.hpp"
#include "linqs/linalg.hpp"
#include "linqs/moment_dynamics.hpp"
#include "linqs/rk4.hpp"

namespace linqs {

inline constexpr Index kMaxOracleModes = 2;
inline constexpr Index kMaxCutoff = 40;
inline constexpr Index kTailLevels = 3;
inline constexpr double kTailThreshold = 1e-8;
inline constexpr double kTraceDriftTol = 1e-6;

struct FockRig {
  Index n_modes = 0;
  Index cutoff = 0;
  std::vector<MatrixXcd> quadratures;  // (q_1 … q_N, p_1 … p_N)
  MatrixXcd hamiltonian_op;
  std::vector<MatrixXcd> lindblad_ops;
  // −iH − ½ Σ c_j† c_j, cached for the master-equation right-hand side.
  MatrixXcd effective;

  // Sparse copies used by lindblad_rhs; the ladder structure keeps them banded.
  using Sparse = Eigen::SparseMatrix<Complex>;
  Sparse effective_sparse;
  Sparse effective_adjoint_sparse;
  std::vector<Sparse> lindblad_sparse;
  std::vector<Sparse> lindblad_adjoint_sparse;

  Index hilbert_dim() const { return hamiltonian_op.rows(); }
};

struct DensityMatrix {
  MatrixXcd matrix;
  double time = 0.0;
  Index n_modes = 1;
  Index cutoff = 0;
};

inline MatrixXcd annihilation(Index cutoff) {
  if (cutoff < 2) throw DimensionError("annihilation operator needs cutoff >= 2");
  MatrixXcd a = MatrixXcd::Zero(cutoff, cutoff);
  for (Index n = 1; n < cutoff; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  return a;
}

/// Embeds a single-mode operator acting on `mode` into the N-mode space.
inline MatrixXcd lift(const MatrixXcd& op, Index mode, Index n_modes) {
  const Index d = op.rows();
  MatrixXcd out = MatrixXcd::Identity(1, 1);
  for (Index k = 0; k < n_modes; ++k)
    out = kron(out, k == mode ? op : MatrixXcd::Identity(d, d));
  return out;
}

namespace detail {

// tr(X Y) in O(d²).
inline Complex trace_product(const MatrixXcd& x, const MatrixXcd& y) {
  return x.transpose().cwiseProduct(y).sum();
}

// Single-mode (q, p) at dimension d.
inline std::pair<MatrixXcd, MatrixXcd> single_mode_quadratures(Index d) {
  const MatrixXcd a = annihilation(d);
  const MatrixXcd ad = a.adjoint();
  const double r = 1.0 / std::sqrt(2.0);
  return {r * (a + ad), Complex(0.0, -r) * (a - ad)};
}

inline MatrixXcd quadratic_form(const std::vector<MatrixXcd>& x, const MatrixXd& m) {
  const Index dim = x.front().rows();
  MatrixXcd h = MatrixXcd::Zero(dim, dim);
  for (std::size_t j = 0; j < x.size(); ++j)
    for (std::size_t k = 0; k < x.size(); ++k) {
      const double mjk = m(static_cast<Index>(j), static_cast<Index>(k));
      if (mjk != 0.0) h += (0.5 * mjk) * (x[j] * x[k]);
    }
  return hermitized(h);
}

}  // namespace detail

inline FockRig build_rig(const LinearOpenSystem& input, Index cutoff) {
  const auto system = validated(input);
  if (system.n_modes > kMaxOracleModes)
    throw DimensionError("Fock oracle supports at most " + std::to_string(kMaxOracleModes) +
                         " modes, got " + std::to_string(system.n_modes));
  if (cutoff < 2 || cutoff > kMaxCutoff)
    throw DimensionError("cutoff must lie in [2, " + std::to_string(kMaxCutoff) + "], got " +
                         std::to_string(cutoff));

  FockRig rig;
  rig.n_modes = system.n_modes;
  rig.cutoff = cutoff;
  const auto [q, p] = detail::single_mode_quadratures(cutoff);
  for (Index k = 0; k < system.n_modes; ++k) rig.quadratures.push_back(lift(q, k, system.n_modes));
  for (Index k = 0; k < system.n_modes; ++k) rig.quadratures.push_back(lift(p, k, system.n_modes));

  rig.hamiltonian_op = detail::quadratic_form(rig.quadratures, system.hamiltonian);
  const Index dim = rig.hamiltonian_op.rows();

  MatrixXcd decay = MatrixXcd::Zero(dim, dim);
  for (Index j = 0; j < system.n_channels(); ++j) {
    MatrixXcd c = MatrixXcd::Zero(dim, dim);
    for (Index k = 0; k < system.dim(); ++k)
      if (system.coupling(j, k) != Complex(0.0))
        c += system.coupling(j, k) * rig.quadratures[static_cast<std::size_t>(k)];
    decay += c.adjoint() * c;
    rig.lindblad_ops.push_back(std::move(c));
  }
  rig.effective = Complex(0.0, -1.0) * rig.hamiltonian_op - 0.5 * decay;

  auto sparse = [](const MatrixXcd& m) -> FockRig::Sparse { return m.sparseView(); };
  rig.effective_sparse = sparse(rig.effective);
  rig.effective_adjoint_sparse = sparse(rig.effective.adjoint());
  for (const auto& c : rig.lindblad_ops) {
    rig.lindblad_sparse.push_back(sparse(c));
    rig.lindblad_adjoint_sparse.push_back(sparse(c.adjoint()));
  }
  return rig;
}

inline MatrixXcd lindblad_rhs(const FockRig& rig, const MatrixXcd& rho) {
  if (rho.rows() != rig.hilbert_dim() || rho.cols() != rig.hilbert_dim())
    throw DimensionError("density matrix is " + std::to_string(rho.rows()) + "x" +
                         std::to_string(rho.cols()) + ", rig expects " +
                         std::to_string(rig.hilbert_dim()));
  MatrixXcd out = rig.effective_sparse * rho;
  out += rho * rig.effective_adjoint_sparse;
  for (std::size_t j = 0; j < rig.lindblad_sparse.size(); ++j) {
    const MatrixXcd c_rho = rig.lindblad_sparse[j] * rho;
    out += c_rho * rig.lindblad_adjoint_sparse[j];
  }
  return out;
}

inline MatrixXcd lindblad_rhs(const FockRig& rig, const DensityMatrix& rho) {
  return lindblad_rhs(rig, rho.matrix);
}

/// Empty string when ρ is a valid density matrix; otherwise what is wrong.
inline std::string density_violations(const MatrixXcd& rho) {
  std::ostringstream os;
  if (rho.rows() != rho.cols() || rho.rows() == 0) {
    os << "density matrix must be non-empty and square";
    return os.str();
  }
  if (!rho.allFinite()) return "density matrix has non-finite entries";
  const double herm = max_abs(rho - rho.adjoint());
  if (herm > 1e-10) os << "not Hermitian (residue " << herm << "); ";
  const double tr_err = std::abs(rho.trace() - Complex(1.0));
  if (tr_err > 1e-8) os << "trace differs from 1 by " << tr_err << "; ";
  const double lo = min_hermitian_eigenvalue(hermitized(rho));
  if (lo < -1e-8) os << "negative eigenvalue " << lo << "; ";
  return os.str();
}

/// RK4 on ρ with re-Hermitization and trace renormalization after each step.
/// Samples follow the same grid as moment integration.
inline std::vector<DensityMatrix> integrate_master(const FockRig& rig, const DensityMatrix& rho0,
                                                   double t_final, double dt,
                                                   std::size_t sample_every = 1) {
  if (rho0.matrix.rows() != rig.hilbert_dim())
    throw DimensionError("initial density matrix does not match the rig dimension");
  if (const auto bad = density_violations(rho0.matrix); !bad.empty())
    throw PhysicsError("invalid initial density matrix: " + bad);
  if (sample_every == 0) throw Error("sample_every must be positive");
  const TimeGrid grid(rho0.time, t_final, dt);

  auto rhs = [&rig](double, const MatrixXcd& rho) { return lindblad_rhs(rig, rho); };
  std::vector<DensityMatrix> out;
  out.push_back(rho0);
  MatrixXcd rho = rho0.matrix;
  for (std::size_t k = 0; k < grid.steps(); ++k) {
    const double t = grid.time(k);
    rho = rk4_step(rhs, t, rho, grid.time(k + 1) - t);
    if (!rho.allFinite()) {
      std::ostringstream os;
      os << "non-finite density matrix at t = " << grid.time(k + 1) << "; reduce dt";
      throw IntegrationError(os.str());
    }
    const Complex tr = rho.trace();
    if (std::abs(tr - Complex(1.0)) > kTraceDriftTol) {
      std::ostringstream os;
      os << "trace drifted to " << tr.real() << " at t = " << grid.time(k + 1)
         << "; reduce dt or raise the cutoff";
      throw IntegrationError(os.str());
    }
    rho = hermitized(rho);
    rho /= rho.trace().real();
    if (grid.is_sample(k + 1, sample_every))
      out.push_back({rho, grid.time(k + 1), rho0.n_modes, rho0.cutoff});
  }
  return out;
}

inline GaussianMomentState moments_from_density(const FockRig& rig, const DensityMatrix& rho) {
  if (rho.matrix.rows() != rig.hilbert_dim())
    throw DimensionError("density matrix does not match the rig dimension");
  const auto dim = static_cast<Index>(rig.quadratures.size());
  constexpr double residue_tol = 1e-8;
  auto real_checked = [&](Complex z, const char* what) {
    if (std::abs(z.imag()) > residue_tol) {
      std::ostringstream os;
      os << what << " has imaginary residue " << z.imag() << "; density matrix is not Hermitian";
      throw PhysicsError(os.str());
    }
    return z.real();
  };

  VectorXd mean(dim);
  for (Index l = 0; l < dim; ++l)
    mean(l) = real_checked(detail::trace_product(rig.quadratures[l], rho.matrix), "mean");

  // ½ tr((x_l x_m + x_m x_l) ρ) = ½ (tr(x_l Y_m) + tr(x_m Y_l)) with Y_k = x_k ρ.
  std::vector<MatrixXcd> applied;
  applied.reserve(static_cast<std::size_t>(dim));
  for (const auto& x : rig.quadratures) applied.push_back(x * rho.matrix);
  MatrixXd cov(dim, dim);
  for (Index l = 0; l < dim; ++l)
    for (Index m = l; m < dim; ++m) {
      const Complex second = 0.5 * (detail::trace_product(rig.quadratures[l], applied[m]) +
                                    detail::trace_product(rig.quadratures[m], applied[l]));
      cov(l, m) = cov(m, l) = real_checked(second, "second moment") - mean(l) * mean(m);
    }
  return GaussianMomentState(rho.time, std::move(mean), cov);
}

/// Largest, over modes, of the marginal population in the top `tail_levels`
/// Fock levels of that mode.
inline double cutoff_adequacy(const DensityMatrix& rho, Index tail_levels) {
  const Index d = rho.cutoff;
  if (tail_levels < 1 || tail_levels >= d)
    throw DimensionError("tail_levels must lie in [1, cutoff)");
  Index dim = 1;
  for (Index k = 0; k < rho.n_modes; ++k) dim *= d;
  if (rho.matrix.rows() != dim) throw DimensionError("density matrix does not match cutoff");

  double worst = 0.0;
  for (Index mode = 0; mode < rho.n_modes; ++mode) {
    Index stride = 1;
    for (Index k = mode + 1; k < rho.n_modes; ++k) stride *= d;
    double tail = 0.0;
    for (Index i = 0; i < dim; ++i) {
      const Index level = (i / stride) % d;
      if (level >= d - tail_levels) tail += rho.matrix(i, i).real();
    }
    worst = std::max(worst, tail);
  }
  return worst;
}

inline double purity_exact(const DensityMatrix& rho) {
  return detail::trace_product(rho.matrix, rho.matrix).real();
}

/// Re tr((x_l − <x_l>)³ ρ). For a single quadrature the Weyl-symmetrized
/// product is the plain cube.
inline double third_central_moment(const FockRig& rig, const DensityMatrix& rho, Index index) {
  const auto& x = rig.quadratures.at(static_cast<std::size_t>(index));
  const double mu = detail::trace_product(x, rho.matrix).real();
  const MatrixXcd dx = x - mu * MatrixXcd::Identity(x.rows(), x.cols());
  return detail::trace_product(MatrixXcd(dx * dx * dx), rho.matrix).real();
}

// ---------------------------------------------------------------------------
// Initial states. Single-mode builders return d×d matrices; states that need
// an operator exponential are prepared in a padded space and then truncated
// and renormalized, so the boundary level does not distort them.

namespace detail {

inline Index padded_dim(Index cutoff) { return cutoff + std::max<Index>(cutoff, 20); }

inline MatrixXcd truncate_normalized(const MatrixXcd& rho, Index cutoff) {
  MatrixXcd out = hermitized(MatrixXcd(rho.topLeftCorner(cutoff, cutoff)));
  const double tr = out.trace().real();
  if (!(tr > 0.0)) throw CutoffError("state has no weight below the cutoff");
  return out / tr;
}

inline MatrixXcd thermal_diag(Index d, double nbar) {
  MatrixXcd rho = MatrixXcd::Zero(d, d);
  if (nbar <= 0.0) {
    rho(0, 0) = 1.0;
    return rho;
  }
  const double ratio = nbar / (1.0 + nbar);
  double w = 1.0, total = 0.0;
  for (Index n = 0; n < d; ++n, w *= ratio) {
    rho(n, n) = w;
    total += w;
  }
  return rho / total;
}

inline MatrixXcd displacement(Index d, Complex alpha) {
  const MatrixXcd a = annihilation(d);
  return expm(MatrixXcd(alpha * a.adjoint() - std::conj(alpha) * a));
}

}  // namespace detail

inline MatrixXcd fock_state(Index cutoff, Index n) {
  if (n < 0 || n >= cutoff) throw CutoffError("Fock level must lie below the cutoff");
  MatrixXcd rho = MatrixXcd::Zero(cutoff, cutoff);
  rho(n, n) = 1.0;
  return rho;
}

inline MatrixXcd vacuum_state(Index cutoff) { return fock_state(cutoff, 0); }

/// Boltzmann-weighted diagonal with mean occupation nbar (before truncation).
inline MatrixXcd thermal_state(Index cutoff, double nbar) {
  if (nbar < 0.0) throw PhysicsError("thermal occupation must be non-negative");
  return detail::thermal_diag(cutoff, nbar);
}

/// |α⟩⟨α| with |α⟩ = exp(α a† − α* a)|0⟩.
inline MatrixXcd coherent_state(Index cutoff, Complex alpha) {
  const Index w = detail::padded_dim(cutoff);
  const VectorXcd psi = detail::displacement(w, alpha).col(0);
  return detail::truncate_normalized(MatrixXcd(psi * psi.adjoint()), cutoff);
}

/// Single-mode Gaussian state with the given mean (q, p) and 2×2 covariance:
/// a displaced, squeezed and rotated thermal state. With ν = √det V and the
/// positive symplectic P = (V/ν)^{1/2}, the unitary exp(−i ½ xᵀ H x) with
/// H = −Σ log P maps x to P x, taking the thermal covariance ν·I to V.
inline MatrixXcd gaussian_state(Index cutoff, const Eigen::Vector2d& mean,
                                const Eigen::Matrix2d& covariance) {
  const Eigen::Matrix2d v = symmetrized(covariance);
  const double det = v.determinant();
  if (!(det > 0.0) || v(0, 0) <= 0.0)
    throw PhysicsError("Gaussian covariance must be positive definite");
  const double nu = std::sqrt(det);
  if (nu < 0.5 - kPhysTol)
    throw PhysicsError("covariance violates the uncertainty relation (sqrt det V < 1/2)");

  const Index w = detail::padded_dim(cutoff);
  MatrixXcd rho = detail::thermal_diag(w, std::max(0.0, nu - 0.5));

  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(v / nu);
  const Eigen::Matrix2d log_p = 0.5 * es.eigenvectors() *
                                es.eigenvalues().array().log().matrix().asDiagonal() *
                                es.eigenvectors().transpose();
  const SymplecticForm sigma(1);
  const Eigen::Matrix2d h = -sigma.matrix() * log_p;
  if (max_abs(h) > 0.0) {
    const auto [q, p] = detail::single_mode_quadratures(w);
    const MatrixXcd gen = detail::quadratic_form({q, p}, symmetrized(h));
    const MatrixXcd u = expm(MatrixXcd(Complex(0.0, -1.0) * gen));
    rho = u * rho * u.adjoint();
  }
  const Complex alpha(mean(0) / std::sqrt(2.0), mean(1) / std::sqrt(2.0));
  if (alpha != Complex(0.0)) {
    const MatrixXcd disp = detail::displacement(w, alpha);
    rho = disp * rho * disp.adjoint();
  }
  return detail::truncate_normalized(rho, cutoff);
}

/// ρ_1 ⊗ … ⊗ ρ_N from single-mode states.
inline DensityMatrix product_state(const FockRig& rig, const std::vector<MatrixXcd>& modes,
                                   double time = 0.0) {
  if (static_cast<Index>(modes.size()) != rig.n_modes)
    throw DimensionError("need one single-mode state per mode");
  MatrixXcd rho = MatrixXcd::Identity(1, 1);
  for (const auto& m : modes) {
    if (m.rows() != rig.cutoff || m.cols() != rig.cutoff)
      throw DimensionError("single-mode state does not match the cutoff");
    rho = kron(rho, m);
  }
  return {rho, time, rig.n_modes, rig.cutoff};
}

/// Density matrix for a Gaussian moment state. Two-mode states must be
/// mode-separable (no q/p correlations between the modes).
inline DensityMatrix gaussian_density(const FockRig& rig, const GaussianMomentState& state) {
  const Index n = rig.n_modes;
  if (state.n_modes() != n) throw DimensionError("state and rig mode counts differ");
  const MatrixXd& v = state.covariance();
  for (Index i = 0; i < 2 * n; ++i)
    for (Index j = 0; j < 2 * n; ++j)
      if (i % n != j % n && v(i, j) != 0.0)
        throw ValidationError(
            "Fock oracle needs a mode-separable initial covariance (no inter-mode correlations)");
  std::vector<MatrixXcd> modes;
  for (Index k = 0; k < n; ++k) {
    const Eigen::Vector2d mean(state.mean()(k), state.mean()(n + k));
    Eigen::Matrix2d cov;
    cov << v(k, k), v(k, n + k), v(n + k, k), v(n + k, n + k);
    modes.push_back(gaussian_state(rig.cutoff, mean, cov));
  }
  return product_state(rig, modes, state.time());
}

}  // namespace linqs
