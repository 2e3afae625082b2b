#pragma once

// System data model for linear open quantum systems: quadratic Hamiltonian
// H = ½ xᵀ M x, Lindblad operators c = C x, and the drift/diffusion pair
//
//   A = Σ (M + Im(C†C)),    D = Σ Re(C†C) Σᵀ.
//
// Units: ħ = 1. Quadratures are ordered x = (q_1 … q_N, p_1 … p_N).

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "linqs/errors.hpp"
#include "linqs/linalg.hpp"

namespace linqs {

inline constexpr double kSymmetryTol = 1e-10;
inline constexpr double kRealResidueTol = 1e-12;
inline constexpr double kPsdTol = 1e-10;

/// Only block ordering (q…, p…) is accepted; interleaved ordering exists so
/// callers can state it and get a clear rejection instead of wrong physics.
enum class QuadratureOrdering { block, interleaved };

/// Σ = [[0, I_N], [−I_N, 0]].
class SymplecticForm {
 public:
  explicit SymplecticForm(Index n_modes) : n_modes_(n_modes) {
    if (n_modes < 1) throw DimensionError("symplectic form needs n_modes >= 1");
    matrix_ = MatrixXd::Zero(2 * n_modes, 2 * n_modes);
    matrix_.topRightCorner(n_modes, n_modes).setIdentity();
    matrix_.bottomLeftCorner(n_modes, n_modes) = -MatrixXd::Identity(n_modes, n_modes);
  }

  Index n_modes() const { return n_modes_; }
  Index dim() const { return 2 * n_modes_; }
  const MatrixXd& matrix() const { return matrix_; }
  double operator()(Index row, Index col) const { return matrix_(row, col); }

 private:
  Index n_modes_;
  MatrixXd matrix_;
};

inline SymplecticForm symplectic_form(Index n_modes) { return SymplecticForm(n_modes); }

/// Raw model data. May hold invalid input; run validate_model before use.
struct LinearOpenSystem {
  Index n_modes = 0;
  MatrixXd hamiltonian;  // M, 2N×2N real symmetric
  MatrixXcd coupling;    // C, K×2N complex

  Index dim() const { return 2 * n_modes; }
  Index n_channels() const { return coupling.rows(); }
};

struct DriftDiffusion {
  MatrixXd drift;      // A
  MatrixXd diffusion;  // D

  Index dim() const { return drift.rows(); }
};

struct ValidationCheck {
  std::string name;
  bool passed = true;
  std::string detail;
};

struct ValidationReport {
  std::vector<ValidationCheck> checks;

  bool ok() const {
    for (const auto& c : checks)
      if (!c.passed) return false;
    return true;
  }

  std::string failures() const {
    std::string out;
    for (const auto& c : checks) {
      if (c.passed) continue;
      if (!out.empty()) out += "; ";
      out += c.name + ": " + c.detail;
    }
    return out;
  }
};

inline ValidationReport validate_model(const LinearOpenSystem& system,
                                       double sym_tol = kSymmetryTol) {
  ValidationReport report;
  const Index dim = 2 * system.n_modes;
  auto add = [&](std::string name, bool passed, std::string detail) {
    report.checks.push_back({std::move(name), passed, std::move(detail)});
  };

  add("mode count", system.n_modes >= 1,
      system.n_modes >= 1 ? "" : "n_modes must be >= 1, got " + std::to_string(system.n_modes));

  const auto& m = system.hamiltonian;
  const bool square_ok = m.rows() == dim && m.cols() == dim;
  {
    std::ostringstream os;
    if (!square_ok)
      os << "dimension mismatch: Hamiltonian is " << m.rows() << "x" << m.cols()
         << ", expected " << dim << "x" << dim;
    add("hamiltonian shape", square_ok, os.str());
  }

  const bool m_finite = all_finite(m);
  add("hamiltonian finite", m_finite, m_finite ? "" : "Hamiltonian has non-finite entries");

  if (square_ok && m_finite && dim > 0) {
    double worst = 0.0;
    Index wi = 0, wj = 0;
    for (Index i = 0; i < dim; ++i)
      for (Index j = i + 1; j < dim; ++j) {
        const double gap = std::abs(m(i, j) - m(j, i));
        if (gap > worst) {
          worst = gap;
          wi = i;
          wj = j;
        }
      }
    std::ostringstream os;
    if (worst > sym_tol)
      os << "asymmetric Hamiltonian: |M(" << wi + 1 << "," << wj + 1 << ") - M(" << wj + 1
         << "," << wi + 1 << ")| = " << worst << " exceeds " << sym_tol;
    add("hamiltonian symmetry", worst <= sym_tol, os.str());
  }

  const auto& c = system.coupling;
  add("channel count", c.rows() >= 1,
      c.rows() >= 1 ? "" : "coupling needs at least one row (use a zero row for a closed system)");
  {
    std::ostringstream os;
    if (c.cols() != dim)
      os << "dimension mismatch: coupling has " << c.cols() << " columns, expected " << dim;
    add("coupling shape", c.cols() == dim, os.str());
  }
  const bool c_finite = all_finite(c.real()) && all_finite(c.imag());
  add("coupling finite", c_finite, c_finite ? "" : "coupling has non-finite entries");

  return report;
}

/// Returns a copy with M replaced by (M + Mᵀ)/2, or throws ValidationError.
inline LinearOpenSystem validated(const LinearOpenSystem& system,
                                  QuadratureOrdering ordering = QuadratureOrdering::block) {
  if (ordering != QuadratureOrdering::block)
    throw ValidationError(
        "interleaved quadrature ordering (q1,p1,...) is not supported; reorder to "
        "(q1..qN, p1..pN)");
  const auto report = validate_model(system);
  if (!report.ok()) throw ValidationError(report.failures());
  LinearOpenSystem out = system;
  out.hamiltonian = symmetrized(system.hamiltonian);
  return out;
}

namespace detail {

// Re(C†C) = (Z + Zᵀ)/2 and Im(C†C) = (Z − Zᵀ)/2i for the Hermitian Z = C†C,
// evaluated in complex arithmetic. Exact Hermiticity makes both real; the
// imaginary residue left by rounding must stay below kRealResidueTol (scaled
// by max(1, |Z|max)) before it is discarded.
struct GramParts {
  MatrixXd re;
  MatrixXd im;
  double residue = 0.0;
};

inline GramParts gram_parts(const MatrixXcd& coupling) {
  const MatrixXcd gram = coupling.adjoint() * coupling;
  const MatrixXcd re_c = (gram + gram.transpose()) * 0.5;
  const MatrixXcd im_c = (gram - gram.transpose()) / Complex(0.0, 2.0);
  GramParts parts{re_c.real(), im_c.real(),
                  std::max(max_abs(re_c.imag()), max_abs(im_c.imag()))};
  const double scale = std::max(1.0, max_abs(gram));
  if (parts.residue > kRealResidueTol * scale)
    throw ValidationError("imaginary residue " + std::to_string(parts.residue) +
                          " in Re/Im(C†C) exceeds tolerance; coupling is numerically inconsistent");
  return parts;
}

}  // namespace detail

inline MatrixXd build_drift(const LinearOpenSystem& input) {
  const auto system = validated(input);
  const SymplecticForm sigma(system.n_modes);
  const auto parts = detail::gram_parts(system.coupling);
  return sigma.matrix() * (system.hamiltonian + parts.im);
}

inline MatrixXd build_diffusion(const LinearOpenSystem& input) {
  const auto system = validated(input);
  const SymplecticForm sigma(system.n_modes);
  const auto parts = detail::gram_parts(system.coupling);
  MatrixXd d = sigma.matrix() * parts.re * sigma.matrix().transpose();
  return symmetrized(d);
}

inline DriftDiffusion build_drift_diffusion(const LinearOpenSystem& system) {
  return {build_drift(system), build_diffusion(system)};
}

}  // namespace linqs
