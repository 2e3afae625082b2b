#pragma once

// Small dense linear-algebra helpers shared by the moment and Fock engines.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>

#include "linqs/errors.hpp"

namespace linqs {

using Complex = std::complex<double>;
using Eigen::Index;
using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

/// Largest absolute entry; 0 for an empty matrix.
template <typename Derived>
double max_abs(const Eigen::MatrixBase<Derived>& m) {
  if (m.size() == 0) return 0.0;
  return m.cwiseAbs().maxCoeff();
}

template <typename Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& m) {
  return m.allFinite();
}

template <typename Derived>
typename Derived::PlainObject symmetrized(const Eigen::MatrixBase<Derived>& m) {
  return ((m + m.transpose()) * 0.5).eval();
}

template <typename Derived>
typename Derived::PlainObject hermitized(const Eigen::MatrixBase<Derived>& m) {
  return ((m + m.adjoint()) * 0.5).eval();
}

/// Kronecker product a ⊗ b.
template <typename DA, typename DB>
Eigen::Matrix<typename DA::Scalar, Eigen::Dynamic, Eigen::Dynamic> kron(
    const Eigen::MatrixBase<DA>& a, const Eigen::MatrixBase<DB>& b) {
  Eigen::Matrix<typename DA::Scalar, Eigen::Dynamic, Eigen::Dynamic> out(
      a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

/// Matrix exponential by scaling and squaring around a diagonal [6/6] Padé
/// approximant. The argument is scaled until its 1-norm is at most 1/2, where
/// the truncation error of the approximant is below 1e-16 relative.
template <typename Derived>
typename Derived::PlainObject expm(const Eigen::MatrixBase<Derived>& a) {
  using Plain = typename Derived::PlainObject;
  if (a.rows() != a.cols()) throw DimensionError("expm: matrix must be square");
  const Index n = a.rows();
  if (n == 0) return Plain(0, 0);

  const double norm1 = a.cwiseAbs().colwise().sum().maxCoeff();
  if (!std::isfinite(norm1)) throw Error("expm: non-finite input");
  int squarings = 0;
  if (norm1 > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm1 / 0.5)));
  const Plain x = a / std::ldexp(1.0, squarings);

  // c_k = (2m-k)! m! / ((2m)! k! (m-k)!) for m = 6.
  constexpr double c[7] = {1.0,
                           1.0 / 2.0,
                           5.0 / 44.0,
                           1.0 / 66.0,
                           1.0 / 792.0,
                           1.0 / 15840.0,
                           1.0 / 665280.0};
  const Plain id = Plain::Identity(n, n);
  const Plain x2 = x * x;
  const Plain x4 = x2 * x2;
  const Plain x6 = x4 * x2;
  const Plain even = c[0] * id + c[2] * x2 + c[4] * x4 + c[6] * x6;
  const Plain odd = x * (c[1] * id + c[3] * x2 + c[5] * x4);
  Plain result = (even - odd).partialPivLu().solve(even + odd);
  for (int i = 0; i < squarings; ++i) result = (result * result).eval();
  return result;
}

/// Largest singular value.
inline double spectral_norm(const MatrixXd& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<MatrixXd> svd(m);
  return svd.singularValues()(0);
}

/// Smallest eigenvalue of a Hermitian matrix (only the lower triangle is read).
template <typename Derived>
double min_hermitian_eigenvalue(const Eigen::MatrixBase<Derived>& m) {
  Eigen::SelfAdjointEigenSolver<typename Derived::PlainObject> es(
      m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

template <typename DA, typename DB>
typename DA::PlainObject commutator(const Eigen::MatrixBase<DA>& a,
                                    const Eigen::MatrixBase<DB>& b) {
  return (a * b - b * a).eval();
}

/// Maps -0.0 to +0.0 so printed output does not depend on sign-of-zero noise.
inline double canonical_zero(double v) { return v == 0.0 ? 0.0 : v; }

}  // namespace linqs
