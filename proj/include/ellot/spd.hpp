#pragma once

// Symmetric positive (semi)definite matrix algebra: validated storage,
// eigendecomposition, square roots, the Monge matrix B (B A A B)^{-1/2} B,
// and the trace functionals used by the distance formulas.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "ellot/errors.hpp"

namespace ellot {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// A validated symmetric positive semidefinite matrix.
///
/// Construction symmetrizes inputs whose relative asymmetry is below 1e-12
/// and rejects anything else. Positive semidefiniteness is checked against
/// the rank tolerance dim * eps * lambda_max.
class SpdMatrix {
 public:
  static constexpr double kSymmetryTolerance = 1e-12;

  SpdMatrix() = default;

  explicit SpdMatrix(const Matrix& entries) : entries_(symmetrized(entries)) {
    const Eigen::SelfAdjointEigenSolver<Matrix> eig(entries_, Eigen::EigenvaluesOnly);
    const double lmax = std::max(eig.eigenvalues().maxCoeff(), 0.0);
    const double lmin = eig.eigenvalues().minCoeff();
    if (lmin < -rank_tolerance(dim(), lmax)) {
      throw NotPsdError("matrix has a negative eigenvalue " + std::to_string(lmin));
    }
  }

  static SpdMatrix identity(int dim) { return SpdMatrix(Matrix::Identity(dim, dim)); }

  static SpdMatrix diagonal(const Vector& diag) {
    return SpdMatrix(Matrix(diag.asDiagonal()));
  }

  int dim() const { return static_cast<int>(entries_.rows()); }
  const Matrix& matrix() const { return entries_; }
  double operator()(int i, int j) const { return entries_(i, j); }

  /// dim * machine-epsilon * lambda_max.
  static double rank_tolerance(int dim, double lambda_max) {
    return dim * std::numeric_limits<double>::epsilon() * lambda_max;
  }

 private:
  static Matrix symmetrized(const Matrix& m) {
    if (m.rows() != m.cols() || m.rows() == 0) {
      throw DimensionMismatch("SpdMatrix requires a non-empty square matrix");
    }
    if (!m.allFinite()) throw DomainError("SpdMatrix entries must be finite");
    const double scale = std::max(m.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
    const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
    if (asym > kSymmetryTolerance * scale) {
      throw SymmetryError("matrix is not symmetric (relative asymmetry " +
                          std::to_string(asym / scale) + ")");
    }
    return 0.5 * (m + m.transpose());
  }

  Matrix entries_;
};

struct SymmetricEigen {
  Vector values;   // descending
  Matrix vectors;  // orthonormal columns matching `values`
};

inline SymmetricEigen sym_eig(const SpdMatrix& s) {
  const Eigen::SelfAdjointEigenSolver<Matrix> eig(s.matrix());
  if (eig.info() != Eigen::Success) throw NumericalError("eigendecomposition failed");
  const int n = s.dim();
  SymmetricEigen out{Vector(n), Matrix(n, n)};
  // Eigen returns ascending order.
  for (int i = 0; i < n; ++i) {
    out.values(i) = eig.eigenvalues()(n - 1 - i);
    out.vectors.col(i) = eig.eigenvectors().col(n - 1 - i);
  }
  return out;
}

namespace detail {

template <typename Fn>
Matrix spectral_apply(const SymmetricEigen& e, Fn fn) {
  Vector mapped(e.values.size());
  for (Eigen::Index i = 0; i < e.values.size(); ++i) mapped(i) = fn(e.values(i));
  Matrix out = e.vectors * mapped.asDiagonal() * e.vectors.transpose();
  return 0.5 * (out + out.transpose());
}

inline void require_same_dim(const SpdMatrix& a, const SpdMatrix& b, const char* what) {
  if (a.dim() != b.dim()) {
    throw DimensionMismatch(std::string(what) + ": dimension mismatch (" +
                            std::to_string(a.dim()) + " vs " + std::to_string(b.dim()) + ")");
  }
}

}  // namespace detail

/// Principal square root. Eigenvalues within the rank tolerance of zero are
/// clamped to zero.
inline SpdMatrix spd_sqrt(const SpdMatrix& s) {
  const auto e = sym_eig(s);
  const double tol = SpdMatrix::rank_tolerance(s.dim(), std::max(e.values(0), 0.0));
  return SpdMatrix(detail::spectral_apply(e, [tol](double l) {
    if (l < -tol) throw NotPsdError("spd_sqrt: matrix is not positive semidefinite");
    return std::sqrt(std::max(l, 0.0));
  }));
}

/// Inverse principal square root; rejects matrices that are singular at the
/// rank tolerance.
inline SpdMatrix spd_inv_sqrt(const SpdMatrix& s) {
  const auto e = sym_eig(s);
  const double tol = SpdMatrix::rank_tolerance(s.dim(), std::max(e.values(0), 0.0));
  if (!(e.values(s.dim() - 1) > tol)) {
    throw SingularError("spd_inv_sqrt: matrix is singular at rank tolerance");
  }
  return SpdMatrix(detail::spectral_apply(e, [](double l) { return 1.0 / std::sqrt(l); }));
}

/// Inverse of a strictly positive definite matrix through its spectrum.
inline SpdMatrix spd_inverse(const SpdMatrix& s) {
  const auto e = sym_eig(s);
  const double tol = SpdMatrix::rank_tolerance(s.dim(), std::max(e.values(0), 0.0));
  if (!(e.values(s.dim() - 1) > tol)) {
    throw SingularError("spd_inverse: matrix is singular at rank tolerance");
  }
  return SpdMatrix(detail::spectral_apply(e, [](double l) { return 1.0 / l; }));
}

inline bool is_full_rank(const SpdMatrix& s) {
  const auto e = sym_eig(s);
  return e.values(s.dim() - 1) > SpdMatrix::rank_tolerance(s.dim(), e.values(0));
}

/// M = B (B A A B)^{-1/2} B: the symmetric matrix with M (A A^T) M = B B^T.
inline SpdMatrix monge_matrix(const SpdMatrix& a, const SpdMatrix& b) {
  detail::require_same_dim(a, b, "monge_matrix");
  if (!is_full_rank(a) || !is_full_rank(b)) {
    throw SingularError("monge_matrix: scale factors must be full rank");
  }
  const Matrix& am = a.matrix();
  const Matrix& bm = b.matrix();
  const Matrix baab = bm * am * am * bm;
  const SpdMatrix inner = spd_inv_sqrt(SpdMatrix(0.5 * (baab + baab.transpose())));
  const Matrix m = bm * inner.matrix() * bm;
  return SpdMatrix(0.5 * (m + m.transpose()));
}

/// tr(A B) = sum_ij A_ij B_ji.
inline double trace_product(const SpdMatrix& a, const SpdMatrix& b) {
  detail::require_same_dim(a, b, "trace_product");
  return a.matrix().cwiseProduct(b.matrix().transpose()).sum();
}

/// tr sqrt(A B B A), the nuclear norm of A B. Equal to tr(A B) exactly when
/// A and B commute; strictly larger otherwise.
inline double nuclear_trace(const SpdMatrix& a, const SpdMatrix& b) {
  detail::require_same_dim(a, b, "nuclear_trace");
  const Matrix abba = a.matrix() * b.matrix() * b.matrix() * a.matrix();
  return spd_sqrt(SpdMatrix(0.5 * (abba + abba.transpose()))).matrix().trace();
}

}  // namespace ellot
