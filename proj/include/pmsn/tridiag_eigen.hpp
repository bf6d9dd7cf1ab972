#pragma once

#include <Eigen/Dense>
#include <vector>

namespace pmsn {

/// Tridiagonal matrix of order diag.size(); upper[k] sits at (k, k+1) and
/// lower[k] at (k+1, k).
struct TridiagMatrix {
  std::vector<double> diag;
  std::vector<double> upper;
  std::vector<double> lower;

  std::size_t size() const noexcept { return diag.size(); }
  Eigen::MatrixXd dense() const;
  /// Throws InvalidArgument when the off-diagonal lengths do not match.
  void validate() const;
  /// Constant diagonal and upper == -lower with every coupling nonzero.
  bool is_diag_plus_skew() const noexcept;
};

struct EigenDecomposition {
  /// Conjugate pairs are adjacent with the positive imaginary part first;
  /// a lone real eigenvalue (odd order) comes last.
  Eigen::VectorXcd eigenvalues;
  Eigen::MatrixXcd P;
  Eigen::MatrixXcd P_inv;
  bool structured = false;

  /// max |P diag(eigenvalues) P_inv - m|.
  double reconstruction_error(const TridiagMatrix& m) const;
};

/// Eigendecomposition of a real tridiagonal matrix.
///
/// For a*I + S with S skew-symmetric and unreduced, a diagonal phase
/// similarity turns -iS into a real symmetric tridiagonal matrix, whose
/// eigenpairs come from an implicit symmetric QR sweep. Eigenvalues are then
/// exactly a + i*mu and P is unitary. Any other input goes through a general
/// real Schur based solver. Throws NumericFailure when the iteration does not
/// converge within `max_iterations` sweeps per eigenvalue (0 = library
/// default).
EigenDecomposition tridiag_skew_eigen(const TridiagMatrix& m, int max_iterations = 0);

}  // namespace pmsn
