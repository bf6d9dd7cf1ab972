#include "pmsn/tridiag_eigen.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <string>

#include "pmsn/error.hpp"

namespace pmsn {
namespace {

using cd = std::complex<double>;

EigenDecomposition solve_structured(const TridiagMatrix& m) {
  const auto n = static_cast<Eigen::Index>(m.size());
  const double a = m.diag[0];

  // D^H S D = i J with d_{k+1} = d_k * i * sgn(s_k) and J_{k,k+1} = |s_k|.
  Eigen::VectorXcd d(n);
  d(0) = 1.0;
  for (Eigen::Index k = 0; k + 1 < n; ++k)
    d(k + 1) = d(k) * cd(0.0, m.upper[k] > 0 ? 1.0 : -1.0);

  Eigen::VectorXd jdiag = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd joff(std::max<Eigen::Index>(n - 1, 0));
  for (Eigen::Index k = 0; k + 1 < n; ++k) joff(k) = std::abs(m.upper[k]);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(jdiag, joff, Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success)
    throw NumericFailure("symmetric tridiagonal QR did not converge (order " + std::to_string(n) + ")");

  // Eigenvalues come sorted ascending and symmetric about zero.
  const Eigen::VectorXd& mu = solver.eigenvalues();
  const Eigen::MatrixXd& q = solver.eigenvectors();
  EigenDecomposition out;
  out.structured = true;
  out.eigenvalues.resize(n);
  out.P.resize(n, n);
  Eigen::Index col = 0;
  for (Eigen::Index k = n - 1; k >= n - n / 2; --k) {
    Eigen::VectorXcd v = d.cwiseProduct(q.col(k).cast<cd>());
    out.eigenvalues(col) = cd(a, mu(k));
    out.eigenvalues(col + 1) = cd(a, -mu(k));
    out.P.col(col) = v;
    out.P.col(col + 1) = v.conjugate();
    col += 2;
  }
  if (n % 2 == 1) {
    Eigen::VectorXcd v = d.cwiseProduct(q.col(n / 2).cast<cd>());
    Eigen::Index big = 0;
    v.cwiseAbs().maxCoeff(&big);
    v *= std::conj(v(big)) / std::abs(v(big));
    for (Eigen::Index k = 0; k < n; ++k) v(k) = cd(v(k).real(), 0.0);
    v /= v.norm();
    out.eigenvalues(col) = cd(a, 0.0);
    out.P.col(col) = v;
  }
  out.P_inv = out.P.adjoint();
  return out;
}

EigenDecomposition solve_general(const TridiagMatrix& m, int max_iterations) {
  const Eigen::MatrixXd dense = m.dense();
  const auto n = dense.rows();
  Eigen::EigenSolver<Eigen::MatrixXd> solver;
  if (max_iterations > 0) solver.setMaxIterations(max_iterations * static_cast<Eigen::Index>(n));
  solver.compute(dense, true);
  if (solver.info() != Eigen::Success)
    throw NumericFailure("real Schur QR did not converge for tridiagonal matrix of order " +
                         std::to_string(n));

  const Eigen::VectorXcd vals = solver.eigenvalues();
  const Eigen::MatrixXcd vecs = solver.eigenvectors();
  std::vector<Eigen::Index> paired, real;
  for (Eigen::Index k = 0; k < n; ++k) {
    if (vals(k).imag() > 0)
      paired.push_back(k);
    else if (vals(k).imag() == 0)
      real.push_back(k);
  }
  EigenDecomposition out;
  out.eigenvalues.resize(n);
  out.P.resize(n, n);
  Eigen::Index col = 0;
  for (Eigen::Index k : paired) {
    out.eigenvalues(col) = vals(k);
    out.eigenvalues(col + 1) = std::conj(vals(k));
    out.P.col(col) = vecs.col(k);
    out.P.col(col + 1) = vecs.col(k).conjugate();
    col += 2;
  }
  for (Eigen::Index k : real) {
    out.eigenvalues(col) = vals(k);
    out.P.col(col) = vecs.col(k).real().cast<cd>();
    ++col;
  }
  Eigen::FullPivLU<Eigen::MatrixXcd> lu(out.P);
  if (!lu.isInvertible())
    throw NumericFailure("tridiagonal matrix of order " + std::to_string(n) +
                         " is defective; eigenvector matrix is singular");
  out.P_inv = lu.inverse();
  return out;
}

}  // namespace

Eigen::MatrixXd TridiagMatrix::dense() const {
  validate();
  const auto n = static_cast<Eigen::Index>(size());
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index k = 0; k < n; ++k) out(k, k) = diag[k];
  for (Eigen::Index k = 0; k + 1 < n; ++k) {
    out(k, k + 1) = upper[k];
    out(k + 1, k) = lower[k];
  }
  return out;
}

void TridiagMatrix::validate() const {
  if (diag.empty()) throw InvalidArgument("tridiagonal matrix must have order >= 1");
  if (upper.size() + 1 != diag.size() || lower.size() + 1 != diag.size())
    throw InvalidArgument("tridiagonal off-diagonals must have length " +
                          std::to_string(diag.size() - 1));
}

bool TridiagMatrix::is_diag_plus_skew() const noexcept {
  if (diag.empty() || upper.size() + 1 != diag.size() || lower.size() + 1 != diag.size())
    return false;
  for (double d : diag)
    if (d != diag[0]) return false;
  for (std::size_t k = 0; k < upper.size(); ++k)
    if (upper[k] == 0.0 || upper[k] != -lower[k]) return false;
  return true;
}

double EigenDecomposition::reconstruction_error(const TridiagMatrix& m) const {
  const Eigen::MatrixXcd rebuilt = P * eigenvalues.asDiagonal() * P_inv;
  return (rebuilt - m.dense().cast<cd>()).cwiseAbs().maxCoeff();
}

EigenDecomposition tridiag_skew_eigen(const TridiagMatrix& m, int max_iterations) {
  m.validate();
  for (double v : m.diag)
    if (!std::isfinite(v)) throw InvalidArgument("tridiagonal matrix has a non-finite entry");
  if (m.is_diag_plus_skew()) return solve_structured(m);
  return solve_general(m, max_iterations);
}

}  // namespace pmsn
