#include <algorithm>
#include <cmath>

#include "nepstab/numerics.hpp"

namespace nepstab {

int rank(const MatrixXd& M, double tol) {
  if (M.rows() == 0 || M.cols() == 0) return 0;
  Eigen::JacobiSVD<MatrixXd> svd(M);
  const VectorXd& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return 0;
  int r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > tol * s(0)) ++r;
  return r;
}

NullBasis null_basis(const MatrixXd& M, double tol) {
  const Eigen::Index n = M.cols();
  NullBasis out;
  if (M.rows() == 0) {
    out.B = MatrixXd::Identity(n, n);
    return out;
  }
  if (n == 0) {
    out.B = MatrixXd(0, 0);
    return out;
  }
  Eigen::JacobiSVD<MatrixXd> svd(M, Eigen::ComputeFullV);
  const int r = rank(M, tol);
  out.B = svd.matrixV().rightCols(n - r);
  for (Eigen::Index j = 0; j < out.B.cols(); ++j) {
    Eigen::Index imax = 0;
    out.B.col(j).cwiseAbs().maxCoeff(&imax);
    if (out.B(imax, j) < 0) out.B.col(j) *= -1.0;
  }
  return out;
}

namespace {

void require_symmetric(const MatrixXd& Q) {
  if (Q.rows() != Q.cols())
    throw NumericalError("sym_eig: matrix is not square");
  if (Q.size() > 0 && (Q - Q.transpose()).cwiseAbs().maxCoeff() > 1e-10)
    throw NumericalError("sym_eig: matrix is not symmetric");
}

}  // namespace

EigPair sym_eig_min_pair(const MatrixXd& Q) {
  require_symmetric(Q);
  if (Q.rows() == 0) throw NumericalError("sym_eig: empty matrix");
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(Q);
  return {es.eigenvalues()(0), es.eigenvectors().col(0)};
}

EigPair sym_eig_max_pair(const MatrixXd& Q) {
  require_symmetric(Q);
  if (Q.rows() == 0) throw NumericalError("sym_eig: empty matrix");
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(Q);
  const Eigen::Index last = Q.rows() - 1;
  return {es.eigenvalues()(last), es.eigenvectors().col(last)};
}

double sym_eig_min(const MatrixXd& Q) { return sym_eig_min_pair(Q).value; }

double sym_norm(const MatrixXd& Q) {
  if (Q.size() == 0) return 0.0;
  require_symmetric(Q);
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(Q, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

VectorXd nnls(const MatrixXd& A, const VectorXd& b) {
  // Lawson-Hanson active set method.
  const Eigen::Index n = A.cols();
  VectorXd x = VectorXd::Zero(n);
  if (n == 0) return x;
  std::vector<bool> passive(n, false);
  const double tol = 1e-12 * std::max(1.0, A.cwiseAbs().maxCoeff()) *
                     std::max(1.0, b.cwiseAbs().maxCoeff());
  const int max_outer = 3 * static_cast<int>(n) + 30;
  for (int outer = 0; outer < max_outer; ++outer) {
    VectorXd w = A.transpose() * (b - A * x);
    Eigen::Index best = -1;
    double wmax = tol;
    for (Eigen::Index j = 0; j < n; ++j)
      if (!passive[j] && w(j) > wmax) {
        wmax = w(j);
        best = j;
      }
    if (best < 0) break;
    passive[best] = true;
    for (int inner = 0; inner < max_outer; ++inner) {
      std::vector<Eigen::Index> idx;
      for (Eigen::Index j = 0; j < n; ++j)
        if (passive[j]) idx.push_back(j);
      MatrixXd Ap(A.rows(), static_cast<Eigen::Index>(idx.size()));
      for (size_t j = 0; j < idx.size(); ++j) Ap.col(j) = A.col(idx[j]);
      VectorXd zp = Ap.completeOrthogonalDecomposition().solve(b);
      VectorXd z = VectorXd::Zero(n);
      for (size_t j = 0; j < idx.size(); ++j) z(idx[j]) = zp(j);
      bool positive = true;
      for (Eigen::Index j : idx)
        if (z(j) <= 0) positive = false;
      if (positive) {
        x = z;
        break;
      }
      double alpha = 1.0;
      for (Eigen::Index j : idx)
        if (z(j) <= 0) {
          const double denom = x(j) - z(j);
          if (denom > 0) alpha = std::min(alpha, x(j) / denom);
        }
      x += alpha * (z - x);
      for (Eigen::Index j : idx)
        if (x(j) <= 1e-15) {
          x(j) = 0;
          passive[j] = false;
        }
    }
  }
  return x;
}

}  // namespace nepstab
