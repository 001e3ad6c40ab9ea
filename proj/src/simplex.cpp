#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "nepstab/numerics.hpp"

namespace nepstab {

namespace {

constexpr double kPivotTol = 1e-9;
constexpr double kCostTol = 1e-10;

// Dense simplex tableau in standard form: min c'x, A x = b, x >= 0, b >= 0.
// The last column holds the right-hand side.
class Tableau {
 public:
  Tableau(const MatrixXd& A, const VectorXd& b, int num_artificial)
      : rows_(static_cast<int>(A.rows())),
        cols_(static_cast<int>(A.cols()) + num_artificial),
        T_(MatrixXd::Zero(A.rows(), cols_ + 1)),
        basis_(rows_) {
    T_.leftCols(A.cols()) = A;
    T_.col(cols_) = b;
    for (int r = 0; r < rows_; ++r) {
      T_(r, A.cols() + r) = 1.0;
      basis_[r] = static_cast<int>(A.cols()) + r;
    }
    iter_cap_ = 5000 + 50 * (rows_ + cols_);
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  const std::vector<int>& basis() const { return basis_; }
  double rhs(int r) const { return T_(r, cols_); }
  double entry(int r, int j) const { return T_(r, j); }

  // Runs Bland's rule on costs c restricted to columns [0, active_cols).
  // Returns false if the problem is unbounded.
  bool optimize(const VectorXd& c, int active_cols) {
    for (;;) {
      if (++iterations_ > iter_cap_)
        throw NumericalError("simplex: iteration cap exceeded");
      VectorXd d = reduced_costs(c, active_cols);
      int enter = -1;
      for (int j = 0; j < active_cols; ++j)
        if (d(j) < -kCostTol) {
          enter = j;
          break;
        }
      if (enter < 0) return true;
      int leave = -1;
      double best = std::numeric_limits<double>::infinity();
      for (int r = 0; r < rows_; ++r) {
        const double a = T_(r, enter);
        if (a <= kPivotTol) continue;
        const double ratio = T_(r, cols_) / a;
        if (leave < 0 || ratio < best - 1e-12) {
          best = ratio;
          leave = r;
        } else if (ratio <= best + 1e-12 && basis_[r] < basis_[leave]) {
          best = std::min(best, ratio);
          leave = r;
        }
      }
      if (leave < 0) return false;
      pivot(leave, enter);
    }
  }

  double objective(const VectorXd& c) const {
    double z = 0;
    for (int r = 0; r < rows_; ++r) z += c(basis_[r]) * T_(r, cols_);
    return z;
  }

  void pivot(int r, int j) {
    T_.row(r) /= T_(r, j);
    for (int i = 0; i < rows_; ++i) {
      if (i == r) continue;
      const double f = T_(i, j);
      if (f != 0.0) T_.row(i) -= f * T_.row(r);
    }
    basis_[r] = j;
  }

  void drop_row(int r) {
    const int last = rows_ - 1;
    if (r != last) {
      T_.row(r) = T_.row(last);
      basis_[r] = basis_[last];
    }
    T_.conservativeResize(last, Eigen::NoChange);
    basis_.pop_back();
    --rows_;
  }

 private:
  VectorXd reduced_costs(const VectorXd& c, int active_cols) const {
    VectorXd d = c.head(active_cols);
    for (int r = 0; r < rows_; ++r) {
      const double cb = c(basis_[r]);
      if (cb != 0.0) d -= cb * T_.row(r).head(active_cols).transpose();
    }
    return d;
  }

  int rows_;
  int cols_;
  MatrixXd T_;
  std::vector<int> basis_;
  long iterations_ = 0;
  long iter_cap_;
};

}  // namespace

LpResult solve_lp(const VectorXd& c, const MatrixXd& Aeq, const VectorXd& beq,
                  const MatrixXd& Ain, const VectorXd& bin) {
  const int n = static_cast<int>(c.size());
  if (Aeq.cols() != n || Ain.cols() != n || Aeq.rows() != beq.size() ||
      Ain.rows() != bin.size())
    throw InputError("solve_lp: inconsistent dimensions");
  const int me = static_cast<int>(Aeq.rows());
  const int mi = static_cast<int>(Ain.rows());
  const int R = me + mi;
  const int N = 2 * n + mi;

  LpResult res;
  if (R == 0) {
    if (c.size() > 0 && c.cwiseAbs().maxCoeff() > 0) {
      res.status = LpStatus::kUnbounded;
      return res;
    }
    res.status = LpStatus::kOptimal;
    res.x = VectorXd::Zero(n);
    return res;
  }

  MatrixXd A = MatrixXd::Zero(R, N);
  VectorXd b(R);
  A.block(0, 0, me, n) = Aeq;
  A.block(0, n, me, n) = -Aeq;
  A.block(me, 0, mi, n) = Ain;
  A.block(me, n, mi, n) = -Ain;
  A.block(me, 2 * n, mi, mi) = MatrixXd::Identity(mi, mi);
  b << beq, bin;
  for (int r = 0; r < R; ++r)
    if (b(r) < 0) {
      A.row(r) *= -1.0;
      b(r) = -b(r);
    }

  Tableau tab(A, b, R);
  VectorXd c1 = VectorXd::Zero(N + R);
  c1.tail(R).setOnes();
  tab.optimize(c1, N + R);
  const double feas_tol = 1e-9 * std::max(1.0, b.cwiseAbs().maxCoeff());
  if (tab.objective(c1) > feas_tol) {
    res.status = LpStatus::kInfeasible;
    return res;
  }

  // Drive remaining artificials out of the basis; drop redundant rows.
  std::vector<int> kept_rows;
  {
    int r = 0;
    std::vector<int> original(R);
    for (int i = 0; i < R; ++i) original[i] = i;
    while (r < tab.rows()) {
      if (tab.basis()[r] >= N) {
        int j_piv = -1;
        for (int j = 0; j < N; ++j)
          if (std::abs(tab.entry(r, j)) > kPivotTol) {
            j_piv = j;
            break;
          }
        if (j_piv >= 0) {
          tab.pivot(r, j_piv);
        } else {
          original[r] = original[tab.rows() - 1];
          original.pop_back();
          tab.drop_row(r);
          continue;
        }
      }
      ++r;
    }
    kept_rows = original;
  }

  VectorXd c2 = VectorXd::Zero(N + R);
  c2.head(n) = c;
  c2.segment(n, n) = -c;
  if (!tab.optimize(c2, N)) {
    res.status = LpStatus::kUnbounded;
    return res;
  }

  // Recompute the basic solution from the original data for accuracy.
  const int rb = tab.rows();
  VectorXd xs = VectorXd::Zero(N);
  for (int r = 0; r < rb; ++r) xs(tab.basis()[r]) = std::max(0.0, tab.rhs(r));
  if (rb > 0) {
    MatrixXd Bm(rb, rb);
    VectorXd bb(rb);
    for (int r = 0; r < rb; ++r) {
      bb(r) = b(kept_rows[r]);
      for (int q = 0; q < rb; ++q) Bm(r, q) = A(kept_rows[r], tab.basis()[q]);
    }
    Eigen::FullPivLU<MatrixXd> lu(Bm);
    if (lu.isInvertible()) {
      VectorXd xb = lu.solve(bb);
      if (xb.minCoeff() > -1e-9 && (Bm * xb - bb).cwiseAbs().maxCoeff() < 1e-9) {
        for (int q = 0; q < rb; ++q) xs(tab.basis()[q]) = std::max(0.0, xb(q));
      }
    }
  }
  res.status = LpStatus::kOptimal;
  res.x = xs.head(n) - xs.segment(n, n);
  res.objective = c.dot(res.x);
  return res;
}

std::optional<VectorXd> lp_find_feasible(const MatrixXd& Aeq,
                                         const VectorXd& beq,
                                         const MatrixXd& Ain,
                                         const VectorXd& bin) {
  const Eigen::Index n = std::max(Aeq.cols(), Ain.cols());
  MatrixXd E = Aeq.rows() == 0 ? MatrixXd(0, n) : Aeq;
  MatrixXd F = Ain.rows() == 0 ? MatrixXd(0, n) : Ain;
  LpResult r = solve_lp(VectorXd::Zero(n), E, beq, F, bin);
  if (r.status != LpStatus::kOptimal) return std::nullopt;
  return r.x;
}

std::optional<VectorXd> lp_feasible_strict(const MatrixXd& E,
                                           const MatrixXd& F) {
  if (E.cols() != F.cols())
    throw InputError("lp_feasible_strict: column counts differ");
  return lp_find_feasible(E, VectorXd::Zero(E.rows()), F,
                          VectorXd::Constant(F.rows(), -1.0));
}

std::optional<VectorXd> cone_nonzero_ray(const MatrixXd& E, const MatrixXd& F,
                                         int lead) {
  if (E.cols() != F.cols())
    throw InputError("cone_nonzero_ray: column counts differ");
  const int n = static_cast<int>(E.cols());
  const int coords = lead < 0 ? n : std::min(lead, n);
  MatrixXd Aeq(E.rows() + 1, n);
  VectorXd beq = VectorXd::Zero(E.rows() + 1);
  Aeq.topRows(E.rows()) = E;
  beq(E.rows()) = 1.0;
  const VectorXd bin = VectorXd::Zero(F.rows());
  for (int j = 0; j < coords; ++j) {
    for (double sigma : {1.0, -1.0}) {
      Aeq.row(E.rows()).setZero();
      Aeq(E.rows(), j) = sigma;
      if (auto y = lp_find_feasible(Aeq, beq, F, bin)) return y;
    }
  }
  return std::nullopt;
}

}  // namespace nepstab
