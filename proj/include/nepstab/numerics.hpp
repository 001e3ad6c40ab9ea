#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nepstab/error.hpp"
#include "nepstab/verdict.hpp"

namespace nepstab {

using Eigen::MatrixXd;
using Eigen::VectorXd;

inline constexpr double kRankTol = 1e-9;

/// Numerical rank: singular values above tol * sigma_max.
int rank(const MatrixXd& M, double tol = kRankTol);

struct NullBasis {
  MatrixXd B;  // orthonormal columns spanning null(M)
  int dim() const { return static_cast<int>(B.cols()); }
};

/// Columns are orthonormal; each column is signed so that its entry of
/// largest magnitude is positive. A matrix with no rows yields the identity.
NullBasis null_basis(const MatrixXd& M, double tol = kRankTol);

/// Smallest eigenvalue of a symmetric matrix. Throws NumericalError if Q is
/// not symmetric to 1e-10.
double sym_eig_min(const MatrixXd& Q);

struct EigPair {
  double value = 0;
  VectorXd vector;
};
EigPair sym_eig_min_pair(const MatrixXd& Q);
EigPair sym_eig_max_pair(const MatrixXd& Q);

/// Spectral norm of a symmetric matrix.
double sym_norm(const MatrixXd& Q);

// ---------------------------------------------------------------------------
// Linear programming over free variables.

enum class LpStatus { kOptimal, kInfeasible, kUnbounded };

struct LpResult {
  LpStatus status = LpStatus::kInfeasible;
  VectorXd x;
  double objective = 0;
};

/// Minimizes c'y subject to Aeq y = beq and Ain y <= bin with y free.
/// Dense two-phase simplex with Bland's rule. Throws NumericalError when the
/// iteration cap is hit.
LpResult solve_lp(const VectorXd& c, const MatrixXd& Aeq, const VectorXd& beq,
                  const MatrixXd& Ain, const VectorXd& bin);

/// Any y with Aeq y = beq, Ain y <= bin.
std::optional<VectorXd> lp_find_feasible(const MatrixXd& Aeq,
                                         const VectorXd& beq,
                                         const MatrixXd& Ain,
                                         const VectorXd& bin);

/// y with E y = 0 and F y <= -1, if one exists. E and F must have the same
/// column count; either may have zero rows.
std::optional<VectorXd> lp_feasible_strict(const MatrixXd& E,
                                           const MatrixXd& F);

/// A nonzero point of {E y = 0, F y <= 0}. With lead >= 0 only the first
/// `lead` coordinates are scaled to +-1, so the returned point has a nonzero
/// entry among them.
std::optional<VectorXd> cone_nonzero_ray(const MatrixXd& E, const MatrixXd& F,
                                         int lead = -1);

/// Nonnegative least squares: argmin ||A x - b|| subject to x >= 0.
VectorXd nnls(const MatrixXd& A, const VectorXd& b);

// ---------------------------------------------------------------------------
// Cones and quadratic forms.

/// {y : E y = 0, F y <= 0}.
struct ConeSpec {
  MatrixXd E;
  MatrixXd F;
  int dim = 0;

  static ConeSpec full(int dim);
  static ConeSpec make(MatrixXd E, MatrixXd F, int dim);
  bool contains(const VectorXd& y, double tol = 1e-9) const;
};

/// Euclidean projection onto the cone.
VectorXd project_onto_cone(const ConeSpec& cone, const VectorXd& y);

enum class FormMode {
  kMax,      // min over unit vectors of the cone of max_k y'Phi_k y > 0 ?
  kZeroSet,  // is y = 0 the only common zero of all y'Phi_k y in the cone ?
};

struct PositivityOptions {
  double grid_res = 1e-2;
  int starts = 64;
  std::uint64_t seed = 0;
  double tol = kRankTol;
  double max_cells = 2.5e7;
};

struct ConePositivityResult {
  Verdict verdict = Verdict::kUndecided;
  std::optional<VectorXd> witness;
  std::optional<double> margin;
  std::string method;
  std::optional<double> best_value;
  std::string note;
};

/// max_k y'Phi_k y (kMax) or max_k |y'Phi_k y| (kZeroSet).
double family_value(const std::vector<MatrixXd>& family, const VectorXd& y,
                    FormMode mode);

/// Tiered decision: exact eigenvalue test on subspaces, seeded violation
/// search, then grid certification.
ConePositivityResult quad_family_positive_on_cone(
    const std::vector<MatrixXd>& family, const ConeSpec& cone, FormMode mode,
    const PositivityOptions& opt = {});

// The individual tiers. Each returns nullopt when it cannot decide.
std::optional<ConePositivityResult> positivity_exact(
    const std::vector<MatrixXd>& family, const ConeSpec& cone, FormMode mode,
    const PositivityOptions& opt);
std::optional<ConePositivityResult> positivity_search(
    const std::vector<MatrixXd>& family, const ConeSpec& cone, FormMode mode,
    const PositivityOptions& opt, double* best_value = nullptr);
std::optional<ConePositivityResult> positivity_grid(
    const std::vector<MatrixXd>& family, const ConeSpec& cone, FormMode mode,
    const PositivityOptions& opt, std::string* note = nullptr);

}  // namespace nepstab
