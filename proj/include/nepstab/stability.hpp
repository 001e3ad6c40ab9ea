#pragma once

#include <string>
#include <vector>

#include "nepstab/cq.hpp"
#include "nepstab/kkt.hpp"

namespace nepstab {

/// J has block (k, i) equal to P^k restricted to rows of player k and
/// columns of player i. The critical-face matrix is M31 = J'.
struct GameJacobian {
  MatrixXd J;
  MatrixXd M31;
};

GameJacobian build_game_jacobian(const QpNepGame& game);

/// Local row indices per player.
struct Partition {
  std::vector<std::vector<int>> J1, J2, J3;
};

inline constexpr int kMaxWeaklyActive = 12;

/// All 3^|I2| partitions. Weakly active rows are digits of a ternary counter
/// (0 -> J1, 1 -> J2, 2 -> J3), first row least significant.
std::vector<Partition> enumerate_partitions(const IndexSets& sets);

/// K(J1, J2) in the ambient space of all strategies.
ConeSpec cone_of(const Partition& part, const QpNepGame& game);

/// The critical cone K(I1, I2).
ConeSpec critical_cone(const QpNepGame& game, const IndexSets& sets);

nlohmann::json partition_to_json(const Partition& part);

struct AlphaParams {
  MatrixXd alpha;  // zero diagonal, unit off-diagonal row sums
  static AlphaParams uniform(int N);
};

enum class AlphaMode { kUniform, kSearch };

struct AnalyzeOptions {
  PositivityOptions positivity;
  AlphaMode alpha_mode = AlphaMode::kUniform;
  double tol = kRankTol;
  double tol_active = kTolActive;
};

/// Lipschitz single-valued localization: LICQ plus no nonzero y in any
/// K(J1, J2) with M31 y in the polar cone.
CheckRecord check_critical_face(const QpNepGame& game, const IndexSets& sets,
                                double tol = kRankTol);

/// Sufficient condition built from LICQ, SSOSC and per-pair Schur
/// complements. Schur failures give UNDECIDED.
CheckRecord check_strong_regularity_sufficient(const QpNepGame& game,
                                               const IndexSets& sets,
                                               const AlphaParams& alpha,
                                               double tol = kRankTol);
CheckRecord check_strong_regularity_sufficient(const QpNepGame& game,
                                               const IndexSets& sets,
                                               AlphaMode mode,
                                               double tol = kRankTol);

/// Continuously differentiable localization: SCSC, LICQ and B'JB
/// nonsingular.
CheckRecord check_c1_localization(const QpNepGame& game, const IndexSets& sets,
                                  double tol = kRankTol);
CheckRecord check_c1_localization(const QpNepGame& game, const IndexSets& sets,
                                  const MatrixXd& J, double tol);

/// Forms q_k(y) = (y^k)'(P^k rows k) y as symmetric n x n matrices.
std::vector<MatrixXd> i_property_forms(const QpNepGame& game);
/// Forms phi_k(y) = q_k(y) - 0.5 (y^k)' P^k_kk y^k.
std::vector<MatrixXd> p_property_forms(const QpNepGame& game);

CheckRecord check_i_property(const QpNepGame& game, const IndexSets& sets,
                             const PositivityOptions& opt = {});
CheckRecord check_p_property(const QpNepGame& game, const IndexSets& sets,
                             const PositivityOptions& opt = {});

/// Exact test on the homogeneous linearized system, branch by branch over
/// the weakly active rows.
CheckRecord check_isolated_calmness_exact(const QpNepGame& game,
                                          const IndexSets& sets);

struct StabilityReport {
  KktPoint point;
  IndexSets sets;
  CqReport cq;
  GameJacobian jacobian;
  CheckRecord local_nash;
  CheckRecord strong_regularity;
  CheckRecord strong_regularity_sufficient;
  CheckRecord c1_localization;
  CheckRecord i_property;
  CheckRecord p_property;
  CheckRecord isolated_calmness_exact;
  CheckRecord isolated_calmness_sufficient;
  CheckRecord robust_isolated_calmness;

  std::vector<const CheckRecord*> checks() const;
};

StabilityReport analyze(const QpNepGame& game, const Perturbation& p,
                        const KktPoint& point, const AnalyzeOptions& opt = {});

}  // namespace nepstab
