#pragma once

#include <vector>

#include "nepstab/model.hpp"
#include "nepstab/numerics.hpp"

namespace nepstab {

inline constexpr double kTolKkt = 1e-8;
inline constexpr double kTolActive = 1e-7;
inline constexpr double kDedupRadius = 1e-7;
inline constexpr int kMaxIneq = 20;

struct KktPoint {
  VectorXd x;       // length n
  VectorXd lambda;  // length m, player blocks in order
  std::vector<int> active_set;  // global row indices of active inequalities
  double residual = 0;
  bool non_isolated = false;
};

/// Per player, local row indices.
struct IndexSets {
  std::vector<std::vector<int>> I1, I2, I3;
  double tol_active = kTolActive;

  int num_players() const { return static_cast<int>(I1.size()); }
  int total_I2() const;
};

/// All KKT points at perturbation p, sorted lexicographically by (x, lambda).
/// Throws GuardError when the game has more than max_ineq inequalities.
std::vector<KktPoint> enumerate_kkt(const QpNepGame& game,
                                    const Perturbation& p,
                                    int max_ineq = kMaxIneq);

double kkt_residual(const QpNepGame& game, const Perturbation& p,
                    const VectorXd& x, const VectorXd& lambda);

/// Throws InputError when a constraint has a positive multiplier and a
/// positive slack.
IndexSets classify_index_sets(const QpNepGame& game, const Perturbation& p,
                              const KktPoint& point,
                              double tol_active = kTolActive);

/// Player k's constraint rows selected by idx.
MatrixXd rows_of(const Player& player, const std::vector<int>& idx);

/// Per-player second-order test: convex players pass; the others need
/// y'P^k_kk y > 0 on their critical cone. Witness and player index go into
/// the details on FAILS.
CheckRecord check_local_nash(const QpNepGame& game, const Perturbation& p,
                             const KktPoint& point,
                             const PositivityOptions& opt = {},
                             double tol_active = kTolActive);

}  // namespace nepstab
