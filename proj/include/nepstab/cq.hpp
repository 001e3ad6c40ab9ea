#pragma once

#include <optional>
#include <vector>

#include "nepstab/kkt.hpp"

namespace nepstab {

struct SmfcqResult {
  bool holds = false;
  std::optional<VectorXd> direction;  // A_I1 y = 0, A_I2 y <= -1
  std::string reason;
};

struct PlayerCq {
  bool licq = false;
  SmfcqResult smfcq;
  bool scsc = false;
  bool convex = false;
  double convex_min_eig = 0;
  CheckRecord ssosc;
};

struct CqReport {
  std::vector<PlayerCq> players;

  bool all_licq() const;
  bool all_smfcq() const;
  bool all_scsc() const;
  bool all_convex() const;
};

/// Rows of A_k indexed by I1 and I2 are linearly independent.
bool check_licq(const Player& player, const IndexSets& sets, int k);
SmfcqResult check_smfcq(const Player& player, const IndexSets& sets, int k);
/// Per player: I2 is empty.
std::vector<bool> check_scsc(const IndexSets& sets);
/// Per player: P^k_kk is positive semidefinite to tol.
std::vector<bool> check_convexity(const QpNepGame& game, double tol = kRankTol);
/// y'P^k_kk y > 0 on {A_I1 y = 0}; margin is the least eigenvalue on that
/// subspace.
CheckRecord check_ssosc(const QpNepGame& game, const IndexSets& sets, int k,
                        double tol = kRankTol);

CqReport check_cq(const QpNepGame& game, const IndexSets& sets,
                  double tol = kRankTol);

}  // namespace nepstab
