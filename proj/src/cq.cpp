#include <algorithm>
#include <limits>

#include "nepstab/cq.hpp"

namespace nepstab {

namespace {

std::vector<int> union_of(const std::vector<int>& a, const std::vector<int>& b) {
  std::vector<int> out = a;
  out.insert(out.end(), b.begin(), b.end());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

bool CqReport::all_licq() const {
  return std::all_of(players.begin(), players.end(),
                     [](const PlayerCq& p) { return p.licq; });
}
bool CqReport::all_smfcq() const {
  return std::all_of(players.begin(), players.end(),
                     [](const PlayerCq& p) { return p.smfcq.holds; });
}
bool CqReport::all_scsc() const {
  return std::all_of(players.begin(), players.end(),
                     [](const PlayerCq& p) { return p.scsc; });
}
bool CqReport::all_convex() const {
  return std::all_of(players.begin(), players.end(),
                     [](const PlayerCq& p) { return p.convex; });
}

bool check_licq(const Player& player, const IndexSets& sets, int k) {
  const MatrixXd A = rows_of(player, union_of(sets.I1[k], sets.I2[k]));
  return rank(A) == A.rows();
}

SmfcqResult check_smfcq(const Player& player, const IndexSets& sets, int k) {
  SmfcqResult res;
  const MatrixXd A1 = rows_of(player, sets.I1[k]);
  const MatrixXd A2 = rows_of(player, sets.I2[k]);
  if (rank(A1) != A1.rows()) {
    res.reason = "strongly active rows are linearly dependent";
    return res;
  }
  auto y = lp_feasible_strict(A1, A2);
  if (!y) {
    res.reason = "no direction with A_I1 y = 0 and A_I2 y < 0";
    return res;
  }
  res.holds = true;
  res.direction = *y;
  return res;
}

std::vector<bool> check_scsc(const IndexSets& sets) {
  std::vector<bool> out;
  for (const auto& s : sets.I2) out.push_back(s.empty());
  return out;
}

std::vector<bool> check_convexity(const QpNepGame& game, double tol) {
  std::vector<bool> out;
  for (int k = 0; k < game.num_players(); ++k) {
    const MatrixXd Pkk = game.P_block(k, k);
    const double scale = std::max(1.0, Pkk.cwiseAbs().maxCoeff());
    out.push_back(sym_eig_min(Pkk) >= -tol * scale);
  }
  return out;
}

CheckRecord check_ssosc(const QpNepGame& game, const IndexSets& sets, int k,
                        double tol) {
  CheckRecord rec;
  rec.check_name = "ssosc";
  rec.details["player"] = k;
  const Player& pl = game.players[k];
  const MatrixXd A1 = rows_of(pl, sets.I1[k]);
  if (rank(A1) != A1.rows()) {
    rec.verdict = Verdict::kUndecided;
    rec.certificate_method = "none";
    rec.details["note"] = "strongly active rows are linearly dependent";
    return rec;
  }
  const MatrixXd B = null_basis(A1, tol).B;
  rec.certificate_method = "null_space_eigen";
  if (B.cols() == 0) {
    rec.verdict = Verdict::kHolds;
    rec.margin = std::numeric_limits<double>::infinity();
    rec.details["note"] = "null space is trivial";
    return rec;
  }
  const MatrixXd Pkk = game.P_block(k, k);
  MatrixXd S = B.transpose() * Pkk * B;
  S = 0.5 * (S + S.transpose());
  const EigPair e = sym_eig_min_pair(S);
  rec.details["min_eig"] = double_to_json(e.value);
  rec.margin = e.value;
  if (e.value > tol) {
    rec.verdict = Verdict::kHolds;
  } else {
    rec.verdict = Verdict::kFails;
    rec.witness = B * e.vector;
  }
  return rec;
}

CqReport check_cq(const QpNepGame& game, const IndexSets& sets, double tol) {
  CqReport rep;
  const std::vector<bool> scsc = check_scsc(sets);
  for (int k = 0; k < game.num_players(); ++k) {
    const Player& pl = game.players[k];
    PlayerCq c;
    c.licq = check_licq(pl, sets, k);
    c.smfcq = check_smfcq(pl, sets, k);
    c.scsc = scsc[k];
    const MatrixXd Pkk = game.P_block(k, k);
    c.convex_min_eig = sym_eig_min(Pkk);
    c.convex =
        c.convex_min_eig >= -tol * std::max(1.0, Pkk.cwiseAbs().maxCoeff());
    c.ssosc = check_ssosc(game, sets, k, tol);
    rep.players.push_back(std::move(c));
  }
  return rep;
}

}  // namespace nepstab
