#include <algorithm>
#include <cmath>
#include <limits>

#include "nepstab/stability.hpp"

namespace nepstab {

using nlohmann::json;

GameJacobian build_game_jacobian(const QpNepGame& game) {
  GameJacobian g;
  g.J = MatrixXd::Zero(game.n, game.n);
  for (int k = 0; k < game.num_players(); ++k) {
    const Player& pl = game.players[k];
    g.J.middleRows(game.x_offset[k], pl.n_k) =
        pl.P.middleRows(game.x_offset[k], pl.n_k);
  }
  g.M31 = g.J.transpose();
  return g;
}

std::vector<Partition> enumerate_partitions(const IndexSets& sets) {
  const int q = sets.total_I2();
  if (q > kMaxWeaklyActive)
    throw GuardError("enumerate_partitions: " + std::to_string(q) +
                     " weakly active rows exceed the limit of " +
                     std::to_string(kMaxWeaklyActive));
  std::vector<std::pair<int, int>> weak;
  for (int k = 0; k < sets.num_players(); ++k)
    for (int i : sets.I2[k]) weak.emplace_back(k, i);
  long total = 1;
  for (int j = 0; j < q; ++j) total *= 3;
  std::vector<Partition> out;
  out.reserve(static_cast<size_t>(total));
  for (long code = 0; code < total; ++code) {
    Partition p;
    p.J1 = sets.I1;
    p.J2.assign(sets.num_players(), {});
    p.J3 = sets.I3;
    long c = code;
    for (int j = 0; j < q; ++j) {
      const auto [k, i] = weak[j];
      const int digit = static_cast<int>(c % 3);
      c /= 3;
      (digit == 0 ? p.J1 : digit == 1 ? p.J2 : p.J3)[k].push_back(i);
    }
    for (auto* v : {&p.J1, &p.J2, &p.J3})
      for (auto& s : *v) std::sort(s.begin(), s.end());
    out.push_back(std::move(p));
  }
  return out;
}

namespace {

// Rows a^k_i for the selected local indices, embedded in R^n.
MatrixXd embedded_rows(const QpNepGame& game,
                       const std::vector<std::vector<int>>& sel) {
  int count = 0;
  for (const auto& s : sel) count += static_cast<int>(s.size());
  MatrixXd out = MatrixXd::Zero(count, game.n);
  int r = 0;
  for (int k = 0; k < game.num_players(); ++k)
    for (int i : sel[k])
      out.block(r++, game.x_offset[k], 1, game.players[k].n_k) =
          game.players[k].A.row(i);
  return out;
}

MatrixXd block_null_basis(const QpNepGame& game, const IndexSets& sets,
                          double tol) {
  std::vector<MatrixXd> parts;
  int cols = 0;
  for (int k = 0; k < game.num_players(); ++k) {
    parts.push_back(null_basis(rows_of(game.players[k], sets.I1[k]), tol).B);
    cols += static_cast<int>(parts.back().cols());
  }
  MatrixXd B = MatrixXd::Zero(game.n, cols);
  int c = 0;
  for (int k = 0; k < game.num_players(); ++k) {
    B.block(game.x_offset[k], c, parts[k].rows(), parts[k].cols()) = parts[k];
    c += static_cast<int>(parts[k].cols());
  }
  return B;
}

json index_list(const std::vector<std::vector<int>>& v) {
  json a = json::array();
  for (const auto& s : v) a.push_back(s);
  return a;
}

// First player violating LICQ, or -1.
int licq_violator(const QpNepGame& game, const IndexSets& sets) {
  for (int k = 0; k < game.num_players(); ++k)
    if (!check_licq(game.players[k], sets, k)) return k;
  return -1;
}

void fail_licq(CheckRecord& rec, const QpNepGame& game, const IndexSets& sets,
               int k) {
  std::vector<int> act = sets.I1[k];
  act.insert(act.end(), sets.I2[k].begin(), sets.I2[k].end());
  std::sort(act.begin(), act.end());
  const MatrixXd A = rows_of(game.players[k], act);
  const MatrixXd Z = null_basis(A.transpose()).B;
  rec.verdict = Verdict::kFails;
  rec.certificate_method = "rank";
  rec.details["clause"] = "LICQ";
  rec.details["player"] = k;
  rec.details["active_rows"] = act;
  if (Z.cols() > 0) rec.witness = Z.col(0);
}

}  // namespace

ConeSpec cone_of(const Partition& part, const QpNepGame& game) {
  return ConeSpec::make(embedded_rows(game, part.J1),
                        embedded_rows(game, part.J2), game.n);
}

ConeSpec critical_cone(const QpNepGame& game, const IndexSets& sets) {
  return ConeSpec::make(embedded_rows(game, sets.I1),
                        embedded_rows(game, sets.I2), game.n);
}

json partition_to_json(const Partition& part) {
  return json{{"J1", index_list(part.J1)},
              {"J2", index_list(part.J2)},
              {"J3", index_list(part.J3)}};
}

AlphaParams AlphaParams::uniform(int N) {
  AlphaParams a;
  a.alpha = MatrixXd::Zero(N, N);
  if (N > 1)
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j)
        if (i != j) a.alpha(i, j) = 1.0 / (N - 1);
  return a;
}

CheckRecord check_critical_face(const QpNepGame& game, const IndexSets& sets,
                                double) {
  CheckRecord rec;
  rec.check_name = "strong_regularity";
  if (int k = licq_violator(game, sets); k >= 0) {
    fail_licq(rec, game, sets, k);
    return rec;
  }
  const MatrixXd M31 = build_game_jacobian(game).M31;
  const int n = game.n;
  const std::vector<Partition> parts = enumerate_partitions(sets);
  for (size_t pi = 0; pi < parts.size(); ++pi) {
    const ConeSpec K = cone_of(parts[pi], game);
    const int p1 = static_cast<int>(K.E.rows());
    const int p2 = static_cast<int>(K.F.rows());
    const int dim = n + p1 + p2;
    // Variables (y, mu, nu): E y = 0, M31 y - E'mu - F'nu = 0, F y <= 0,
    // nu >= 0.
    MatrixXd Aeq = MatrixXd::Zero(p1 + n, dim);
    Aeq.block(0, 0, p1, n) = K.E;
    Aeq.block(p1, 0, n, n) = M31;
    Aeq.block(p1, n, n, p1) = -K.E.transpose();
    Aeq.block(p1, n + p1, n, p2) = -K.F.transpose();
    MatrixXd Ain = MatrixXd::Zero(2 * p2, dim);
    Ain.block(0, 0, p2, n) = K.F;
    Ain.block(p2, n + p1, p2, p2) = -MatrixXd::Identity(p2, p2);
    if (auto w = cone_nonzero_ray(Aeq, Ain, n)) {
      rec.verdict = Verdict::kFails;
      rec.certificate_method = "partition_lp";
      rec.witness = w->head(n);
      rec.details["clause"] = "critical_face";
      rec.details["partition_index"] = pi;
      rec.details["partition"] = partition_to_json(parts[pi]);
      rec.details["mu"] = vector_to_json(w->segment(n, p1));
      rec.details["nu"] = vector_to_json(w->segment(n + p1, p2));
      return rec;
    }
  }
  rec.verdict = Verdict::kHolds;
  rec.certificate_method = "partition_lp";
  rec.details["partitions_checked"] = parts.size();
  return rec;
}

namespace {

struct SchurOutcome {
  bool all_positive = true;
  double min_margin = std::numeric_limits<double>::infinity();
  json pairs = json::array();
};

SchurOutcome schur_margins(const QpNepGame& game,
                           const std::vector<MatrixXd>& B,
                           const std::vector<MatrixXd>& Hinv,
                           const MatrixXd& alpha, double tol) {
  SchurOutcome out;
  const int N = game.num_players();
  for (int k = 0; k < N; ++k) {
    for (int i = 0; i < N; ++i) {
      if (i == k) continue;
      double margin = std::numeric_limits<double>::infinity();
      if (B[k].cols() > 0) {
        const MatrixXd T = game.P_block(i, k) + game.P_block(k, i).transpose();
        MatrixXd S = game.P_block(k, k);
        if (B[i].cols() > 0) {
          const MatrixXd BT = B[i].transpose() * T;
          S -= (1.0 / (4.0 * alpha(i, k) * alpha(k, i))) *
               (BT.transpose() * Hinv[i] * BT);
        }
        MatrixXd R = B[k].transpose() * S * B[k];
        R = 0.5 * (R + R.transpose());
        margin = sym_eig_min(R);
      }
      out.pairs.push_back(
          json{{"k", k}, {"i", i}, {"margin", double_to_json(margin)}});
      out.min_margin = std::min(out.min_margin, margin);
      if (!(margin > tol)) out.all_positive = false;
    }
  }
  return out;
}

// Integer compositions of total into parts positive pieces.
void compositions(int total, int parts, std::vector<int>& cur,
                  std::vector<std::vector<int>>& out) {
  if (parts == 1) {
    cur.push_back(total);
    out.push_back(cur);
    cur.pop_back();
    return;
  }
  for (int first = 1; first <= total - (parts - 1); ++first) {
    cur.push_back(first);
    compositions(total - first, parts - 1, cur, out);
    cur.pop_back();
  }
}

CheckRecord sufficient_impl(const QpNepGame& game, const IndexSets& sets,
                            const std::vector<MatrixXd>& alphas, double tol) {
  CheckRecord rec;
  rec.check_name = "strong_regularity_sufficient";
  rec.certificate_method = "schur_eigen";
  const int N = game.num_players();
  if (int k = licq_violator(game, sets); k >= 0) {
    fail_licq(rec, game, sets, k);
    return rec;
  }
  std::vector<MatrixXd> B(N), Hinv(N);
  json ssosc = json::array();
  for (int k = 0; k < N; ++k) {
    CheckRecord s = check_ssosc(game, sets, k, tol);
    ssosc.push_back(s.margin ? double_to_json(*s.margin) : json(nullptr));
    if (s.verdict != Verdict::kHolds) {
      rec.verdict = s.verdict;
      rec.details["clause"] = "SSOSC";
      rec.details["player"] = k;
      if (s.witness) rec.witness = s.witness;
      rec.details["ssosc_margins"] = ssosc;
      return rec;
    }
    B[k] = null_basis(rows_of(game.players[k], sets.I1[k]), tol).B;
    if (B[k].cols() > 0) {
      const MatrixXd H = B[k].transpose() * game.P_block(k, k) * B[k];
      Hinv[k] = H.ldlt().solve(MatrixXd::Identity(H.rows(), H.cols()));
    }
  }
  rec.details["ssosc_margins"] = ssosc;
  if (N == 1) {
    rec.verdict = Verdict::kHolds;
    rec.margin = check_ssosc(game, sets, 0, tol).margin;
    rec.details["note"] = "single player: pair condition is vacuous";
    return rec;
  }
  SchurOutcome best;
  best.min_margin = -std::numeric_limits<double>::infinity();
  size_t best_idx = 0;
  for (size_t a = 0; a < alphas.size(); ++a) {
    SchurOutcome o = schur_margins(game, B, Hinv, alphas[a], tol);
    if (o.min_margin > best.min_margin || a == 0) {
      best = o;
      best_idx = a;
    }
    if (o.all_positive) break;
  }
  rec.details["alpha"] = matrix_to_json(alphas[best_idx]);
  rec.details["alpha_candidates_tried"] = alphas.size();
  rec.details["schur_margins"] = best.pairs;
  if (best.all_positive) {
    rec.verdict = Verdict::kHolds;
    rec.margin = best.min_margin;
  } else {
    rec.verdict = Verdict::kUndecided;
    rec.details["clause"] = "schur";
    rec.details["note"] =
        "pair condition not met for the alpha values tried; the condition is "
        "only sufficient";
  }
  return rec;
}

}  // namespace

CheckRecord check_strong_regularity_sufficient(const QpNepGame& game,
                                               const IndexSets& sets,
                                               const AlphaParams& alpha,
                                               double tol) {
  return sufficient_impl(game, sets, {alpha.alpha}, tol);
}

CheckRecord check_strong_regularity_sufficient(const QpNepGame& game,
                                               const IndexSets& sets,
                                               AlphaMode mode, double tol) {
  const int N = game.num_players();
  std::vector<MatrixXd> alphas{AlphaParams::uniform(N).alpha};
  if (mode == AlphaMode::kSearch && N > 2) {
    std::vector<std::vector<int>> rows;
    std::vector<int> cur;
    compositions(N + 3, N - 1, cur, rows);
    const size_t cap = 20000;
    std::vector<size_t> idx(N, 0);
    for (;;) {
      MatrixXd a = MatrixXd::Zero(N, N);
      for (int i = 0; i < N; ++i) {
        int c = 0;
        for (int j = 0; j < N; ++j)
          if (j != i) a(i, j) = rows[idx[i]][c++] / static_cast<double>(N + 3);
      }
      alphas.push_back(a);
      if (alphas.size() > cap) break;
      int pos = 0;
      while (pos < N && ++idx[pos] == rows.size()) idx[pos++] = 0;
      if (pos == N) break;
    }
  }
  return sufficient_impl(game, sets, alphas, tol);
}

CheckRecord check_c1_localization(const QpNepGame& game, const IndexSets& sets,
                                  const MatrixXd& J, double tol) {
  CheckRecord rec;
  rec.check_name = "c1_localization";
  std::vector<int> non_scsc;
  for (int k = 0; k < game.num_players(); ++k)
    if (!sets.I2[k].empty()) non_scsc.push_back(k);
  if (!non_scsc.empty()) {
    rec.verdict = Verdict::kFails;
    rec.certificate_method = "index_sets";
    rec.details["clause"] = "SCSC";
    rec.details["players"] = non_scsc;
    return rec;
  }
  if (int k = licq_violator(game, sets); k >= 0) {
    fail_licq(rec, game, sets, k);
    return rec;
  }
  const MatrixXd B = block_null_basis(game, sets, tol);
  rec.certificate_method = "reduced_jacobian_svd";
  if (B.cols() == 0) {
    rec.verdict = Verdict::kHolds;
    rec.margin = std::numeric_limits<double>::infinity();
    rec.details["note"] = "subspace M is trivial";
    return rec;
  }
  const MatrixXd R = B.transpose() * J * B;
  Eigen::JacobiSVD<MatrixXd> svd(R, Eigen::ComputeFullV);
  const VectorXd& s = svd.singularValues();
  const double smin = s(s.size() - 1);
  rec.details["min_singular_value"] = double_to_json(smin);
  if (rank(R, tol) == R.cols()) {
    rec.verdict = Verdict::kHolds;
    rec.margin = smin;
  } else {
    rec.verdict = Verdict::kFails;
    rec.details["clause"] = "nonsingularity";
    rec.witness = B * svd.matrixV().col(R.cols() - 1);
  }
  return rec;
}

CheckRecord check_c1_localization(const QpNepGame& game, const IndexSets& sets,
                                  double tol) {
  return check_c1_localization(game, sets, build_game_jacobian(game).J, tol);
}

std::vector<MatrixXd> i_property_forms(const QpNepGame& game) {
  std::vector<MatrixXd> out;
  for (int k = 0; k < game.num_players(); ++k) {
    const Player& pl = game.players[k];
    MatrixXd Q = MatrixXd::Zero(game.n, game.n);
    Q.middleRows(game.x_offset[k], pl.n_k) =
        pl.P.middleRows(game.x_offset[k], pl.n_k);
    out.push_back(0.5 * (Q + Q.transpose()));
  }
  return out;
}

std::vector<MatrixXd> p_property_forms(const QpNepGame& game) {
  std::vector<MatrixXd> out = i_property_forms(game);
  for (int k = 0; k < game.num_players(); ++k) {
    const int off = game.x_offset[k], nk = game.players[k].n_k;
    out[k].block(off, off, nk, nk) -= 0.5 * game.P_block(k, k);
  }
  return out;
}

namespace {

void copy_result(CheckRecord& rec, const ConePositivityResult& r) {
  rec.verdict = r.verdict;
  rec.witness = r.witness;
  rec.margin = r.margin;
  rec.certificate_method = r.method;
  if (r.best_value) rec.details["best_value"] = double_to_json(*r.best_value);
  if (!r.note.empty()) rec.details["note"] = r.note;
}

}  // namespace

CheckRecord check_i_property(const QpNepGame& game, const IndexSets& sets,
                             const PositivityOptions& opt) {
  CheckRecord rec;
  rec.check_name = "i_property";
  const ConeSpec K = critical_cone(game, sets);
  const int N = game.num_players();
  // Sum of the forms is y'Jy; definiteness on null(E) rules out common zeros.
  const MatrixXd B = null_basis(K.E, opt.tol).B;
  if (B.cols() > 0) {
    const MatrixXd J = build_game_jacobian(game).J;
    MatrixXd S = B.transpose() * (0.5 * (J + J.transpose())) * B;
    S = 0.5 * (S + S.transpose());
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(S, Eigen::EigenvaluesOnly);
    const double lo = es.eigenvalues()(0);
    const double hi = es.eigenvalues()(S.rows() - 1);
    if (lo > opt.tol || hi < -opt.tol) {
      rec.verdict = Verdict::kHolds;
      rec.certificate_method = "jacobian_definite";
      rec.margin = (lo > opt.tol ? lo : -hi) / N;
      return rec;
    }
  }
  copy_result(rec, quad_family_positive_on_cone(i_property_forms(game), K,
                                                FormMode::kZeroSet, opt));
  return rec;
}

CheckRecord check_p_property(const QpNepGame& game, const IndexSets& sets,
                             const PositivityOptions& opt) {
  CheckRecord rec;
  rec.check_name = "p_property";
  const ConeSpec K = critical_cone(game, sets);
  const std::vector<MatrixXd> forms = p_property_forms(game);
  const ConePositivityResult r =
      quad_family_positive_on_cone(forms, K, FormMode::kMax, opt);
  copy_result(rec, r);
  if (r.verdict != Verdict::kUndecided || forms.size() < 2) return rec;
  // max_k phi_k >= (sum_k phi_k) / N.
  MatrixXd sum = MatrixXd::Zero(game.n, game.n);
  for (const MatrixXd& F : forms) sum += F;
  std::optional<ConePositivityResult> s =
      positivity_exact({sum}, K, FormMode::kMax, opt);
  if (!s || s->verdict != Verdict::kHolds)
    s = positivity_grid({sum}, K, FormMode::kMax, opt);
  if (s && s->verdict == Verdict::kHolds) {
    rec.verdict = Verdict::kHolds;
    rec.margin = *s->margin / static_cast<double>(forms.size());
    rec.certificate_method = "sum_form_" + s->method;
  }
  return rec;
}

CheckRecord check_isolated_calmness_exact(const QpNepGame& game,
                                          const IndexSets& sets) {
  CheckRecord rec;
  rec.check_name = "isolated_calmness_exact";
  rec.certificate_method = "branch_lp";
  const int q = sets.total_I2();
  if (q > kMaxWeaklyActive)
    throw GuardError("check_isolated_calmness_exact: " + std::to_string(q) +
                     " weakly active rows exceed the limit of " +
                     std::to_string(kMaxWeaklyActive));
  struct ActRow {
    int player, local;
    bool weak;
  };
  std::vector<ActRow> act;
  for (int k = 0; k < game.num_players(); ++k) {
    std::vector<int> rows = sets.I1[k];
    rows.insert(rows.end(), sets.I2[k].begin(), sets.I2[k].end());
    std::sort(rows.begin(), rows.end());
    for (int i : rows) {
      const bool weak = std::find(sets.I2[k].begin(), sets.I2[k].end(), i) !=
                        sets.I2[k].end();
      act.push_back({k, i, weak});
    }
  }
  const int n = game.n;
  const int a = static_cast<int>(act.size());
  const int dim = n + a;
  const MatrixXd J = build_game_jacobian(game).J;
  MatrixXd Aact = MatrixXd::Zero(a, n);  // row j = a_j embedded
  for (int j = 0; j < a; ++j)
    Aact.block(j, game.x_offset[act[j].player], 1,
               game.players[act[j].player].n_k) =
        game.players[act[j].player].A.row(act[j].local);

  for (long branch = 0; branch < (1L << q); ++branch) {
    std::vector<VectorXd> eq, in;
    // Stationarity: J y + A_act' dlambda = 0.
    for (int r = 0; r < n; ++r) {
      VectorXd row(dim);
      row << J.row(r).transpose(), Aact.col(r);
      eq.push_back(row);
    }
    int w = 0;
    json bits = json::array();
    for (int j = 0; j < a; ++j) {
      VectorXd ar = VectorXd::Zero(dim);
      ar.head(n) = Aact.row(j).transpose();
      VectorXd lr = VectorXd::Zero(dim);
      lr(n + j) = 1.0;
      if (!act[j].weak) {
        eq.push_back(ar);
        continue;
      }
      const bool on_face = !((branch >> w++) & 1L);
      bits.push_back(on_face ? "multiplier_free" : "multiplier_zero");
      if (on_face) {
        eq.push_back(ar);
        in.push_back(-lr);
      } else {
        eq.push_back(lr);
        in.push_back(ar);
      }
    }
    MatrixXd Aeq(static_cast<Eigen::Index>(eq.size()), dim);
    for (size_t r = 0; r < eq.size(); ++r) Aeq.row(r) = eq[r].transpose();
    MatrixXd Ain(static_cast<Eigen::Index>(in.size()), dim);
    for (size_t r = 0; r < in.size(); ++r) Ain.row(r) = in[r].transpose();
    if (auto sol = cone_nonzero_ray(Aeq, Ain)) {
      rec.verdict = Verdict::kFails;
      rec.witness = *sol;
      rec.details["y"] = vector_to_json(sol->head(n));
      rec.details["dlambda"] = vector_to_json(sol->tail(a));
      rec.details["branch"] = branch;
      rec.details["branch_rows"] = bits;
      return rec;
    }
  }
  rec.verdict = Verdict::kHolds;
  rec.details["branches_checked"] = 1L << q;
  rec.details["note"] =
      "for QP data the linearized system equals the KKT system and its "
      "homogeneous solution set is a polyhedral cone";
  return rec;
}

std::vector<const CheckRecord*> StabilityReport::checks() const {
  return {&local_nash,
          &strong_regularity,
          &strong_regularity_sufficient,
          &c1_localization,
          &i_property,
          &p_property,
          &isolated_calmness_exact,
          &isolated_calmness_sufficient,
          &robust_isolated_calmness};
}

StabilityReport analyze(const QpNepGame& game, const Perturbation& p,
                        const KktPoint& point, const AnalyzeOptions& opt) {
  const double res = kkt_residual(game, p, point.x, point.lambda);
  if (res > kTolKkt)
    throw InputError("analyze: point is not a KKT point (residual " +
                     std::to_string(res) + ")");
  StabilityReport rep;
  rep.point = point;
  rep.point.residual = res;
  rep.sets = classify_index_sets(game, p, point, opt.tol_active);
  rep.cq = check_cq(game, rep.sets, opt.tol);
  rep.jacobian = build_game_jacobian(game);
  rep.local_nash =
      check_local_nash(game, p, point, opt.positivity, opt.tol_active);
  rep.strong_regularity = check_critical_face(game, rep.sets, opt.tol);
  rep.strong_regularity_sufficient = check_strong_regularity_sufficient(
      game, rep.sets, opt.alpha_mode, opt.tol);
  rep.c1_localization = check_c1_localization(game, rep.sets, opt.tol);
  rep.i_property = check_i_property(game, rep.sets, opt.positivity);
  rep.p_property = check_p_property(game, rep.sets, opt.positivity);
  rep.isolated_calmness_exact = check_isolated_calmness_exact(game, rep.sets);

  const bool smfcq = rep.cq.all_smfcq();
  const bool convex = rep.cq.all_convex();

  CheckRecord& ics = rep.isolated_calmness_sufficient;
  ics.check_name = "isolated_calmness_sufficient";
  ics.certificate_method = "smfcq_and_i_property";
  if (!smfcq) {
    ics.verdict = Verdict::kFails;
    ics.details["clause"] = "SMFCQ";
  } else if (rep.i_property.verdict == Verdict::kFails) {
    ics.verdict = Verdict::kFails;
    ics.details["clause"] = "i_property";
  } else {
    ics.verdict = rep.i_property.verdict;
    if (ics.verdict == Verdict::kUndecided) ics.details["clause"] = "i_property";
  }
  ics.details["meaning"] =
      "FAILS means the sufficient condition is not met, not that isolated "
      "calmness fails";

  CheckRecord& ric = rep.robust_isolated_calmness;
  ric.check_name = "robust_isolated_calmness";
  if (convex && smfcq && rep.p_property.verdict == Verdict::kHolds) {
    ric.verdict = Verdict::kHolds;
    ric.certificate_method = "convexity_smfcq_p_property";
    ric.margin = rep.p_property.margin;
    ric.details["nearby_kkt_points_are_equilibria"] = true;
  } else if (rep.isolated_calmness_exact.verdict == Verdict::kFails) {
    ric.verdict = Verdict::kFails;
    ric.certificate_method = "isolated_calmness_exact";
    ric.witness = rep.isolated_calmness_exact.witness;
    ric.details["clause"] = "isolated_calmness";
  } else {
    ric.verdict = Verdict::kUndecided;
    ric.certificate_method = "none";
    json missing = json::array();
    if (!convex) missing.push_back("convexity");
    if (!smfcq) missing.push_back("SMFCQ");
    if (rep.p_property.verdict != Verdict::kHolds) missing.push_back("p_property");
    ric.details["unmet"] = missing;
  }
  for (CheckRecord* r :
       {&rep.strong_regularity, &rep.c1_localization,
        &rep.isolated_calmness_exact, &rep.robust_isolated_calmness})
    r->details["scope"] = "full and tilt-only perturbations give the same verdict";
  return rep;
}

}  // namespace nepstab
