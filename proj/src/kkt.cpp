#include <algorithm>
#include <cmath>
#include <limits>

#include "nepstab/kkt.hpp"

namespace nepstab {

int IndexSets::total_I2() const {
  int t = 0;
  for (const auto& s : I2) t += static_cast<int>(s.size());
  return t;
}

MatrixXd rows_of(const Player& player, const std::vector<int>& idx) {
  MatrixXd out(static_cast<Eigen::Index>(idx.size()), player.n_k);
  for (size_t r = 0; r < idx.size(); ++r) out.row(r) = player.A.row(idx[r]);
  return out;
}

double kkt_residual(const QpNepGame& game, const Perturbation& p,
                    const VectorXd& x, const VectorXd& lambda) {
  double res = 0;
  for (int k = 0; k < game.num_players(); ++k) {
    const Player& pl = game.players[k];
    const VectorXd lk = game.rows(k, lambda);
    VectorXd grad = player_gradient(game, k, x, p);
    if (pl.m() > 0) grad += pl.A.transpose() * lk;
    if (grad.size() > 0) res = std::max(res, grad.cwiseAbs().maxCoeff());
    const VectorXd xk = game.block(k, x);
    const VectorXd uk = game.rows(k, p.u);
    for (int i = 0; i < pl.m(); ++i) {
      const double g = pl.A.row(i).dot(xk) - pl.b(i) - uk(i);
      if (i < pl.num_eq) {
        res = std::max(res, std::abs(g));
      } else {
        res = std::max(res, std::max(0.0, g));
        res = std::max(res, std::max(0.0, -lk(i)));
        res = std::max(res, std::abs(lk(i) * g));
      }
    }
  }
  return res;
}

namespace {

struct Row {
  int player;
  int local;
  int global;  // index into lambda
};

// Block system for a given set of rows treated as equalities: unknowns are
// (x, lambda_rows).
void build_system(const QpNepGame& game, const Perturbation& p,
                  const std::vector<Row>& rows, MatrixXd& K, VectorXd& rhs) {
  const int n = game.n;
  const int r = static_cast<int>(rows.size());
  K = MatrixXd::Zero(n + r, n + r);
  rhs = VectorXd::Zero(n + r);
  for (int k = 0; k < game.num_players(); ++k) {
    const Player& pl = game.players[k];
    const int off = game.x_offset[k];
    K.block(off, 0, pl.n_k, n) = pl.P.middleRows(off, pl.n_k);
    rhs.segment(off, pl.n_k) = pl.c.segment(off, pl.n_k) + p.v.segment(off, pl.n_k);
  }
  for (int j = 0; j < r; ++j) {
    const Row& row = rows[j];
    const Player& pl = game.players[row.player];
    const int off = game.x_offset[row.player];
    K.block(off, n + j, pl.n_k, 1) = pl.A.row(row.local).transpose();
    K.block(n + j, off, 1, pl.n_k) = pl.A.row(row.local);
    rhs(n + j) = pl.b(row.local) + p.u(row.global);
  }
}

double snap(double v) { return std::abs(v) < 1e-13 ? 0.0 : v; }

bool lex_less(const KktPoint& a, const KktPoint& b) {
  for (Eigen::Index i = 0; i < a.x.size(); ++i) {
    const double u = snap(a.x(i)), v = snap(b.x(i));
    if (u != v) return u < v;
  }
  for (Eigen::Index i = 0; i < a.lambda.size(); ++i) {
    const double u = snap(a.lambda(i)), v = snap(b.lambda(i));
    if (u != v) return u < v;
  }
  return false;
}

double distance(const KktPoint& a, const KktPoint& b) {
  double d = a.x.size() ? (a.x - b.x).cwiseAbs().maxCoeff() : 0.0;
  if (a.lambda.size())
    d = std::max(d, (a.lambda - b.lambda).cwiseAbs().maxCoeff());
  return d;
}

}  // namespace

std::vector<KktPoint> enumerate_kkt(const QpNepGame& game,
                                    const Perturbation& p, int max_ineq) {
  if (p.u.size() != game.m || p.v.size() != game.n)
    throw InputError("enumerate_kkt: perturbation dimensions do not match");
  std::vector<Row> eq_rows, ineq_rows;
  for (int k = 0; k < game.num_players(); ++k) {
    const Player& pl = game.players[k];
    for (int i = 0; i < pl.m(); ++i) {
      Row row{k, i, game.c_offset[k] + i};
      (i < pl.num_eq ? eq_rows : ineq_rows).push_back(row);
    }
  }
  const int q = static_cast<int>(ineq_rows.size());
  if (q > max_ineq)
    throw GuardError("enumerate_kkt: " + std::to_string(q) +
                     " inequalities exceed the limit of " +
                     std::to_string(max_ineq));

  const int n = game.n;
  std::vector<KktPoint> found;
  std::vector<unsigned long> flat_masks;  // masks whose solution set is not a point

  for (unsigned long mask = 0; mask < (1UL << q); ++mask) {
    std::vector<Row> rows = eq_rows;
    std::vector<int> active;
    for (int j = 0; j < q; ++j)
      if (mask & (1UL << j)) {
        rows.push_back(ineq_rows[j]);
        active.push_back(ineq_rows[j].global);
      }
    // Rows are kept player-ordered so lambda blocks line up.
    std::stable_sort(rows.begin(), rows.end(),
                     [](const Row& a, const Row& b) { return a.global < b.global; });
    MatrixXd K;
    VectorXd rhs;
    build_system(game, p, rows, K, rhs);
    const int dim = static_cast<int>(K.rows());
    const int r = static_cast<int>(rows.size());

    // Bounds: lambda >= 0 on active inequalities, feasibility on the rest.
    auto inequality_block = [&](MatrixXd& Ain, VectorXd& bin) {
      std::vector<Eigen::VectorXd> arows;
      std::vector<double> brows;
      for (int j = 0; j < r; ++j) {
        const Player& pl = game.players[rows[j].player];
        if (rows[j].local < pl.num_eq) continue;
        VectorXd a = VectorXd::Zero(dim);
        a(n + j) = -1.0;
        arows.push_back(a);
        brows.push_back(0.0);
      }
      for (int j = 0; j < q; ++j) {
        if (mask & (1UL << j)) continue;
        const Row& row = ineq_rows[j];
        const Player& pl = game.players[row.player];
        VectorXd a = VectorXd::Zero(dim);
        a.segment(game.x_offset[row.player], pl.n_k) =
            pl.A.row(row.local).transpose();
        arows.push_back(a);
        brows.push_back(pl.b(row.local) + p.u(row.global));
      }
      Ain.resize(static_cast<Eigen::Index>(arows.size()), dim);
      bin.resize(static_cast<Eigen::Index>(arows.size()));
      for (size_t i = 0; i < arows.size(); ++i) {
        Ain.row(i) = arows[i].transpose();
        bin(i) = brows[i];
      }
    };

    VectorXd z;
    Eigen::CompleteOrthogonalDecomposition<MatrixXd> cod(K);
    cod.setThreshold(1e-11);
    if (dim == 0) {
      z = VectorXd(0);
    } else if (cod.rank() == dim) {
      z = cod.solve(rhs);
      MatrixXd Ain;
      VectorXd bin;
      inequality_block(Ain, bin);
      if (Ain.rows() > 0 && (Ain * z - bin).maxCoeff() > kTolKkt) continue;
    } else {
      VectorXd zl = cod.solve(rhs);
      const double scale = std::max(1.0, rhs.cwiseAbs().maxCoeff());
      if ((K * zl - rhs).cwiseAbs().maxCoeff() > 1e-9 * scale) continue;
      MatrixXd Ain;
      VectorXd bin;
      inequality_block(Ain, bin);
      auto feas = lp_find_feasible(K, rhs, Ain, bin);
      if (!feas) continue;
      z = *feas;
      // The feasible set is convex; it is a single point iff every
      // coordinate has zero range over it.
      bool single = true;
      for (int i = 0; i < dim && single; ++i) {
        VectorXd c = VectorXd::Zero(dim);
        c(i) = 1.0;
        LpResult lo = solve_lp(c, K, rhs, Ain, bin);
        LpResult hi = solve_lp(-c, K, rhs, Ain, bin);
        if (lo.status != LpStatus::kOptimal || hi.status != LpStatus::kOptimal ||
            hi.x(i) - lo.x(i) > 1e-9 * std::max(1.0, std::abs(z(i))))
          single = false;
      }
      if (!single) flat_masks.push_back(mask);
    }

    KktPoint pt;
    pt.x = z.head(n);
    pt.lambda = VectorXd::Zero(game.m);
    for (int j = 0; j < r; ++j) {
      double lam = z(n + j);
      const Player& pl = game.players[rows[j].player];
      if (rows[j].local >= pl.num_eq) {
        if (lam < -kTolKkt) goto next_mask;
        lam = std::max(lam, 0.0);
      }
      pt.lambda(rows[j].global) = lam;
    }
    pt.active_set = active;
    pt.residual = kkt_residual(game, p, pt.x, pt.lambda);
    if (pt.residual > kTolKkt) continue;
    {
      bool dup = false;
      for (const KktPoint& f : found)
        if (distance(f, pt) <= kDedupRadius) {
          dup = true;
          break;
        }
      if (!dup) found.push_back(pt);
    }
  next_mask:;
  }

  // A point lying in the solution polyhedron of a flat mask is not isolated.
  for (KktPoint& pt : found) {
    for (unsigned long mask : flat_masks) {
      bool member = true;
      for (int j = 0; j < q && member; ++j) {
        const Row& row = ineq_rows[j];
        const Player& pl = game.players[row.player];
        if (mask & (1UL << j)) {
          const double slack = pl.b(row.local) + p.u(row.global) -
                               pl.A.row(row.local).dot(game.block(row.player, pt.x));
          if (std::abs(slack) > kTolActive) member = false;
        } else if (std::abs(pt.lambda(row.global)) > kTolActive) {
          member = false;
        }
      }
      if (member) {
        pt.non_isolated = true;
        break;
      }
    }
  }
  std::sort(found.begin(), found.end(), lex_less);
  return found;
}

IndexSets classify_index_sets(const QpNepGame& game, const Perturbation& p,
                              const KktPoint& point, double tol_active) {
  IndexSets s;
  s.tol_active = tol_active;
  const int N = game.num_players();
  s.I1.resize(N);
  s.I2.resize(N);
  s.I3.resize(N);
  for (int k = 0; k < N; ++k) {
    const Player& pl = game.players[k];
    const VectorXd xk = game.block(k, point.x);
    for (int i = 0; i < pl.m(); ++i) {
      if (i < pl.num_eq) {
        s.I1[k].push_back(i);
        continue;
      }
      const int gi = game.c_offset[k] + i;
      const double slack = pl.b(i) + p.u(gi) - pl.A.row(i).dot(xk);
      const double lam = point.lambda(gi);
      const bool tight = slack <= tol_active;
      if (lam > tol_active) {
        if (!tight)
          throw InputError("classify_index_sets: player " + std::to_string(k) +
                           " row " + std::to_string(i) +
                           " has a positive multiplier and positive slack");
        s.I1[k].push_back(i);
      } else if (tight) {
        s.I2[k].push_back(i);
      } else {
        s.I3[k].push_back(i);
      }
    }
  }
  return s;
}

CheckRecord check_local_nash(const QpNepGame& game, const Perturbation& p,
                             const KktPoint& point, const PositivityOptions& opt,
                             double tol_active) {
  CheckRecord rec;
  rec.check_name = "local_nash";
  const IndexSets sets = classify_index_sets(game, p, point, tol_active);
  nlohmann::json players = nlohmann::json::array();
  bool undecided = false;
  for (int k = 0; k < game.num_players(); ++k) {
    const Player& pl = game.players[k];
    const MatrixXd Pkk = game.P_block(k, k);
    const double scale = std::max(1.0, Pkk.cwiseAbs().maxCoeff());
    const double lo = sym_eig_min(Pkk);
    nlohmann::json info{{"player", k}, {"min_eig", double_to_json(lo)}};
    if (lo >= -opt.tol * scale) {
      info["status"] = "convex";
      players.push_back(info);
      continue;
    }
    const ConeSpec cone = ConeSpec::make(rows_of(pl, sets.I1[k]),
                                         rows_of(pl, sets.I2[k]), pl.n_k);
    const ConePositivityResult r =
        quad_family_positive_on_cone({Pkk}, cone, FormMode::kMax, opt);
    info["sosc"] = to_string(r.verdict);
    info["method"] = r.method;
    players.push_back(info);
    if (r.verdict == Verdict::kHolds) continue;
    if (r.verdict == Verdict::kFails && r.witness &&
        r.witness->dot(Pkk * *r.witness) < -opt.tol * scale) {
      rec.verdict = Verdict::kFails;
      rec.witness = *r.witness;
      rec.certificate_method = "sosc_" + r.method;
      rec.details["player"] = k;
      rec.details["players"] = players;
      return rec;
    }
    undecided = true;
  }
  rec.details["players"] = players;
  rec.verdict = undecided ? Verdict::kUndecided : Verdict::kHolds;
  rec.certificate_method = "convexity_or_sosc";
  return rec;
}

}  // namespace nepstab
