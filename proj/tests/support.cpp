#include "support.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace nepstab::testing {

using Eigen::MatrixXd;
using Eigen::VectorXd;

std::string data_path(const std::string& name) {
  return std::string(NEPSTAB_DATA_DIR) + "/" + name;
}

QpNepGame random_game(Rand& rng, const GameShape& shape, int players) {
  const int N = players > 0 ? players : rng.integer(1, shape.max_players);
  std::vector<int> nk(N), mk(N);
  int n = 0;
  for (int k = 0; k < N; ++k) {
    nk[k] = rng.integer(1, shape.max_nk);
    mk[k] = rng.integer(0, shape.max_mk);
    n += nk[k];
  }
  auto entry = [&]() {
    return shape.integer_entries
               ? static_cast<double>(rng.integer(-static_cast<int>(shape.range),
                                                 static_cast<int>(shape.range)))
               : rng.uniform(-shape.range, shape.range);
  };
  std::vector<Player> pl;
  for (int k = 0; k < N; ++k) {
    Player p;
    p.n_k = nk[k];
    p.P.resize(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j <= i; ++j) p.P(i, j) = p.P(j, i) = entry();
    p.c = VectorXd::Zero(n);
    if (!shape.degenerate)
      for (int i = 0; i < n; ++i) p.c(i) = entry();
    p.A.resize(mk[k], nk[k]);
    for (int i = 0; i < mk[k]; ++i)
      for (int j = 0; j < nk[k]; ++j) p.A(i, j) = entry();
    p.b = VectorXd::Zero(mk[k]);
    if (!shape.degenerate)
      for (int i = 0; i < mk[k]; ++i) p.b(i) = entry();
    p.num_eq = shape.allow_equalities && mk[k] > 0 && rng.integer(0, 3) == 0 ? 1 : 0;
    pl.push_back(std::move(p));
  }
  return make_game(std::move(pl));
}

namespace {

MatrixXd null_space(const MatrixXd& M, int n) {
  if (M.rows() == 0) return MatrixXd::Identity(n, n);
  Eigen::FullPivLU<MatrixXd> lu(M);
  lu.setThreshold(1e-10);
  MatrixXd K = lu.kernel();
  if (lu.rank() == n) return MatrixXd(n, 0);
  Eigen::HouseholderQR<MatrixXd> qr(K);
  return qr.householderQ() * MatrixXd::Identity(n, K.cols());
}

}  // namespace

double exact_cone_min(const MatrixXd& Q, const MatrixXd& E, const MatrixXd& F,
                      VectorXd* argmin) {
  const int n = static_cast<int>(Q.rows());
  const int p = static_cast<int>(F.rows());
  double best = std::numeric_limits<double>::infinity();
  for (long mask = 0; mask < (1L << p); ++mask) {
    MatrixXd M(E.rows() + __builtin_popcountl(mask), n);
    M.topRows(E.rows()) = E;
    int r = static_cast<int>(E.rows());
    for (int i = 0; i < p; ++i)
      if (mask & (1L << i)) M.row(r++) = F.row(i);
    const MatrixXd B = null_space(M, n);
    if (B.cols() == 0) continue;
    MatrixXd R = B.transpose() * Q * B;
    R = 0.5 * (R + R.transpose());
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(R);
    for (int j = 0; j < R.cols(); ++j) {
      for (double s : {1.0, -1.0}) {
        VectorXd y = s * B * es.eigenvectors().col(j);
        y.normalize();
        if (E.rows() && (E * y).cwiseAbs().maxCoeff() > 1e-9) continue;
        if (p && (F * y).maxCoeff() > 1e-9) continue;
        const double v = y.dot(Q * y);
        if (v < best) {
          best = v;
          if (argmin) *argmin = y;
        }
      }
    }
  }
  return best;
}

double oracle_residual(const QpNepGame& game, const VectorXd& x) {
  const Player& pl = game.players[0];
  const VectorXd g = pl.P * x - pl.c;
  const int m = pl.m();
  double best = std::numeric_limits<double>::infinity();
  for (long mask = 0; mask < (1L << m); ++mask) {
    if (mask & ((1L << pl.num_eq) - 1)) continue;
    // Rows with a free multiplier: equalities plus the support.
    std::vector<int> rows;
    for (int i = 0; i < m; ++i)
      if (i < pl.num_eq || (mask & (1L << i))) rows.push_back(i);
    VectorXd lam = VectorXd::Zero(m);
    if (!rows.empty()) {
      MatrixXd At(x.size(), static_cast<Eigen::Index>(rows.size()));
      for (size_t j = 0; j < rows.size(); ++j) At.col(j) = pl.A.row(rows[j]).transpose();
      VectorXd l = At.colPivHouseholderQr().solve(-g);
      for (size_t j = 0; j < rows.size(); ++j) lam(rows[j]) = l(j);
    }
    double r = m ? (g + pl.A.transpose() * lam).cwiseAbs().maxCoeff()
                 : g.cwiseAbs().maxCoeff();
    for (int i = 0; i < m; ++i) {
      const double h = pl.A.row(i).dot(x) - pl.b(i);
      if (i < pl.num_eq) {
        r = std::max(r, std::abs(h));
      } else {
        r = std::max({r, h, -lam(i), std::abs(lam(i) * h)});
      }
    }
    best = std::min(best, r);
  }
  return best;
}

std::vector<VectorXd> grid_scan_kkt(const QpNepGame& game, double box,
                                    double step, double threshold) {
  const int n = game.n;
  const long cnt = static_cast<long>(std::floor(2 * box / step)) + 1;
  auto coord = [&](long i) { return -box + step * static_cast<double>(i); };
  std::vector<double> vals;
  long total = 1;
  for (int d = 0; d < n; ++d) total *= cnt;
  vals.resize(static_cast<size_t>(total));
  auto point = [&](long id) {
    VectorXd x(n);
    for (int d = 0; d < n; ++d) {
      x(d) = coord(id % cnt);
      id /= cnt;
    }
    return x;
  };
  for (long id = 0; id < total; ++id) vals[id] = oracle_residual(game, point(id));

  std::vector<VectorXd> found;
  for (long id = 0; id < total; ++id) {
    if (vals[id] > 0.1) continue;
    // Keep local minima over the neighbor stencil.
    bool local_min = true;
    long stride = 1;
    long rem = id;
    for (int d = 0; d < n && local_min; ++d) {
      const long c = rem % cnt;
      rem /= cnt;
      if (c > 0 && vals[id - stride] < vals[id]) local_min = false;
      if (c + 1 < cnt && vals[id + stride] < vals[id]) local_min = false;
      stride *= cnt;
    }
    if (!local_min) continue;
    VectorXd x = point(id);
    double r = vals[id];
    double h = step;
    for (int it = 0; it < 4000 && h > 1e-12; ++it) {
      bool improved = false;
      for (int d = 0; d < n; ++d)
        for (double s : {1.0, -1.0}) {
          VectorXd y = x;
          y(d) += s * h;
          const double ry = oracle_residual(game, y);
          if (ry < r) {
            x = y;
            r = ry;
            improved = true;
          }
        }
      if (!improved) h *= 0.5;
    }
    if (r < threshold) found.push_back(x);
  }
  return found;
}

}  // namespace nepstab::testing

namespace nepstab::testing {

namespace {

MatrixXd embed(const QpNepGame& game, const std::vector<std::vector<int>>& sel) {
  int count = 0;
  for (const auto& s : sel) count += static_cast<int>(s.size());
  MatrixXd out = MatrixXd::Zero(count, game.n);
  int r = 0;
  for (int k = 0; k < game.num_players(); ++k)
    for (int i : sel[k])
      out.block(r++, game.x_offset[k], 1, game.players[k].n_k) = game.players[k].A.row(i);
  return out;
}

std::vector<std::vector<int>> lists(const nlohmann::json& j) {
  std::vector<std::vector<int>> out;
  for (const auto& s : j) out.push_back(s.get<std::vector<int>>());
  return out;
}

std::vector<std::vector<int>> active(const IndexSets& sets) {
  std::vector<std::vector<int>> out = sets.I1;
  for (std::size_t k = 0; k < out.size(); ++k) {
    out[k].insert(out[k].end(), sets.I2[k].begin(), sets.I2[k].end());
    std::sort(out[k].begin(), out[k].end());
  }
  return out;
}

double max_abs(const VectorXd& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }
double max_of(const VectorXd& v) { return v.size() ? v.maxCoeff() : -INFINITY; }

// Distance from v to the column space of M.
double range_residual(const MatrixXd& M, const VectorXd& v) {
  if (M.cols() == 0) return max_abs(v);
  const VectorXd c = M.colPivHouseholderQr().solve(v);
  return max_abs(M * c - v);
}

}  // namespace

std::string revalidate_witness(const QpNepGame& game, const IndexSets& sets,
                               const CheckRecord& rec, double tol) {
  if (!rec.fails()) return {};
  const std::string clause = rec.details.value("clause", std::string());
  // Composite verdicts carry no witness of their own.
  if (rec.check_name == "isolated_calmness_sufficient" ||
      rec.check_name == "robust_isolated_calmness")
    return {};
  if (clause == "SCSC") {
    for (const auto& weak : sets.I2)
      if (!weak.empty()) return {};
    return "SCSC clause without weakly active rows";
  }
  if (!rec.witness) return rec.check_name + ": FAILS without witness";
  const VectorXd w = *rec.witness;
  const MatrixXd J = build_game_jacobian(game).J;

  if (clause == "LICQ") {
    const int k = rec.details.at("player").get<int>();
    const MatrixXd A = rows_of(game.players[k], rec.details.at("active_rows").get<std::vector<int>>());
    if (max_abs(A.transpose() * w) > tol || w.norm() < 0.5) return "LICQ witness";
    return {};
  }
  if (rec.check_name == "strong_regularity") {
    const Partition part{lists(rec.details.at("partition").at("J1")),
                         lists(rec.details.at("partition").at("J2")),
                         lists(rec.details.at("partition").at("J3"))};
    const MatrixXd E = embed(game, part.J1), F = embed(game, part.J2);
    const VectorXd mu = vector_from_json(rec.details.at("mu"));
    const VectorXd nu = vector_from_json(rec.details.at("nu"));
    if (max_abs(w) < 0.5) return "critical face witness is zero";
    if (max_abs(E * w) > tol || max_of(F * w) > tol) return "critical face witness outside K";
    if (nu.size() && nu.minCoeff() < -tol) return "critical face multiplier negative";
    const VectorXd r = J.transpose() * w - E.transpose() * mu - F.transpose() * nu;
    if (max_abs(r) > tol) return "critical face witness image outside the polar cone";
    return {};
  }
  if (rec.check_name == "c1_localization") {
    const MatrixXd A = embed(game, sets.I1);
    if (max_abs(A * w) > tol || w.norm() < 0.5) return "c1 witness outside M";
    if (range_residual(A.transpose(), J * w) > tol) return "c1 witness image not orthogonal to M";
    return {};
  }
  if (rec.check_name == "p_property" || rec.check_name == "i_property") {
    const VectorXd y = w / w.norm();
    const ConeSpec K = critical_cone(game, sets);
    if (!K.contains(y, tol)) return rec.check_name + " witness outside the cone";
    if (rec.check_name == "p_property") {
      if (family_value(p_property_forms(game), y, FormMode::kMax) >= tol)
        return "p_property witness not a violation";
    } else {
      for (const MatrixXd& Q : i_property_forms(game))
        if (std::abs(y.dot(Q * y)) > tol) return "i_property witness not a common zero";
    }
    return {};
  }
  if (rec.check_name == "isolated_calmness_exact") {
    const VectorXd y = vector_from_json(rec.details.at("y"));
    const VectorXd dl = vector_from_json(rec.details.at("dlambda"));
    const auto act = active(sets);
    const MatrixXd A = embed(game, act);
    if (std::max(max_abs(y), max_abs(dl)) < 0.5) return "calmness witness is zero";
    if (max_abs(J * y + A.transpose() * dl) > tol) return "calmness stationarity";
    int j = 0;
    for (int k = 0; k < game.num_players(); ++k)
      for (int i : act[k]) {
        const double ay = game.players[k].A.row(i).dot(y.segment(game.x_offset[k], game.players[k].n_k));
        const bool weak = std::find(sets.I2[k].begin(), sets.I2[k].end(), i) != sets.I2[k].end();
        if (!weak && std::abs(ay) > tol) return "calmness strongly active row";
        if (weak) {
          const bool ok = (std::abs(ay) <= tol && dl(j) >= -tol) ||
                          (std::abs(dl(j)) <= tol && ay <= tol);
          if (!ok) return "calmness complementarity";
        }
        ++j;
      }
    return {};
  }
  if (rec.check_name == "local_nash" || rec.check_name == "ssosc") {
    const int k = rec.details.at("player").get<int>();
    const VectorXd y = w / w.norm();
    if (y.size() != game.players[k].n_k) return "second-order witness size";
    if (y.dot(game.P_block(k, k) * y) > tol) return "second-order witness not negative";
    return {};
  }
  return {};
}

std::optional<bool> coherent_orientation(const QpNepGame& game, const IndexSets& sets) {
  const Player& pl = game.players[0];
  const auto act = active(sets);
  if (rank(rows_of(pl, act[0])) < static_cast<int>(act[0].size())) return false;
  const MatrixXd P = game.players[0].P;
  const std::vector<int>& weak = sets.I2[0];
  int sign = 0;
  for (long mask = 0; mask < (1L << weak.size()); ++mask) {
    std::vector<int> rows = sets.I1[0];
    for (std::size_t i = 0; i < weak.size(); ++i)
      if (mask & (1L << i)) rows.push_back(weak[i]);
    const MatrixXd A = rows_of(pl, rows);
    MatrixXd B;
    if (A.rows() == 0) {
      B = MatrixXd::Identity(game.n, game.n);
    } else {
      const MatrixXd K = Eigen::FullPivLU<MatrixXd>(A).kernel();
      if (K.cols() == 1 && K.norm() == 0) {
        B.resize(game.n, 0);
      } else {
        B = Eigen::HouseholderQR<MatrixXd>(K).householderQ() *
            MatrixXd::Identity(game.n, K.cols());
      }
    }
    const double det = B.cols() ? (B.transpose() * P * B).determinant() : 1.0;
    if (std::abs(det) < 1e-8) return std::nullopt;
    const int s = det > 0 ? 1 : -1;
    if (sign == 0) sign = s;
    if (s != sign) return false;
  }
  return true;
}

}  // namespace nepstab::testing
