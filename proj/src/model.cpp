#include <fstream>
#include <sstream>

#include "nepstab/model.hpp"

namespace nepstab {

using nlohmann::json;

int QpNepGame::num_ineq() const {
  int total = 0;
  for (const Player& p : players) total += p.num_ineq();
  return total;
}

std::vector<Violation> validate_game(const QpNepGame& game) {
  std::vector<Violation> out;
  if (game.players.empty()) {
    out.push_back({-1, "players", "no players"});
    return out;
  }
  int n = 0, m = 0;
  for (const Player& p : game.players) {
    n += p.n_k;
    m += static_cast<int>(p.A.rows());
  }
  if (game.n != n)
    out.push_back({-1, "n", "total dimension " + std::to_string(game.n) +
                                " differs from the sum " + std::to_string(n)});
  if (game.m != m)
    out.push_back({-1, "m", "total constraint count " + std::to_string(game.m) +
                                " differs from the sum " + std::to_string(m)});
  const int N = game.num_players();
  if (static_cast<int>(game.x_offset.size()) != N ||
      static_cast<int>(game.c_offset.size()) != N)
    out.push_back({-1, "offsets", "block offsets missing"});
  for (int k = 0; k < N; ++k) {
    const Player& p = game.players[k];
    auto bad = [&](const std::string& field, const std::string& msg) {
      out.push_back({k, field, msg});
    };
    if (p.n_k <= 0) bad("n", "strategy dimension must be positive");
    if (p.P.rows() != n || p.P.cols() != n) {
      bad("P", "expected a " + std::to_string(n) + "x" + std::to_string(n) +
                   " matrix, got " + std::to_string(p.P.rows()) + "x" +
                   std::to_string(p.P.cols()));
    } else if (p.P.size() > 0 && !(p.P - p.P.transpose()).isZero(0.0)) {
      bad("P", "matrix is not symmetric");
    }
    if (p.c.size() != n)
      bad("c", "expected length " + std::to_string(n) + ", got " +
                   std::to_string(p.c.size()));
    if (p.A.rows() > 0 && p.A.cols() != p.n_k)
      bad("A", "expected " + std::to_string(p.n_k) + " columns, got " +
                   std::to_string(p.A.cols()));
    if (p.b.size() != p.A.rows())
      bad("b", "expected length " + std::to_string(p.A.rows()) + ", got " +
                   std::to_string(p.b.size()));
    if (p.num_eq < 0) bad("num_eq", "equality count is negative");
    if (p.num_eq > p.A.rows())
      bad("num_eq", "equality count exceeds constraint count");
    if (!p.P.allFinite() || !p.c.allFinite() || !p.A.allFinite() ||
        !p.b.allFinite())
      bad("data", "non-finite entry");
  }
  return out;
}

QpNepGame make_game(std::vector<Player> players) {
  QpNepGame g;
  g.players = std::move(players);
  int n = 0, m = 0;
  for (const Player& p : g.players) {
    g.x_offset.push_back(n);
    g.c_offset.push_back(m);
    n += p.n_k;
    m += static_cast<int>(p.A.rows());
  }
  g.n = n;
  g.m = m;
  for (int k = 0; k < g.num_players(); ++k) {
    Player& p = g.players[k];
    if (p.A.rows() == 0) p.A.resize(0, p.n_k);
    if (p.P.rows() == n && p.P.cols() == n && n > 0) {
      const double asym = (p.P - p.P.transpose()).cwiseAbs().maxCoeff();
      if (asym > 1e-12)
        g.warnings.push_back("player " + std::to_string(k) +
                             ": P symmetrized (asymmetry " +
                             std::to_string(asym) + ")");
      MatrixXd S = 0.5 * (p.P + p.P.transpose());
      p.P = S;
    }
  }
  auto violations = validate_game(g);
  if (!violations.empty()) {
    const Violation& v = violations.front();
    std::string where =
        v.player >= 0 ? "player " + std::to_string(v.player) + ", " : "";
    throw InputError(where + "field " + v.field + ": " + v.message);
  }
  return g;
}

namespace {

std::string where(int k, const std::string& field) {
  if (k < 0) return "direction, field " + field;
  return "player " + std::to_string(k) + ", field " + field;
}

VectorXd read_vector(const json& j, int k, const std::string& field) {
  if (!j.is_array()) throw InputError(where(k, field) + ": expected an array");
  VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number())
      throw InputError(where(k, field) + ": expected numbers");
    v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  }
  return v;
}

MatrixXd read_matrix(const json& j, int k, const std::string& field,
                     Eigen::Index cols_if_empty) {
  if (!j.is_array()) throw InputError(where(k, field) + ": expected an array");
  if (j.empty()) return MatrixXd(0, cols_if_empty);
  const size_t cols = j[0].is_array() ? j[0].size() : 0;
  MatrixXd M(static_cast<Eigen::Index>(j.size()),
             static_cast<Eigen::Index>(cols));
  for (size_t r = 0; r < j.size(); ++r) {
    if (!j[r].is_array() || j[r].size() != cols)
      throw InputError(where(k, field) + ": rows must be arrays of equal length");
    for (size_t c = 0; c < cols; ++c) {
      if (!j[r][c].is_number())
        throw InputError(where(k, field) + ": expected numbers");
      M(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          j[r][c].get<double>();
    }
  }
  return M;
}

json read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw InputError("parse error in " + path + ": " + e.what());
  }
}

}  // namespace

QpNepGame game_from_json(const json& doc) {
  if (!doc.is_object() || !doc.contains("players"))
    throw InputError("missing field \"players\"");
  const json& pl = doc["players"];
  if (!pl.is_array()) throw InputError("field \"players\" must be an array");
  if (pl.empty()) throw InputError("no players");
  std::vector<Player> players;
  for (size_t kk = 0; kk < pl.size(); ++kk) {
    const int k = static_cast<int>(kk);
    const json& r = pl[kk];
    if (!r.is_object()) throw InputError(where(k, "*") + ": expected an object");
    for (const char* f : {"n", "P"})
      if (!r.contains(f)) throw InputError(where(k, f) + ": missing");
    Player p;
    if (!r["n"].is_number_integer())
      throw InputError(where(k, "n") + ": expected an integer");
    p.n_k = r["n"].get<int>();
    if (p.n_k <= 0)
      throw InputError(where(k, "n") + ": strategy dimension must be positive");
    p.P = read_matrix(r["P"], k, "P", 0);
    p.c = r.contains("c") ? read_vector(r["c"], k, "c")
                          : VectorXd::Zero(p.P.rows());
    p.A = r.contains("A") ? read_matrix(r["A"], k, "A", p.n_k)
                          : MatrixXd(0, p.n_k);
    p.b = r.contains("b") ? read_vector(r["b"], k, "b") : VectorXd(0);
    if (r.contains("num_eq")) {
      if (!r["num_eq"].is_number_integer())
        throw InputError(where(k, "num_eq") + ": expected an integer");
      p.num_eq = r["num_eq"].get<int>();
    }
    players.push_back(std::move(p));
  }
  return make_game(std::move(players));
}

QpNepGame load_game(const std::string& path) {
  return game_from_json(read_file(path));
}

json game_to_json(const QpNepGame& game) {
  json pl = json::array();
  for (const Player& p : game.players) {
    json r;
    r["n"] = p.n_k;
    json P = json::array();
    for (Eigen::Index i = 0; i < p.P.rows(); ++i) {
      json row = json::array();
      for (Eigen::Index j = 0; j < p.P.cols(); ++j) row.push_back(p.P(i, j));
      P.push_back(row);
    }
    r["P"] = P;
    r["c"] = std::vector<double>(p.c.data(), p.c.data() + p.c.size());
    json A = json::array();
    for (Eigen::Index i = 0; i < p.A.rows(); ++i) {
      json row = json::array();
      for (Eigen::Index j = 0; j < p.A.cols(); ++j) row.push_back(p.A(i, j));
      A.push_back(row);
    }
    r["A"] = A;
    r["b"] = std::vector<double>(p.b.data(), p.b.data() + p.b.size());
    r["num_eq"] = p.num_eq;
    pl.push_back(r);
  }
  return json{{"players", pl}};
}

Perturbation zero_perturbation(const QpNepGame& game) {
  return {VectorXd::Zero(game.m), VectorXd::Zero(game.n)};
}

PerturbationDirection direction_from_json(const json& doc,
                                          const QpNepGame& game) {
  if (!doc.is_object()) throw InputError("direction: expected an object");
  PerturbationDirection d;
  d.du = doc.contains("du") ? read_vector(doc["du"], -1, "du")
                            : VectorXd::Zero(game.m);
  d.dv = doc.contains("dv") ? read_vector(doc["dv"], -1, "dv")
                            : VectorXd::Zero(game.n);
  if (d.du.size() != game.m)
    throw InputError("direction field du: expected length " +
                     std::to_string(game.m));
  if (d.dv.size() != game.n)
    throw InputError("direction field dv: expected length " +
                     std::to_string(game.n));
  if ((d.du.size() == 0 || d.du.isZero(0.0)) &&
      (d.dv.size() == 0 || d.dv.isZero(0.0)))
    throw InputError("direction: du and dv are both zero");
  return d;
}

PerturbationDirection load_direction(const std::string& path,
                                     const QpNepGame& game) {
  return direction_from_json(read_file(path), game);
}

Perturbation apply_tilt(const QpNepGame& game, const PerturbationDirection& dir,
                        double t) {
  if (dir.du.size() != game.m || dir.dv.size() != game.n)
    throw InputError("apply_tilt: direction dimensions do not match the game");
  return {t * dir.du, t * dir.dv};
}

double player_objective(const QpNepGame& game, int k, const VectorXd& x,
                        const Perturbation& p) {
  const Player& pl = game.players[k];
  return 0.5 * x.dot(pl.P * x) - pl.c.dot(x) -
         game.block(k, p.v).dot(game.block(k, x));
}

VectorXd player_gradient(const QpNepGame& game, int k, const VectorXd& x,
                         const Perturbation& p) {
  const Player& pl = game.players[k];
  const int off = game.x_offset[k];
  return pl.P.middleRows(off, pl.n_k) * x - pl.c.segment(off, pl.n_k) -
         p.v.segment(off, pl.n_k);
}

}  // namespace nepstab
