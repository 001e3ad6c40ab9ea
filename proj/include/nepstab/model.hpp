#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "nepstab/error.hpp"

namespace nepstab {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// One player's QP: minimize 0.5 x'P x - <c, x> - <v, x_k> over x_k subject
/// to A x_k (=, <=) b + u. Rows [0, num_eq) are equalities.
struct Player {
  int n_k = 0;
  MatrixXd P;
  VectorXd c;
  MatrixXd A;
  VectorXd b;
  int num_eq = 0;

  int m() const { return static_cast<int>(A.rows()); }
  int num_ineq() const { return m() - num_eq; }
};

struct Violation {
  int player = -1;  // -1 for game-level violations
  std::string field;
  std::string message;
};

struct QpNepGame {
  std::vector<Player> players;
  int n = 0;
  int m = 0;
  std::vector<int> x_offset;  // start of x^k inside x
  std::vector<int> c_offset;  // start of player k's rows inside u and lambda
  std::vector<std::string> warnings;

  int num_players() const { return static_cast<int>(players.size()); }
  int num_ineq() const;

  /// Player k's own block of a length-n vector.
  VectorXd block(int k, const VectorXd& x) const {
    return x.segment(x_offset[k], players[k].n_k);
  }
  /// Player k's rows of a length-m vector.
  VectorXd rows(int k, const VectorXd& z) const {
    return z.segment(c_offset[k], players[k].m());
  }
  /// P^k restricted to rows of player k and columns of player i.
  MatrixXd P_block(int k, int i) const {
    return players[k].P.block(x_offset[k], x_offset[i], players[k].n_k,
                              players[i].n_k);
  }
};

/// Checks the structural invariants. Never throws.
std::vector<Violation> validate_game(const QpNepGame& game);

/// Computes offsets, symmetrizes every P and validates. Throws InputError
/// naming the first violation.
QpNepGame make_game(std::vector<Player> players);

QpNepGame game_from_json(const nlohmann::json& doc);
QpNepGame load_game(const std::string& path);
nlohmann::json game_to_json(const QpNepGame& game);

struct Perturbation {
  VectorXd u;  // length m
  VectorXd v;  // length n
};

struct PerturbationDirection {
  VectorXd du;
  VectorXd dv;
};

Perturbation zero_perturbation(const QpNepGame& game);

PerturbationDirection direction_from_json(const nlohmann::json& doc,
                                          const QpNepGame& game);
PerturbationDirection load_direction(const std::string& path,
                                     const QpNepGame& game);

/// (u, v) = (t du, t dv).
Perturbation apply_tilt(const QpNepGame& game, const PerturbationDirection& dir,
                        double t);

double player_objective(const QpNepGame& game, int k, const VectorXd& x,
                        const Perturbation& p);

/// Gradient of player k's objective with respect to x^k.
VectorXd player_gradient(const QpNepGame& game, int k, const VectorXd& x,
                         const Perturbation& p);

}  // namespace nepstab
