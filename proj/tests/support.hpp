#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "nepstab/model.hpp"
#include "nepstab/numerics.hpp"
#include "nepstab/stability.hpp"

namespace nepstab::testing {

std::string data_path(const std::string& name);

class Rand {
 public:
  explicit Rand(std::uint64_t seed) : gen_(seed) {}
  double uniform(double lo, double hi) {
    const double u = static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    return lo + (hi - lo) * u;
  }
  int integer(int lo, int hi) {  // inclusive
    return lo + static_cast<int>(gen_() % static_cast<std::uint64_t>(hi - lo + 1));
  }
  double normal() {
    const double u1 = uniform(1e-300, 1.0), u2 = uniform(0.0, 1.0);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

 private:
  std::mt19937_64 gen_;
};

struct GameShape {
  int max_players = 3;
  int max_nk = 2;
  int max_mk = 2;
  double range = 2.0;
  bool integer_entries = false;
  bool degenerate = false;  // c = b = 0 so the origin is a KKT point
  bool allow_equalities = true;
};

QpNepGame random_game(Rand& rng, const GameShape& shape, int players = 0);

/// Exact minimum of y'Q y over unit vectors of {E y = 0, F y <= 0}, by
/// enumerating faces and the eigenvectors of Q restricted to each face.
/// Returns +inf when the cone is {0}.
double exact_cone_min(const Eigen::MatrixXd& Q, const Eigen::MatrixXd& E,
                      const Eigen::MatrixXd& F, Eigen::VectorXd* argmin = nullptr);

/// KKT residual of a single-player game at x minimized over multiplier
/// supports.
double oracle_residual(const QpNepGame& game, const Eigen::VectorXd& x);

/// Grid scan of [-box, box]^n at the given step, refining local minima of
/// the residual by compass search. Returns refined points with residual below
/// threshold.
std::vector<Eigen::VectorXd> grid_scan_kkt(const QpNepGame& game, double box,
                                           double step, double threshold);

/// Re-checks a FAILS witness by direct substitution into the defining
/// condition. Returns an empty string when the witness is genuine.
std::string revalidate_witness(const QpNepGame& game, const IndexSets& sets,
                               const CheckRecord& rec, double tol = 1e-8);

/// Strong regularity for N = 1 by coherent orientation: LICQ plus
/// det(B_J' P B_J) nonzero with one sign over all faces J of the critical
/// cone. Returns nullopt when some determinant is too close to zero to call.
std::optional<bool> coherent_orientation(const QpNepGame& game,
                                         const IndexSets& sets);

}  // namespace nepstab::testing
