#include <doctest.h>

#include <cmath>

#include "nepstab/perturb.hpp"
#include "nepstab/stability.hpp"
#include "support.hpp"

using namespace nepstab;
using nepstab::testing::data_path;
using nepstab::testing::Rand;

namespace {

struct Setup {
  QpNepGame game;
  PerturbationDirection dir;
  KktPoint ref;
};

Setup setup(const std::string& name, int ref_index = 0) {
  Setup s;
  s.game = load_game(data_path(name + ".json"));
  s.dir = load_direction(data_path(name + ".dir.json"), s.game);
  s.ref = enumerate_kkt(s.game, zero_perturbation(s.game)).at(ref_index);
  return s;
}

// EX61 has two KKT points at zero; the reference is (0, 0, -1) with lambda (0, 1).
Setup ex61() { return setup("EX61", 1); }

VectorXd z_of(const KktPoint& p) {
  VectorXd z(p.x.size() + p.lambda.size());
  z << p.x, p.lambda;
  return z;
}

VectorXd vec(std::initializer_list<double> v) {
  return Eigen::Map<const VectorXd>(v.begin(), v.size());
}

}  // namespace

TEST_CASE("parse_t_grid") {
  const auto g = parse_t_grid("-0.1:0.1:5");
  REQUIRE(g.size() == 5);
  CHECK(g[0] == doctest::Approx(-0.1));
  CHECK(g[2] == 0.0);
  CHECK(g[4] == doctest::Approx(0.1));
  CHECK(parse_t_grid("0.5:0.5:1") == std::vector<double>{0.5});
  CHECK_THROWS_AS(parse_t_grid("0:1"), InputError);
  CHECK_THROWS_AS(parse_t_grid("a:1:3"), InputError);
  CHECK_THROWS_AS(parse_t_grid("0:1:0"), InputError);
}

TEST_CASE("default_window") {
  const Setup s61 = ex61();
  CHECK((s61.ref.x - vec({0, 0, -1})).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(default_window(s61.game, s61.ref) == doctest::Approx(0.5));
  const Setup s62 = setup("EX62");
  CHECK(default_window(s62.game, s62.ref) == 0.5);
}

TEST_CASE("sweep on EX61") {
  const Setup s = ex61();
  const SweepResult sw = sweep(s.game, s.dir, s.ref, {-0.1, 0.1}, 0.5);
  REQUIRE(sw.steps.size() == 2);
  REQUIRE(sw.steps[0].points.size() == 1);
  REQUIRE(sw.steps[1].points.size() == 1);
  CHECK((z_of(sw.steps[0].points[0]) - vec({0, 0, -1, 0.1, 1})).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((z_of(sw.steps[1].points[0]) - vec({-0.1, 0, -1.1, 0, 1.1})).cwiseAbs().maxCoeff() <
        1e-12);
}

TEST_CASE("sweep on EX31 and EX32") {
  const QpNepGame g31 = load_game(data_path("EX31.json"));
  const PerturbationDirection d31 = load_direction(data_path("EX31.dir.json"), g31);
  KktPoint origin;
  origin.x = VectorXd::Zero(2);
  origin.lambda = VectorXd::Zero(2);
  const SweepResult sw31 = sweep(g31, d31, origin, {0.1}, 0.5);
  CHECK(sw31.steps[0].points.empty());

  const Setup s32 = setup("EX32");
  const SweepResult sw32 = sweep(s32.game, s32.dir, s32.ref, {-0.3, 0.05, 0.3}, 0.5);
  for (const auto& st : sw32.steps) {
    REQUIRE(st.points.size() == 1);
    CHECK((st.points[0].x - st.t * vec({-1, 1, -1})).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("estimate_calmness_constant") {
  const Setup s62 = setup("EX62");
  // At |t| = 0.1 the branches reach 0.7 from the reference, so widen the window.
  const SweepResult sw = sweep(s62.game, s62.dir, s62.ref, {-0.1, -0.01, 0.01, 0.1}, 1.0);
  const CalmnessEstimate e = estimate_calmness_constant(sw, s62.dir, s62.ref);
  REQUIRE(e.kappa_hat);
  CHECK(*e.kappa_hat == doctest::Approx(3.0).epsilon(1e-10));
  REQUIRE(e.kappa_hat_primal_dual);
  CHECK(*e.kappa_hat_primal_dual == doctest::Approx(3.5).epsilon(1e-10));
  CHECK(e.existence_profile == std::vector<bool>{true, true, true, true});

  const Setup s32 = setup("EX32");
  const SweepResult sw32 = sweep(s32.game, s32.dir, s32.ref, {-0.2, 0.1}, 0.5);
  const CalmnessEstimate e32 = estimate_calmness_constant(sw32, s32.dir, s32.ref);
  CHECK(*e32.kappa_hat == doctest::Approx(0.5).epsilon(1e-10));

  // A step at t = 0 contributes nothing.
  const SweepResult sw0 = sweep(s32.game, s32.dir, s32.ref, {0.0}, 0.5);
  const CalmnessEstimate e0 = estimate_calmness_constant(sw0, s32.dir, s32.ref);
  CHECK(e0.existence_profile == std::vector<bool>{true});
  if (e0.kappa_hat) CHECK(*e0.kappa_hat == 0.0);

  const QpNepGame g31 = load_game(data_path("EX31.json"));
  const PerturbationDirection d31 = load_direction(data_path("EX31.dir.json"), g31);
  KktPoint origin;
  origin.x = VectorXd::Zero(2);
  origin.lambda = VectorXd::Zero(2);
  const SweepResult sw31 = sweep(g31, d31, origin, parse_t_grid("0.01:0.1:10"), 0.5);
  const CalmnessEstimate e31 = estimate_calmness_constant(sw31, d31, origin);
  CHECK_FALSE(e31.kappa_hat);
  CHECK(e31.existence_profile == std::vector<bool>(10, false));
}

TEST_CASE("detect_branches") {
  const Setup s62 = setup("EX62");
  SweepResult sw62 = sweep(s62.game, s62.dir, s62.ref, parse_t_grid("-0.1:0.1:41"), 0.5);
  const BranchSummary b62 = detect_branches(sw62);
  CHECK(b62.branches_positive == 3);
  CHECK(b62.branches_negative == 1);
  CHECK(b62.bifurcation_at_zero);
  CHECK_FALSE(b62.ambiguous);
  for (const Branch& br : b62.branches) {
    CHECK(br.fit_residual < 1e-10);
    if (br.side < 0) {
      CHECK((br.slope - vec({2, 1, -4, -7})).cwiseAbs().maxCoeff() < 1e-8);
    }
  }

  const Setup s61 = ex61();
  SweepResult sw61 = sweep(s61.game, s61.dir, s61.ref, parse_t_grid("-0.1:0.1:21"),
                           default_window(s61.game, s61.ref));
  const BranchSummary b61 = detect_branches(sw61);
  CHECK(b61.branches_negative == 1);
  CHECK(b61.branches_positive == 1);
  CHECK(b61.kink_at_zero);

  const Setup s32 = setup("EX32");
  SweepResult sw32 = sweep(s32.game, s32.dir, s32.ref, parse_t_grid("-0.1:0.1:21"), 0.5);
  const BranchSummary b32 = detect_branches(sw32);
  CHECK(b32.branches_negative == 1);
  CHECK(b32.branches_positive == 1);
  CHECK_FALSE(b32.kink_at_zero);
  for (const Branch& br : b32.branches)
    CHECK((br.slope.head(3) - vec({-1, 1, -1})).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("negated grids give identical steps") {
  const Setup s62 = setup("EX62");
  std::vector<double> grid = parse_t_grid("-0.05:0.07:13");
  std::vector<double> twice;
  for (double t : grid) twice.push_back(-(-t));
  const SweepResult a = sweep(s62.game, s62.dir, s62.ref, grid, 0.5);
  const SweepResult b = sweep(s62.game, s62.dir, s62.ref, twice, 0.5);
  REQUIRE(a.steps.size() == b.steps.size());
  for (std::size_t i = 0; i < a.steps.size(); ++i) {
    CHECK(a.steps[i].t == b.steps[i].t);
    REQUIRE(a.steps[i].points.size() == b.steps[i].points.size());
    for (std::size_t j = 0; j < a.steps[i].points.size(); ++j) {
      CHECK(a.steps[i].points[j].x == b.steps[i].points[j].x);
      CHECK(a.steps[i].points[j].lambda == b.steps[i].points[j].lambda);
    }
  }
}

TEST_CASE("stability verdicts predict sweep behaviour on random games") {
  Rand rng(99);
  nepstab::testing::GameShape shape;
  int strong = 0, smooth = 0, robust = 0;
  for (int trial = 0; trial < 80; ++trial) {
    shape.degenerate = trial % 2 == 0;
    const QpNepGame g = nepstab::testing::random_game(rng, shape);
    PerturbationDirection dir{VectorXd(g.m), VectorXd(g.n)};
    for (int i = 0; i < g.m; ++i) dir.du(i) = rng.uniform(-1, 1);
    for (int i = 0; i < g.n; ++i) dir.dv(i) = rng.uniform(-1, 1);
    const Perturbation p0 = zero_perturbation(g);
    for (const auto& ref : enumerate_kkt(g, p0)) {
      if (ref.non_isolated) continue;
      const StabilityReport rep = analyze(g, p0, ref);
      const double window = default_window(g, ref);
      // "Small" t depends on the local rate: probe it at a tiny tilt and
      // shrink the grid so the expected displacement stays far inside the
      // window.
      const SweepResult probe = sweep(g, dir, ref, {-1e-6, 1e-6}, window);
      const CalmnessEstimate pe = estimate_calmness_constant(probe, dir, ref);
      const double rate = pe.kappa_hat_primal_dual.value_or(1.0);
      const double h = 1e-2 / std::max(1.0, rate / (0.1 * window));
      std::vector<double> grid;
      for (int i = -4; i <= 4; ++i) grid.push_back(h * i / 4);
      SweepResult sw = sweep(g, dir, ref, grid, window);
      const CalmnessEstimate est = estimate_calmness_constant(sw, dir, ref);
      if (rep.strong_regularity.holds()) {
        ++strong;
        for (const auto& st : probe.steps) CHECK(st.points.size() == 1);
        for (const auto& st : sw.steps) CHECK(st.points.size() == 1);
        // The estimate on the inner half of the grid bounds the full one.
        const std::vector<double> inner(grid.begin() + 2, grid.end() - 2);
        const SweepResult swi = sweep(g, dir, ref, inner, window);
        const CalmnessEstimate ei = estimate_calmness_constant(swi, dir, ref);
        if (est.kappa_hat && ei.kappa_hat) CHECK(*est.kappa_hat <= 10 * *ei.kappa_hat + 1e-12);
      }
      if (rep.robust_isolated_calmness.holds()) {
        ++robust;
        for (bool b : est.existence_profile) CHECK(b);
        REQUIRE(est.kappa_hat_primal_dual);
        for (const auto& st : sw.steps) {
          const Perturbation p = apply_tilt(g, dir, st.t);
          const double dp = std::max(p.u.size() ? p.u.cwiseAbs().maxCoeff() : 0.0,
                                     p.v.cwiseAbs().maxCoeff());
          for (const auto& pt : st.points) {
            VectorXd dz(g.n + g.m);
            dz << pt.x - ref.x, pt.lambda - ref.lambda;
            CHECK(dz.cwiseAbs().maxCoeff() <= *est.kappa_hat_primal_dual * dp + 1e-12);
          }
        }
      }
      if (rep.c1_localization.holds()) {
        ++smooth;
        const BranchSummary br = detect_branches(sw);
        CHECK(br.branches_negative == 1);
        CHECK(br.branches_positive == 1);
        CHECK_FALSE(br.kink_at_zero);
      }
    }
  }
  CHECK(strong > 10);
  CHECK(smooth > 5);
  CHECK(robust > 3);
}
