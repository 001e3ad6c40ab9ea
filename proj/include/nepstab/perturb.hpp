#pragma once

#include <optional>
#include <string>
#include <vector>

#include "nepstab/kkt.hpp"

namespace nepstab {

struct SweepStep {
  double t = 0;
  std::vector<KktPoint> points;  // inside the window
  std::vector<int> labels;       // branch label per point, filled by detect_branches
  std::vector<Verdict> local_nash;
};

struct SweepResult {
  std::vector<SweepStep> steps;  // ordered by t as given
  double window = 0;
  KktPoint reference;
};

struct CalmnessEstimate {
  std::optional<double> kappa_hat;              // primal distance ratio
  std::optional<double> kappa_hat_primal_dual;  // (x, lambda) distance ratio
  std::vector<bool> existence_profile;          // per step
};

struct Branch {
  int label = 0;
  int side = 0;  // -1 for t < 0, +1 for t > 0
  std::vector<int> steps;
  VectorXd intercept;  // fit of z(t) = intercept + slope t, z = (x, lambda)
  VectorXd slope;
  double fit_residual = 0;
};

struct BranchSummary {
  int branches_negative = 0;
  int branches_positive = 0;
  std::vector<Branch> branches;
  bool kink_at_zero = false;
  bool bifurcation_at_zero = false;
  bool ambiguous = false;
  std::optional<double> kink_relative_gap;
};

/// Half the smallest max-norm distance from the reference to another KKT
/// point of the unperturbed game; 0.5 when the reference is alone.
double default_window(const QpNepGame& game, const KktPoint& reference);

/// Parses "START:STOP:COUNT" into COUNT evenly spaced values.
std::vector<double> parse_t_grid(const std::string& text);

SweepResult sweep(const QpNepGame& game, const PerturbationDirection& dir,
                  const KktPoint& reference, const std::vector<double>& t_grid,
                  double window, const PositivityOptions& opt = {});

CalmnessEstimate estimate_calmness_constant(const SweepResult& sw,
                                            const PerturbationDirection& dir,
                                            const KktPoint& reference);

/// Also writes branch labels into sw.
BranchSummary detect_branches(SweepResult& sw);

}  // namespace nepstab
