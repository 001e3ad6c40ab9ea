#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "nepstab/perturb.hpp"

namespace nepstab {

namespace {

VectorXd stacked(const KktPoint& p) {
  VectorXd z(p.x.size() + p.lambda.size());
  z << p.x, p.lambda;
  return z;
}

double max_norm(const VectorXd& v) {
  return v.size() ? v.cwiseAbs().maxCoeff() : 0.0;
}

}  // namespace

double default_window(const QpNepGame& game, const KktPoint& reference) {
  const std::vector<KktPoint> pts = enumerate_kkt(game, zero_perturbation(game));
  const VectorXd zr = stacked(reference);
  double best = std::numeric_limits<double>::infinity();
  for (const KktPoint& p : pts) {
    const double d = max_norm(stacked(p) - zr);
    if (d > kDedupRadius) best = std::min(best, d);
  }
  return std::isfinite(best) ? 0.5 * best : 0.5;
}

std::vector<double> parse_t_grid(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ':')) parts.push_back(item);
  if (parts.size() != 3)
    throw InputError("t grid must be START:STOP:COUNT, got \"" + text + "\"");
  double a, b;
  long count;
  try {
    size_t pos;
    a = std::stod(parts[0], &pos);
    if (pos != parts[0].size()) throw std::invalid_argument("start");
    b = std::stod(parts[1], &pos);
    if (pos != parts[1].size()) throw std::invalid_argument("stop");
    count = std::stol(parts[2], &pos);
    if (pos != parts[2].size()) throw std::invalid_argument("count");
  } catch (const std::exception&) {
    throw InputError("t grid must be START:STOP:COUNT, got \"" + text + "\"");
  }
  if (count < 1) throw InputError("t grid COUNT must be positive");
  if (!std::isfinite(a) || !std::isfinite(b))
    throw InputError("t grid bounds must be finite");
  std::vector<double> t;
  const double span = std::max(std::abs(a), std::abs(b));
  for (long i = 0; i < count; ++i) {
    double v = count == 1 ? a : a + (b - a) * static_cast<double>(i) /
                                        static_cast<double>(count - 1);
    if (std::abs(v) < 1e-14 * span) v = 0.0;
    t.push_back(v);
  }
  return t;
}

SweepResult sweep(const QpNepGame& game, const PerturbationDirection& dir,
                  const KktPoint& reference, const std::vector<double>& t_grid,
                  double window, const PositivityOptions& opt) {
  if (!(window > 0)) throw InputError("sweep: window must be positive");
  const double r0 =
      kkt_residual(game, zero_perturbation(game), reference.x, reference.lambda);
  if (r0 > kTolKkt)
    throw InputError("sweep: reference is not a KKT point of the unperturbed game");
  SweepResult out;
  out.window = window;
  out.reference = reference;
  const VectorXd zr = stacked(reference);
  for (double t : t_grid) {
    const Perturbation p = apply_tilt(game, dir, t);
    SweepStep step;
    step.t = t;
    for (const KktPoint& pt : enumerate_kkt(game, p)) {
      if (max_norm(stacked(pt) - zr) > window) continue;
      step.points.push_back(pt);
      step.local_nash.push_back(check_local_nash(game, p, pt, opt).verdict);
    }
    step.labels.assign(step.points.size(), -1);
    out.steps.push_back(std::move(step));
  }
  return out;
}

CalmnessEstimate estimate_calmness_constant(const SweepResult& sw,
                                            const PerturbationDirection& dir,
                                            const KktPoint& reference) {
  CalmnessEstimate est;
  const double dnorm = std::max(max_norm(dir.du), max_norm(dir.dv));
  const VectorXd zr = stacked(reference);
  for (const SweepStep& s : sw.steps) {
    est.existence_profile.push_back(!s.points.empty());
    if (s.t == 0.0 || dnorm == 0.0) continue;
    const double dp = std::abs(s.t) * dnorm;
    for (const KktPoint& p : s.points) {
      const double kx = max_norm(p.x - reference.x) / dp;
      const double kz = max_norm(stacked(p) - zr) / dp;
      est.kappa_hat = std::max(est.kappa_hat.value_or(0.0), kx);
      est.kappa_hat_primal_dual =
          std::max(est.kappa_hat_primal_dual.value_or(0.0), kz);
    }
  }
  return est;
}

namespace {

struct Track {
  int label;
  std::vector<int> steps;
  std::vector<double> t;
  std::vector<VectorXd> z;
};

VectorXd predict(const Track& tr, const VectorXd& zref, double t) {
  const size_t h = tr.t.size();
  if (h == 1) return zref + (tr.z[0] - zref) * (t / tr.t[0]);
  const double t1 = tr.t[h - 2], t2 = tr.t[h - 1];
  return tr.z[h - 1] + (tr.z[h - 1] - tr.z[h - 2]) * ((t - t2) / (t2 - t1));
}

void fit(const Track& tr, const VectorXd& zref, Branch& b) {
  const size_t h = tr.t.size();
  if (h == 1) {
    b.intercept = zref;
    b.slope = (tr.z[0] - zref) / tr.t[0];
    b.fit_residual = 0;
    return;
  }
  double tm = 0;
  VectorXd zm = VectorXd::Zero(zref.size());
  for (size_t i = 0; i < h; ++i) {
    tm += tr.t[i];
    zm += tr.z[i];
  }
  tm /= static_cast<double>(h);
  zm /= static_cast<double>(h);
  double stt = 0;
  VectorXd stz = VectorXd::Zero(zref.size());
  for (size_t i = 0; i < h; ++i) {
    stt += (tr.t[i] - tm) * (tr.t[i] - tm);
    stz += (tr.t[i] - tm) * (tr.z[i] - zm);
  }
  b.slope = stz / stt;
  b.intercept = zm - b.slope * tm;
  double res = 0;
  for (size_t i = 0; i < h; ++i)
    res = std::max(res, max_norm(tr.z[i] - b.intercept - b.slope * tr.t[i]));
  b.fit_residual = res;
}

}  // namespace

BranchSummary detect_branches(SweepResult& sw) {
  BranchSummary out;
  const VectorXd zref = stacked(sw.reference);
  const double threshold = sw.window / 4.0;
  int next_label = 0;
  for (int side : {-1, 1}) {
    std::vector<int> order;
    for (size_t i = 0; i < sw.steps.size(); ++i) {
      const double t = sw.steps[i].t;
      if ((side < 0 && t < 0) || (side > 0 && t > 0))
        order.push_back(static_cast<int>(i));
    }
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return std::abs(sw.steps[a].t) < std::abs(sw.steps[b].t);
    });
    std::vector<Track> tracks;
    for (int si : order) {
      SweepStep& step = sw.steps[si];
      struct Cand {
        double d;
        int track, point;
      };
      std::vector<Cand> cands;
      for (size_t tr = 0; tr < tracks.size(); ++tr) {
        const VectorXd pred = predict(tracks[tr], zref, step.t);
        for (size_t p = 0; p < step.points.size(); ++p) {
          const double d = max_norm(stacked(step.points[p]) - pred);
          if (d <= threshold)
            cands.push_back({d, static_cast<int>(tr), static_cast<int>(p)});
        }
      }
      std::stable_sort(cands.begin(), cands.end(),
                       [](const Cand& a, const Cand& b) { return a.d < b.d; });
      std::vector<bool> track_used(tracks.size(), false);
      std::vector<bool> point_used(step.points.size(), false);
      for (size_t c = 0; c < cands.size(); ++c) {
        const Cand& k = cands[c];
        if (track_used[k.track] || point_used[k.point]) continue;
        // A competing candidate at the same distance makes the match a guess.
        for (size_t o = c + 1; o < cands.size(); ++o) {
          const Cand& m = cands[o];
          if (m.d - k.d > 1e-9 + 1e-6 * k.d) break;
          if ((m.track == k.track && !point_used[m.point]) ||
              (m.point == k.point && !track_used[m.track]))
            out.ambiguous = true;
        }
        track_used[k.track] = true;
        point_used[k.point] = true;
        Track& tr = tracks[k.track];
        tr.steps.push_back(si);
        tr.t.push_back(step.t);
        tr.z.push_back(stacked(step.points[k.point]));
        step.labels[k.point] = tr.label;
      }
      for (size_t p = 0; p < step.points.size(); ++p) {
        if (point_used[p]) continue;
        Track tr;
        tr.label = next_label++;
        tr.steps.push_back(si);
        tr.t.push_back(step.t);
        tr.z.push_back(stacked(step.points[p]));
        step.labels[p] = tr.label;
        tracks.push_back(std::move(tr));
      }
    }
    for (const Track& tr : tracks) {
      Branch b;
      b.label = tr.label;
      b.side = side;
      b.steps = tr.steps;
      fit(tr, zref, b);
      out.branches.push_back(std::move(b));
    }
    (side < 0 ? out.branches_negative : out.branches_positive) =
        static_cast<int>(tracks.size());
  }
  if (out.branches_negative == 1 && out.branches_positive == 1) {
    const Branch* neg = nullptr;
    const Branch* pos = nullptr;
    for (const Branch& b : out.branches) (b.side < 0 ? neg : pos) = &b;
    const double scale = std::max(max_norm(neg->slope), max_norm(pos->slope));
    const double gap = max_norm(neg->slope - pos->slope);
    const double rel = scale > 0 ? gap / scale : 0.0;
    out.kink_relative_gap = rel;
    out.kink_at_zero = rel > 1e-6;
  }
  out.bifurcation_at_zero = out.branches_negative > 0 &&
                            out.branches_positive > 0 &&
                            out.branches_negative != out.branches_positive;
  return out;
}

}  // namespace nepstab
