#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "nepstab/numerics.hpp"

namespace nepstab {

ConeSpec ConeSpec::full(int dim) {
  return ConeSpec{MatrixXd(0, dim), MatrixXd(0, dim), dim};
}

ConeSpec ConeSpec::make(MatrixXd E, MatrixXd F, int dim) {
  if (E.rows() == 0) E.resize(0, dim);
  if (F.rows() == 0) F.resize(0, dim);
  if (E.cols() != dim || F.cols() != dim)
    throw InputError("ConeSpec: column count differs from ambient dimension");
  return ConeSpec{std::move(E), std::move(F), dim};
}

bool ConeSpec::contains(const VectorXd& y, double tol) const {
  if (y.size() != dim) return false;
  const double scale = std::max(1.0, y.cwiseAbs().maxCoeff());
  if (E.rows() > 0 && (E * y).cwiseAbs().maxCoeff() > tol * scale) return false;
  if (F.rows() > 0 && (F * y).maxCoeff() > tol * scale) return false;
  return true;
}

double family_value(const std::vector<MatrixXd>& family, const VectorXd& y,
                    FormMode mode) {
  double best = -std::numeric_limits<double>::infinity();
  for (const MatrixXd& Phi : family) {
    const double q = y.dot(Phi * y);
    best = std::max(best, mode == FormMode::kMax ? q : std::abs(q));
  }
  return best;
}

namespace {

// The cone in orthonormal coordinates of null(E): y = B z, {G z <= 0}.
struct Reduced {
  MatrixXd B;
  MatrixXd G;  // unit rows, zero rows removed
  std::vector<MatrixXd> forms;
  int r = 0;

  VectorXd lift(const VectorXd& z) const { return B * z; }
};

Reduced reduce(const std::vector<MatrixXd>& family, const ConeSpec& cone,
               double tol) {
  for (const MatrixXd& Phi : family) {
    if (Phi.rows() != cone.dim || Phi.cols() != cone.dim)
      throw InputError("quad_family_positive_on_cone: form dimension mismatch");
    if (Phi.size() > 0 && (Phi - Phi.transpose()).cwiseAbs().maxCoeff() > 1e-10)
      throw InputError("quad_family_positive_on_cone: form is not symmetric");
  }
  Reduced red;
  red.B = null_basis(cone.E, tol).B;
  red.r = static_cast<int>(red.B.cols());
  MatrixXd G = cone.F * red.B;
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < G.rows(); ++i)
    if (G.row(i).norm() > 1e-12 * std::max(1.0, cone.F.row(i).norm()))
      keep.push_back(i);
  red.G.resize(static_cast<Eigen::Index>(keep.size()), red.r);
  for (size_t i = 0; i < keep.size(); ++i)
    red.G.row(i) = G.row(keep[i]) / G.row(keep[i]).norm();
  for (const MatrixXd& Phi : family) {
    MatrixXd S = red.B.transpose() * Phi * red.B;
    red.forms.push_back(0.5 * (S + S.transpose()));
  }
  return red;
}

bool trivial_cone(const Reduced& red) {
  if (red.r == 0) return true;
  return !cone_nonzero_ray(MatrixXd(0, red.r), red.G).has_value();
}

ConePositivityResult trivial_result() {
  ConePositivityResult res;
  res.verdict = Verdict::kHolds;
  res.margin = std::numeric_limits<double>::infinity();
  res.method = "trivial_cone";
  res.note = "cone is {0}; condition holds vacuously";
  return res;
}

VectorXd project_reduced(const MatrixXd& G, const VectorXd& z) {
  if (G.rows() == 0 || (G * z).maxCoeff() <= 0) return z;
  // Moreau: z = P_K(z) + P_polar(z), polar generated by the rows of G.
  VectorXd nu = nnls(G.transpose(), z);
  VectorXd p = z - G.transpose() * nu;
  // Clean up tiny residual violations.
  for (int pass = 0; pass < 3; ++pass) {
    VectorXd g = G * p;
    Eigen::Index i;
    const double worst = g.maxCoeff(&i);
    if (worst <= 1e-14) break;
    p -= worst * G.row(i).transpose();
  }
  return p;
}

// Deterministic generator; normals by Box-Muller so the stream does not
// depend on the standard library's distribution implementation.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}
  double uniform() {
    return (static_cast<double>(gen_() >> 11) + 0.5) * 0x1.0p-53;
  }
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = uniform(), u2 = uniform();
    const double rad = std::sqrt(-2.0 * std::log(u1));
    spare_ = rad * std::sin(2.0 * M_PI * u2);
    have_spare_ = true;
    return rad * std::cos(2.0 * M_PI * u2);
  }

 private:
  std::mt19937_64 gen_;
  bool have_spare_ = false;
  double spare_ = 0;
};

double smooth_max(const std::vector<MatrixXd>& forms, const VectorXd& z,
                  double mu, VectorXd* grad) {
  const size_t K = forms.size();
  std::vector<double> q(K);
  std::vector<VectorXd> Pz(K);
  double qmax = -std::numeric_limits<double>::infinity();
  for (size_t k = 0; k < K; ++k) {
    Pz[k] = forms[k] * z;
    q[k] = z.dot(Pz[k]);
    qmax = std::max(qmax, q[k]);
  }
  if (mu <= 0.0) {
    if (grad) {
      size_t kb = 0;
      for (size_t k = 0; k < K; ++k)
        if (q[k] == qmax) {
          kb = k;
          break;
        }
      *grad = 2.0 * Pz[kb];
    }
    return qmax;
  }
  double sum = 0;
  std::vector<double> w(K);
  for (size_t k = 0; k < K; ++k) {
    w[k] = std::exp((q[k] - qmax) / mu);
    sum += w[k];
  }
  if (grad) {
    grad->setZero(z.size());
    for (size_t k = 0; k < K; ++k) *grad += (2.0 * w[k] / sum) * Pz[k];
  }
  return qmax + mu * std::log(sum);
}

double sum_squares(const std::vector<MatrixXd>& forms, const VectorXd& z,
                   VectorXd* grad) {
  double h = 0;
  if (grad) grad->setZero(z.size());
  for (const MatrixXd& Psi : forms) {
    VectorXd Pz = Psi * z;
    const double q = z.dot(Pz);
    h += q * q;
    if (grad) *grad += 4.0 * q * Pz;
  }
  return h;
}

// Projected descent on the unit sphere of the cone. fn returns the value and
// writes the gradient.
template <class Fn>
VectorXd sphere_descent(const MatrixXd& G, VectorXd z, Fn fn, int max_iter) {
  VectorXd g;
  double f = fn(z, &g);
  double eta = 0.5;
  for (int it = 0; it < max_iter && eta > 1e-12; ++it) {
    VectorXd cand = project_reduced(G, z - eta * g);
    const double nrm = cand.norm();
    if (nrm < 1e-12) {
      eta *= 0.5;
      continue;
    }
    cand /= nrm;
    VectorXd gc;
    const double fc = fn(cand, &gc);
    if (fc < f) {
      z = cand;
      f = fc;
      g = gc;
      eta = std::min(eta * 2.0, 4.0);
    } else {
      eta *= 0.5;
    }
  }
  return z;
}

// Gauss-Newton on {q_k(z) = 0, |z| = 1, G_A z = 0} for the active rows A.
VectorXd zero_set_polish(const std::vector<MatrixXd>& forms, const MatrixXd& G,
                         VectorXd z) {
  for (int it = 0; it < 30; ++it) {
    std::vector<Eigen::Index> active;
    if (G.rows() > 0) {
      VectorXd gz = G * z;
      for (Eigen::Index i = 0; i < gz.size(); ++i)
        if (gz(i) > -1e-6) active.push_back(i);
    }
    const Eigen::Index K = static_cast<Eigen::Index>(forms.size());
    const Eigen::Index rows = K + 1 + static_cast<Eigen::Index>(active.size());
    MatrixXd J(rows, z.size());
    VectorXd res(rows);
    for (Eigen::Index k = 0; k < K; ++k) {
      VectorXd Pz = forms[k] * z;
      res(k) = z.dot(Pz);
      J.row(k) = 2.0 * Pz.transpose();
    }
    res(K) = 0.5 * (z.squaredNorm() - 1.0);
    J.row(K) = z.transpose();
    for (size_t a = 0; a < active.size(); ++a) {
      res(K + 1 + a) = G.row(active[a]).dot(z);
      J.row(K + 1 + a) = G.row(active[a]);
    }
    if (res.cwiseAbs().maxCoeff() < 1e-15) break;
    VectorXd dz = J.completeOrthogonalDecomposition().solve(-res);
    VectorXd cand = z + dz;
    if (cand.norm() < 1e-12) break;
    cand.normalize();
    cand = project_reduced(G, cand);
    if (cand.norm() < 1e-12) break;
    z = cand.normalized();
  }
  return z;
}

ConePositivityResult fails_with(const Reduced& red, const VectorXd& z,
                                const std::vector<MatrixXd>& family,
                                FormMode mode, const std::string& method) {
  ConePositivityResult res;
  res.verdict = Verdict::kFails;
  VectorXd y = red.lift(z);
  y.normalize();
  res.witness = y;
  res.best_value = family_value(family, y, mode);
  res.method = method;
  return res;
}

}  // namespace

VectorXd project_onto_cone(const ConeSpec& cone, const VectorXd& y) {
  Reduced red = reduce({}, cone, kRankTol);
  if (red.r == 0) return VectorXd::Zero(cone.dim);
  VectorXd z = red.B.transpose() * y;
  return red.lift(project_reduced(red.G, z));
}

std::optional<ConePositivityResult> positivity_exact(
    const std::vector<MatrixXd>& family, const ConeSpec& cone, FormMode mode,
    const PositivityOptions& opt) {
  Reduced red = reduce(family, cone, opt.tol);
  if (trivial_cone(red)) return trivial_result();
  if (red.G.rows() != 0 || family.size() != 1) return std::nullopt;
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(red.forms[0]);
  const VectorXd& ev = es.eigenvalues();
  const double lo = ev(0), hi = ev(ev.size() - 1);
  const VectorXd vlo = es.eigenvectors().col(0);
  const VectorXd vhi = es.eigenvectors().col(ev.size() - 1);
  ConePositivityResult res;
  res.method = "exact_eigen";
  if (mode == FormMode::kMax) {
    if (lo > opt.tol) {
      res.verdict = Verdict::kHolds;
      res.margin = lo;
      res.best_value = lo;
      return res;
    }
    return fails_with(red, vlo, family, mode, res.method);
  }
  if (lo > opt.tol || hi < -opt.tol) {
    res.verdict = Verdict::kHolds;
    res.margin = lo > opt.tol ? lo : -hi;
    res.best_value = *res.margin;
    return res;
  }
  VectorXd z;
  if (std::abs(lo) <= opt.tol)
    z = vlo;
  else if (std::abs(hi) <= opt.tol)
    z = vhi;
  else
    z = std::sqrt(-lo) * vhi + std::sqrt(hi) * vlo;
  return fails_with(red, z.normalized(), family, mode, res.method);
}

std::optional<ConePositivityResult> positivity_search(
    const std::vector<MatrixXd>& family, const ConeSpec& cone, FormMode mode,
    const PositivityOptions& opt, double* best_value) {
  Reduced red = reduce(family, cone, opt.tol);
  if (trivial_cone(red)) return trivial_result();
  Rng rng(opt.seed);
  double best = std::numeric_limits<double>::infinity();
  VectorXd best_z;
  for (int s = 0; s < opt.starts; ++s) {
    VectorXd z(red.r);
    for (int i = 0; i < red.r; ++i) z(i) = rng.normal();
    z = project_reduced(red.G, z);
    if (z.norm() < 1e-10) continue;
    z.normalize();
    if (mode == FormMode::kMax) {
      for (double mu : {1e-1, 1e-2, 1e-3, 1e-4, 0.0}) {
        z = sphere_descent(
            red.G, z,
            [&](const VectorXd& w, VectorXd* g) {
              return smooth_max(red.forms, w, mu, g);
            },
            200);
      }
      const double val = family_value(red.forms, z, FormMode::kMax);
      if (val < best) {
        best = val;
        best_z = z;
      }
      if (val < -1e-8) break;
    } else {
      z = sphere_descent(
          red.G, z,
          [&](const VectorXd& w, VectorXd* g) {
            return sum_squares(red.forms, w, g);
          },
          300);
      z = zero_set_polish(red.forms, red.G, z);
      const double val = sum_squares(red.forms, z, nullptr);
      if (val < best) {
        best = val;
        best_z = z;
      }
      if (val < 1e-16) break;
    }
  }
  if (best_value) *best_value = best;
  if (best_z.size() == 0) return std::nullopt;
  const VectorXd y = red.lift(best_z).normalized();
  if (!cone.contains(y, 1e-9)) return std::nullopt;
  if (mode == FormMode::kMax && family_value(family, y, mode) < -1e-8)
    return fails_with(red, best_z, family, mode, "multistart_search");
  if (mode == FormMode::kZeroSet) {
    double ss = 0;
    for (const MatrixXd& Phi : family) ss += std::pow(y.dot(Phi * y), 2);
    if (ss < 1e-16)
      return fails_with(red, best_z, family, mode, "multistart_search");
  }
  return std::nullopt;
}

std::optional<ConePositivityResult> positivity_grid(
    const std::vector<MatrixXd>& family, const ConeSpec& cone, FormMode mode,
    const PositivityOptions& opt, std::string* note) {
  Reduced red = reduce(family, cone, opt.tol);
  if (trivial_cone(red)) return trivial_result();
  const int r = red.r;
  auto set_note = [&](const std::string& s) {
    if (note) *note = s;
  };
  if (r > 4) {
    set_note("grid certification needs cone dimension <= 4, got " +
             std::to_string(r));
    return std::nullopt;
  }
  const double fail_level = 1e-8;
  auto failing = [&](double v) {
    return mode == FormMode::kMax ? v < -fail_level : v < fail_level;
  };

  if (r == 1) {
    double best = std::numeric_limits<double>::infinity();
    VectorXd best_z;
    for (double s : {1.0, -1.0}) {
      VectorXd z = VectorXd::Constant(1, s);
      if (red.G.rows() > 0 && (red.G * z).maxCoeff() > 1e-12) continue;
      const double v = family_value(red.forms, z, mode);
      if (v < best) {
        best = v;
        best_z = z;
      }
    }
    ConePositivityResult res;
    res.method = "grid_lipschitz";
    res.best_value = best;
    if (best > opt.tol) {
      res.verdict = Verdict::kHolds;
      res.margin = best;
      return res;
    }
    return fails_with(red, best_z, family, mode, res.method);
  }

  const double delta = opt.grid_res;
  const double h_target = delta / std::sqrt(static_cast<double>(r - 1));
  const long c = static_cast<long>(std::ceil(2.0 / h_target));
  const double h = 2.0 / static_cast<double>(c);
  double cells = 2.0 * r;
  for (int i = 0; i < r - 1; ++i) cells *= static_cast<double>(c);
  if (cells > opt.max_cells) {
    set_note("grid would need " + std::to_string(static_cast<long long>(cells)) +
             " cells, above the cap");
    return std::nullopt;
  }
  double L = 0;
  for (const MatrixXd& Psi : red.forms) L = std::max(L, 2.0 * sym_norm(Psi));
  const double half_span = h * std::sqrt(static_cast<double>(r - 1));

  double gridmin = std::numeric_limits<double>::infinity();
  VectorXd argmin;
  double rho = 0;
  const Eigen::Index p = red.G.rows();
  std::vector<long> idx(r - 1);
  VectorXd center(r);
  MatrixXd Aeq = MatrixXd::Zero(1, r);
  VectorXd beq = VectorXd::Ones(1);
  MatrixXd Ain(p + 2 * (r - 1), r);
  VectorXd bin(p + 2 * (r - 1));

  for (int axis = 0; axis < r; ++axis) {
    for (double sgn : {1.0, -1.0}) {
      std::fill(idx.begin(), idx.end(), 0);
      for (;;) {
        int d = 0;
        for (int j = 0; j < r; ++j) {
          if (j == axis) {
            center(j) = sgn;
          } else {
            center(j) = -1.0 + (static_cast<double>(idx[d]) + 0.5) * h;
            ++d;
          }
        }
        bool outside = false, inside = true;
        for (Eigen::Index i = 0; i < p && !outside; ++i) {
          const double gc = red.G.row(i).dot(center);
          double spread = 0;
          for (int j = 0; j < r; ++j)
            if (j != axis) spread += std::abs(red.G(i, j));
          spread *= 0.5 * h;
          if (gc - spread > 1e-14) outside = true;
          if (gc + spread > 0) inside = false;
        }
        if (!outside) {
          VectorXd sample;
          double rad = 0;
          if (inside) {
            sample = center;
            rad = 0.5 * half_span;
          } else {
            Aeq.setZero();
            Aeq(0, axis) = sgn;
            Ain.setZero();
            Ain.topRows(p) = red.G;
            bin.head(p).setZero();
            int row = static_cast<int>(p);
            for (int j = 0; j < r; ++j) {
              if (j == axis) continue;
              Ain(row, j) = 1.0;
              bin(row++) = center(j) + 0.5 * h;
              Ain(row, j) = -1.0;
              bin(row++) = -(center(j) - 0.5 * h);
            }
            if (auto s = lp_find_feasible(Aeq, beq, Ain, bin)) {
              sample = *s;
              rad = half_span;
            }
          }
          if (sample.size() > 0) {
            const VectorXd z = sample.normalized();
            const double v = family_value(red.forms, z, mode);
            rho = std::max(rho, rad);
            if (v < gridmin) {
              gridmin = v;
              argmin = z;
            }
          }
        }
        int pos = 0;
        while (pos < r - 1 && ++idx[pos] == c) idx[pos++] = 0;
        if (pos == r - 1) break;
      }
    }
  }

  ConePositivityResult res;
  res.method = "grid_lipschitz";
  res.best_value = gridmin;
  if (argmin.size() == 0) return std::nullopt;
  if (failing(gridmin)) return fails_with(red, argmin, family, mode, res.method);
  const double margin = gridmin - L * rho;
  if (margin > 0) {
    res.verdict = Verdict::kHolds;
    res.margin = margin;
    res.note = "grid minimum " + std::to_string(gridmin) + ", Lipschitz " +
               std::to_string(L) + ", covering radius " + std::to_string(rho);
    return res;
  }
  set_note("grid minimum " + std::to_string(gridmin) +
           " does not exceed the Lipschitz slack " + std::to_string(L * rho));
  return std::nullopt;
}

ConePositivityResult quad_family_positive_on_cone(
    const std::vector<MatrixXd>& family, const ConeSpec& cone, FormMode mode,
    const PositivityOptions& opt) {
  if (family.empty())
    throw InputError("quad_family_positive_on_cone: empty family");
  if (auto r = positivity_exact(family, cone, mode, opt)) return *r;
  double best_search = std::numeric_limits<double>::infinity();
  if (auto r = positivity_search(family, cone, mode, opt, &best_search))
    return *r;
  std::string note;
  if (auto r = positivity_grid(family, cone, mode, opt, &note)) return *r;
  ConePositivityResult res;
  res.verdict = Verdict::kUndecided;
  res.method = "none";
  if (std::isfinite(best_search))
    res.best_value = mode == FormMode::kMax ? best_search : std::sqrt(best_search);
  res.note = note;
  return res;
}

}  // namespace nepstab
