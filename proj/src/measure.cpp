#include "levyot/measure.hpp"

#include <algorithm>
#include <map>

namespace levyot {

int lex_compare(const Vec& a, const Vec& b) {
  const Eigen::Index n = std::min(a.size(), b.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    if (a[i] < b[i]) return -1;
    if (a[i] > b[i]) return 1;
  }
  if (a.size() < b.size()) return -1;
  if (a.size() > b.size()) return 1;
  return 0;
}

double pairwise_sum(std::span<const double> xs) {
  if (xs.size() == 0) return 0.0;
  if (xs.size() == 1) return xs[0];
  const std::size_t half = xs.size() / 2;
  return pairwise_sum(xs.subspan(0, half)) + pairwise_sum(xs.subspan(half));
}

namespace {

// Sorts atoms lexicographically and merges exact-duplicate locations.
// Weights are summed on merge, so a pre-summed list and a duplicated list
// produce identical canonical forms.
template <typename AtomT, typename KeyFn>
void canonicalize(std::vector<AtomT>& atoms, KeyFn key_cmp) {
  std::sort(atoms.begin(), atoms.end(),
            [&](const AtomT& a, const AtomT& b) { return key_cmp(a, b) < 0; });
  std::vector<AtomT> merged;
  merged.reserve(atoms.size());
  for (auto& a : atoms) {
    if (!merged.empty() && key_cmp(merged.back(), a) == 0) {
      merged.back().w += a.w;
    } else {
      merged.push_back(std::move(a));
    }
  }
  atoms = std::move(merged);
}

}  // namespace

DiscreteLevyMeasure::DiscreteLevyMeasure(int dim) : dim_(dim) {
  if (dim < 1) throw ValidationError("measure dimension must be >= 1");
}

DiscreteLevyMeasure::DiscreteLevyMeasure(int dim, std::vector<Atom> atoms)
    : dim_(dim), atoms_(std::move(atoms)) {
  if (dim < 1) throw ValidationError("measure dimension must be >= 1");
  for (const auto& a : atoms_) {
    if (a.x.size() != dim_) throw ValidationError("atom dimension mismatch");
    require_finite(a.x, "atom location");
    if (!std::isfinite(a.w) || a.w <= 0.0)
      throw ValidationError("atom weight must be finite and > 0");
    if (a.x.norm() == 0.0)
      throw ValidationError("jump measure cannot carry an atom at the origin");
  }
  canonicalize(atoms_, [](const Atom& a, const Atom& b) { return lex_compare(a.x, b.x); });
}

double DiscreteLevyMeasure::total_mass() const {
  double s = 0.0;
  for (const auto& a : atoms_) s += a.w;
  return s;
}

DiscreteLevyMeasure DiscreteLevyMeasure::scaled(double factor) const {
  if (!(factor > 0.0)) throw ValidationError("scale factor must be > 0");
  std::vector<Atom> out = atoms_;
  for (auto& a : out) a.w *= factor;
  return DiscreteLevyMeasure(dim_, std::move(out));
}

DiscreteLevyMeasure DiscreteLevyMeasure::shifted(const Vec& h) const {
  if (h.size() != dim_) throw ValidationError("shift dimension mismatch");
  std::vector<Atom> out = atoms_;
  for (auto& a : out) a.x += h;
  return DiscreteLevyMeasure(dim_, std::move(out));
}

DiscreteLevyMeasure operator+(const DiscreteLevyMeasure& a, const DiscreteLevyMeasure& b) {
  if (a.dim_ != b.dim_) throw ValidationError("measure dimension mismatch in sum");
  std::vector<Atom> all = a.atoms_;
  all.insert(all.end(), b.atoms_.begin(), b.atoms_.end());
  return DiscreteLevyMeasure(a.dim_, std::move(all));
}

int lex_compare(const DiscreteLevyMeasure& a, const DiscreteLevyMeasure& b) {
  if (a.dim_ != b.dim_) return a.dim_ < b.dim_ ? -1 : 1;
  const std::size_t n = std::min(a.atoms_.size(), b.atoms_.size());
  for (std::size_t i = 0; i < n; ++i) {
    int c = lex_compare(a.atoms_[i].x, b.atoms_[i].x);
    if (c != 0) return c;
    if (a.atoms_[i].w < b.atoms_[i].w) return -1;
    if (a.atoms_[i].w > b.atoms_[i].w) return 1;
  }
  if (a.atoms_.size() < b.atoms_.size()) return -1;
  if (a.atoms_.size() > b.atoms_.size()) return 1;
  return 0;
}

double second_moment(const DiscreteLevyMeasure& m) {
  double s = 0.0;
  for (const auto& a : m.atoms()) s += a.w * a.x.squaredNorm();
  return s;
}

bool is_symmetric(const Mat& m) {
  if (m.rows() != m.cols()) return false;
  const double scale = 1.0 + std::abs(m.trace());
  return (m - m.transpose()).cwiseAbs().maxCoeff() <= tol::sym * scale;
}

double min_eigenvalue(const Mat& sym) {
  if (sym.rows() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Mat> es(sym, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw InternalError("eigensolver failure");
  return es.eigenvalues().minCoeff();
}

bool is_psd(const Mat& m) {
  if (!is_symmetric(m)) return false;
  const Mat s = 0.5 * (m + m.transpose());
  return min_eigenvalue(s) >= -tol::psd * (1.0 + s.trace());
}

void validate_triplet(const LevyTriplet& t) {
  const int d = t.dim();
  if (d < 1) throw ValidationError("triplet dimension must be >= 1");
  require_finite(t.drift, "drift");
  require_finite(t.diffusion, "diffusion");
  if (t.diffusion.rows() != d || t.diffusion.cols() != d)
    throw ValidationError("diffusion matrix shape does not match drift dimension");
  if (!is_symmetric(t.diffusion)) throw ValidationError("diffusion matrix is not symmetric");
  if (!is_psd(t.diffusion)) throw ValidationError("diffusion matrix is not positive semidefinite");
  if (!t.jumps.empty() || t.jumps.dim() > 0) {
    if (t.jumps.dim() != d) throw ValidationError("jump measure dimension mismatch");
  }
}

LevyTriplet make_triplet(Vec drift, Mat diffusion, DiscreteLevyMeasure jumps) {
  if (jumps.dim() == 0) jumps = DiscreteLevyMeasure(static_cast<int>(drift.size()));
  LevyTriplet t{std::move(drift), std::move(diffusion), std::move(jumps)};
  validate_triplet(t);
  return t;
}

Vec mean_vector(const LevyTriplet& t) { return t.drift; }

Mat covariance_matrix(const LevyTriplet& t) {
  Mat q = t.diffusion;
  for (const auto& a : t.jumps.atoms()) q += a.w * (a.x * a.x.transpose());
  return q;
}

LevyCoupling::LevyCoupling(int dim) : dim_(dim) {
  if (dim < 1) throw ValidationError("coupling dimension must be >= 1");
}

LevyCoupling::LevyCoupling(int dim, std::vector<CouplingAtom> atoms)
    : dim_(dim), atoms_(std::move(atoms)) {
  if (dim < 1) throw ValidationError("coupling dimension must be >= 1");
  std::vector<CouplingAtom> kept;
  kept.reserve(atoms_.size());
  for (auto& a : atoms_) {
    if (a.x.size() != dim_ || a.y.size() != dim_)
      throw ValidationError("coupling atom dimension mismatch");
    require_finite(a.x, "coupling atom source");
    require_finite(a.y, "coupling atom target");
    if (!std::isfinite(a.w) || a.w <= 0.0)
      throw ValidationError("coupling atom weight must be finite and > 0");
    // Mass at the joint origin is marginal-invisible and cost-free; storing it
    // would make canonical forms non-unique.
    if (a.x.norm() == 0.0 && a.y.norm() == 0.0) continue;
    kept.push_back(std::move(a));
  }
  atoms_ = std::move(kept);
  canonicalize(atoms_, [](const CouplingAtom& a, const CouplingAtom& b) {
    int c = lex_compare(a.x, b.x);
    return c != 0 ? c : lex_compare(a.y, b.y);
  });
}

double LevyCoupling::total_mass() const {
  double s = 0.0;
  for (const auto& a : atoms_) s += a.w;
  return s;
}

double LevyCoupling::cost() const {
  double s = 0.0;
  for (const auto& a : atoms_) s += a.w * squared_cost(a.x, a.y);
  return s;
}

LevyCoupling LevyCoupling::transposed() const {
  std::vector<CouplingAtom> out;
  out.reserve(atoms_.size());
  for (const auto& a : atoms_) out.push_back({a.y, a.x, a.w});
  return LevyCoupling(dim_, std::move(out));
}

namespace {

using LocKey = std::vector<double>;

LocKey key_of(const Vec& v) { return LocKey(v.data(), v.data() + v.size()); }

std::map<LocKey, double> weight_map(const DiscreteLevyMeasure& m) {
  std::map<LocKey, double> out;
  for (const auto& a : m.atoms()) out[key_of(a.x)] += a.w;
  return out;
}

}  // namespace

MarginalCertificate validate_coupling(const LevyCoupling& gamma,
                                      const DiscreteLevyMeasure& mu,
                                      const DiscreteLevyMeasure& nu) {
  if (gamma.dim() != mu.dim() || gamma.dim() != nu.dim())
    throw ValidationError("coupling/measure dimension mismatch");

  MarginalCertificate cert;
  cert.tol_source = tol::marginal * (1.0 + mu.total_mass());
  cert.tol_target = tol::marginal * (1.0 + nu.total_mass());

  std::map<LocKey, double> source_sums, target_sums;
  for (const auto& a : gamma.atoms()) {
    if (a.x.norm() != 0.0) source_sums[key_of(a.x)] += a.w;
    if (a.y.norm() != 0.0) target_sums[key_of(a.y)] += a.w;
  }

  bool pass = true;
  auto audit = [&](const std::map<LocKey, double>& got,
                   const std::map<LocKey, double>& want, int side, double tol_side) {
    auto record = [&](const LocKey& loc, double defect) {
      if (defect > cert.worst_defect) {
        cert.worst_defect = defect;
        cert.worst_location = Eigen::Map<const Vec>(loc.data(), static_cast<Eigen::Index>(loc.size()));
        cert.worst_side = side;
      }
      if (defect > tol_side) pass = false;
    };
    for (const auto& [loc, w] : want) {
      auto it = got.find(loc);
      record(loc, std::abs((it == got.end() ? 0.0 : it->second) - w));
    }
    for (const auto& [loc, w] : got) {
      if (!want.count(loc)) record(loc, w);
    }
  };

  audit(source_sums, weight_map(mu), 0, cert.tol_source);
  audit(target_sums, weight_map(nu), 1, cert.tol_target);
  cert.pass = pass;
  return cert;
}

LevyCoupling trivial_coupling(const DiscreteLevyMeasure& mu, const DiscreteLevyMeasure& nu) {
  if (mu.dim() != nu.dim()) throw ValidationError("measure dimension mismatch");
  const Vec origin = Vec::Zero(mu.dim());
  std::vector<CouplingAtom> atoms;
  atoms.reserve(mu.size() + nu.size());
  for (const auto& a : mu.atoms()) atoms.push_back({a.x, origin, a.w});
  for (const auto& a : nu.atoms()) atoms.push_back({origin, a.x, a.w});
  return LevyCoupling(mu.dim(), std::move(atoms));
}

LevyCoupling diagonal_coupling(const DiscreteLevyMeasure& mu) {
  std::vector<CouplingAtom> atoms;
  atoms.reserve(mu.size());
  for (const auto& a : mu.atoms()) atoms.push_back({a.x, a.x, a.w});
  return LevyCoupling(mu.dim(), std::move(atoms));
}

bool approx_equal(const DiscreteLevyMeasure& a, const DiscreteLevyMeasure& b, double tol) {
  if (a.dim() != b.dim() || a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if ((a.atoms()[i].x - b.atoms()[i].x).cwiseAbs().maxCoeff() > tol) return false;
    if (std::abs(a.atoms()[i].w - b.atoms()[i].w) > tol) return false;
  }
  return true;
}

bool approx_equal(const LevyTriplet& a, const LevyTriplet& b, double tol) {
  if (a.dim() != b.dim()) return false;
  if ((a.drift - b.drift).cwiseAbs().maxCoeff() > tol) return false;
  if ((a.diffusion - b.diffusion).cwiseAbs().maxCoeff() > tol) return false;
  return approx_equal(a.jumps, b.jumps, tol);
}

}  // namespace levyot
