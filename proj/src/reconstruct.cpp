#include "gmmsi/reconstruct.hpp"

#include "gmmsi/classify.hpp"

namespace gmmsi {

namespace {

void check_sigma2(double sigma2) {
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2))
    throw Error(ErrorCode::kInvalidInput, "noise variance must be positive and finite");
}

JointGmm lone_model(const JointComponent& c) {
  std::vector<std::optional<JointComponent>> comps{c};
  return JointGmm(static_cast<int>(c.n1()), static_cast<int>(c.n2()), Matrix::Ones(1, 1),
                  std::move(comps));
}

Vector wiener(const ProjectedModel& pm, std::size_t idx, const Vector& y, double sigma2,
              ReconTarget target) {
  return target == ReconTarget::kX1 ? pm.wiener_x1(idx, y, sigma2) : pm.wiener_x(idx, y, sigma2);
}

double mmse(const ProjectedModel& pm, std::size_t idx, double sigma2, ReconTarget target) {
  return target == ReconTarget::kX1 ? pm.mmse_x1(idx, sigma2) : pm.mmse_x(idx, sigma2);
}

bool at_least(int lhs, int rhs, bool strict) { return strict ? lhs > rhs : lhs >= rhs; }

bool side_info_condition(const ComponentRanks& r, int m1, int m2, bool strict) {
  return at_least(m1, r.r_x1, strict) ||
         (at_least(m1, r.r_x - r.r_x2, strict) && at_least(m1 + m2, r.r_x, strict));
}

bool distributed_condition(const ComponentRanks& r, int m1, int m2, bool strict) {
  return at_least(m1, r.r_x - r.r_x2, strict) && at_least(m2, r.r_x - r.r_x1, strict) &&
         at_least(m1 + m2, r.r_x, strict);
}

}  // namespace

const char* target_name(ReconTarget t) noexcept { return t == ReconTarget::kX1 ? "x1" : "x"; }

GaussianEstimator gaussian_estimator(const JointComponent& c, const SensingPair& phi, double sigma2,
                                     ReconTarget target) {
  check_sigma2(sigma2);
  const JointGmm model = lone_model(c);
  const ProjectedModel pm(model, phi);
  const ProjectedComponent& pc = pm[0];
  const int rows = target == ReconTarget::kX1 ? model.n1() : model.n();
  GaussianEstimator est;
  const Matrix fv = pc.fv.topLeftCorner(rows, pc.k());
  Vector scale(pc.k());
  for (int j = 0; j < pc.k(); ++j) scale(j) = pc.s(j) / (pc.s(j) * pc.s(j) + sigma2);
  est.gain = fv * scale.asDiagonal() * pc.u.transpose();
  if (est.gain.cols() != pc.m()) est.gain = Matrix::Zero(rows, pc.m());
  est.offset = pc.mean.head(rows) - est.gain * pc.mean_y;
  est.mmse_value = mmse(pm, 0, sigma2, target);
  return est;
}

Vector gaussian_cme(const Vector& y, const JointComponent& c, const SensingPair& phi, double sigma2,
                    ReconTarget target) {
  const JointGmm model = lone_model(c);
  const ProjectedModel pm(model, phi);
  if (y.size() != pm.m()) throw Error(ErrorCode::kDimensionMismatch, "observation length mismatch");
  return wiener(pm, 0, y, sigma2, target);
}

double gaussian_mmse(const JointComponent& c, const SensingPair& phi, double sigma2,
                     ReconTarget target) {
  const JointGmm model = lone_model(c);
  const ProjectedModel pm(model, phi);
  return mmse(pm, 0, sigma2, target);
}

double GmmPosterior::weight(ClassPair p) const {
  for (std::size_t i = 0; i < pairs.size(); ++i)
    if (pairs[i] == p) return weights(static_cast<Eigen::Index>(i));
  return 0.0;
}

Vector gmm_cme(const ProjectedModel& pm, const Vector& y, double sigma2, ReconTarget target,
               GmmPosterior* posterior, bool with_covariances) {
  const Vector lj = pm.log_joint(y, sigma2);
  const Vector w = (lj.array() - log_sum_exp(lj)).exp();
  const int rows = target == ReconTarget::kX1 ? pm.model().n1() : pm.model().n();
  Vector out = Vector::Zero(rows);
  if (posterior) {
    posterior->pairs.clear();
    posterior->means.clear();
    posterior->covariances.clear();
    posterior->weights = w;
  }
  for (std::size_t s = 0; s < pm.size(); ++s) {
    Vector mean = wiener(pm, s, y, sigma2, target);
    out += w(static_cast<Eigen::Index>(s)) * mean;
    if (!posterior) continue;
    posterior->pairs.push_back(pm[s].pair);
    if (with_covariances) {
      const ProjectedComponent& pc = pm[s];
      const Matrix top = pc.fv.topRows(rows);
      Vector rw = Vector::Ones(top.cols());
      for (int j = 0; j < pc.k(); ++j) rw(j) = sigma2 / (pc.s(j) * pc.s(j) + sigma2);
      posterior->covariances.push_back(top * rw.asDiagonal() * top.transpose());
    }
    posterior->means.push_back(std::move(mean));
  }
  return out;
}

Vector gmm_cme(const Vector& y, const JointGmm& model, const SensingPair& phi, double sigma2,
               ReconTarget target, GmmPosterior* posterior) {
  const ProjectedModel pm(model, phi);
  return gmm_cme(pm, y, sigma2, target, posterior, posterior != nullptr);
}

Vector classify_reconstruct(const ProjectedModel& pm, const Vector& y, double sigma2,
                            ReconTarget target) {
  const ClassPair p = map_distributed(pm, y, sigma2);
  return wiener(pm, static_cast<std::size_t>(pm.index_of(p)), y, sigma2, target);
}

Vector classify_reconstruct(const Vector& y, const JointGmm& model, const SensingPair& phi,
                            double sigma2, ReconTarget target) {
  const ProjectedModel pm(model, phi);
  return classify_reconstruct(pm, y, sigma2, target);
}

double mse_lower_bound(const ProjectedModel& pm, double sigma2, ReconTarget target) {
  double total = 0.0;
  for (std::size_t s = 0; s < pm.size(); ++s)
    total += pm.model().prior(pm[s].pair) * mmse(pm, s, sigma2, target);
  return total;
}

double mse_lower_bound(const JointGmm& model, const SensingPair& phi, double sigma2,
                       ReconTarget target) {
  const ProjectedModel pm(model, phi);
  return mse_lower_bound(pm, sigma2, target);
}

const char* theorem_name(ReconTheorem t) noexcept {
  switch (t) {
    case ReconTheorem::kGaussian: return "gaussian";
    case ReconTheorem::kGmmSufficient: return "gmm_sufficient";
    case ReconTheorem::kGmmNecessary: return "gmm_necessary";
    case ReconTheorem::kDistGaussian: return "dist_gaussian";
    case ReconTheorem::kDistGmmSufficient: return "dist_gmm_sufficient";
    case ReconTheorem::kDistGmmNecessary: return "dist_gmm_necessary";
  }
  return "?";
}

ReconTheorem parse_theorem(const std::string& name) {
  for (ReconTheorem t : {ReconTheorem::kGaussian, ReconTheorem::kGmmSufficient,
                         ReconTheorem::kGmmNecessary, ReconTheorem::kDistGaussian,
                         ReconTheorem::kDistGmmSufficient, ReconTheorem::kDistGmmNecessary})
    if (name == theorem_name(t)) return t;
  throw Error(ErrorCode::kInvalidInput, "unknown reconstruction theorem '" + name + "'");
}

ReconTarget theorem_target(ReconTheorem t) noexcept {
  switch (t) {
    case ReconTheorem::kDistGaussian:
    case ReconTheorem::kDistGmmSufficient:
    case ReconTheorem::kDistGmmNecessary: return ReconTarget::kX;
    default: return ReconTarget::kX1;
  }
}

ReconVerdict reconstruction_phase_verdict(const GeometryTable& geo, int m1, int m2,
                                          ReconTheorem theorem) {
  if (m1 < 0 || m2 < 0) throw Error(ErrorCode::kInvalidInput, "feature counts must be >= 0");
  const bool gaussian =
      theorem == ReconTheorem::kGaussian || theorem == ReconTheorem::kDistGaussian;
  if (gaussian && geo.components().size() != 1)
    throw Error(ErrorCode::kUnsupported,
                std::string("theorem '") + theorem_name(theorem) + "' needs a single-component model");
  const bool strict =
      theorem == ReconTheorem::kGmmSufficient || theorem == ReconTheorem::kDistGmmSufficient;
  const bool distributed = theorem_target(theorem) == ReconTarget::kX;

  ReconVerdict v;
  v.theorem = theorem;
  v.transition = true;
  int widest = -1;
  for (const ClassPair& p : geo.components()) {
    const ComponentRanks& r = geo.ranks(p);
    const bool ok = distributed ? distributed_condition(r, m1, m2, strict)
                                : side_info_condition(r, m1, m2, strict);
    if (!ok) {
      v.transition = false;
      v.binding = p;
      return v;
    }
    if (r.r_x > widest) {
      widest = r.r_x;
      v.binding = p;
    }
  }
  return v;
}

}  // namespace gmmsi
