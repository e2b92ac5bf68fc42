#include "gmmsi/classify.hpp"

#include <algorithm>
#include <cmath>

namespace gmmsi {

namespace {

constexpr const char* kZeroMeanSideInfo = "zero_mean_side_info";
constexpr const char* kZeroMeanDistributed = "zero_mean_distributed";
constexpr const char* kNonzeroMeanSideInfo = "nonzero_mean_side_info";
constexpr const char* kNonzeroMeanDistributed = "nonzero_mean_distributed";

std::vector<Quadruple> quadruples(const GeometryTable& geo, ClassifyMode mode) {
  return mode == ClassifyMode::kSideInfo ? geo.side_info_quadruples()
                                         : geo.distributed_quadruples();
}

enum class BlockRelation { kDistinct, kEqual, kNested };

BlockRelation relation(int pair, int a, int b) {
  if (pair > a && pair > b) return BlockRelation::kDistinct;
  if (pair == a && pair == b) return BlockRelation::kEqual;
  return BlockRelation::kNested;
}

struct CaseResult {
  int branch = 0;
  bool pass = false;
};

// Zero-mean feature-count conditions, selected by how the pair ranks of each
// block compare with the component ranks.
CaseResult zero_mean_case(const Quadruple& q, int m1, int m2, const GeometryTable& geo) {
  const ComponentRanks& a = geo.ranks(q.a);
  const ComponentRanks& b = geo.ranks(q.b);
  const PairRanks& p = geo.pair(q).ranks;
  const int min_r1 = std::min(a.r_x1, b.r_x1);
  const int min_r2 = std::min(a.r_x2, b.r_x2);
  const int min_r = std::min(a.r_x, b.r_x);
  // Dimensions of each block not explained by the other block.
  const int min_cond1 = std::min(a.r_x - a.r_x2, b.r_x - b.r_x2);
  const int min_cond2 = std::min(a.r_x - a.r_x1, b.r_x - b.r_x1);
  const BlockRelation b1 = relation(p.r_x1_pair, a.r_x1, b.r_x1);
  const BlockRelation b2 = relation(p.r_x2_pair, a.r_x2, b.r_x2);
  const bool joint_distinct = relation(p.r_x_pair, a.r_x, b.r_x) == BlockRelation::kDistinct;

  CaseResult out;
  if (joint_distinct && b1 == BlockRelation::kDistinct && b2 == BlockRelation::kDistinct) {
    out.branch = 1;
    out.pass = m1 > min_r1 || m2 > min_r2 || m1 + m2 > min_r;
  } else if (joint_distinct && b1 == BlockRelation::kEqual && b2 == BlockRelation::kEqual) {
    out.branch = 2;
    out.pass = m1 > min_cond1 && m2 > min_cond2 && m1 + m2 > min_r;
  } else if (joint_distinct && b1 == BlockRelation::kDistinct && b2 == BlockRelation::kEqual) {
    out.branch = 3;
    out.pass = m1 > min_r1 || (m1 > min_cond1 && m1 + m2 > min_r);
  } else if (joint_distinct && b1 == BlockRelation::kEqual && b2 == BlockRelation::kDistinct) {
    out.branch = 4;
    out.pass = m2 > min_r2 || (m2 > min_cond2 && m1 + m2 > min_r);
  } else {
    // Nested ranges: no enumerated case; decide from the pairwise order.
    out.branch = 0;
    out.pass = pairwise_diversity(q, m1, m2, geo) > 0.0;
  }
  return out;
}

// Nonzero-mean conditions for a quadruple whose joint mean difference is
// outside the range of the summed covariances.
CaseResult nonzero_mean_case(const PairGeometry& g, int m1, int m2) {
  const int r1 = g.ranks.r_x1_pair;
  const int r2 = g.ranks.r_x2_pair;
  const int r = g.ranks.r_x_pair;
  CaseResult out;
  if (!g.mu1_in && !g.mu2_in) {
    out.branch = 1;
    out.pass = m1 > r1 || m2 > r2 || m1 + m2 > r;
  } else if (g.mu1_in && g.mu2_in) {
    out.branch = 2;
    out.pass = m1 > r - r2 && m2 > r - r1 && m1 + m2 > r;
  } else if (!g.mu1_in) {
    out.branch = 3;
    out.pass = m1 > r1 || (m1 > r - r2 && m1 + m2 > r);
  } else {
    out.branch = 4;
    out.pass = m2 > r2 || (m2 > r - r1 && m1 + m2 > r);
  }
  return out;
}

void check_counts(int m1, int m2) {
  if (m1 < 0 || m2 < 0) throw Error(ErrorCode::kInvalidInput, "feature counts must be >= 0");
}

}  // namespace

const char* mode_name(ClassifyMode m) noexcept {
  return m == ClassifyMode::kSideInfo ? "side_info" : "distributed";
}

ClassifyMode parse_mode(const std::string& name) {
  if (name == "side_info") return ClassifyMode::kSideInfo;
  if (name == "distributed") return ClassifyMode::kDistributed;
  throw Error(ErrorCode::kInvalidInput, "unknown classification mode '" + name + "'");
}

const char* outcome_name(Outcome o) noexcept {
  switch (o) {
    case Outcome::kPhaseTransition: return "phase_transition";
    case Outcome::kErrorFloor: return "error_floor";
    case Outcome::kExponentialDecay: return "exponential_decay";
    case Outcome::kPolynomialDecay: return "polynomial_decay";
  }
  return "unknown";
}

double log_class_likelihood(const Vector& y, ClassPair pair, const JointGmm& model,
                            const SensingPair& phi, double sigma2) {
  check_conforms(phi, model.n1(), model.n2());
  const Matrix a = assemble(phi);
  return component_log_likelihood(project_component(model, pair, a), y, sigma2);
}

int map_side_info(const ProjectedModel& pm, const Vector& y, double sigma2) {
  const Vector lj = pm.log_joint(y, sigma2);
  const int k1 = pm.model().k1();
  int best = -1;
  double best_score = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < k1; ++i) {
    std::vector<double> terms;
    for (std::size_t t = 0; t < pm.size(); ++t)
      if (pm[t].pair.i == i) terms.push_back(lj(static_cast<Eigen::Index>(t)));
    if (terms.empty()) continue;
    const double score =
        log_sum_exp(Eigen::Map<const Vector>(terms.data(), static_cast<Eigen::Index>(terms.size())));
    if (best < 0 || score > best_score) {
      best = i;
      best_score = score;
    }
  }
  return best;
}

int map_side_info(const Vector& y, const JointGmm& model, const SensingPair& phi, double sigma2) {
  return map_side_info(ProjectedModel(model, phi), y, sigma2);
}

ClassPair map_distributed(const ProjectedModel& pm, const Vector& y, double sigma2) {
  const Vector lj = pm.log_joint(y, sigma2);
  std::size_t best = 0;
  for (std::size_t t = 1; t < pm.size(); ++t)
    if (lj(static_cast<Eigen::Index>(t)) > lj(static_cast<Eigen::Index>(best))) best = t;
  return pm[best].pair;
}

ClassPair map_distributed(const Vector& y, const JointGmm& model, const SensingPair& phi,
                          double sigma2) {
  return map_distributed(ProjectedModel(model, phi), y, sigma2);
}

BhattacharyyaTable::BhattacharyyaTable(const JointGmm& model, const SensingPair& phi)
    : model_(&model), pm_(model, phi) {
  const Matrix a = assemble(phi);
  const auto& support = model.support();
  const std::size_t n = support.size();
  terms_.reserve(n * (n - 1) / 2);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const Matrix& fa = model.covariance_factor(support[i]);
      const Matrix& fb = model.covariance_factor(support[j]);
      Matrix g(a.rows(), fa.cols() + fb.cols());
      g << a * fa, a * fb;
      g /= std::sqrt(2.0);
      Term t;
      if (g.size() > 0) {
        Eigen::JacobiSVD<Matrix> svd(g, Eigen::ComputeThinU);
        t.u = svd.matrixU();
        t.s = svd.singularValues();
      } else {
        t.u = Matrix(a.rows(), 0);
        t.s = Vector(0);
      }
      t.delta = pm_[i].mean_y - pm_[j].mean_y;
      terms_.push_back(std::move(t));
    }
  }
}

const BhattacharyyaTable::Term& BhattacharyyaTable::term(int a, int b) const {
  if (a > b) std::swap(a, b);
  const int n = static_cast<int>(pm_.size());
  // Row-major index into the strict upper triangle.
  const int idx = a * n - a * (a + 1) / 2 + (b - a - 1);
  return terms_[static_cast<std::size_t>(idx)];
}

double BhattacharyyaTable::log_det(const Vector& s, int m, double sigma2) const {
  double total = 0.0;
  for (Eigen::Index j = 0; j < s.size(); ++j) total += std::log(s(j) * s(j) + sigma2);
  return total + static_cast<double>(m - s.size()) * std::log(sigma2);
}

double BhattacharyyaTable::exponent(ClassPair a, ClassPair b, double sigma2) const {
  if (!(sigma2 > 0.0)) throw Error(ErrorCode::kInvalidInput, "noise variance must be positive");
  const int ia = pm_.index_of(a);
  const int ib = pm_.index_of(b);
  if (ia < 0 || ib < 0) throw Error(ErrorCode::kInvalidInput, "class pair not in the support");
  if (ia == ib || pm_.m() == 0) return 0.0;
  const Term& t = term(ia, ib);
  const int m = pm_.m();
  const Vector c = t.u.transpose() * t.delta;
  double quad = 0.0;
  for (Eigen::Index j = 0; j < t.s.size(); ++j) quad += c(j) * c(j) / (t.s(j) * t.s(j) + sigma2);
  if (t.s.size() < m) quad += (t.delta - t.u * c).squaredNorm() / sigma2;
  const double ld_m = log_det(t.s, m, sigma2);
  const double ld_a = log_det(pm_[static_cast<std::size_t>(ia)].s, m, sigma2);
  const double ld_b = log_det(pm_[static_cast<std::size_t>(ib)].s, m, sigma2);
  return quad / 8.0 + 0.5 * (ld_m - 0.5 * (ld_a + ld_b));
}

BoundValue BhattacharyyaTable::bound(double sigma2, ClassifyMode mode) const {
  const JointGmm& model = *model_;
  std::vector<double> logs;
  for (std::size_t a = 0; a < pm_.size(); ++a) {
    for (std::size_t b = 0; b < pm_.size(); ++b) {
      if (a == b) continue;
      const ClassPair pa = pm_[a].pair;
      const ClassPair pb = pm_[b].pair;
      double log_w;
      if (mode == ClassifyMode::kSideInfo) {
        if (pa.i == pb.i) continue;
        const double pi = model.prior_c1(pa.i);
        const double pj = model.prior_c1(pb.i);
        // p_C1(i) sqrt(p(k|i) p(l|j))
        log_w = std::log(pi) + 0.5 * (std::log(model.prior(pa) / pi) + std::log(model.prior(pb) / pj));
      } else {
        log_w = std::log(model.prior(pa));
      }
      logs.push_back(log_w - exponent(pa, pb, sigma2));
    }
  }
  BoundValue out;
  if (logs.empty()) return out;
  out.log_value =
      log_sum_exp(Eigen::Map<const Vector>(logs.data(), static_cast<Eigen::Index>(logs.size())));
  out.value = std::exp(out.log_value);
  out.lower = mode == ClassifyMode::kSideInfo ? out.value / model.k2() : out.value;
  return out;
}

double bhatt_exponent(ClassPair a, ClassPair b, const JointGmm& model, const SensingPair& phi,
                      double sigma2) {
  return BhattacharyyaTable(model, phi).exponent(a, b, sigma2);
}

BoundValue perr_upper_bound(const JointGmm& model, const SensingPair& phi, double sigma2,
                            ClassifyMode mode) {
  return BhattacharyyaTable(model, phi).bound(sigma2, mode);
}

double pairwise_diversity(const Quadruple& q, int m1, int m2, const GeometryTable& geo) {
  check_counts(m1, m2);
  const PairGeometry& g = geo.pair(q);
  const int r_pair = projected_rank(m1, m2, g.ranks);
  const int r_a = projected_rank(m1, m2, geo.ranks(q.a));
  const int r_b = projected_rank(m1, m2, geo.ranks(q.b));
  return 0.5 * (r_pair - 0.5 * (r_a + r_b));
}

DiversityReport diversity_order(const GeometryTable& geo, int m1, int m2, ClassifyMode mode) {
  DiversityReport rep;
  for (const Quadruple& q : quadruples(geo, mode)) {
    const double d = pairwise_diversity(q, m1, m2, geo);
    rep.per_quadruple[q] = d;
    if (d < rep.d) {
      rep.d = d;
      rep.binding.clear();
    }
    if (d == rep.d) rep.binding.push_back(q);
  }
  return rep;
}

Verdict classification_phase_verdict(const GeometryTable& geo, int m1, int m2,
                                     ClassifyMode mode) {
  check_counts(m1, m2);
  if (!geo.zero_mean())
    throw Error(ErrorCode::kUnsupported,
                "model has nonzero means; use the exponential-decay verdict");
  Verdict v;
  v.theorem = mode == ClassifyMode::kSideInfo ? kZeroMeanSideInfo : kZeroMeanDistributed;
  std::optional<Quadruple> floor_quad;
  std::optional<Quadruple> failing;
  for (const Quadruple& q : quadruples(geo, mode)) {
    const ComponentRanks& a = geo.ranks(q.a);
    const ComponentRanks& b = geo.ranks(q.b);
    const PairRanks& p = geo.pair(q).ranks;
    if (p.r_x_pair == a.r_x && p.r_x_pair == b.r_x) {
      v.cases[q] = 0;
      if (!floor_quad) floor_quad = q;
      continue;
    }
    const CaseResult c = zero_mean_case(q, m1, m2, geo);
    v.cases[q] = c.branch;
    if (!c.pass && !failing) failing = q;
  }
  const DiversityReport rep = diversity_order(geo, m1, m2, mode);
  if (floor_quad || failing) {
    v.outcome = Outcome::kErrorFloor;
    v.binding = floor_quad ? floor_quad : failing;
    v.d = 0.0;
  } else {
    v.outcome = Outcome::kPhaseTransition;
    v.d = rep.d;
    if (!rep.binding.empty()) v.binding = rep.binding.front();
  }
  if (v.binding) v.case_branch = v.cases[*v.binding];
  return v;
}

Verdict exp_decay_verdict(const GeometryTable& geo, int m1, int m2, ClassifyMode mode) {
  check_counts(m1, m2);
  if (geo.zero_mean()) return classification_phase_verdict(geo, m1, m2, mode);
  Verdict v;
  v.theorem = mode == ClassifyMode::kSideInfo ? kNonzeroMeanSideInfo : kNonzeroMeanDistributed;
  std::vector<Quadruple> slow;  // quadruples without exponential decay
  for (const Quadruple& q : quadruples(geo, mode)) {
    const PairGeometry& g = geo.pair(q);
    if (g.mu_in) {
      v.cases[q] = 0;
      slow.push_back(q);
      continue;
    }
    const CaseResult c = nonzero_mean_case(g, m1, m2);
    v.cases[q] = c.branch;
    if (!c.pass) slow.push_back(q);
  }
  if (slow.empty()) {
    v.outcome = Outcome::kExponentialDecay;
    v.d = std::numeric_limits<double>::infinity();
    return v;
  }
  v.d = std::numeric_limits<double>::infinity();
  for (const Quadruple& q : slow) {
    const double d = pairwise_diversity(q, m1, m2, geo);
    if (d < v.d) {
      v.d = d;
      v.binding = q;
    }
  }
  v.outcome = v.d > 0.0 ? Outcome::kPolynomialDecay : Outcome::kErrorFloor;
  v.case_branch = v.cases[*v.binding];
  return v;
}

}  // namespace gmmsi
