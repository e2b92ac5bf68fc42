#include "gmmsi/geometry.hpp"

#include <algorithm>
#include <limits>

namespace gmmsi {

namespace {

struct Spectrum {
  Eigen::JacobiSVD<Matrix> svd;
  int rank = 0;
};

Spectrum spectrum(const Matrix& m, double tol_factor, bool want_u) {
  if (!m.allFinite()) throw Error(ErrorCode::kInvalidInput, "matrix has non-finite entries");
  Spectrum s;
  if (m.size() == 0) return s;
  s.svd.compute(m, want_u ? Eigen::ComputeThinU : 0);
  const Vector& sv = s.svd.singularValues();
  const double smax = sv.size() > 0 ? sv(0) : 0.0;
  if (smax <= 0.0) return s;
  const double tau = tol_factor * smax * static_cast<double>(std::max(m.rows(), m.cols())) *
                     std::numeric_limits<double>::epsilon();
  for (Eigen::Index j = 0; j < sv.size(); ++j)
    if (sv(j) > tau) ++s.rank;
  return s;
}

std::string one_based(int v) { return std::to_string(v + 1); }

}  // namespace

int numerical_rank(const Matrix& m, double tol_factor) {
  return spectrum(m, tol_factor, false).rank;
}

Matrix range_basis(const Matrix& m, double tol_factor) {
  Spectrum s = spectrum(m, tol_factor, true);
  if (s.rank == 0) return Matrix(m.rows(), 0);
  return s.svd.matrixU().leftCols(s.rank);
}

bool in_range(const Vector& v, const Matrix& sigma, double tol, double tol_factor) {
  if (v.size() != sigma.rows())
    throw Error(ErrorCode::kDimensionMismatch, "vector and matrix do not conform");
  const double norm = v.norm();
  if (norm == 0.0) return true;
  const Matrix u = range_basis(sigma, tol_factor);
  const Vector residual = v - u * (u.transpose() * v);
  return residual.norm() <= tol * norm;
}

int projected_rank(int m1, int m2, int r_x1, int r_x2, int r_x) {
  return std::min(r_x, std::min(m1, r_x1) + std::min(m2, r_x2));
}

int projected_rank_numeric(const SensingPair& phi, const Matrix& sigma, double tol_factor) {
  const Matrix a = assemble(phi);
  if (sigma.rows() != a.cols() || sigma.cols() != a.cols())
    throw Error(ErrorCode::kDimensionMismatch, "covariance does not conform to the kernel");
  return numerical_rank(a * sigma * a.transpose(), tol_factor);
}

ComponentRanks component_ranks(const JointComponent& c, double tol_factor) {
  return {numerical_rank(c.sigma1, tol_factor), numerical_rank(c.sigma2, tol_factor),
          numerical_rank(c.covariance(), tol_factor)};
}

GeometryTable GeometryTable::from_ranks(
    std::vector<std::pair<ClassPair, ComponentRanks>> components,
    std::vector<PairGeometry> pairs, bool zero_mean) {
  GeometryTable t;
  t.zero_mean_ = zero_mean;
  std::sort(components.begin(), components.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  for (auto& [p, r] : components) {
    if (!t.components_.emplace(p, r).second)
      throw Error(ErrorCode::kInvalidInput, "duplicate component in rank table");
    t.order_.push_back(p);
  }
  std::sort(pairs.begin(), pairs.end(),
            [](const PairGeometry& a, const PairGeometry& b) { return a.q < b.q; });
  for (auto& g : pairs) {
    if (!t.components_.count(g.q.a) || !t.components_.count(g.q.b))
      throw Error(ErrorCode::kInvalidInput, "pair refers to an unknown component");
    if (g.q.a == g.q.b) throw Error(ErrorCode::kInvalidInput, "pair of identical components");
    if (!t.pairs_.emplace(g.q, t.pair_list_.size()).second)
      throw Error(ErrorCode::kInvalidInput, "duplicate quadruple in rank table");
    t.pair_list_.push_back(g);
  }
  return t;
}

const ComponentRanks& GeometryTable::ranks(ClassPair p) const {
  auto it = components_.find(p);
  if (it == components_.end())
    throw Error(ErrorCode::kInvalidInput, "component (" + one_based(p.i) + "," + one_based(p.k) +
                                              ") is not in the geometry table");
  return it->second;
}

const PairGeometry& GeometryTable::pair(const Quadruple& q) const {
  auto it = pairs_.find(q);
  if (it == pairs_.end())
    throw Error(ErrorCode::kInvalidInput,
                "quadruple (" + one_based(q.a.i) + "," + one_based(q.a.k) + "," +
                    one_based(q.b.i) + "," + one_based(q.b.k) + ") is not in the geometry table");
  return pair_list_[it->second];
}

std::vector<Quadruple> GeometryTable::side_info_quadruples() const {
  std::vector<Quadruple> out;
  for (const auto& g : pair_list_)
    if (g.q.a.i != g.q.b.i) out.push_back(g.q);
  return out;
}

std::vector<Quadruple> GeometryTable::distributed_quadruples() const {
  std::vector<Quadruple> out;
  out.reserve(pair_list_.size());
  for (const auto& g : pair_list_) out.push_back(g.q);
  return out;
}

CsvTable GeometryTable::components_csv() const {
  CsvTable t({"i", "k", "r_x1", "r_x2", "r_x"});
  for (const ClassPair& p : order_) {
    const ComponentRanks& r = components_.at(p);
    t.add_row({one_based(p.i), one_based(p.k), std::to_string(r.r_x1), std::to_string(r.r_x2),
               std::to_string(r.r_x)});
  }
  return t;
}

CsvTable GeometryTable::pairs_csv() const {
  CsvTable t({"i", "k", "j", "l", "r_x1_pair", "r_x2_pair", "r_x_pair", "mu1_in", "mu2_in",
              "mu_in"});
  for (const auto& g : pair_list_) {
    t.add_row({one_based(g.q.a.i), one_based(g.q.a.k), one_based(g.q.b.i), one_based(g.q.b.k),
               std::to_string(g.ranks.r_x1_pair), std::to_string(g.ranks.r_x2_pair),
               std::to_string(g.ranks.r_x_pair), g.mu1_in ? "1" : "0", g.mu2_in ? "1" : "0",
               g.mu_in ? "1" : "0"});
  }
  return t;
}

GeometryTable geometry_summary(const JointGmm& model, double tol_factor, double range_tol) {
  std::vector<std::pair<ClassPair, ComponentRanks>> comps;
  for (const ClassPair& p : model.support())
    comps.emplace_back(p, component_ranks(model.component(p), tol_factor));

  std::vector<PairGeometry> pairs;
  std::map<Quadruple, PairGeometry> seen;
  for (const Quadruple& q : index_sets(model).s_dc) {
    auto mirror = seen.find(Quadruple{q.b, q.a});
    if (mirror != seen.end()) {
      PairGeometry g = mirror->second;
      g.q = q;
      pairs.push_back(g);
      continue;
    }
    const JointComponent& a = model.component(q.a);
    const JointComponent& b = model.component(q.b);
    PairGeometry g;
    g.q = q;
    const Matrix s1 = a.sigma1 + b.sigma1;
    const Matrix s2 = a.sigma2 + b.sigma2;
    const Matrix s = a.covariance() + b.covariance();
    g.ranks = {numerical_rank(s1, tol_factor), numerical_rank(s2, tol_factor),
               numerical_rank(s, tol_factor)};
    g.mu1_in = in_range(a.mu1 - b.mu1, s1, range_tol, tol_factor);
    g.mu2_in = in_range(a.mu2 - b.mu2, s2, range_tol, tol_factor);
    g.mu_in = in_range(a.mean() - b.mean(), s, range_tol, tol_factor);
    seen.emplace(q, g);
    pairs.push_back(g);
  }
  GeometryTable t = GeometryTable::from_ranks(std::move(comps), std::move(pairs), true);
  t.zero_mean_ = model.zero_mean();
  return t;
}

}  // namespace gmmsi
