#pragma once

#include <map>
#include <string>
#include <vector>

#include "gmmsi/csv.hpp"
#include "gmmsi/model.hpp"
#include "gmmsi/sensing.hpp"

namespace gmmsi {

inline constexpr double kDefaultRankTol = 100.0;
inline constexpr double kDefaultRangeTol = 1e-8;

struct ComponentRanks {
  int r_x1 = 0;
  int r_x2 = 0;
  int r_x = 0;
  bool operator==(const ComponentRanks&) const = default;
};

/// Ranks of the summed covariances of two components.
struct PairRanks {
  int r_x1_pair = 0;
  int r_x2_pair = 0;
  int r_x_pair = 0;
  bool operator==(const PairRanks&) const = default;
};

/// Singular values above tol_factor * sigma_max * max(rows, cols) * eps.
/// Throws Error(kInvalidInput) on non-finite entries.
int numerical_rank(const Matrix& m, double tol_factor = kDefaultRankTol);

/// Orthonormal basis of the numerical range, cut at the same threshold as
/// numerical_rank.
Matrix range_basis(const Matrix& m, double tol_factor = kDefaultRankTol);

/// ||(I - U U^T) v|| <= tol ||v|| for U = range_basis(sigma).
bool in_range(const Vector& v, const Matrix& sigma, double tol = kDefaultRangeTol,
              double tol_factor = kDefaultRankTol);

/// min{ r_x, min(m1, r_x1) + min(m2, r_x2) }.
int projected_rank(int m1, int m2, int r_x1, int r_x2, int r_x);
inline int projected_rank(int m1, int m2, const ComponentRanks& r) {
  return projected_rank(m1, m2, r.r_x1, r.r_x2, r.r_x);
}
inline int projected_rank(int m1, int m2, const PairRanks& r) {
  return projected_rank(m1, m2, r.r_x1_pair, r.r_x2_pair, r.r_x_pair);
}

/// numerical_rank(Phi Sigma Phi^T) with Phi the assembled kernel.
int projected_rank_numeric(const SensingPair& phi, const Matrix& sigma,
                           double tol_factor = kDefaultRankTol);

ComponentRanks component_ranks(const JointComponent& c, double tol_factor = kDefaultRankTol);

/// Ranks and mean-difference range flags for one ordered pair of components.
struct PairGeometry {
  Quadruple q;
  PairRanks ranks;
  bool mu1_in = true;  ///< mu1 difference in Im(Sigma_x1 sum)
  bool mu2_in = true;
  bool mu_in = true;   ///< joint mean difference in Im(Sigma_x sum)
};

/// Rank invariants of a model: one entry per component in S and one per
/// quadruple in S_DC.
class GeometryTable {
 public:
  GeometryTable() = default;

  /// Builds a table from precomputed ranks; used for rank-only what-if
  /// analysis. Pairs may cover any subset of quadruples.
  static GeometryTable from_ranks(std::vector<std::pair<ClassPair, ComponentRanks>> components,
                                  std::vector<PairGeometry> pairs, bool zero_mean = true);

  const std::vector<ClassPair>& components() const { return order_; }
  const ComponentRanks& ranks(ClassPair p) const;
  bool has_pair(const Quadruple& q) const { return pairs_.count(q) != 0; }
  const PairGeometry& pair(const Quadruple& q) const;
  const std::vector<PairGeometry>& pairs() const { return pair_list_; }

  /// Quadruples with i != j, lexicographic.
  std::vector<Quadruple> side_info_quadruples() const;
  /// All quadruples, lexicographic.
  std::vector<Quadruple> distributed_quadruples() const;

  bool zero_mean() const { return zero_mean_; }

  CsvTable components_csv() const;
  CsvTable pairs_csv() const;

 private:
  friend GeometryTable geometry_summary(const JointGmm&, double, double);

  std::vector<ClassPair> order_;
  std::map<ClassPair, ComponentRanks> components_;
  std::vector<PairGeometry> pair_list_;
  std::map<Quadruple, std::size_t> pairs_;
  bool zero_mean_ = true;
};

GeometryTable geometry_summary(const JointGmm& model, double tol_factor = kDefaultRankTol,
                               double range_tol = kDefaultRangeTol);

}  // namespace gmmsi
