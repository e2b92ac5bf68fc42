#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "gmmsi/rng.hpp"
#include "gmmsi/types.hpp"

namespace gmmsi {

/// Common/innovation factor representation of one class-conditioned pair:
///   x1 = P_c1 z_c + P_1 z_1 + mu1,  x2 = P_c2 z_c + P_2 z_2 + mu2
/// with z_c, z_1, z_2 independent standard normal.
struct FactorModel {
  Vector mu1;
  Vector mu2;
  Matrix p_c1;  ///< n1 x s_c
  Matrix p_c2;  ///< n2 x s_c
  Matrix p_1;   ///< n1 x s_1
  Matrix p_2;   ///< n2 x s_2

  /// Stacked factor [[P_c1, P_1, 0], [P_c2, 0, P_2]] with Sigma_x = P P^T.
  Matrix stacked() const;
};

/// Class-conditioned joint Gaussian of (x1, x2).
struct JointComponent {
  Vector mu1;
  Vector mu2;
  Matrix sigma1;   ///< n1 x n1
  Matrix sigma2;   ///< n2 x n2
  Matrix sigma12;  ///< n1 x n2 cross-covariance
  /// Present when the component was built from factors; kept only so the
  /// model file round-trips in the representation the user supplied.
  std::optional<FactorModel> factors;

  Eigen::Index n1() const { return mu1.size(); }
  Eigen::Index n2() const { return mu2.size(); }
  Vector mean() const;
  Matrix covariance() const;
};

JointComponent component_from_factors(const FactorModel& f);

JointComponent component_from_blocks(Vector mu1, Vector mu2, Matrix sigma1,
                                     Matrix sigma2, Matrix sigma12);

/// Joint GMM over (x1, x2, C1, C2). Immutable once constructed; the
/// constructor validates every invariant and precomputes low-rank square
/// roots of the joint covariances.
class JointGmm {
 public:
  /// `components` is indexed by i * k2 + k; entries with zero prior may be
  /// empty. Throws Error(kModelValidation) on any violated invariant.
  JointGmm(int n1, int n2, Matrix prior,
           std::vector<std::optional<JointComponent>> components);

  int n1() const { return n1_; }
  int n2() const { return n2_; }
  int n() const { return n1_ + n2_; }
  int k1() const { return k1_; }
  int k2() const { return k2_; }

  const Matrix& prior() const { return prior_; }
  double prior(ClassPair p) const { return prior_(p.i, p.k); }
  /// p_C1(i)
  double prior_c1(int i) const { return prior_.row(i).sum(); }

  bool has_component(ClassPair p) const;
  const JointComponent& component(ClassPair p) const;
  /// n x r matrix F with Sigma_x = F F^T (eigenvalues below the rank
  /// threshold dropped, negative ones clipped).
  const Matrix& covariance_factor(ClassPair p) const;

  /// Pairs with positive prior, lexicographic.
  const std::vector<ClassPair>& support() const { return support_; }

  /// All component means vanish (max abs entry <= tol).
  bool zero_mean(double tol = 1e-12) const;

  int flat_index(ClassPair p) const { return p.i * k2_ + p.k; }

 private:
  int n1_;
  int n2_;
  int k1_;
  int k2_;
  Matrix prior_;
  std::vector<std::optional<JointComponent>> components_;
  std::vector<Matrix> factors_;
  std::vector<ClassPair> support_;
};

/// Index sets S, S_SIC and S_DC in lexicographic (i,k,j,l) order.
struct IndexSets {
  std::vector<ClassPair> s;
  std::vector<Quadruple> s_sic;
  std::vector<Quadruple> s_dc;
};

IndexSets index_sets(const JointGmm& model);

/// Labeled draws; column t of x1/x2 belongs to labels[t].
struct LabeledSampleSet {
  Matrix x1;
  Matrix x2;
  std::vector<ClassPair> labels;
  std::uint64_t seed = 0;

  std::size_t size() const { return labels.size(); }
};

/// Draw one vector x = mu + F g from component `p` using stream `stream`.
Vector sample_component(const JointGmm& model, ClassPair p,
                        rng::Stream& stream);

LabeledSampleSet sample_joint(const JointGmm& model, std::size_t count,
                              std::uint64_t seed);

/// Symmetric PSD square root factor: F (n x r) with F F^T = A up to the
/// eigenvalues dropped below tol_factor * lambda_max * n * eps.
Matrix psd_factor(const Matrix& a, double tol_factor = 100.0);

}  // namespace gmmsi
