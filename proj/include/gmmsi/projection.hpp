#pragma once

#include <vector>

#include "gmmsi/model.hpp"
#include "gmmsi/sensing.hpp"

namespace gmmsi {

/// One component seen through a kernel. With Sigma_x = F F^T and the thin
/// SVD Phi F = U S V^T (V square), every quantity needed at a given noise
/// level is a diagonal scaling in these bases:
///   Sigma_y = U diag(s^2) U^T + sigma2 I,
///   W       = F V diag(s / (s^2 + sigma2)) U^T.
/// This stays accurate when sigma2 is many orders below the signal scale.
struct ProjectedComponent {
  ClassPair pair;
  double log_prior = 0.0;
  Vector mean;       ///< mu_x (n)
  Vector mean_y;     ///< Phi mu_x (m)
  Matrix u;          ///< m x k, k = min(m, r)
  Vector s;          ///< k singular values, descending
  Matrix fv;         ///< n x r: F V
  Vector fv1_norm2;  ///< squared column norms of the first n1 rows of F V
  Vector fv_norm2;   ///< squared column norms of F V

  int m() const { return static_cast<int>(mean_y.size()); }
  int k() const { return static_cast<int>(s.size()); }
};

ProjectedComponent project_component(const JointGmm& model, ClassPair p, const Matrix& phi);

/// log N(y; Phi mu, Phi Sigma Phi^T + sigma2 I).
double component_log_likelihood(const ProjectedComponent& pc, const Vector& y, double sigma2);

/// All components of a model projected through one kernel.
class ProjectedModel {
 public:
  ProjectedModel(const JointGmm& model, const SensingPair& phi);

  const JointGmm& model() const { return *model_; }
  std::size_t size() const { return comps_.size(); }
  const ProjectedComponent& operator[](std::size_t idx) const { return comps_[idx]; }
  int m() const { return m_; }
  /// Support index of a class pair, or -1.
  int index_of(ClassPair p) const;

  double log_likelihood(std::size_t idx, const Vector& y, double sigma2) const;
  /// log p(i,k) + log p(y | i,k) for every support entry.
  Vector log_joint(const Vector& y, double sigma2) const;

  Vector wiener_x1(std::size_t idx, const Vector& y, double sigma2) const;
  Vector wiener_x(std::size_t idx, const Vector& y, double sigma2) const;
  double mmse_x1(std::size_t idx, double sigma2) const;
  double mmse_x(std::size_t idx, double sigma2) const;
  Matrix posterior_cov_x1(std::size_t idx, double sigma2) const;

 private:
  const JointGmm* model_;
  int m_ = 0;
  int n1_ = 0;
  std::vector<ProjectedComponent> comps_;
};

double log_sum_exp(const Vector& v);

}  // namespace gmmsi
