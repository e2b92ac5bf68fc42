#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gmmsi/geometry.hpp"
#include "gmmsi/projection.hpp"

namespace gmmsi {

/// Which part of the signal is estimated: x1 alone (side-information
/// decoder) or the whole x (distributed decoder).
enum class ReconTarget { kX1, kX };

const char* target_name(ReconTarget t) noexcept;

/// Affine conditional-mean estimator x_hat = gain * y + offset.
struct GaussianEstimator {
  Matrix gain;
  Vector offset;
  double mmse_value = 0.0;

  Vector apply(const Vector& y) const { return gain * y + offset; }
};

GaussianEstimator gaussian_estimator(const JointComponent& c, const SensingPair& phi, double sigma2,
                                     ReconTarget target = ReconTarget::kX1);
Vector gaussian_cme(const Vector& y, const JointComponent& c, const SensingPair& phi, double sigma2,
                    ReconTarget target = ReconTarget::kX1);
double gaussian_mmse(const JointComponent& c, const SensingPair& phi, double sigma2,
                     ReconTarget target = ReconTarget::kX1);

struct GmmPosterior {
  std::vector<ClassPair> pairs;
  Vector weights;                   ///< p~(i,k), sums to one
  std::vector<Vector> means;        ///< mu~ per pair
  std::vector<Matrix> covariances;  ///< Sigma~ per pair; empty unless requested

  double weight(ClassPair p) const;
};

/// Posterior-weighted mixture of per-pair Wiener estimates.
Vector gmm_cme(const ProjectedModel& pm, const Vector& y, double sigma2,
               ReconTarget target = ReconTarget::kX1, GmmPosterior* posterior = nullptr,
               bool with_covariances = false);
Vector gmm_cme(const Vector& y, const JointGmm& model, const SensingPair& phi, double sigma2,
               ReconTarget target = ReconTarget::kX1, GmmPosterior* posterior = nullptr);

/// MAP class pair, then that pair's Wiener estimate.
Vector classify_reconstruct(const ProjectedModel& pm, const Vector& y, double sigma2,
                            ReconTarget target = ReconTarget::kX1);
Vector classify_reconstruct(const Vector& y, const JointGmm& model, const SensingPair& phi,
                            double sigma2, ReconTarget target = ReconTarget::kX1);

/// sum over (i,k) of p(i,k) * MMSE of the Gaussian with pair (i,k).
double mse_lower_bound(const ProjectedModel& pm, double sigma2,
                       ReconTarget target = ReconTarget::kX1);
double mse_lower_bound(const JointGmm& model, const SensingPair& phi, double sigma2,
                       ReconTarget target = ReconTarget::kX1);

enum class ReconTheorem {
  kGaussian,           ///< m1 >= r_x1, or m1 >= r_x - r_x2 and m1 + m2 >= r_x
  kGmmSufficient,      ///< same with strict inequalities, every pair
  kGmmNecessary,       ///< same with >=, every pair
  kDistGaussian,       ///< m1 >= r_x - r_x2, m2 >= r_x - r_x1, m1 + m2 >= r_x
  kDistGmmSufficient,  ///< strict, every pair
  kDistGmmNecessary,   ///< >=, every pair
};

const char* theorem_name(ReconTheorem t) noexcept;
ReconTheorem parse_theorem(const std::string& name);
ReconTarget theorem_target(ReconTheorem t) noexcept;

struct ReconVerdict {
  bool transition = false;
  ReconTheorem theorem = ReconTheorem::kGaussian;
  /// First violating pair, or when all pass, the pair with the largest r_x.
  std::optional<ClassPair> binding;

  const char* outcome() const noexcept { return transition ? "transition" : "no_transition"; }
};

/// Throws kUnsupported when a Gaussian tag is used with more than one
/// component.
ReconVerdict reconstruction_phase_verdict(const GeometryTable& geo, int m1, int m2,
                                          ReconTheorem theorem);

}  // namespace gmmsi
