#pragma once

#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gmmsi/geometry.hpp"
#include "gmmsi/projection.hpp"

namespace gmmsi {

enum class ClassifyMode {
  kSideInfo,     ///< estimate C1 only; errors are quadruples with i != j
  kDistributed,  ///< estimate (C1, C2); errors are all distinct pairs
};

const char* mode_name(ClassifyMode m) noexcept;
ClassifyMode parse_mode(const std::string& name);

/// log N(y; Phi mu, sigma2 I + Phi Sigma Phi^T) for class pair `pair`.
double log_class_likelihood(const Vector& y, ClassPair pair, const JointGmm& model,
                            const SensingPair& phi, double sigma2);

/// Zero-based estimate of C1: argmax_i log sum_k p(i,k) p(y|i,k). Ties go
/// to the smallest i.
int map_side_info(const ProjectedModel& pm, const Vector& y, double sigma2);
int map_side_info(const Vector& y, const JointGmm& model, const SensingPair& phi, double sigma2);

/// argmax over (i,k) of p(i,k) p(y|i,k); ties go to the lexicographically
/// smallest pair.
ClassPair map_distributed(const ProjectedModel& pm, const Vector& y, double sigma2);
ClassPair map_distributed(const Vector& y, const JointGmm& model, const SensingPair& phi,
                          double sigma2);

/// Bhattacharyya exponent K with exp(-K) = integral of sqrt(p(y|a) p(y|b)).
double bhatt_exponent(ClassPair a, ClassPair b, const JointGmm& model, const SensingPair& phi,
                      double sigma2);

struct BoundValue {
  double value = 0.0;
  double log_value = -std::numeric_limits<double>::infinity();
  double lower = 0.0;  ///< value / K2 (side information only; equals value otherwise)
};

/// Bhattacharyya terms for every pair of support components under one
/// kernel, precomputed so the bound can be evaluated at many noise levels.
class BhattacharyyaTable {
 public:
  BhattacharyyaTable(const JointGmm& model, const SensingPair& phi);

  double exponent(ClassPair a, ClassPair b, double sigma2) const;
  BoundValue bound(double sigma2, ClassifyMode mode) const;

 private:
  struct Term {
    Matrix u;   ///< left singular vectors of Phi [F_a F_b] / sqrt(2)
    Vector s;
    Vector delta;  ///< Phi (mu_a - mu_b)
  };
  const Term& term(int a, int b) const;
  double log_det(const Vector& s, int m, double sigma2) const;

  const JointGmm* model_;
  ProjectedModel pm_;
  std::vector<Term> terms_;  ///< upper triangle, a < b
};

/// Union bound on the misclassification probability. Side information:
///   sum_{i != j} p_C1(i) sum_{k,l} sqrt(p(k|i) p(l|j)) exp(-K(ik,jl));
/// distributed: sum over S_DC of p(i,k) exp(-K(ik,jl)).
BoundValue perr_upper_bound(const JointGmm& model, const SensingPair& phi, double sigma2,
                            ClassifyMode mode);

/// (r^(ik,jl) - (r^(ik) + r^(jl)) / 2) / 2 with Lemma-type projected ranks.
double pairwise_diversity(const Quadruple& q, int m1, int m2, const GeometryTable& geo);

struct DiversityReport {
  double d = std::numeric_limits<double>::infinity();
  std::vector<Quadruple> binding;
  std::map<Quadruple, double> per_quadruple;
};

DiversityReport diversity_order(const GeometryTable& geo, int m1, int m2, ClassifyMode mode);

enum class Outcome { kPhaseTransition, kErrorFloor, kExponentialDecay, kPolynomialDecay };
const char* outcome_name(Outcome o) noexcept;

struct Verdict {
  Outcome outcome = Outcome::kErrorFloor;
  std::string theorem;
  int case_branch = 0;  ///< case applied to the binding quadruple; 0 if none
  std::optional<Quadruple> binding;
  double d = 0.0;
  /// Case applied per quadruple of the mode's set (0: no enumerated case).
  std::map<Quadruple, int> cases;
};

/// Zero-mean low-noise verdict. Throws Error(kUnsupported) for nonzero means.
Verdict classification_phase_verdict(const GeometryTable& geo, int m1, int m2,
                                     ClassifyMode mode);

/// Nonzero-mean verdict: exponential decay, polynomial decay with d > 0, or
/// an error floor. Zero-mean tables defer to classification_phase_verdict.
Verdict exp_decay_verdict(const GeometryTable& geo, int m1, int m2, ClassifyMode mode);

}  // namespace gmmsi
