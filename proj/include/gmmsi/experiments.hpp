#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "gmmsi/classify.hpp"
#include "gmmsi/csv.hpp"
#include "gmmsi/reconstruct.hpp"
#include "gmmsi/sensing.hpp"

namespace gmmsi {

enum class Task { kClassifySi, kClassifyDc, kReconstructSi, kReconstructDc };

const char* task_name(Task t) noexcept;
Task parse_task(const std::string& name);
bool is_classify(Task t) noexcept;
ClassifyMode task_mode(Task t) noexcept;
ReconTarget task_target(Task t) noexcept;

/// Log-spaced, strictly decreasing grid from `hi` down to `lo` inclusive.
std::vector<double> sigma2_grid(double hi = 1e-1, double lo = 1e-8, int per_decade = 5);

inline constexpr std::int64_t kMaxTrials = 1000000;

struct SweepConfig {
  Task task = Task::kClassifySi;
  int m1 = 0;
  int m2 = 0;
  std::vector<double> sigma2 = sigma2_grid();
  std::int64_t trials = 1000;
  std::uint64_t seed = 1;
  KernelPolicy kernel = KernelPolicy::kGaussian;
  /// Use one kernel (index 0) for every trial instead of one per trial.
  bool freeze_kernel = false;
  /// Classification only: double the trial count until the smallest-sigma2
  /// point has this many errors or kMaxTrials is reached. 0 disables.
  std::int64_t min_errors = 0;
};

/// Throws kInvalidInput for grids that are not strictly decreasing and
/// positive, trial counts outside [100, kMaxTrials], or negative counts.
void validate(const SweepConfig& cfg, const JointGmm& model);

struct SweepPoint {
  double sigma2 = 0.0;
  std::int64_t trials = 0;
  /// Classification: stratified error rate. Reconstruction: mean squared
  /// error of the mixture conditional mean.
  double value = 0.0;
  double lo = 0.0;  ///< 95% interval (one-sided upper bound when no errors)
  double hi = 0.0;
  double se = 0.0;
  std::int64_t errors = 0;

  double bound = 0.0;  ///< union bound (classification)

  double mse_cr = 0.0;  ///< classify-and-reconstruct
  double mse_cr_se = 0.0;
  double mse_y1 = 0.0;  ///< mixture estimate from y1 alone
  double mse_y1_se = 0.0;
  double mse_lb = 0.0;  ///< Monte Carlo mean of the genie MMSE over the same trials
  double cr_gap = 0.0;  ///< mean of (classify-and-reconstruct error - mixture error)
  double cr_gap_se = 0.0;
  double lb_gap = 0.0;  ///< mean of (mixture error - genie MMSE)
  double lb_gap_se = 0.0;
  std::optional<double> mmse_gauss;  ///< single-component models only
};

struct SweepCurve {
  SweepConfig config;
  std::vector<SweepPoint> points;

  CsvTable csv() const;
};

SweepCurve run_sweep(const JointGmm& model, const SweepConfig& cfg);

/// Two-sided Wilson score interval; with zero successes the upper end is
/// the one-sided bound.
std::pair<double, double> wilson_interval(double p, double n);

struct SlopeFit {
  double slope = 0.0;
  int used = 0;
  int excluded = 0;  ///< non-finite or non-positive values in the window
};

/// Least-squares slope of log(value) against log(sigma2) over the points
/// with sigma2 <= min(sigma2) * 10^decades. Positive for decaying curves.
/// Throws kUndefined with fewer than three usable points.
SlopeFit fit_slope(const std::vector<double>& sigma2, const std::vector<double>& values,
                   double decades);
SlopeFit fit_slope(const SweepCurve& curve, double decades);

/// Whether the intervals of the points in the last `decades` decades share a
/// common value.
bool flat_within_ci(const SweepCurve& curve, double decades);

struct IntRange {
  int lo = 0;
  int hi = 0;
};

/// Parses "a..b" (inclusive) or a single integer.
IntRange parse_range(const std::string& text);

struct ProbeConfig {
  Task task = Task::kReconstructSi;
  std::vector<double> sigma2 = {1e-8, 1e-9, 1e-10};
  std::int64_t trials = 200;
  std::uint64_t seed = 1;
  KernelPolicy kernel = KernelPolicy::kGaussian;
  /// Minimum fitted slope for a probed cell to count as a transition.
  double slope_threshold = 0.1;
};

struct RegionCell {
  int m1 = 0;
  int m2 = 0;
  std::vector<std::string> verdicts;  ///< one per predicate
  std::optional<std::string> probe;   ///< "transition" or "floor"
};

struct RegionGrid {
  std::vector<std::string> predicates;
  std::vector<RegionCell> cells;

  CsvTable csv() const;
};

/// Predicates are theorem tags: the four classification tags or any
/// reconstruction tag.
RegionGrid region_map(const JointGmm& model, const GeometryTable& geo, IntRange m1, IntRange m2,
                      const std::vector<std::string>& predicates,
                      const std::optional<ProbeConfig>& probe = std::nullopt);

/// Outcome string of one predicate at (m1, m2).
std::string predicate_outcome(const GeometryTable& geo, const std::string& tag, int m1, int m2);

CsvTable classification_verdict_csv(const std::vector<std::pair<ClassifyMode, Verdict>>& rows,
                                    const std::vector<std::pair<int, int>>& counts);
CsvTable reconstruction_verdict_csv(const std::vector<ReconVerdict>& rows,
                                    const std::vector<std::pair<int, int>>& counts);

/// Worker count: GMMSI_THREADS when set to a positive integer, otherwise the
/// hardware concurrency.
int worker_count();

/// Runs body(i) for i in [0, n) on worker_count() threads.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace gmmsi
