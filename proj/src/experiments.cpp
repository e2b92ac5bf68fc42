#include "gmmsi/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

namespace gmmsi {

namespace {

constexpr double kZ95 = 1.959964;
constexpr double kZ95OneSided = 1.644854;
constexpr std::size_t kChunk = 64;
constexpr std::int64_t kAnalyticKernels = 32;

[[noreturn]] void invalid(const std::string& msg) { throw Error(ErrorCode::kInvalidInput, msg); }

// Largest-remainder allocation of n trials proportional to the prior;
// every stratum with positive mass gets at least one trial.
std::vector<std::int64_t> allocate(const std::vector<double>& weights, std::int64_t n) {
  const std::size_t k = weights.size();
  std::vector<std::int64_t> counts(k, 0);
  std::vector<std::pair<double, std::size_t>> rem;
  std::int64_t used = 0;
  for (std::size_t s = 0; s < k; ++s) {
    const double exact = weights[s] * static_cast<double>(n);
    counts[s] = static_cast<std::int64_t>(std::floor(exact));
    used += counts[s];
    rem.push_back({exact - static_cast<double>(counts[s]), s});
  }
  std::stable_sort(rem.begin(), rem.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t r = 0; used < n && r < rem.size(); ++r, ++used) ++counts[rem[r].second];
  for (std::size_t s = 0; s < k; ++s)
    if (weights[s] > 0.0 && counts[s] == 0) counts[s] = 1;
  return counts;
}

struct Moments {
  double sum = 0.0;
  double sumsq = 0.0;
  void add(double v) {
    sum += v;
    sumsq += v * v;
  }
  void merge(const Moments& o) {
    sum += o.sum;
    sumsq += o.sumsq;
  }
};

struct StratumAccum {
  std::int64_t errors = 0;
  Moments cme, cr, y1, lb;
  Moments cr_gap, lb_gap;  // per-trial paired differences
};

// accum[point][stratum]
using ChunkAccum = std::vector<std::vector<StratumAccum>>;

// Stratified mean and its standard error from per-stratum moments.
std::pair<double, double> stratified(const std::vector<double>& w, const std::vector<std::int64_t>& n,
                                     const std::vector<Moments>& m) {
  double mean = 0.0;
  double var = 0.0;
  for (std::size_t s = 0; s < w.size(); ++s) {
    if (n[s] == 0) continue;
    const double ns = static_cast<double>(n[s]);
    const double mu = m[s].sum / ns;
    mean += w[s] * mu;
    if (n[s] > 1) {
      const double v = std::max(0.0, (m[s].sumsq - ns * mu * mu) / (ns - 1.0));
      var += w[s] * w[s] * v / ns;
    }
  }
  return {mean, std::sqrt(var)};
}

SweepCurve run_once(const JointGmm& model, const SweepConfig& cfg) {
  const std::vector<ClassPair>& support = model.support();
  std::vector<double> weights;
  for (const ClassPair& p : support) weights.push_back(model.prior(p));
  const std::vector<std::int64_t> counts = allocate(weights, cfg.trials);
  std::vector<std::int64_t> boundary;
  std::int64_t total = 0;
  for (std::int64_t c : counts) boundary.push_back(total += c);

  const std::size_t npoints = cfg.sigma2.size();
  const std::size_t nstrata = support.size();
  const bool classify = is_classify(cfg.task);
  const ClassifyMode mode = task_mode(cfg.task);
  const ReconTarget target = task_target(cfg.task);
  const std::uint64_t seed = cfg.seed;

  auto kernel = [&](std::uint64_t index) {
    return draw_sensing_pair(cfg.m1, model.n1(), cfg.m2, model.n2(), cfg.kernel, seed, index);
  };
  std::optional<SensingPair> frozen;
  std::optional<ProjectedModel> frozen_pm, frozen_pm1;
  if (cfg.freeze_kernel) {
    frozen = kernel(0);
    frozen_pm.emplace(model, *frozen);
    frozen_pm1.emplace(model, drop_side_information(*frozen));
  }

  const std::size_t nchunks = (static_cast<std::size_t>(total) + kChunk - 1) / kChunk;
  std::vector<ChunkAccum> chunks(nchunks);
  parallel_for(nchunks, [&](std::size_t c) {
    ChunkAccum acc(npoints, std::vector<StratumAccum>(nstrata));
    const std::size_t begin = c * kChunk;
    const std::size_t end = std::min(static_cast<std::size_t>(total), begin + kChunk);
    for (std::size_t t = begin; t < end; ++t) {
      const auto s = static_cast<std::size_t>(
          std::upper_bound(boundary.begin(), boundary.end(), static_cast<std::int64_t>(t)) -
          boundary.begin());
      const ClassPair label = support[s];
      rng::Stream xs(seed, rng::Domain::kSample, t);
      const Vector x = sample_component(model, label, xs);
      const Vector x1 = x.head(model.n1());
      const Vector x2 = x.tail(model.n2());

      std::optional<SensingPair> own;
      std::optional<ProjectedModel> own_pm, own_pm1;
      if (!frozen) {
        own = kernel(t);
        own_pm.emplace(model, *own);
        if (!classify) own_pm1.emplace(model, drop_side_information(*own));
      }
      const SensingPair& phi = frozen ? *frozen : *own;
      const ProjectedModel& pm = frozen ? *frozen_pm : *own_pm;
      const int own_index = pm.index_of(label);

      // Common random numbers: one noise direction per trial, scaled per point.
      rng::Stream ns(seed, rng::Domain::kNoise, t);
      const Vector z1 = ns.normal_vector(phi.m1());
      const Vector z2 = ns.normal_vector(phi.m2());
      const Vector clean1 = phi.phi1 * x1;
      const Vector clean2 = phi.phi2 * x2;
      const Vector truth = target == ReconTarget::kX1 ? x1 : x;

      for (std::size_t p = 0; p < npoints; ++p) {
        const double sigma2 = cfg.sigma2[p];
        const double sigma = std::sqrt(sigma2);
        Vector y(phi.m());
        y << clean1 + sigma * z1, clean2 + sigma * z2;
        StratumAccum& a = acc[p][s];
        if (classify) {
          const bool wrong = mode == ClassifyMode::kSideInfo ? map_side_info(pm, y, sigma2) != label.i
                                                             : map_distributed(pm, y, sigma2) != label;
          a.errors += wrong ? 1 : 0;
        } else {
          const ProjectedModel& pm1 = frozen ? *frozen_pm1 : *own_pm1;
          const double e_cme = (gmm_cme(pm, y, sigma2, target) - truth).squaredNorm();
          const double e_cr = (classify_reconstruct(pm, y, sigma2, target) - truth).squaredNorm();
          // Genie bound: the MMSE of the true component under this trial's kernel.
          const double e_lb = target == ReconTarget::kX1 ? pm.mmse_x1(static_cast<std::size_t>(own_index), sigma2)
                                                         : pm.mmse_x(static_cast<std::size_t>(own_index), sigma2);
          a.cme.add(e_cme);
          a.cr.add(e_cr);
          a.lb.add(e_lb);
          a.cr_gap.add(e_cr - e_cme);
          a.lb_gap.add(e_cme - e_lb);
          const Vector y1 = y.head(phi.m1());
          a.y1.add((gmm_cme(pm1, y1, sigma2, target) - truth).squaredNorm());
        }
      }
    }
    chunks[c] = std::move(acc);
  });

  // Analytic values: exact for a frozen kernel, otherwise averaged over the
  // first few trial kernels.
  std::vector<double> bound(npoints, 0.0), lb(npoints, 0.0);
  const std::int64_t nk = cfg.freeze_kernel ? 1 : std::min<std::int64_t>(kAnalyticKernels, total);
  std::vector<std::vector<double>> per_kernel_bound(static_cast<std::size_t>(nk)),
      per_kernel_lb(static_cast<std::size_t>(nk));
  parallel_for(static_cast<std::size_t>(nk), [&](std::size_t k) {
    const SensingPair phi = cfg.freeze_kernel ? *frozen : kernel(k);
    std::vector<double> b(npoints, 0.0), l(npoints, 0.0);
    if (classify) {
      const BhattacharyyaTable table(model, phi);
      for (std::size_t p = 0; p < npoints; ++p) b[p] = table.bound(cfg.sigma2[p], mode).value;
    } else {
      const ProjectedModel pm(model, phi);
      for (std::size_t p = 0; p < npoints; ++p) l[p] = mse_lower_bound(pm, cfg.sigma2[p], target);
    }
    per_kernel_bound[k] = std::move(b);
    per_kernel_lb[k] = std::move(l);
  });
  for (std::size_t k = 0; k < static_cast<std::size_t>(nk); ++k)
    for (std::size_t p = 0; p < npoints; ++p) {
      bound[p] += per_kernel_bound[k][p] / static_cast<double>(nk);
      lb[p] += per_kernel_lb[k][p] / static_cast<double>(nk);
    }

  SweepCurve curve;
  curve.config = cfg;
  for (std::size_t p = 0; p < npoints; ++p) {
    std::vector<std::int64_t> errors(nstrata, 0);
    std::vector<Moments> cme(nstrata), cr(nstrata), y1(nstrata), lbm(nstrata), cr_gap(nstrata),
        lb_gap(nstrata);
    for (const ChunkAccum& c : chunks)
      for (std::size_t s = 0; s < nstrata; ++s) {
        errors[s] += c[p][s].errors;
        cme[s].merge(c[p][s].cme);
        cr[s].merge(c[p][s].cr);
        y1[s].merge(c[p][s].y1);
        lbm[s].merge(c[p][s].lb);
        cr_gap[s].merge(c[p][s].cr_gap);
        lb_gap[s].merge(c[p][s].lb_gap);
      }
    SweepPoint pt;
    pt.sigma2 = cfg.sigma2[p];
    pt.trials = total;
    if (classify) {
      double rate = 0.0;
      for (std::size_t s = 0; s < nstrata; ++s) {
        pt.errors += errors[s];
        if (counts[s] > 0)
          rate += weights[s] * static_cast<double>(errors[s]) / static_cast<double>(counts[s]);
      }
      pt.value = rate;
      pt.se = std::sqrt(rate * (1.0 - rate) / static_cast<double>(total));
      std::tie(pt.lo, pt.hi) = wilson_interval(rate, static_cast<double>(total));
      pt.bound = bound[p];
    } else {
      std::tie(pt.value, pt.se) = stratified(weights, counts, cme);
      std::tie(pt.mse_cr, pt.mse_cr_se) = stratified(weights, counts, cr);
      std::tie(pt.mse_y1, pt.mse_y1_se) = stratified(weights, counts, y1);
      pt.lo = pt.value - kZ95 * pt.se;
      pt.hi = pt.value + kZ95 * pt.se;
      pt.mse_lb = stratified(weights, counts, lbm).first;
      std::tie(pt.cr_gap, pt.cr_gap_se) = stratified(weights, counts, cr_gap);
      std::tie(pt.lb_gap, pt.lb_gap_se) = stratified(weights, counts, lb_gap);
      if (support.size() == 1) pt.mmse_gauss = lb[p];
    }
    curve.points.push_back(pt);
  }
  return curve;
}

}  // namespace

const char* task_name(Task t) noexcept {
  switch (t) {
    case Task::kClassifySi: return "classify_si";
    case Task::kClassifyDc: return "classify_dc";
    case Task::kReconstructSi: return "reconstruct_si";
    case Task::kReconstructDc: return "reconstruct_dc";
  }
  return "?";
}

Task parse_task(const std::string& name) {
  for (Task t : {Task::kClassifySi, Task::kClassifyDc, Task::kReconstructSi, Task::kReconstructDc})
    if (name == task_name(t)) return t;
  invalid("unknown task '" + name + "'");
}

bool is_classify(Task t) noexcept { return t == Task::kClassifySi || t == Task::kClassifyDc; }

ClassifyMode task_mode(Task t) noexcept {
  return t == Task::kClassifyDc || t == Task::kReconstructDc ? ClassifyMode::kDistributed
                                                             : ClassifyMode::kSideInfo;
}

ReconTarget task_target(Task t) noexcept {
  return t == Task::kReconstructDc ? ReconTarget::kX : ReconTarget::kX1;
}

std::vector<double> sigma2_grid(double hi, double lo, int per_decade) {
  if (!(hi > 0.0) || !(lo > 0.0) || lo > hi || per_decade < 1)
    invalid("sigma2 grid needs 0 < lo <= hi and at least one point per decade");
  const double decades = std::log10(hi / lo);
  const int steps = static_cast<int>(std::llround(decades * per_decade));
  std::vector<double> out;
  if (steps == 0) return {hi};
  const double lhi = std::log10(hi);
  const double llo = std::log10(lo);
  for (int i = 0; i <= steps; ++i)
    out.push_back(std::pow(10.0, lhi + (llo - lhi) * static_cast<double>(i) / steps));
  out.front() = hi;
  out.back() = lo;
  return out;
}

void validate(const SweepConfig& cfg, const JointGmm& model) {
  if (cfg.sigma2.empty()) invalid("sigma2 grid is empty");
  for (std::size_t i = 0; i < cfg.sigma2.size(); ++i) {
    if (!(cfg.sigma2[i] > 0.0) || !std::isfinite(cfg.sigma2[i])) invalid("sigma2 values must be positive");
    if (i > 0 && !(cfg.sigma2[i] < cfg.sigma2[i - 1])) invalid("sigma2 grid must be strictly decreasing");
  }
  if (cfg.trials < 100) invalid("at least 100 trials per point are required");
  if (cfg.trials > kMaxTrials) invalid("trial count exceeds the cap of 1000000");
  if (cfg.m1 < 0 || cfg.m2 < 0) invalid("feature counts must be >= 0");
  if (cfg.m1 + (cfg.kernel == KernelPolicy::kIdentity2 ? model.n2() : cfg.m2) == 0)
    invalid("at least one feature is required");
  if (cfg.min_errors < 0) invalid("min_errors must be >= 0");
}

SweepCurve run_sweep(const JointGmm& model, const SweepConfig& cfg) {
  validate(cfg, model);
  SweepConfig run = cfg;
  for (;;) {
    SweepCurve curve = run_once(model, run);
    const bool escalate = is_classify(run.task) && run.min_errors > 0 &&
                          curve.points.back().errors < run.min_errors && run.trials < kMaxTrials;
    if (!escalate) {
      curve.config = cfg;
      return curve;
    }
    run.trials = std::min(kMaxTrials, run.trials * 2);
  }
}

std::pair<double, double> wilson_interval(double p, double n) {
  if (n <= 0.0) return {0.0, 1.0};
  if (p <= 0.0) {
    const double z2 = kZ95OneSided * kZ95OneSided;
    return {0.0, z2 / (n + z2)};
  }
  const double z2 = kZ95 * kZ95;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half = kZ95 * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

CsvTable SweepCurve::csv() const {
  const std::string m1 = std::to_string(config.m1);
  const std::string m2 = std::to_string(config.m2);
  if (is_classify(config.task)) {
    CsvTable t({"sigma2", "perr_emp", "perr_emp_lo", "perr_emp_hi", "perr_bound", "mode", "m1", "m2",
                "trials", "errors"});
    for (const SweepPoint& p : points)
      t.add_row({format_double(p.sigma2), format_double(p.value), format_double(p.lo),
                 format_double(p.hi), format_double(p.bound), mode_name(task_mode(config.task)), m1, m2,
                 std::to_string(p.trials), std::to_string(p.errors)});
    return t;
  }
  CsvTable t({"sigma2", "mse_emp", "mse_cr_emp", "mmse_gauss_formula", "mse_lb", "m1", "m2",
              "mse_emp_se", "mse_cr_se", "mse_y1_emp", "mse_y1_se", "trials", "target"});
  for (const SweepPoint& p : points)
    t.add_row({format_double(p.sigma2), format_double(p.value), format_double(p.mse_cr),
               p.mmse_gauss ? format_double(*p.mmse_gauss) : "", format_double(p.mse_lb), m1, m2,
               format_double(p.se), format_double(p.mse_cr_se), format_double(p.mse_y1),
               format_double(p.mse_y1_se), std::to_string(p.trials),
               target_name(task_target(config.task))});
  return t;
}

SlopeFit fit_slope(const std::vector<double>& sigma2, const std::vector<double>& values,
                   double decades) {
  if (sigma2.size() != values.size())
    throw Error(ErrorCode::kDimensionMismatch, "slope fit needs one value per sigma2");
  if (sigma2.empty()) throw Error(ErrorCode::kUndefined, "slope fit on an empty curve");
  const double smallest = *std::min_element(sigma2.begin(), sigma2.end());
  const double limit = smallest * std::pow(10.0, decades) * (1.0 + 1e-9);
  SlopeFit fit;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < sigma2.size(); ++i) {
    if (sigma2[i] > limit) continue;
    if (!(values[i] > 0.0) || !std::isfinite(values[i])) {
      ++fit.excluded;
      continue;
    }
    const double x = std::log(sigma2[i]);
    const double y = std::log(values[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++fit.used;
  }
  if (fit.used < 3)
    throw Error(ErrorCode::kUndefined, "slope undefined: fewer than 3 finite points in the window");
  const double n = fit.used;
  const double den = n * sxx - sx * sx;
  if (!(den > 0.0)) throw Error(ErrorCode::kUndefined, "slope undefined: degenerate sigma2 window");
  fit.slope = (n * sxy - sx * sy) / den;
  return fit;
}

SlopeFit fit_slope(const SweepCurve& curve, double decades) {
  std::vector<double> s, v;
  for (const SweepPoint& p : curve.points) {
    s.push_back(p.sigma2);
    v.push_back(p.value);
  }
  return fit_slope(s, v, decades);
}

bool flat_within_ci(const SweepCurve& curve, double decades) {
  double smallest = std::numeric_limits<double>::infinity();
  for (const SweepPoint& p : curve.points) smallest = std::min(smallest, p.sigma2);
  const double limit = smallest * std::pow(10.0, decades) * (1.0 + 1e-9);
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  for (const SweepPoint& p : curve.points) {
    if (p.sigma2 > limit) continue;
    lo = std::max(lo, p.lo);
    hi = std::min(hi, p.hi);
  }
  return lo <= hi;
}

IntRange parse_range(const std::string& text) {
  auto to_int = [&](std::string_view s) {
    int v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) invalid("bad integer range '" + text + "'");
    return v;
  };
  const std::string_view sv(text);
  const auto dots = sv.find("..");
  IntRange r;
  if (dots == std::string_view::npos) {
    r.lo = r.hi = to_int(sv);
  } else {
    r.lo = to_int(sv.substr(0, dots));
    r.hi = to_int(sv.substr(dots + 2));
  }
  if (r.lo < 0 || r.hi < r.lo) invalid("range '" + text + "' must satisfy 0 <= a <= b");
  return r;
}

std::string predicate_outcome(const GeometryTable& geo, const std::string& tag, int m1, int m2) {
  if (tag == "zero_mean_side_info")
    return outcome_name(classification_phase_verdict(geo, m1, m2, ClassifyMode::kSideInfo).outcome);
  if (tag == "zero_mean_distributed")
    return outcome_name(classification_phase_verdict(geo, m1, m2, ClassifyMode::kDistributed).outcome);
  if (tag == "nonzero_mean_side_info")
    return outcome_name(exp_decay_verdict(geo, m1, m2, ClassifyMode::kSideInfo).outcome);
  if (tag == "nonzero_mean_distributed")
    return outcome_name(exp_decay_verdict(geo, m1, m2, ClassifyMode::kDistributed).outcome);
  return reconstruction_phase_verdict(geo, m1, m2, parse_theorem(tag)).outcome();
}

RegionGrid region_map(const JointGmm& model, const GeometryTable& geo, IntRange m1, IntRange m2,
                      const std::vector<std::string>& predicates,
                      const std::optional<ProbeConfig>& probe) {
  if (m1.hi < m1.lo || m2.hi < m2.lo || m1.lo < 0 || m2.lo < 0) invalid("empty feature-count range");
  RegionGrid grid;
  grid.predicates = predicates;
  for (int a = m1.lo; a <= m1.hi; ++a)
    for (int b = m2.lo; b <= m2.hi; ++b) {
      RegionCell cell;
      cell.m1 = a;
      cell.m2 = b;
      for (const std::string& tag : predicates) cell.verdicts.push_back(predicate_outcome(geo, tag, a, b));
      if (probe) {
        SweepConfig cfg;
        cfg.task = probe->task;
        cfg.m1 = a;
        cfg.m2 = b;
        cfg.sigma2 = probe->sigma2;
        cfg.trials = probe->trials;
        cfg.seed = probe->seed;
        cfg.kernel = probe->kernel;
        const bool no_features = a + (probe->kernel == KernelPolicy::kIdentity2 ? model.n2() : b) == 0;
        if (no_features) {
          cell.probe = "floor";
        } else {
          const SweepCurve curve = run_sweep(model, cfg);
          bool all_zero = true;
          for (const SweepPoint& p : curve.points) all_zero = all_zero && p.value == 0.0;
          if (all_zero) {
            cell.probe = "transition";
          } else {
            try {
              const double decades = std::log10(cfg.sigma2.front() / cfg.sigma2.back());
              cell.probe = fit_slope(curve, decades).slope >= probe->slope_threshold ? "transition" : "floor";
            } catch (const Error& e) {
              if (e.code() != ErrorCode::kUndefined) throw;
              cell.probe = "floor";
            }
          }
        }
      }
      grid.cells.push_back(std::move(cell));
    }
  return grid;
}

CsvTable RegionGrid::csv() const {
  std::vector<std::string> header{"m1", "m2"};
  for (const std::string& p : predicates) header.push_back(p);
  const bool probed = !cells.empty() && cells.front().probe.has_value();
  if (probed) header.push_back("probe");
  CsvTable t(header);
  for (const RegionCell& c : cells) {
    std::vector<std::string> row{std::to_string(c.m1), std::to_string(c.m2)};
    row.insert(row.end(), c.verdicts.begin(), c.verdicts.end());
    if (probed) row.push_back(c.probe.value_or(""));
    t.add_row(std::move(row));
  }
  return t;
}

CsvTable classification_verdict_csv(const std::vector<std::pair<ClassifyMode, Verdict>>& rows,
                                    const std::vector<std::pair<int, int>>& counts) {
  CsvTable t({"mode", "m1", "m2", "outcome", "case", "binding_i", "binding_k", "binding_j", "binding_l",
              "d", "theorem"});
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& [mode, v] = rows[r];
    auto idx = [&](int zero_based) { return v.binding ? std::to_string(zero_based + 1) : std::string(); };
    const Quadruple q = v.binding.value_or(Quadruple{});
    t.add_row({mode_name(mode), std::to_string(counts[r].first), std::to_string(counts[r].second),
               outcome_name(v.outcome), std::to_string(v.case_branch), idx(q.a.i), idx(q.a.k), idx(q.b.i),
               idx(q.b.k), format_double(v.d), v.theorem});
  }
  return t;
}

CsvTable reconstruction_verdict_csv(const std::vector<ReconVerdict>& rows,
                                    const std::vector<std::pair<int, int>>& counts) {
  CsvTable t({"theorem", "m1", "m2", "outcome", "binding_i", "binding_k"});
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const ReconVerdict& v = rows[r];
    t.add_row({theorem_name(v.theorem), std::to_string(counts[r].first), std::to_string(counts[r].second),
               v.outcome(), v.binding ? std::to_string(v.binding->i + 1) : "",
               v.binding ? std::to_string(v.binding->k + 1) : ""});
  }
  return t;
}

int worker_count() {
  if (const char* env = std::getenv("GMMSI_THREADS")) {
    int v = 0;
    const std::string_view s(env);
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec == std::errc() && ptr == s.data() + s.size() && v > 0) return v;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(worker_count()), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex mu;
  std::size_t failed_at = n;
  std::exception_ptr failure;
  auto run = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        body(i);
      } catch (...) {
        // Keep the failure of the lowest index so errors are reproducible.
        std::lock_guard<std::mutex> lock(mu);
        if (i < failed_at) {
          failed_at = i;
          failure = std::current_exception();
        }
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(run);
  run();
  for (std::thread& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace gmmsi
