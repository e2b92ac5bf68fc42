#include "gmmsi.h"

#include <cmath>
#include <cstring>
#include <limits>
#include <memory>
#include <optional>
#include <string>

#include "gmmsi/experiments.hpp"
#include "gmmsi/model_io.hpp"
#include "gmmsi/presets.hpp"

using namespace gmmsi;

struct gmmsi_model {
  JointGmm value;
};
struct gmmsi_kernel {
  SensingPair value;
};
struct gmmsi_geometry {
  GeometryTable value;
};
struct gmmsi_sweep {
  SweepCurve value;
};
struct gmmsi_string {
  std::string value;
};

namespace {

thread_local std::string g_last_error;

gmmsi_status fail(gmmsi_status s, const std::string& msg) {
  g_last_error = msg;
  return s;
}

// Runs `body`, translating exceptions into status codes.
template <class F>
gmmsi_status guard(F&& body) {
  try {
    body();
    g_last_error.clear();
    return GMMSI_OK;
  } catch (const Error& e) {
    return fail(static_cast<gmmsi_status>(static_cast<int>(e.code())), e.what());
  } catch (const std::bad_alloc&) {
    return fail(GMMSI_E_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(GMMSI_E_INTERNAL, e.what());
  }
}

void need(const void* p, const char* what) {
  if (!p) throw Error(ErrorCode::kInvalidInput, std::string("null argument: ") + what);
}

std::string text(const char* s, const char* what) {
  need(s, what);
  return s;
}

gmmsi_string* make_string(std::string s) { return new gmmsi_string{std::move(s)}; }

Matrix row_major(const double* data, int rows, int cols, const char* what) {
  if (rows < 0 || cols < 0) throw Error(ErrorCode::kInvalidInput, std::string(what) + ": negative size");
  if (rows * cols > 0) need(data, what);
  Matrix m(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) m(r, c) = data[static_cast<std::size_t>(r) * cols + c];
  return m;
}

Vector vec(const double* data, std::size_t n, const char* what) {
  if (n > 0) need(data, what);
  Vector v(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) v(static_cast<Eigen::Index>(i)) = data[i];
  return v;
}

void copy_text(char* dst, std::size_t cap, const std::string& src) {
  std::strncpy(dst, src.c_str(), cap - 1);
  dst[cap - 1] = '\0';
}

bool is_classification_tag(const std::string& tag) {
  return tag == "zero_mean_side_info" || tag == "zero_mean_distributed" || tag == "nonzero_mean_side_info" ||
         tag == "nonzero_mean_distributed";
}

Verdict classification(const GeometryTable& geo, int m1, int m2, const std::string& tag) {
  const ClassifyMode mode = tag.ends_with("distributed") ? ClassifyMode::kDistributed : ClassifyMode::kSideInfo;
  if (tag.starts_with("zero_mean")) return classification_phase_verdict(geo, m1, m2, mode);
  return exp_decay_verdict(geo, m1, m2, mode);
}

SweepConfig to_config(const gmmsi_sweep_config* c, const double* sigma2, std::size_t n) {
  need(c, "config");
  SweepConfig cfg;
  cfg.task = parse_task(text(c->task, "config.task"));
  cfg.m1 = c->m1;
  cfg.m2 = c->m2;
  cfg.sigma2 = sigma2 ? std::vector<double>(sigma2, sigma2 + n)
                      : sigma2_grid(c->sigma2_hi, c->sigma2_lo, c->points_per_decade);
  cfg.trials = c->trials;
  cfg.seed = c->seed;
  cfg.kernel = parse_kernel_policy(text(c->kernel, "config.kernel"));
  cfg.freeze_kernel = c->freeze_kernel != 0;
  cfg.min_errors = c->min_errors;
  return cfg;
}

}  // namespace

extern "C" {

const char* gmmsi_last_error(void) { return g_last_error.c_str(); }

const char* gmmsi_status_name(gmmsi_status status) {
  switch (status) {
    case GMMSI_OK: return "OK";
    case GMMSI_E_INTERNAL: return "E_INTERNAL";
    default: return error_code_name(static_cast<ErrorCode>(status));
  }
}

const char* gmmsi_version(void) { return "1.0.0"; }

const char* gmmsi_string_data(const gmmsi_string* s) { return s ? s->value.c_str() : ""; }
size_t gmmsi_string_size(const gmmsi_string* s) { return s ? s->value.size() : 0; }
void gmmsi_string_free(gmmsi_string* s) { delete s; }

gmmsi_status gmmsi_write_file_atomic(const char* path, const char* data, size_t size) {
  return guard([&] {
    if (size > 0) need(data, "data");
    write_file_atomic(text(path, "path"), std::string(data ? data : "", size));
  });
}

gmmsi_status gmmsi_model_load(const char* path, gmmsi_model** out) {
  return guard([&] {
    need(out, "out");
    *out = new gmmsi_model{load_model(text(path, "path"))};
  });
}

gmmsi_status gmmsi_model_parse(const char* json_text, gmmsi_model** out) {
  return guard([&] {
    need(out, "out");
    *out = new gmmsi_model{parse_model(text(json_text, "json_text"))};
  });
}

gmmsi_status gmmsi_model_preset(const char* name, uint64_t seed, gmmsi_model** out) {
  return guard([&] {
    need(out, "out");
    const std::string n = text(name, "name");
    if (n == "two_signal")
      *out = new gmmsi_model{two_signal_model(seed)};
    else if (n == "gauss334")
      *out = new gmmsi_model{gaussian_334_model(seed)};
    else if (n == "random")
      *out = new gmmsi_model{random_factor_model(RandomModelSpec{}, seed)};
    else
      throw Error(ErrorCode::kInvalidInput, "unknown preset '" + n + "'");
  });
}

gmmsi_status gmmsi_model_serialize(const gmmsi_model* model, gmmsi_string** out) {
  return guard([&] {
    need(model, "model");
    need(out, "out");
    *out = make_string(serialize_model(model->value));
  });
}

gmmsi_status gmmsi_model_save(const gmmsi_model* model, const char* path) {
  return guard([&] {
    need(model, "model");
    save_model(model->value, text(path, "path"));
  });
}

gmmsi_status gmmsi_model_dims(const gmmsi_model* model, int* n1, int* n2, int* k1, int* k2) {
  return guard([&] {
    need(model, "model");
    if (n1) *n1 = model->value.n1();
    if (n2) *n2 = model->value.n2();
    if (k1) *k1 = model->value.k1();
    if (k2) *k2 = model->value.k2();
  });
}

gmmsi_status gmmsi_model_sample(const gmmsi_model* model, uint64_t seed, uint64_t index, int* i, int* k,
                                double* x, size_t x_len) {
  return guard([&] {
    need(model, "model");
    need(x, "x");
    const JointGmm& m = model->value;
    if (x_len != static_cast<std::size_t>(m.n()))
      throw Error(ErrorCode::kDimensionMismatch, "x buffer must hold n1 + n2 entries");
    // Label by inverse CDF over the support, then one component draw.
    rng::Stream label_stream(seed, rng::Domain::kLabel, index);
    const double u = label_stream.uniform();
    double acc = 0.0;
    ClassPair label = m.support().back();
    for (const ClassPair& p : m.support()) {
      acc += m.prior(p);
      if (u < acc) {
        label = p;
        break;
      }
    }
    rng::Stream s(seed, rng::Domain::kSample, index);
    const Vector v = sample_component(m, label, s);
    for (Eigen::Index j = 0; j < v.size(); ++j) x[j] = v(j);
    if (i) *i = label.i + 1;
    if (k) *k = label.k + 1;
  });
}

void gmmsi_model_free(gmmsi_model* model) { delete model; }

gmmsi_status gmmsi_kernel_draw(int m1, int n1, int m2, int n2, const char* policy, uint64_t seed,
                               uint64_t index, gmmsi_kernel** out) {
  return guard([&] {
    need(out, "out");
    *out = new gmmsi_kernel{
        draw_sensing_pair(m1, n1, m2, n2, parse_kernel_policy(text(policy, "policy")), seed, index)};
  });
}

gmmsi_status gmmsi_kernel_create(const double* phi1, int m1, int n1, const double* phi2, int m2, int n2,
                                 gmmsi_kernel** out) {
  return guard([&] {
    need(out, "out");
    SensingPair p{row_major(phi1, m1, n1, "phi1"), row_major(phi2, m2, n2, "phi2")};
    if (!p.phi1.allFinite() || !p.phi2.allFinite())
      throw Error(ErrorCode::kInvalidInput, "kernel has non-finite entries");
    *out = new gmmsi_kernel{std::move(p)};
  });
}

gmmsi_status gmmsi_kernel_dims(const gmmsi_kernel* kernel, int* m1, int* m2) {
  return guard([&] {
    need(kernel, "kernel");
    if (m1) *m1 = kernel->value.m1();
    if (m2) *m2 = kernel->value.m2();
  });
}

gmmsi_status gmmsi_kernel_observe(const gmmsi_kernel* kernel, const double* x, size_t x_len, double sigma2,
                                  uint64_t seed, uint64_t index, double* y, size_t y_len) {
  return guard([&] {
    need(kernel, "kernel");
    need(y, "y");
    const SensingPair& phi = kernel->value;
    const Vector xv = vec(x, x_len, "x");
    const auto n1 = phi.phi1.cols();
    if (xv.size() != n1 + phi.phi2.cols())
      throw Error(ErrorCode::kDimensionMismatch, "x length does not match the kernel");
    if (y_len != static_cast<std::size_t>(phi.m()))
      throw Error(ErrorCode::kDimensionMismatch, "y buffer must hold m1 + m2 entries");
    const Observation o = observe(phi, xv.head(n1), xv.tail(phi.phi2.cols()), sigma2, seed, index);
    const Vector yv = o.y();
    for (Eigen::Index j = 0; j < yv.size(); ++j) y[j] = yv(j);
  });
}

void gmmsi_kernel_free(gmmsi_kernel* kernel) { delete kernel; }

gmmsi_status gmmsi_geometry_compute(const gmmsi_model* model, gmmsi_geometry** out) {
  return guard([&] {
    need(model, "model");
    need(out, "out");
    *out = new gmmsi_geometry{geometry_summary(model->value)};
  });
}

gmmsi_status gmmsi_geometry_components_csv(const gmmsi_geometry* geo, gmmsi_string** out) {
  return guard([&] {
    need(geo, "geometry");
    need(out, "out");
    *out = make_string(geo->value.components_csv().str());
  });
}

gmmsi_status gmmsi_geometry_pairs_csv(const gmmsi_geometry* geo, gmmsi_string** out) {
  return guard([&] {
    need(geo, "geometry");
    need(out, "out");
    *out = make_string(geo->value.pairs_csv().str());
  });
}

gmmsi_status gmmsi_projected_rank(const gmmsi_geometry* geo, int i, int k, int m1, int m2, int* rank) {
  return guard([&] {
    need(geo, "geometry");
    need(rank, "rank");
    *rank = projected_rank(m1, m2, geo->value.ranks({i - 1, k - 1}));
  });
}

void gmmsi_geometry_free(gmmsi_geometry* geo) { delete geo; }

gmmsi_status gmmsi_classification_verdict(const gmmsi_geometry* geo, int m1, int m2, const char* tag,
                                          gmmsi_verdict* out) {
  return guard([&] {
    need(geo, "geometry");
    need(out, "out");
    const std::string t = text(tag, "tag");
    if (!is_classification_tag(t)) throw Error(ErrorCode::kInvalidInput, "unknown classification tag '" + t + "'");
    const Verdict v = classification(geo->value, m1, m2, t);
    std::memset(out, 0, sizeof(*out));
    copy_text(out->outcome, sizeof(out->outcome), outcome_name(v.outcome));
    copy_text(out->theorem, sizeof(out->theorem), v.theorem);
    out->case_branch = v.case_branch;
    if (v.binding) {
      out->binding[0] = v.binding->a.i + 1;
      out->binding[1] = v.binding->a.k + 1;
      out->binding[2] = v.binding->b.i + 1;
      out->binding[3] = v.binding->b.k + 1;
    }
    out->d = v.d;
  });
}

gmmsi_status gmmsi_reconstruction_verdict(const gmmsi_geometry* geo, int m1, int m2, const char* tag,
                                          int* transition, int binding[2]) {
  return guard([&] {
    need(geo, "geometry");
    need(transition, "transition");
    const ReconVerdict v = reconstruction_phase_verdict(geo->value, m1, m2, parse_theorem(text(tag, "tag")));
    *transition = v.transition ? 1 : 0;
    if (binding) {
      binding[0] = v.binding ? v.binding->i + 1 : 0;
      binding[1] = v.binding ? v.binding->k + 1 : 0;
    }
  });
}

gmmsi_status gmmsi_verdict_table(const gmmsi_geometry* geo, const char* tag, int m1_lo, int m1_hi, int m2_lo,
                                 int m2_hi, gmmsi_string** out) {
  return guard([&] {
    need(geo, "geometry");
    need(out, "out");
    const std::string t = text(tag, "tag");
    if (m1_lo < 0 || m2_lo < 0 || m1_hi < m1_lo || m2_hi < m2_lo)
      throw Error(ErrorCode::kInvalidInput, "empty feature-count range");
    std::vector<std::pair<int, int>> counts;
    for (int a = m1_lo; a <= m1_hi; ++a)
      for (int b = m2_lo; b <= m2_hi; ++b) counts.push_back({a, b});
    if (is_classification_tag(t)) {
      std::vector<std::pair<ClassifyMode, Verdict>> rows;
      const ClassifyMode mode = t.ends_with("distributed") ? ClassifyMode::kDistributed : ClassifyMode::kSideInfo;
      for (const auto& [a, b] : counts) rows.push_back({mode, classification(geo->value, a, b, t)});
      *out = make_string(classification_verdict_csv(rows, counts).str());
    } else {
      const ReconTheorem th = parse_theorem(t);
      std::vector<ReconVerdict> rows;
      for (const auto& [a, b] : counts) rows.push_back(reconstruction_phase_verdict(geo->value, a, b, th));
      *out = make_string(reconstruction_verdict_csv(rows, counts).str());
    }
  });
}

gmmsi_status gmmsi_diversity(const gmmsi_geometry* geo, int m1, int m2, const char* mode, double* d) {
  return guard([&] {
    need(geo, "geometry");
    need(d, "d");
    *d = diversity_order(geo->value, m1, m2, parse_mode(text(mode, "mode"))).d;
  });
}

gmmsi_status gmmsi_diversity_csv(const gmmsi_geometry* geo, int m1, int m2, const char* mode,
                                 gmmsi_string** out) {
  return guard([&] {
    need(geo, "geometry");
    need(out, "out");
    const ClassifyMode md = parse_mode(text(mode, "mode"));
    const DiversityReport r = diversity_order(geo->value, m1, m2, md);
    CsvTable t({"mode", "m1", "m2", "i", "k", "j", "l", "d", "binding"});
    for (const auto& [q, d] : r.per_quadruple) {
      bool binding = false;
      for (const Quadruple& b : r.binding) binding = binding || b == q;
      t.add_row({mode_name(md), std::to_string(m1), std::to_string(m2), std::to_string(q.a.i + 1),
                 std::to_string(q.a.k + 1), std::to_string(q.b.i + 1), std::to_string(q.b.k + 1),
                 format_double(d), binding ? "1" : "0"});
    }
    *out = make_string(t.str());
  });
}

gmmsi_status gmmsi_classify(const gmmsi_model* model, const gmmsi_kernel* kernel, const double* y,
                            size_t y_len, double sigma2, const char* mode, int* i, int* k) {
  return guard([&] {
    need(model, "model");
    need(kernel, "kernel");
    const Vector yv = vec(y, y_len, "y");
    const ClassifyMode md = parse_mode(text(mode, "mode"));
    const ProjectedModel pm(model->value, kernel->value);
    if (md == ClassifyMode::kSideInfo) {
      const int c1 = map_side_info(pm, yv, sigma2);
      if (i) *i = c1 + 1;
      if (k) *k = 0;
    } else {
      const ClassPair p = map_distributed(pm, yv, sigma2);
      if (i) *i = p.i + 1;
      if (k) *k = p.k + 1;
    }
  });
}

gmmsi_status gmmsi_reconstruct(const gmmsi_model* model, const gmmsi_kernel* kernel, const double* y,
                               size_t y_len, double sigma2, const char* estimator, const char* target,
                               double* out, size_t out_len) {
  return guard([&] {
    need(model, "model");
    need(kernel, "kernel");
    need(out, "out");
    const Vector yv = vec(y, y_len, "y");
    const std::string est = text(estimator, "estimator");
    const std::string tg = text(target, "target");
    if (tg != "x1" && tg != "x") throw Error(ErrorCode::kInvalidInput, "target must be 'x1' or 'x'");
    const ReconTarget t = tg == "x1" ? ReconTarget::kX1 : ReconTarget::kX;
    const ProjectedModel pm(model->value, kernel->value);
    if (yv.size() != pm.m()) throw Error(ErrorCode::kDimensionMismatch, "observation length mismatch");
    Vector x;
    if (est == "gmm_cme")
      x = gmm_cme(pm, yv, sigma2, t);
    else if (est == "classify_reconstruct")
      x = classify_reconstruct(pm, yv, sigma2, t);
    else
      throw Error(ErrorCode::kInvalidInput, "unknown estimator '" + est + "'");
    if (out_len != static_cast<std::size_t>(x.size()))
      throw Error(ErrorCode::kDimensionMismatch, "output buffer has the wrong length");
    for (Eigen::Index j = 0; j < x.size(); ++j) out[j] = x(j);
  });
}

gmmsi_status gmmsi_perr_bound(const gmmsi_model* model, const gmmsi_kernel* kernel, double sigma2,
                              const char* mode, double* value) {
  return guard([&] {
    need(model, "model");
    need(kernel, "kernel");
    need(value, "value");
    *value = perr_upper_bound(model->value, kernel->value, sigma2, parse_mode(text(mode, "mode"))).value;
  });
}

gmmsi_status gmmsi_mse_lower_bound(const gmmsi_model* model, const gmmsi_kernel* kernel, double sigma2,
                                   const char* target, double* value) {
  return guard([&] {
    need(model, "model");
    need(kernel, "kernel");
    need(value, "value");
    const std::string tg = text(target, "target");
    if (tg != "x1" && tg != "x") throw Error(ErrorCode::kInvalidInput, "target must be 'x1' or 'x'");
    *value = mse_lower_bound(model->value, kernel->value, sigma2, tg == "x1" ? ReconTarget::kX1 : ReconTarget::kX);
  });
}

void gmmsi_sweep_config_default(gmmsi_sweep_config* cfg) {
  if (!cfg) return;
  cfg->task = "classify_si";
  cfg->m1 = 0;
  cfg->m2 = 0;
  cfg->sigma2_hi = 1e-1;
  cfg->sigma2_lo = 1e-8;
  cfg->points_per_decade = 5;
  cfg->trials = 1000;
  cfg->seed = 1;
  cfg->kernel = "gaussian";
  cfg->freeze_kernel = 0;
  cfg->min_errors = 0;
}

gmmsi_status gmmsi_sweep_run(const gmmsi_model* model, const gmmsi_sweep_config* cfg, const double* sigma2,
                             size_t n_sigma2, gmmsi_sweep** out) {
  return guard([&] {
    need(model, "model");
    need(out, "out");
    *out = new gmmsi_sweep{run_sweep(model->value, to_config(cfg, sigma2, n_sigma2))};
  });
}

size_t gmmsi_sweep_size(const gmmsi_sweep* sweep) { return sweep ? sweep->value.points.size() : 0; }

gmmsi_status gmmsi_sweep_point_at(const gmmsi_sweep* sweep, size_t index, gmmsi_sweep_point* out) {
  return guard([&] {
    need(sweep, "sweep");
    need(out, "out");
    if (index >= sweep->value.points.size()) throw Error(ErrorCode::kInvalidInput, "point index out of range");
    const SweepPoint& p = sweep->value.points[index];
    *out = gmmsi_sweep_point{p.sigma2, p.trials, p.value, p.lo,     p.hi,     p.se,
                             p.errors, p.bound,  p.mse_cr, p.mse_y1, p.mse_lb,
                             p.mmse_gauss.value_or(std::numeric_limits<double>::quiet_NaN())};
  });
}

gmmsi_status gmmsi_sweep_slope(const gmmsi_sweep* sweep, double decades, double* slope) {
  return guard([&] {
    need(sweep, "sweep");
    need(slope, "slope");
    *slope = fit_slope(sweep->value, decades).slope;
  });
}

gmmsi_status gmmsi_sweep_flat(const gmmsi_sweep* sweep, double decades, int* flat) {
  return guard([&] {
    need(sweep, "sweep");
    need(flat, "flat");
    *flat = flat_within_ci(sweep->value, decades) ? 1 : 0;
  });
}

gmmsi_status gmmsi_sweep_csv(const gmmsi_sweep* sweep, gmmsi_string** out) {
  return guard([&] {
    need(sweep, "sweep");
    need(out, "out");
    *out = make_string(sweep->value.csv().str());
  });
}

void gmmsi_sweep_free(gmmsi_sweep* sweep) { delete sweep; }

gmmsi_status gmmsi_region_map(const gmmsi_model* model, const gmmsi_geometry* geo, int m1_lo, int m1_hi,
                              int m2_lo, int m2_hi, const char* const* tags, size_t n_tags,
                              const gmmsi_sweep_config* probe, gmmsi_string** out) {
  return guard([&] {
    need(model, "model");
    need(geo, "geometry");
    need(out, "out");
    std::vector<std::string> predicates;
    if (n_tags > 0) need(tags, "tags");
    for (std::size_t t = 0; t < n_tags; ++t) predicates.push_back(text(tags[t], "tag"));
    std::optional<ProbeConfig> pc;
    if (probe) {
      const SweepConfig cfg = to_config(probe, nullptr, 0);
      pc.emplace();
      pc->task = cfg.task;
      pc->sigma2 = cfg.sigma2;
      pc->trials = cfg.trials;
      pc->seed = cfg.seed;
      pc->kernel = cfg.kernel;
    }
    if (m1_lo < 0 || m2_lo < 0 || m1_hi < m1_lo || m2_hi < m2_lo)
      throw Error(ErrorCode::kInvalidInput, "empty feature-count range");
    *out = make_string(region_map(model->value, geo->value, {m1_lo, m1_hi}, {m2_lo, m2_hi}, predicates, pc)
                           .csv()
                           .str());
  });
}

}  // extern "C"
