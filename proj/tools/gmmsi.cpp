// Command-line front end. Talks to the library only through the C API.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gmmsi.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Carries a status code up to main().
struct Failure {
  std::string code;
  std::string message;
  int exit_code;
};

int exit_for(gmmsi_status s) {
  switch (s) {
    case GMMSI_E_IO:
    case GMMSI_E_UNDEFINED:
    case GMMSI_E_INTERNAL: return 2;
    default: return 1;
  }
}

void check(gmmsi_status s) {
  if (s != GMMSI_OK) throw Failure{gmmsi_status_name(s), gmmsi_last_error(), exit_for(s)};
}

[[noreturn]] void usage(const std::string& msg) { throw Failure{"E_USAGE", msg, 1}; }

template <class T, void (*Free)(T*)>
struct Handle {
  T* p = nullptr;
  Handle() = default;
  Handle(const Handle&) = delete;
  Handle& operator=(const Handle&) = delete;
  ~Handle() { Free(p); }
  T** out() { return &p; }
  T* get() const { return p; }
};

using Model = Handle<gmmsi_model, gmmsi_model_free>;
using Geometry = Handle<gmmsi_geometry, gmmsi_geometry_free>;
using Sweep = Handle<gmmsi_sweep, gmmsi_sweep_free>;
using String = Handle<gmmsi_string, gmmsi_string_free>;

struct Range {
  int lo = 0;
  int hi = 0;
};

Range parse_range(const std::string& text, const char* flag) {
  Range r;
  const auto dots = text.find("..");
  try {
    std::size_t used = 0;
    if (dots == std::string::npos) {
      r.lo = r.hi = std::stoi(text, &used);
      if (used != text.size()) throw std::invalid_argument(text);
    } else {
      const std::string a = text.substr(0, dots);
      const std::string b = text.substr(dots + 2);
      r.lo = std::stoi(a, &used);
      if (used != a.size()) throw std::invalid_argument(text);
      r.hi = std::stoi(b, &used);
      if (used != b.size()) throw std::invalid_argument(text);
    }
  } catch (const std::logic_error&) {
    usage(std::string(flag) + ": expected an integer or a range a..b, got '" + text + "'");
  }
  if (r.lo < 0 || r.hi < r.lo) usage(std::string(flag) + ": range must satisfy 0 <= a <= b");
  return r;
}

int single(const std::string& text, const char* flag) {
  const Range r = parse_range(text, flag);
  if (r.lo != r.hi) usage(std::string(flag) + " takes a single value here");
  return r.lo;
}

struct Options {
  std::string config;
  std::string out = ".";
  std::string m1 = "0";
  std::string m2 = "0";
  std::uint64_t seed = 1;
  std::int64_t trials = 1000;
  std::string task;
  std::vector<std::string> theorems;
  std::string mode;
  std::string kernel = "gaussian";
  bool freeze_kernel = false;
  double sigma2_hi = 1e-1;
  double sigma2_lo = 1e-8;
  int per_decade = 5;
  std::int64_t min_errors = 0;
  bool probe = false;
  std::string probe_task = "reconstruct_si";
  std::int64_t probe_trials = 200;
  double probe_hi = 1e-8;
  double probe_lo = 1e-10;
  std::string preset;
  std::string manifest;
};

std::string to_string_owned(const String& s) {
  return std::string(gmmsi_string_data(s.get()), gmmsi_string_size(s.get()));
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw Failure{"E_IO", "cannot create output directory '" + dir + "'", 2};
}

std::string join(const std::string& dir, const std::string& name) { return (fs::path(dir) / name).string(); }

void write(const std::string& path, const std::string& data) {
  check(gmmsi_write_file_atomic(path.c_str(), data.data(), data.size()));
}

void load(Model& model, const std::string& path) {
  if (path.empty()) usage("--config is required");
  const gmmsi_status s = gmmsi_model_load(path.c_str(), model.out());
  // Any problem with the configuration itself is a validation error.
  if (s != GMMSI_OK) throw Failure{gmmsi_status_name(s), gmmsi_last_error(), 1};
}

bool zero_mean(const gmmsi_geometry* geo) {
  gmmsi_verdict v;
  const gmmsi_status s = gmmsi_classification_verdict(geo, 0, 0, "zero_mean_side_info", &v);
  if (s == GMMSI_E_UNSUPPORTED) return false;
  check(s);
  return true;
}

bool single_component(const gmmsi_model* model) {
  int k1 = 0, k2 = 0;
  check(gmmsi_model_dims(model, nullptr, nullptr, &k1, &k2));
  return k1 * k2 == 1;
}

// Theorem tag implied by a task for this model.
std::string tag_for_task(const std::string& task, const gmmsi_model* model, const gmmsi_geometry* geo) {
  if (task == "classify_si") return zero_mean(geo) ? "zero_mean_side_info" : "nonzero_mean_side_info";
  if (task == "classify_dc") return zero_mean(geo) ? "zero_mean_distributed" : "nonzero_mean_distributed";
  if (task == "reconstruct_si") return single_component(model) ? "gaussian" : "gmm_sufficient";
  if (task == "reconstruct_dc") return single_component(model) ? "dist_gaussian" : "dist_gmm_sufficient";
  usage("unknown task '" + task + "'");
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> cmd_rank_table(const Options& o) {
  Model model;
  load(model, o.config);
  Geometry geo;
  check(gmmsi_geometry_compute(model.get(), geo.out()));
  String comps, pairs;
  check(gmmsi_geometry_components_csv(geo.get(), comps.out()));
  check(gmmsi_geometry_pairs_csv(geo.get(), pairs.out()));
  ensure_dir(o.out);
  write(join(o.out, "components.csv"), to_string_owned(comps));
  write(join(o.out, "pairs.csv"), to_string_owned(pairs));
  std::fputs(gmmsi_string_data(pairs.get()), stdout);
  return {"components.csv", "pairs.csv"};
}

std::vector<std::string> cmd_verdict(const Options& o) {
  Model model;
  load(model, o.config);
  Geometry geo;
  check(gmmsi_geometry_compute(model.get(), geo.out()));
  const Range m1 = parse_range(o.m1, "--m1");
  const Range m2 = parse_range(o.m2, "--m2");
  std::vector<std::string> tags = o.theorems;
  if (tags.empty()) tags.push_back(tag_for_task(o.task.empty() ? "classify_si" : o.task, model.get(), geo.get()));
  std::string csv;
  for (const std::string& tag : tags) {
    String table;
    check(gmmsi_verdict_table(geo.get(), tag.c_str(), m1.lo, m1.hi, m2.lo, m2.hi, table.out()));
    std::string part = to_string_owned(table);
    // One header per distinct table layout.
    if (!csv.empty() && csv.substr(0, csv.find('\n')) == part.substr(0, part.find('\n')))
      part = part.substr(part.find('\n') + 1);
    else if (!csv.empty())
      csv += "\n";
    csv += part;
  }
  ensure_dir(o.out);
  write(join(o.out, "verdict.csv"), csv);
  std::fputs(csv.c_str(), stdout);
  return {"verdict.csv"};
}

std::string mode_of(const Options& o) {
  if (!o.mode.empty()) return o.mode;
  if (o.task.empty() || o.task == "classify_si" || o.task == "reconstruct_si") return "side_info";
  return "distributed";
}

std::vector<std::string> cmd_diversity(const Options& o) {
  Model model;
  load(model, o.config);
  Geometry geo;
  check(gmmsi_geometry_compute(model.get(), geo.out()));
  const int m1 = single(o.m1, "--m1");
  const int m2 = single(o.m2, "--m2");
  const std::string mode = mode_of(o);
  double d = 0.0;
  check(gmmsi_diversity(geo.get(), m1, m2, mode.c_str(), &d));
  String table;
  check(gmmsi_diversity_csv(geo.get(), m1, m2, mode.c_str(), table.out()));
  ensure_dir(o.out);
  write(join(o.out, "diversity.csv"), to_string_owned(table));
  std::printf("mode=%s m1=%d m2=%d d=%s\n", mode.c_str(), m1, m2, fmt(d).c_str());
  return {"diversity.csv"};
}

std::vector<std::string> cmd_sweep(const Options& o, const std::string& default_task) {
  Model model;
  load(model, o.config);
  const std::string task = o.task.empty() ? default_task : o.task;
  const bool classify = task.rfind("classify", 0) == 0;
  if (classify != (default_task == "classify_si"))
    usage("task '" + task + "' does not belong to this subcommand");
  gmmsi_sweep_config cfg;
  gmmsi_sweep_config_default(&cfg);
  cfg.task = task.c_str();
  cfg.m1 = single(o.m1, "--m1");
  cfg.m2 = single(o.m2, "--m2");
  cfg.sigma2_hi = o.sigma2_hi;
  cfg.sigma2_lo = o.sigma2_lo;
  cfg.points_per_decade = o.per_decade;
  cfg.trials = o.trials;
  cfg.seed = o.seed;
  cfg.kernel = o.kernel.c_str();
  cfg.freeze_kernel = o.freeze_kernel ? 1 : 0;
  cfg.min_errors = o.min_errors;
  Sweep sweep;
  check(gmmsi_sweep_run(model.get(), &cfg, nullptr, 0, sweep.out()));
  String csv;
  check(gmmsi_sweep_csv(sweep.get(), csv.out()));

  Geometry geo;
  check(gmmsi_geometry_compute(model.get(), geo.out()));
  const std::string tag = tag_for_task(task, model.get(), geo.get());
  String verdict;
  check(gmmsi_verdict_table(geo.get(), tag.c_str(), cfg.m1, cfg.m1, cfg.m2, cfg.m2, verdict.out()));

  ensure_dir(o.out);
  write(join(o.out, "sweep.csv"), to_string_owned(csv));
  write(join(o.out, "verdict.csv"), to_string_owned(verdict));

  double slope = 0.0;
  const gmmsi_status s = gmmsi_sweep_slope(sweep.get(), 1.0, &slope);
  if (s == GMMSI_OK)
    std::fprintf(stderr, "%s m1=%d m2=%d slope(last decade)=%s\n", task.c_str(), cfg.m1, cfg.m2, fmt(slope).c_str());
  else
    std::fprintf(stderr, "%s m1=%d m2=%d slope(last decade) undefined: %s\n", task.c_str(), cfg.m1, cfg.m2,
                 gmmsi_last_error());
  return {"sweep.csv", "verdict.csv"};
}

std::vector<std::string> cmd_region_map(const Options& o) {
  Model model;
  load(model, o.config);
  Geometry geo;
  check(gmmsi_geometry_compute(model.get(), geo.out()));
  const Range m1 = parse_range(o.m1, "--m1");
  const Range m2 = parse_range(o.m2, "--m2");
  std::vector<const char*> tags;
  for (const std::string& t : o.theorems) tags.push_back(t.c_str());
  gmmsi_sweep_config probe;
  gmmsi_sweep_config_default(&probe);
  probe.task = o.probe_task.c_str();
  probe.sigma2_hi = o.probe_hi;
  probe.sigma2_lo = o.probe_lo;
  probe.points_per_decade = 1;
  probe.trials = o.probe_trials;
  probe.seed = o.seed;
  probe.kernel = o.kernel.c_str();
  String csv;
  check(gmmsi_region_map(model.get(), geo.get(), m1.lo, m1.hi, m2.lo, m2.hi, tags.data(), tags.size(),
                         o.probe ? &probe : nullptr, csv.out()));
  ensure_dir(o.out);
  write(join(o.out, "region.csv"), to_string_owned(csv));
  std::fputs(gmmsi_string_data(csv.get()), stdout);
  return {"region.csv"};
}

std::vector<std::string> cmd_make_model(const Options& o) {
  if (o.preset.empty()) usage("--preset is required");
  Model model;
  check(gmmsi_model_preset(o.preset.c_str(), o.seed, model.out()));
  ensure_dir(o.out);
  const std::string name = o.preset + ".model";
  check(gmmsi_model_save(model.get(), join(o.out, name).c_str()));
  return {name};
}

json options_json(const Options& o) {
  return {{"config", o.config},         {"out", o.out},
          {"m1", o.m1},                 {"m2", o.m2},
          {"seed", o.seed},             {"trials", o.trials},
          {"task", o.task},             {"theorem", o.theorems},
          {"mode", o.mode},             {"kernel", o.kernel},
          {"freeze_kernel", o.freeze_kernel},
          {"sigma2_hi", o.sigma2_hi},   {"sigma2_lo", o.sigma2_lo},
          {"per_decade", o.per_decade}, {"min_errors", o.min_errors},
          {"probe", o.probe},           {"probe_task", o.probe_task},
          {"probe_trials", o.probe_trials},
          {"probe_sigma2_hi", o.probe_hi},
          {"probe_sigma2_lo", o.probe_lo},
          {"preset", o.preset}};
}

Options options_from_json(const json& j) {
  Options o;
  try {
    o.config = j.at("config").get<std::string>();
    o.out = j.at("out").get<std::string>();
    o.m1 = j.at("m1").get<std::string>();
    o.m2 = j.at("m2").get<std::string>();
    o.seed = j.at("seed").get<std::uint64_t>();
    o.trials = j.at("trials").get<std::int64_t>();
    o.task = j.at("task").get<std::string>();
    o.theorems = j.at("theorem").get<std::vector<std::string>>();
    o.mode = j.at("mode").get<std::string>();
    o.kernel = j.at("kernel").get<std::string>();
    o.freeze_kernel = j.at("freeze_kernel").get<bool>();
    o.sigma2_hi = j.at("sigma2_hi").get<double>();
    o.sigma2_lo = j.at("sigma2_lo").get<double>();
    o.per_decade = j.at("per_decade").get<int>();
    o.min_errors = j.at("min_errors").get<std::int64_t>();
    o.probe = j.at("probe").get<bool>();
    o.probe_task = j.at("probe_task").get<std::string>();
    o.probe_trials = j.at("probe_trials").get<std::int64_t>();
    o.probe_hi = j.at("probe_sigma2_hi").get<double>();
    o.probe_lo = j.at("probe_sigma2_lo").get<double>();
    o.preset = j.at("preset").get<std::string>();
  } catch (const json::exception& e) {
    throw Failure{"E_CONFIG", std::string("manifest options: ") + e.what(), 1};
  }
  return o;
}

std::vector<std::string> dispatch(const std::string& command, const Options& o) {
  if (command == "rank-table") return cmd_rank_table(o);
  if (command == "verdict") return cmd_verdict(o);
  if (command == "diversity") return cmd_diversity(o);
  if (command == "classify-sweep") return cmd_sweep(o, "classify_si");
  if (command == "reconstruct-sweep") return cmd_sweep(o, "reconstruct_si");
  if (command == "region-map") return cmd_region_map(o);
  if (command == "make-model") return cmd_make_model(o);
  usage("unknown command '" + command + "'");
}

void write_manifest(const std::string& command, const Options& o, const std::vector<std::string>& outputs,
                    double seconds) {
  json m = {{"tool", "gmmsi"},
            {"version", gmmsi_version()},
            {"command", command},
            {"options", options_json(o)},
            {"outputs", outputs},
            {"threads", std::getenv("GMMSI_THREADS") ? std::getenv("GMMSI_THREADS") : ""},
            {"wall_time_s", seconds}};
  if (!o.config.empty()) {
    std::ifstream in(o.config, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    m["model_file"] = {{"path", o.config}, {"bytes", buf.str().size()}, {"fnv1a64", [&] {
                          std::uint64_t h = 1469598103934665603ULL;
                          for (unsigned char c : buf.str()) h = (h ^ c) * 1099511628211ULL;
                          char hex[17];
                          std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(h));
                          return std::string(hex);
                        }()}};
  }
  write(join(o.out, "manifest.json"), m.dump(2) + "\n");
}

int run(int argc, char** argv) {
  CLI::App app{"Classification and reconstruction with side information under joint Gaussian mixtures"};
  app.require_subcommand(1);
  Options o;
  std::string replay_out;

  auto common = [&](CLI::App* sub, bool needs_config) {
    auto* c = sub->add_option("--config", o.config, "Model file (JSON)");
    if (needs_config) c->required();
    sub->add_option("--out", o.out, "Output directory")->capture_default_str();
  };
  auto counts = [&](CLI::App* sub, const char* help) {
    sub->add_option("--m1", o.m1, help)->capture_default_str();
    sub->add_option("--m2", o.m2, help)->capture_default_str();
  };
  auto sweep_flags = [&](CLI::App* sub) {
    sub->add_option("--task", o.task, "classify_si | classify_dc | reconstruct_si | reconstruct_dc");
    sub->add_option("--seed", o.seed, "Master seed")->capture_default_str();
    sub->add_option("--trials", o.trials, "Trials per noise level")->capture_default_str();
    sub->add_option("--kernel", o.kernel, "gaussian | identity2")->capture_default_str();
    sub->add_flag("--freeze-kernel", o.freeze_kernel, "Use one kernel for every trial");
    sub->add_option("--sigma2-hi", o.sigma2_hi, "Largest noise variance")->capture_default_str();
    sub->add_option("--sigma2-lo", o.sigma2_lo, "Smallest noise variance")->capture_default_str();
    sub->add_option("--per-decade", o.per_decade, "Grid points per decade")->capture_default_str();
    sub->add_option("--min-errors", o.min_errors, "Escalate trials until this many errors (classification)");
  };

  auto* rank = app.add_subcommand("rank-table", "Per-component and pairwise rank tables");
  common(rank, true);

  auto* verdict = app.add_subcommand("verdict", "Phase-transition verdicts over feature counts");
  common(verdict, true);
  counts(verdict, "Feature count or range a..b");
  verdict->add_option("--task", o.task, "Task used to pick the theorem");
  verdict->add_option("--theorem", o.theorems, "Theorem tag (repeatable)");

  auto* diversity = app.add_subcommand("diversity", "Diversity order and per-quadruple values");
  common(diversity, true);
  counts(diversity, "Feature count");
  diversity->add_option("--mode", o.mode, "side_info | distributed");
  diversity->add_option("--task", o.task, "Task used to pick the mode");

  auto* csweep = app.add_subcommand("classify-sweep", "Monte Carlo misclassification sweep");
  common(csweep, true);
  counts(csweep, "Feature count");
  sweep_flags(csweep);

  auto* rsweep = app.add_subcommand("reconstruct-sweep", "Monte Carlo reconstruction sweep");
  common(rsweep, true);
  counts(rsweep, "Feature count");
  sweep_flags(rsweep);

  auto* region = app.add_subcommand("region-map", "Verdicts over a rectangle of feature counts");
  common(region, true);
  counts(region, "Range a..b");
  region->add_option("--theorem", o.theorems, "Theorem tag (repeatable)");
  region->add_option("--seed", o.seed, "Probe seed")->capture_default_str();
  region->add_option("--kernel", o.kernel, "Probe kernel policy")->capture_default_str();
  region->add_flag("--probe", o.probe, "Tag each cell with a short Monte Carlo probe");
  region->add_option("--probe-task", o.probe_task, "Probe task")->capture_default_str();
  region->add_option("--probe-trials", o.probe_trials, "Probe trials per noise level")->capture_default_str();
  region->add_option("--probe-sigma2-hi", o.probe_hi, "Probe largest noise variance")->capture_default_str();
  region->add_option("--probe-sigma2-lo", o.probe_lo, "Probe smallest noise variance")->capture_default_str();

  auto* make = app.add_subcommand("make-model", "Write a built-in model to <out>/<preset>.model");
  common(make, false);
  make->add_option("--preset", o.preset, "two_signal | gauss334 | random")->required();
  make->add_option("--seed", o.seed, "Model seed")->capture_default_str();

  auto* replay = app.add_subcommand("replay", "Re-run the command recorded in a manifest");
  replay->add_option("--manifest", o.manifest, "manifest.json of an earlier run")->required();
  replay->add_option("--out", replay_out, "Output directory (default: the recorded one)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::string msg = e.what();
    for (char& c : msg)
      if (c == '\n') c = ' ';
    std::fprintf(stderr, "error[E_USAGE]: %s\n", msg.c_str());
    return 1;
  }

  CLI::App* sub = app.get_subcommands().front();
  std::string command = sub->get_name();
  if (command == "replay") {
    std::ifstream in(o.manifest);
    if (!in) throw Failure{"E_IO", "cannot open manifest '" + o.manifest + "'", 1};
    json m;
    try {
      m = json::parse(in);
      command = m.at("command").get<std::string>();
      o = options_from_json(m.at("options"));
    } catch (const json::exception& e) {
      throw Failure{"E_CONFIG", std::string("manifest: ") + e.what(), 1};
    }
    if (!replay_out.empty()) o.out = replay_out;
  }

  const auto start = std::chrono::steady_clock::now();
  const std::vector<std::string> outputs = dispatch(command, o);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_manifest(command, o, outputs, seconds);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const Failure& f) {
    std::string msg = f.message;
    for (char& c : msg)
      if (c == '\n') c = ' ';
    std::fprintf(stderr, "error[%s]: %s\n", f.code.c_str(), msg.c_str());
    return f.exit_code;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error[E_INTERNAL]: %s\n", e.what());
    return 2;
  }
}
