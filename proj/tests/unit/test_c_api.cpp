#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <string>
#include <vector>

#include "gmmsi.h"

namespace {

gmmsi_model* preset(const char* name, uint64_t seed = 1) {
  gmmsi_model* m = nullptr;
  REQUIRE(gmmsi_model_preset(name, seed, &m) == GMMSI_OK);
  return m;
}

std::string take(gmmsi_string* s) {
  std::string out(gmmsi_string_data(s), gmmsi_string_size(s));
  gmmsi_string_free(s);
  return out;
}

}  // namespace

TEST_CASE("status reporting") {
  gmmsi_model* m = nullptr;
  CHECK(gmmsi_model_load("/nonexistent/file.model", &m) == GMMSI_E_IO);
  CHECK(m == nullptr);
  CHECK(std::string(gmmsi_last_error()).find("cannot open") != std::string::npos);
  CHECK(std::string(gmmsi_status_name(GMMSI_E_IO)) == "E_IO");
  CHECK(std::string(gmmsi_status_name(GMMSI_E_INTERNAL)) == "E_INTERNAL");
  CHECK(gmmsi_model_parse("{not json", &m) == GMMSI_E_CONFIG);
  CHECK(gmmsi_model_parse(nullptr, &m) == GMMSI_E_INVALID_INPUT);
  CHECK(gmmsi_model_preset("nope", 1, &m) == GMMSI_E_INVALID_INPUT);
  gmmsi_model* ok = preset("gauss334");
  CHECK(std::string(gmmsi_last_error()).empty());
  gmmsi_model_free(ok);
  // Free functions accept null.
  gmmsi_model_free(nullptr);
  gmmsi_string_free(nullptr);
}

TEST_CASE("model round trip and dimensions") {
  gmmsi_model* m = preset("two_signal", 3);
  int n1 = 0, n2 = 0, k1 = 0, k2 = 0;
  CHECK(gmmsi_model_dims(m, &n1, &n2, &k1, &k2) == GMMSI_OK);
  CHECK(n1 == 20);
  CHECK(n2 == 12);
  CHECK(k1 == 2);
  CHECK(k2 == 2);
  gmmsi_string* text = nullptr;
  REQUIRE(gmmsi_model_serialize(m, &text) == GMMSI_OK);
  const std::string json = take(text);
  gmmsi_model* back = nullptr;
  REQUIRE(gmmsi_model_parse(json.c_str(), &back) == GMMSI_OK);
  gmmsi_string* again = nullptr;
  REQUIRE(gmmsi_model_serialize(back, &again) == GMMSI_OK);
  CHECK(take(again) == json);

  std::vector<double> x(32);
  int i = 0, k = 0;
  CHECK(gmmsi_model_sample(m, 1, 0, &i, &k, x.data(), x.size()) == GMMSI_OK);
  CHECK(i >= 1);
  CHECK(k <= 2);
  CHECK(gmmsi_model_sample(m, 1, 0, &i, &k, x.data(), 31) == GMMSI_E_DIMENSION);
  gmmsi_model_free(back);
  gmmsi_model_free(m);
}

TEST_CASE("geometry, verdicts and diversity") {
  gmmsi_model* m = preset("two_signal", 2);
  gmmsi_geometry* g = nullptr;
  REQUIRE(gmmsi_geometry_compute(m, &g) == GMMSI_OK);
  int r = 0;
  CHECK(gmmsi_projected_rank(g, 1, 1, 20, 12, &r) == GMMSI_OK);
  CHECK(r == 9);
  CHECK(gmmsi_projected_rank(g, 1, 1, 3, 2, &r) == GMMSI_OK);
  CHECK(r == 5);
  gmmsi_verdict v;
  CHECK(gmmsi_classification_verdict(g, 6, 4, "zero_mean_side_info", &v) == GMMSI_OK);
  CHECK(std::string(v.outcome) == "phase_transition");
  CHECK(v.d == 0.5);
  CHECK(v.binding[0] >= 1);
  CHECK(gmmsi_classification_verdict(g, 6, 4, "nonsense", &v) == GMMSI_E_INVALID_INPUT);
  int t = 0;
  int b[2];
  CHECK(gmmsi_reconstruction_verdict(g, 6, 4, "gmm_sufficient", &t, b) == GMMSI_OK);
  CHECK(t == 1);
  CHECK(gmmsi_reconstruction_verdict(g, 6, 4, "gaussian", &t, b) == GMMSI_E_UNSUPPORTED);
  double d = 0;
  CHECK(gmmsi_diversity(g, 8, 4, "side_info", &d) == GMMSI_OK);
  CHECK(d == 1.5);
  gmmsi_string* csv = nullptr;
  REQUIRE(gmmsi_verdict_table(g, "zero_mean_side_info", 0, 12, 4, 4, &csv) == GMMSI_OK);
  const std::string table = take(csv);
  CHECK(std::count(table.begin(), table.end(), '\n') == 14);
  REQUIRE(gmmsi_diversity_csv(g, 6, 4, "distributed", &csv) == GMMSI_OK);
  CHECK(take(csv).rfind("mode,m1,m2,i,k,j,l,d,binding", 0) == 0);
  REQUIRE(gmmsi_geometry_pairs_csv(g, &csv) == GMMSI_OK);
  CHECK(take(csv).find("1,1,2,1,10,11,17") != std::string::npos);
  gmmsi_geometry_free(g);
  gmmsi_model_free(m);
}

TEST_CASE("decoding through the C interface") {
  gmmsi_model* m = preset("two_signal", 4);
  gmmsi_kernel* phi = nullptr;
  REQUIRE(gmmsi_kernel_draw(8, 20, 4, 12, "gaussian", 1, 0, &phi) == GMMSI_OK);
  int m1 = 0, m2 = 0;
  gmmsi_kernel_dims(phi, &m1, &m2);
  CHECK(m1 == 8);
  CHECK(m2 == 4);
  int correct = 0;
  for (uint64_t t = 0; t < 50; ++t) {
    std::vector<double> x(32), y(12), xh(20);
    int i = 0, k = 0, ei = 0, ek = 0;
    REQUIRE(gmmsi_model_sample(m, 7, t, &i, &k, x.data(), x.size()) == GMMSI_OK);
    REQUIRE(gmmsi_kernel_observe(phi, x.data(), x.size(), 1e-8, 7, t, y.data(), y.size()) == GMMSI_OK);
    REQUIRE(gmmsi_classify(m, phi, y.data(), y.size(), 1e-8, "distributed", &ei, &ek) == GMMSI_OK);
    if (ei == i && ek == k) ++correct;
    REQUIRE(gmmsi_reconstruct(m, phi, y.data(), y.size(), 1e-8, "gmm_cme", "x1", xh.data(), xh.size()) ==
            GMMSI_OK);
    double err = 0, norm = 0;
    for (int j = 0; j < 20; ++j) {
      err += (xh[j] - x[j]) * (xh[j] - x[j]);
      norm += x[j] * x[j];
    }
    CHECK(err < 1e-4 * norm);
  }
  CHECK(correct >= 49);
  std::vector<double> y(12, 0.0), out(32);
  CHECK(gmmsi_reconstruct(m, phi, y.data(), y.size(), 1e-3, "classify_reconstruct", "x", out.data(), 32) ==
        GMMSI_OK);
  CHECK(gmmsi_reconstruct(m, phi, y.data(), y.size(), 1e-3, "magic", "x", out.data(), 32) ==
        GMMSI_E_INVALID_INPUT);
  CHECK(gmmsi_reconstruct(m, phi, y.data(), 11, 1e-3, "gmm_cme", "x", out.data(), 32) == GMMSI_E_DIMENSION);
  CHECK(gmmsi_classify(m, phi, y.data(), y.size(), 0.0, "side_info", &m1, &m2) == GMMSI_E_INVALID_INPUT);
  double v = 0;
  CHECK(gmmsi_perr_bound(m, phi, 1e-4, "side_info", &v) == GMMSI_OK);
  CHECK(v > 0);
  CHECK(gmmsi_mse_lower_bound(m, phi, 1e-4, "x1", &v) == GMMSI_OK);
  CHECK(v > 0);

  const double p1[2] = {1.0, 0.0};
  gmmsi_kernel* custom = nullptr;
  CHECK(gmmsi_kernel_create(p1, 1, 2, nullptr, 0, 3, &custom) == GMMSI_OK);
  CHECK(gmmsi_classify(m, custom, p1, 1, 1e-3, "side_info", &m1, &m2) == GMMSI_E_DIMENSION);
  gmmsi_kernel_free(custom);
  gmmsi_kernel_free(phi);
  gmmsi_model_free(m);
}

TEST_CASE("sweeps and region maps") {
  gmmsi_model* m = preset("gauss334", 1);
  gmmsi_sweep_config cfg;
  gmmsi_sweep_config_default(&cfg);
  cfg.task = "reconstruct_si";
  cfg.m1 = 2;
  cfg.m2 = 2;
  cfg.trials = 200;
  cfg.sigma2_hi = 1e-2;
  cfg.sigma2_lo = 1e-6;
  cfg.points_per_decade = 1;
  gmmsi_sweep* s = nullptr;
  REQUIRE(gmmsi_sweep_run(m, &cfg, nullptr, 0, &s) == GMMSI_OK);
  CHECK(gmmsi_sweep_size(s) == 5);
  gmmsi_sweep_point p;
  CHECK(gmmsi_sweep_point_at(s, 4, &p) == GMMSI_OK);
  CHECK(p.sigma2 == 1e-6);
  CHECK(std::isfinite(p.mmse_gauss));
  CHECK(gmmsi_sweep_point_at(s, 5, &p) == GMMSI_E_INVALID_INPUT);
  double slope = 0;
  CHECK(gmmsi_sweep_slope(s, 4, &slope) == GMMSI_OK);
  CHECK(slope > 0.5);
  gmmsi_string* csv = nullptr;
  REQUIRE(gmmsi_sweep_csv(s, &csv) == GMMSI_OK);
  CHECK(take(csv).rfind("sigma2,mse_emp,mse_cr_emp,mmse_gauss_formula,mse_lb,m1,m2", 0) == 0);
  gmmsi_sweep_free(s);

  const double grid[3] = {1e-2, 1e-3, 1e-4};
  cfg.task = "classify_si";
  CHECK(gmmsi_sweep_run(m, &cfg, grid, 3, &s) == GMMSI_OK);
  CHECK(gmmsi_sweep_size(s) == 3);
  gmmsi_sweep_free(s);
  cfg.trials = 10;
  CHECK(gmmsi_sweep_run(m, &cfg, grid, 3, &s) == GMMSI_E_INVALID_INPUT);
  cfg.task = "guess";
  CHECK(gmmsi_sweep_run(m, &cfg, grid, 3, &s) == GMMSI_E_INVALID_INPUT);

  gmmsi_geometry* g = nullptr;
  REQUIRE(gmmsi_geometry_compute(m, &g) == GMMSI_OK);
  const char* tags[] = {"gaussian", "dist_gaussian"};
  REQUIRE(gmmsi_region_map(m, g, 0, 5, 0, 5, tags, 2, nullptr, &csv) == GMMSI_OK);
  const std::string region = take(csv);
  CHECK(std::count(region.begin(), region.end(), '\n') == 37);
  CHECK(region.find("1,3,transition,transition") != std::string::npos);
  gmmsi_geometry_free(g);
  gmmsi_model_free(m);
}
