#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <limits>

#include "gmmsi/geometry.hpp"
#include "gmmsi/presets.hpp"
#include "oracles.hpp"

using namespace gmmsi;

TEST_CASE("numerical rank basics") {
  CHECK(numerical_rank(Matrix::Zero(5, 5)) == 0);
  CHECK(numerical_rank(Matrix::Identity(7, 7)) == 7);
  CHECK(numerical_rank(Matrix(0, 3)) == 0);
  rng::Stream s(1, rng::Domain::kModel, 0);
  const Matrix g = s.normal_matrix(9, 20);
  CHECK(numerical_rank(g.transpose() * g) == 9);
  CHECK(oracle::lu_rank(g.transpose() * g) == 9);
  Matrix bad = Matrix::Identity(3, 3);
  bad(1, 2) = std::numeric_limits<double>::quiet_NaN();
  try {
    numerical_rank(bad);
    FAIL("expected rejection");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kInvalidInput);
  }
}

TEST_CASE("projected rank formula") {
  CHECK(projected_rank(7, 6, ComponentRanks{7, 6, 9}) == 9);
  CHECK(projected_rank(20, 20, ComponentRanks{7, 6, 9}) == 9);
  CHECK(projected_rank(6, 4, ComponentRanks{7, 6, 9}) == 9);
  CHECK(projected_rank(6, 4, PairRanks{10, 11, 17}) == 10);
  CHECK(projected_rank(5, 4, ComponentRanks{7, 6, 9}) == 9);
  CHECK(projected_rank(5, 3, ComponentRanks{7, 6, 9}) == 8);
}

TEST_CASE("projected rank is monotone and capped") {
  for (int r1 = 0; r1 <= 6; ++r1)
    for (int r2 = 0; r2 <= 6; ++r2)
      for (int r = std::max(r1, r2); r <= r1 + r2; ++r)
        for (int m1 = 0; m1 <= 8; ++m1)
          for (int m2 = 0; m2 <= 8; ++m2) {
            const int v = projected_rank(m1, m2, r1, r2, r);
            CHECK(v <= r);
            CHECK(projected_rank(m1 + 1, m2, r1, r2, r) >= v);
            CHECK(projected_rank(m1, m2 + 1, r1, r2, r) >= v);
          }
}

TEST_CASE("projected rank numeric basics") {
  const JointGmm model = two_signal_model(5);
  const Matrix sigma = model.component({0, 0}).covariance();
  const SensingPair zero{Matrix::Zero(3, 20), Matrix::Zero(2, 12)};
  CHECK(projected_rank_numeric(zero, sigma) == 0);
  rng::Stream s(2, rng::Domain::kKernel, 0);
  const SensingPair square{s.normal_matrix(20, 20), s.normal_matrix(12, 12)};
  CHECK(projected_rank_numeric(square, sigma) == 9);
  CHECK_THROWS_AS(projected_rank_numeric(SensingPair{Matrix::Zero(3, 19), Matrix::Zero(2, 12)},
                                         sigma),
                  Error);
}

TEST_CASE("closed-form projected rank matches the numerical rank of projected covariances") {
  const JointGmm model = two_signal_model(8);
  const GeometryTable geo = geometry_summary(model);
  int checked = 0;
  for (std::uint64_t t = 0; t < 500; ++t) {
    const SensingPair phi = draw_sensing_pair(6, 20, 4, 12, KernelPolicy::kGaussian, 77, t);
    const ClassPair p = model.support()[t % 4];
    const int expected = projected_rank(6, 4, geo.ranks(p));
    const int numeric = projected_rank_numeric(phi, model.component(p).covariance());
    CHECK(numeric == expected);
    const Matrix a = assemble(phi);
    CHECK(oracle::lu_rank(a * model.component(p).covariance() * a.transpose()) == expected);
    ++checked;
  }
  CHECK(checked == 500);
}

TEST_CASE("range membership") {
  CHECK(in_range(Vector::Zero(3), Matrix::Zero(3, 3)));
  const Matrix d = (Matrix(2, 2) << 1, 0, 0, 0).finished();
  CHECK_FALSE(in_range((Vector(2) << 0, 1).finished(), d));
  CHECK(in_range((Vector(2) << 3, 0).finished(), d));

  rng::Stream s(9, rng::Domain::kModel, 3);
  for (int t = 0; t < 20; ++t) {
    const Matrix f = s.normal_matrix(6, 3);
    const Matrix sigma = f * f.transpose();
    const Vector member = sigma * s.normal_vector(6);
    const Vector other = s.normal_vector(6);
    CHECK(in_range(member, sigma));
    CHECK_FALSE(in_range(other, sigma));
    CHECK(in_range(1e-3 * member, 1e4 * sigma));
    CHECK_FALSE(in_range(1e5 * other, 1e-4 * sigma));
  }
}

TEST_CASE("pair-rank table of the four-component model") {
  const JointGmm model = two_signal_model(12345);
  const GeometryTable geo = geometry_summary(model);
  for (const ClassPair& p : model.support()) CHECK(geo.ranks(p) == ComponentRanks{7, 6, 9});
  auto pr = [&](int i, int k, int j, int l) {
    return geo.pair(Quadruple{{i - 1, k - 1}, {j - 1, l - 1}}).ranks;
  };
  CHECK(pr(1, 1, 1, 2) == PairRanks{8, 8, 12});
  CHECK(pr(2, 1, 2, 2) == PairRanks{8, 8, 12});
  CHECK(pr(1, 1, 2, 1) == PairRanks{10, 11, 17});
  CHECK(pr(1, 1, 2, 2) == PairRanks{11, 11, 18});
  CHECK(pr(1, 2, 2, 1) == PairRanks{9, 10, 15});
  CHECK(pr(1, 2, 2, 2) == PairRanks{10, 11, 17});
  CHECK(pr(2, 1, 1, 2) == PairRanks{9, 10, 15});
  CHECK(geo.pairs().size() == 12);
  CHECK(geo.side_info_quadruples().size() == 8);
  for (const auto& g : geo.pairs()) {
    CHECK(g.mu1_in);
    CHECK(g.mu2_in);
    CHECK(g.mu_in);
  }
  CHECK(geo.zero_mean());
}

TEST_CASE("pair-rank table holds for many dictionary draws") {
  for (std::uint64_t seed = 100; seed < 130; ++seed) {
    const GeometryTable geo = geometry_summary(two_signal_model(seed));
    CHECK(geo.pair(Quadruple{{0, 1}, {1, 0}}).ranks == PairRanks{9, 10, 15});
    CHECK(geo.pair(Quadruple{{0, 0}, {1, 1}}).ranks == PairRanks{11, 11, 18});
  }
}

TEST_CASE("single component has no pairs; table is deterministic") {
  const GeometryTable geo = geometry_summary(gaussian_334_model(3));
  CHECK(geo.pairs().empty());
  CHECK(geo.ranks({0, 0}) == ComponentRanks{3, 3, 4});
  const JointGmm m = two_signal_model(4);
  CHECK(geometry_summary(m).pairs_csv().str() == geometry_summary(m).pairs_csv().str());
}

TEST_CASE("pair ranks dominate component ranks on random models") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const JointGmm m = random_factor_model(RandomModelSpec{}, seed);
    const GeometryTable geo = geometry_summary(m);
    for (const ClassPair& p : geo.components()) {
      const ComponentRanks& r = geo.ranks(p);
      CHECK(std::max(r.r_x1, r.r_x2) <= r.r_x);
      CHECK(r.r_x <= r.r_x1 + r.r_x2);
    }
    for (const auto& g : geo.pairs()) {
      const ComponentRanks& a = geo.ranks(g.q.a);
      const ComponentRanks& b = geo.ranks(g.q.b);
      CHECK(g.ranks.r_x1_pair >= std::max(a.r_x1, b.r_x1));
      CHECK(g.ranks.r_x2_pair >= std::max(a.r_x2, b.r_x2));
      CHECK(g.ranks.r_x_pair >= std::max(a.r_x, b.r_x));
    }
  }
}

TEST_CASE("nonzero means give range flags consistent with direct tests") {
  RandomModelSpec spec;
  spec.nonzero_means = true;
  spec.max_common = 1;
  const JointGmm m = random_factor_model(spec, 3);
  const GeometryTable geo = geometry_summary(m);
  CHECK_FALSE(geo.zero_mean());
  for (const auto& g : geo.pairs()) {
    const JointComponent& a = m.component(g.q.a);
    const JointComponent& b = m.component(g.q.b);
    const Matrix s = a.covariance() + b.covariance();
    const Vector d = a.mean() - b.mean();
    // Least-squares residual through a dense solve as an independent test.
    const Vector w = s.completeOrthogonalDecomposition().solve(d);
    const bool member = (s * w - d).norm() <= 1e-8 * d.norm();
    CHECK(g.mu_in == member);
  }
}

TEST_CASE("CSV export layout") {
  const GeometryTable geo = geometry_summary(two_signal_model(1));
  const std::string comps = geo.components_csv().str();
  CHECK(comps.rfind("i,k,r_x1,r_x2,r_x\n1,1,7,6,9\n", 0) == 0);
  const std::string pairs = geo.pairs_csv().str();
  CHECK(pairs.rfind("i,k,j,l,r_x1_pair,r_x2_pair,r_x_pair,mu1_in,mu2_in,mu_in\n1,1,1,2,8,8,12,1,1,1\n",
                    0) == 0);
}
