#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gmmsi/geometry.hpp"
#include "gmmsi/presets.hpp"
#include "gmmsi/sensing.hpp"

using namespace gmmsi;

TEST_CASE("empty kernels") {
  const Matrix k = draw_kernel(0, 5, 1);
  CHECK(k.rows() == 0);
  CHECK(k.cols() == 5);
  const SensingPair phi{draw_kernel(3, 5, 1), Matrix(0, 4)};
  const Observation o = observe(phi, Vector::Ones(5), Vector::Ones(4), 0.1, 2);
  CHECK(o.y1.size() == 3);
  CHECK(o.y2.size() == 0);
}

TEST_CASE("kernel entries are standard normal") {
  double sum = 0.0;
  double sq = 0.0;
  const int reps = 10000;
  for (int t = 0; t < reps; ++t) {
    const Matrix k = draw_kernel(4, 12, 3, static_cast<std::uint64_t>(t));
    sum += k.sum();
    sq += k.squaredNorm();
  }
  const double n = 48.0 * reps;
  const double mean = sum / n;
  CHECK(std::abs(mean) < 0.1);
  CHECK(std::abs(sq / n - mean * mean - 1.0) < 0.1);
  CHECK(draw_kernel(4, 12, 3, 5) == draw_kernel(4, 12, 3, 5));
}

TEST_CASE("identity side-information kernel") {
  const SensingPair phi = draw_sensing_pair(3, 5, 2, 4, KernelPolicy::kIdentity2, 1);
  CHECK(phi.phi2 == Matrix::Identity(4, 4));
  CHECK(phi.m1() == 3);
  CHECK(parse_kernel_policy("identity2") == KernelPolicy::kIdentity2);
  CHECK_THROWS_AS(parse_kernel_policy("bernoulli"), Error);
}

TEST_CASE("assembly") {
  const SensingPair eye{Matrix::Identity(2, 2), Matrix::Identity(3, 3)};
  CHECK(assemble(eye) == Matrix::Identity(5, 5));
  const SensingPair top{draw_kernel(2, 3, 1), Matrix(0, 4)};
  const Matrix a = assemble(top);
  CHECK(a.rows() == 2);
  CHECK(a.cols() == 7);
  CHECK(a.rightCols(4).isZero(0.0));
  for (std::uint64_t t = 0; t < 20; ++t) {
    const SensingPair r = draw_sensing_pair(3, 5, 2, 4, KernelPolicy::kGaussian, 9, t);
    CHECK(numerical_rank(assemble(r)) == numerical_rank(r.phi1) + numerical_rank(r.phi2));
    CHECK(assemble(r).topRightCorner(3, 4).isZero(0.0));
  }
}

TEST_CASE("noise variance") {
  const SensingPair phi{draw_kernel(3, 4, 1), draw_kernel(2, 3, 2)};
  const double sigma2 = 0.25;
  double sq = 0.0;
  const int reps = 10000;
  for (int t = 0; t < reps; ++t) {
    const Observation o = observe(phi, Vector::Zero(4), Vector::Zero(3), sigma2, 11,
                                  static_cast<std::uint64_t>(t));
    sq += o.y().squaredNorm();
  }
  CHECK(std::abs(sq / (5.0 * reps) / sigma2 - 1.0) < 0.05);
}

TEST_CASE("near-noiseless identity") {
  const SensingPair phi{Matrix::Identity(4, 4), Matrix::Identity(2, 2)};
  const Vector x1 = Vector::LinSpaced(4, -1, 1);
  const Vector x2 = Vector::Ones(2);
  const Observation o = observe(phi, x1, x2, 1e-12, 3);
  CHECK((o.y1 - x1).cwiseAbs().maxCoeff() < 1e-5);
  CHECK((o.y2 - x2).cwiseAbs().maxCoeff() < 1e-5);
}

TEST_CASE("nonpositive noise variance is rejected") {
  const SensingPair phi{Matrix::Identity(2, 2), Matrix::Identity(1, 1)};
  for (double bad : {0.0, -1.0}) {
    try {
      observe(phi, Vector::Zero(2), Vector::Zero(1), bad, 1);
      FAIL("expected rejection");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kInvalidInput);
    }
  }
  CHECK_THROWS_AS(observe(phi, Vector::Zero(3), Vector::Zero(1), 1.0, 1), Error);
}

TEST_CASE("batch observation keeps order and labels") {
  const JointGmm model = two_signal_model(2);
  const auto samples = sample_joint(model, 40, 8);
  const SensingPair phi = draw_sensing_pair(6, 20, 4, 12, KernelPolicy::kGaussian, 4);
  const ObservationBatch batch = observe_batch(phi, samples, 1e-3, 21);
  CHECK(batch.labels == samples.labels);
  for (Eigen::Index t = 0; t < 40; ++t) {
    const Observation o = observe(phi, samples.x1.col(t), samples.x2.col(t), 1e-3, 21,
                                  static_cast<std::uint64_t>(t));
    CHECK(batch.y1.col(t) == o.y1);
    CHECK(batch.y2.col(t) == o.y2);
  }
}

TEST_CASE("energy identity") {
  RandomModelSpec spec;
  spec.k1 = 1;
  spec.k2 = 1;
  spec.nonzero_means = true;
  spec.max_common = 2;
  const JointGmm model = random_factor_model(spec, 6);
  const SensingPair phi = draw_sensing_pair(4, spec.n1, 3, spec.n2, KernelPolicy::kGaussian, 5);
  const double sigma2 = 0.5;
  const auto samples = sample_joint(model, 100000, 77);
  const ObservationBatch batch = observe_batch(phi, samples, sigma2, 78);
  const double emp = (batch.y1.squaredNorm() + batch.y2.squaredNorm()) / 100000.0;
  const Matrix a = assemble(phi);
  const JointComponent& c = model.component({0, 0});
  const double expected = (a * c.covariance() * a.transpose()).trace() + phi.m() * sigma2 +
                          (a * c.mean()).squaredNorm();
  CHECK(std::abs(emp / expected - 1.0) < 0.03);
}
