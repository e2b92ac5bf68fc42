#include "gmmsi/sensing.hpp"

#include <cmath>

namespace gmmsi {

namespace {

void check_sigma2(double sigma2) {
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2))
    throw Error(ErrorCode::kInvalidInput, "noise variance must be positive and finite");
}

}  // namespace

const char* kernel_policy_name(KernelPolicy p) noexcept {
  return p == KernelPolicy::kIdentity2 ? "identity2" : "gaussian";
}

KernelPolicy parse_kernel_policy(const std::string& name) {
  if (name == "gaussian") return KernelPolicy::kGaussian;
  if (name == "identity2") return KernelPolicy::kIdentity2;
  throw Error(ErrorCode::kInvalidInput, "unknown kernel policy '" + name + "'");
}

Matrix draw_kernel(int m, int n, std::uint64_t seed, std::uint64_t index,
                   std::uint64_t sub) {
  if (m < 0 || n < 0) throw Error(ErrorCode::kInvalidInput, "kernel dimensions must be >= 0");
  rng::Stream stream(seed, rng::Domain::kKernel, index, sub);
  return stream.normal_matrix(m, n);
}

SensingPair draw_sensing_pair(int m1, int n1, int m2, int n2, KernelPolicy policy,
                              std::uint64_t seed, std::uint64_t index) {
  SensingPair phi;
  phi.phi1 = draw_kernel(m1, n1, seed, index, 1);
  if (policy == KernelPolicy::kIdentity2)
    phi.phi2 = Matrix::Identity(n2, n2);
  else
    phi.phi2 = draw_kernel(m2, n2, seed, index, 2);
  return phi;
}

Matrix assemble(const SensingPair& phi) {
  Matrix out = Matrix::Zero(phi.m(), phi.n1() + phi.n2());
  out.topLeftCorner(phi.m1(), phi.n1()) = phi.phi1;
  out.bottomRightCorner(phi.m2(), phi.n2()) = phi.phi2;
  return out;
}

SensingPair drop_side_information(const SensingPair& phi) {
  return SensingPair{phi.phi1, Matrix(0, phi.n2())};
}

void check_conforms(const SensingPair& phi, int n1, int n2) {
  if (phi.n1() != n1 || phi.n2() != n2)
    throw Error(ErrorCode::kDimensionMismatch,
                "kernel columns (" + std::to_string(phi.n1()) + "," +
                    std::to_string(phi.n2()) + ") do not match signal dimensions (" +
                    std::to_string(n1) + "," + std::to_string(n2) + ")");
  if (!phi.phi1.allFinite() || !phi.phi2.allFinite())
    throw Error(ErrorCode::kInvalidInput, "kernel has non-finite entries");
}

Vector Observation::y() const {
  Vector out(y1.size() + y2.size());
  out << y1, y2;
  return out;
}

Observation observe(const SensingPair& phi, const Vector& x1, const Vector& x2,
                    double sigma2, std::uint64_t seed, std::uint64_t index) {
  check_sigma2(sigma2);
  check_conforms(phi, static_cast<int>(x1.size()), static_cast<int>(x2.size()));
  rng::Stream stream(seed, rng::Domain::kNoise, index);
  const double sigma = std::sqrt(sigma2);
  Observation obs;
  obs.sigma2 = sigma2;
  obs.y1 = phi.phi1 * x1 + sigma * stream.normal_vector(phi.m1());
  obs.y2 = phi.phi2 * x2 + sigma * stream.normal_vector(phi.m2());
  return obs;
}

ObservationBatch observe_batch(const SensingPair& phi, const LabeledSampleSet& samples,
                               double sigma2, std::uint64_t seed) {
  check_sigma2(sigma2);
  check_conforms(phi, static_cast<int>(samples.x1.rows()), static_cast<int>(samples.x2.rows()));
  const auto count = static_cast<Eigen::Index>(samples.size());
  ObservationBatch batch;
  batch.sigma2 = sigma2;
  batch.labels = samples.labels;
  batch.y1.resize(phi.m1(), count);
  batch.y2.resize(phi.m2(), count);
  for (Eigen::Index t = 0; t < count; ++t) {
    const Observation o = observe(phi, samples.x1.col(t), samples.x2.col(t), sigma2, seed,
                                  static_cast<std::uint64_t>(t));
    batch.y1.col(t) = o.y1;
    batch.y2.col(t) = o.y2;
  }
  return batch;
}

}  // namespace gmmsi
