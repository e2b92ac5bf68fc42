#pragma once

#include <cstdint>

#include "gmmsi/model.hpp"

namespace gmmsi {

/// Projection kernels for the two branches. A branch with zero rows takes no
/// measurements.
struct SensingPair {
  Matrix phi1;  ///< m1 x n1
  Matrix phi2;  ///< m2 x n2

  int m1() const { return static_cast<int>(phi1.rows()); }
  int m2() const { return static_cast<int>(phi2.rows()); }
  int m() const { return m1() + m2(); }
  int n1() const { return static_cast<int>(phi1.cols()); }
  int n2() const { return static_cast<int>(phi2.cols()); }
};

enum class KernelPolicy {
  kGaussian,   ///< i.i.d. N(0,1) entries on both branches
  kIdentity2,  ///< Gaussian phi1, phi2 = I (uncompressed side information)
};

const char* kernel_policy_name(KernelPolicy p) noexcept;
KernelPolicy parse_kernel_policy(const std::string& name);

/// m x n matrix of i.i.d. N(0,1) entries from stream (seed, kernel, index, sub).
Matrix draw_kernel(int m, int n, std::uint64_t seed, std::uint64_t index = 0,
                   std::uint64_t sub = 0);

/// Both kernels for trial `index`. Under kIdentity2 the requested m2 is
/// ignored and phi2 = I_{n2}.
SensingPair draw_sensing_pair(int m1, int n1, int m2, int n2, KernelPolicy policy,
                              std::uint64_t seed, std::uint64_t index = 0);

/// Block-diagonal (m1+m2) x (n1+n2) kernel.
Matrix assemble(const SensingPair& phi);

/// Same kernels with the side-information branch removed (m2 = 0).
SensingPair drop_side_information(const SensingPair& phi);

void check_conforms(const SensingPair& phi, int n1, int n2);

struct Observation {
  Vector y1;
  Vector y2;
  double sigma2 = 0.0;

  Vector y() const;
};

/// y = Phi x + w with w ~ N(0, sigma2 I) drawn from stream (seed, noise, index).
Observation observe(const SensingPair& phi, const Vector& x1, const Vector& x2,
                    double sigma2, std::uint64_t seed, std::uint64_t index = 0);

/// Column t of y1/y2 observes sample t of `samples` with noise stream index t.
struct ObservationBatch {
  Matrix y1;
  Matrix y2;
  std::vector<ClassPair> labels;
  double sigma2 = 0.0;

  std::size_t size() const { return labels.size(); }
};

ObservationBatch observe_batch(const SensingPair& phi, const LabeledSampleSet& samples,
                               double sigma2, std::uint64_t seed);

}  // namespace gmmsi
