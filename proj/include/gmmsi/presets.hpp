#pragma once

#include <cstdint>

#include "gmmsi/model.hpp"

namespace gmmsi {

/// Four-component (K1 = K2 = 2) zero-mean model in R^20 x R^12 with uniform
/// prior. Every component has ranks (r_x1, r_x2, r_x) = (7, 6, 9); the
/// pairwise ranks are
///   (11,12) (21,22): (8, 8, 12)     (11,21) (12,22): (10, 11, 17)
///   (11,22):        (11, 11, 18)    (12,21):        (9, 10, 15)
/// Factors are columns of two shared random dictionaries, so the ranks hold
/// for almost every seed.
JointGmm two_signal_model(std::uint64_t seed);

/// Single zero-mean Gaussian in R^5 x R^4 with ranks (3, 3, 4): two common
/// directions and one innovation per block.
JointGmm gaussian_334_model(std::uint64_t seed);

struct RandomModelSpec {
  int n1 = 8;
  int n2 = 6;
  int k1 = 2;
  int k2 = 2;
  int max_common = 3;      ///< s_c drawn uniformly from [0, max_common]
  int max_innovation1 = 3;
  int max_innovation2 = 3;
  bool nonzero_means = false;
};

/// Random factor model; column counts and entries drawn from the model
/// stream of `seed`. Priors are uniform over all K1 * K2 pairs.
JointGmm random_factor_model(const RandomModelSpec& spec, std::uint64_t seed);

/// Random factors with exactly the given column counts.
FactorModel random_factors(int n1, int n2, int s_c, int s_1, int s_2, rng::Stream& stream);

}  // namespace gmmsi
