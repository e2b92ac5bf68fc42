#include "gmmsi/presets.hpp"

#include <algorithm>
#include <array>

namespace gmmsi {

namespace {

struct AtomComponent {
  std::array<std::array<int, 2>, 4> common;  // (u atom, v atom)
  std::array<int, 3> innov1;                 // u atoms
  std::array<int, 2> innov2;                 // v atoms
};

// Atoms are shared between components so that the ranks of summed
// covariances are set by how many atoms two components have in common.
constexpr std::array<AtomComponent, 4> kTable1Atoms = {{
    {{{{10, 9}, {9, 2}, {4, 5}, {7, 6}}}, {0, 5, 2}, {3, 11}},
    {{{{6, 0}, {9, 2}, {2, 1}, {10, 9}}}, {5, 4, 0}, {11, 5}},
    {{{{10, 13}, {3, 7}, {6, 12}, {2, 1}}}, {9, 8, 4}, {8, 2}},
    {{{{1, 4}, {9, 8}, {10, 13}, {3, 7}}}, {4, 6, 8}, {10, 2}},
}};

int uniform_int(rng::Stream& stream, int lo, int hi) {
  const double u = stream.uniform();
  return lo + std::min(hi - lo, static_cast<int>(u * (hi - lo + 1)));
}

}  // namespace

JointGmm two_signal_model(std::uint64_t seed) {
  constexpr int n1 = 20;
  constexpr int n2 = 12;
  rng::Stream stream(seed, rng::Domain::kModel, 0);
  const Matrix u = stream.normal_matrix(n1, 11);
  const Matrix v = stream.normal_matrix(n2, 14);

  std::vector<std::optional<JointComponent>> comps;
  for (const AtomComponent& a : kTable1Atoms) {
    FactorModel f;
    f.mu1 = Vector::Zero(n1);
    f.mu2 = Vector::Zero(n2);
    f.p_c1.resize(n1, 4);
    f.p_c2.resize(n2, 4);
    for (int c = 0; c < 4; ++c) {
      f.p_c1.col(c) = u.col(a.common[c][0]);
      f.p_c2.col(c) = v.col(a.common[c][1]);
    }
    f.p_1.resize(n1, 3);
    for (int c = 0; c < 3; ++c) f.p_1.col(c) = u.col(a.innov1[c]);
    f.p_2.resize(n2, 2);
    for (int c = 0; c < 2; ++c) f.p_2.col(c) = v.col(a.innov2[c]);
    comps.emplace_back(component_from_factors(f));
  }
  return JointGmm(n1, n2, Matrix::Constant(2, 2, 0.25), std::move(comps));
}

JointGmm gaussian_334_model(std::uint64_t seed) {
  rng::Stream stream(seed, rng::Domain::kModel, 1);
  FactorModel f = random_factors(5, 4, 2, 1, 1, stream);
  std::vector<std::optional<JointComponent>> comps;
  comps.emplace_back(component_from_factors(f));
  return JointGmm(5, 4, Matrix::Ones(1, 1), std::move(comps));
}

FactorModel random_factors(int n1, int n2, int s_c, int s_1, int s_2, rng::Stream& stream) {
  FactorModel f;
  f.p_c1 = stream.normal_matrix(n1, s_c);
  f.p_c2 = stream.normal_matrix(n2, s_c);
  f.p_1 = stream.normal_matrix(n1, s_1);
  f.p_2 = stream.normal_matrix(n2, s_2);
  f.mu1 = Vector::Zero(n1);
  f.mu2 = Vector::Zero(n2);
  return f;
}

JointGmm random_factor_model(const RandomModelSpec& spec, std::uint64_t seed) {
  if (spec.n1 < 1 || spec.n2 < 0 || spec.k1 < 1 || spec.k2 < 1 || spec.max_common < 0 ||
      spec.max_innovation1 < 0 || spec.max_innovation2 < 0)
    throw Error(ErrorCode::kInvalidInput, "random model specification out of range");
  std::vector<std::optional<JointComponent>> comps;
  for (int c = 0; c < spec.k1 * spec.k2; ++c) {
    rng::Stream stream(seed, rng::Domain::kModel, 100 + static_cast<std::uint64_t>(c));
    const int s_c = uniform_int(stream, 0, spec.max_common);
    const int s_1 = uniform_int(stream, 0, spec.max_innovation1);
    const int s_2 = uniform_int(stream, 0, spec.max_innovation2);
    FactorModel f = random_factors(spec.n1, spec.n2, s_c, s_1, s_2, stream);
    if (spec.nonzero_means) {
      f.mu1 = stream.normal_vector(spec.n1);
      f.mu2 = stream.normal_vector(spec.n2);
    }
    comps.emplace_back(component_from_factors(f));
  }
  const double w = 1.0 / (spec.k1 * spec.k2);
  return JointGmm(spec.n1, spec.n2, Matrix::Constant(spec.k1, spec.k2, w), std::move(comps));
}

}  // namespace gmmsi
