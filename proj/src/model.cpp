#include "gmmsi/model.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace gmmsi {

namespace {

[[noreturn]] void reject(ErrorCode code, const std::string& msg) {
  throw Error(code, msg);
}

std::string pair_name(ClassPair p) {
  return "(" + std::to_string(p.i + 1) + "," + std::to_string(p.k + 1) + ")";
}

constexpr double kPriorTol = 1e-12;
constexpr double kPriorRenormTol = 1e-9;
constexpr double kPsdTol = 1e-10;

}  // namespace

const char* error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kInvalidInput: return "E_INVALID_INPUT";
    case ErrorCode::kDimensionMismatch: return "E_DIMENSION";
    case ErrorCode::kModelValidation: return "E_MODEL";
    case ErrorCode::kConfig: return "E_CONFIG";
    case ErrorCode::kIo: return "E_IO";
    case ErrorCode::kUnsupported: return "E_UNSUPPORTED";
    case ErrorCode::kUndefined: return "E_UNDEFINED";
  }
  return "E_UNKNOWN";
}

Matrix FactorModel::stacked() const {
  const auto n1 = p_c1.rows();
  const auto n2 = p_c2.rows();
  const auto sc = p_c1.cols();
  const auto s1 = p_1.cols();
  const auto s2 = p_2.cols();
  Matrix p = Matrix::Zero(n1 + n2, sc + s1 + s2);
  p.block(0, 0, n1, sc) = p_c1;
  p.block(n1, 0, n2, sc) = p_c2;
  p.block(0, sc, n1, s1) = p_1;
  p.block(n1, sc + s1, n2, s2) = p_2;
  return p;
}

Vector JointComponent::mean() const {
  Vector m(n1() + n2());
  m << mu1, mu2;
  return m;
}

Matrix JointComponent::covariance() const {
  const auto a = n1();
  const auto b = n2();
  Matrix s(a + b, a + b);
  s.topLeftCorner(a, a) = sigma1;
  s.topRightCorner(a, b) = sigma12;
  s.bottomLeftCorner(b, a) = sigma12.transpose();
  s.bottomRightCorner(b, b) = sigma2;
  return s;
}

JointComponent component_from_factors(const FactorModel& f) {
  const auto n1 = f.mu1.size();
  const auto n2 = f.mu2.size();
  if (f.p_c1.rows() != n1 || f.p_1.rows() != n1)
    reject(ErrorCode::kDimensionMismatch, "x1 factors must have n1 rows");
  if (f.p_c2.rows() != n2 || f.p_2.rows() != n2)
    reject(ErrorCode::kDimensionMismatch, "x2 factors must have n2 rows");
  if (f.p_c1.cols() != f.p_c2.cols())
    reject(ErrorCode::kDimensionMismatch,
           "common factors P_c1 and P_c2 must have equal column counts");
  JointComponent c;
  c.mu1 = f.mu1;
  c.mu2 = f.mu2;
  c.sigma1 = f.p_c1 * f.p_c1.transpose() + f.p_1 * f.p_1.transpose();
  c.sigma2 = f.p_c2 * f.p_c2.transpose() + f.p_2 * f.p_2.transpose();
  c.sigma12 = f.p_c1 * f.p_c2.transpose();
  c.factors = f;
  return c;
}

JointComponent component_from_blocks(Vector mu1, Vector mu2, Matrix sigma1,
                                     Matrix sigma2, Matrix sigma12) {
  const auto n1 = mu1.size();
  const auto n2 = mu2.size();
  if (sigma1.rows() != n1 || sigma1.cols() != n1 || sigma2.rows() != n2 ||
      sigma2.cols() != n2 || sigma12.rows() != n1 || sigma12.cols() != n2)
    reject(ErrorCode::kDimensionMismatch,
           "covariance blocks do not conform to the mean dimensions");
  JointComponent c;
  c.mu1 = std::move(mu1);
  c.mu2 = std::move(mu2);
  c.sigma1 = std::move(sigma1);
  c.sigma2 = std::move(sigma2);
  c.sigma12 = std::move(sigma12);
  return c;
}

Matrix psd_factor(const Matrix& a, double tol_factor) {
  const auto n = a.rows();
  if (n == 0) return Matrix(0, 0);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(a);
  const Vector& lambda = eig.eigenvalues();
  const double lambda_max = std::max(0.0, lambda.maxCoeff());
  const double tau = tol_factor * lambda_max * static_cast<double>(n) *
                     std::numeric_limits<double>::epsilon();
  int kept = 0;
  for (Eigen::Index j = 0; j < n; ++j)
    if (lambda(j) > tau && lambda(j) > 0.0) ++kept;
  Matrix f(n, kept);
  int col = 0;
  // Eigenvalues are ascending; emit the largest first.
  for (Eigen::Index j = n - 1; j >= 0; --j) {
    if (lambda(j) > tau && lambda(j) > 0.0) {
      f.col(col++) = eig.eigenvectors().col(j) * std::sqrt(lambda(j));
    }
  }
  return f;
}

JointGmm::JointGmm(int n1, int n2, Matrix prior,
                   std::vector<std::optional<JointComponent>> components)
    : n1_(n1), n2_(n2), k1_(static_cast<int>(prior.rows())),
      k2_(static_cast<int>(prior.cols())), prior_(std::move(prior)),
      components_(std::move(components)) {
  if (n1_ < 1 || n2_ < 0)
    reject(ErrorCode::kModelValidation, "dimensions must satisfy n1 >= 1, n2 >= 0");
  if (k1_ < 1 || k2_ < 1)
    reject(ErrorCode::kModelValidation, "prior must be at least 1x1");
  if (static_cast<int>(components_.size()) != k1_ * k2_)
    reject(ErrorCode::kModelValidation, "component table must have k1*k2 slots");

  if (!prior_.allFinite() || (prior_.array() < 0.0).any())
    reject(ErrorCode::kModelValidation, "prior entries must be finite and nonnegative");
  const double total = prior_.sum();
  if (std::abs(total - 1.0) > kPriorRenormTol)
    reject(ErrorCode::kModelValidation,
           "prior sums to " + std::to_string(total) + ", expected 1");
  if (std::abs(total - 1.0) > kPriorTol) prior_ /= total;

  factors_.resize(components_.size());
  for (int i = 0; i < k1_; ++i) {
    for (int k = 0; k < k2_; ++k) {
      const ClassPair p{i, k};
      auto& slot = components_[flat_index(p)];
      if (!slot) {
        if (prior_(i, k) > 0.0)
          reject(ErrorCode::kModelValidation,
                 "class pair " + pair_name(p) + " has positive prior but no component");
        continue;
      }
      const JointComponent& c = *slot;
      if (c.n1() != n1_ || c.n2() != n2_ || c.sigma1.rows() != n1_ ||
          c.sigma1.cols() != n1_ || c.sigma2.rows() != n2_ ||
          c.sigma2.cols() != n2_ || c.sigma12.rows() != n1_ ||
          c.sigma12.cols() != n2_)
        reject(ErrorCode::kModelValidation,
               "component " + pair_name(p) + " does not match (n1, n2)");
      const Matrix cov = c.covariance();
      if (!cov.allFinite() || !c.mean().allFinite())
        reject(ErrorCode::kModelValidation,
               "component " + pair_name(p) + " has non-finite entries");
      const double scale = std::max(1.0, cov.cwiseAbs().maxCoeff());
      if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale)
        reject(ErrorCode::kModelValidation,
               "component " + pair_name(p) + " covariance is not symmetric");
      const Matrix sym = 0.5 * (cov + cov.transpose());
      Eigen::SelfAdjointEigenSolver<Matrix> eig(sym, Eigen::EigenvaluesOnly);
      const double lmax = eig.eigenvalues().maxCoeff();
      const double lmin = eig.eigenvalues().minCoeff();
      if (lmin < -kPsdTol * std::max(lmax, 0.0) && lmin < -1e-300)
        reject(ErrorCode::kModelValidation,
               "component " + pair_name(p) + " covariance is not positive semidefinite");
      factors_[flat_index(p)] = psd_factor(sym);
      if (prior_(i, k) > 0.0) support_.push_back(p);
    }
  }
}

bool JointGmm::has_component(ClassPair p) const {
  return p.i >= 0 && p.i < k1_ && p.k >= 0 && p.k < k2_ &&
         components_[flat_index(p)].has_value();
}

const JointComponent& JointGmm::component(ClassPair p) const {
  if (!has_component(p))
    reject(ErrorCode::kInvalidInput, "no component for class pair " + pair_name(p));
  return *components_[flat_index(p)];
}

const Matrix& JointGmm::covariance_factor(ClassPair p) const {
  if (!has_component(p))
    reject(ErrorCode::kInvalidInput, "no component for class pair " + pair_name(p));
  return factors_[flat_index(p)];
}

bool JointGmm::zero_mean(double tol) const {
  for (const auto& c : components_) {
    if (!c) continue;
    if (c->mu1.size() > 0 && c->mu1.cwiseAbs().maxCoeff() > tol) return false;
    if (c->mu2.size() > 0 && c->mu2.cwiseAbs().maxCoeff() > tol) return false;
  }
  return true;
}

IndexSets index_sets(const JointGmm& model) {
  IndexSets sets;
  sets.s = model.support();
  for (const ClassPair& a : sets.s) {
    for (const ClassPair& b : sets.s) {
      if (a == b) continue;
      sets.s_dc.push_back({a, b});
      if (a.i != b.i) sets.s_sic.push_back({a, b});
    }
  }
  return sets;
}

Vector sample_component(const JointGmm& model, ClassPair p, rng::Stream& stream) {
  const Matrix& f = model.covariance_factor(p);
  const Vector g = stream.normal_vector(f.cols());
  Vector x = model.component(p).mean();
  if (f.cols() > 0) x.noalias() += f * g;
  return x;
}

LabeledSampleSet sample_joint(const JointGmm& model, std::size_t count,
                              std::uint64_t seed) {
  LabeledSampleSet out;
  out.seed = seed;
  out.x1.resize(model.n1(), static_cast<Eigen::Index>(count));
  out.x2.resize(model.n2(), static_cast<Eigen::Index>(count));
  out.labels.reserve(count);
  const auto& support = model.support();
  for (std::size_t t = 0; t < count; ++t) {
    rng::Stream stream(seed, rng::Domain::kSample, t);
    const double u = stream.uniform();
    ClassPair label = support.back();
    double acc = 0.0;
    for (const ClassPair& p : support) {
      acc += model.prior(p);
      if (u < acc) {
        label = p;
        break;
      }
    }
    const Vector x = sample_component(model, label, stream);
    const auto col = static_cast<Eigen::Index>(t);
    out.x1.col(col) = x.head(model.n1());
    out.x2.col(col) = x.tail(model.n2());
    out.labels.push_back(label);
  }
  return out;
}

}  // namespace gmmsi
