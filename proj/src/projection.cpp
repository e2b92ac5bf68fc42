#include "gmmsi/projection.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace gmmsi {

namespace {

void check_sigma2(double sigma2) {
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2))
    throw Error(ErrorCode::kInvalidInput, "noise variance must be positive and finite");
}

// Scaling applied to the k leading directions of V: sigma2 / (s^2 + sigma2).
double residual_weight(double s, double sigma2) { return sigma2 / (s * s + sigma2); }

}  // namespace

double log_sum_exp(const Vector& v) {
  if (v.size() == 0) return -std::numeric_limits<double>::infinity();
  const double top = v.maxCoeff();
  if (!std::isfinite(top)) return top;
  return top + std::log((v.array() - top).exp().sum());
}

ProjectedComponent project_component(const JointGmm& model, ClassPair p, const Matrix& phi) {
  const Matrix& f = model.covariance_factor(p);
  const JointComponent& c = model.component(p);
  ProjectedComponent pc;
  pc.pair = p;
  pc.log_prior = std::log(model.prior(p));
  pc.mean = c.mean();
  pc.mean_y = phi * pc.mean;
  const auto m = phi.rows();
  const auto r = f.cols();
  const auto k = std::min(m, r);
  if (k == 0) {
    pc.u = Matrix(m, 0);
    pc.s = Vector(0);
    pc.fv = f;
  } else {
    const Matrix gamma = phi * f;
    Eigen::JacobiSVD<Matrix> svd(gamma, Eigen::ComputeThinU | Eigen::ComputeFullV);
    pc.u = svd.matrixU();
    pc.s = svd.singularValues();
    pc.fv = f * svd.matrixV();
  }
  pc.fv_norm2 = pc.fv.colwise().squaredNorm().transpose();
  pc.fv1_norm2 = pc.fv.topRows(model.n1()).colwise().squaredNorm().transpose();
  return pc;
}

ProjectedModel::ProjectedModel(const JointGmm& model, const SensingPair& phi)
    : model_(&model), m_(phi.m()), n1_(model.n1()) {
  check_conforms(phi, model.n1(), model.n2());
  const Matrix a = assemble(phi);
  comps_.reserve(model.support().size());
  for (const ClassPair& p : model.support()) comps_.push_back(project_component(model, p, a));
}

int ProjectedModel::index_of(ClassPair p) const {
  for (std::size_t i = 0; i < comps_.size(); ++i)
    if (comps_[i].pair == p) return static_cast<int>(i);
  return -1;
}

double component_log_likelihood(const ProjectedComponent& pc, const Vector& y, double sigma2) {
  check_sigma2(sigma2);
  const int m = pc.m();
  if (y.size() != m) throw Error(ErrorCode::kDimensionMismatch, "observation length mismatch");
  if (!y.allFinite()) throw Error(ErrorCode::kInvalidInput, "observation has non-finite entries");
  if (m == 0) return 0.0;
  const Vector r = y - pc.mean_y;
  const Vector c = pc.u.transpose() * r;
  double quad = 0.0;
  double logdet = 0.0;
  for (int j = 0; j < pc.k(); ++j) {
    const double v = pc.s(j) * pc.s(j) + sigma2;
    quad += c(j) * c(j) / v;
    logdet += std::log(v);
  }
  const int rest = m - pc.k();
  if (rest > 0) {
    // Explicit residual rather than ||r||^2 - ||c||^2, which cancels badly
    // when sigma2 is small.
    const Vector perp = r - pc.u * c;
    quad += perp.squaredNorm() / sigma2;
    logdet += rest * std::log(sigma2);
  }
  return -0.5 * (m * std::log(2.0 * std::numbers::pi) + logdet + quad);
}

double ProjectedModel::log_likelihood(std::size_t idx, const Vector& y, double sigma2) const {
  return component_log_likelihood(comps_[idx], y, sigma2);
}

Vector ProjectedModel::log_joint(const Vector& y, double sigma2) const {
  Vector out(static_cast<Eigen::Index>(comps_.size()));
  for (std::size_t i = 0; i < comps_.size(); ++i)
    out(static_cast<Eigen::Index>(i)) = comps_[i].log_prior + log_likelihood(i, y, sigma2);
  return out;
}

Vector ProjectedModel::wiener_x(std::size_t idx, const Vector& y, double sigma2) const {
  check_sigma2(sigma2);
  const ProjectedComponent& pc = comps_[idx];
  Vector out = pc.mean;
  if (pc.k() == 0) return out;
  Vector c = pc.u.transpose() * (y - pc.mean_y);
  for (int j = 0; j < pc.k(); ++j) c(j) *= pc.s(j) / (pc.s(j) * pc.s(j) + sigma2);
  out.noalias() += pc.fv.leftCols(pc.k()) * c;
  return out;
}

Vector ProjectedModel::wiener_x1(std::size_t idx, const Vector& y, double sigma2) const {
  check_sigma2(sigma2);
  const ProjectedComponent& pc = comps_[idx];
  Vector out = pc.mean.head(n1_);
  if (pc.k() == 0) return out;
  Vector c = pc.u.transpose() * (y - pc.mean_y);
  for (int j = 0; j < pc.k(); ++j) c(j) *= pc.s(j) / (pc.s(j) * pc.s(j) + sigma2);
  out.noalias() += pc.fv.topLeftCorner(n1_, pc.k()) * c;
  return out;
}

double ProjectedModel::mmse_x1(std::size_t idx, double sigma2) const {
  check_sigma2(sigma2);
  const ProjectedComponent& pc = comps_[idx];
  double total = 0.0;
  for (Eigen::Index j = 0; j < pc.fv1_norm2.size(); ++j)
    total += pc.fv1_norm2(j) * (j < pc.k() ? residual_weight(pc.s(j), sigma2) : 1.0);
  return total;
}

double ProjectedModel::mmse_x(std::size_t idx, double sigma2) const {
  check_sigma2(sigma2);
  const ProjectedComponent& pc = comps_[idx];
  double total = 0.0;
  for (Eigen::Index j = 0; j < pc.fv_norm2.size(); ++j)
    total += pc.fv_norm2(j) * (j < pc.k() ? residual_weight(pc.s(j), sigma2) : 1.0);
  return total;
}

Matrix ProjectedModel::posterior_cov_x1(std::size_t idx, double sigma2) const {
  check_sigma2(sigma2);
  const ProjectedComponent& pc = comps_[idx];
  const Matrix top = pc.fv.topRows(n1_);
  Vector w = Vector::Ones(top.cols());
  for (int j = 0; j < pc.k(); ++j) w(j) = residual_weight(pc.s(j), sigma2);
  return top * w.asDiagonal() * top.transpose();
}

}  // namespace gmmsi
