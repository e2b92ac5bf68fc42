#pragma once

// Adaptive quadrature of Gaussian overlap integrals in one and two
// dimensions, used as an independent check of closed-form exponents.

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <functional>
#include <limits>

namespace oracle {

/// Density of N(mean, cov) in dimension 1 or 2.
inline double gaussian_pdf(const Eigen::VectorXd& y, const Eigen::VectorXd& mean,
                           const Eigen::MatrixXd& cov) {
  const Eigen::VectorXd r = y - mean;
  const double det = cov.determinant();
  const double q = r.dot(cov.inverse() * r);
  return std::exp(-0.5 * q) / std::sqrt(std::pow(2.0 * M_PI, static_cast<double>(y.size())) * det);
}

/// N(mean, cov) with inverse and normalizer computed once.
struct GaussianDensity {
  Eigen::VectorXd mean;
  Eigen::MatrixXd inv;
  double norm = 0.0;

  GaussianDensity(const Eigen::VectorXd& m, const Eigen::MatrixXd& cov)
      : mean(m),
        inv(cov.inverse()),
        norm(1.0 / std::sqrt(std::pow(2.0 * M_PI, static_cast<double>(m.size())) * cov.determinant())) {}

  double operator()(const Eigen::VectorXd& y) const {
    const Eigen::VectorXd r = y - mean;
    return norm * std::exp(-0.5 * r.dot(inv * r));
  }
};

inline double integrate_line(const std::function<double(double)>& f, double tol = 1e-12) {
  using boost::math::quadrature::gauss_kronrod;
  const double inf = std::numeric_limits<double>::infinity();
  return gauss_kronrod<double, 61>::integrate(f, -inf, inf, 15, tol);
}

/// Integral over R^d (d = 1, 2) of g(y).
inline double integrate(int dim, const std::function<double(const Eigen::VectorXd&)>& g) {
  if (dim == 1) {
    return integrate_line([&](double t) {
      Eigen::VectorXd y(1);
      y << t;
      return g(y);
    });
  }
  return integrate_line(
      [&](double a) {
        return integrate_line(
            [&](double b) {
              Eigen::VectorXd y(2);
              y << a, b;
              return g(y);
            },
            1e-11);
      },
      1e-10);
}

/// Integral of sqrt(p_a p_b) for two Gaussians in R^1 or R^2. Inverses and
/// normalizers are hoisted out of the integrand.
inline double bhattacharyya_integral(const Eigen::VectorXd& ma, const Eigen::MatrixXd& ca,
                                     const Eigen::VectorXd& mb, const Eigen::MatrixXd& cb) {
  const int dim = static_cast<int>(ma.size());
  const Eigen::MatrixXd ia = ca.inverse(), ib = cb.inverse();
  const double norm = std::pow(2.0 * M_PI, -0.5 * dim) / std::pow(ca.determinant() * cb.determinant(), 0.25);
  if (dim == 1) {
    const double a = ia(0, 0), b = ib(0, 0);
    return integrate_line([&](double t) {
      const double ra = t - ma(0), rb = t - mb(0);
      return norm * std::exp(-0.25 * (a * ra * ra + b * rb * rb));
    });
  }
  auto quad = [](const Eigen::MatrixXd& inv, double u, double v) {
    return inv(0, 0) * u * u + 2.0 * inv(0, 1) * u * v + inv(1, 1) * v * v;
  };
  return integrate_line(
      [&](double s) {
        return integrate_line(
            [&](double t) {
              return norm * std::exp(-0.25 * (quad(ia, s - ma(0), t - ma(1)) + quad(ib, s - mb(0), t - mb(1))));
            },
            1e-11);
      },
      1e-10);
}

}  // namespace oracle
