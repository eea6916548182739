#include "weaktrans/stein.hpp"

#include <cmath>

#include "parallel.hpp"
#include "weaktrans/errors.hpp"

namespace weaktrans {

namespace {

void check_target(const Eigen::VectorXd& target) {
  ModelSpec::stein_gaussian_target().validate(target);
}

// A(f w)(x) for the Gaussian target, given w and w' at x.
double apply_operator(const SteinFunction& fn, const Eigen::VectorXd& target, double x, double w,
                      double dw) {
  const double mu = target[0];
  const double var = target[1] * target[1];
  const double f = fn.f(x);
  return fn.df(x) * w + f * dw - (x - mu) / var * f * w;
}

double stein_integral(const ModelSpec& candidate, const Eigen::VectorXd& theta_c,
                      const SteinFunction& fn, const KernelFamily& kernel,
                      const Eigen::VectorXd& target, bool kernel_derivative,
                      const QuadConfig& cfg) {
  if (candidate.multivariate()) throw DomainError("stein: candidate must be univariate");
  return expect(
      candidate, theta_c,
      [&](double x) {
        const double w = kernel_derivative ? kernel.dlambda(x) : kernel.eval(x);
        const double dw = kernel_derivative ? kernel.dx_dlambda(x) : kernel.dx(x);
        if (w == 0.0 && dw == 0.0) return 0.0;
        return apply_operator(fn, target, x, w, dw);
      },
      cfg);
}

}  // namespace

double hermite_he(int n, double x) {
  if (n < 0) throw DomainError("hermite_he: degree must be nonnegative");
  double prev = 1.0;
  if (n == 0) return prev;
  double cur = x;
  for (int k = 1; k < n; ++k) {
    const double next = x * cur - k * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

SteinSpec SteinSpec::hermite(int degree, const KernelFamily& kernel, double center,
                             double scale) {
  if (degree < 1) throw DomainError("SteinSpec: degree must be >= 1");
  if (!(scale > 0.0) || !std::isfinite(center)) {
    throw DomainError("SteinSpec: hermite scale must be positive");
  }
  SteinSpec spec;
  spec.kernel = kernel;
  for (int k = 1; k <= degree; ++k) {
    spec.dictionary.push_back(
        {"He" + std::to_string(k),
         [k, center, scale](double x) { return hermite_he(k, (x - center) / scale); },
         [k, center, scale](double x) {
           return k * hermite_he(k - 1, (x - center) / scale) / scale;
         }});
  }
  return spec;
}

SteinSpec SteinSpec::monomials(int degree, const KernelFamily& kernel) {
  if (degree < 1) throw DomainError("SteinSpec: degree must be >= 1");
  SteinSpec spec;
  spec.kernel = kernel;
  for (int k = 1; k <= degree; ++k) {
    spec.dictionary.push_back({"x^" + std::to_string(k),
                               [k](double x) { return std::pow(x, k); },
                               [k](double x) { return k * std::pow(x, k - 1); }});
  }
  return spec;
}

void SteinSpec::validate() const {
  if (dictionary.empty()) throw DomainError("SteinSpec: dictionary must be non-empty");
  if (kernel.dim() != 1) throw DomainError("SteinSpec: kernel must be one-dimensional");
  for (const auto& fn : dictionary) {
    if (!fn.f || !fn.df) throw DomainError("SteinSpec: dictionary entry '" + fn.label + "' is empty");
  }
}

double stein_feature(const ModelSpec& candidate, const Eigen::VectorXd& theta_c,
                     const SteinSpec& spec, const Eigen::VectorXd& target, int k,
                     const QuadConfig& cfg) {
  spec.validate();
  check_target(target);
  if (k < 0 || k >= spec.size()) throw DomainError("stein_feature: index out of range");
  return stein_integral(candidate, theta_c, spec.dictionary[static_cast<std::size_t>(k)],
                        spec.kernel, target, false, cfg);
}

Eigen::VectorXd stein_features(const ModelSpec& candidate, const Eigen::VectorXd& theta_c,
                               const SteinSpec& spec, const Eigen::VectorXd& target,
                               const QuadConfig& cfg) {
  spec.validate();
  check_target(target);
  candidate.validate(theta_c);
  Eigen::VectorXd out(spec.size());
  detail::parallel_for(static_cast<std::size_t>(spec.size()), [&](std::size_t k) {
    out[static_cast<Eigen::Index>(k)] =
        stein_integral(candidate, theta_c, spec.dictionary[k], spec.kernel, target, false, cfg);
  });
  return out;
}

double weak_stein_discrepancy(const ModelSpec& candidate, const Eigen::VectorXd& theta_c,
                              const SteinSpec& spec, const Eigen::VectorXd& target,
                              const QuadConfig& cfg) {
  return stein_features(candidate, theta_c, spec, target, cfg).cwiseAbs().maxCoeff();
}

std::vector<SteinJacobianPoint> stein_jacobian_check(const SteinSpec& spec,
                                                     std::span<const Eigen::VectorXd> zero_set,
                                                     double rank_rtol, const QuadConfig& cfg) {
  spec.validate();
  if (zero_set.empty()) throw DomainError("stein_jacobian_check: no zero-set points");
  const ModelSpec family = ModelSpec::stein_gaussian_target();
  const Eigen::Index K = spec.size();
  std::vector<SteinJacobianPoint> out(zero_set.size());
  for (std::size_t i = 0; i < zero_set.size(); ++i) {
    const Eigen::VectorXd& theta = zero_set[i];
    check_target(theta);
    SteinJacobianPoint& pt = out[i];
    pt.theta = theta;
    pt.psi = stein_features(family, theta, spec, theta, cfg);
    const Eigen::MatrixXd d_theta = finite_difference_jacobian(
        [&](const Eigen::VectorXd& tc) { return stein_features(family, tc, spec, theta, cfg); },
        theta);
    Eigen::VectorXd d_lambda(K);
    detail::parallel_for(static_cast<std::size_t>(K), [&](std::size_t k) {
      d_lambda[static_cast<Eigen::Index>(k)] =
          stein_integral(family, theta, spec.dictionary[k], spec.kernel, theta, true, cfg);
    });
    pt.jacobian.resize(K, d_theta.cols() + 1);
    pt.jacobian << d_theta, d_lambda;
    pt.report = numerical_rank(pt.jacobian, rank_rtol);
    pt.surjective = pt.report.numerical_rank == K;
  }
  return out;
}

}  // namespace weaktrans
