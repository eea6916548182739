#pragma once

#include <Eigen/Dense>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "weaktrans/featuremap.hpp"
#include "weaktrans/transversality.hpp"

namespace weaktrans {

/// A dictionary entry f with its derivative.
struct SteinFunction {
  std::string label;
  std::function<double(double)> f;
  std::function<double(double)> df;
};

/// Gaussian target N(mu, sigma^2) with operator A g = g' - ((x - mu)/sigma^2) g,
/// applied to g = f_k phi.
struct SteinSpec {
  std::vector<SteinFunction> dictionary;
  KernelFamily kernel{1.0};

  /// He_k((x - center)/scale) for k = 1..degree.
  static SteinSpec hermite(int degree, const KernelFamily& kernel, double center = 0.0,
                           double scale = 1.0);
  /// x^k for k = 1..degree.
  static SteinSpec monomials(int degree, const KernelFamily& kernel);

  int size() const { return static_cast<int>(dictionary.size()); }
  void validate() const;
};

/// Probabilists' Hermite polynomial He_n and its derivative n He_{n-1}.
double hermite_he(int n, double x);

/// E_candidate[A_target(f_k phi)(X)].
double stein_feature(const ModelSpec& candidate, const Eigen::VectorXd& theta_c,
                     const SteinSpec& spec, const Eigen::VectorXd& target, int k,
                     const QuadConfig& cfg = {});

Eigen::VectorXd stein_features(const ModelSpec& candidate, const Eigen::VectorXd& theta_c,
                               const SteinSpec& spec, const Eigen::VectorXd& target,
                               const QuadConfig& cfg = {});

/// max_k |stein_feature(k)|.
double weak_stein_discrepancy(const ModelSpec& candidate, const Eigen::VectorXd& theta_c,
                              const SteinSpec& spec, const Eigen::VectorXd& target,
                              const QuadConfig& cfg = {});

struct SteinJacobianPoint {
  Eigen::VectorXd theta;
  Eigen::VectorXd psi;       ///< Psi at the zero-set point (should vanish)
  Eigen::MatrixXd jacobian;  ///< K x (p + q): candidate parameters then kernel scale
  RankReport report;
  bool surjective = false;   ///< numerical rank == K
};

/// Jacobian of Psi(theta_c, lambda) = E_{theta_c}[A_theta(f_k phi_lambda)] at
/// theta_c = theta for each zero-set point theta. The theta_c block is a
/// central difference; the lambda block is the integral of A_theta(f_k d_s phi).
std::vector<SteinJacobianPoint> stein_jacobian_check(const SteinSpec& spec,
                                                     std::span<const Eigen::VectorXd> zero_set,
                                                     double rank_rtol = 1e-10,
                                                     const QuadConfig& cfg = {});

}  // namespace weaktrans
