#pragma once

#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "weaktrans/kernel.hpp"
#include "weaktrans/model.hpp"
#include "weaktrans/quadrature.hpp"

namespace weaktrans {

enum class FeatureKind { moments, charfn, custom, monomials };

std::string_view to_string(FeatureKind kind);

using TestFunction = std::function<double(double)>;

/// Which weak features make up Phi_lambda(theta).
///
///   moments    E[X^j phi(X)] for strictly increasing orders j
///   charfn     (Re, Im) of E[e^{iuX} phi(X)] per frequency u (two coordinates each)
///   custom     E[g(X) phi(X)] for caller-supplied univariate g
///   monomials  E[X^alpha phi(X)] for multi-indices alpha (|alpha| <= 2 for gaussian_mvn)
struct FeatureSpec {
  FeatureKind kind = FeatureKind::moments;
  std::vector<int> orders;
  std::vector<double> frequencies;
  std::vector<TestFunction> functions;
  std::vector<std::vector<int>> exponents;

  static FeatureSpec moments(std::vector<int> orders);
  static FeatureSpec moments_upto(int max_order);
  static FeatureSpec charfn(std::vector<double> frequencies);
  static FeatureSpec custom(std::vector<TestFunction> functions);
  static FeatureSpec monomials(std::vector<std::vector<int>> exponents);
  /// x_i^2 for every vertex followed by x_a x_b for every edge.
  static FeatureSpec graph_statistics(const Graph& graph);

  /// K + 1, counting real coordinates.
  int size() const;
  void validate() const;
  std::vector<std::string> labels() const;
};

struct FeatureVector {
  Eigen::VectorXd values;
  Eigen::VectorXd theta;
  Eigen::VectorXd lambda;
};

enum class JacobianMethod { analytic_score, finite_difference };

std::string_view to_string(JacobianMethod method);

/// DF = (D_theta F | D_lambda F) for the joint map (theta, lambda) -> Phi_lambda(theta).
struct JacobianDecomposition {
  Eigen::MatrixXd d_theta;   ///< (K+1) x p
  Eigen::MatrixXd d_lambda;  ///< (K+1) x q
  JacobianMethod method = JacobianMethod::analytic_score;

  Eigen::Index features() const { return d_theta.rows(); }
  Eigen::MatrixXd joint() const;
};

/// Central-difference step eps^{1/3} max(1, |x|).
double fd_step(double x);

/// int g(x) f(x; theta) dx over the model's support. Positive-support
/// families are integrated with the log substitution.
double expect(const ModelSpec& model, const Eigen::VectorXd& theta, const Integrand& g,
              const QuadConfig& cfg = {}, std::optional<QuadHint> hint = std::nullopt);

double weak_moment(const ModelSpec& model, const Eigen::VectorXd& theta,
                   const KernelFamily& kernel, int order, const QuadConfig& cfg = {});

FeatureVector feature_map(const ModelSpec& model, const Eigen::VectorXd& theta,
                          const KernelFamily& kernel, const FeatureSpec& spec,
                          const QuadConfig& cfg = {});

std::complex<double> weak_char_fn(const ModelSpec& model, const Eigen::VectorXd& theta,
                                  const KernelFamily& kernel, double u,
                                  const QuadConfig& cfg = {});

/// log E[e^{tX} phi(X)] - log E[phi(X)].
double weak_cgf(const ModelSpec& model, const Eigen::VectorXd& theta,
                const KernelFamily& kernel, double t, const QuadConfig& cfg = {});

/// First four weak cumulants from central differences of weak_cgf at t = 0.
Eigen::Vector4d weak_cumulants(const ModelSpec& model, const Eigen::VectorXd& theta,
                               const KernelFamily& kernel, const QuadConfig& cfg = {},
                               double step = 0.05);

JacobianDecomposition jacobian(const ModelSpec& model, const Eigen::VectorXd& theta,
                               const KernelFamily& kernel, const FeatureSpec& spec,
                               JacobianMethod method, const QuadConfig& cfg = {});

/// Type-erased joint feature map F(theta, lambda); the scans in the
/// transversality and degeneracy modules are written against this.
struct JointFeatureMap {
  int param_dim = 0;
  int kernel_param_dim = 0;
  int feature_dim = 0;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&, const Eigen::VectorXd&)> features;
  std::function<JacobianDecomposition(const Eigen::VectorXd&, const Eigen::VectorXd&)> jacobian;
};

/// lambda = (s); the prototype fixes kernel kind, dimension and normalization.
JointFeatureMap make_joint_map(const ModelSpec& model, const KernelFamily& prototype,
                               const FeatureSpec& spec, JacobianMethod method,
                               const QuadConfig& cfg = {});

/// Wraps an arbitrary feature function; the Jacobian is taken by central
/// differences in both theta and lambda.
JointFeatureMap make_joint_map(
    int param_dim, int kernel_param_dim, int feature_dim,
    std::function<Eigen::VectorXd(const Eigen::VectorXd&, const Eigen::VectorXd&)> features);

/// Central-difference Jacobian of fn at x.
Eigen::MatrixXd finite_difference_jacobian(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& fn, const Eigen::VectorXd& x);

}  // namespace weaktrans
