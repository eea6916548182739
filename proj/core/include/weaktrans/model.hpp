#pragma once

#include <Eigen/Dense>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace weaktrans {

enum class Family {
  gaussian_location,
  cauchy_location,
  lognormal,
  lognormal_stieltjes,
  gaussian_mvn,
  stein_gaussian_target,
};

std::string_view to_string(Family family);
std::optional<Family> family_from_string(std::string_view name);

/// Where a univariate family lives: the real line or (0, inf).
enum class SupportKind { real_line, positive_half_line, euclidean };

/// Undirected graph on vertices 0..n-1 used by the Gaussian graphical model.
struct Graph {
  int vertices = 0;
  std::vector<std::pair<int, int>> edges;

  static Graph cycle(int n);
  static Graph path(int n);

  bool has_edge(int i, int j) const;
  void validate() const;
};

/// A parametric family T_theta with density, support and score.
///
/// Parameter layouts:
///   gaussian_location      theta = (mu)           sigma0 fixed
///   cauchy_location        theta = (mu)
///   lognormal              theta = (mu, sigma)
///   lognormal_stieltjes    theta = (mu, sigma)    density f_{mu,sigma}(x)(1 + eps h(x; theta))
///   gaussian_mvn           theta = (Omega_00, ..., Omega_{d-1,d-1}, Omega_e for e in edges)
///   stein_gaussian_target  theta = (mu, sigma)
class ModelSpec {
 public:
  static ModelSpec gaussian_location(double sigma0 = 1.0);
  static ModelSpec cauchy_location();
  static ModelSpec lognormal();
  static ModelSpec lognormal_stieltjes(double epsilon = 0.5);
  static ModelSpec gaussian_mvn(Graph graph);
  static ModelSpec stein_gaussian_target();

  Family family() const noexcept { return family_; }
  std::string_view name() const { return to_string(family_); }
  int param_dim() const noexcept;
  /// Dimension of the sample space.
  int dim() const noexcept { return family_ == Family::gaussian_mvn ? graph_.vertices : 1; }
  bool multivariate() const noexcept { return family_ == Family::gaussian_mvn; }
  SupportKind support() const noexcept;
  bool has_analytic_score() const noexcept { return !multivariate(); }
  /// False only for families whose classical moments of order >= 1 do not exist.
  bool classical_moments_exist() const noexcept { return family_ != Family::cauchy_location; }

  double sigma0() const noexcept { return sigma0_; }
  double epsilon() const noexcept { return epsilon_; }
  const Graph& graph() const noexcept { return graph_; }
  std::vector<std::string> parameter_names() const;

  /// Throws DomainError when theta is outside the parameter domain.
  void validate(const Eigen::VectorXd& theta) const;
  bool in_domain(const Eigen::VectorXd& theta) const;

  double density(double x, const Eigen::VectorXd& theta) const;
  double density(std::span<const double> x, const Eigen::VectorXd& theta) const;
  double log_density(double x, const Eigen::VectorXd& theta) const;

  /// d/d theta_a log f(x; theta) for univariate families.
  double score(double x, const Eigen::VectorXd& theta, int a) const;

  /// E[X^j] in closed form; std::nullopt when the moment does not exist.
  std::optional<double> classical_moment(const Eigen::VectorXd& theta, int j) const;

  /// Precision matrix assembled from the free entries (gaussian_mvn).
  Eigen::MatrixXd precision(const Eigen::VectorXd& theta) const;
  Eigen::MatrixXd covariance(const Eigen::VectorXd& theta) const;

 private:
  explicit ModelSpec(Family family) : family_(family) {}
  void require_univariate(std::string_view op) const;
  void check_support(double x) const;
  void check_theta(const Eigen::VectorXd& theta) const;

  Family family_;
  double sigma0_ = 1.0;
  double epsilon_ = 0.0;
  Graph graph_;
};

/// h(x; mu, sigma) = sin(2 pi (ln x - mu) / sigma^2). Orthogonal to every
/// x^j under f_{mu,sigma}; equals sin(2 pi ln x) at (mu, sigma) = (0, 1).
double stieltjes_perturbation(double x, const Eigen::VectorXd& theta);

}  // namespace weaktrans
