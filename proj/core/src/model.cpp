#include "weaktrans/model.hpp"

#include <cmath>
#include <numbers>

#include "weaktrans/errors.hpp"

namespace weaktrans {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
const double kInvSqrtTwoPi = 1.0 / std::sqrt(kTwoPi);

struct FamilyName {
  Family family;
  std::string_view name;
};

constexpr FamilyName kFamilyNames[] = {
    {Family::gaussian_location, "gaussian_location"},
    {Family::cauchy_location, "cauchy_location"},
    {Family::lognormal, "lognormal"},
    {Family::lognormal_stieltjes, "lognormal_stieltjes"},
    {Family::gaussian_mvn, "gaussian_mvn"},
    {Family::stein_gaussian_target, "stein_gaussian_target"},
};

// E[X^j] for N(mu, sigma^2) via m_j = mu m_{j-1} + (j-1) sigma^2 m_{j-2}.
double normal_moment(double mu, double sigma, int j) {
  double prev = 1.0;
  if (j == 0) return prev;
  double cur = mu;
  for (int k = 2; k <= j; ++k) {
    const double next = mu * cur + (k - 1) * sigma * sigma * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

}  // namespace

std::string_view to_string(Family family) {
  for (const auto& entry : kFamilyNames) {
    if (entry.family == family) return entry.name;
  }
  return "unknown";
}

std::optional<Family> family_from_string(std::string_view name) {
  for (const auto& entry : kFamilyNames) {
    if (entry.name == name) return entry.family;
  }
  return std::nullopt;
}

Graph Graph::cycle(int n) {
  Graph g{n, {}};
  for (int i = 0; i < n; ++i) g.edges.emplace_back(i, (i + 1) % n);
  return g;
}

Graph Graph::path(int n) {
  Graph g{n, {}};
  for (int i = 0; i + 1 < n; ++i) g.edges.emplace_back(i, i + 1);
  return g;
}

bool Graph::has_edge(int i, int j) const {
  for (const auto& [a, b] : edges) {
    if ((a == i && b == j) || (a == j && b == i)) return true;
  }
  return false;
}

void Graph::validate() const {
  if (vertices < 1) throw DomainError("graph needs at least one vertex");
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const auto [a, b] = edges[e];
    if (a < 0 || b < 0 || a >= vertices || b >= vertices) {
      throw DomainError("graph edge references a vertex out of range");
    }
    if (a == b) throw DomainError("graph edges must join distinct vertices");
    for (std::size_t f = 0; f < e; ++f) {
      const auto [c, d] = edges[f];
      if ((a == c && b == d) || (a == d && b == c)) {
        throw DomainError("graph has a duplicated edge");
      }
    }
  }
}

ModelSpec ModelSpec::gaussian_location(double sigma0) {
  if (!(sigma0 > 0.0)) throw DomainError("gaussian_location: sigma0 must be positive");
  ModelSpec m(Family::gaussian_location);
  m.sigma0_ = sigma0;
  return m;
}

ModelSpec ModelSpec::cauchy_location() { return ModelSpec(Family::cauchy_location); }

ModelSpec ModelSpec::lognormal() { return ModelSpec(Family::lognormal); }

ModelSpec ModelSpec::lognormal_stieltjes(double epsilon) {
  if (!(std::abs(epsilon) <= 1.0)) {
    throw DomainError("lognormal_stieltjes: |epsilon| <= 1 is required for a nonnegative density");
  }
  ModelSpec m(Family::lognormal_stieltjes);
  m.epsilon_ = epsilon;
  return m;
}

ModelSpec ModelSpec::gaussian_mvn(Graph graph) {
  graph.validate();
  ModelSpec m(Family::gaussian_mvn);
  m.graph_ = std::move(graph);
  return m;
}

ModelSpec ModelSpec::stein_gaussian_target() { return ModelSpec(Family::stein_gaussian_target); }

int ModelSpec::param_dim() const noexcept {
  switch (family_) {
    case Family::gaussian_location:
    case Family::cauchy_location:
      return 1;
    case Family::lognormal:
    case Family::lognormal_stieltjes:
    case Family::stein_gaussian_target:
      return 2;
    case Family::gaussian_mvn:
      return graph_.vertices + static_cast<int>(graph_.edges.size());
  }
  return 0;
}

SupportKind ModelSpec::support() const noexcept {
  switch (family_) {
    case Family::lognormal:
    case Family::lognormal_stieltjes:
      return SupportKind::positive_half_line;
    case Family::gaussian_mvn:
      return SupportKind::euclidean;
    default:
      return SupportKind::real_line;
  }
}

std::vector<std::string> ModelSpec::parameter_names() const {
  switch (family_) {
    case Family::gaussian_location:
    case Family::cauchy_location:
      return {"mu"};
    case Family::lognormal:
    case Family::lognormal_stieltjes:
    case Family::stein_gaussian_target:
      return {"mu", "sigma"};
    case Family::gaussian_mvn: {
      std::vector<std::string> names;
      for (int i = 0; i < graph_.vertices; ++i) {
        names.push_back("omega_" + std::to_string(i) + std::to_string(i));
      }
      for (const auto& [a, b] : graph_.edges) {
        names.push_back("omega_" + std::to_string(a) + std::to_string(b));
      }
      return names;
    }
  }
  return {};
}

bool ModelSpec::in_domain(const Eigen::VectorXd& theta) const {
  try {
    validate(theta);
    return true;
  } catch (const DomainError&) {
    return false;
  }
}

void ModelSpec::validate(const Eigen::VectorXd& theta) const {
  if (theta.size() != param_dim()) {
    throw DomainError(std::string(name()) + ": expected " + std::to_string(param_dim()) +
                      " parameters, got " + std::to_string(theta.size()));
  }
  if (!theta.allFinite()) throw DomainError(std::string(name()) + ": non-finite parameter");
  switch (family_) {
    case Family::lognormal:
    case Family::lognormal_stieltjes:
    case Family::stein_gaussian_target:
      if (!(theta[1] > 0.0)) {
        throw DomainError(std::string(name()) + ": sigma must be positive");
      }
      break;
    case Family::gaussian_mvn: {
      Eigen::LLT<Eigen::MatrixXd> llt(precision(theta));
      if (llt.info() != Eigen::Success) {
        throw DomainError("gaussian_mvn: precision matrix is not positive definite");
      }
      break;
    }
    default:
      break;
  }
}

void ModelSpec::require_univariate(std::string_view op) const {
  if (multivariate()) {
    throw DomainError(std::string(op) + " needs a point in R^d for " + std::string(name()));
  }
}

void ModelSpec::check_theta(const Eigen::VectorXd& theta) const {
  if (theta.size() != param_dim()) {
    throw DomainError(std::string(name()) + ": wrong number of parameters");
  }
  if (param_dim() == 2 && !(theta[1] > 0.0)) {
    throw DomainError(std::string(name()) + ": sigma must be positive");
  }
}

void ModelSpec::check_support(double x) const {
  if (support() == SupportKind::positive_half_line && !(x > 0.0)) {
    throw DomainError(std::string(name()) + ": x must be positive");
  }
}

double ModelSpec::log_density(double x, const Eigen::VectorXd& theta) const {
  require_univariate("log_density");
  check_support(x);
  check_theta(theta);
  switch (family_) {
    case Family::gaussian_location: {
      const double z = (x - theta[0]) / sigma0_;
      return -0.5 * z * z - std::log(sigma0_) - 0.5 * std::log(kTwoPi);
    }
    case Family::stein_gaussian_target: {
      const double z = (x - theta[0]) / theta[1];
      return -0.5 * z * z - std::log(theta[1]) - 0.5 * std::log(kTwoPi);
    }
    case Family::cauchy_location: {
      const double d = x - theta[0];
      return -std::log(std::numbers::pi) - std::log1p(d * d);
    }
    case Family::lognormal:
    case Family::lognormal_stieltjes: {
      const double lx = std::log(x);
      const double z = (lx - theta[0]) / theta[1];
      double value = -0.5 * z * z - lx - std::log(theta[1]) - 0.5 * std::log(kTwoPi);
      if (family_ == Family::lognormal_stieltjes) {
        value += std::log1p(epsilon_ * stieltjes_perturbation(x, theta));
      }
      return value;
    }
    case Family::gaussian_mvn:
      break;
  }
  throw DomainError("log_density: unsupported family");
}

double ModelSpec::density(double x, const Eigen::VectorXd& theta) const {
  require_univariate("density");
  check_support(x);
  check_theta(theta);
  switch (family_) {
    case Family::gaussian_location: {
      const double z = (x - theta[0]) / sigma0_;
      return kInvSqrtTwoPi / sigma0_ * std::exp(-0.5 * z * z);
    }
    case Family::stein_gaussian_target: {
      const double z = (x - theta[0]) / theta[1];
      return kInvSqrtTwoPi / theta[1] * std::exp(-0.5 * z * z);
    }
    case Family::cauchy_location: {
      const double d = x - theta[0];
      return 1.0 / (std::numbers::pi * (1.0 + d * d));
    }
    case Family::lognormal:
    case Family::lognormal_stieltjes: {
      const double lx = std::log(x);
      const double z = (lx - theta[0]) / theta[1];
      double value = kInvSqrtTwoPi / (x * theta[1]) * std::exp(-0.5 * z * z);
      if (family_ == Family::lognormal_stieltjes) {
        value *= 1.0 + epsilon_ * stieltjes_perturbation(x, theta);
      }
      return value;
    }
    case Family::gaussian_mvn:
      break;
  }
  throw DomainError("density: unsupported family");
}

double ModelSpec::density(std::span<const double> x, const Eigen::VectorXd& theta) const {
  if (!multivariate()) {
    if (x.size() != 1) throw DomainError("density: univariate family needs a scalar point");
    return density(x[0], theta);
  }
  if (static_cast<int>(x.size()) != dim()) {
    throw DomainError("density: point dimension does not match the graph");
  }
  const Eigen::MatrixXd omega = precision(theta);
  Eigen::LLT<Eigen::MatrixXd> llt(omega);
  if (llt.info() != Eigen::Success) {
    throw DomainError("gaussian_mvn: precision matrix is not positive definite");
  }
  const Eigen::Map<const Eigen::VectorXd> xv(x.data(), static_cast<Eigen::Index>(x.size()));
  const double quad = xv.dot(omega * xv);
  const double log_det = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  return std::exp(0.5 * log_det - 0.5 * quad - 0.5 * dim() * std::log(kTwoPi));
}

double ModelSpec::score(double x, const Eigen::VectorXd& theta, int a) const {
  if (!has_analytic_score()) {
    throw DomainError(std::string(name()) + " has no analytic score; use finite differences");
  }
  if (a < 0 || a >= param_dim()) {
    throw DomainError("score: parameter index " + std::to_string(a) + " out of range");
  }
  check_support(x);
  check_theta(theta);
  switch (family_) {
    case Family::gaussian_location:
      return (x - theta[0]) / (sigma0_ * sigma0_);
    case Family::cauchy_location: {
      const double d = x - theta[0];
      return 2.0 * d / (1.0 + d * d);
    }
    case Family::stein_gaussian_target: {
      const double d = x - theta[0];
      const double s = theta[1];
      return a == 0 ? d / (s * s) : d * d / (s * s * s) - 1.0 / s;
    }
    case Family::lognormal:
    case Family::lognormal_stieltjes: {
      const double d = std::log(x) - theta[0];
      const double s = theta[1];
      double value = a == 0 ? d / (s * s) : d * d / (s * s * s) - 1.0 / s;
      if (family_ == Family::lognormal_stieltjes) {
        // d/d theta of log(1 + eps sin(2 pi u)), u = d / s^2.
        const double u = d / (s * s);
        const double du = a == 0 ? -1.0 / (s * s) : -2.0 * d / (s * s * s);
        value += epsilon_ * kTwoPi * std::cos(kTwoPi * u) * du /
                 (1.0 + epsilon_ * std::sin(kTwoPi * u));
      }
      return value;
    }
    case Family::gaussian_mvn:
      break;
  }
  throw DomainError("score: unsupported family");
}

std::optional<double> ModelSpec::classical_moment(const Eigen::VectorXd& theta, int j) const {
  if (j < 0) throw DomainError("classical_moment: order must be nonnegative");
  validate(theta);
  switch (family_) {
    case Family::gaussian_location:
      return normal_moment(theta[0], sigma0_, j);
    case Family::stein_gaussian_target:
      return normal_moment(theta[0], theta[1], j);
    case Family::cauchy_location:
      if (j == 0) return 1.0;
      return std::nullopt;
    // sin(2 pi ln x) integrates to zero against x^j f for integer j.
    case Family::lognormal:
    case Family::lognormal_stieltjes: {
      const double jd = static_cast<double>(j);
      return std::exp(jd * theta[0] + 0.5 * jd * jd * theta[1] * theta[1]);
    }
    case Family::gaussian_mvn:
      break;
  }
  throw DomainError("classical_moment: multivariate family has no scalar moment sequence");
}

Eigen::MatrixXd ModelSpec::precision(const Eigen::VectorXd& theta) const {
  if (family_ != Family::gaussian_mvn) {
    throw DomainError("precision: only defined for gaussian_mvn");
  }
  if (theta.size() != param_dim()) {
    throw DomainError("precision: wrong number of free entries");
  }
  const int d = graph_.vertices;
  Eigen::MatrixXd omega = Eigen::MatrixXd::Zero(d, d);
  for (int i = 0; i < d; ++i) omega(i, i) = theta[i];
  for (std::size_t e = 0; e < graph_.edges.size(); ++e) {
    const auto [a, b] = graph_.edges[e];
    omega(a, b) = theta[d + static_cast<Eigen::Index>(e)];
    omega(b, a) = omega(a, b);
  }
  return omega;
}

Eigen::MatrixXd ModelSpec::covariance(const Eigen::VectorXd& theta) const {
  const Eigen::MatrixXd omega = precision(theta);
  Eigen::LLT<Eigen::MatrixXd> llt(omega);
  if (llt.info() != Eigen::Success) {
    throw DomainError("gaussian_mvn: precision matrix is not positive definite");
  }
  return llt.solve(Eigen::MatrixXd::Identity(omega.rows(), omega.cols()));
}

double stieltjes_perturbation(double x, const Eigen::VectorXd& theta) {
  if (!(x > 0.0)) throw DomainError("stieltjes_perturbation: x must be positive");
  if (theta.size() != 2 || !(theta[1] > 0.0)) {
    throw DomainError("stieltjes_perturbation: theta must be (mu, sigma > 0)");
  }
  return std::sin(kTwoPi * (std::log(x) - theta[0]) / (theta[1] * theta[1]));
}

}  // namespace weaktrans
