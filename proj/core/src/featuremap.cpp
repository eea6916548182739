#include "weaktrans/featuremap.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "parallel.hpp"
#include "weaktrans/errors.hpp"

namespace weaktrans {

namespace {

double int_power(double x, int j) {
  double result = 1.0;
  for (int k = 0; k < j; ++k) result *= x;
  return result;
}

// Rough location and width of f(x; theta) phi_s(x), optionally tilted by e^{tx}.
QuadHint natural_hint(const ModelSpec& model, const Eigen::VectorXd& theta,
                      const KernelFamily& kernel, double tilt = 0.0) {
  const double s2 = kernel.scale() * kernel.scale();
  switch (model.family()) {
    case Family::gaussian_location:
    case Family::stein_gaussian_target: {
      const double sd = model.family() == Family::gaussian_location ? model.sigma0() : theta[1];
      const double v = sd * sd;
      const double post_var = v * s2 / (v + s2);
      return {theta[0] * s2 / (v + s2) + tilt * post_var, std::sqrt(post_var)};
    }
    case Family::cauchy_location: {
      const double width = std::min(1.0, kernel.scale());
      return {theta[0] * s2 / (1.0 + s2) + tilt * width * width, width};
    }
    case Family::lognormal:
    case Family::lognormal_stieltjes:
      return {theta[0], theta[1]};
    case Family::gaussian_mvn:
      break;
  }
  return {};
}

std::vector<TestFunction> test_functions(const FeatureSpec& spec) {
  std::vector<TestFunction> fns;
  switch (spec.kind) {
    case FeatureKind::moments:
      for (int j : spec.orders) fns.emplace_back([j](double x) { return int_power(x, j); });
      break;
    case FeatureKind::charfn:
      for (double u : spec.frequencies) {
        fns.emplace_back([u](double x) { return std::cos(u * x); });
        fns.emplace_back([u](double x) { return std::sin(u * x); });
      }
      break;
    case FeatureKind::custom:
      fns = spec.functions;
      break;
    case FeatureKind::monomials:
      for (const auto& alpha : spec.exponents) {
        if (alpha.size() != 1) {
          throw DomainError("univariate models need one-component exponents");
        }
        const int j = alpha[0];
        fns.emplace_back([j](double x) { return int_power(x, j); });
      }
      break;
  }
  return fns;
}

void check_kernel_matches(const ModelSpec& model, const KernelFamily& kernel) {
  if (kernel.dim() != model.dim()) {
    throw DomainError("kernel dimension " + std::to_string(kernel.dim()) +
                      " does not match model dimension " + std::to_string(model.dim()));
  }
}

// int g(x) k(x) e(x) f(x) dx with k a kernel factor and e an optional extra
// weight (the score); short-circuited where k underflows so that large |x|
// never produces inf * 0.
double weighted_integral(const ModelSpec& model, const Eigen::VectorXd& theta,
                         const TestFunction& g,
                         const std::function<double(double)>& kernel_factor,
                         const std::function<double(double)>& extra, const QuadConfig& cfg,
                         QuadHint hint) {
  return expect(
      model, theta,
      [&](double x) {
        const double k = kernel_factor(x);
        if (k == 0.0) return 0.0;
        const double e = extra ? extra(x) : 1.0;
        return g(x) * k * e;
      },
      cfg, hint);
}

Eigen::VectorXd mvn_features(const ModelSpec& model, const Eigen::VectorXd& theta,
                             const KernelFamily& kernel, const FeatureSpec& spec) {
  if (spec.kind != FeatureKind::monomials) {
    throw DomainError("gaussian_mvn features must be monomials of degree <= 2");
  }
  const Eigen::MatrixXd cov = model.covariance(theta);
  const Eigen::VectorXd mean = Eigen::VectorXd::Zero(model.dim());
  Eigen::VectorXd out(spec.size());
  for (std::size_t i = 0; i < spec.exponents.size(); ++i) {
    const auto& alpha = spec.exponents[i];
    if (static_cast<int>(alpha.size()) != model.dim()) {
      throw DomainError("monomial exponent length does not match model dimension");
    }
    out[static_cast<Eigen::Index>(i)] = gaussian_product_moment(cov, mean, kernel, alpha);
  }
  return out;
}

Eigen::VectorXd feature_values(const ModelSpec& model, const Eigen::VectorXd& theta,
                               const KernelFamily& kernel, const FeatureSpec& spec,
                               const QuadConfig& cfg) {
  if (model.multivariate()) return mvn_features(model, theta, kernel, spec);
  const auto fns = test_functions(spec);
  const QuadHint hint = natural_hint(model, theta, kernel);
  Eigen::VectorXd out(static_cast<Eigen::Index>(fns.size()));
  detail::parallel_for(fns.size(), [&](std::size_t i) {
    out[static_cast<Eigen::Index>(i)] = weighted_integral(
        model, theta, fns[i], [&](double x) { return kernel.eval(x); }, nullptr, cfg, hint);
  });
  return out;
}

}  // namespace

std::string_view to_string(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::moments:
      return "moments";
    case FeatureKind::charfn:
      return "charfn";
    case FeatureKind::custom:
      return "custom";
    case FeatureKind::monomials:
      return "monomials";
  }
  return "unknown";
}

std::string_view to_string(JacobianMethod method) {
  return method == JacobianMethod::analytic_score ? "analytic_score" : "finite_difference";
}

FeatureSpec FeatureSpec::moments(std::vector<int> orders) {
  FeatureSpec spec;
  spec.kind = FeatureKind::moments;
  spec.orders = std::move(orders);
  spec.validate();
  return spec;
}

FeatureSpec FeatureSpec::moments_upto(int max_order) {
  if (max_order < 0) throw DomainError("moments_upto: order must be nonnegative");
  std::vector<int> orders(static_cast<std::size_t>(max_order) + 1);
  for (int j = 0; j <= max_order; ++j) orders[static_cast<std::size_t>(j)] = j;
  return moments(std::move(orders));
}

FeatureSpec FeatureSpec::charfn(std::vector<double> frequencies) {
  FeatureSpec spec;
  spec.kind = FeatureKind::charfn;
  spec.frequencies = std::move(frequencies);
  spec.validate();
  return spec;
}

FeatureSpec FeatureSpec::custom(std::vector<TestFunction> functions) {
  FeatureSpec spec;
  spec.kind = FeatureKind::custom;
  spec.functions = std::move(functions);
  spec.validate();
  return spec;
}

FeatureSpec FeatureSpec::monomials(std::vector<std::vector<int>> exponents) {
  FeatureSpec spec;
  spec.kind = FeatureKind::monomials;
  spec.exponents = std::move(exponents);
  spec.validate();
  return spec;
}

FeatureSpec FeatureSpec::graph_statistics(const Graph& graph) {
  std::vector<std::vector<int>> exps;
  for (int i = 0; i < graph.vertices; ++i) {
    std::vector<int> alpha(static_cast<std::size_t>(graph.vertices), 0);
    alpha[static_cast<std::size_t>(i)] = 2;
    exps.push_back(std::move(alpha));
  }
  for (const auto& [a, b] : graph.edges) {
    std::vector<int> alpha(static_cast<std::size_t>(graph.vertices), 0);
    alpha[static_cast<std::size_t>(a)] = 1;
    alpha[static_cast<std::size_t>(b)] = 1;
    exps.push_back(std::move(alpha));
  }
  return monomials(std::move(exps));
}

int FeatureSpec::size() const {
  switch (kind) {
    case FeatureKind::moments:
      return static_cast<int>(orders.size());
    case FeatureKind::charfn:
      return 2 * static_cast<int>(frequencies.size());
    case FeatureKind::custom:
      return static_cast<int>(functions.size());
    case FeatureKind::monomials:
      return static_cast<int>(exponents.size());
  }
  return 0;
}

void FeatureSpec::validate() const {
  if (size() < 1) throw DomainError("feature spec must contain at least one feature");
  switch (kind) {
    case FeatureKind::moments:
      for (std::size_t i = 0; i < orders.size(); ++i) {
        if (orders[i] < 0) throw DomainError("moment orders must be nonnegative");
        if (i > 0 && orders[i] <= orders[i - 1]) {
          throw DomainError("moment orders must be strictly increasing");
        }
      }
      break;
    case FeatureKind::charfn:
      for (double u : frequencies) {
        if (!std::isfinite(u)) throw DomainError("charfn frequencies must be finite");
      }
      break;
    case FeatureKind::custom:
      for (const auto& g : functions) {
        if (!g) throw DomainError("custom feature has an empty test function");
      }
      break;
    case FeatureKind::monomials:
      for (const auto& alpha : exponents) {
        if (alpha.empty()) throw DomainError("monomial exponent must be non-empty");
        for (int a : alpha) {
          if (a < 0) throw DomainError("monomial exponents must be nonnegative");
        }
      }
      break;
  }
}

std::vector<std::string> FeatureSpec::labels() const {
  std::vector<std::string> out;
  switch (kind) {
    case FeatureKind::moments:
      for (int j : orders) out.push_back("m" + std::to_string(j));
      break;
    case FeatureKind::charfn:
      for (std::size_t i = 0; i < frequencies.size(); ++i) {
        out.push_back("re_u" + std::to_string(i));
        out.push_back("im_u" + std::to_string(i));
      }
      break;
    case FeatureKind::custom:
      for (std::size_t i = 0; i < functions.size(); ++i) out.push_back("g" + std::to_string(i));
      break;
    case FeatureKind::monomials:
      for (const auto& alpha : exponents) {
        std::string label = "x";
        for (int a : alpha) label += std::to_string(a);
        out.push_back(label);
      }
      break;
  }
  return out;
}

Eigen::MatrixXd JacobianDecomposition::joint() const {
  Eigen::MatrixXd m(d_theta.rows(), d_theta.cols() + d_lambda.cols());
  m << d_theta, d_lambda;
  return m;
}

double fd_step(double x) {
  static const double cbrt_eps = std::cbrt(std::numeric_limits<double>::epsilon());
  return cbrt_eps * std::max(1.0, std::abs(x));
}

double expect(const ModelSpec& model, const Eigen::VectorXd& theta, const Integrand& g,
              const QuadConfig& cfg, std::optional<QuadHint> hint) {
  if (model.multivariate()) {
    throw DomainError("expect: multivariate integrals are only available in closed form");
  }
  model.validate(theta);
  QuadConfig local = cfg;
  Interval support = Interval::real_line();
  QuadHint h = hint.value_or(QuadHint{});
  if (model.support() == SupportKind::positive_half_line) {
    if (cfg.transform == Transform::none) {
      throw DomainError("transform 'none' cannot integrate over (0, inf)");
    }
    support = Interval::positive_half_line();
    local.transform = Transform::log_substitution;
    if (!hint) h = {theta[0], theta[1]};
  } else if (cfg.transform == Transform::log_substitution) {
    throw DomainError("log_substitution applies only to positive-support models");
  } else if (cfg.transform == Transform::none) {
    throw DomainError("transform 'none' cannot integrate over the real line");
  }
  // The density is tested first so that g never multiplies an underflowed f.
  auto integrand = [&](double x) {
    const double f = model.density(x, theta);
    if (f == 0.0) return 0.0;
    const double v = g(x);
    return v == 0.0 ? 0.0 : v * f;
  };
  return integrate(integrand, support, local, h).value;
}

double weak_moment(const ModelSpec& model, const Eigen::VectorXd& theta,
                   const KernelFamily& kernel, int order, const QuadConfig& cfg) {
  if (order < 0) throw DomainError("weak_moment: order must be nonnegative");
  check_kernel_matches(model, kernel);
  if (model.multivariate()) {
    throw DomainError("weak_moment: use monomial features for gaussian_mvn");
  }
  return weighted_integral(
        model, theta, [order](double x) { return int_power(x, order); },
      [&](double x) { return kernel.eval(x); }, nullptr, cfg,
      natural_hint(model, theta, kernel));
}

FeatureVector feature_map(const ModelSpec& model, const Eigen::VectorXd& theta,
                          const KernelFamily& kernel, const FeatureSpec& spec,
                          const QuadConfig& cfg) {
  spec.validate();
  check_kernel_matches(model, kernel);
  model.validate(theta);
  FeatureVector fv;
  fv.theta = theta;
  fv.lambda = Eigen::VectorXd::Constant(1, kernel.scale());
  fv.values = feature_values(model, theta, kernel, spec, cfg);
  return fv;
}

std::complex<double> weak_char_fn(const ModelSpec& model, const Eigen::VectorXd& theta,
                                  const KernelFamily& kernel, double u, const QuadConfig& cfg) {
  check_kernel_matches(model, kernel);
  const QuadHint hint = natural_hint(model, theta, kernel);
  auto phi = [&](double x) { return kernel.eval(x); };
  const double re = weighted_integral(
        model, theta, [u](double x) { return std::cos(u * x); }, phi, nullptr, cfg, hint);
  const double im = weighted_integral(
        model, theta, [u](double x) { return std::sin(u * x); }, phi, nullptr, cfg, hint);
  return {re, im};
}

double weak_cgf(const ModelSpec& model, const Eigen::VectorXd& theta,
                const KernelFamily& kernel, double t, const QuadConfig& cfg) {
  check_kernel_matches(model, kernel);
  if (!std::isfinite(t)) throw DomainError("weak_cgf: t must be finite");
  const double w0 = weak_moment(model, theta, kernel, 0, cfg);
  if (t == 0.0) return 0.0;
  // e^{tx} phi(x) is evaluated as one exponential so it never forms inf * 0.
  auto tilted_kernel = [&](double x) { return std::exp(t * x + kernel.log_eval(x)); };
  QuadHint hint = natural_hint(model, theta, kernel, t);
  const double mgf = weighted_integral(
        model, theta, [](double) { return 1.0; }, tilted_kernel, nullptr, cfg, hint);
  if (!(mgf > 0.0) || !(w0 > 0.0)) {
    throw NumericalError("weak_cgf: non-positive weak moment generating function");
  }
  return std::log(mgf) - std::log(w0);
}

Eigen::Vector4d weak_cumulants(const ModelSpec& model, const Eigen::VectorXd& theta,
                               const KernelFamily& kernel, const QuadConfig& cfg, double step) {
  if (!(step > 0.0)) throw DomainError("weak_cumulants: step must be positive");
  const double h = step;
  const double k0 = 0.0;
  const double kp1 = weak_cgf(model, theta, kernel, h, cfg);
  const double km1 = weak_cgf(model, theta, kernel, -h, cfg);
  const double kp2 = weak_cgf(model, theta, kernel, 2 * h, cfg);
  const double km2 = weak_cgf(model, theta, kernel, -2 * h, cfg);
  // Five-point stencils: first and third derivatives are second-order
  // accurate, second and fourth likewise.
  Eigen::Vector4d kappa;
  kappa[0] = (-kp2 + 8 * kp1 - 8 * km1 + km2) / (12 * h);
  kappa[1] = (-kp2 + 16 * kp1 - 30 * k0 + 16 * km1 - km2) / (12 * h * h);
  kappa[2] = (kp2 - 2 * kp1 + 2 * km1 - km2) / (2 * h * h * h);
  kappa[3] = (kp2 - 4 * kp1 + 6 * k0 - 4 * km1 + km2) / (h * h * h * h);
  return kappa;
}

Eigen::MatrixXd finite_difference_jacobian(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& fn, const Eigen::VectorXd& x) {
  Eigen::MatrixXd jac;
  for (Eigen::Index a = 0; a < x.size(); ++a) {
    const double h = fd_step(x[a]);
    Eigen::VectorXd plus = x;
    Eigen::VectorXd minus = x;
    plus[a] += h;
    minus[a] -= h;
    const double width = plus[a] - minus[a];
    if (!(width > 0.0)) throw NumericalError("finite difference step underflow");
    const Eigen::VectorXd column = (fn(plus) - fn(minus)) / width;
    if (jac.size() == 0) jac.resize(column.size(), x.size());
    jac.col(a) = column;
  }
  return jac;
}

JacobianDecomposition jacobian(const ModelSpec& model, const Eigen::VectorXd& theta,
                               const KernelFamily& kernel, const FeatureSpec& spec,
                               JacobianMethod method, const QuadConfig& cfg) {
  spec.validate();
  check_kernel_matches(model, kernel);
  model.validate(theta);
  JacobianDecomposition jd;
  jd.method = method;
  const int p = model.param_dim();
  const int n = spec.size();

  if (method == JacobianMethod::finite_difference) {
    jd.d_theta = finite_difference_jacobian(
        [&](const Eigen::VectorXd& t) { return feature_values(model, t, kernel, spec, cfg); },
        theta);
    const Eigen::VectorXd s = Eigen::VectorXd::Constant(1, kernel.scale());
    jd.d_lambda = finite_difference_jacobian(
        [&](const Eigen::VectorXd& sv) {
          return feature_values(model, theta, kernel.with_scale(sv[0]), spec, cfg);
        },
        s);
    return jd;
  }

  if (!model.has_analytic_score()) {
    throw DomainError(std::string(model.name()) +
                      ": analytic_score Jacobian unavailable; use finite_difference");
  }
  const auto fns = test_functions(spec);
  const QuadHint hint = natural_hint(model, theta, kernel);
  jd.d_theta.resize(n, p);
  jd.d_lambda.resize(n, 1);
  auto phi = [&](double x) { return kernel.eval(x); };
  auto dphi = [&](double x) { return kernel.dlambda(x, 0); };
  // One task per matrix entry, column p being the kernel derivative.
  const std::size_t cols = static_cast<std::size_t>(p) + 1;
  detail::parallel_for(fns.size() * cols, [&](std::size_t task) {
    const auto i = static_cast<Eigen::Index>(task / cols);
    const auto a = static_cast<int>(task % cols);
    const auto& g = fns[static_cast<std::size_t>(i)];
    if (a < p) {
      jd.d_theta(i, a) = weighted_integral(
          model, theta, g, phi, [&, a](double x) { return model.score(x, theta, a); }, cfg,
          hint);
    } else {
      jd.d_lambda(i, 0) = weighted_integral(model, theta, g, dphi, nullptr, cfg, hint);
    }
  });
  return jd;
}

JointFeatureMap make_joint_map(const ModelSpec& model, const KernelFamily& prototype,
                               const FeatureSpec& spec, JacobianMethod method,
                               const QuadConfig& cfg) {
  spec.validate();
  check_kernel_matches(model, prototype);
  JointFeatureMap map;
  map.param_dim = model.param_dim();
  map.kernel_param_dim = KernelFamily::parameter_count;
  map.feature_dim = spec.size();
  map.features = [model, prototype, spec, cfg](const Eigen::VectorXd& theta,
                                               const Eigen::VectorXd& lambda) {
    return feature_map(model, theta, prototype.with_scale(lambda[0]), spec, cfg).values;
  };
  map.jacobian = [model, prototype, spec, method, cfg](const Eigen::VectorXd& theta,
                                                       const Eigen::VectorXd& lambda) {
    return jacobian(model, theta, prototype.with_scale(lambda[0]), spec, method, cfg);
  };
  return map;
}

JointFeatureMap make_joint_map(
    int param_dim, int kernel_param_dim, int feature_dim,
    std::function<Eigen::VectorXd(const Eigen::VectorXd&, const Eigen::VectorXd&)> features) {
  if (param_dim < 0 || kernel_param_dim < 0 || feature_dim < 1) {
    throw DomainError("make_joint_map: invalid dimensions");
  }
  JointFeatureMap map;
  map.param_dim = param_dim;
  map.kernel_param_dim = kernel_param_dim;
  map.feature_dim = feature_dim;
  map.features = features;
  map.jacobian = [features, param_dim, kernel_param_dim, feature_dim](
                     const Eigen::VectorXd& theta, const Eigen::VectorXd& lambda) {
    JacobianDecomposition jd;
    jd.method = JacobianMethod::finite_difference;
    jd.d_theta = param_dim == 0
                     ? Eigen::MatrixXd(feature_dim, 0)
                     : finite_difference_jacobian(
                           [&](const Eigen::VectorXd& t) { return features(t, lambda); }, theta);
    jd.d_lambda = kernel_param_dim == 0
                      ? Eigen::MatrixXd(feature_dim, 0)
                      : finite_difference_jacobian(
                            [&](const Eigen::VectorXd& l) { return features(theta, l); }, lambda);
    return jd;
  };
  return map;
}

}  // namespace weaktrans
