#include "weaktrans/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

#include "weaktrans/errors.hpp"

namespace weaktrans {

namespace {

constexpr double kHalfPi = 0.5 * std::numbers::pi;
// Largest |x - center| / scale reached by the real-line transform.
constexpr double kReach = 1e15;
// e^t stays a positive normal double for |t| <= kLogClip.
constexpr double kLogClip = 690.0;
constexpr int kMinLevel = 3;

struct Node {
  double x;
  double weight;  // dx/du
};

// A map u -> x on [u_lo, u_hi] together with its Jacobian.
class Rule {
 public:
  enum class Kind { sinh_sinh, exp_sinh_right, exp_sinh_left, tanh_sinh };

  Rule(Kind kind, double offset, double scale, double u_lo, double u_hi)
      : kind_(kind), offset_(offset), scale_(scale), u_lo_(u_lo), u_hi_(u_hi) {}

  Rule& with_endpoints(double lo, double hi) {
    lo_ = lo;
    hi_ = hi;
    return *this;
  }

  double u_lo() const { return u_lo_; }
  double u_hi() const { return u_hi_; }

  Node node(double u) const {
    const double sh = kHalfPi * std::sinh(u);
    const double ch = kHalfPi * std::cosh(u);
    switch (kind_) {
      case Kind::sinh_sinh:
        return {offset_ + scale_ * std::sinh(sh), scale_ * ch * std::cosh(sh)};
      case Kind::exp_sinh_right: {
        const double e = std::exp(sh);
        return {offset_ + scale_ * e, scale_ * ch * e};
      }
      case Kind::exp_sinh_left: {
        const double e = std::exp(sh);
        return {offset_ - scale_ * e, scale_ * ch * e};
      }
      case Kind::tanh_sinh: {
        // Measure from the nearer endpoint so nodes within rounding of it survive.
        const double c = std::cosh(sh);
        const double e = std::exp(-2.0 * std::abs(sh));
        const double gap = 2.0 * scale_ * e / (1.0 + e);
        return {sh < 0.0 ? lo_ + gap : hi_ - gap, scale_ * ch / (c * c)};
      }
    }
    return {0.0, 0.0};
  }

 private:
  Kind kind_;
  double offset_;
  double scale_;
  double u_lo_;
  double u_hi_;
  double lo_ = 0.0;
  double hi_ = 0.0;
};

double sinh_sinh_limit(double reach) { return std::asinh(std::asinh(reach) / kHalfPi); }

Rule make_rule(Interval support, Transform transform, QuadHint hint) {
  const bool lo_inf = std::isinf(support.lo);
  const bool hi_inf = std::isinf(support.hi);
  const double scale = hint.scale > 0.0 ? hint.scale : 1.0;
  if (lo_inf && hi_inf) {
    const double u = sinh_sinh_limit(kReach);
    return Rule(Rule::Kind::sinh_sinh, hint.center, scale, -u, u);
  }
  const double e_lo = std::asinh(std::log(1e-200) / kHalfPi);
  const double e_hi = std::asinh(std::log(kReach) / kHalfPi);
  if (!lo_inf && hi_inf) {
    return Rule(Rule::Kind::exp_sinh_right, support.lo, scale, e_lo, e_hi);
  }
  if (lo_inf && !hi_inf) {
    return Rule(Rule::Kind::exp_sinh_left, support.hi, scale, e_lo, e_hi);
  }
  (void)transform;
  const double half = 0.5 * (support.hi - support.lo);
  return Rule(Rule::Kind::tanh_sinh, support.lo + half, half, -4.0, 4.0)
      .with_endpoints(support.lo, support.hi);
}

[[noreturn]] void throw_non_finite(double x, double y) {
  std::ostringstream os;
  os << "integrand returned a non-finite value " << y << " at x = " << x;
  throw NumericalError(os.str());
}

[[noreturn]] void throw_no_convergence(const QuadConfig& cfg, double value, double err) {
  std::ostringstream os;
  os.precision(6);
  os << "quadrature did not converge within " << cfg.max_levels
     << " levels (estimate " << value << ", last difference " << err << ")";
  throw NumericalError(os.str());
}

bool accepted(double diff, double value, const QuadConfig& cfg) {
  return diff <= std::max(cfg.abs_tol, cfg.rel_tol * std::abs(value));
}

// Composite trapezoid on a finite interval, doubling the panel count per level.
QuadResult trapezoid(const Integrand& f, double a, double b, const QuadConfig& cfg) {
  QuadResult result;
  auto eval = [&](double x) {
    const double y = f(x);
    ++result.evaluations;
    if (!std::isfinite(y)) throw_non_finite(x, y);
    return y;
  };
  const double width = b - a;
  int panels = 16;
  double sum = 0.5 * (eval(a) + eval(b));
  for (int i = 1; i < panels; ++i) sum += eval(a + width * i / panels);
  double estimate = sum * width / panels;
  for (int level = 1; level <= cfg.max_levels; ++level) {
    for (int i = 1; i < 2 * panels; i += 2) sum += eval(a + width * i / (2 * panels));
    panels *= 2;
    const double next = sum * width / panels;
    const double diff = std::abs(next - estimate);
    estimate = next;
    result.levels = level;
    result.value = estimate;
    result.err_est = diff;
    if (level >= kMinLevel && accepted(diff, estimate, cfg)) return result;
  }
  throw_no_convergence(cfg, estimate, result.err_est);
}

}  // namespace

std::string_view to_string(Transform t) {
  switch (t) {
    case Transform::none:
      return "none";
    case Transform::double_exponential:
      return "double_exponential";
    case Transform::log_substitution:
      return "log_substitution";
  }
  return "unknown";
}

void QuadConfig::validate() const {
  if (!(abs_tol > 0.0) || !(rel_tol > 0.0)) {
    throw DomainError("quadrature tolerances must be positive");
  }
  if (max_levels < 1) throw DomainError("quadrature max_levels must be >= 1");
}

QuadResult integrate(const Integrand& f, Interval support, const QuadConfig& cfg, QuadHint hint) {
  cfg.validate();
  if (!(support.lo < support.hi)) throw DomainError("integration interval is empty");
  if (std::isnan(support.lo) || std::isnan(support.hi)) {
    throw DomainError("integration interval has NaN bounds");
  }
  if (!(hint.scale > 0.0) || !std::isfinite(hint.center)) {
    throw DomainError("quadrature hint needs a finite center and positive scale");
  }

  if (cfg.transform == Transform::none) {
    if (std::isinf(support.lo) || std::isinf(support.hi)) {
      throw DomainError("transform 'none' requires a finite interval");
    }
    return trapezoid(f, support.lo, support.hi, cfg);
  }

  // The log substitution turns (0, inf) into R: int f(x) dx = int f(e^t) e^t dt.
  const bool log_sub = cfg.transform == Transform::log_substitution;
  Integrand shifted;
  Rule rule = make_rule(support, cfg.transform, hint);
  double t_lo = -std::numeric_limits<double>::infinity();
  double t_hi = std::numeric_limits<double>::infinity();
  if (log_sub) {
    if (support.lo != 0.0 || !std::isinf(support.hi)) {
      throw DomainError("log_substitution requires the interval (0, inf)");
    }
    const double reach = (kLogClip - std::abs(hint.center)) / hint.scale;
    if (!(reach > 1.0)) throw DomainError("log_substitution hint lies outside the usable range");
    const double u = sinh_sinh_limit(reach);
    rule = Rule(Rule::Kind::sinh_sinh, hint.center, hint.scale, -u, u);
    t_lo = -kLogClip;
    t_hi = kLogClip;
  }

  QuadResult result;
  auto contribution = [&](double u) {
    const Node n = rule.node(u);
    if (!std::isfinite(n.x) || !std::isfinite(n.weight) || n.weight == 0.0) return 0.0;
    double x = n.x;
    double jac = n.weight;
    if (log_sub) {
      if (x < t_lo || x > t_hi) return 0.0;
      const double ex = std::exp(x);
      jac *= ex;
      x = ex;
    }
    if (!(x > support.lo && x < support.hi)) return 0.0;
    const double y = f(x);
    ++result.evaluations;
    if (!std::isfinite(y)) throw_non_finite(x, y);
    if (y == 0.0) return 0.0;
    return y * jac;
  };

  const double u_lo = rule.u_lo();
  const double u_hi = rule.u_hi();
  // Level 0: unit spacing over the integer nodes in [u_lo, u_hi].
  double sum = 0.0;
  for (long k = static_cast<long>(std::ceil(u_lo)); k <= static_cast<long>(std::floor(u_hi)); ++k) {
    sum += contribution(static_cast<double>(k));
  }
  double h = 1.0;
  double estimate = sum * h;
  for (int level = 1; level <= cfg.max_levels; ++level) {
    h *= 0.5;
    const long k_lo = static_cast<long>(std::ceil(u_lo / h));
    const long k_hi = static_cast<long>(std::floor(u_hi / h));
    for (long k = k_lo; k <= k_hi; ++k) {
      if (k % 2 == 0) continue;
      sum += contribution(static_cast<double>(k) * h);
    }
    const double next = sum * h;
    const double diff = std::abs(next - estimate);
    estimate = next;
    result.levels = level;
    result.value = estimate;
    result.err_est = diff;
    if (level >= kMinLevel && accepted(diff, estimate, cfg)) return result;
  }
  throw_no_convergence(cfg, estimate, result.err_est);
}

double gaussian_product_moment(const Eigen::MatrixXd& cov, const Eigen::VectorXd& mean,
                               const KernelFamily& kernel, std::span<const int> alpha) {
  const Eigen::Index d = cov.rows();
  if (cov.cols() != d || mean.size() != d || kernel.dim() != d ||
      static_cast<Eigen::Index>(alpha.size()) != d) {
    throw DomainError("gaussian_product_moment: dimension mismatch");
  }
  int order = 0;
  for (int a : alpha) {
    if (a < 0) throw DomainError("gaussian_product_moment: negative exponent");
    order += a;
  }
  if (order > 2) throw DomainError("gaussian_product_moment: only |alpha| <= 2 is supported");

  Eigen::LLT<Eigen::MatrixXd> cov_llt(cov);
  if (cov_llt.info() != Eigen::Success) {
    throw DomainError("gaussian_product_moment: covariance is singular or not positive definite");
  }
  const double s2 = kernel.scale() * kernel.scale();
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(d, d);
  const Eigen::MatrixXd cov_inv = cov_llt.solve(eye);
  Eigen::LLT<Eigen::MatrixXd> post_llt(cov_inv + eye / s2);
  const Eigen::MatrixXd post_cov = post_llt.solve(eye);
  const Eigen::VectorXd post_mean = post_cov * (cov_inv * mean);

  // Cross term N(mean; 0, cov + s^2 I).
  const Eigen::MatrixXd sum_cov = cov + s2 * eye;
  Eigen::LLT<Eigen::MatrixXd> sum_llt(sum_cov);
  const double log_det = 2.0 * sum_llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  const double quad = mean.dot(sum_llt.solve(mean));
  double log_z = -0.5 * (static_cast<double>(d) * std::log(2.0 * std::numbers::pi) + log_det + quad);
  if (!kernel.normalized()) {
    log_z += 0.5 * static_cast<double>(d) * std::log(2.0 * std::numbers::pi * s2);
  }
  const double z = std::exp(log_z);

  if (order == 0) return z;
  int first = -1;
  int second = -1;
  for (Eigen::Index i = 0; i < d; ++i) {
    for (int k = 0; k < alpha[static_cast<std::size_t>(i)]; ++k) {
      (first < 0 ? first : second) = static_cast<int>(i);
    }
  }
  if (order == 1) return z * post_mean[first];
  return z * (post_cov(first, second) + post_mean[first] * post_mean[second]);
}

}  // namespace weaktrans
