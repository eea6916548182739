#pragma once

#include <Eigen/Dense>
#include <functional>
#include <limits>
#include <span>
#include <string_view>

#include "weaktrans/kernel.hpp"

namespace weaktrans {

enum class Transform {
  none,                ///< composite trapezoid; finite intervals only
  double_exponential,  ///< tanh-sinh / exp-sinh / sinh-sinh matched to the interval
  log_substitution,    ///< t = ln x on (0, inf), then sinh-sinh in t
};

std::string_view to_string(Transform t);

struct QuadConfig {
  double abs_tol = 1e-10;
  double rel_tol = 1e-10;
  int max_levels = 12;
  Transform transform = Transform::double_exponential;

  void validate() const;
};

struct Interval {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();

  static Interval real_line() { return {}; }
  static Interval positive_half_line() { return {0.0, std::numeric_limits<double>::infinity()}; }
};

/// Where the integrand's mass sits. For log_substitution the hint is given
/// in t = ln x coordinates. Only affects efficiency, never the limit value.
struct QuadHint {
  double center = 0.0;
  double scale = 1.0;
};

struct QuadResult {
  double value = 0.0;
  double err_est = 0.0;
  int levels = 0;
  long evaluations = 0;
};

using Integrand = std::function<double(double)>;

/// Nested-refinement trapezoid rule in a transformed variable. Level k uses
/// step 2^-k and reuses all nodes of level k-1; the estimate is accepted when
/// two consecutive levels differ by at most max(abs_tol, rel_tol |value|).
///
/// Throws NumericalError on a non-finite integrand value or when max_levels
/// is exhausted, DomainError on an unsupported interval/transform pairing.
QuadResult integrate(const Integrand& f, Interval support, const QuadConfig& cfg = {},
                     QuadHint hint = {});

/// Closed form of  int x^alpha N(x; mean, cov) phi_s(x) dx  for |alpha| <= 2.
///
/// Uses N(x; m, S) N(x; 0, s^2 I) = N(m; 0, S + s^2 I) N(x; m~, S~) with
/// S~ = (S^-1 + s^-2 I)^-1 and m~ = S~ S^-1 m. An unnormalized kernel adds
/// the factor (2 pi s^2)^{d/2}.
double gaussian_product_moment(const Eigen::MatrixXd& cov, const Eigen::VectorXd& mean,
                               const KernelFamily& kernel, std::span<const int> alpha);

}  // namespace weaktrans
