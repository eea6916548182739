#include "weaktrans/kernel.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "weaktrans/errors.hpp"

namespace weaktrans {

std::string_view to_string(KernelKind kind) {
  switch (kind) {
    case KernelKind::gaussian:
      return "gaussian";
  }
  return "unknown";
}

KernelFamily::KernelFamily(double scale, int dim, bool normalized, KernelKind kind)
    : kind_(kind), scale_(scale), dim_(dim), normalized_(normalized), prefactor_(1.0) {
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw DomainError("kernel scale must be positive and finite, got " + std::to_string(scale));
  }
  if (dim < 1) {
    throw DomainError("kernel dimension must be >= 1");
  }
  if (normalized_) {
    prefactor_ = std::pow(2.0 * std::numbers::pi * scale * scale, -0.5 * dim);
  }
}

void KernelFamily::require_scalar() const {
  if (dim_ != 1) {
    throw DomainError("scalar kernel evaluation requires dim == 1");
  }
}

double KernelFamily::eval_squared_norm(double r2) const {
  return prefactor_ * std::exp(-r2 / (2.0 * scale_ * scale_));
}

// For the unnormalized kernel d/ds exp(-r^2/2s^2) = phi * r^2/s^3; the
// normalized prefactor contributes an extra -d/s.
double KernelFamily::dlambda_squared_norm(double r2, int index) const {
  if (index != 0) {
    throw DomainError("kernel has a single parameter (scale); index " + std::to_string(index) +
                      " is out of range");
  }
  const double s = scale_;
  const double phi = eval_squared_norm(r2);
  if (phi == 0.0) return 0.0;
  double factor = r2 / (s * s * s);
  if (normalized_) factor -= static_cast<double>(dim_) / s;
  return phi * factor;
}

double KernelFamily::eval(double x) const {
  require_scalar();
  return eval_squared_norm(x * x);
}

double KernelFamily::eval(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != dim_) {
    throw DomainError("point dimension does not match kernel dimension");
  }
  double r2 = 0.0;
  for (double xi : x) r2 += xi * xi;
  return eval_squared_norm(r2);
}

double KernelFamily::log_eval(double x) const {
  require_scalar();
  return std::log(prefactor_) - x * x / (2.0 * scale_ * scale_);
}

double KernelFamily::dlambda(double x, int index) const {
  require_scalar();
  return dlambda_squared_norm(x * x, index);
}

double KernelFamily::dlambda(std::span<const double> x, int index) const {
  if (static_cast<int>(x.size()) != dim_) {
    throw DomainError("point dimension does not match kernel dimension");
  }
  double r2 = 0.0;
  for (double xi : x) r2 += xi * xi;
  return dlambda_squared_norm(r2, index);
}

double KernelFamily::dx(double x) const {
  require_scalar();
  const double phi = eval_squared_norm(x * x);
  return phi == 0.0 ? 0.0 : -x / (scale_ * scale_) * phi;
}

double KernelFamily::dx_dlambda(double x, int index) const {
  require_scalar();
  if (index != 0) {
    throw DomainError("kernel has a single parameter (scale)");
  }
  const double s = scale_;
  const double s2 = s * s;
  const double phi = eval_squared_norm(x * x);
  if (phi == 0.0) return 0.0;
  double ds_factor = x * x / (s2 * s);
  if (normalized_) ds_factor -= 1.0 / s;
  // d/dx [phi * ds_factor] = phi' * ds_factor + phi * 2x/s^3
  return phi * (-x / s2 * ds_factor + 2.0 * x / (s2 * s));
}

DecayCertificate certify_decay(const KernelFamily& kernel, double epsilon, double radius,
                               int points) {
  if (!(epsilon > 0.0 && epsilon < 1.0) || points < 2 || !(radius > 0.0)) {
    throw DomainError("certify_decay: need 0 < epsilon < 1, radius > 0, points >= 2");
  }
  DecayCertificate cert;
  const double s = kernel.scale();
  cert.rate = (1.0 - epsilon) / (2.0 * s * s);
  cert.radius = radius;
  cert.points = points;
  // Work in logs so the bound stays meaningful where phi underflows.
  const double log_prefactor = std::log(kernel.prefactor());
  double log_c = -INFINITY;
  bool positive = true;
  for (int i = 0; i < points; ++i) {
    const double r = radius * static_cast<double>(i) / (points - 1);
    const double log_phi = log_prefactor - r * r / (2.0 * s * s);
    const double phi = std::exp(log_phi);
    if (r < s * 30.0 && !(phi > 0.0)) positive = false;
    log_c = std::max(log_c, log_phi + cert.rate * r * r);
  }
  cert.constant = std::exp(log_c);
  cert.holds = positive && std::isfinite(cert.constant);
  return cert;
}

}  // namespace weaktrans
