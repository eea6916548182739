#pragma once

#include <span>
#include <string_view>

namespace weaktrans {

enum class KernelKind { gaussian };

std::string_view to_string(KernelKind kind);

/// Strictly positive, rapidly decaying weight phi_s on R^d.
///
/// The only deformation parameter is the scale s (one kernel parameter,
/// index 0). With `normalized` the (2 pi s^2)^{-d/2} prefactor is included
/// and the kernel integrates to one; without it phi_s(0) = 1.
class KernelFamily {
 public:
  static constexpr int parameter_count = 1;

  explicit KernelFamily(double scale, int dim = 1, bool normalized = false,
                        KernelKind kind = KernelKind::gaussian);

  static KernelFamily gaussian(double scale, int dim = 1, bool normalized = false) {
    return KernelFamily(scale, dim, normalized, KernelKind::gaussian);
  }

  KernelKind kind() const noexcept { return kind_; }
  double scale() const noexcept { return scale_; }
  int dim() const noexcept { return dim_; }
  bool normalized() const noexcept { return normalized_; }

  KernelFamily with_scale(double scale) const {
    return KernelFamily(scale, dim_, normalized_, kind_);
  }

  /// Multiplicative constant in front of exp(-|x|^2 / (2 s^2)).
  double prefactor() const noexcept { return prefactor_; }

  double eval(double x) const;
  double eval(std::span<const double> x) const;
  double log_eval(double x) const;

  /// d phi_s / d s at x. Only parameter index 0 exists.
  double dlambda(double x, int index = 0) const;
  double dlambda(std::span<const double> x, int index = 0) const;

  /// d phi_s / dx (one-dimensional kernels only).
  double dx(double x) const;
  /// d^2 phi_s / (dx ds) (one-dimensional kernels only).
  double dx_dlambda(double x, int index = 0) const;

 private:
  double eval_squared_norm(double r2) const;
  double dlambda_squared_norm(double r2, int index) const;
  void require_scalar() const;

  KernelKind kind_;
  double scale_;
  int dim_;
  bool normalized_;
  double prefactor_;
};

/// Empirical check of phi(x) <= C exp(-a |x|^2) with a = (1 - eps) / (2 s^2),
/// evaluated on a radial grid.
struct DecayCertificate {
  double rate = 0.0;      ///< a
  double constant = 0.0;  ///< smallest C consistent with the grid
  double radius = 0.0;
  int points = 0;
  bool holds = false;
};

DecayCertificate certify_decay(const KernelFamily& kernel, double epsilon = 0.01,
                               double radius = 50.0, int points = 2001);

}  // namespace weaktrans
