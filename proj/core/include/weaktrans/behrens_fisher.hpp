#pragma once

#include <vector>

namespace weaktrans {

/// E[phi_s(X)] for X ~ N(mu, sigma^2) and the normalized Gaussian kernel:
/// (2 pi (sigma^2 + s^2))^{-1/2} exp(-mu^2 / (2 (sigma^2 + s^2))).
double w0_closed_form(double mu, double sigma, double s);

/// The same expression without the (2 pi)^{-1/2} constant. Reported next to
/// w0_closed_form; their ratio is sqrt(2 pi) everywhere.
double w0_without_prefactor(double mu, double sigma, double s);

struct BFConfig {
  double mu1 = 0.0;
  double mu2 = 0.0;
  double sigma1 = 1.0;
  double sigma2 = 1.0;
  std::vector<double> s_grid;
  std::vector<double> sigma_grid;  ///< nuisance values for both sigma1 and sigma2

  void validate() const;
  double variance_ratio() const { return sigma1 * sigma1 / (sigma2 * sigma2); }
};

struct NuisanceRow {
  double s = 0.0;
  double sup_gap = 0.0;  ///< max over sigma_grid^2 of |w0(mu, s1, s) - w0(mu, s2, s)|
  double argmax_sigma1 = 0.0;
  double argmax_sigma2 = 0.0;
};

/// Under H0 (mu2 is forced to mu1). Rows follow s_grid sorted ascending.
std::vector<NuisanceRow> nuisance_sensitivity(const BFConfig& cfg);

struct PowerRow {
  double s = 0.0;
  double signal_gap = 0.0;        ///< |w0(mu1, sigma1, s) - w0(mu2, sigma2, s)|
  double sup_nuisance_gap = 0.0;  ///< from nuisance_sensitivity at mu1
  double ratio = 0.0;             ///< signal_gap / sup_nuisance_gap (inf if the latter is 0)
  double w0_first = 0.0;
  double w0_first_without_prefactor = 0.0;
};

/// Requires mu1 != mu2.
std::vector<PowerRow> power_proxy(const BFConfig& cfg);

}  // namespace weaktrans
