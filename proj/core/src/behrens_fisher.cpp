#include "weaktrans/behrens_fisher.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "weaktrans/errors.hpp"

namespace weaktrans {

namespace {

void check_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) throw DomainError(std::string(what) + " must be positive");
}

std::vector<double> sorted_scales(const std::vector<double>& grid) {
  std::vector<double> s = grid;
  std::sort(s.begin(), s.end());
  return s;
}

}  // namespace

double w0_without_prefactor(double mu, double sigma, double s) {
  check_positive(sigma, "sigma");
  check_positive(s, "s");
  const double v = sigma * sigma + s * s;
  return std::exp(-mu * mu / (2.0 * v)) / std::sqrt(v);
}

double w0_closed_form(double mu, double sigma, double s) {
  return w0_without_prefactor(mu, sigma, s) * std::numbers::inv_sqrtpi / std::numbers::sqrt2;
}

void BFConfig::validate() const {
  if (!std::isfinite(mu1) || !std::isfinite(mu2)) throw DomainError("BFConfig: means must be finite");
  check_positive(sigma1, "BFConfig.sigma1");
  check_positive(sigma2, "BFConfig.sigma2");
  if (s_grid.empty()) throw DomainError("BFConfig: s_grid must be non-empty");
  if (sigma_grid.empty()) throw DomainError("BFConfig: sigma_grid must be non-empty");
  for (double s : s_grid) check_positive(s, "BFConfig.s_grid entry");
  for (double s : sigma_grid) check_positive(s, "BFConfig.sigma_grid entry");
}

std::vector<NuisanceRow> nuisance_sensitivity(const BFConfig& cfg) {
  cfg.validate();
  const double mu = cfg.mu1;
  std::vector<NuisanceRow> rows;
  for (double s : sorted_scales(cfg.s_grid)) {
    NuisanceRow row{s, 0.0, cfg.sigma_grid.front(), cfg.sigma_grid.front()};
    for (double a : cfg.sigma_grid) {
      const double wa = w0_closed_form(mu, a, s);
      for (double b : cfg.sigma_grid) {
        const double gap = std::abs(wa - w0_closed_form(mu, b, s));
        if (gap > row.sup_gap) {
          row.sup_gap = gap;
          row.argmax_sigma1 = a;
          row.argmax_sigma2 = b;
        }
      }
    }
    rows.push_back(row);
  }
  return rows;
}

std::vector<PowerRow> power_proxy(const BFConfig& cfg) {
  cfg.validate();
  if (cfg.mu1 == cfg.mu2) throw DomainError("power_proxy: requires mu1 != mu2");
  const auto nuisance = nuisance_sensitivity(cfg);
  std::vector<PowerRow> rows;
  for (const auto& n : nuisance) {
    PowerRow row;
    row.s = n.s;
    row.w0_first = w0_closed_form(cfg.mu1, cfg.sigma1, n.s);
    row.w0_first_without_prefactor = w0_without_prefactor(cfg.mu1, cfg.sigma1, n.s);
    row.signal_gap = std::abs(row.w0_first - w0_closed_form(cfg.mu2, cfg.sigma2, n.s));
    row.sup_nuisance_gap = n.sup_gap;
    row.ratio = n.sup_gap > 0.0 ? row.signal_gap / n.sup_gap
                                : std::numeric_limits<double>::infinity();
    rows.push_back(row);
  }
  return rows;
}

}  // namespace weaktrans
