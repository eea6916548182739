#pragma once

#include <Eigen/Dense>
#include <json.hpp>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "weaktrans/behrens_fisher.hpp"
#include "weaktrans/degeneracy.hpp"
#include "weaktrans/featuremap.hpp"
#include "weaktrans/transversality.hpp"

namespace weaktrans::cli {

/// Schema violation; the message starts with the offending field path.
class ValidationError : public std::runtime_error {
 public:
  ValidationError(const std::string& path, const std::string& message)
      : std::runtime_error(path + ": " + message) {}
};

struct SteinBlock {
  Eigen::VectorXd target;
  ModelSpec candidate = ModelSpec::stein_gaussian_target();
  Eigen::VectorXd candidate_theta;
  std::string dictionary = "hermite";
  int degree = 2;
  double center = 0.0;
  double scale = 1.0;
  std::vector<Eigen::VectorXd> zero_set;
  double rank_rtol = 1e-10;
};

struct Scenario {
  std::string name;
  std::optional<ModelSpec> model;
  KernelFamily kernel{1.0};
  std::optional<FeatureSpec> features;
  std::vector<Eigen::VectorXd> theta_grid;
  std::vector<double> kernel_scales;
  std::optional<JacobianMethod> jacobian;
  Thresholds thresholds;
  TransversalityTolerances tolerances;
  QuadConfig quadrature;
  double delta = 0.0;
  std::optional<Stratum> stratum;
  SweepIndicatorKind indicator = SweepIndicatorKind::submersion_fail;
  int carleman_j_max = 20;
  std::optional<SteinBlock> stein;
  std::optional<BFConfig> behrens_fisher;

  /// Every field with defaults filled in, as embedded in reports.
  nlohmann::json resolved;

  JacobianMethod jacobian_method() const;
};

/// Parses and validates; throws ValidationError.
Scenario parse_scenario(const nlohmann::json& doc);
Scenario load_scenario(const std::string& path);

}  // namespace weaktrans::cli
