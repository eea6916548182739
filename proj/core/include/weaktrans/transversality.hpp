#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "weaktrans/featuremap.hpp"

namespace weaktrans {

/// SVD-based rank with threshold tol_used = rank_rtol * sigma_max * max(rows, cols).
struct RankReport {
  Eigen::VectorXd singular_values;  ///< descending
  int numerical_rank = 0;
  double tol_used = 0.0;
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
  /// Some singular value lies within a factor 10 of tol_used; the rank
  /// verdict is then surfaced as unreliable rather than silently resolved.
  bool marginal = false;
};

RankReport numerical_rank(const Eigen::MatrixXd& m, double rank_rtol = 1e-10);

enum class StratumKind { coordinate, rank_deficiency, custom };

std::string_view to_string(StratumKind kind);

/// A degeneracy submanifold D = {y : g(y) = 0} of R^{K+1} with codimension c.
class Stratum {
 public:
  using LevelMap = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;
  using LevelJacobian = std::function<Eigen::MatrixXd(const Eigen::VectorXd&)>;

  /// {y : y[indices[i]] = values[i]}.
  static Stratum coordinate(int ambient_dim, std::vector<int> indices, std::vector<double> values);
  /// Singular n x n matrices, with y holding the entries row-major (ambient n^2).
  static Stratum determinant(int n);
  static Stratum custom(int ambient_dim, int codim, LevelMap g, LevelJacobian dg);

  int codim() const noexcept { return codim_; }
  int ambient_dim() const noexcept { return ambient_; }
  StratumKind kind() const noexcept { return kind_; }
  const std::vector<int>& indices() const noexcept { return indices_; }
  const std::vector<double>& values() const noexcept { return values_; }

  Eigen::VectorXd level(const Eigen::VectorXd& y) const;
  Eigen::MatrixXd level_jacobian(const Eigen::VectorXd& y) const;

 private:
  Stratum(StratumKind kind, int ambient, int codim, LevelMap g, LevelJacobian dg)
      : kind_(kind), ambient_(ambient), codim_(codim), g_(std::move(g)), dg_(std::move(dg)) {}

  StratumKind kind_;
  int ambient_;
  int codim_;
  LevelMap g_;
  LevelJacobian dg_;
  std::vector<int> indices_;
  std::vector<double> values_;
};

struct TransversalityTolerances {
  double rank_rtol = 1e-10;
  double on_stratum_tol = 1e-8;
  /// Points with on_stratum_tol < |g| <= newton_band are pulled onto the
  /// stratum by one Newton step; beyond the band they count as off-stratum.
  double newton_band = 1e-4;
};

/// Orthonormal basis (c x (K+1), rows) of the normal space N_y D, oriented
/// like the rows of Dg(y). Throws DomainError if y is not on the stratum or
/// Dg(y) has rank < c.
Eigen::MatrixXd normal_projection(const Stratum& stratum, const Eigen::VectorXd& y,
                                  const TransversalityTolerances& tol = {});

struct RankVerdict {
  bool holds = false;
  RankReport report;
};

struct TransversalityVerdict {
  bool transversal = false;
  /// false when y is off the stratum, where transversality holds vacuously.
  bool on_stratum = true;
  RankReport report;  ///< rank of pi_N [D_theta F | D_lambda F]
};

TransversalityVerdict check_transversal_at(const JacobianDecomposition& jac,
                                           const Stratum& stratum, const Eigen::VectorXd& y,
                                           const TransversalityTolerances& tol = {});

struct ComponentwiseVerdict {
  bool theta_only = false;
  bool lambda_only = false;
  bool joint = false;
  bool on_stratum = true;
  RankReport theta_report;
  RankReport lambda_report;
  RankReport joint_report;
};

/// pi_N(Im D_theta F) + pi_N(Im D_lambda F) = N_y D, block by block.
ComponentwiseVerdict check_componentwise(const JacobianDecomposition& jac, const Stratum& stratum,
                                         const Eigen::VectorXd& y,
                                         const TransversalityTolerances& tol = {});

/// rank [D_theta F | D_lambda F] == K + 1.
RankVerdict check_submersion(const JacobianDecomposition& jac, double rank_rtol = 1e-10);

/// rank(joint) - rank(D_theta F); always in [0, q].
int enrichment_gain(const JacobianDecomposition& jac, double rank_rtol = 1e-10);

enum class SweepIndicatorKind { submersion_fail, info_singular, stratum_hit };

std::string_view to_string(SweepIndicatorKind kind);

/// What counts as "bad" at a (theta, lambda) cell:
///   submersion_fail  rank DF < K + 1
///   info_singular    rank D_theta F < p
///   stratum_hit      F lands on the stratum (within newton_band) and is not
///                    transversal to it there
struct SweepIndicator {
  SweepIndicatorKind kind = SweepIndicatorKind::submersion_fail;
  std::optional<Stratum> stratum;

  static SweepIndicator submersion_fail() { return {SweepIndicatorKind::submersion_fail, {}}; }
  static SweepIndicator info_singular() { return {SweepIndicatorKind::info_singular, {}}; }
  static SweepIndicator stratum_hit(Stratum s) {
    return {SweepIndicatorKind::stratum_hit, std::move(s)};
  }
};

struct SweepRow {
  Eigen::VectorXd lambda;
  int fired = 0;
  int total = 0;
  double fraction = 0.0;
  int marginal = 0;  ///< cells whose rank verdict was marginal
};

struct SweepTable {
  std::vector<SweepRow> rows;  ///< in kernel-grid order
  std::vector<Eigen::VectorXd> bad_lambdas;

  /// Bad set empty or at most max_bad grid points, none of them adjacent.
  bool bad_set_isolated(int max_bad = 2) const;
};

/// Genericity probe: for every lambda, the fraction of theta-grid cells where
/// the indicator fires.
SweepTable lambda_sweep(const JointFeatureMap& map, std::span<const Eigen::VectorXd> kernel_grid,
                        std::span<const Eigen::VectorXd> theta_grid,
                        const SweepIndicator& indicator,
                        const TransversalityTolerances& tol = {});

SweepTable lambda_sweep(const JointFeatureMap& map, std::span<const double> scales,
                        std::span<const Eigen::VectorXd> theta_grid,
                        const SweepIndicator& indicator,
                        const TransversalityTolerances& tol = {});

}  // namespace weaktrans
