#pragma once

#include <Eigen/Dense>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "weaktrans/featuremap.hpp"
#include "weaktrans/transversality.hpp"

namespace weaktrans {

/// Weak information G = D_theta Phi^T D_theta Phi at one parameter point.
struct InfoMatrix {
  Eigen::MatrixXd G;
  Eigen::MatrixXd d_theta;
  Eigen::VectorXd theta;
  Eigen::VectorXd lambda;
};

InfoMatrix weak_info(const JointFeatureMap& map, const Eigen::VectorXd& theta,
                     const Eigen::VectorXd& lambda);
/// Uses the analytic-score Jacobian when the family has one.
InfoMatrix weak_info(const ModelSpec& model, const Eigen::VectorXd& theta,
                     const KernelFamily& kernel, const FeatureSpec& spec,
                     const QuadConfig& cfg = {});

struct Thresholds {
  double margin_tol = 1e-6;     ///< Type I: minimum feature separation
  double sigma_tol = 1e-8;      ///< Type II: minimum sigma_min(D_theta Phi)
  double weak_gap = 1e-3;       ///< Type III: weak moments must separate by more
  double classical_gap = 1e-8;  ///< Type III: classical moments coincide below (relative)
  double rank_rtol = 1e-10;
  double jet_rank_rtol = 1e-6;  ///< second-derivative blocks carry FD noise
};

struct InjectivityResult {
  double margin = std::numeric_limits<double>::infinity();
  std::optional<std::pair<std::size_t, std::size_t>> worst_pair;
  std::size_t pairs_checked = 0;
  bool flagged = false;  ///< margin < margin_tol
};

/// min over grid pairs with |theta1 - theta2| >= delta of |Phi(theta1) - Phi(theta2)|.
/// An empty pair set yields margin = +inf.
InjectivityResult injectivity_scan(const JointFeatureMap& map, const Eigen::VectorXd& lambda,
                                   std::span<const Eigen::VectorXd> grid, double delta,
                                   const Thresholds& thresholds = {});

struct RegularityResult {
  double min_det = std::numeric_limits<double>::infinity();
  double min_sigma = std::numeric_limits<double>::infinity();
  Eigen::VectorXd argmin;
  std::vector<double> det;        ///< det G per grid point
  std::vector<double> sigma_min;  ///< sigma_min(D_theta Phi) per grid point
  std::vector<int> rank;          ///< singular values of D_theta Phi above max(tol_used, sigma_tol)
  bool flagged = false;           ///< min_sigma < sigma_tol
};

RegularityResult info_regularity_scan(const JointFeatureMap& map, const Eigen::VectorXd& lambda,
                                      std::span<const Eigen::VectorXd> grid,
                                      const Thresholds& thresholds = {});

/// Moment coincidence of the log-normal and its Stieltjes perturbation.
struct StieltjesResult {
  double epsilon = 0.0;
  std::vector<int> classical_orders;
  std::vector<int> weak_orders;
  Eigen::VectorXd classical_gaps;      ///< |m_j(pert) - m_j| / m_j
  Eigen::VectorXd classical_gaps_abs;  ///< |m_j(pert) - m_j|
  Eigen::VectorXd weak_gaps;           ///< |w_j(pert) - w_j|
  bool classical_coincide = false;
  bool weak_separate = false;
};

StieltjesResult stieltjes_test(double epsilon, const Eigen::VectorXd& theta,
                               const KernelFamily& kernel, std::span<const int> weak_orders,
                               std::span<const int> classical_orders,
                               const Thresholds& thresholds = {}, const QuadConfig& cfg = {});

/// Moments of the tilted measure dQ = phi dP / Z and the Carleman series
/// sum_j m_{2j}^{-1/(2j)}.
struct CarlemanResult {
  double normaliser = 0.0;  ///< Z = w_0
  std::vector<int> j;
  std::vector<double> tilted_moments;  ///< E_Q[X^{2j}]
  std::vector<double> terms;           ///< m_{2j}^{-1/(2j)}
  std::vector<double> partial_sums;
  bool overflow = false;  ///< series truncated before j_max
};

CarlemanResult carleman_probe(const ModelSpec& model, const Eigen::VectorXd& theta,
                              const KernelFamily& kernel, int j_max, const QuadConfig& cfg = {});

/// Rank of the stack [D Phi; d_1 D Phi; ...; d_p D Phi], ((K+1)(1+p)) x p.
struct JetReport {
  RankReport first_order;
  RankReport second_order;  ///< second-derivative blocks alone
  RankReport stacked;
  Eigen::MatrixXd stack;
};

JetReport jet2_rank(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& features,
                    const Eigen::VectorXd& theta, double rank_rtol = 1e-6);
JetReport jet2_rank(const ModelSpec& model, const Eigen::VectorXd& theta,
                    const KernelFamily& kernel, const FeatureSpec& spec,
                    const QuadConfig& cfg = {}, double rank_rtol = 1e-6);

enum class Type3Status {
  not_applicable,          ///< classical moments determine the family
  classical_undefined,     ///< no classical moment map; weak features finite
  indeterminacy_broken,    ///< classical moments coincide, weak moments separate everywhere
  partially_broken,        ///< weak moments separate at some grid points only
  indeterminacy_persists   ///< weak moments separate nowhere
};

std::string_view to_string(Type3Status status);

struct Type0Verdict {
  bool classical_defined = true;
  bool weak_finite = true;
  bool flagged = false;  ///< classical map undefined (resolved when weak_finite)
};

struct Type3Verdict {
  Type3Status status = Type3Status::not_applicable;
  std::optional<StieltjesResult> evidence;  ///< grid point with the smallest weak gap
  std::vector<double> max_classical_gap;    ///< per grid point (relative)
  std::vector<double> max_weak_gap;         ///< per grid point
  int points_separated = 0;
};

struct Type4Profile {
  std::vector<int> stacked_rank;
  std::vector<int> second_order_rank;
  int min_stacked_rank = 0;
  int max_stacked_rank = 0;
};

struct DegeneracyReport {
  Eigen::VectorXd lambda;
  std::vector<Eigen::VectorXd> grid;
  std::vector<Eigen::VectorXd> features;  ///< Phi at each grid point
  double delta = 0.0;
  Thresholds thresholds;
  Type0Verdict type0;
  InjectivityResult type1;
  RegularityResult type2;
  Type3Verdict type3;
  Type4Profile type4;

  bool any_flag() const;
};

/// Classical-side facts the generic classifier cannot compute itself.
struct ClassicalFacts {
  bool moments_defined = true;
  std::vector<StieltjesResult> stieltjes;  ///< one per grid point, or empty
};

DegeneracyReport classify(const JointFeatureMap& map, const Eigen::VectorXd& lambda,
                          std::span<const Eigen::VectorXd> grid, double delta,
                          const Thresholds& thresholds, const ClassicalFacts& facts);

DegeneracyReport classify(const ModelSpec& model, const KernelFamily& kernel,
                          const FeatureSpec& spec, std::span<const Eigen::VectorXd> grid,
                          const Thresholds& thresholds = {}, const QuadConfig& cfg = {},
                          double delta = 0.0);

}  // namespace weaktrans
