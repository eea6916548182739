#include "weaktrans/degeneracy.hpp"

#include <algorithm>
#include <cmath>

#include "parallel.hpp"
#include "weaktrans/errors.hpp"

namespace weaktrans {

namespace {

// int x^j w(x) f_{mu,sigma}(x) dx in log coordinates. x^j f is formed as one
// exponential so it cannot overflow, and the absolute tolerance is scaled by
// `magnitude` so cancelling integrands still converge.
double lognormal_integral(const Eigen::VectorXd& theta, const std::function<double(double)>& w,
                          int j, double magnitude, const QuadConfig& cfg) {
  const ModelSpec base = ModelSpec::lognormal();
  base.validate(theta);
  QuadConfig local = cfg;
  local.transform = Transform::log_substitution;
  local.abs_tol = std::max(cfg.abs_tol * std::min(1.0, magnitude), cfg.rel_tol * magnitude);
  const QuadHint hint{theta[0] + j * theta[1] * theta[1], theta[1]};
  return integrate(
             [&](double x) {
               const double wx = w(x);
               if (wx == 0.0) return 0.0;
               return wx * std::exp(j * std::log(x) + base.log_density(x, theta));
             },
             Interval::positive_half_line(), local, hint)
      .value;
}

}  // namespace

InfoMatrix weak_info(const JointFeatureMap& map, const Eigen::VectorXd& theta,
                     const Eigen::VectorXd& lambda) {
  InfoMatrix info;
  info.theta = theta;
  info.lambda = lambda;
  info.d_theta = map.jacobian(theta, lambda).d_theta;
  info.G = info.d_theta.transpose() * info.d_theta;
  return info;
}

InfoMatrix weak_info(const ModelSpec& model, const Eigen::VectorXd& theta,
                     const KernelFamily& kernel, const FeatureSpec& spec, const QuadConfig& cfg) {
  const JacobianMethod method = model.has_analytic_score() ? JacobianMethod::analytic_score
                                                           : JacobianMethod::finite_difference;
  const auto map = make_joint_map(model, kernel, spec, method, cfg);
  return weak_info(map, theta, Eigen::VectorXd::Constant(1, kernel.scale()));
}

InjectivityResult injectivity_scan(const JointFeatureMap& map, const Eigen::VectorXd& lambda,
                                   std::span<const Eigen::VectorXd> grid, double delta,
                                   const Thresholds& thresholds) {
  if (grid.size() < 2) throw DomainError("injectivity_scan: grid needs at least two points");
  std::vector<Eigen::VectorXd> values(grid.size());
  detail::parallel_for(grid.size(), [&](std::size_t i) { values[i] = map.features(grid[i], lambda); });
  InjectivityResult r;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    for (std::size_t k = i + 1; k < grid.size(); ++k) {
      if ((grid[i] - grid[k]).norm() < delta) continue;
      ++r.pairs_checked;
      const double gap = (values[i] - values[k]).norm();
      if (gap < r.margin) {
        r.margin = gap;
        r.worst_pair = std::make_pair(i, k);
      }
    }
  }
  r.flagged = r.margin < thresholds.margin_tol;
  return r;
}

RegularityResult info_regularity_scan(const JointFeatureMap& map, const Eigen::VectorXd& lambda,
                                      std::span<const Eigen::VectorXd> grid,
                                      const Thresholds& thresholds) {
  if (grid.empty()) throw DomainError("info_regularity_scan: grid must be non-empty");
  RegularityResult r;
  r.det.resize(grid.size());
  r.sigma_min.resize(grid.size());
  r.rank.resize(grid.size());
  detail::parallel_for(grid.size(), [&](std::size_t i) {
    const InfoMatrix info = weak_info(map, grid[i], lambda);
    r.det[i] = info.G.determinant();
    const RankReport rr = numerical_rank(info.d_theta, thresholds.rank_rtol);
    const Eigen::Index p = info.d_theta.cols();
    // sigma_min(G^{1/2}) = p-th singular value of D_theta Phi (0 if fewer rows).
    r.sigma_min[i] = rr.singular_values.size() >= p && p > 0 ? rr.singular_values[p - 1] : 0.0;
    // A purely relative threshold calls a 1e-17 noise column full rank.
    const double floor = std::max(rr.tol_used, thresholds.sigma_tol);
    r.rank[i] = static_cast<int>((rr.singular_values.array() > floor).count());
  });
  for (std::size_t i = 0; i < grid.size(); ++i) {
    r.min_det = std::min(r.min_det, r.det[i]);
    if (r.argmin.size() == 0 || r.sigma_min[i] < r.min_sigma) {
      r.min_sigma = r.sigma_min[i];
      r.argmin = grid[i];
    }
  }
  r.flagged = r.min_sigma < thresholds.sigma_tol;
  return r;
}

StieltjesResult stieltjes_test(double epsilon, const Eigen::VectorXd& theta,
                               const KernelFamily& kernel, std::span<const int> weak_orders,
                               std::span<const int> classical_orders, const Thresholds& thresholds,
                               const QuadConfig& cfg) {
  if (!(std::abs(epsilon) <= 1.0)) throw DomainError("stieltjes_test: |epsilon| must be <= 1");
  if (kernel.dim() != 1) throw DomainError("stieltjes_test: kernel must be one-dimensional");
  ModelSpec::lognormal().validate(theta);
  StieltjesResult r;
  r.epsilon = epsilon;
  r.classical_orders.assign(classical_orders.begin(), classical_orders.end());
  r.weak_orders.assign(weak_orders.begin(), weak_orders.end());
  r.classical_gaps.resize(static_cast<Eigen::Index>(classical_orders.size()));
  r.classical_gaps_abs.resize(r.classical_gaps.size());
  r.weak_gaps.resize(static_cast<Eigen::Index>(weak_orders.size()));

  auto perturbation = [epsilon, &theta](double x) {
    return epsilon * stieltjes_perturbation(x, theta);
  };
  auto one = [](double) { return 1.0; };
  auto phi = [&](double x) { return kernel.eval(x); };
  auto phi_pert = [&](double x) {
    const double k = kernel.eval(x);
    return k == 0.0 ? 0.0 : k * perturbation(x);
  };

  // The gap is the perturbation integral itself, not a difference of two
  // large quadrature values.
  for (std::size_t i = 0; i < classical_orders.size(); ++i) {
    const int j = classical_orders[i];
    if (j < 0) throw DomainError("stieltjes_test: orders must be nonnegative");
    const double m = lognormal_integral(theta, one, j, 1.0, cfg);
    const double gap = epsilon == 0.0
                           ? 0.0
                           : std::abs(lognormal_integral(theta, perturbation, j, m, cfg));
    r.classical_gaps_abs[static_cast<Eigen::Index>(i)] = gap;
    r.classical_gaps[static_cast<Eigen::Index>(i)] = gap / m;
  }
  for (std::size_t i = 0; i < weak_orders.size(); ++i) {
    const int j = weak_orders[i];
    if (j < 0) throw DomainError("stieltjes_test: orders must be nonnegative");
    const double w = lognormal_integral(theta, phi, j, 1.0, cfg);
    r.weak_gaps[static_cast<Eigen::Index>(i)] =
        epsilon == 0.0 ? 0.0 : std::abs(lognormal_integral(theta, phi_pert, j, w, cfg));
  }
  r.classical_coincide =
      r.classical_gaps.size() == 0 || r.classical_gaps.maxCoeff() < thresholds.classical_gap;
  r.weak_separate = r.weak_gaps.size() > 0 && r.weak_gaps.maxCoeff() > thresholds.weak_gap;
  return r;
}

CarlemanResult carleman_probe(const ModelSpec& model, const Eigen::VectorXd& theta,
                              const KernelFamily& kernel, int j_max, const QuadConfig& cfg) {
  if (j_max < 1) throw DomainError("carleman_probe: j_max must be >= 1");
  CarlemanResult r;
  r.normaliser = weak_moment(model, theta, kernel, 0, cfg);
  if (!(r.normaliser > 0.0)) throw NumericalError("carleman_probe: tilting constant is not positive");
  double sum = 0.0;
  for (int j = 1; j <= j_max; ++j) {
    double moment = 0.0;
    try {
      moment = weak_moment(model, theta, kernel, 2 * j, cfg) / r.normaliser;
    } catch (const NumericalError&) {
      r.overflow = true;
      break;
    }
    if (!std::isfinite(moment) || !(moment > 0.0)) {
      r.overflow = true;
      break;
    }
    const double term = std::pow(moment, -1.0 / (2.0 * j));
    sum += term;
    r.j.push_back(j);
    r.tilted_moments.push_back(moment);
    r.terms.push_back(term);
    r.partial_sums.push_back(sum);
  }
  return r;
}

JetReport jet2_rank(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& features,
                    const Eigen::VectorXd& theta, double rank_rtol) {
  const Eigen::Index p = theta.size();
  const Eigen::MatrixXd first = finite_difference_jacobian(features, theta);
  const Eigen::Index n = first.rows();
  // Second derivatives with step eps^{1/4}: truncation and rounding both ~1e-8.
  static const double quarter_eps = std::pow(std::numeric_limits<double>::epsilon(), 0.25);
  Eigen::VectorXd h(p);
  for (Eigen::Index a = 0; a < p; ++a) h[a] = quarter_eps * std::max(1.0, std::abs(theta[a]));
  const Eigen::VectorXd center = features(theta);
  Eigen::MatrixXd second(n * p, p);
  for (Eigen::Index a = 0; a < p; ++a) {
    for (Eigen::Index b = a; b < p; ++b) {
      Eigen::VectorXd d2;
      if (a == b) {
        Eigen::VectorXd up = theta, down = theta;
        up[a] += h[a];
        down[a] -= h[a];
        d2 = (features(up) - 2.0 * center + features(down)) / (h[a] * h[a]);
      } else {
        auto shifted = [&](double sa, double sb) {
          Eigen::VectorXd t = theta;
          t[a] += sa * h[a];
          t[b] += sb * h[b];
          return features(t);
        };
        d2 = (shifted(1, 1) - shifted(1, -1) - shifted(-1, 1) + shifted(-1, -1)) /
             (4.0 * h[a] * h[b]);
      }
      second.block(a * n, b, n, 1) = d2;
      second.block(b * n, a, n, 1) = d2;
    }
  }
  JetReport r;
  r.stack.resize(n * (1 + p), p);
  r.stack << first, second;
  r.first_order = numerical_rank(first, rank_rtol);
  r.second_order = numerical_rank(second, rank_rtol);
  r.stacked = numerical_rank(r.stack, rank_rtol);
  return r;
}

JetReport jet2_rank(const ModelSpec& model, const Eigen::VectorXd& theta,
                    const KernelFamily& kernel, const FeatureSpec& spec, const QuadConfig& cfg,
                    double rank_rtol) {
  return jet2_rank(
      [&](const Eigen::VectorXd& t) { return feature_map(model, t, kernel, spec, cfg).values; },
      theta, rank_rtol);
}

std::string_view to_string(Type3Status status) {
  switch (status) {
    case Type3Status::not_applicable:
      return "not_applicable";
    case Type3Status::classical_undefined:
      return "classical_undefined";
    case Type3Status::indeterminacy_broken:
      return "indeterminacy_broken";
    case Type3Status::partially_broken:
      return "partially_broken";
    case Type3Status::indeterminacy_persists:
      return "indeterminacy_persists";
  }
  return "unknown";
}

bool DegeneracyReport::any_flag() const {
  return type0.flagged || !type0.weak_finite || type1.flagged || type2.flagged ||
         type3.status == Type3Status::indeterminacy_persists ||
         type3.status == Type3Status::partially_broken ||
         type3.status == Type3Status::classical_undefined;
}

DegeneracyReport classify(const JointFeatureMap& map, const Eigen::VectorXd& lambda,
                          std::span<const Eigen::VectorXd> grid, double delta,
                          const Thresholds& thresholds, const ClassicalFacts& facts) {
  if (grid.empty()) throw DomainError("classify: grid must be non-empty");
  DegeneracyReport report;
  report.lambda = lambda;
  report.grid.assign(grid.begin(), grid.end());
  report.delta = delta;
  report.thresholds = thresholds;

  report.features.resize(grid.size());
  detail::parallel_for(grid.size(),
                       [&](std::size_t i) { report.features[i] = map.features(grid[i], lambda); });
  for (const auto& f : report.features) {
    if (!f.allFinite()) report.type0.weak_finite = false;
  }
  report.type0.classical_defined = facts.moments_defined;
  report.type0.flagged = !facts.moments_defined;

  if (grid.size() >= 2) {
    report.type1 = injectivity_scan(map, lambda, grid, delta, thresholds);
  }
  report.type2 = info_regularity_scan(map, lambda, grid, thresholds);

  if (!facts.moments_defined) {
    report.type3.status = Type3Status::classical_undefined;
  } else if (!facts.stieltjes.empty()) {
    if (facts.stieltjes.size() != grid.size()) {
      throw DomainError("classify: one Stieltjes result per grid point is required");
    }
    Type3Verdict& t3 = report.type3;
    bool coincide = true;
    for (const auto& r : facts.stieltjes) {
      coincide = coincide && r.classical_coincide;
      const double weak = r.weak_gaps.size() ? r.weak_gaps.maxCoeff() : 0.0;
      t3.max_classical_gap.push_back(r.classical_gaps.size() ? r.classical_gaps.maxCoeff() : 0.0);
      t3.max_weak_gap.push_back(weak);
      if (r.weak_separate) ++t3.points_separated;
      if (!t3.evidence || weak < t3.evidence->weak_gaps.maxCoeff()) t3.evidence = r;
    }
    const int n = static_cast<int>(grid.size());
    if (!coincide || t3.points_separated == 0) {
      t3.status = Type3Status::indeterminacy_persists;
    } else {
      t3.status = t3.points_separated == n ? Type3Status::indeterminacy_broken
                                           : Type3Status::partially_broken;
    }
  }

  report.type4.stacked_rank.resize(grid.size());
  report.type4.second_order_rank.resize(grid.size());
  detail::parallel_for(grid.size(), [&](std::size_t i) {
    const JetReport jr = jet2_rank(
        [&](const Eigen::VectorXd& t) { return map.features(t, lambda); }, grid[i],
        thresholds.jet_rank_rtol);
    report.type4.stacked_rank[i] = jr.stacked.numerical_rank;
    report.type4.second_order_rank[i] = jr.second_order.numerical_rank;
  });
  report.type4.min_stacked_rank =
      *std::min_element(report.type4.stacked_rank.begin(), report.type4.stacked_rank.end());
  report.type4.max_stacked_rank =
      *std::max_element(report.type4.stacked_rank.begin(), report.type4.stacked_rank.end());
  return report;
}

DegeneracyReport classify(const ModelSpec& model, const KernelFamily& kernel,
                          const FeatureSpec& spec, std::span<const Eigen::VectorXd> grid,
                          const Thresholds& thresholds, const QuadConfig& cfg, double delta) {
  if (grid.empty()) throw DomainError("classify: grid must be non-empty");
  for (const auto& theta : grid) model.validate(theta);
  const JacobianMethod method = model.has_analytic_score() ? JacobianMethod::analytic_score
                                                           : JacobianMethod::finite_difference;
  const auto map = make_joint_map(model, kernel, spec, method, cfg);

  ClassicalFacts facts;
  if (!model.multivariate()) {
    if (spec.kind == FeatureKind::moments) {
      for (int j : spec.orders) {
        if (!model.classical_moment(grid.front(), j)) facts.moments_defined = false;
      }
    } else {
      facts.moments_defined = model.classical_moments_exist();
    }
  }
  if (model.family() == Family::lognormal || model.family() == Family::lognormal_stieltjes) {
    const double eps = model.family() == Family::lognormal_stieltjes ? model.epsilon() : 0.5;
    std::vector<int> weak_orders = spec.kind == FeatureKind::moments
                                       ? spec.orders
                                       : std::vector<int>{0, 1, 2, 3, 4};
    std::vector<int> classical_orders(11);
    for (int j = 0; j <= 10; ++j) classical_orders[static_cast<std::size_t>(j)] = j;
    facts.stieltjes.resize(grid.size());
    detail::parallel_for(grid.size(), [&](std::size_t i) {
      facts.stieltjes[i] = stieltjes_test(eps, grid[i], kernel, weak_orders, classical_orders,
                                          thresholds, cfg);
    });
  }
  return classify(map, Eigen::VectorXd::Constant(1, kernel.scale()), grid, delta, thresholds,
                  facts);
}

}  // namespace weaktrans
