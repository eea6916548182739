#include "weaktrans/transversality.hpp"

#include <algorithm>
#include <cmath>

#include "parallel.hpp"
#include "weaktrans/errors.hpp"

namespace weaktrans {

namespace {

Eigen::MatrixXd gram_schmidt_rows(const Eigen::MatrixXd& m) {
  Eigen::MatrixXd q = m;
  for (Eigen::Index i = 0; i < q.rows(); ++i) {
    for (Eigen::Index k = 0; k < i; ++k) q.row(i) -= q.row(i).dot(q.row(k)) * q.row(k);
    // second pass keeps the basis orthogonal to working precision
    for (Eigen::Index k = 0; k < i; ++k) q.row(i) -= q.row(i).dot(q.row(k)) * q.row(k);
    q.row(i).normalize();
  }
  return q;
}

double max_abs(const Eigen::VectorXd& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

// Brings y onto the stratum (one Newton step inside the band) or reports it
// as off-stratum.
std::optional<Eigen::VectorXd> foot_point(const Stratum& stratum, const Eigen::VectorXd& y,
                                          const TransversalityTolerances& tol) {
  const Eigen::VectorXd g = stratum.level(y);
  const double residual = max_abs(g);
  if (residual <= tol.on_stratum_tol) return y;
  if (residual > tol.newton_band) return std::nullopt;
  const Eigen::MatrixXd dg = stratum.level_jacobian(y);
  const Eigen::VectorXd step = dg.transpose() * (dg * dg.transpose()).ldlt().solve(g);
  return Eigen::VectorXd(y - step);
}

}  // namespace

RankReport numerical_rank(const Eigen::MatrixXd& m, double rank_rtol) {
  if (!m.allFinite()) throw DomainError("numerical_rank: matrix has non-finite entries");
  if (!(rank_rtol > 0.0)) throw DomainError("numerical_rank: rank_rtol must be positive");
  RankReport r;
  r.rows = m.rows();
  r.cols = m.cols();
  if (m.size() == 0) return r;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  r.singular_values = svd.singularValues();
  if (!r.singular_values.allFinite()) throw NumericalError("numerical_rank: SVD did not converge");
  const double sigma_max = r.singular_values.size() ? r.singular_values[0] : 0.0;
  r.tol_used = rank_rtol * sigma_max * static_cast<double>(std::max(m.rows(), m.cols()));
  for (Eigen::Index i = 0; i < r.singular_values.size(); ++i) {
    const double s = r.singular_values[i];
    if (s > r.tol_used) ++r.numerical_rank;
    if (r.tol_used > 0.0 && s > r.tol_used / 10.0 && s <= r.tol_used * 10.0) r.marginal = true;
  }
  return r;
}

std::string_view to_string(StratumKind kind) {
  switch (kind) {
    case StratumKind::coordinate:
      return "coordinate";
    case StratumKind::rank_deficiency:
      return "rank_deficiency";
    case StratumKind::custom:
      return "custom";
  }
  return "unknown";
}

Stratum Stratum::coordinate(int ambient_dim, std::vector<int> indices,
                            std::vector<double> values) {
  if (indices.empty() || indices.size() != values.size()) {
    throw DomainError("coordinate stratum needs matching non-empty indices and values");
  }
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] < 0 || indices[i] >= ambient_dim) {
      throw DomainError("coordinate stratum index out of range");
    }
    for (std::size_t k = 0; k < i; ++k) {
      if (indices[k] == indices[i]) throw DomainError("coordinate stratum repeats an index");
    }
  }
  auto g = [indices, values](const Eigen::VectorXd& y) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(indices.size()));
    for (std::size_t i = 0; i < indices.size(); ++i) {
      out[static_cast<Eigen::Index>(i)] = y[indices[i]] - values[i];
    }
    return out;
  };
  auto dg = [indices, ambient_dim](const Eigen::VectorXd&) {
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(indices.size()),
                                                ambient_dim);
    for (std::size_t i = 0; i < indices.size(); ++i) {
      out(static_cast<Eigen::Index>(i), indices[i]) = 1.0;
    }
    return out;
  };
  Stratum s(StratumKind::coordinate, ambient_dim, static_cast<int>(indices.size()), g, dg);
  s.indices_ = std::move(indices);
  s.values_ = std::move(values);
  return s;
}

Stratum Stratum::determinant(int n) {
  if (n < 1) throw DomainError("determinant stratum needs n >= 1");
  auto as_matrix = [n](const Eigen::VectorXd& y) {
    if (y.size() != n * n) throw DomainError("determinant stratum: point has wrong dimension");
    Eigen::MatrixXd m(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) m(i, j) = y[i * n + j];
    return m;
  };
  auto g = [as_matrix](const Eigen::VectorXd& y) {
    return Eigen::VectorXd::Constant(1, as_matrix(y).determinant());
  };
  // d det / d m_ij is the (i, j) cofactor.
  auto dg = [as_matrix, n](const Eigen::VectorXd& y) {
    const Eigen::MatrixXd m = as_matrix(y);
    Eigen::MatrixXd out(1, n * n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        double cof = 1.0;
        if (n > 1) {
          Eigen::MatrixXd minor(n - 1, n - 1);
          for (int r = 0, rr = 0; r < n; ++r) {
            if (r == i) continue;
            for (int c = 0, cc = 0; c < n; ++c) {
              if (c == j) continue;
              minor(rr, cc++) = m(r, c);
            }
            ++rr;
          }
          cof = minor.determinant();
        }
        out(0, i * n + j) = ((i + j) % 2 == 0 ? 1.0 : -1.0) * cof;
      }
    }
    return out;
  };
  return Stratum(StratumKind::rank_deficiency, n * n, 1, g, dg);
}

Stratum Stratum::custom(int ambient_dim, int codim, LevelMap g, LevelJacobian dg) {
  if (codim < 1 || codim > ambient_dim) throw DomainError("custom stratum: invalid codimension");
  if (!g || !dg) throw DomainError("custom stratum needs a level map and its Jacobian");
  return Stratum(StratumKind::custom, ambient_dim, codim, std::move(g), std::move(dg));
}

Eigen::VectorXd Stratum::level(const Eigen::VectorXd& y) const {
  if (y.size() != ambient_) throw DomainError("stratum: point has wrong dimension");
  return g_(y);
}

Eigen::MatrixXd Stratum::level_jacobian(const Eigen::VectorXd& y) const {
  if (y.size() != ambient_) throw DomainError("stratum: point has wrong dimension");
  return dg_(y);
}

Eigen::MatrixXd normal_projection(const Stratum& stratum, const Eigen::VectorXd& y,
                                  const TransversalityTolerances& tol) {
  const auto foot = foot_point(stratum, y, tol);
  if (!foot) throw DomainError("normal_projection: point is not on the stratum");
  const Eigen::MatrixXd dg = stratum.level_jacobian(*foot);
  const RankReport r = numerical_rank(dg, tol.rank_rtol);
  if (r.numerical_rank < stratum.codim()) {
    throw DomainError("normal_projection: level Jacobian is rank deficient; stratum is not smooth here");
  }
  return gram_schmidt_rows(dg);
}

TransversalityVerdict check_transversal_at(const JacobianDecomposition& jac,
                                           const Stratum& stratum, const Eigen::VectorXd& y,
                                           const TransversalityTolerances& tol) {
  if (jac.features() != stratum.ambient_dim()) {
    throw DomainError("check_transversal_at: Jacobian rows do not match stratum ambient dimension");
  }
  TransversalityVerdict v;
  if (!foot_point(stratum, y, tol)) {
    v.on_stratum = false;
    v.transversal = true;
    return v;
  }
  const Eigen::MatrixXd normal = normal_projection(stratum, y, tol);
  v.report = numerical_rank(normal * jac.joint(), tol.rank_rtol);
  v.transversal = v.report.numerical_rank == stratum.codim();
  return v;
}

ComponentwiseVerdict check_componentwise(const JacobianDecomposition& jac, const Stratum& stratum,
                                         const Eigen::VectorXd& y,
                                         const TransversalityTolerances& tol) {
  if (jac.features() != stratum.ambient_dim()) {
    throw DomainError("check_componentwise: Jacobian rows do not match stratum ambient dimension");
  }
  ComponentwiseVerdict v;
  if (!foot_point(stratum, y, tol)) {
    v.on_stratum = false;
    v.theta_only = v.lambda_only = v.joint = true;
    return v;
  }
  const Eigen::MatrixXd normal = normal_projection(stratum, y, tol);
  const Eigen::MatrixXd pt = normal * jac.d_theta;
  const Eigen::MatrixXd pl = normal * jac.d_lambda;
  Eigen::MatrixXd both(pt.rows(), pt.cols() + pl.cols());
  both << pt, pl;
  const int c = stratum.codim();
  v.theta_report = numerical_rank(pt, tol.rank_rtol);
  v.lambda_report = numerical_rank(pl, tol.rank_rtol);
  v.joint_report = numerical_rank(both, tol.rank_rtol);
  v.theta_only = v.theta_report.numerical_rank == c;
  v.lambda_only = v.lambda_report.numerical_rank == c;
  v.joint = v.joint_report.numerical_rank == c;
  return v;
}

RankVerdict check_submersion(const JacobianDecomposition& jac, double rank_rtol) {
  RankVerdict v;
  v.report = numerical_rank(jac.joint(), rank_rtol);
  v.holds = v.report.numerical_rank == jac.features();
  return v;
}

int enrichment_gain(const JacobianDecomposition& jac, double rank_rtol) {
  const int joint = numerical_rank(jac.joint(), rank_rtol).numerical_rank;
  const int model = numerical_rank(jac.d_theta, rank_rtol).numerical_rank;
  return joint - model;
}

std::string_view to_string(SweepIndicatorKind kind) {
  switch (kind) {
    case SweepIndicatorKind::submersion_fail:
      return "submersion_fail";
    case SweepIndicatorKind::info_singular:
      return "info_singular";
    case SweepIndicatorKind::stratum_hit:
      return "stratum_hit";
  }
  return "unknown";
}

bool SweepTable::bad_set_isolated(int max_bad) const {
  int bad = 0;
  bool previous_bad = false;
  for (const auto& row : rows) {
    const bool is_bad = row.fired > 0;
    if (is_bad && previous_bad) return false;
    bad += is_bad ? 1 : 0;
    previous_bad = is_bad;
  }
  return bad <= max_bad;
}

SweepTable lambda_sweep(const JointFeatureMap& map, std::span<const Eigen::VectorXd> kernel_grid,
                        std::span<const Eigen::VectorXd> theta_grid,
                        const SweepIndicator& indicator, const TransversalityTolerances& tol) {
  if (kernel_grid.empty() || theta_grid.empty()) {
    throw DomainError("lambda_sweep: grids must be non-empty");
  }
  if (indicator.kind == SweepIndicatorKind::stratum_hit && !indicator.stratum) {
    throw DomainError("lambda_sweep: stratum_hit indicator needs a stratum");
  }
  const std::size_t n_theta = theta_grid.size();
  const std::size_t cells = kernel_grid.size() * n_theta;
  std::vector<char> fired(cells, 0);
  std::vector<char> marginal(cells, 0);

  detail::parallel_for(cells, [&](std::size_t cell) {
    const auto& lambda = kernel_grid[cell / n_theta];
    const auto& theta = theta_grid[cell % n_theta];
    const JacobianDecomposition jac = map.jacobian(theta, lambda);
    bool bad = false;
    bool unsure = false;
    switch (indicator.kind) {
      case SweepIndicatorKind::submersion_fail: {
        const RankVerdict v = check_submersion(jac, tol.rank_rtol);
        bad = !v.holds;
        unsure = v.report.marginal;
        break;
      }
      case SweepIndicatorKind::info_singular: {
        const RankReport r = numerical_rank(jac.d_theta, tol.rank_rtol);
        bad = r.numerical_rank < map.param_dim;
        unsure = r.marginal;
        break;
      }
      case SweepIndicatorKind::stratum_hit: {
        const Eigen::VectorXd y = map.features(theta, lambda);
        const TransversalityVerdict v = check_transversal_at(jac, *indicator.stratum, y, tol);
        bad = v.on_stratum && !v.transversal;
        unsure = v.on_stratum && v.report.marginal;
        break;
      }
    }
    fired[cell] = bad ? 1 : 0;
    marginal[cell] = unsure ? 1 : 0;
  });

  SweepTable table;
  for (std::size_t l = 0; l < kernel_grid.size(); ++l) {
    SweepRow row;
    row.lambda = kernel_grid[l];
    row.total = static_cast<int>(n_theta);
    for (std::size_t t = 0; t < n_theta; ++t) {
      row.fired += fired[l * n_theta + t];
      row.marginal += marginal[l * n_theta + t];
    }
    row.fraction = static_cast<double>(row.fired) / static_cast<double>(row.total);
    if (row.fired > 0) table.bad_lambdas.push_back(row.lambda);
    table.rows.push_back(std::move(row));
  }
  return table;
}

SweepTable lambda_sweep(const JointFeatureMap& map, std::span<const double> scales,
                        std::span<const Eigen::VectorXd> theta_grid,
                        const SweepIndicator& indicator, const TransversalityTolerances& tol) {
  std::vector<Eigen::VectorXd> grid;
  grid.reserve(scales.size());
  for (double s : scales) grid.push_back(Eigen::VectorXd::Constant(1, s));
  return lambda_sweep(map, grid, theta_grid, indicator, tol);
}

}  // namespace weaktrans
