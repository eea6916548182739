#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "weaktrans/errors.hpp"
#include "weaktrans/transversality.hpp"

using namespace weaktrans;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

VectorXd vec(std::initializer_list<double> v) {
  VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

JacobianDecomposition jd(const MatrixXd& t, const MatrixXd& l) {
  JacobianDecomposition j;
  j.d_theta = t;
  j.d_lambda = l;
  return j;
}

long long det_int(const std::vector<std::vector<long long>>& a) {
  const std::size_t n = a.size();
  if (n == 1) return a[0][0];
  long long total = 0;
  for (std::size_t c = 0; c < n; ++c) {
    std::vector<std::vector<long long>> minor;
    for (std::size_t r = 1; r < n; ++r) {
      std::vector<long long> row;
      for (std::size_t k = 0; k < n; ++k)
        if (k != c) row.push_back(a[r][k]);
      minor.push_back(row);
    }
    total += (c % 2 ? -1 : 1) * a[0][c] * det_int(minor);
  }
  return total;
}

// Largest k with a nonzero k x k minor.
int minor_rank(const std::vector<std::vector<long long>>& m) {
  const int rows = static_cast<int>(m.size()), cols = static_cast<int>(m[0].size());
  for (int k = std::min(rows, cols); k >= 1; --k) {
    for (unsigned rmask = 0; rmask < (1u << rows); ++rmask) {
      if (__builtin_popcount(rmask) != k) continue;
      for (unsigned cmask = 0; cmask < (1u << cols); ++cmask) {
        if (__builtin_popcount(cmask) != k) continue;
        std::vector<std::vector<long long>> sub;
        for (int r = 0; r < rows; ++r) {
          if (!(rmask >> r & 1)) continue;
          std::vector<long long> row;
          for (int c = 0; c < cols; ++c)
            if (cmask >> c & 1) row.push_back(m[r][c]);
          sub.push_back(row);
        }
        if (det_int(sub) != 0) return k;
      }
    }
  }
  return 0;
}

}  // namespace

TEST_CASE("numerical rank examples") {
  CHECK(numerical_rank(MatrixXd::Identity(3, 3)).numerical_rank == 3);
  MatrixXd m(2, 2);
  m << 1, 2, 2, 4;
  CHECK(numerical_rank(m).numerical_rank == 1);
  const auto z = numerical_rank(MatrixXd::Zero(3, 2));
  CHECK(z.numerical_rank == 0);
  CHECK_FALSE(z.marginal);
  const auto r = numerical_rank(MatrixXd::Identity(2, 3) * 5.0);
  CHECK(r.tol_used == doctest::Approx(1e-10 * 5.0 * 3));
  CHECK(r.rows == 2);
  CHECK(r.cols == 3);
  MatrixXd bad = MatrixXd::Identity(2, 2);
  bad(0, 1) = std::nan("");
  CHECK_THROWS_AS(numerical_rank(bad), DomainError);
}

TEST_CASE("numerical rank agrees with minor-based rank on small integer matrices") {
  std::mt19937 rng(20261016);
  std::uniform_int_distribution<int> entry(-3, 3), dim(1, 4), sparse(0, 3);
  for (int trial = 0; trial < 3000; ++trial) {
    const int rows = dim(rng), cols = dim(rng);
    std::vector<std::vector<long long>> exact(rows, std::vector<long long>(cols));
    MatrixXd m(rows, cols);
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c) {
        exact[r][c] = sparse(rng) == 0 ? 0 : entry(rng);
        m(r, c) = static_cast<double>(exact[r][c]);
      }
    // duplicate rows now and then so deficient ranks are common
    if (rows > 1 && trial % 3 == 0) {
      exact[rows - 1] = exact[0];
      m.row(rows - 1) = m.row(0);
    }
    CHECK(numerical_rank(m).numerical_rank == minor_rank(exact));
  }
}

TEST_CASE("marginal singular values are surfaced") {
  MatrixXd m = MatrixXd::Identity(2, 2);
  m(1, 1) = 3e-10;  // tol_used = 2e-10
  const auto r = numerical_rank(m);
  CHECK(r.marginal);
  m(1, 1) = 1e-3;
  CHECK_FALSE(numerical_rank(m).marginal);
}

TEST_CASE("normal projection examples") {
  const auto s1 = Stratum::coordinate(2, {0}, {0.0});
  const MatrixXd n1 = normal_projection(s1, vec({0.0, 5.0}));
  CHECK(n1.rows() == 1);
  CHECK(n1(0, 0) == doctest::Approx(1.0));
  CHECK(n1(0, 1) == 0.0);

  const auto s2 = Stratum::coordinate(3, {0, 1}, {0.0, 0.0});
  const MatrixXd n2 = normal_projection(s2, vec({0.0, 0.0, 2.0}));
  CHECK((n2 * n2.transpose() - MatrixXd::Identity(2, 2)).norm() < 1e-14);
  CHECK(n2.col(2).norm() < 1e-14);

  const auto circle = Stratum::custom(
      2, 1, [](const VectorXd& y) { return VectorXd::Constant(1, y.squaredNorm() - 1.0); },
      [](const VectorXd& y) { return MatrixXd(2.0 * y.transpose()); });
  const MatrixXd n3 = normal_projection(circle, vec({1.0, 0.0}));
  CHECK(n3(0, 0) == doctest::Approx(1.0));
  CHECK(std::abs(n3(0, 1)) < 1e-15);
}

TEST_CASE("normal projection preconditions") {
  const auto s = Stratum::coordinate(2, {0}, {0.0});
  CHECK_THROWS_AS(normal_projection(s, vec({0.5, 0.0})), DomainError);
  // within the Newton band the point is pulled onto the stratum
  CHECK_NOTHROW(normal_projection(s, vec({1e-6, 0.0})));
  const auto flat = Stratum::custom(
      2, 1, [](const VectorXd& y) { return VectorXd::Constant(1, y[0] * y[0]); },
      [](const VectorXd& y) { return MatrixXd(MatrixXd::Constant(1, 2, 0.0) + 0.0 * y.transpose()); });
  CHECK_THROWS_AS(normal_projection(flat, vec({0.0, 0.0})), DomainError);
}

TEST_CASE("determinant stratum") {
  const auto s = Stratum::determinant(2);
  CHECK(s.codim() == 1);
  CHECK(s.ambient_dim() == 4);
  const VectorXd y = vec({1.0, 2.0, 2.0, 4.0});
  CHECK(std::abs(s.level(y)[0]) < 1e-15);
  const MatrixXd n = normal_projection(s, y);
  // gradient of ad - bc is (d, -c, -b, a)
  const VectorXd g = vec({4.0, -2.0, -2.0, 1.0}).normalized();
  CHECK(std::abs(std::abs(n.row(0).dot(g)) - 1.0) < 1e-12);
}

TEST_CASE("transversality examples") {
  const auto s = Stratum::coordinate(2, {0}, {0.0});
  const auto full = jd(MatrixXd::Identity(2, 2), MatrixXd::Zero(2, 0));
  CHECK(check_transversal_at(full, s, vec({0.0, 0.0})).transversal);

  MatrixXd t(2, 1), l(2, 1);
  t << 0, 1;
  l << 0, 1;
  CHECK_FALSE(check_transversal_at(jd(t, l), s, vec({0.0, 0.0})).transversal);

  const auto off = check_transversal_at(jd(t, l), s, vec({1.0, 0.0}));
  CHECK_FALSE(off.on_stratum);
  CHECK(off.transversal);
}

TEST_CASE("componentwise examples") {
  const auto s = Stratum::coordinate(2, {0}, {0.0});
  MatrixXd t(2, 1), l(2, 1);
  t << 0, 1;
  l << 1, 0;
  auto c = check_componentwise(jd(t, l), s, vec({0.0, 0.0}));
  CHECK_FALSE(c.theta_only);
  CHECK(c.lambda_only);
  CHECK(c.joint);

  c = check_componentwise(jd(MatrixXd::Identity(2, 2), MatrixXd::Zero(2, 1)), s, vec({0.0, 0.0}));
  CHECK(c.theta_only);
  CHECK(c.joint);

  c = check_componentwise(jd(MatrixXd::Zero(2, 1), MatrixXd::Zero(2, 1)), s, vec({0.0, 0.0}));
  CHECK_FALSE(c.theta_only);
  CHECK_FALSE(c.lambda_only);
  CHECK_FALSE(c.joint);
}

TEST_CASE("componentwise joint verdict matches the direct check") {
  std::mt19937 rng(7);
  std::uniform_int_distribution<int> entry(-2, 2), cols(0, 2), dims(2, 4);
  for (int trial = 0; trial < 500; ++trial) {
    const int k1 = dims(rng);
    const int p = cols(rng), q = cols(rng);
    MatrixXd t(k1, p), l(k1, q);
    for (Eigen::Index i = 0; i < t.size(); ++i) t.data()[i] = entry(rng);
    for (Eigen::Index i = 0; i < l.size(); ++i) l.data()[i] = entry(rng);
    const int c = 1 + trial % k1;
    std::vector<int> idx(c);
    for (int i = 0; i < c; ++i) idx[i] = i;
    const auto s = Stratum::coordinate(k1, idx, std::vector<double>(c, 0.0));
    const VectorXd y = VectorXd::Zero(k1);
    const auto jac = jd(t, l);
    CHECK(check_componentwise(jac, s, y).joint == check_transversal_at(jac, s, y).transversal);
  }
}

TEST_CASE("submersion") {
  MatrixXd t(1, 1), l(1, 1);
  t << 0.0;
  l << 0.3;
  CHECK(check_submersion(jd(t, l)).holds);
  CHECK_FALSE(check_submersion(jd(MatrixXd::Identity(3, 1), MatrixXd::Ones(3, 1))).holds);
}

TEST_CASE("submersion implies transversality to coordinate strata") {
  std::mt19937 rng(11);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 100; ++trial) {
    MatrixXd t(3, 2), l(3, 2);
    for (Eigen::Index i = 0; i < 6; ++i) t.data()[i] = g(rng), l.data()[i] = g(rng);
    const auto jac = jd(t, l);
    REQUIRE(check_submersion(jac).holds);
    for (int c = 1; c <= 3; ++c) {
      std::vector<int> idx(c);
      for (int i = 0; i < c; ++i) idx[i] = (trial + i) % 3;
      const auto s = Stratum::coordinate(3, idx, std::vector<double>(c, 0.0));
      CHECK(check_transversal_at(jac, s, VectorXd::Zero(3)).transversal);
    }
  }
}

TEST_CASE("enrichment gain") {
  MatrixXd t(2, 1), l(2, 1);
  t << 1, 0;
  l << 0, 1;
  CHECK(enrichment_gain(jd(t, l)) == 1);
  l << 2, 0;
  CHECK(enrichment_gain(jd(t, l)) == 0);
  CHECK(enrichment_gain(jd(MatrixXd::Zero(2, 1), MatrixXd::Identity(2, 2))) == 2);

  std::mt19937 rng(3);
  std::uniform_int_distribution<int> entry(-1, 1);
  for (int trial = 0; trial < 300; ++trial) {
    MatrixXd a(3, 2), b(3, 2);
    for (Eigen::Index i = 0; i < 6; ++i) a.data()[i] = entry(rng), b.data()[i] = entry(rng);
    const int gain = enrichment_gain(jd(a, b));
    CHECK(gain >= 0);
    CHECK(gain <= 2);
    // one extra column never lowers the joint rank
    MatrixXd wider(3, 3);
    wider << a, b.col(0);
    CHECK(numerical_rank(wider).numerical_rank >= numerical_rank(a).numerical_rank);
  }
}

TEST_CASE("codimension above source dimension: transversal only off the stratum") {
  // p + q = 2 with a full-rank Jacobian, stratum of codimension 3 in R^3.
  MatrixXd t(3, 1), l(3, 1);
  t << 1, 0, 0;
  l << 0, 1, 0;
  const auto jac = jd(t, l);
  const auto s = Stratum::coordinate(3, {0, 1, 2}, {0.0, 0.0, 0.0});
  CHECK_FALSE(check_transversal_at(jac, s, VectorXd::Zero(3)).transversal);
  const auto miss = check_transversal_at(jac, s, vec({0.0, 0.0, 1.0}));
  CHECK_FALSE(miss.on_stratum);
  CHECK(miss.transversal);
}

TEST_CASE("lambda sweep") {
  const auto map = make_joint_map(ModelSpec::gaussian_location(1.0), KernelFamily::gaussian(1.0),
                                  FeatureSpec::moments({0}), JacobianMethod::analytic_score);
  std::vector<VectorXd> grid;
  for (double mu = -3.0; mu <= 3.0; mu += 0.5) grid.push_back(VectorXd::Constant(1, mu));
  const std::vector<double> scales = {0.5, 1.0, 2.0, 3.0, 4.0, 5.0};

  const auto table = lambda_sweep(map, scales, grid, SweepIndicator::submersion_fail());
  REQUIRE(table.rows.size() == scales.size());
  CHECK(table.bad_lambdas.empty());
  CHECK(table.bad_set_isolated());
  for (const auto& r : table.rows) CHECK(r.total == static_cast<int>(grid.size()));

  const auto unreachable = Stratum::coordinate(1, {0}, {5.0});
  const auto hit = lambda_sweep(map, scales, grid, SweepIndicator::stratum_hit(unreachable));
  for (const auto& r : hit.rows) CHECK(r.fraction == 0.0);

  const auto flat = make_joint_map(1, 0, 2, [](const VectorXd&, const VectorXd&) {
    return VectorXd::Constant(2, 1.0);
  });
  std::vector<VectorXd> lambdas = {VectorXd(0)};
  const auto dead = lambda_sweep(flat, lambdas, grid, SweepIndicator::submersion_fail());
  CHECK(dead.rows[0].fraction == 1.0);
  CHECK(dead.bad_lambdas.size() == 1);
}

TEST_CASE("isolated bad set") {
  SweepTable t;
  for (int i = 0; i < 5; ++i) t.rows.push_back({VectorXd::Constant(1, i), 0, 1, 0.0, 0});
  t.rows[1].fired = 1;
  t.rows[1].fraction = 1.0;
  t.rows[3].fired = 1;
  t.rows[3].fraction = 1.0;
  t.bad_lambdas = {t.rows[1].lambda, t.rows[3].lambda};
  CHECK(t.bad_set_isolated());
  t.rows[2].fired = 1;
  t.rows[2].fraction = 1.0;
  t.bad_lambdas.push_back(t.rows[2].lambda);
  CHECK_FALSE(t.bad_set_isolated());
}
