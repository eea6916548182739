#include <doctest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "oracle_values.hpp"
#include "weaktrans/degeneracy.hpp"
#include "weaktrans/errors.hpp"

using namespace weaktrans;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

VectorXd v1(double a) { return VectorXd::Constant(1, a); }
VectorXd v2(double a, double b) {
  VectorXd out(2);
  out << a, b;
  return out;
}

std::vector<int> range(int lo, int hi) {
  std::vector<int> out(hi - lo + 1);
  std::iota(out.begin(), out.end(), lo);
  return out;
}

std::vector<VectorXd> grid2(double a0, double a1, int na, double b0, double b1, int nb) {
  std::vector<VectorXd> out;
  for (int i = 0; i < na; ++i)
    for (int j = 0; j < nb; ++j)
      out.push_back(v2(a0 + (a1 - a0) * i / (na - 1), b0 + (b1 - b0) * j / (nb - 1)));
  return out;
}

std::vector<VectorXd> grid1(double a0, double a1, int n) {
  std::vector<VectorXd> out;
  for (int i = 0; i < n; ++i) out.push_back(v1(a0 + (a1 - a0) * i / (n - 1)));
  return out;
}

}  // namespace

TEST_CASE("weak information is the gram matrix of the jacobian") {
  const auto info = weak_info(ModelSpec::lognormal(), v2(0.2, 0.9), KernelFamily::gaussian(1.0),
                              FeatureSpec::moments_upto(3));
  const MatrixXd gram = info.d_theta.transpose() * info.d_theta;
  CHECK((info.G - gram).norm() <= 1e-14 * info.G.norm());
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(info.G);
  CHECK(eig.eigenvalues().minCoeff() >= -1e-12);
}

TEST_CASE("weak information examples") {
  const auto zero = weak_info(ModelSpec::gaussian_location(), v1(0.0), KernelFamily::gaussian(1.0),
                              FeatureSpec::moments({0}));
  CHECK(std::abs(zero.G(0, 0)) < 1e-28);
  const auto cauchy = weak_info(ModelSpec::cauchy_location(), v1(0.0), KernelFamily::gaussian(1.0),
                                FeatureSpec::moments({0, 1}));
  CHECK(cauchy.G(0, 0) > 0.0);
}

TEST_CASE("det G positive exactly when D_theta has full rank") {
  const auto spec = FeatureSpec::moments({0});
  const auto map = make_joint_map(ModelSpec::cauchy_location(), KernelFamily::gaussian(1.0), spec,
                                  JacobianMethod::analytic_score);
  const auto r = info_regularity_scan(map, v1(1.0), grid1(-2.0, 2.0, 9));
  const double tol = Thresholds{}.sigma_tol;
  for (std::size_t i = 0; i < r.det.size(); ++i) {
    CHECK((r.sigma_min[i] >= tol) == (r.rank[i] == 1));
    CHECK((r.det[i] > tol * tol) == (r.rank[i] == 1));
  }
  // mu = 0 is the symmetric point of the single-feature spec
  CHECK(r.flagged);
  CHECK(std::abs(r.argmin[0]) < 1e-12);
}

TEST_CASE("kernel rescues a rank drop of the single-feature spec") {
  const auto jac = jacobian(ModelSpec::cauchy_location(), v1(0.0), KernelFamily::gaussian(1.0),
                            FeatureSpec::moments({0}), JacobianMethod::analytic_score);
  // d_theta is pure quadrature noise at the symmetric point
  CHECK(std::abs(jac.d_theta(0, 0)) < 1e-14);
  const auto joint = numerical_rank(jac.joint());
  CHECK(joint.numerical_rank == 1);
  CHECK(joint.singular_values[0] > 0.1);
}

TEST_CASE("injectivity scan") {
  const auto ln = make_joint_map(ModelSpec::lognormal(), KernelFamily::gaussian(1.0),
                                 FeatureSpec::moments_upto(4), JacobianMethod::analytic_score);
  const auto good = injectivity_scan(ln, v1(1.0), grid2(-1.0, 1.0, 4, 0.5, 2.0, 4), 0.0);
  CHECK(good.margin > 1e-6);
  CHECK_FALSE(good.flagged);
  CHECK(good.pairs_checked == 120);

  const auto loc = make_joint_map(ModelSpec::gaussian_location(), KernelFamily::gaussian(1.0),
                                  FeatureSpec::moments({0}), JacobianMethod::analytic_score);
  const auto sym = injectivity_scan(loc, v1(1.0), grid1(-2.0, 2.0, 5), 0.5);
  CHECK(sym.flagged);
  CHECK(sym.margin < 1e-12);
  REQUIRE(sym.worst_pair);

  const auto empty = injectivity_scan(loc, v1(1.0), grid1(-0.1, 0.1, 2), 1.0);
  CHECK(std::isinf(empty.margin));
  CHECK_FALSE(empty.worst_pair);
  CHECK_THROWS_AS(injectivity_scan(loc, v1(1.0), grid1(0.0, 0.0, 1), 0.0), DomainError);
}

TEST_CASE("information regularity scans") {
  const auto cauchy = make_joint_map(ModelSpec::cauchy_location(), KernelFamily::gaussian(1.0),
                                     FeatureSpec::moments({0, 1}), JacobianMethod::analytic_score);
  const auto rc = info_regularity_scan(cauchy, v1(1.0), grid1(-5.0, 5.0, 101));
  CHECK(rc.min_det > 0.0);
  CHECK_FALSE(rc.flagged);

  const auto ln = make_joint_map(ModelSpec::lognormal(), KernelFamily::gaussian(1.0),
                                 FeatureSpec::moments({1, 2}), JacobianMethod::analytic_score);
  const auto rl = info_regularity_scan(ln, v1(1.0), grid2(-1.0, 1.0, 5, 0.5, 2.0, 5));
  CHECK(rl.min_sigma > 0.0);
  CHECK_FALSE(rl.flagged);
}

TEST_CASE("stieltjes test") {
  const auto weak = range(0, 4), classical = range(0, 10);
  const double expected[3] = {oracle::stieltjes_max_weak_gap_norm_s05, oracle::stieltjes_max_weak_gap_norm_s1,
                              oracle::stieltjes_max_weak_gap_norm_s2};
  const double scales[3] = {0.5, 1.0, 2.0};
  for (int i = 0; i < 3; ++i) {
    const auto r = stieltjes_test(0.5, v2(0.0, 1.0), KernelFamily::gaussian(scales[i], 1, true), weak,
                                  classical);
    CHECK(r.classical_coincide);
    CHECK(r.weak_separate);
    CHECK(r.classical_gaps.maxCoeff() < 1e-8);
    CHECK(r.weak_gaps.maxCoeff() == doctest::Approx(expected[i]).epsilon(1e-7));
  }
  const auto none = stieltjes_test(0.0, v2(0.0, 1.0), KernelFamily::gaussian(1.0), weak, classical);
  CHECK(none.classical_gaps_abs.maxCoeff() == 0.0);
  CHECK(none.weak_gaps.maxCoeff() == 0.0);
  CHECK_FALSE(none.weak_separate);
}

TEST_CASE("stieltjes coincidence away from the unit parameter") {
  const auto r = stieltjes_test(0.5, v2(0.4, 0.7), KernelFamily::gaussian(1.0, 1, true), range(0, 4),
                                range(0, 10));
  CHECK(r.classical_coincide);
}

TEST_CASE("carleman probe of the tilted log-normal") {
  const auto r = carleman_probe(ModelSpec::lognormal(), v2(0.0, 1.0), KernelFamily::gaussian(1.0, 1, true), 20);
  REQUIRE(r.j.size() == 20);
  CHECK_FALSE(r.overflow);
  CHECK(r.tilted_moments[0] == doctest::Approx(oracle::carleman_tilted_m2).epsilon(1e-9));
  CHECK(r.tilted_moments[1] == doctest::Approx(oracle::carleman_tilted_m4).epsilon(1e-9));
  CHECK(r.tilted_moments[4] == doctest::Approx(oracle::carleman_tilted_m10).epsilon(1e-9));
  CHECK(r.tilted_moments[9] == doctest::Approx(oracle::carleman_tilted_m20).epsilon(1e-9));
  for (std::size_t i = 0; i < r.j.size(); ++i) {
    CHECK(r.terms[i] > 0.0);
    if (r.j[i] >= 2) CHECK(r.terms[i] * std::sqrt(r.j[i]) >= 0.1);
    if (i > 0) CHECK(r.partial_sums[i] > r.partial_sums[i - 1]);
  }
}

TEST_CASE("second jet rank") {
  MatrixXd a(3, 2);
  a << 1, 2, 0, 1, 3, -1;
  const auto affine = jet2_rank([&](const VectorXd& t) { return VectorXd(a * t + VectorXd::Ones(3)); },
                                v2(0.3, -0.2));
  CHECK(affine.second_order.numerical_rank == 0);
  CHECK(affine.stacked.numerical_rank == affine.first_order.numerical_rank);
  CHECK(affine.stack.rows() == 9);
  CHECK(affine.stack.cols() == 2);

  for (const auto& th : grid2(-1.0, 1.0, 3, 0.5, 2.0, 3)) {
    const auto r = jet2_rank(ModelSpec::lognormal(), th, KernelFamily::gaussian(1.0), FeatureSpec::moments({1, 2}));
    CHECK(r.stacked.numerical_rank == 2);
  }
}

TEST_CASE("classify: cauchy") {
  const auto grid = grid1(-5.0, 5.0, 21);
  const auto r = classify(ModelSpec::cauchy_location(), KernelFamily::gaussian(1.0), FeatureSpec::moments({0, 1}),
                          grid);
  CHECK_FALSE(r.type0.classical_defined);
  CHECK(r.type0.weak_finite);
  CHECK(r.type0.flagged);
  CHECK(r.type3.status == Type3Status::classical_undefined);
  CHECK_FALSE(r.type2.flagged);
  CHECK(r.any_flag());
}

TEST_CASE("classify: gaussian location with a rich spec") {
  const auto r = classify(ModelSpec::gaussian_location(), KernelFamily::gaussian(1.0),
                          FeatureSpec::moments({0, 1, 2}), grid1(-2.0, 2.0, 9));
  CHECK_FALSE(r.type1.flagged);
  CHECK_FALSE(r.type2.flagged);
  CHECK(r.type3.status == Type3Status::not_applicable);
  CHECK_FALSE(r.any_flag());
  CHECK(r.features.size() == 9);
}

TEST_CASE("classify: constant feature map") {
  const auto map = make_joint_map(2, 1, 3, [](const VectorXd&, const VectorXd&) {
    return VectorXd::Constant(3, 0.5);
  });
  const auto grid = grid2(0.0, 1.0, 3, 1.0, 2.0, 3);
  const auto r = classify(map, v1(1.0), grid, 0.0, Thresholds{}, ClassicalFacts{});
  CHECK(r.type2.flagged);
  CHECK(r.type2.min_det == 0.0);
  CHECK(r.type1.flagged);
}

TEST_CASE("classify: stieltjes family") {
  const auto r = classify(ModelSpec::lognormal_stieltjes(0.5), KernelFamily::gaussian(1.0, 1, true),
                          FeatureSpec::moments_upto(4), grid2(-0.5, 0.5, 2, 1.0, 1.0, 1 + 1));
  CHECK(r.type3.max_weak_gap.size() == 4);
  CHECK(r.type3.points_separated >= 1);
  REQUIRE(r.type3.evidence);
  CHECK(r.type3.evidence->classical_coincide);
  CHECK(to_string(r.type3.status).size() > 0);
}
