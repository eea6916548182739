#include <doctest.h>

#include <cmath>
#include <numbers>

#include "oracle_values.hpp"
#include "weaktrans/errors.hpp"
#include "weaktrans/featuremap.hpp"
#include "weaktrans/transversality.hpp"

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

// N(mu, sigma0^2) tilted by exp(-x^2 / 2 s^2) is N(m, v) up to the factor w0.
struct TiltedGaussian {
  double m, v, w0;
};

TiltedGaussian tilt(double mu, double sigma0, double s) {
  const double v = 1.0 / (1.0 / (sigma0 * sigma0) + 1.0 / (s * s));
  const double w0 = s / std::sqrt(sigma0 * sigma0 + s * s) *
                    std::exp(-mu * mu / (2.0 * (sigma0 * sigma0 + s * s)));
  return {v * mu / (sigma0 * sigma0), v, w0};
}

}  // namespace

TEST_CASE("feature spec validation") {
  CHECK_THROWS_AS(FeatureSpec::moments({1, 1}).validate(), DomainError);
  CHECK_THROWS_AS(FeatureSpec::moments({2, 1}).validate(), DomainError);
  CHECK_THROWS_AS(FeatureSpec::moments({-1}).validate(), DomainError);
  CHECK_THROWS_AS(FeatureSpec::moments({}).validate(), DomainError);
  CHECK(FeatureSpec::charfn({0.0, 1.0}).size() == 4);
  CHECK(FeatureSpec::moments_upto(4).size() == 5);
  CHECK(FeatureSpec::graph_statistics(Graph::cycle(4)).size() == 8);
}

TEST_CASE("cauchy zeroth weak moment matches the erfc identity") {
  const double expected = std::exp(0.5) * std::erfc(1.0 / std::sqrt(2.0));
  const double w0 = weak_moment(ModelSpec::cauchy_location(), v1(0.0), KernelFamily::gaussian(1.0), 0);
  CHECK(w0 == doctest::Approx(expected).epsilon(1e-10));
  CHECK(w0 == doctest::Approx(0.5231).epsilon(1e-4));
}

TEST_CASE("odd weak moments of symmetric models vanish") {
  const auto k = KernelFamily::gaussian(1.7);
  CHECK(std::abs(weak_moment(ModelSpec::cauchy_location(), v1(0.0), k, 1)) < 1e-12);
  CHECK(std::abs(weak_moment(ModelSpec::cauchy_location(), v1(0.0), k, 3)) < 1e-12);
  CHECK(std::abs(weak_moment(ModelSpec::gaussian_location(), v1(0.0), k, 1)) < 1e-12);
}

TEST_CASE("weak moments against reference values") {
  const auto ku = KernelFamily::gaussian(1.0, 1, false);
  const double ln01[5] = {oracle::lognormal_weak_unnorm_s1_theta01_j0,
                          oracle::lognormal_weak_unnorm_s1_theta01_j1,
                          oracle::lognormal_weak_unnorm_s1_theta01_j2,
                          oracle::lognormal_weak_unnorm_s1_theta01_j3,
                          oracle::lognormal_weak_unnorm_s1_theta01_j4};
  const double ln_norm[5] = {oracle::lognormal_weak_norm_s05_theta05_08_j0,
                             oracle::lognormal_weak_norm_s05_theta05_08_j1,
                             oracle::lognormal_weak_norm_s05_theta05_08_j2,
                             oracle::lognormal_weak_norm_s05_theta05_08_j3,
                             oracle::lognormal_weak_norm_s05_theta05_08_j4};
  const double cauchy[5] = {oracle::cauchy_weak_unnorm_s1_mu07_j0, oracle::cauchy_weak_unnorm_s1_mu07_j1,
                            oracle::cauchy_weak_unnorm_s1_mu07_j2, oracle::cauchy_weak_unnorm_s1_mu07_j3,
                            oracle::cauchy_weak_unnorm_s1_mu07_j4};
  const auto kn = KernelFamily::gaussian(0.5, 1, true);
  for (int j = 0; j < 5; ++j) {
    CAPTURE(j);
    CHECK(weak_moment(ModelSpec::lognormal(), v2(0.0, 1.0), ku, j) ==
          doctest::Approx(ln01[j]).epsilon(1e-9));
    CHECK(weak_moment(ModelSpec::lognormal(), v2(0.5, 0.8), kn, j) ==
          doctest::Approx(ln_norm[j]).epsilon(1e-9));
    CHECK(weak_moment(ModelSpec::cauchy_location(), v1(0.7), ku, j) ==
          doctest::Approx(cauchy[j]).epsilon(1e-9));
  }
  CHECK(weak_moment(ModelSpec::cauchy_location(), v1(0.0), ku, 12) ==
        doctest::Approx(oracle::cauchy_weak_unnorm_s1_mu0_j12).epsilon(1e-9));
}

TEST_CASE("gaussian location weak moments use the closed form") {
  const auto kn = KernelFamily::gaussian(1.0, 1, true);
  CHECK(weak_moment(ModelSpec::gaussian_location(1.0), v1(0.0), kn, 0) ==
        doctest::Approx(1.0 / std::sqrt(4.0 * std::numbers::pi)).epsilon(1e-14));
  const auto t = tilt(0.6, 1.3, 0.9);
  const auto ku = KernelFamily::gaussian(0.9);
  CHECK(weak_moment(ModelSpec::gaussian_location(1.3), v1(0.6), ku, 2) ==
        doctest::Approx(t.w0 * (t.v + t.m * t.m)).epsilon(1e-12));
}

TEST_CASE("cauchy weak moments stay finite to order 12") {
  const auto k = KernelFamily::gaussian(1.0);
  for (double mu : {-5.0, 0.0, 3.0})
    for (int j = 0; j <= 12; ++j) CHECK(std::isfinite(weak_moment(ModelSpec::cauchy_location(), v1(mu), k, j)));
}

TEST_CASE("feature map examples") {
  const auto k = KernelFamily::gaussian(1.0);
  const auto m = ModelSpec::cauchy_location();
  const auto single = feature_map(m, v1(0.4), k, FeatureSpec::moments({0}));
  REQUIRE(single.values.size() == 1);
  CHECK(single.values[0] == weak_moment(m, v1(0.4), k, 0));

  const auto c0 = feature_map(m, v1(0.4), k, FeatureSpec::charfn({0.0}));
  REQUIRE(c0.values.size() == 2);
  CHECK(c0.values[0] == doctest::Approx(single.values[0]).epsilon(1e-12));
  CHECK(std::abs(c0.values[1]) < 1e-15);

  const auto spec = FeatureSpec::moments_upto(4);
  const auto a = feature_map(ModelSpec::lognormal(), v2(0.0, 1.0), KernelFamily::gaussian(1.0, 1, true), spec);
  const auto b = feature_map(ModelSpec::lognormal_stieltjes(0.5), v2(0.0, 1.0),
                             KernelFamily::gaussian(1.0, 1, true), spec);
  CHECK((a.values - b.values).norm() > 1e-3);
}

TEST_CASE("custom and monomial features") {
  const auto k = KernelFamily::gaussian(1.0);
  const auto m = ModelSpec::cauchy_location();
  const auto f = feature_map(m, v1(0.2), k, FeatureSpec::custom({[](double x) { return x * x; }}));
  CHECK(f.values[0] == doctest::Approx(weak_moment(m, v1(0.2), k, 2)).epsilon(1e-12));
  const auto mono = feature_map(m, v1(0.2), k, FeatureSpec::monomials({{3}}));
  CHECK(mono.values[0] == doctest::Approx(weak_moment(m, v1(0.2), k, 3)).epsilon(1e-12));
}

TEST_CASE("weak characteristic function") {
  const auto k = KernelFamily::gaussian(1.0);
  const auto m = ModelSpec::cauchy_location();
  const double w0 = weak_moment(m, v1(0.0), k, 0);
  const auto at0 = weak_char_fn(m, v1(0.0), k, 0.0);
  CHECK(at0.real() == doctest::Approx(w0).epsilon(1e-12));
  CHECK(at0.imag() == 0.0);
  for (double u = -6.0; u <= 6.0; u += 0.5) {
    const auto c = weak_char_fn(m, v1(0.0), k, u);
    CHECK(std::abs(c.imag()) < 1e-12);
    CHECK(std::abs(c) <= w0 + 1e-12);
  }
  const auto t = tilt(0.5, 1.0, 1.0);
  for (double u : {-2.0, 0.7, 3.0}) {
    const auto c = weak_char_fn(ModelSpec::gaussian_location(), v1(0.5), k, u);
    const auto expected = t.w0 * std::exp(std::complex<double>(-0.5 * u * u * t.v, u * t.m));
    CHECK(std::abs(c - expected) < 1e-10);
  }
}

TEST_CASE("weak cumulant generating function") {
  const auto k = KernelFamily::gaussian(1.0);
  const auto m = ModelSpec::cauchy_location();
  CHECK(weak_cgf(m, v1(0.0), k, 0.0) == 0.0);
  CHECK(weak_cgf(m, v1(0.0), k, 10.0) == doctest::Approx(oracle::cauchy_cgf_s1_t10).epsilon(1e-9));
  CHECK(weak_cgf(m, v1(0.0), k, -3.0) == doctest::Approx(oracle::cauchy_cgf_s1_tm3).epsilon(1e-9));
  for (double t = -10.0; t <= 10.0; t += 1.0) {
    const double kt = weak_cgf(m, v1(0.0), k, t);
    CHECK(std::isfinite(kt));
    CHECK(kt == doctest::Approx(weak_cgf(m, v1(0.0), k, -t)).epsilon(1e-10));
  }
}

TEST_CASE("weak cumulants of the gaussian location family") {
  const auto t = tilt(0.8, 1.2, 1.5);
  const auto kappa = weak_cumulants(ModelSpec::gaussian_location(1.2), v1(0.8), KernelFamily::gaussian(1.5));
  CHECK(kappa[0] == doctest::Approx(t.m).epsilon(1e-6));
  CHECK(kappa[1] == doctest::Approx(t.v).epsilon(1e-5));
  CHECK(std::abs(kappa[2]) < 1e-4);
  CHECK(std::abs(kappa[3]) < 1e-3);
}

TEST_CASE("jacobian examples for the gaussian location family") {
  const auto jac = jacobian(ModelSpec::gaussian_location(1.0), v1(0.0), KernelFamily::gaussian(1.0, 1, true),
                            FeatureSpec::moments({0}), JacobianMethod::analytic_score);
  CHECK(jac.d_theta.rows() == 1);
  CHECK(jac.d_theta.cols() == 1);
  CHECK(jac.d_lambda.cols() == 1);
  CHECK(std::abs(jac.d_theta(0, 0)) < 1e-14);
  CHECK(jac.d_lambda(0, 0) ==
        doctest::Approx(-1.0 / std::sqrt(2.0 * std::numbers::pi) * std::pow(2.0, -1.5)).epsilon(1e-10));
  CHECK(jac.joint().cols() == 2);
}

TEST_CASE("analytic and finite-difference jacobians agree") {
  struct Case {
    ModelSpec model;
    VectorXd theta;
    FeatureSpec spec;
  };
  const std::vector<Case> cases = {
      {ModelSpec::lognormal(), v2(0.2, 0.9), FeatureSpec::moments_upto(3)},
      {ModelSpec::lognormal_stieltjes(0.5), v2(-0.3, 1.2), FeatureSpec::moments({0, 2})},
      {ModelSpec::cauchy_location(), v1(1.3), FeatureSpec::moments_upto(4)},
      {ModelSpec::cauchy_location(), v1(-0.5), FeatureSpec::charfn({0.5, 2.0})},
      {ModelSpec::gaussian_location(0.7), v1(0.4), FeatureSpec::moments({0, 1, 2})},
  };
  for (bool normalized : {false, true}) {
    const auto k = KernelFamily::gaussian(1.1, 1, normalized);
    for (const auto& c : cases) {
      const auto a = jacobian(c.model, c.theta, k, c.spec, JacobianMethod::analytic_score);
      const auto f = jacobian(c.model, c.theta, k, c.spec, JacobianMethod::finite_difference);
      CHECK((a.d_theta - f.d_theta).cwiseAbs().maxCoeff() < 1e-6);
      CHECK((a.d_lambda - f.d_lambda).cwiseAbs().maxCoeff() < 1e-6);
    }
  }
}

TEST_CASE("joint finite difference equals the block split") {
  const auto model = ModelSpec::lognormal();
  const auto k = KernelFamily::gaussian(1.0, 1, true);
  const auto spec = FeatureSpec::moments({0, 1, 3});
  const auto map = make_joint_map(model, k, spec, JacobianMethod::analytic_score);
  const VectorXd theta = v2(0.1, 0.7);
  auto stacked = [&](const VectorXd& z) { return map.features(z.head(2), z.tail(1)); };
  VectorXd z(3);
  z << 0.1, 0.7, 1.0;
  const MatrixXd fd = finite_difference_jacobian(stacked, z);
  const auto split = map.jacobian(theta, v1(1.0));
  CHECK((fd - split.joint()).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("location family: scale derivative positive and joint rank one") {
  const auto model = ModelSpec::gaussian_location(1.0);
  const auto spec = FeatureSpec::moments({0});
  for (bool normalized : {false, true}) {
    for (double mu = -3.0; mu <= 3.0; mu += 0.5) {
      for (double s = 0.5; s <= 5.0; s += 0.5) {
        const auto jac = jacobian(model, v1(mu), KernelFamily::gaussian(s, 1, normalized), spec,
                                  JacobianMethod::analytic_score);
        if (!normalized) CHECK(jac.d_lambda(0, 0) > 0.0);
        CHECK(numerical_rank(jac.joint()).numerical_rank == 1);
      }
    }
  }
}

TEST_CASE("mvn monomial features need finite differences") {
  const auto model = ModelSpec::gaussian_mvn(Graph::path(3));
  VectorXd theta(5);
  theta << 2.0, 2.0, 2.0, 0.5, 0.5;
  const auto spec = FeatureSpec::graph_statistics(model.graph());
  const auto k = KernelFamily::gaussian(1.0, 3, true);
  const auto f = feature_map(model, theta, k, spec);
  CHECK(f.values.size() == 5);
  CHECK((f.values.head(3).array() > 0.0).all());
  CHECK_THROWS_AS(jacobian(model, theta, k, spec, JacobianMethod::analytic_score), DomainError);
  const auto jac = jacobian(model, theta, k, spec, JacobianMethod::finite_difference);
  CHECK(jac.d_theta.rows() == 5);
  CHECK(jac.d_theta.cols() == 5);
}

TEST_CASE("kernel dimension must match the model") {
  CHECK_THROWS_AS(feature_map(ModelSpec::cauchy_location(), v1(0.0), KernelFamily::gaussian(1.0, 2),
                              FeatureSpec::moments({0})),
                  DomainError);
}
