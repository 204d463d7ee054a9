#include "doctest.h"

#include <cmath>
#include <numbers>

#include "test_util.hpp"
#include "vmp/fragments.hpp"
#include "vmp/oracle.hpp"

using namespace vmp;
using vmp::testing::close;
using vmp::testing::random_spd;
using vmp::testing::random_vec;
using vmp::testing::RunningMean;

namespace {

NatParam mvn(const Vec& mu, const Mat& S) {
  return common_to_natural(Family::multivariate_normal(mu.size()), MvnParams{mu, S});
}
NatParam ics(double k, double l) { return common_to_natural(Family::inverse_chi_squared(), InvChiSqParams{k, l}); }
NatParam iw(double k, const Mat& L) { return common_to_natural(Family::inverse_wishart(L.rows()), InvWishartParams{k, L}); }
NatParam igwd(double k, const Mat& L) {
  return common_to_natural(Family::inverse_g_wishart_diag(L.rows()), InvWishartParams{k, L});
}

}  // namespace

TEST_CASE("gaussian prior message hand values") {
  GaussianPriorSpec s{Vec::Zero(2), 1e10 * Mat::Identity(2, 2)};
  Vec e = gaussian_prior_message(s);
  CHECK(e.head(2).norm() == 0.0);
  CHECK(close(e[2], -0.5e-10, 1e-15));
  CHECK(e[3] == 0.0);
  CHECK(close(e[5], -0.5e-10, 1e-15));

  Vec e1 = gaussian_prior_message({Vec::Constant(1, 1.0), Mat::Constant(1, 1, 1.0)});
  CHECK(e1[0] == doctest::Approx(1.0));
  CHECK(e1[1] == doctest::Approx(-0.5));

  std::mt19937_64 rng(3);
  for (int r = 0; r < 10; ++r) {
    const Index d = 1 + r % 4;
    GaussianPriorSpec g{random_vec(d, rng), random_spd(d, rng)};
    auto c = std::get<MvnParams>(natural_to_common({Family::multivariate_normal(d), gaussian_prior_message(g)}));
    CHECK((c.mu - g.mu_theta).norm() < 1e-10);
    CHECK((c.Sigma - g.Sigma_theta).norm() < 1e-10);
  }
  CHECK_THROWS_AS(gaussian_prior_message({Vec::Zero(2), Mat::Zero(2, 2)}), NumericError);
}

TEST_CASE("inverse wishart prior message hand values") {
  const double A = 1e5;
  Vec e = inverse_wishart_prior_message({1.0, Mat::Constant(1, 1, 1 / (A * A))});
  CHECK(e[0] == -1.5);
  CHECK(close(e[1], -0.5e-10, 1e-15));

  Vec e2 = inverse_wishart_prior_message({3.0, Mat::Identity(2, 2)});
  CHECK(e2[0] == -3.0);
  CHECK(e2[1] == -0.5);
  CHECK(e2[2] == 0.0);
  CHECK(e2[4] == -0.5);

  CHECK((e - inverse_chi_squared_prior_message(1.0, 1 / (A * A))).norm() == 0.0);
  CHECK_THROWS_AS(inverse_wishart_prior_message({0.5, Mat::Identity(2, 2)}), DomainError);
  CHECK_THROWS(inverse_wishart_prior_message({3.0, -Mat::Identity(2, 2)}));
}

TEST_CASE("prior fragment alone: ELBO is zero when q equals the prior") {
  std::mt19937_64 rng(5);
  std::vector<NatParam> priors{mvn(random_vec(3, rng), random_spd(3, rng)), ics(2.5, 0.7), iw(4.0, random_spd(2, rng)),
                               igwd(1.0, Mat(Vec::Constant(3, 0.4).asDiagonal()))};
  for (const auto& p : priors) {
    PriorFragment f("prior", p);
    CHECK(std::fabs(f.expected_log_factor({p}) + entropy(p)) < 1e-10);
  }
}

TEST_CASE("iterated IGW scalar hand example") {
  Vec conn_a(2);
  conn_a << -1.5, -1.0;
  Vec m = igw_scalar_to_theta1(1.0, conn_a);
  CHECK(m[0] == -1.5);
  CHECK(m[1] == -0.25);
  IteratedIGWSpec s{IgwGraph::scalar_d1, 1.0, 1, false};
  CHECK((igw_message_to_theta1(s, conn_a) - m).norm() == 0.0);
  CHECK_THROWS_AS(igw_scalar_to_theta2(1.0, Vec::Zero(2)), NumericError);
}

TEST_CASE("iterated IGW matrix path at d = 1 equals the scalar path") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.1, 5.0);
  IteratedIGWSpec mat{IgwGraph::totally_connected, 1.0, 1, false};
  for (int r = 0; r < 50; ++r) {
    const double kappa = u(rng);
    mat.kappa = kappa;
    Vec c(2);
    c << -1 - u(rng), -u(rng);
    const Vec a1 = igw_message_to_theta1(mat, c), b1 = igw_scalar_to_theta1(kappa, c);
    const Vec a2 = igw_message_to_theta2(mat, c), b2 = igw_scalar_to_theta2(kappa, c);
    CHECK(vmp::testing::max_rel_diff(a1, b1) <= 1e-14);
    CHECK(vmp::testing::max_rel_diff(a2, b2) <= 1e-14);
  }
}

TEST_CASE("iterated IGW expected log factor matches Monte Carlo") {
  Rng rng(2024);
  const int N = 200000;
  SUBCASE("scalar") {
    IteratedIGWSpec s{IgwGraph::scalar_d1, 1.0, 1, false};
    NatParam q1 = ics(5, 2), q2 = ics(4, 3);
    RunningMean acc;
    for (int i = 0; i < N; ++i) {
      const double t1 = sample(q1, rng)(0, 0), t2 = sample(q2, rng)(0, 0);
      acc.add(log_density(ics(1.0, 1 / t2), Mat::Constant(1, 1, t1)));
    }
    CHECK(std::fabs(igw_expected_log_factor(s, q1, q2) - acc.mean()) < 4.5 * acc.se());
  }
  SUBCASE("connected with diagonal Theta2 (half-t covariance prior)") {
    IteratedIGWSpec s{IgwGraph::totally_connected, 3.0, 2, true};
    std::mt19937_64 r2(8);
    NatParam q1 = iw(9, random_spd(2, r2)), q2 = igwd(6, Mat(Vec::Constant(2, 1.3).asDiagonal()));
    RunningMean acc;
    for (int i = 0; i < N; ++i) {
      const Mat t1 = sample(q1, rng), t2 = sample(q2, rng);
      acc.add(log_density(iw(3.0, t2.inverse()), t1));
    }
    CHECK(std::fabs(igw_expected_log_factor(s, q1, q2) - acc.mean()) < 4.5 * acc.se());
  }
  SUBCASE("totally disconnected") {
    IteratedIGWSpec s{IgwGraph::totally_disconnected, 1.0, 3, true};
    const double kp = 1.0 + 3 - 1;
    NatParam q1 = igwd(5, Mat(Vec::LinSpaced(3, 0.5, 2).asDiagonal()));
    NatParam q2 = igwd(7, Mat(Vec::LinSpaced(3, 1, 3).asDiagonal()));
    RunningMean acc;
    for (int i = 0; i < N; ++i) {
      const Mat t1 = sample(q1, rng), t2 = sample(q2, rng);
      double l = 0;
      for (int j = 0; j < 3; ++j) l += log_density(ics(kp, 1 / t2(j, j)), Mat::Constant(1, 1, t1(j, j)));
      acc.add(l);
    }
    CHECK(std::fabs(igw_expected_log_factor(s, q1, q2) - acc.mean()) < 4.5 * acc.se());
  }
}

TEST_CASE("iterated IGW messages are the natural parameters of E_q log f") {
  // log f is linear in T(Theta1) given Theta2 and vice versa, so the message
  // to Theta1 is the gradient of E log f with respect to E T(Theta1).
  IteratedIGWSpec s{IgwGraph::totally_connected, 3.0, 2, false};
  std::mt19937_64 r(4);
  NatParam q1 = iw(6, random_spd(2, r)), q2 = iw(7, random_spd(2, r));
  const Vec m1 = igw_message_to_theta1(s, q2.eta);
  const Vec t1 = expected_sufficient_statistic(q1);
  // E log f = m1^T E T(Theta1) + terms free of Theta1
  NatParam q1b = iw(9, random_spd(2, r));
  const double lhs = igw_expected_log_factor(s, q1, q2) - igw_expected_log_factor(s, q1b, q2);
  const double rhs = m1.dot(t1 - expected_sufficient_statistic(q1b));
  CHECK(std::fabs(lhs - rhs) < 1e-10);

  const Vec m2 = igw_message_to_theta2(s, q1.eta);
  NatParam q2b = iw(4, random_spd(2, r));
  const double lhs2 = igw_expected_log_factor(s, q1, q2) - igw_expected_log_factor(s, q1, q2b);
  const double rhs2 = m2.dot(expected_sufficient_statistic(q2) - expected_sufficient_statistic(q2b));
  CHECK(std::fabs(lhs2 - rhs2) < 1e-10);
}

TEST_CASE("iterated IGW disconnected messages are natural parameters of E_q log f") {
  IteratedIGWSpec s{IgwGraph::totally_disconnected, 1.0, 2, true};
  NatParam q1 = igwd(5, Mat(Vec::LinSpaced(2, 0.5, 2).asDiagonal()));
  NatParam q1b = igwd(3, Mat(Vec::LinSpaced(2, 1.5, 0.2).asDiagonal()));
  NatParam q2 = igwd(7, Mat(Vec::LinSpaced(2, 1, 3).asDiagonal()));
  NatParam q2b = igwd(2, Mat(Vec::LinSpaced(2, 4, 0.3).asDiagonal()));
  const Vec m1 = igw_message_to_theta1(s, q2.eta), m2 = igw_message_to_theta2(s, q1.eta);
  CHECK(std::fabs(igw_expected_log_factor(s, q1, q2) - igw_expected_log_factor(s, q1b, q2) -
                  m1.dot(expected_sufficient_statistic(q1) - expected_sufficient_statistic(q1b))) < 1e-10);
  CHECK(std::fabs(igw_expected_log_factor(s, q1, q2) - igw_expected_log_factor(s, q1, q2b) -
                  m2.dot(expected_sufficient_statistic(q2) - expected_sufficient_statistic(q2b))) < 1e-10);
}

TEST_CASE("iterated IGW spec validation") {
  CHECK_THROWS_AS(IteratedIGWFragment({IgwGraph::scalar_d1, 1.0, 2, false}), DomainError);
  CHECK_THROWS_AS(IteratedIGWFragment({IgwGraph::totally_connected, 0.5, 2, false}), DomainError);
  CHECK_THROWS_AS(IteratedIGWFragment({IgwGraph::totally_disconnected, 1.0, 2, false}), DomainError);
  CHECK_NOTHROW(IteratedIGWFragment({IgwGraph::totally_disconnected, 1.0, 2, true}));
}

TEST_CASE("penalization selector and hand values") {
  GaussianPenalizationSpec s;
  s.d_theta0 = 1;
  s.mu_theta0 = Vec::Zero(1);
  s.Sigma_theta0 = Mat::Identity(1, 1);
  s.blocks = {{2, 1}, {1, 2}};
  CHECK(s.coef_dim() == 5);
  Mat D = penalization_selector(s, 0);
  Vec expect(5);
  expect << 0, 1, 1, 0, 0;
  CHECK((D.diagonal() - expect).norm() == 0.0);
  CHECK((D - Mat(D.diagonal().asDiagonal())).norm() == 0.0);

  GaussianPenalizationSpec one;
  one.blocks = {{1, 1}};
  one.mu_theta0 = Vec(0);
  one.Sigma_theta0 = Mat(0, 0);
  const NatParam q = mvn(Vec::Zero(1), Mat::Identity(1, 1));
  CHECK(penalization_to_theta_gvmp(one, 0, q.eta)[1] == doctest::Approx(-0.5).epsilon(1e-14));
  CHECK(penalization_to_theta(one, 0, q.eta)[1] == doctest::Approx(-0.5).epsilon(1e-14));
}

TEST_CASE("penalization: second-moment form equals the G_VMP form at d = 1") {
  std::mt19937_64 rng(21);
  GaussianPenalizationSpec s;
  s.d_theta0 = 2;
  s.mu_theta0 = Vec::Zero(2);
  s.Sigma_theta0 = 1e10 * Mat::Identity(2, 2);
  s.blocks = {{5, 1}, {3, 1}};
  for (int r = 0; r < 20; ++r) {
    const NatParam q = mvn(random_vec(s.coef_dim(), rng), random_spd(s.coef_dim(), rng));
    for (std::size_t l = 0; l < 2; ++l) {
      const Vec a = penalization_to_theta(s, l, q.eta), b = penalization_to_theta_gvmp(s, l, q.eta);
      CHECK(vmp::testing::max_rel_diff(a, b) < 1e-12);
    }
  }
}

TEST_CASE("penalization to-coef message structure") {
  GaussianPenalizationSpec s;
  s.d_theta0 = 2;
  s.mu_theta0 = (Vec(2) << 1, -2).finished();
  s.Sigma_theta0 = (Mat(2, 2) << 2, 0.5, 0.5, 1).finished();
  s.blocks = {{2, 1}, {2, 2}};
  std::mt19937_64 rng(9);
  const Mat L2 = random_spd(2, rng);
  const NatParam t1 = ics(4, 2), t2 = iw(6, L2);
  const Vec e = penalization_to_coef(s, {t1.eta, t2.eta});
  const Index p = s.coef_dim();
  CHECK(p == 8);
  const Mat P0 = s.Sigma_theta0.inverse();
  const Vec head = e.head(p);
  CHECK((head.head(2) - P0 * s.mu_theta0).norm() < 1e-12);
  CHECK(head.tail(6).norm() == 0.0);
  Mat expectP = Mat::Zero(p, p);
  expectP.topLeftCorner(2, 2) = P0;
  expectP(2, 2) = expectP(3, 3) = 4.0 / 2.0;          // kappa/lambda
  const Mat Om = 6.0 * L2.inverse();                    // kappa Lambda^{-1}
  expectP.block(4, 4, 2, 2) = Om;
  expectP.block(6, 6, 2, 2) = Om;
  CHECK((vec_inverse(e.tail(p * p), p) + 0.5 * expectP).norm() < 1e-10);
}

TEST_CASE("penalization expected log factor matches Monte Carlo") {
  GaussianPenalizationSpec s;
  s.d_theta0 = 1;
  s.mu_theta0 = Vec::Constant(1, 0.5);
  s.Sigma_theta0 = Mat::Constant(1, 1, 3.0);
  s.blocks = {{2, 1}, {2, 2}};
  std::mt19937_64 r(12);
  const NatParam qc = mvn(random_vec(s.coef_dim(), r, 0.5), random_spd(s.coef_dim(), r));
  const NatParam q1 = ics(6, 2), q2 = iw(8, random_spd(2, r));
  Rng rng(77);
  RunningMean acc;
  for (int i = 0; i < 200000; ++i) {
    const Vec th = sample(qc, rng);
    const double s1 = sample(q1, rng)(0, 0);
    const Mat S2 = sample(q2, rng);
    double l = log_density(mvn(s.mu_theta0, s.Sigma_theta0), th.head(1));
    for (int k = 0; k < 2; ++k) l += log_density(mvn(Vec::Zero(1), Mat::Constant(1, 1, s1)), th.segment(1 + k, 1));
    for (int k = 0; k < 2; ++k) l += log_density(mvn(Vec::Zero(2), S2), th.segment(3 + 2 * k, 2));
    acc.add(l);
  }
  CHECK(std::fabs(penalization_expected_log_factor(s, qc, {q1, q2}) - acc.mean()) < 4.5 * acc.se());
}

TEST_CASE("gaussian likelihood hand values") {
  GaussianSufficient s = gaussian_sufficient({Vec::Constant(1, 3.0), Mat::Constant(1, 1, 1.0)});
  Vec c(2);
  c << -1.5, -1.0;
  Vec m = likelihood_to_theta1(s, c);
  CHECK(m[0] == 1.5);
  CHECK(m[1] == -0.25);

  std::mt19937_64 rng(1);
  Mat A = Mat::Random(7, 3);
  GaussianSufficient z = gaussian_sufficient({Vec::Zero(7), A});
  const NatParam q = mvn(Vec::Zero(3), Mat::Identity(3, 3));
  CHECK(likelihood_to_theta2(z, q.eta)[1] == doctest::Approx(-0.5 * (A.transpose() * A).trace()).epsilon(1e-12));
  CHECK(likelihood_to_theta2(z, q.eta)[0] == -3.5);

  CHECK_THROWS_AS(gaussian_sufficient({Vec::Zero(3), Mat::Zero(2, 1)}), DimensionError);
  CHECK_THROWS_AS(likelihood_to_theta1(s, Vec::Zero(2)), NumericError);
}

TEST_CASE("gaussian likelihood expected log factor matches Monte Carlo") {
  std::mt19937_64 r(31);
  const Mat A = Mat::Random(6, 2);
  const Vec y = random_vec(6, r);
  GaussianSufficient s = gaussian_sufficient({y, A});
  const NatParam q1 = mvn(random_vec(2, r), random_spd(2, r)), q2 = ics(9, 4);
  Rng rng(5);
  RunningMean acc;
  for (int i = 0; i < 200000; ++i) {
    const Vec th = sample(q1, rng);
    const double v = sample(q2, rng)(0, 0);
    acc.add(-3 * std::log(2 * std::numbers::pi * v) - (y - A * th).squaredNorm() / (2 * v));
  }
  CHECK(std::fabs(likelihood_expected_log_factor(s, q1, q2) - acc.mean()) < 4.5 * acc.se());
}

TEST_CASE("fragment outputs belong to the receiving family") {
  GaussianPenalizationSpec s;
  s.d_theta0 = 1;
  s.mu_theta0 = Vec::Zero(1);
  s.Sigma_theta0 = Mat::Identity(1, 1);
  s.blocks = {{3, 1}, {2, 2}};
  GaussianPenalizationFragment f(s);
  auto fams = f.port_families();
  std::vector<Vec> to, from;
  for (const auto& fam : fams) {
    to.push_back(vague_message(fam));
    from.push_back(vague_message(fam));
  }
  for (std::size_t k = 0; k < fams.size(); ++k) {
    const Vec m = f.update_port(k, to, from);
    CHECK(m.size() == fams[k].length());
  }
  const auto order = f.port_order();
  CHECK(order.back() == 0u);
}
