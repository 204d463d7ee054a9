#pragma once

#include <utility>
#include <vector>

#include "vmp/graph.hpp"

namespace vmp {

// phi(x)/Phi(x), the derivative of log{2 Phi(x)}.
double zeta_prime(double x);

// tanh(xi/2)/(4 xi), with the removable singularity at 0 handled by series.
double jj_weight(double xi);
// xi/2 - log(1 + e^xi) + xi tanh(xi/2)/4
double jj_c(double xi);

// ---- Jaakkola-Jordan logistic ------------------------------------------------

struct LogisticFragmentState {
  Vec y;
  Mat A;
  Vec xi;  // variational parameters
  Mat Xi;  // E(theta theta^T) used for the last xi step
};

LogisticFragmentState make_logistic_state(const Vec& y, const Mat& A);

struct LogisticUpdate {
  LogisticFragmentState state;
  Vec message;
};

LogisticUpdate jaakkola_jordan_update(const LogisticFragmentState& state, const Vec& eta_factor_to_theta,
                                      const Vec& eta_theta_to_factor);

// Message for fixed xi: (A^T(y - 1/2), -vec(A^T diag{w(xi)} A)).
Vec jaakkola_jordan_message(const LogisticFragmentState& state);

// E_q of the quadratic lower bound on log p(y|theta) at the stored xi.
double jaakkola_jordan_bound(const LogisticFragmentState& state, const NatParam& q);
double jaakkola_jordan_bound(const LogisticFragmentState& state, const Vec& xi, const NatParam& q);

class JaakkolaJordanFragment : public Fragment {
 public:
  JaakkolaJordanFragment(const Vec& y, const Mat& A);
  std::string kind() const override { return "jaakkola_jordan_logistic"; }
  std::vector<Family> port_families() const override { return {Family::multivariate_normal(state_.A.cols())}; }
  Vec update_port(std::size_t k, const std::vector<Vec>& to_factor, const std::vector<Vec>& from_factor) override;
  double expected_log_factor(const std::vector<NatParam>& q) const override;
  bool is_likelihood() const override { return true; }
  std::unique_ptr<Fragment> clone() const override { return std::make_unique<JaakkolaJordanFragment>(*this); }

  const LogisticFragmentState& state() const { return state_; }
  // Bound at the incoming q before and after each xi step.
  const std::vector<std::pair<double, double>>& xi_step_bounds() const { return xi_bounds_; }

 private:
  LogisticFragmentState state_;
  std::vector<std::pair<double, double>> xi_bounds_;
};

// ---- Albert-Chib probit ------------------------------------------------------

struct ProbitFragmentState {
  Vec y;
  Mat A;
  Vec nu;  // means of the untruncated auxiliary normals
};

ProbitFragmentState make_probit_state(const Vec& y, const Mat& A);

struct ProbitUpdate {
  ProbitFragmentState state;
  Vec message;
};

ProbitUpdate albert_chib_update(const ProbitFragmentState& state, const Vec& eta_factor_to_theta,
                                const Vec& eta_theta_to_factor);

// E_q log p(a|theta) + E_q log p(y|a) + Entropy{q(a)} with q(a_i) the
// N(nu_i, 1) density truncated to the side selected by y_i.
double albert_chib_expected_log_factor(const ProbitFragmentState& state, const NatParam& q);

class AlbertChibFragment : public Fragment {
 public:
  AlbertChibFragment(const Vec& y, const Mat& A);
  std::string kind() const override { return "albert_chib_probit"; }
  std::vector<Family> port_families() const override { return {Family::multivariate_normal(state_.A.cols())}; }
  Vec update_port(std::size_t k, const std::vector<Vec>& to_factor, const std::vector<Vec>& from_factor) override;
  double expected_log_factor(const std::vector<NatParam>& q) const override;
  bool is_likelihood() const override { return true; }
  std::unique_ptr<Fragment> clone() const override { return std::make_unique<AlbertChibFragment>(*this); }
  const ProbitFragmentState& state() const { return state_; }

 private:
  ProbitFragmentState state_;
};

// ---- Knowles-Minka Poisson ----------------------------------------------

struct PoissonFragmentState {
  Vec y;
  Mat A;
  Vec omega;
};

PoissonFragmentState make_poisson_state(const Vec& y, const Mat& A);

struct PoissonUpdate {
  PoissonFragmentState state;
  Vec message;
};

// Throws NumericError when a component of A mu + diag(A Sigma A^T)/2 exceeds 700.
PoissonUpdate knowles_minka_update(const PoissonFragmentState& state, const Vec& eta_factor_to_theta,
                                        const Vec& eta_theta_to_factor);

// E_q log p(y|theta), exact.
double poisson_expected_log_lik(const Vec& y, const Mat& A, const Vec& mu, const Mat& Sigma);

// Localized objective in (mu, Sigma) for fixed eta_theta_to_factor:
// NonEntropy + Entropy{N(mu, Sigma)}.
double knowles_minka_local_objective(const Vec& y, const Mat& A, const Vec& eta_theta_to_factor, const Vec& mu,
                                          const Mat& Sigma);
// Its gradient in mu: A^T(y - omega) + eta_1 + 2 vec^{-1}(eta_2) mu.
Vec knowles_minka_local_gradient(const Vec& y, const Mat& A, const Vec& eta_theta_to_factor, const Vec& mu,
                                      const Mat& Sigma);

class KnowlesMinkaFragment : public Fragment {
 public:
  KnowlesMinkaFragment(const Vec& y, const Mat& A);
  std::string kind() const override { return "knowles_minka_poisson"; }
  std::vector<Family> port_families() const override { return {Family::multivariate_normal(state_.A.cols())}; }
  Vec update_port(std::size_t k, const std::vector<Vec>& to_factor, const std::vector<Vec>& from_factor) override;
  double expected_log_factor(const std::vector<NatParam>& q) const override;
  bool is_likelihood() const override { return true; }
  bool conjugate() const override { return false; }
  // Quadratic expansion of the log-likelihood at A theta = log(y + 1/2) with
  // weights y + 1/2, so the first q(theta) is a working least-squares fit.
  std::optional<Vec> initial_message(std::size_t) const override;
  std::unique_ptr<Fragment> clone() const override { return std::make_unique<KnowlesMinkaFragment>(*this); }
  const PoissonFragmentState& state() const { return state_; }

 private:
  PoissonFragmentState state_;
};

}  // namespace vmp
