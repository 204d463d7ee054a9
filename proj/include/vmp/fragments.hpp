#pragma once

#include <utility>
#include <vector>

#include "vmp/graph.hpp"

namespace vmp {

// ---- Gaussian prior ---------------------------------------------------------

struct GaussianPriorSpec {
  Vec mu_theta;
  Mat Sigma_theta;
};

// (Sigma^{-1} mu, -1/2 vec(Sigma^{-1}))
Vec gaussian_prior_message(const GaussianPriorSpec& spec);

// ---- Inverse Wishart prior --------------------------------------------------

struct InverseWishartPriorSpec {
  double kappa_Theta;
  Mat Lambda_Theta;
};

// (-1/2 (kappa + d + 1), -1/2 vec(Lambda))
Vec inverse_wishart_prior_message(const InverseWishartPriorSpec& spec);
// Scalar Inverse-chi^2(kappa, lambda) prior message, (-1/2 (kappa + 2), -lambda/2).
Vec inverse_chi_squared_prior_message(double kappa, double lambda);

// log C_{d,kappa} = (d kappa / 2) log 2 + d(d-1)/4 log pi + sum_j log Gamma((kappa+1-j)/2)
double log_inverse_wishart_normalizer(Index d, double kappa);

// A prior factor whose message is a fixed member of the node family.
class PriorFragment : public Fragment {
 public:
  PriorFragment(std::string kind, NatParam eta);
  std::string kind() const override { return kind_; }
  std::vector<Family> port_families() const override { return {eta_.family}; }
  Vec update_port(std::size_t, const std::vector<Vec>&, const std::vector<Vec>&) override { return eta_.eta; }
  double expected_log_factor(const std::vector<NatParam>& q) const override;
  std::unique_ptr<Fragment> clone() const override { return std::make_unique<PriorFragment>(*this); }
  const NatParam& eta() const { return eta_; }

 private:
  std::string kind_;
  NatParam eta_;
};

std::shared_ptr<PriorFragment> make_gaussian_prior(const GaussianPriorSpec& spec);
// family selects InverseChiSquared (d = 1), InverseWishart or InverseGWishartDiag.
std::shared_ptr<PriorFragment> make_inverse_wishart_prior(const InverseWishartPriorSpec& spec, FamilyKind family);

// ---- Iterated Inverse G-Wishart ---------------------------------------------

enum class IgwGraph { scalar_d1, totally_connected, totally_disconnected };

// Theta1 | Theta2 ~ Inverse-G-Wishart(G, kappa, Theta2^{-1}).
struct IteratedIGWSpec {
  IgwGraph graph_kind = IgwGraph::scalar_d1;
  double kappa = 1.0;
  Index d_Theta = 1;
  bool theta2_diagonal = false;  // Theta2 node is InverseGWishartDiag

  Family theta1_family() const;
  Family theta2_family() const;
};

// E(X^{-1}) read directly off an inverse-scale natural parameter:
// (eta1 + 1)/eta2 for Inverse-chi^2, {eta1 + (d+1)/2} {vec^{-1}(eta2)}^{-1}
// for Inverse Wishart, (eta1 + 1) diag(1/eta2_ii) for the diagonal family.
Mat expected_inverse_from_natural(const Family& family, const Vec& eta, const std::string& context);

Vec igw_message_to_theta1(const IteratedIGWSpec& spec, const Vec& eta_conn_theta2);
Vec igw_message_to_theta2(const IteratedIGWSpec& spec, const Vec& eta_conn_theta1);

// Scalar forms, kept separate so the d = 1 matrix path can be checked against them.
Vec igw_scalar_to_theta1(double kappa, const Vec& eta_conn_theta2);
Vec igw_scalar_to_theta2(double kappa, const Vec& eta_conn_theta1);

// Both outgoing messages from the same incoming messages. The combined
// vectors are to + from sums.
std::pair<Vec, Vec> iterated_igw_messages(const IteratedIGWSpec& spec, const Vec& eta_to_factor_from_Theta1,
                                          const Vec& eta_to_factor_from_Theta2, const Vec& eta_factor_to_Theta1,
                                          const Vec& eta_factor_to_Theta2);

double igw_expected_log_factor(const IteratedIGWSpec& spec, const NatParam& q1, const NatParam& q2);

class IteratedIGWFragment : public Fragment {
 public:
  explicit IteratedIGWFragment(IteratedIGWSpec spec);
  std::string kind() const override { return "iterated_inverse_g_wishart"; }
  std::vector<Family> port_families() const override;
  Vec update_port(std::size_t k, const std::vector<Vec>& to_factor, const std::vector<Vec>& from_factor) override;
  double expected_log_factor(const std::vector<NatParam>& q) const override;
  std::unique_ptr<Fragment> clone() const override { return std::make_unique<IteratedIGWFragment>(*this); }
  const IteratedIGWSpec& spec() const { return spec_; }

 private:
  IteratedIGWSpec spec_;
};

// ---- Gaussian penalization --------------------------------------------------

struct PenaltyBlock {
  Index m;        // number of d-vectors sharing the covariance
  Index d_Theta;  // their dimension
};

// Coefficient vector (theta_0, theta_1, ..., theta_L); theta_0 ~ N(mu, Sigma),
// theta_l ~ N(0, I_{m_l} (x) Theta_l).
struct GaussianPenalizationSpec {
  Index d_theta0 = 0;
  Vec mu_theta0;
  Mat Sigma_theta0;
  std::vector<PenaltyBlock> blocks;

  Index coef_dim() const;
  Index block_offset(std::size_t l) const;
  // Family of the Theta_l node: Inverse-chi^2 for d = 1, Inverse Wishart otherwise.
  Family theta_family(std::size_t l) const;
  void validate() const;
};

// D_l: the 0/1 diagonal selector of block l in the coefficient vector.
Mat penalization_selector(const GaussianPenalizationSpec& spec, std::size_t l);

Vec penalization_to_coef(const GaussianPenalizationSpec& spec, const std::vector<Vec>& eta_conn_thetas);
// (-m/2, -1/2 vec(sum_k E[theta_lk theta_lk^T]))
Vec penalization_to_theta(const GaussianPenalizationSpec& spec, std::size_t l, const Vec& eta_conn_coef);
// (-m/2, G_VMP(eta; D_l, 0, 0)); only defined for d_Theta = 1.
Vec penalization_to_theta_gvmp(const GaussianPenalizationSpec& spec, std::size_t l, const Vec& eta_conn_coef);

struct PenalizationMessages {
  Vec to_coef;
  std::vector<Vec> to_thetas;
};

PenalizationMessages gaussian_penalization_messages(const GaussianPenalizationSpec& spec,
                                                    const Vec& eta_coef_to_factor,
                                                    const std::vector<Vec>& eta_thetas_to_factor,
                                                    const Vec& eta_factor_to_coef,
                                                    const std::vector<Vec>& eta_factor_to_thetas);

double penalization_expected_log_factor(const GaussianPenalizationSpec& spec, const NatParam& q_coef,
                                        const std::vector<NatParam>& q_thetas);

// Port 0 is the coefficient vector, ports 1..L the covariance nodes. The
// covariance ports are refreshed first.
class GaussianPenalizationFragment : public Fragment {
 public:
  explicit GaussianPenalizationFragment(GaussianPenalizationSpec spec);
  std::string kind() const override { return "gaussian_penalization"; }
  std::vector<Family> port_families() const override;
  std::vector<std::size_t> port_order() const override;
  Vec update_port(std::size_t k, const std::vector<Vec>& to_factor, const std::vector<Vec>& from_factor) override;
  double expected_log_factor(const std::vector<NatParam>& q) const override;
  std::unique_ptr<Fragment> clone() const override { return std::make_unique<GaussianPenalizationFragment>(*this); }
  const GaussianPenalizationSpec& spec() const { return spec_; }

 private:
  GaussianPenalizationSpec spec_;
};

// ---- Gaussian likelihood ----------------------------------------------------

struct GaussianLikelihoodSpec {
  Vec y;
  Mat A;
};

struct GaussianSufficient {
  Mat AtA;
  Vec Aty;
  double yty = 0;
  Index n = 0;
};

GaussianSufficient gaussian_sufficient(const GaussianLikelihoodSpec& spec);

// (A^T y, -1/2 vec(A^T A)) (eta1 + 1)/eta2 with eta the combined theta2 vector.
Vec likelihood_to_theta1(const GaussianSufficient& s, const Vec& eta_conn_theta2);
// (-n/2, G_VMP(eta_conn_theta1; A^T A, A^T y, y^T y))
Vec likelihood_to_theta2(const GaussianSufficient& s, const Vec& eta_conn_theta1);

std::pair<Vec, Vec> gaussian_likelihood_messages(const GaussianLikelihoodSpec& spec,
                                                 const Vec& eta_theta1_to_factor, const Vec& eta_theta2_to_factor,
                                                 const Vec& eta_factor_to_theta1, const Vec& eta_factor_to_theta2);

double likelihood_expected_log_factor(const GaussianSufficient& s, const NatParam& q1, const NatParam& q2);

class GaussianLikelihoodFragment : public Fragment {
 public:
  explicit GaussianLikelihoodFragment(GaussianLikelihoodSpec spec);
  std::string kind() const override { return "gaussian_likelihood"; }
  std::vector<Family> port_families() const override;
  Vec update_port(std::size_t k, const std::vector<Vec>& to_factor, const std::vector<Vec>& from_factor) override;
  double expected_log_factor(const std::vector<NatParam>& q) const override;
  bool is_likelihood() const override { return true; }
  std::unique_ptr<Fragment> clone() const override { return std::make_unique<GaussianLikelihoodFragment>(*this); }

 private:
  GaussianLikelihoodSpec spec_;
  GaussianSufficient stats_;
};

}  // namespace vmp
