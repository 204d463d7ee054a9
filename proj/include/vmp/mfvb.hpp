#pragma once

#include <vector>

#include "vmp/linalg.hpp"

namespace vmp {

// Coordinate ascent for y | beta, sigma2 ~ N(X beta, sigma2 I),
// beta ~ N(mu_beta, Sigma_beta), sigma2 | a ~ Inverse-chi^2(1, 1/a),
// a ~ Inverse-chi^2(1, A^{-2}). Written against Eigen only; it shares no
// code with the message passing fragments.
struct MfvbState {
  Vec mu_q_beta;
  Mat Sigma_q_beta;
  double lambda_q_sigsq = 1.0;  // q(sigma2) is Inverse-chi^2(n + 1, lambda_q_sigsq)
  double lambda_q_a = 1.0;      // q(a) is Inverse-chi^2(2, lambda_q_a)
  std::size_t iterations = 0;
  bool converged = false;
  std::vector<double> elbo_trace;  // after each cycle
};

struct MfvbOptions {
  double tol = 1e-10;
  std::size_t max_iter = 1000;
  double lambda_init = 1.0;
};

MfvbState mfvb_linear_regression(const Vec& y, const Mat& X, const Vec& mu_beta, const Mat& Sigma_beta,
                                 double A_hyper, const MfvbOptions& opts = {});

double mfvb_elbo(const Vec& y, const Mat& X, const Vec& mu_beta, const Mat& Sigma_beta, double A_hyper,
                 const MfvbState& s);

}  // namespace vmp
