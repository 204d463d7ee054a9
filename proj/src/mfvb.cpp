#include "vmp/mfvb.hpp"

#include <boost/math/special_functions/digamma.hpp>
#include <cmath>
#include <numbers>

namespace vmp {

namespace {

Mat checked_inverse(const Mat& M, const char* what) {
  Eigen::LLT<Mat> llt(M);
  if (llt.info() != Eigen::Success) throw NumericError("mfvb_linear_regression", std::string(what) + " is not SPD");
  return llt.solve(Mat::Identity(M.rows(), M.cols()));
}

double rel_change(double a, double b) { return std::fabs(a - b) / std::max(std::fabs(b), 1e-300); }

double rel_change(const Mat& a, const Mat& b) {
  return (a - b).cwiseAbs().maxCoeff() / std::max(b.cwiseAbs().maxCoeff(), 1e-300);
}

// Inverse-chi^2(kappa, lambda) is inverse gamma with shape kappa/2, rate lambda/2.
double e_inv(double kappa, double lambda) { return kappa / lambda; }
double e_log(double kappa, double lambda) { return std::log(lambda / 2) - boost::math::digamma(kappa / 2); }
double ent_invchisq(double kappa, double lambda) {
  const double a = kappa / 2;
  return a + std::log(lambda / 2) + std::lgamma(a) - (1 + a) * boost::math::digamma(a);
}
// E log of an Inverse-chi^2(k, l) density at x, given E log x and E(1/x) and E l.
double e_logdens(double k, double e_log_l, double e_logx, double e_invx_times_l) {
  return 0.5 * k * (e_log_l - std::log(2.0)) - std::lgamma(0.5 * k) - (0.5 * k + 1) * e_logx - 0.5 * e_invx_times_l;
}

}  // namespace

MfvbState mfvb_linear_regression(const Vec& y, const Mat& X, const Vec& mu_beta, const Mat& Sigma_beta,
                                 double A_hyper, const MfvbOptions& opts) {
  const Index n = y.size(), d = X.cols();
  if (n < 1 || X.rows() != n || mu_beta.size() != d || Sigma_beta.rows() != d || Sigma_beta.cols() != d)
    throw DimensionError("mfvb_linear_regression: inconsistent dimensions");
  if (!(A_hyper > 0) || !(opts.lambda_init > 0) || !(opts.tol > 0))
    throw DomainError("mfvb_linear_regression: A, lambda_init and tol must be positive");
  const Mat XtX = X.transpose() * X;
  const Vec Xty = X.transpose() * y;
  const double yty = y.squaredNorm();
  const Mat Sb_inv = checked_inverse(Sigma_beta, "Sigma_beta");
  const double kap = static_cast<double>(n) + 1;

  MfvbState s;
  s.lambda_q_sigsq = opts.lambda_init;
  s.mu_q_beta = Vec::Zero(d);
  s.Sigma_q_beta = Mat::Identity(d, d);
  for (s.iterations = 1; s.iterations <= opts.max_iter; ++s.iterations) {
    const MfvbState old = s;
    const double e_inv_sig = kap / s.lambda_q_sigsq;
    s.Sigma_q_beta = checked_inverse(e_inv_sig * XtX + Sb_inv, "q(beta) precision");
    s.mu_q_beta = s.Sigma_q_beta * (e_inv_sig * Xty + Sb_inv * mu_beta);
    s.lambda_q_a = e_inv_sig + 1 / (A_hyper * A_hyper);
    s.lambda_q_sigsq = yty - 2 * s.mu_q_beta.dot(Xty) +
                       (XtX * (s.Sigma_q_beta + s.mu_q_beta * s.mu_q_beta.transpose())).trace() + 2 / s.lambda_q_a;
    s.elbo_trace.push_back(mfvb_elbo(y, X, mu_beta, Sigma_beta, A_hyper, s));
    const double change = std::max({rel_change(s.mu_q_beta, old.mu_q_beta), rel_change(s.Sigma_q_beta, old.Sigma_q_beta),
                                    rel_change(s.lambda_q_sigsq, old.lambda_q_sigsq),
                                    rel_change(s.lambda_q_a, old.lambda_q_a)});
    if (change < opts.tol) {
      s.converged = true;
      break;
    }
  }
  if (!s.converged) s.iterations = opts.max_iter;
  return s;
}

double mfvb_elbo(const Vec& y, const Mat& X, const Vec& mu_beta, const Mat& Sigma_beta, double A_hyper,
                 const MfvbState& s) {
  const double n = static_cast<double>(y.size()), d = static_cast<double>(X.cols());
  const double log2pi = std::log(2 * std::numbers::pi);
  const double ks = n + 1, ka = 2;
  const double Eis = e_inv(ks, s.lambda_q_sigsq), Els = e_log(ks, s.lambda_q_sigsq);
  const double Eia = e_inv(ka, s.lambda_q_a), Ela = e_log(ka, s.lambda_q_a);
  const Mat& S = s.Sigma_q_beta;
  const Vec& m = s.mu_q_beta;
  const double resid = (y - X * m).squaredNorm() + (X.transpose() * X * S).trace();

  const double lik = -0.5 * n * log2pi - 0.5 * n * Els - 0.5 * Eis * resid;
  Eigen::LLT<Mat> lb(Sigma_beta);
  const Mat Sb_inv = lb.solve(Mat::Identity(X.cols(), X.cols()));
  const double logdet_b = 2 * lb.matrixL().toDenseMatrix().diagonal().array().log().sum();
  const Vec dm = m - mu_beta;
  const double prior_beta = -0.5 * d * log2pi - 0.5 * logdet_b - 0.5 * ((Sb_inv * S).trace() + dm.dot(Sb_inv * dm));
  // sigma2 | a ~ Inverse-chi^2(1, 1/a): E log(1/a) = -E log a
  const double p_sig = e_logdens(1, -Ela, Els, Eia * Eis);
  const double p_a = e_logdens(1, std::log(1 / (A_hyper * A_hyper)), Ela, Eia / (A_hyper * A_hyper));

  Eigen::LLT<Mat> lq(S);
  const double logdet_q = 2 * lq.matrixL().toDenseMatrix().diagonal().array().log().sum();
  const double ent = 0.5 * d * (1 + log2pi) + 0.5 * logdet_q + ent_invchisq(ks, s.lambda_q_sigsq) +
                     ent_invchisq(ka, s.lambda_q_a);
  return lik + prior_beta + p_sig + p_a + ent;
}

}  // namespace vmp
