#include "vmp/fragments_glm.hpp"

#include <cmath>

#include "vmp/special.hpp"

namespace vmp {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

void check_data(const Vec& y, const Mat& A, const char* who) {
  if (y.size() < 1 || A.rows() != y.size())
    throw DimensionError(std::string(who) + ": rows(A) must equal length(y) >= 1");
  if (A.cols() < 1) throw DimensionError(std::string(who) + ": A has no columns");
  if (!A.allFinite() || !y.allFinite()) throw DomainError(std::string(who) + ": non-finite data");
}

void check_binary(const Vec& y, const char* who) {
  for (Index i = 0; i < y.size(); ++i)
    if (y[i] != 0.0 && y[i] != 1.0)
      throw DomainError(std::string(who) + ": response must be 0/1, got " + std::to_string(y[i]) + " at row " +
                        std::to_string(i + 1));
}

// diagonal(A M A^T) without forming the n x n product.
Vec quad_diag(const Mat& A, const Mat& M) { return (A * M).cwiseProduct(A).rowwise().sum(); }

Mat weighted_gram(const Mat& A, const Vec& w) { return A.transpose() * w.asDiagonal() * A; }

Vec mvn_message(const Vec& first, const Mat& prec_half) {
  Vec out(first.size() + prec_half.size());
  out << first, vec(prec_half);
  return out;
}

}  // namespace

double zeta_prime(double x) {
  if (std::isnan(x)) return x;
  if (x >= -8.0) return std::exp(-0.5 * x * x - 0.5 * kLog2Pi - log_norm_cdf(x));
  // 1/R(t) with R the Mills ratio at t = -x, by its continued fraction
  // R(t) = 1/(t + 1/(t + 2/(t + 3/(t + ...)))).
  const double t = -x;
  double tail = t;
  for (int k = 80; k >= 1; --k) tail = t + k / tail;
  return tail;
}

double jj_weight(double xi) {
  const double a = std::fabs(xi);
  if (a < 1e-4) {
    const double x2 = a * a;
    return 0.125 - x2 / 96.0 + x2 * x2 / 960.0;
  }
  return std::tanh(0.5 * a) / (4.0 * a);
}

double jj_c(double xi) {
  const double a = std::fabs(xi);
  return 0.5 * a - log1pexp(a) + 0.25 * a * std::tanh(0.5 * a);
}

// ---- Jaakkola-Jordan ----------------------------------------------------------

LogisticFragmentState make_logistic_state(const Vec& y, const Mat& A) {
  check_data(y, A, "logistic likelihood");
  check_binary(y, "logistic likelihood");
  return {y, A, Vec::Ones(y.size()), Mat::Zero(A.cols(), A.cols())};
}

Vec jaakkola_jordan_message(const LogisticFragmentState& s) {
  Vec w(s.xi.size());
  for (Index i = 0; i < w.size(); ++i) w[i] = jj_weight(s.xi[i]);
  return mvn_message(s.A.transpose() * (s.y.array() - 0.5).matrix(), -weighted_gram(s.A, w));
}

LogisticUpdate jaakkola_jordan_update(const LogisticFragmentState& state, const Vec& from, const Vec& to) {
  const auto mom = mvn_moments(to + from, "logistic likelihood: combined theta message");
  LogisticUpdate out{state, {}};
  out.state.Xi = mom.second;
  out.state.xi = quad_diag(state.A, mom.second).cwiseMax(0.0).cwiseSqrt();
  out.message = jaakkola_jordan_message(out.state);
  return out;
}

double jaakkola_jordan_bound(const LogisticFragmentState& s, const Vec& xi, const NatParam& q) {
  const auto mom = mvn_moments(q.eta, "logistic likelihood bound");
  const Vec ex2 = quad_diag(s.A, mom.second);
  const Vec lin = s.A * mom.mean;
  double total = 0;
  for (Index i = 0; i < s.y.size(); ++i)
    total += (s.y[i] - 0.5) * lin[i] - jj_weight(xi[i]) * ex2[i] + jj_c(xi[i]);
  return total;
}

double jaakkola_jordan_bound(const LogisticFragmentState& s, const NatParam& q) {
  return jaakkola_jordan_bound(s, s.xi, q);
}

JaakkolaJordanFragment::JaakkolaJordanFragment(const Vec& y, const Mat& A) : state_(make_logistic_state(y, A)) {}

Vec JaakkolaJordanFragment::update_port(std::size_t, const std::vector<Vec>& to, const std::vector<Vec>& from) {
  const NatParam q{Family::multivariate_normal(state_.A.cols()), to[0] + from[0]};
  const double before = jaakkola_jordan_bound(state_, q);
  auto up = jaakkola_jordan_update(state_, from[0], to[0]);
  xi_bounds_.emplace_back(before, jaakkola_jordan_bound(up.state, q));
  state_ = std::move(up.state);
  return up.message;
}

double JaakkolaJordanFragment::expected_log_factor(const std::vector<NatParam>& q) const {
  return jaakkola_jordan_bound(state_, q.at(0));
}

// ---- Albert-Chib ----------------------------------------------------------------

ProbitFragmentState make_probit_state(const Vec& y, const Mat& A) {
  check_data(y, A, "probit likelihood");
  check_binary(y, "probit likelihood");
  return {y, A, Vec::Zero(y.size())};
}

ProbitUpdate albert_chib_update(const ProbitFragmentState& state, const Vec& from, const Vec& to) {
  const auto mom = mvn_moments(to + from, "probit likelihood: combined theta message");
  ProbitUpdate out{state, {}};
  out.state.nu = state.A * mom.mean;
  Vec ea(state.y.size());
  for (Index i = 0; i < ea.size(); ++i) {
    const double s = 2 * state.y[i] - 1;
    ea[i] = out.state.nu[i] + s * zeta_prime(s * out.state.nu[i]);
  }
  out.message = mvn_message(state.A.transpose() * ea, -0.5 * (state.A.transpose() * state.A));
  return out;
}

double albert_chib_expected_log_factor(const ProbitFragmentState& st, const NatParam& q) {
  const auto mom = mvn_moments(q.eta, "probit likelihood ELBO");
  const Vec m = st.A * mom.mean;
  const Vec v = quad_diag(st.A, mom.cov);
  double total = 0;
  for (Index i = 0; i < m.size(); ++i) {
    const double s = 2 * st.y[i] - 1, nu = st.nu[i];
    const double z = zeta_prime(s * nu);
    total += log_norm_cdf(s * nu) - 0.5 * (nu - m[i]) * (nu - m[i]) + s * z * (m[i] - nu) - 0.5 * v[i];
  }
  return total;
}

AlbertChibFragment::AlbertChibFragment(const Vec& y, const Mat& A) : state_(make_probit_state(y, A)) {}

Vec AlbertChibFragment::update_port(std::size_t, const std::vector<Vec>& to, const std::vector<Vec>& from) {
  auto up = albert_chib_update(state_, from[0], to[0]);
  state_ = std::move(up.state);
  return up.message;
}

double AlbertChibFragment::expected_log_factor(const std::vector<NatParam>& q) const {
  return albert_chib_expected_log_factor(state_, q.at(0));
}

// ---- Knowles-Minka ----------------------------------------------------------

PoissonFragmentState make_poisson_state(const Vec& y, const Mat& A) {
  check_data(y, A, "poisson likelihood");
  for (Index i = 0; i < y.size(); ++i)
    if (y[i] < 0 || y[i] != std::floor(y[i]))
      throw DomainError("poisson likelihood: response must be a nonnegative integer, got " + std::to_string(y[i]) +
                        " at row " + std::to_string(i + 1));
  return {y, A, Vec::Ones(y.size())};
}

namespace {

Vec poisson_omega(const Mat& A, const Vec& mu, const Mat& Sigma) {
  const Vec expo = A * mu + 0.5 * quad_diag(A, Sigma);
  for (Index i = 0; i < expo.size(); ++i)
    if (!(expo[i] <= 700.0))
      throw NumericError("poisson likelihood",
                         "linear predictor " + std::to_string(expo[i]) + " at row " + std::to_string(i + 1) +
                             " exceeds 700; exp would overflow, retry with damping < 1");
  return expo.array().exp().matrix();
}

double log_factorial_sum(const Vec& y) {
  double s = 0;
  for (Index i = 0; i < y.size(); ++i) s += log_gamma(y[i] + 1);
  return s;
}

}  // namespace

PoissonUpdate knowles_minka_update(const PoissonFragmentState& state, const Vec& from, const Vec& to) {
  const auto mom = mvn_moments(to + from, "poisson likelihood: combined theta message");
  PoissonUpdate out{state, {}};
  out.state.omega = poisson_omega(state.A, mom.mean, mom.cov);
  const Vec& w = out.state.omega;
  const Vec first = state.A.transpose() * (state.y - w + w.cwiseProduct(state.A * mom.mean));
  out.message = mvn_message(first, -0.5 * weighted_gram(state.A, w));
  return out;
}

double poisson_expected_log_lik(const Vec& y, const Mat& A, const Vec& mu, const Mat& Sigma) {
  return y.dot(A * mu) - poisson_omega(A, mu, Sigma).sum() - log_factorial_sum(y);
}

double knowles_minka_local_objective(const Vec& y, const Mat& A, const Vec& eta_to, const Vec& mu,
                                          const Mat& Sigma) {
  const Index d = mu.size();
  const Mat S = symmetrize(vec_inverse(eta_to.tail(d * d), d));
  const double non_entropy =
      poisson_expected_log_lik(y, A, mu, Sigma) + mu.dot(eta_to.head(d)) + mu.dot(S * mu) + (Sigma.cwiseProduct(S)).sum();
  const double ent = 0.5 * static_cast<double>(d) * (1 + kLog2Pi) + 0.5 * spd_logdet(Sigma, "poisson local objective");
  return non_entropy + ent;
}

Vec knowles_minka_local_gradient(const Vec& y, const Mat& A, const Vec& eta_to, const Vec& mu,
                                      const Mat& Sigma) {
  const Index d = mu.size();
  const Mat S = symmetrize(vec_inverse(eta_to.tail(d * d), d));
  return A.transpose() * (y - poisson_omega(A, mu, Sigma)) + eta_to.head(d) + 2 * S * mu;
}

KnowlesMinkaFragment::KnowlesMinkaFragment(const Vec& y, const Mat& A) : state_(make_poisson_state(y, A)) {}

Vec KnowlesMinkaFragment::update_port(std::size_t, const std::vector<Vec>& to, const std::vector<Vec>& from) {
  auto up = knowles_minka_update(state_, from[0], to[0]);
  state_ = std::move(up.state);
  return up.message;
}

std::optional<Vec> KnowlesMinkaFragment::initial_message(std::size_t) const {
  const Vec w = (state_.y.array() + 0.5).matrix();
  const Vec eta0 = w.array().log().matrix();
  return mvn_message(state_.A.transpose() * (state_.y - w + w.cwiseProduct(eta0)), -0.5 * weighted_gram(state_.A, w));
}

double KnowlesMinkaFragment::expected_log_factor(const std::vector<NatParam>& q) const {
  const auto mom = mvn_moments(q.at(0).eta, "poisson likelihood ELBO");
  return poisson_expected_log_lik(state_.y, state_.A, mom.mean, mom.cov);
}

}  // namespace vmp
