#include "vmp/fragments.hpp"

#include <cmath>

namespace vmp {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;
constexpr double kLogPi = 1.1447298858494001741;

Vec stack(double head, const Mat& M) {
  Vec out(1 + M.size());
  out << head, vec(M);
  return out;
}

void check_len(const Family& f, const Vec& eta, const char* what) {
  if (eta.size() != f.length())
    throw DimensionError(std::string(what) + ": expected " + f.name() + " parameter of length " +
                         std::to_string(f.length()) + ", got " + std::to_string(eta.size()));
}

Mat diagonal_part(const Mat& M) { return Mat(M.diagonal().asDiagonal()); }

}  // namespace

// ---- priors -------------------------------------------------------------------

Vec gaussian_prior_message(const GaussianPriorSpec& spec) {
  const Index d = spec.mu_theta.size();
  if (d < 1 || spec.Sigma_theta.rows() != d || spec.Sigma_theta.cols() != d)
    throw DimensionError("gaussian_prior_message: mu and Sigma dimensions disagree");
  const Mat P = spd_inverse(spec.Sigma_theta, "gaussian_prior_message: Sigma");
  Vec eta(d + d * d);
  eta << P * spec.mu_theta, -0.5 * vec(P);
  return eta;
}

Vec inverse_wishart_prior_message(const InverseWishartPriorSpec& spec) {
  const Index d = spec.Lambda_Theta.rows();
  if (d < 1 || spec.Lambda_Theta.cols() != d) throw DimensionError("inverse_wishart_prior_message: Lambda not square");
  if (!(spec.kappa_Theta > static_cast<double>(d) - 1))
    throw DomainError("inverse_wishart_prior_message: kappa must exceed d - 1");
  spd_logdet(spec.Lambda_Theta, "inverse_wishart_prior_message: Lambda");  // SPD check
  return stack(-0.5 * (spec.kappa_Theta + static_cast<double>(d) + 1), -0.5 * spec.Lambda_Theta);
}

Vec inverse_chi_squared_prior_message(double kappa, double lambda) {
  if (!(kappa > 0) || !(lambda > 0)) throw DomainError("inverse_chi_squared_prior_message: kappa, lambda must be positive");
  return (Vec(2) << -0.5 * (kappa + 2), -0.5 * lambda).finished();
}

double log_inverse_wishart_normalizer(Index d, double kappa) {
  const double dd = static_cast<double>(d);
  double s = 0.5 * dd * kappa * std::log(2.0) + 0.25 * dd * (dd - 1) * kLogPi;
  for (Index j = 1; j <= d; ++j) s += log_gamma(0.5 * (kappa + 1 - static_cast<double>(j)));
  return s;
}

PriorFragment::PriorFragment(std::string kind, NatParam eta) : kind_(std::move(kind)), eta_(std::move(eta)) {
  require_proper(eta_, "prior fragment '" + kind_ + "'");
}

double PriorFragment::expected_log_factor(const std::vector<NatParam>& q) const {
  const Vec t = expected_sufficient_statistic(q.at(0));
  return t.dot(eta_.eta) - log_partition(eta_) + expected_log_base_measure(q[0]);
}

std::shared_ptr<PriorFragment> make_gaussian_prior(const GaussianPriorSpec& spec) {
  const Index d = spec.mu_theta.size();
  return std::make_shared<PriorFragment>("gaussian_prior",
                                         NatParam{Family::multivariate_normal(d), gaussian_prior_message(spec)});
}

std::shared_ptr<PriorFragment> make_inverse_wishart_prior(const InverseWishartPriorSpec& spec, FamilyKind family) {
  const Index d = spec.Lambda_Theta.rows();
  Vec eta = inverse_wishart_prior_message(spec);
  Family f;
  switch (family) {
    case FamilyKind::InverseChiSquared:
      if (d != 1) throw DimensionError("make_inverse_wishart_prior: Inverse-chi^2 node needs d = 1");
      f = Family::inverse_chi_squared();
      break;
    case FamilyKind::InverseWishart:
      f = Family::inverse_wishart(d);
      break;
    case FamilyKind::InverseGWishartDiag:
      if ((spec.Lambda_Theta - diagonal_part(spec.Lambda_Theta)).cwiseAbs().maxCoeff() > 0)
        throw DomainError("make_inverse_wishart_prior: Lambda must be diagonal for a diagonal node");
      f = Family::inverse_g_wishart_diag(d);
      break;
    default:
      throw DomainError("make_inverse_wishart_prior: unsupported node family");
  }
  return std::make_shared<PriorFragment>("inverse_wishart_prior", NatParam{f, eta});
}

// ---- iterated inverse G-Wishart -------------------------------------------------

Family IteratedIGWSpec::theta1_family() const {
  switch (graph_kind) {
    case IgwGraph::scalar_d1: return Family::inverse_chi_squared();
    case IgwGraph::totally_connected: return Family::inverse_wishart(d_Theta);
    case IgwGraph::totally_disconnected: return Family::inverse_g_wishart_diag(d_Theta);
  }
  throw DomainError("IteratedIGWSpec: unknown graph kind");
}

Family IteratedIGWSpec::theta2_family() const {
  if (graph_kind == IgwGraph::scalar_d1) return Family::inverse_chi_squared();
  return theta2_diagonal ? Family::inverse_g_wishart_diag(d_Theta) : Family::inverse_wishart(d_Theta);
}

Mat expected_inverse_from_natural(const Family& f, const Vec& eta, const std::string& context) {
  check_len(f, eta, "expected_inverse_from_natural");
  const Index d = f.d;
  switch (f.kind) {
    case FamilyKind::InverseChiSquared: {
      if (eta[1] == 0.0) throw NumericError(context, "zero denominator (eta)_2 in E(1/x)");
      return Mat::Constant(1, 1, (eta[0] + 1) / eta[1]);
    }
    case FamilyKind::InverseWishart: {
      const Mat V = symmetrize(vec_inverse(eta.tail(d * d), d));
      return (eta[0] + 0.5 * static_cast<double>(d + 1)) * negdef_inverse(V, context);
    }
    case FamilyKind::InverseGWishartDiag: {
      Mat E = Mat::Zero(d, d);
      for (Index i = 0; i < d; ++i) {
        const double v = eta[1 + i * d + i];
        if (v == 0.0) throw NumericError(context, "zero diagonal entry in (eta)_2");
        E(i, i) = (eta[0] + 1) / v;
      }
      return E;
    }
    default:
      throw DomainError(context + ": E(X^{-1}) is not available for " + f.name());
  }
}

Vec igw_scalar_to_theta1(double kappa, const Vec& c) {
  if (c.size() != 2) throw DimensionError("igw_scalar_to_theta1: expected length 2");
  if (c[1] == 0.0) throw NumericError("igw_scalar_to_theta1", "zero denominator (eta)_2");
  return (Vec(2) << -0.5 * (kappa + 2), -0.5 * (c[0] + 1) / c[1]).finished();
}

Vec igw_scalar_to_theta2(double kappa, const Vec& c) {
  if (c.size() != 2) throw DimensionError("igw_scalar_to_theta2: expected length 2");
  if (c[1] == 0.0) throw NumericError("igw_scalar_to_theta2", "zero denominator (eta)_2");
  return (Vec(2) << -0.5 * kappa, -0.5 * (c[0] + 1) / c[1]).finished();
}

Vec igw_message_to_theta1(const IteratedIGWSpec& s, const Vec& conn2) {
  const double dd = static_cast<double>(s.d_Theta);
  switch (s.graph_kind) {
    case IgwGraph::scalar_d1:
      return igw_scalar_to_theta1(s.kappa, conn2);
    case IgwGraph::totally_connected:
      return stack(-0.5 * (s.kappa + dd + 1),
                   -0.5 * expected_inverse_from_natural(s.theta2_family(), conn2, "iterated IGW -> Theta1"));
    case IgwGraph::totally_disconnected:
      return stack(-0.5 * (s.kappa + dd + 1),
                   -0.5 * diagonal_part(expected_inverse_from_natural(s.theta2_family(), conn2,
                                                                      "iterated IGW -> Theta1")));
  }
  throw DomainError("igw_message_to_theta1: unknown graph kind");
}

Vec igw_message_to_theta2(const IteratedIGWSpec& s, const Vec& conn1) {
  const double dd = static_cast<double>(s.d_Theta);
  switch (s.graph_kind) {
    case IgwGraph::scalar_d1:
      return igw_scalar_to_theta2(s.kappa, conn1);
    case IgwGraph::totally_connected: {
      Mat E = expected_inverse_from_natural(s.theta1_family(), conn1, "iterated IGW -> Theta2");
      if (s.theta2_diagonal) E = diagonal_part(E);
      return stack(-0.5 * s.kappa, -0.5 * E);
    }
    case IgwGraph::totally_disconnected: {
      // each diagonal entry of Theta1 is Inverse-chi^2(kappa + d - 1, 1/Theta2_ii)
      const Mat E = expected_inverse_from_natural(s.theta1_family(), conn1, "iterated IGW -> Theta2");
      return stack(-0.5 * (s.kappa + dd - 1), -0.5 * E);
    }
  }
  throw DomainError("igw_message_to_theta2: unknown graph kind");
}

std::pair<Vec, Vec> iterated_igw_messages(const IteratedIGWSpec& spec, const Vec& to1, const Vec& to2,
                                          const Vec& from1, const Vec& from2) {
  return {igw_message_to_theta1(spec, to2 + from2), igw_message_to_theta2(spec, to1 + from1)};
}

double igw_expected_log_factor(const IteratedIGWSpec& s, const NatParam& q1, const NatParam& q2) {
  const double dd = static_cast<double>(s.d_Theta);
  const Index d = s.d_Theta;
  const Vec t1 = expected_sufficient_statistic(q1);
  const Vec t2 = expected_sufficient_statistic(q2);
  Mat Einv2 = vec_inverse(t2.tail(d * d), d);
  const double elogdet2 = t2[0];
  if (s.graph_kind == IgwGraph::totally_disconnected) {
    const double kp = s.kappa + dd - 1;
    Einv2 = diagonal_part(Einv2);
    return -0.5 * (s.kappa + dd + 1) * t1[0] - 0.5 * t1.tail(d * d).dot(vec(Einv2)) - 0.5 * kp * elogdet2 -
           dd * (0.5 * kp * std::log(2.0) + log_gamma(0.5 * kp));
  }
  return -0.5 * (s.kappa + dd + 1) * t1[0] - 0.5 * t1.tail(d * d).dot(vec(Einv2)) - 0.5 * s.kappa * elogdet2 -
         log_inverse_wishart_normalizer(d, s.kappa);
}

IteratedIGWFragment::IteratedIGWFragment(IteratedIGWSpec spec) : spec_(spec) {
  if (spec_.d_Theta < 1) throw DomainError("iterated IGW: d_Theta must be >= 1");
  if (spec_.graph_kind == IgwGraph::scalar_d1 && spec_.d_Theta != 1)
    throw DomainError("iterated IGW: scalar graph kind needs d_Theta = 1");
  if (spec_.graph_kind == IgwGraph::totally_disconnected && !spec_.theta2_diagonal)
    throw DomainError("iterated IGW: a totally disconnected Theta1 needs a diagonal Theta2");
  const double dd = static_cast<double>(spec_.d_Theta);
  const double kmin = spec_.graph_kind == IgwGraph::totally_disconnected ? 1 - dd : dd - 1;
  if (!(spec_.kappa > kmin)) throw DomainError("iterated IGW: kappa must exceed " + std::to_string(kmin));
}

std::vector<Family> IteratedIGWFragment::port_families() const {
  return {spec_.theta1_family(), spec_.theta2_family()};
}

Vec IteratedIGWFragment::update_port(std::size_t k, const std::vector<Vec>& to, const std::vector<Vec>& from) {
  if (k == 0) return igw_message_to_theta1(spec_, to[1] + from[1]);
  return igw_message_to_theta2(spec_, to[0] + from[0]);
}

double IteratedIGWFragment::expected_log_factor(const std::vector<NatParam>& q) const {
  return igw_expected_log_factor(spec_, q.at(0), q.at(1));
}

// ---- Gaussian penalization ----------------------------------------------------

Index GaussianPenalizationSpec::coef_dim() const {
  Index p = d_theta0;
  for (const auto& b : blocks) p += b.m * b.d_Theta;
  return p;
}

Index GaussianPenalizationSpec::block_offset(std::size_t l) const {
  Index o = d_theta0;
  for (std::size_t i = 0; i < l; ++i) o += blocks[i].m * blocks[i].d_Theta;
  return o;
}

Family GaussianPenalizationSpec::theta_family(std::size_t l) const {
  const Index d = blocks.at(l).d_Theta;
  return d == 1 ? Family::inverse_chi_squared() : Family::inverse_wishart(d);
}

void GaussianPenalizationSpec::validate() const {
  if (blocks.empty()) throw DomainError("gaussian penalization: at least one penalized block is required");
  for (const auto& b : blocks)
    if (b.m < 1 || b.d_Theta < 1) throw DomainError("gaussian penalization: blocks need m >= 1 and d >= 1");
  if (d_theta0 < 0 || mu_theta0.size() != d_theta0 || Sigma_theta0.rows() != d_theta0 ||
      Sigma_theta0.cols() != d_theta0)
    throw DimensionError("gaussian penalization: theta0 hyperparameters do not match d_theta0");
  if (d_theta0 > 0) spd_logdet(Sigma_theta0, "gaussian penalization: Sigma_theta0");
}

Mat penalization_selector(const GaussianPenalizationSpec& spec, std::size_t l) {
  const Index p = spec.coef_dim();
  Mat D = Mat::Zero(p, p);
  const Index o = spec.block_offset(l);
  const Index len = spec.blocks.at(l).m * spec.blocks[l].d_Theta;
  D.block(o, o, len, len).setIdentity();
  return D;
}

Vec penalization_to_coef(const GaussianPenalizationSpec& spec, const std::vector<Vec>& conn) {
  if (conn.size() != spec.blocks.size()) throw DimensionError("penalization_to_coef: one vector per block needed");
  const Index p = spec.coef_dim(), d0 = spec.d_theta0;
  Vec e1 = Vec::Zero(p);
  Mat P = Mat::Zero(p, p);
  if (d0 > 0) {
    const Mat P0 = spd_inverse(spec.Sigma_theta0, "gaussian penalization: Sigma_theta0");
    e1.head(d0) = P0 * spec.mu_theta0;
    P.topLeftCorner(d0, d0) = P0;
  }
  for (std::size_t l = 0; l < spec.blocks.size(); ++l) {
    const Index d = spec.blocks[l].d_Theta;
    const Mat Omega = expected_inverse_from_natural(spec.theta_family(l), conn[l],
                                                    "gaussian penalization: Theta_" + std::to_string(l + 1));
    Index o = spec.block_offset(l);
    for (Index k = 0; k < spec.blocks[l].m; ++k, o += d) P.block(o, o, d, d) = Omega;
  }
  Vec out(p + p * p);
  out << e1, -0.5 * vec(P);
  return out;
}

namespace {

Mat block_second_moment(const GaussianPenalizationSpec& spec, std::size_t l, const Mat& second) {
  const Index d = spec.blocks.at(l).d_Theta;
  Mat S = Mat::Zero(d, d);
  Index o = spec.block_offset(l);
  for (Index k = 0; k < spec.blocks[l].m; ++k, o += d) S += second.block(o, o, d, d);
  return S;
}

}  // namespace

Vec penalization_to_theta(const GaussianPenalizationSpec& spec, std::size_t l, const Vec& conn_coef) {
  const auto mom = mvn_moments(conn_coef, "gaussian penalization: coefficient vector");
  if (mom.mean.size() != spec.coef_dim()) throw DimensionError("penalization_to_theta: coefficient length mismatch");
  return stack(-0.5 * static_cast<double>(spec.blocks.at(l).m), -0.5 * block_second_moment(spec, l, mom.second));
}

Vec penalization_to_theta_gvmp(const GaussianPenalizationSpec& spec, std::size_t l, const Vec& conn_coef) {
  if (spec.blocks.at(l).d_Theta != 1) throw DomainError("penalization_to_theta_gvmp: only for d_Theta = 1");
  const Index p = spec.coef_dim();
  return (Vec(2) << -0.5 * static_cast<double>(spec.blocks[l].m),
          g_vmp(conn_coef, penalization_selector(spec, l), Vec::Zero(p), 0.0, "gaussian penalization"))
      .finished();
}

PenalizationMessages gaussian_penalization_messages(const GaussianPenalizationSpec& spec, const Vec& coef_to,
                                                    const std::vector<Vec>& thetas_to, const Vec& to_coef,
                                                    const std::vector<Vec>& to_thetas) {
  if (thetas_to.size() != spec.blocks.size() || to_thetas.size() != spec.blocks.size())
    throw DimensionError("gaussian_penalization_messages: one message per block needed");
  std::vector<Vec> conn;
  for (std::size_t l = 0; l < spec.blocks.size(); ++l) conn.push_back(thetas_to[l] + to_thetas[l]);
  PenalizationMessages out;
  out.to_coef = penalization_to_coef(spec, conn);
  const Vec cc = coef_to + to_coef;
  for (std::size_t l = 0; l < spec.blocks.size(); ++l) out.to_thetas.push_back(penalization_to_theta(spec, l, cc));
  return out;
}

double penalization_expected_log_factor(const GaussianPenalizationSpec& spec, const NatParam& q_coef,
                                        const std::vector<NatParam>& q_thetas) {
  const auto mom = mvn_moments(q_coef.eta, "gaussian penalization ELBO");
  const Index d0 = spec.d_theta0;
  double total = 0;
  if (d0 > 0) {
    const Mat P0 = spd_inverse(spec.Sigma_theta0, "gaussian penalization: Sigma_theta0");
    const Vec m0 = mom.mean.head(d0);
    const Mat S0 = mom.second.topLeftCorner(d0, d0);
    const Vec& mu = spec.mu_theta0;
    total += -0.5 * ((P0.cwiseProduct(S0)).sum() - 2 * mu.dot(P0 * m0) + mu.dot(P0 * mu)) -
             0.5 * spd_logdet(spec.Sigma_theta0, "Sigma_theta0") - 0.5 * static_cast<double>(d0) * kLog2Pi;
  }
  for (std::size_t l = 0; l < spec.blocks.size(); ++l) {
    const Index d = spec.blocks[l].d_Theta;
    const double m = static_cast<double>(spec.blocks[l].m);
    const Vec t = expected_sufficient_statistic(q_thetas.at(l));
    const Mat Einv = vec_inverse(t.tail(d * d), d);
    const Mat S = block_second_moment(spec, l, mom.second);
    total += -0.5 * (Einv.cwiseProduct(S)).sum() - 0.5 * m * static_cast<double>(d) * kLog2Pi - 0.5 * m * t[0];
  }
  return total;
}

GaussianPenalizationFragment::GaussianPenalizationFragment(GaussianPenalizationSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
}

std::vector<Family> GaussianPenalizationFragment::port_families() const {
  std::vector<Family> f{Family::multivariate_normal(spec_.coef_dim())};
  for (std::size_t l = 0; l < spec_.blocks.size(); ++l) f.push_back(spec_.theta_family(l));
  return f;
}

std::vector<std::size_t> GaussianPenalizationFragment::port_order() const {
  std::vector<std::size_t> order;
  for (std::size_t l = 1; l <= spec_.blocks.size(); ++l) order.push_back(l);
  order.push_back(0);
  return order;
}

Vec GaussianPenalizationFragment::update_port(std::size_t k, const std::vector<Vec>& to,
                                              const std::vector<Vec>& from) {
  if (k == 0) {
    std::vector<Vec> conn;
    for (std::size_t l = 1; l < to.size(); ++l) conn.push_back(to[l] + from[l]);
    return penalization_to_coef(spec_, conn);
  }
  return penalization_to_theta(spec_, k - 1, to[0] + from[0]);
}

double GaussianPenalizationFragment::expected_log_factor(const std::vector<NatParam>& q) const {
  return penalization_expected_log_factor(spec_, q.at(0), std::vector<NatParam>(q.begin() + 1, q.end()));
}

// ---- Gaussian likelihood --------------------------------------------------------

GaussianSufficient gaussian_sufficient(const GaussianLikelihoodSpec& spec) {
  if (spec.y.size() < 1 || spec.A.rows() != spec.y.size())
    throw DimensionError("gaussian likelihood: rows(A) must equal length(y) >= 1");
  if (!spec.A.allFinite() || !spec.y.allFinite()) throw DomainError("gaussian likelihood: non-finite data");
  GaussianSufficient s;
  s.AtA = spec.A.transpose() * spec.A;
  s.Aty = spec.A.transpose() * spec.y;
  s.yty = spec.y.squaredNorm();
  s.n = spec.y.size();
  return s;
}

Vec likelihood_to_theta1(const GaussianSufficient& s, const Vec& conn2) {
  const double c = expected_inverse_from_natural(Family::inverse_chi_squared(), conn2, "gaussian likelihood -> theta1")(0, 0);
  const Index d = s.Aty.size();
  Vec out(d + d * d);
  out << s.Aty * c, -0.5 * c * vec(s.AtA);
  return out;
}

Vec likelihood_to_theta2(const GaussianSufficient& s, const Vec& conn1) {
  return (Vec(2) << -0.5 * static_cast<double>(s.n),
          g_vmp(conn1, s.AtA, s.Aty, s.yty, "gaussian likelihood -> theta2"))
      .finished();
}

std::pair<Vec, Vec> gaussian_likelihood_messages(const GaussianLikelihoodSpec& spec, const Vec& t1, const Vec& t2,
                                                 const Vec& f1, const Vec& f2) {
  const auto s = gaussian_sufficient(spec);
  return {likelihood_to_theta1(s, t2 + f2), likelihood_to_theta2(s, t1 + f1)};
}

double likelihood_expected_log_factor(const GaussianSufficient& s, const NatParam& q1, const NatParam& q2) {
  const Vec t2 = expected_sufficient_statistic(q2);
  const double n = static_cast<double>(s.n);
  return t2[1] * g_vmp(q1.eta, s.AtA, s.Aty, s.yty, "gaussian likelihood ELBO") - 0.5 * n * t2[0] -
         0.5 * n * kLog2Pi;
}

GaussianLikelihoodFragment::GaussianLikelihoodFragment(GaussianLikelihoodSpec spec)
    : spec_(std::move(spec)), stats_(gaussian_sufficient(spec_)) {}

std::vector<Family> GaussianLikelihoodFragment::port_families() const {
  return {Family::multivariate_normal(spec_.A.cols()), Family::inverse_chi_squared()};
}

Vec GaussianLikelihoodFragment::update_port(std::size_t k, const std::vector<Vec>& to, const std::vector<Vec>& from) {
  if (k == 0) return likelihood_to_theta1(stats_, to[1] + from[1]);
  return likelihood_to_theta2(stats_, to[0] + from[0]);
}

double GaussianLikelihoodFragment::expected_log_factor(const std::vector<NatParam>& q) const {
  return likelihood_expected_log_factor(stats_, q.at(0), q.at(1));
}

}  // namespace vmp
