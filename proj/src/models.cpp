#include "vmp/models.hpp"

#include <gsl/gsl_bspline.h>
#include <gsl/gsl_errno.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <random>
#include <set>

#include "vmp/special.hpp"

namespace vmp {

std::string to_string(SplineKind k) { return k == SplineKind::osullivan ? "osullivan" : "truncated_linear"; }

std::string to_string(Link l) {
  switch (l) {
    case Link::identity: return "identity";
    case Link::logit: return "logit";
    case Link::probit: return "probit";
    case Link::log: return "log";
  }
  return "identity";
}

SplineKind spline_kind_from_string(const std::string& s) {
  if (s == "truncated_linear") return SplineKind::truncated_linear;
  if (s == "osullivan" || s == "osullivan_like") return SplineKind::osullivan;
  throw DomainError("unknown spline kind '" + s + "' (expected truncated_linear or osullivan)");
}

Link link_from_string(const std::string& s) {
  if (s == "identity") return Link::identity;
  if (s == "logit") return Link::logit;
  if (s == "probit") return Link::probit;
  if (s == "log") return Link::log;
  throw DomainError("unknown link '" + s + "' (expected identity, logit, probit or log)");
}

double inverse_link(Link link, double eta) {
  switch (link) {
    case Link::identity: return eta;
    case Link::logit: return 1 / (1 + std::exp(-eta));
    case Link::probit: return 0.5 * std::erfc(-eta / std::numbers::sqrt2);
    case Link::log: return std::exp(eta);
  }
  return eta;
}

// ---- splines ---------------------------------------------------------------------

Vec quantile_knots(const Vec& x, Index n_knots) {
  std::vector<double> u(x.data(), x.data() + x.size());
  std::sort(u.begin(), u.end());
  u.erase(std::unique(u.begin(), u.end()), u.end());
  if (n_knots < 1) throw DomainError("quantile_knots: need at least one knot");
  if (static_cast<Index>(u.size()) < n_knots + 2)
    throw DomainError("quantile_knots: " + std::to_string(u.size()) + " distinct predictor values cannot support " +
                      std::to_string(n_knots) + " interior knots");
  Vec k(n_knots);
  const double N1 = static_cast<double>(u.size() - 1);
  for (Index j = 0; j < n_knots; ++j) {
    const double h = N1 * static_cast<double>(j + 1) / static_cast<double>(n_knots + 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const double frac = h - static_cast<double>(lo);
    k[j] = lo + 1 < u.size() ? u[lo] + frac * (u[lo + 1] - u[lo]) : u[lo];
  }
  return k;
}

namespace {

struct GslBspline {
  gsl_bspline_workspace* w = nullptr;
  gsl_vector* B = nullptr;
  gsl_matrix* dB = nullptr;
  GslBspline(const Vec& breaks) {
    static const bool quiet = [] {
      gsl_set_error_handler_off();
      return true;
    }();
    (void)quiet;
    w = gsl_bspline_alloc(4, static_cast<std::size_t>(breaks.size()));
    gsl_vector* br = gsl_vector_alloc(static_cast<std::size_t>(breaks.size()));
    for (Index i = 0; i < breaks.size(); ++i) gsl_vector_set(br, static_cast<std::size_t>(i), breaks[i]);
    gsl_bspline_knots(br, w);
    gsl_vector_free(br);
    B = gsl_vector_alloc(gsl_bspline_ncoeffs(w));
    dB = gsl_matrix_alloc(gsl_bspline_ncoeffs(w), 3);
  }
  ~GslBspline() {
    gsl_matrix_free(dB);
    gsl_vector_free(B);
    gsl_bspline_free(w);
  }
  GslBspline(const GslBspline&) = delete;
  GslBspline& operator=(const GslBspline&) = delete;
  Index ncoef() const { return static_cast<Index>(gsl_bspline_ncoeffs(w)); }
  Vec eval(double x) {
    if (gsl_bspline_eval(x, B, w) != GSL_SUCCESS) throw NumericError("O'Sullivan basis", "B-spline evaluation failed");
    Vec out(ncoef());
    for (Index i = 0; i < out.size(); ++i) out[i] = gsl_vector_get(B, static_cast<std::size_t>(i));
    return out;
  }
  Vec second_derivative(double x) {
    if (gsl_bspline_deriv_eval(x, 2, dB, w) != GSL_SUCCESS)
      throw NumericError("O'Sullivan basis", "B-spline derivative evaluation failed");
    Vec out(ncoef());
    for (Index i = 0; i < out.size(); ++i) out[i] = gsl_matrix_get(dB, static_cast<std::size_t>(i), 2);
    return out;
  }
};

Vec breakpoints(const SplineBasis& b) {
  Vec br(b.knots.size() + 2);
  br << b.lo, b.knots, b.hi;
  return br;
}

}  // namespace

SplineBasis make_spline_basis(SplineKind kind, const Vec& knots, double lo, double hi) {
  SplineBasis b{kind, knots, lo, hi, {}};
  for (Index i = 1; i < knots.size(); ++i)
    if (!(knots[i] > knots[i - 1])) throw DomainError("spline basis: knots must be strictly increasing");
  if (kind == SplineKind::truncated_linear) return b;
  if (!(knots.size() >= 1 && lo < knots[0] && knots[knots.size() - 1] < hi))
    throw DomainError("spline basis: interior knots must lie strictly inside (lo, hi)");
  GslBspline bs(breakpoints(b));
  const Index p = bs.ncoef();
  Mat Omega = Mat::Zero(p, p);
  const Vec br = breakpoints(b);
  // B'' is piecewise linear, so Simpson's rule on each interval is exact.
  for (Index j = 0; j + 1 < br.size(); ++j) {
    const double a = br[j], c = br[j + 1], h = c - a;
    const double pts[3] = {a, 0.5 * (a + c), c};
    const double wts[3] = {h / 6, 4 * h / 6, h / 6};
    for (int s = 0; s < 3; ++s) {
      const Vec d2 = bs.second_derivative(pts[s]);
      Omega.noalias() += wts[s] * d2 * d2.transpose();
    }
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(symmetrize(Omega));
  const Index K = knots.size() + 2;  // the two null directions are the linear functions
  b.transform.resize(p, K);
  for (Index k = 0; k < K; ++k) {
    const Index col = p - 1 - k;  // descending eigenvalues
    const double ev = es.eigenvalues()[col];
    if (!(ev > 0)) throw NumericError("O'Sullivan basis", "penalty matrix has fewer positive eigenvalues than expected");
    b.transform.col(k) = es.eigenvectors().col(col) / std::sqrt(ev);
  }
  return b;
}

Index SplineBasis::size() const { return kind == SplineKind::osullivan ? knots.size() + 2 : knots.size(); }

Mat SplineBasis::evaluate(const Vec& x) const {
  Mat Z(x.size(), size());
  if (kind == SplineKind::truncated_linear) {
    for (Index i = 0; i < x.size(); ++i)
      for (Index k = 0; k < knots.size(); ++k) Z(i, k) = std::max(0.0, x[i] - knots[k]);
    return Z;
  }
  GslBspline bs(breakpoints(*this));
  for (Index i = 0; i < x.size(); ++i) Z.row(i) = bs.eval(std::clamp(x[i], lo, hi)).transpose() * transform;
  return Z;
}

std::pair<Mat, SplineBasis> spline_design(const Vec& x, Index K, SplineKind kind) {
  if (K < 1) throw DomainError("spline_design: K must be at least 1");
  if (x.size() <= K) throw DomainError("spline_design: need more observations than basis functions");
  if (!x.allFinite()) throw DomainError("spline_design: non-finite predictor values");
  const double lo = x.minCoeff(), hi = x.maxCoeff();
  SplineBasis b;
  if (kind == SplineKind::truncated_linear) {
    b = make_spline_basis(kind, quantile_knots(x, K), lo, hi);
  } else {
    if (K < 3) throw DomainError("spline_design: the O'Sullivan basis needs K >= 3");
    b = make_spline_basis(kind, quantile_knots(x, K - 2), lo, hi);
  }
  return {b.evaluate(x), b};
}

Standardizer Standardizer::fit(const Vec& x) {
  if (x.size() < 2) throw DomainError("standardize: need at least two observations");
  const double m = x.mean();
  const double sd = std::sqrt((x.array() - m).square().sum() / static_cast<double>(x.size() - 1));
  if (!(sd > 0)) throw DomainError("standardize: predictor is constant");
  return {m, sd};
}

// ---- model builders ----------------------------------------------------------------

namespace {

std::shared_ptr<PriorFragment> half_cauchy_aux_prior(double A) {
  if (!(A > 0)) throw DomainError("Half-Cauchy scale must be positive");
  return std::make_shared<PriorFragment>(
      "inverse_wishart_prior", NatParam{Family::inverse_chi_squared(), inverse_chi_squared_prior_message(1.0, 1 / (A * A))});
}

void add_variance_chain(ModelSpec& s, const std::string& var, const std::string& aux, double A) {
  s.nodes.push_back({var, Family::inverse_chi_squared()});
  s.nodes.push_back({aux, Family::inverse_chi_squared()});
  s.factors.push_back({"p(" + var + "|" + aux + ")",
                       std::make_shared<IteratedIGWFragment>(IteratedIGWSpec{IgwGraph::scalar_d1, 1.0, 1, false}),
                       {var, aux}});
  s.factors.push_back({"p(" + aux + ")", half_cauchy_aux_prior(A), {aux}});
}

void check_response(const Vec& y, Index rows, const char* who) {
  if (y.size() < 1) throw DimensionError(std::string(who) + ": empty response");
  if (rows != y.size())
    throw DimensionError(std::string(who) + ": response has " + std::to_string(y.size()) + " rows, design has " +
                         std::to_string(rows));
  if (!y.allFinite()) throw DomainError(std::string(who) + ": non-finite response values");
}

GaussianPenalizationSpec fixed_effect_penalization(Index d0, double sigma_beta_sq) {
  if (!(sigma_beta_sq > 0)) throw DomainError("sigma_beta_sq must be positive");
  GaussianPenalizationSpec p;
  p.d_theta0 = d0;
  p.mu_theta0 = Vec::Zero(d0);
  p.Sigma_theta0 = sigma_beta_sq * Mat::Identity(d0, d0);
  return p;
}

Mat spline_columns(const Vec& xs, const SplineBasis& b) {
  Mat C(xs.size(), 2 + b.size());
  C.col(0).setOnes();
  C.col(1) = xs;
  C.rightCols(b.size()) = b.evaluate(xs);
  return C;
}

// The shared part of the Gaussian and GLM spline builders.
Model spline_skeleton(const std::string& kind, const Vec& y, const Vec& x, Index K, const Hyper& hyper,
                      SplineKind sk, Mat& C) {
  check_response(y, x.size(), kind.c_str());
  Model m;
  m.kind = kind;
  m.standardizer = Standardizer::fit(x);
  m.x_lo = x.minCoeff();
  m.x_hi = x.maxCoeff();
  const Vec xs = m.standardizer->apply(x);
  auto [Z, basis] = spline_design(xs, K, sk);
  m.basis = basis;
  C.resize(x.size(), 2 + Z.cols());
  C << Vec::Ones(x.size()), xs, Z;
  m.coef_node = "beta_u";
  auto pen = fixed_effect_penalization(2, hyper.sigma_beta_sq);
  pen.blocks = {{Z.cols(), 1}};
  m.spec.nodes.push_back({"beta_u", Family::multivariate_normal(C.cols())});
  m.spec.factors.push_back(
      {"p(beta,u|sigma2_u)", std::make_shared<GaussianPenalizationFragment>(pen), {"beta_u", "sigma2_u"}});
  add_variance_chain(m.spec, "sigma2_u", "a_u", hyper.A);
  return m;
}

}  // namespace

Model build_linear_regression(const Vec& y, const Mat& X, double sigma_beta_sq, double A_hyper) {
  check_response(y, X.rows(), "linear regression");
  if (X.cols() < 1 || !X.allFinite()) throw DomainError("linear regression: X must be finite with >= 1 column");
  if (!(sigma_beta_sq > 0)) throw DomainError("linear regression: sigma_beta_sq must be positive");
  Model m;
  m.kind = "linreg";
  m.coef_node = "beta";
  const Index d = X.cols();
  m.x_lo = m.x_hi = 0;  // no curve unless X is [1, x]
  if (d == 2 && (X.col(0).array() == 1.0).all()) {
    m.x_lo = X.col(1).minCoeff();
    m.x_hi = X.col(1).maxCoeff();
  }
  m.spec.nodes.push_back({"beta", Family::multivariate_normal(d)});
  m.spec.factors.push_back(
      {"p(beta)", make_gaussian_prior({Vec::Zero(d), sigma_beta_sq * Mat::Identity(d, d)}), {"beta"}});
  m.spec.factors.push_back({"p(y|beta,sigma2)", std::make_shared<GaussianLikelihoodFragment>(GaussianLikelihoodSpec{y, X}),
                            {"beta", "sigma2"}});
  add_variance_chain(m.spec, "sigma2", "a", A_hyper);
  // nodes in the order beta, sigma2, a
  return m;
}

Model build_penalized_spline(const Vec& y, const Vec& x, Index K, const Hyper& hyper, SplineKind kind) {
  Mat C;
  Model m = spline_skeleton("penspline", y, x, K, hyper, kind, C);
  m.spec.factors.insert(m.spec.factors.begin(),
                        FactorSpec{"p(y|beta,u,sigma2_eps)",
                                   std::make_shared<GaussianLikelihoodFragment>(GaussianLikelihoodSpec{y, C}),
                                   {"beta_u", "sigma2_eps"}});
  add_variance_chain(m.spec, "sigma2_eps", "a_eps", hyper.A);
  return m;
}

Model build_glm_spline(const Vec& y, const Vec& x, Index K, Link link, const Hyper& hyper, SplineKind kind) {
  if (link == Link::identity) throw DomainError("glm spline: identity link is the Gaussian penalized spline (penspline)");
  Mat C;
  Model m = spline_skeleton("glmspline", y, x, K, hyper, kind, C);
  m.link = link;
  std::shared_ptr<Fragment> lik;
  switch (link) {
    case Link::logit: lik = std::make_shared<JaakkolaJordanFragment>(y, C); break;
    case Link::probit: lik = std::make_shared<AlbertChibFragment>(y, C); break;
    case Link::log: lik = std::make_shared<KnowlesMinkaFragment>(y, C); break;
    default: break;
  }
  m.spec.factors.insert(m.spec.factors.begin(), FactorSpec{"p(y|beta,u)", lik, {"beta_u"}});
  return m;
}

Model build_group_curves(const Vec& y, const Vec& x, const std::vector<int>& group_id, const Vec& label,
                         const GroupCurvesOptions& opts, const Hyper& hyper) {
  check_response(y, x.size(), "group curves");
  const Index n = y.size();
  if (static_cast<Index>(group_id.size()) != n || label.size() != n)
    throw DimensionError("group curves: group and label columns must match the response length");
  const int m_groups = *std::max_element(group_id.begin(), group_id.end());
  std::vector<int> seen(static_cast<std::size_t>(std::max(m_groups, 0)) + 1, 0);
  std::map<int, double> group_label;
  for (Index i = 0; i < n; ++i) {
    const int g = group_id[static_cast<std::size_t>(i)];
    if (g < 1) throw DomainError("group curves: group ids must be 1..m, got " + std::to_string(g));
    seen[static_cast<std::size_t>(g)] = 1;
    if (label[i] != 0.0 && label[i] != 1.0)
      throw DomainError("group curves: labels must be binary, got " + std::to_string(label[i]) + " at row " +
                        std::to_string(i + 1));
    auto [it, fresh] = group_label.emplace(g, label[i]);
    if (!fresh && it->second != label[i])
      throw DomainError("group curves: label varies within group " + std::to_string(g));
  }
  for (int g = 1; g <= m_groups; ++g)
    if (!seen[static_cast<std::size_t>(g)])
      throw DomainError("group curves: group ids must be contiguous 1..m; id " + std::to_string(g) + " is missing");

  Model md;
  md.kind = "groupcurves";
  md.n_groups = m_groups;
  md.subject_effects = opts.subject_effects;
  md.standardizer = Standardizer::fit(x);
  md.x_lo = x.minCoeff();
  md.x_hi = x.maxCoeff();
  const Vec xs = md.standardizer->apply(x);
  auto [Zg, bg] = spline_design(xs, opts.K_gbl, opts.kind);
  md.basis = bg;
  Mat Zgrp;
  if (opts.K_grp > 0) {
    auto [Zr, br] = spline_design(xs, opts.K_grp, opts.kind);
    md.grp_basis = br;
    Zgrp = Zr;
  }
  const double nB = label.sum();
  if (nB == 0 || nB == static_cast<double>(n))
    md.warnings.push_back("all group labels are equal; the B-vs-W contrast columns are identically zero");

  const Index Kg = Zg.cols(), Kr = Zgrp.cols(), M = m_groups;
  const Index pU = opts.subject_effects ? 2 * M : 0, pG = M * Kr;
  const Index p = 4 + 2 * Kg + pU + pG;
  Mat C = Mat::Zero(n, p);
  for (Index i = 0; i < n; ++i) {
    const double b = label[i];
    const Index g = group_id[static_cast<std::size_t>(i)] - 1;
    C.row(i).head(4) << 1, xs[i], b, b * xs[i];
    C.row(i).segment(4, Kg) = (1 - b) * Zg.row(i);
    C.row(i).segment(4 + Kg, Kg) = b * Zg.row(i);
    if (opts.subject_effects) C.row(i).segment(4 + 2 * Kg + 2 * g, 2) << 1, xs[i];
    if (Kr > 0) C.row(i).segment(4 + 2 * Kg + pU + g * Kr, Kr) = Zgrp.row(i);
  }

  auto pen = fixed_effect_penalization(4, hyper.sigma_beta_sq);
  pen.blocks = {{Kg, 1}, {Kg, 1}};
  std::vector<std::string> pen_ports{"beta_u", "sigma2_gblW", "sigma2_gblB"};
  if (opts.subject_effects) {
    pen.blocks.push_back({M, 2});
    pen_ports.push_back("Sigma");
  }
  if (Kr > 0) {
    pen.blocks.push_back({M * Kr, 1});
    pen_ports.push_back("sigma2_grp");
  }
  md.coef_node = "beta_u";
  auto& s = md.spec;
  s.nodes.push_back({"beta_u", Family::multivariate_normal(p)});
  s.factors.push_back({"p(y|beta,u,sigma2_eps)",
                       std::make_shared<GaussianLikelihoodFragment>(GaussianLikelihoodSpec{y, C}),
                       {"beta_u", "sigma2_eps"}});
  s.factors.push_back({"p(beta,u|variances)", std::make_shared<GaussianPenalizationFragment>(pen), pen_ports});
  add_variance_chain(s, "sigma2_gblW", "a_gblW", hyper.A);
  add_variance_chain(s, "sigma2_gblB", "a_gblB", hyper.A);
  if (opts.subject_effects) {
    if (hyper.A_U.size() != 2 || !(hyper.A_U.minCoeff() > 0))
      throw DomainError("group curves: A_U must hold two positive scales");
    if (!(hyper.nu > 0)) throw DomainError("group curves: nu must be positive");
    s.nodes.push_back({"Sigma", Family::inverse_wishart(2)});
    s.nodes.push_back({"A", Family::inverse_g_wishart_diag(2)});
    s.factors.push_back({"p(Sigma|A)",
                         std::make_shared<IteratedIGWFragment>(
                             IteratedIGWSpec{IgwGraph::totally_connected, hyper.nu + 1, 2, true}),
                         {"Sigma", "A"}});
    // each diagonal entry of A is Inverse-chi^2(1, 1/(nu A_k^2))
    Vec eta(5);
    eta << -1.5, -0.5 / (hyper.nu * hyper.A_U[0] * hyper.A_U[0]), 0, 0,
        -0.5 / (hyper.nu * hyper.A_U[1] * hyper.A_U[1]);
    s.factors.push_back(
        {"p(A)", std::make_shared<PriorFragment>("inverse_wishart_prior", NatParam{Family::inverse_g_wishart_diag(2), eta}),
         {"A"}});
  }
  if (Kr > 0) add_variance_chain(s, "sigma2_grp", "a_grp", hyper.A);
  add_variance_chain(s, "sigma2_eps", "a_eps", hyper.A);
  return md;
}

std::vector<std::string> Model::curve_names() const {
  if (kind == "penspline") return {"mean"};
  if (kind == "glmspline") return {"mean", "linear_predictor"};
  if (kind == "groupcurves") return {"f_W", "f_B", "contrast"};
  if (kind == "linreg" && x_hi > x_lo) return {"mean"};
  return {};
}

Mat Model::curve_design(const std::string& curve, const Vec& grid) const {
  const auto names = curve_names();
  if (std::find(names.begin(), names.end(), curve) == names.end())
    throw DomainError("model '" + kind + "' has no curve named '" + curve + "'");
  if (kind == "linreg") {
    Mat C(grid.size(), 2);
    C << Vec::Ones(grid.size()), grid;
    return C;
  }
  const Vec xs = standardizer ? standardizer->apply(grid) : grid;
  if (kind == "penspline" || kind == "glmspline") return spline_columns(xs, *basis);
  const Mat Z = basis->evaluate(xs);
  const Index Kg = Z.cols();
  const Index Kr = grp_basis ? grp_basis->size() : 0;
  const Index p = 4 + 2 * Kg + (subject_effects ? 2 * n_groups : 0) + n_groups * Kr;
  Mat C = Mat::Zero(grid.size(), p);
  for (Index i = 0; i < grid.size(); ++i) {
    if (curve == "f_W") {
      C.row(i).head(2) << 1, xs[i];
      C.row(i).segment(4, Kg) = Z.row(i);
    } else if (curve == "f_B") {
      C.row(i).head(4) << 1, xs[i], 1, xs[i];
      C.row(i).segment(4 + Kg, Kg) = Z.row(i);
    } else {
      C.row(i).head(4) << 0, 0, 1, xs[i];
      C.row(i).segment(4, Kg) = -Z.row(i);
      C.row(i).segment(4 + Kg, Kg) = Z.row(i);
    }
  }
  return C;
}

FittedCurve fitted_curve(const NatParam& q_coef, const Mat& C, const Vec& grid, Link link) {
  if (C.rows() != grid.size()) throw DimensionError("fitted_curve: design rows must match the grid");
  const auto mom = mvn_moments(q_coef.eta, "fitted_curve: coefficient q-density");
  if (C.cols() != mom.mean.size()) throw DimensionError("fitted_curve: design columns must match the coefficients");
  const Vec lin = C * mom.mean;
  const Vec var = (C * mom.cov).cwiseProduct(C).rowwise().sum();
  FittedCurve f{grid, Vec(grid.size()), Vec(grid.size()), Vec(grid.size())};
  for (Index i = 0; i < grid.size(); ++i) {
    const double sd = std::sqrt(std::max(0.0, var[i]));
    f.mean[i] = inverse_link(link, lin[i]);
    f.lower95[i] = inverse_link(link, lin[i] - kZ975 * sd);
    f.upper95[i] = inverse_link(link, lin[i] + kZ975 * sd);
  }
  return f;
}

Vec equispaced_grid(double lo, double hi, Index n) {
  if (n < 2) return Vec::Constant(1, lo);
  return Vec::LinSpaced(n, lo, hi);
}

std::optional<std::string> extrapolation_warning(const Model& m, const Vec& grid) {
  if (grid.size() == 0 || m.x_hi <= m.x_lo) return std::nullopt;
  const double lo = grid.minCoeff(), hi = grid.maxCoeff();
  if (lo >= m.x_lo && hi <= m.x_hi) return std::nullopt;
  return "curve grid [" + std::to_string(lo) + ", " + std::to_string(hi) + "] extends beyond the predictor range [" +
         std::to_string(m.x_lo) + ", " + std::to_string(m.x_hi) + "]; values there are extrapolated";
}

// ---- synthetic data ---------------------------------------------------------------

namespace {

double normal_density(double x, double mu, double sigma) {
  const double z = (x - mu) / sigma;
  return std::exp(-0.5 * z * z) / (sigma * std::sqrt(2 * std::numbers::pi));
}

double normal_quantile(double p) {
  // Newton on the erfc-based cdf from a rational start; p is bounded away
  // from 0 and 1 for f_true.
  double x = 0;
  for (int it = 0; it < 100; ++it) {
    const double cdf = 0.5 * std::erfc(-x / std::numbers::sqrt2);
    const double step = (cdf - p) / normal_density(x, 0, 1);
    x -= step;
    if (std::fabs(step) < 1e-15 * std::max(1.0, std::fabs(x))) break;
  }
  return x;
}

}  // namespace

double f_true(double x) {
  return (1.05 - 1.02 * x + 0.018 * x * x + 0.4 * normal_density(x, 0.38, 0.08) + 0.08 * normal_density(x, 0.75, 0.03)) /
         2.7;
}

double true_linear_predictor(Link link, double x) {
  const double f = f_true(x);
  switch (link) {
    case Link::identity: return f;
    case Link::logit: return std::log(f / (1 - f));
    case Link::probit: return normal_quantile(f);
    case Link::log: return std::log(10 * f);
  }
  return f;
}

Dataset simulate_linear_regression(Index n, Index d, std::uint64_t seed, double sigma) {
  Rng rng(seed);
  std::normal_distribution<double> z;
  Dataset ds;
  ds.X.resize(n, d);
  Vec beta(d);
  for (Index j = 0; j < d; ++j) beta[j] = (j % 2 == 0 ? 1.0 : -1.0) / static_cast<double>(j + 1);
  for (Index i = 0; i < n; ++i) {
    ds.X(i, 0) = 1.0;
    for (Index j = 1; j < d; ++j) ds.X(i, j) = z(rng);
  }
  ds.y = ds.X * beta;
  for (Index i = 0; i < n; ++i) ds.y[i] += sigma * z(rng);
  if (d >= 2) ds.x = ds.X.col(1);
  return ds;
}

Dataset simulate_gaussian_spline(Index n, double sigma, std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_real_distribution<double> u;
  std::normal_distribution<double> z;
  Dataset ds;
  ds.x.resize(n);
  ds.y.resize(n);
  for (Index i = 0; i < n; ++i) ds.x[i] = u(rng);
  for (Index i = 0; i < n; ++i) ds.y[i] = f_true(ds.x[i]) + sigma * z(rng);
  return ds;
}

Dataset simulate_glm(Index n, Link link, std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_real_distribution<double> u;
  Dataset ds;
  ds.x.resize(n);
  ds.y.resize(n);
  for (Index i = 0; i < n; ++i) ds.x[i] = u(rng);
  for (Index i = 0; i < n; ++i) {
    const double f = f_true(ds.x[i]);
    if (link == Link::log) {
      std::poisson_distribution<long> pois(10 * f);
      ds.y[i] = static_cast<double>(pois(rng));
    } else if (link == Link::identity) {
      ds.y[i] = f;
    } else {
      ds.y[i] = u(rng) < f ? 1.0 : 0.0;
    }
  }
  return ds;
}

Dataset simulate_group_curves(Index m, Index n_per, std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_real_distribution<double> u;
  std::normal_distribution<double> z;
  Dataset ds;
  const Index n = m * n_per;
  ds.x.resize(n);
  ds.y.resize(n);
  ds.label.resize(n);
  ds.group.resize(static_cast<std::size_t>(n));
  Index row = 0;
  for (Index g = 0; g < m; ++g) {
    const double b = static_cast<double>(g % 2);
    const double u0 = 0.3 * z(rng), u1 = 0.2 * z(rng);
    for (Index j = 0; j < n_per; ++j, ++row) {
      const double x = u(rng);
      const double fW = std::sin(2 * std::numbers::pi * x);
      const double f = fW + b * (0.5 * x + 0.3 * std::cos(std::numbers::pi * x));
      ds.x[row] = x;
      ds.y[row] = f + u0 + u1 * x + 0.2 * z(rng);
      ds.label[row] = b;
      ds.group[static_cast<std::size_t>(row)] = static_cast<int>(g + 1);
    }
  }
  return ds;
}

}  // namespace vmp
