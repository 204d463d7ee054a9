#include "vmp/validation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

#include "vmp/fragments.hpp"
#include "vmp/fragments_glm.hpp"
#include "vmp/mfvb.hpp"
#include "vmp/oracle.hpp"

namespace vmp {

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

double rel(double a, double b) { return std::fabs(a - b) / std::max(1.0, std::fabs(b)); }

double max_rel(const Mat& a, const Mat& b) {
  double m = 0;
  for (Index i = 0; i < a.size(); ++i) m = std::max(m, rel(a.data()[i], b.data()[i]));
  return m;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(3);
  os << v;
  return os.str();
}

RunOptions run_opts(double tol, std::size_t iters) {
  RunOptions o;
  o.tol = tol;
  o.max_iter = iters;
  return o;
}

Mat random_spd(Index d, Rng& rng) {
  std::normal_distribution<double> z;
  Mat B(d, d);
  for (Index i = 0; i < B.size(); ++i) B.data()[i] = z(rng);
  return B * B.transpose() / static_cast<double>(d) + 0.5 * Mat::Identity(d, d);
}

// ---- 1 -------------------------------------------------------------------------

CriterionResult mfvb_equivalence() {
  CriterionResult r{1, "MFVB/VMP equivalence on linear regression", true, "", 0};
  const auto t0 = Clock::now();
  double worst = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto ds = simulate_linear_regression(50, 3, seed);
    auto g = build_factor_graph(build_linear_regression(ds.y, ds.X).spec);
    run_vmp(g, run_opts(1e-13, 5000));
    const auto b = std::get<MvnParams>(q_density(g, "beta").common);
    const auto s = std::get<InvChiSqParams>(q_density(g, "sigma2").common);
    const auto a = std::get<InvChiSqParams>(q_density(g, "a").common);
    MfvbOptions mo;
    mo.tol = 1e-13;
    mo.max_iter = 5000;
    const auto m = mfvb_linear_regression(ds.y, ds.X, Vec::Zero(3), 1e10 * Mat::Identity(3, 3), 1e5, mo);
    const double scale = m.Sigma_q_beta.cwiseAbs().maxCoeff();
    worst = std::max({worst, max_rel(b.mu, m.mu_q_beta), (b.Sigma - m.Sigma_q_beta).cwiseAbs().maxCoeff() / scale,
                      std::fabs(s.lambda - m.lambda_q_sigsq) / m.lambda_q_sigsq,
                      std::fabs(a.lambda - m.lambda_q_a) / m.lambda_q_a});
  }
  r.seconds = since(t0);
  r.pass = worst <= 1e-6 && r.seconds < 1.0;
  r.detail = "max rel diff " + fmt(worst) + " (tol 1e-6), " + fmt(r.seconds) + " s (limit 1 s)";
  return r;
}

// ---- 2, 3 -----------------------------------------------------------------------

std::vector<NatParam> scalar_settings() {
  std::vector<NatParam> out;
  for (double p : {0.1, 0.3, 0.5, 0.8, 0.97}) out.push_back(common_to_natural(Family::bernoulli(), BernoulliParams{p}));
  for (auto [m, s] : std::vector<std::pair<double, double>>{{0, 1}, {2, 0.5}, {-3, 4}, {10, 0.01}, {0.3, 9}})
    out.push_back(common_to_natural(Family::univariate_normal(), NormalParams{m, s}));
  for (auto [k, l] : std::vector<std::pair<double, double>>{{3, 2}, {2, 2}, {1, 1}, {7.5, 0.3}, {40, 12}})
    out.push_back(common_to_natural(Family::inverse_chi_squared(), InvChiSqParams{k, l}));
  for (auto [a, b] : std::vector<std::pair<double, double>>{{1, 1}, {0.5, 0.5}, {2, 5}, {30, 4}, {0.7, 3}})
    out.push_back(common_to_natural(Family::beta(), BetaParams{a, b}));
  for (auto [m, l] : std::vector<std::pair<double, double>>{{1, 1}, {2, 0.5}, {0.3, 4}, {5, 50}, {1, 0.05}})
    out.push_back(common_to_natural(Family::inverse_gaussian(), InvGaussianParams{m, l}));
  return out;
}

std::vector<NatParam> matrix_settings() {
  Rng rng(17);
  std::vector<NatParam> out;
  for (Index d : {1, 2, 2, 3, 4}) {
    Vec mu = Vec::LinSpaced(d, -0.3, 0.5 * static_cast<double>(d));
    out.push_back(common_to_natural(Family::multivariate_normal(d), MvnParams{mu, random_spd(d, rng)}));
  }
  for (Index d : {1, 2, 2, 3, 3})
    out.push_back(common_to_natural(Family::inverse_wishart(d),
                                    InvWishartParams{static_cast<double>(d) + 4 + static_cast<double>(out.size() % 3),
                                                     random_spd(d, rng)}));
  for (Index d : {1, 2, 2, 3, 4})
    out.push_back(common_to_natural(Family::inverse_g_wishart_diag(d),
                                    InvWishartParams{3.0, Mat(random_spd(d, rng).diagonal().asDiagonal())}));
  return out;
}

CriterionResult expectation_fidelity(const ValidationHooks& h) {
  CriterionResult r{2, "E{T} and entropy against quadrature / Monte Carlo oracles", true, "", 0};
  const auto t0 = Clock::now();
  std::vector<std::string> bad;
  double worst_quad = 0, worst_z = 0;
  int checked = 0;
  for (const auto& x : scalar_settings()) {
    const auto est = moment_oracle(x, OracleMethod::quadrature, 12);
    const Vec t = h.expected_T(x);
    double err = rel(h.entropy(x), est.entropy);
    for (Index k = 0; k < t.size(); ++k) err = std::max(err, rel(t[k], est.mean[k]));
    worst_quad = std::max(worst_quad, err);
    if (err > 1e-8 || est.flagged) bad.push_back(x.family.name());
    ++checked;
  }
  std::uint64_t seed = 5;
  for (const auto& x : matrix_settings()) {
    const auto est = moment_oracle(x, OracleMethod::monte_carlo, 200000, seed++);
    const Vec t = h.expected_T(x);
    double z = std::fabs(h.entropy(x) - est.entropy) / std::max(est.entropy_std_error, 1e-300);
    for (Index k = 0; k < t.size(); ++k) {
      const double se = est.std_error[k];
      z = std::max(z, se > 0 ? std::fabs(t[k] - est.mean[k]) / se : (rel(t[k], est.mean[k]) < 1e-12 ? 0.0 : 1e300));
    }
    worst_z = std::max(worst_z, z);
    if (z > 4) bad.push_back(x.family.name() + "(d=" + std::to_string(x.family.d) + ")");
    ++checked;
  }
  r.seconds = since(t0);
  r.pass = bad.empty() && r.seconds < 30;
  r.detail = std::to_string(checked) + " settings over 8 families; quadrature max rel err " + fmt(worst_quad) +
             " (tol 1e-8); Monte Carlo max |z| " + fmt(worst_z) + " (limit 4); " + fmt(r.seconds) + " s";
  if (!bad.empty()) {
    r.detail += "; failing:";
    for (const auto& b : bad) r.detail += " " + b;
  }
  return r;
}

CriterionResult gradient_identity(const ValidationHooks& h) {
  CriterionResult r{3, "finite-difference gradient of A(eta) equals E{T}", true, "", 0};
  const auto t0 = Clock::now();
  auto all = scalar_settings();
  for (const auto& m : matrix_settings()) all.push_back(m);
  double worst = 0;
  std::string where;
  for (const auto& x : all) {
    const Vec t = h.expected_T(x);
    for (Index k = 0; k < x.eta.size(); ++k) {
      // off-diagonal entries of the diagonal family do not enter A
      if (x.family.kind == FamilyKind::InverseGWishartDiag && k > 0) {
        const Index j = (k - 1) / x.family.d, i = (k - 1) % x.family.d;
        if (i != j) continue;
      }
      NatParam p = x, m = x;
      const double step = 1e-6 * std::max(1.0, std::fabs(x.eta[k]));
      p.eta[k] += step;
      m.eta[k] -= step;
      const double fd = (log_partition(p) - log_partition(m)) / (2 * step);
      const double e = rel(fd, t[k]);
      if (e > worst) {
        worst = e;
        where = x.family.name();
      }
    }
  }
  r.seconds = since(t0);
  r.pass = worst <= 1e-5;
  r.detail = std::to_string(all.size()) + " settings; max rel err " + fmt(worst) + " (tol 1e-5)" +
             (r.pass ? "" : " at " + where);
  return r;
}

// ---- 4 -------------------------------------------------------------------------

double log_invchisq(double x, double kappa, double lambda) {
  return 0.5 * kappa * std::log(lambda / 2) - std::lgamma(kappa / 2) - (kappa / 2 + 1) * std::log(x) -
         lambda / (2 * x);
}

CriterionResult elbo_monotone() {
  CriterionResult r{4, "ELBO monotone for conjugate models, matches Monte Carlo", true, "", 0};
  const auto t0 = Clock::now();
  const auto lr = simulate_linear_regression(50, 3, 8);
  const auto sp = simulate_gaussian_spline(500, 0.1, 8);
  std::vector<std::pair<std::string, FactorGraph>> graphs;
  graphs.emplace_back("linreg", build_factor_graph(build_linear_regression(lr.y, lr.X).spec));
  graphs.emplace_back("penspline", build_factor_graph(build_penalized_spline(sp.y, sp.x, 25).spec));
  double worst = 0;
  for (auto& [name, g] : graphs) {
    double prev = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < 100; ++i) {
      const double e = run_vmp(g, run_opts(1e-300, 1)).elbo_trace.back();
      if (i > 0) worst = std::min(worst, e - prev);
      prev = e;
    }
  }
  // E_q{log p(y, beta, sigma2, a) - log q} on a small instance, q taken mid-run
  const auto ds = simulate_linear_regression(12, 2, 4, 0.7);
  const double sb = 10.0, A = 3.0, n = 12;
  auto g = build_factor_graph(build_linear_regression(ds.y, ds.X, sb, A).spec);
  run_vmp(g, run_opts(1e-3, 4));
  const double e = elbo(g);
  const NatParam qb = q_natural(g, g.node_index("beta"));
  const NatParam qs = q_natural(g, g.node_index("sigma2"));
  const NatParam qa = q_natural(g, g.node_index("a"));
  Rng rng(2);
  double sum = 0, sumsq = 0;
  const int N = 100000;
  for (int i = 0; i < N; ++i) {
    const Vec b = sample(qb, rng);
    const double s2 = sample(qs, rng)(0, 0), a = sample(qa, rng)(0, 0);
    double lp = -0.5 * n * std::log(2 * std::numbers::pi * s2) - 0.5 * (ds.y - ds.X * b).squaredNorm() / s2;
    lp += -std::log(2 * std::numbers::pi * sb) - 0.5 * b.squaredNorm() / sb;
    lp += log_invchisq(s2, 1, 1 / a) + log_invchisq(a, 1, 1 / (A * A));
    const double v = lp - log_density(qb, b) - log_density(qs, Mat::Constant(1, 1, s2)) -
                     log_density(qa, Mat::Constant(1, 1, a));
    sum += v;
    sumsq += v * v;
  }
  const double mean = sum / N, se = std::sqrt((sumsq / N - mean * mean) / (N - 1));
  const double z = std::fabs(e - mean) / se;
  r.seconds = since(t0);
  r.pass = worst >= -1e-8 && z <= 4;
  r.detail = "min per-sweep increment " + fmt(worst) + " over 100 sweeps of linreg and penspline (limit -1e-8); ELBO " +
             fmt(e) + " vs Monte Carlo " + fmt(mean) + ", |z| " + fmt(z) + " (limit 4)";
  return r;
}

// ---- 5 -------------------------------------------------------------------------

CriterionResult schedule_invariance() {
  CriterionResult r{5, "schedule invariance of the penalized spline fixed point", true, "", 0};
  const auto t0 = Clock::now();
  const auto sp = simulate_gaussian_spline(300, 0.1, 12);
  const Model m = build_penalized_spline(sp.y, sp.x, 25);
  std::mt19937_64 rng(6);
  std::vector<Vec> fixed;
  bool all_converged = true;
  for (int k = 0; k < 5; ++k) {
    auto g = build_factor_graph(m.spec);
    RunOptions o = run_opts(1e-12, 10000);
    o.schedule.resize(g.factors.size());
    std::iota(o.schedule.begin(), o.schedule.end(), 0);
    std::shuffle(o.schedule.begin(), o.schedule.end(), rng);
    all_converged = run_vmp(g, o).converged && all_converged;
    Vec v;
    for (const auto& node : g.nodes) {
      const Vec e = q_natural(g, g.node_index(node.name)).eta;
      Vec w(v.size() + e.size());
      w << v, e;
      v = w;
    }
    fixed.push_back(v);
  }
  double worst = 0;
  for (int k = 1; k < 5; ++k) worst = std::max(worst, max_rel(fixed[k], fixed[0]));
  r.seconds = since(t0);
  r.pass = all_converged && worst <= 1e-6;
  r.detail = "5 random schedules; max rel diff of all q natural parameters " + fmt(worst) + " (tol 1e-6)" +
             (all_converged ? "" : "; a run did not converge");
  return r;
}

// ---- 6 -------------------------------------------------------------------------

CriterionResult prior_chains() {
  CriterionResult r{6, "Half-Cauchy and half-t covariance prior simulation KS tests", true, "", 0};
  const auto t0 = Clock::now();
  const int N = 100000;
  // Half-Cauchy: the (sigma2_u, a_u) chain of the penalized spline builder
  Hyper hyper;
  hyper.A = 2.5;
  hyper.A_U = (Vec(2) << 1.0, 3.0).finished();
  const auto sp = simulate_gaussian_spline(60, 0.1, 1);
  const Model pm = build_penalized_spline(sp.y, sp.x, 5, hyper);
  const PriorFragment* ap = nullptr;
  const IteratedIGWFragment* chain = nullptr;
  for (const auto& f : pm.spec.factors) {
    if (f.name == "p(a_u)") ap = dynamic_cast<const PriorFragment*>(f.fragment.get());
    if (f.name == "p(sigma2_u|a_u)") chain = dynamic_cast<const IteratedIGWFragment*>(f.fragment.get());
  }
  Rng rng(99);
  std::vector<double> sd;
  for (int i = 0; i < N; ++i) {
    const double a = sample(ap->eta(), rng)(0, 0);
    const NatParam cond{Family::inverse_chi_squared(),
                        (Vec(2) << -0.5 * (chain->spec().kappa + 2), -0.5 / a).finished()};
    sd.push_back(std::sqrt(sample(cond, rng)(0, 0)));
  }
  const double A = hyper.A;
  const auto hc = ks_test(sd, [A](double s) { return s <= 0 ? 0.0 : 2 / std::numbers::pi * std::atan(s / A); });

  // half-t covariance prior: the (Sigma, A) pair of the group curves builder
  const auto gd = simulate_group_curves(4, 20, 3);
  const Model gm = build_group_curves(gd.y, gd.x, gd.group, gd.label, {}, hyper);
  const PriorFragment* Ap = nullptr;
  const IteratedIGWFragment* hw = nullptr;
  for (const auto& f : gm.spec.factors) {
    if (f.name == "p(A)") Ap = dynamic_cast<const PriorFragment*>(f.fragment.get());
    if (f.name == "p(Sigma|A)") hw = dynamic_cast<const IteratedIGWFragment*>(f.fragment.get());
  }
  std::vector<double> s1, s2, rho;
  for (int i = 0; i < N; ++i) {
    const Mat Am = sample(Ap->eta(), rng);
    Vec eta(5);
    eta << -0.5 * (hw->spec().kappa + 3), -0.5 * vec(Am.inverse());
    const Mat S = sample(NatParam{Family::inverse_wishart(2), eta}, rng);
    s1.push_back(std::sqrt(S(0, 0)));
    s2.push_back(std::sqrt(S(1, 1)));
    rho.push_back(S(0, 1) / std::sqrt(S(0, 0) * S(1, 1)));
  }
  auto half_t2 = [](double scale) {
    return [scale](double s) {
      const double t = s / scale;
      return s <= 0 ? 0.0 : t / std::sqrt(2 + t * t);
    };
  };
  const auto k1 = ks_test(s1, half_t2(hyper.A_U[0]));
  const auto k2 = ks_test(s2, half_t2(hyper.A_U[1]));
  const auto kr = ks_test(rho, [](double x) { return std::clamp(0.5 * (x + 1), 0.0, 1.0); });
  r.seconds = since(t0);
  const double pmin = std::min({hc.p_value, k1.p_value, k2.p_value, kr.p_value});
  r.pass = pmin > 0.01;
  r.detail = "KS p-values: Half-Cauchy sd " + fmt(hc.p_value) + ", half-t(2) sd1 " + fmt(k1.p_value) + ", sd2 " +
             fmt(k2.p_value) + ", correlation Uniform(-1,1) " + fmt(kr.p_value) + " (limit 0.01, 1e5 draws each)";
  return r;
}

// ---- 7 -------------------------------------------------------------------------

template <class F>
const F* find_fragment(const FactorGraph& g, std::size_t& index) {
  for (std::size_t j = 0; j < g.factors.size(); ++j)
    if (auto* f = dynamic_cast<const F*>(g.factors[j].fragment.get())) {
      index = j;
      return f;
    }
  return nullptr;
}

CriterionResult glm_fragments() {
  CriterionResult r{7, "GLM fragment properties (KM, JJ, AC, zeta')", true, "", 0};
  const auto t0 = Clock::now();
  // KM fixed point: finite-difference gradient of the local objective
  const auto pd = simulate_glm(300, Link::log, 21);
  auto gp = build_factor_graph(build_glm_spline(pd.y, pd.x, 10, Link::log).spec);
  run_vmp(gp, run_opts(1e-12, 5000));
  std::size_t jp = 0;
  const auto* kmw = find_fragment<KnowlesMinkaFragment>(gp, jp);
  const Vec eta_to = gp.factors[jp].to_factor[0];
  const auto mom = mvn_moments(q_natural(gp, gp.factors[jp].nodes[0]).eta);
  double gmax = 0;
  for (Index k = 0; k < mom.mean.size(); ++k) {
    const double h = 1e-5;
    Vec up = mom.mean, dn = mom.mean;
    up[k] += h;
    dn[k] -= h;
    const double fd = (knowles_minka_local_objective(kmw->state().y, kmw->state().A, eta_to, up, mom.cov) -
                       knowles_minka_local_objective(kmw->state().y, kmw->state().A, eta_to, dn, mom.cov)) /
                      (2 * h);
    gmax = std::max(gmax, std::fabs(fd));
  }
  // JJ: the xi step never lowers the bound
  const auto ld = simulate_glm(500, Link::logit, 22);
  auto gl = build_factor_graph(build_glm_spline(ld.y, ld.x, 25, Link::logit).spec);
  run_vmp(gl, run_opts(1e-300, 200));
  std::size_t jl = 0;
  const auto* jj = find_fragment<JaakkolaJordanFragment>(gl, jl);
  double jj_worst = 0;
  for (auto [before, after] : jj->xi_step_bounds())
    jj_worst = std::min(jj_worst, (after - before) / std::max(1.0, std::fabs(before)));
  // AC: the second block of the message never changes
  const auto bd = simulate_glm(500, Link::probit, 23);
  auto gb = build_factor_graph(build_glm_spline(bd.y, bd.x, 25, Link::probit).spec);
  std::size_t jb = 0;
  find_fragment<AlbertChibFragment>(gb, jb);
  std::vector<Vec> blocks;
  RunOptions o = run_opts(1e-300, 50);
  o.on_sweep = [&](std::size_t, const FactorGraph& g) {
    const Vec& m = g.factors[jb].to_node[0];
    const Index p = mvn_dim(m.size());
    blocks.push_back(m.tail(p * p));
  };
  run_vmp(gb, o);
  bool ac_const = true;
  for (const auto& b : blocks) ac_const = ac_const && (b - blocks.front()).cwiseAbs().maxCoeff() == 0.0;
  const double z0 = std::fabs(zeta_prime(0.0) - std::sqrt(2 / std::numbers::pi));

  r.seconds = since(t0);
  r.pass = gmax <= 1e-4 && jj_worst >= -1e-12 && ac_const && z0 <= 1e-12;
  r.detail = "KM stationarity |grad|_inf " + fmt(gmax) + " (tol 1e-4); JJ worst relative xi-step change " +
             fmt(jj_worst) + " over " + std::to_string(jj->xi_step_bounds().size()) + " steps; AC second block " +
             (ac_const ? "constant" : "CHANGED") + " over " + std::to_string(blocks.size()) + " sweeps; |zeta'(0) - sqrt(2/pi)| " +
             fmt(z0);
  return r;
}

// ---- 8 -------------------------------------------------------------------------

double glm_rmse(Link link, std::uint64_t seed, double& seconds) {
  const auto t0 = Clock::now();
  const auto d = simulate_glm(500, link, seed);
  const Model m = build_glm_spline(d.y, d.x, 25, link);
  auto g = build_factor_graph(m.spec);
  run_vmp(g, run_opts(1e-300, 200));
  const Vec grid = equispaced_grid(m.x_lo, m.x_hi);
  const auto fc = fitted_curve(q_natural(g, g.node_index(m.coef_node)), m.curve_design("linear_predictor", grid), grid);
  seconds = since(t0);
  double se = 0;
  for (Index i = 0; i < grid.size(); ++i) se += std::pow(fc.mean[i] - true_linear_predictor(link, grid[i]), 2);
  return std::sqrt(se / static_cast<double>(grid.size()));
}

CriterionResult glm_recovery() {
  CriterionResult r{8, "GLM spline recovery, n=500, K=25, 200 iterations", true, "", 0};
  const auto t0 = Clock::now();
  std::string detail;
  bool rmse_ok = true, time_ok = true;
  for (Link l : {Link::logit, Link::probit, Link::log}) {
    double secs = 0;
    const double e = glm_rmse(l, 1, secs);
    const double ref = tuned_penalized_rmse(l, 1);
    rmse_ok = rmse_ok && e <= 0.15;
    time_ok = time_ok && secs <= 5;
    detail += (detail.empty() ? "" : "; ") + to_string(l) + " RMSE " + fmt(e) + " in " + fmt(secs) +
              " s (truth-tuned penalized fit " + fmt(ref) + ")";
  }
  r.seconds = since(t0);
  r.pass = rmse_ok && time_ok;
  r.detail = detail + "; limits RMSE 0.15, 5 s";
  return r;
}

// ---- 9 -------------------------------------------------------------------------

CriterionResult d1_specialization() {
  CriterionResult r{9, "d=1 matrix paths equal scalar Inverse-chi^2 paths", true, "", 0};
  const auto t0 = Clock::now();
  Rng rng(11);
  std::uniform_real_distribution<double> u(0.1, 5.0);
  double worst = 0;
  for (int k = 0; k < 50; ++k) {
    const double kappa = u(rng);
    Vec c(2);
    c << -1 - u(rng), -u(rng);
    const NatParam s{Family::inverse_chi_squared(), c};
    for (auto f : {Family::inverse_wishart(1), Family::inverse_g_wishart_diag(1)}) {
      const NatParam m{f, c};
      worst = std::max({worst, rel(log_partition(m), log_partition(s)), rel(entropy(m), entropy(s)),
                        max_rel(expected_sufficient_statistic(m), expected_sufficient_statistic(s)),
                        max_rel(expected_inverse(m), expected_inverse(s))});
    }
    const IteratedIGWSpec mat{IgwGraph::totally_connected, kappa, 1, false};
    worst = std::max({worst, max_rel(igw_message_to_theta1(mat, c), igw_scalar_to_theta1(kappa, c)),
                      max_rel(igw_message_to_theta2(mat, c), igw_scalar_to_theta2(kappa, c))});
    const IteratedIGWSpec sca{IgwGraph::scalar_d1, kappa, 1, false};
    const NatParam q2{Family::inverse_chi_squared(), (Vec(2) << -1 - u(rng), -u(rng)).finished()};
    const NatParam m1{Family::inverse_wishart(1), c}, m2{Family::inverse_wishart(1), q2.eta};
    worst = std::max(worst, rel(igw_expected_log_factor(mat, m1, m2), igw_expected_log_factor(sca, s, q2)));
  }
  r.seconds = since(t0);
  r.pass = worst <= 1e-14;
  r.detail = "50 random inputs; max rel diff " + fmt(worst) + " (tol 1e-14)";
  return r;
}

}  // namespace

double tuned_penalized_rmse(Link link, std::uint64_t seed) {
  const auto d = simulate_glm(500, link, seed);
  const Model m = build_glm_spline(d.y, d.x, 25, link);
  const Vec xs = m.standardizer->apply(d.x);
  const Index n = xs.size(), p = 2 + m.basis->size();
  Mat C(n, p);
  C << Vec::Ones(n), xs, m.basis->evaluate(xs);
  const Vec grid = equispaced_grid(m.x_lo, m.x_hi);
  const Mat Cg = m.curve_design("linear_predictor", grid);
  Vec truth(grid.size());
  for (Index i = 0; i < grid.size(); ++i) truth[i] = true_linear_predictor(link, grid[i]);
  double best = std::numeric_limits<double>::infinity();
  for (double lam = 1e-4; lam < 1e4; lam *= 1.5) {
    Vec th = Vec::Zero(p);
    if (link == Link::log) th[0] = std::log(d.y.mean() + 0.5);
    for (int it = 0; it < 100; ++it) {
      const Vec eta = C * th;
      Vec score(n), w(n);
      for (Index i = 0; i < n; ++i) {
        const double e = std::clamp(eta[i], -30.0, 30.0);
        if (link == Link::log) {
          w[i] = std::exp(e);
          score[i] = d.y[i] - w[i];
        } else if (link == Link::logit) {
          const double mu = 1 / (1 + std::exp(-e));
          w[i] = mu * (1 - mu);
          score[i] = d.y[i] - mu;
        } else {
          const double mu = std::clamp(inverse_link(Link::probit, e), 1e-12, 1 - 1e-12);
          const double ph = std::exp(-0.5 * e * e) / std::sqrt(2 * std::numbers::pi);
          w[i] = ph * ph / (mu * (1 - mu));
          score[i] = ph * (d.y[i] - mu) / (mu * (1 - mu));
        }
      }
      Mat H = C.transpose() * w.asDiagonal() * C;
      Vec gr = C.transpose() * score;
      for (Index k = 2; k < p; ++k) {
        H(k, k) += lam;
        gr[k] -= lam * th[k];
      }
      const Vec step = H.ldlt().solve(gr);
      th += step;
      if (step.norm() < 1e-10) break;
    }
    best = std::min(best, std::sqrt((Cg * th - truth).squaredNorm() / static_cast<double>(grid.size())));
  }
  return best;
}

CriterionResult check_criterion(int id, const ValidationHooks& hooks) {
  try {
    switch (id) {
      case 1: return mfvb_equivalence();
      case 2: return expectation_fidelity(hooks);
      case 3: return gradient_identity(hooks);
      case 4: return elbo_monotone();
      case 5: return schedule_invariance();
      case 6: return prior_chains();
      case 7: return glm_fragments();
      case 8: return glm_recovery();
      case 9: return d1_specialization();
      default: break;
    }
  } catch (const std::exception& e) {
    return {id, "criterion " + std::to_string(id), false, std::string("error: ") + e.what(), 0};
  }
  throw DomainError("no criterion " + std::to_string(id) + " (expected 1.." + std::to_string(kNumCriteria) + ")");
}

std::vector<CriterionResult> run_criteria(const std::vector<int>& ids, const ValidationHooks& hooks) {
  std::vector<CriterionResult> out;
  for (int id : ids) out.push_back(check_criterion(id, hooks));
  return out;
}

std::string format_result(const CriterionResult& r, bool known_red) {
  std::ostringstream os;
  os << "C" << r.id << " " << (r.pass ? "PASS" : "FAIL") << (known_red && !r.pass ? " (known, documented)" : "")
     << "  " << r.name << ": " << r.detail;
  return os.str();
}

}  // namespace vmp
