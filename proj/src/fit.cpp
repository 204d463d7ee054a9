#include "vmp/fit.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "vmp/oracle.hpp"

namespace vmp {

using json = nlohmann::ordered_json;

// ---- CSV --------------------------------------------------------------------------

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\"");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\"");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

bool Table::has(const std::string& name) const { return std::find(names.begin(), names.end(), name) != names.end(); }

Vec Table::column(const std::string& name) const {
  const auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) {
    std::string avail;
    for (const auto& n : names) avail += (avail.empty() ? "" : ", ") + n;
    throw DomainError("missing column '" + name + "' (available: " + avail + ")");
  }
  const auto& c = columns[static_cast<std::size_t>(it - names.begin())];
  return Eigen::Map<const Vec>(c.data(), static_cast<Index>(c.size()));
}

Table parse_csv(const std::string& text, const std::string& source) {
  std::istringstream is(text);
  std::string line;
  Table t;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    if (t.names.empty()) {
      if (lineno == 1 && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line = line.substr(3);
      t.names = split(line);
      for (const auto& n : t.names)
        if (n.empty()) throw DomainError(source + ":" + std::to_string(lineno) + ": empty column name in header");
      t.columns.assign(t.names.size(), {});
      continue;
    }
    const auto cells = split(line);
    if (cells.size() != t.names.size())
      throw DomainError(source + ":" + std::to_string(lineno) + ": expected " + std::to_string(t.names.size()) +
                        " fields, found " + std::to_string(cells.size()));
    for (std::size_t j = 0; j < cells.size(); ++j) {
      double v = 0;
      const char* b = cells[j].data();
      const char* e = b + cells[j].size();
      if (*b == '+') ++b;
      const auto [p, ec] = std::from_chars(b, e, v);
      if (ec != std::errc() || p != e || cells[j].empty())
        throw DomainError(source + ":" + std::to_string(lineno) + ": column '" + t.names[j] + "': cannot parse '" +
                          cells[j] + "' as a number");
      t.columns[j].push_back(v);
    }
  }
  if (t.names.empty()) throw DomainError(source + ": no header row");
  return t;
}

Table read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DomainError("cannot open data file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_csv(ss.str(), path);
}

void write_csv(const std::string& path, const Table& t) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DomainError("cannot write '" + path + "'");
  for (std::size_t j = 0; j < t.names.size(); ++j) out << (j ? "," : "") << t.names[j];
  out << "\n";
  char buf[64];
  for (Index i = 0; i < t.rows(); ++i) {
    for (std::size_t j = 0; j < t.columns.size(); ++j) {
      const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, t.columns[j][static_cast<std::size_t>(i)]);
      out << (j ? "," : "") << std::string(buf, p);
    }
    out << "\n";
  }
}

// ---- result document ------------------------------------------------------------

namespace {

json vec_json(const Vec& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

Vec json_vec(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Vec>(v.data(), static_cast<Index>(v.size()));
}

json mat_json(const Mat& M) {
  json rows = json::array();
  for (Index i = 0; i < M.rows(); ++i) rows.push_back(vec_json(M.row(i).transpose()));
  return rows;
}

json common_json(const CommonParameters& c) {
  return std::visit(
      [](const auto& p) -> json {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, BernoulliParams>) return {{"p", p.p}};
        if constexpr (std::is_same_v<T, NormalParams>) return {{"mu", p.mu}, {"sigma2", p.sigma2}};
        if constexpr (std::is_same_v<T, InvChiSqParams>) return {{"kappa", p.kappa}, {"lambda", p.lambda}};
        if constexpr (std::is_same_v<T, BetaParams>) return {{"alpha", p.alpha}, {"beta", p.beta}};
        if constexpr (std::is_same_v<T, InvGaussianParams>) return {{"mu", p.mu}, {"lambda", p.lambda}};
        if constexpr (std::is_same_v<T, MvnParams>) return {{"mu", vec_json(p.mu)}, {"Sigma", mat_json(p.Sigma)}};
        if constexpr (std::is_same_v<T, InvWishartParams>) return {{"kappa", p.kappa}, {"Lambda", mat_json(p.Lambda)}};
        return json::object();
      },
      c);
}

json basis_json(const SplineBasis& b) {
  return {{"kind", to_string(b.kind)}, {"knots", vec_json(b.knots)}, {"lo", b.lo}, {"hi", b.hi}};
}

SplineBasis json_basis(const json& j) {
  return make_spline_basis(spline_kind_from_string(j.at("kind").get<std::string>()), json_vec(j.at("knots")),
                           j.at("lo").get<double>(), j.at("hi").get<double>());
}

std::map<std::string, FittedCurve> compute_curves(const Model& m, const NatParam& q_coef, std::size_t points) {
  std::map<std::string, FittedCurve> out;
  const Vec grid = equispaced_grid(m.x_lo, m.x_hi, static_cast<Index>(points));
  for (const auto& name : m.curve_names())
    out[name] = fitted_curve(q_coef, m.curve_design(name, grid), grid,
                             name == "linear_predictor" ? Link::identity : m.link);
  return out;
}

Model build_model(const FitRequest& req, const Table& data, SplineKind& kind_used, Link& link_used) {
  const Vec y = data.column(req.response);
  Hyper hyper;
  hyper.sigma_beta_sq = req.sigma_beta_sq;
  hyper.A = req.a_hyper;
  hyper.A_U = Vec::Constant(2, req.a_hyper);
  link_used = Link::identity;
  if (!req.link.empty()) link_used = link_from_string(req.link);
  if (req.model == "glmspline" && req.link.empty()) link_used = Link::logit;
  if (req.model != "glmspline" && link_used != Link::identity)
    throw DomainError("--link " + req.link + " applies only to --model glmspline");
  kind_used = req.spline == "auto" ? (req.model == "glmspline" ? SplineKind::osullivan : SplineKind::truncated_linear)
                                   : spline_kind_from_string(req.spline);

  auto one_predictor = [&]() {
    if (req.predictors.size() != 1)
      throw DomainError("--model " + req.model + " needs exactly one --predictor column");
    return data.column(req.predictors[0]);
  };
  if (req.model == "linreg") {
    if (req.predictors.empty()) throw DomainError("--model linreg needs at least one --predictor column");
    Mat X(y.size(), static_cast<Index>(req.predictors.size()) + 1);
    X.col(0).setOnes();
    for (std::size_t j = 0; j < req.predictors.size(); ++j) X.col(static_cast<Index>(j) + 1) = data.column(req.predictors[j]);
    return build_linear_regression(y, X, req.sigma_beta_sq, req.a_hyper);
  }
  if (req.model == "penspline") return build_penalized_spline(y, one_predictor(), req.knots, hyper, kind_used);
  if (req.model == "glmspline") return build_glm_spline(y, one_predictor(), req.knots, link_used, hyper, kind_used);
  if (req.model == "groupcurves") {
    if (req.group.empty() || req.label.empty()) throw DomainError("--model groupcurves needs --group and --label columns");
    const Vec x = one_predictor();
    const Vec gcol = data.column(req.group);
    std::vector<int> gid(static_cast<std::size_t>(gcol.size()));
    for (Index i = 0; i < gcol.size(); ++i) {
      if (gcol[i] != std::floor(gcol[i]))
        throw DomainError("group column '" + req.group + "' must hold integers, row " + std::to_string(i + 1));
      gid[static_cast<std::size_t>(i)] = static_cast<int>(gcol[i]);
    }
    GroupCurvesOptions o;
    o.K_gbl = req.knots;
    o.K_grp = req.group_knots;
    o.subject_effects = req.subject_effects;
    o.kind = kind_used;
    return build_group_curves(y, x, gid, data.column(req.label), o, hyper);
  }
  throw DomainError("unknown --model '" + req.model + "' (expected linreg, penspline, groupcurves or glmspline)");
}

}  // namespace

FitOutcome run_fit(const FitRequest& req, const Table& data) {
  if (!(req.tol > 0)) throw DomainError("--tol must be positive");
  if (req.iters < 1) throw DomainError("--iters must be at least 1");
  SplineKind kind = SplineKind::truncated_linear;
  Link link = Link::identity;
  Model m = build_model(req, data, kind, link);
  FactorGraph g = build_factor_graph(m.spec);
  RunOptions ro;
  ro.tol = req.tol;
  ro.max_iter = req.iters;
  ro.damping = req.damping;
  const ConvergenceReport rep = run_vmp(g, ro);

  json meta;
  meta["tool"] = "vmpfit";
  meta["version"] = kVersion;
  meta["model"] = m.kind;
  meta["data"] = req.data;
  meta["response"] = req.response;
  meta["predictors"] = req.predictors;
  if (m.kind == "groupcurves") {
    meta["group"] = req.group;
    meta["label"] = req.label;
    meta["group_knots"] = req.group_knots;
    meta["subject_effects"] = req.subject_effects;
  }
  meta["n"] = data.rows();
  if (m.kind != "linreg") {
    meta["knots"] = req.knots;
    meta["spline"] = to_string(kind);
  }
  meta["link"] = to_string(m.link);
  meta["iters"] = req.iters;
  meta["tol"] = req.tol;
  meta["damping"] = req.damping;
  meta["sigma_beta_sq"] = req.sigma_beta_sq;
  meta["a_hyper"] = req.a_hyper;
  meta["seed"] = req.seed;
  meta["rng"] = kRngAlgorithm;

  json q = json::object();
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    const auto d = q_density(g, i);
    q[d.node] = {{"family", d.eta_q.family.name()},
                 {"d", d.eta_q.family.d},
                 {"natural", vec_json(d.eta_q.eta)},
                 {"common", common_json(d.common)}};
  }

  json basis;
  basis["model"] = m.kind;
  basis["coef_node"] = m.coef_node;
  basis["link"] = to_string(m.link);
  basis["x_range"] = {m.x_lo, m.x_hi};
  if (m.standardizer) basis["standardizer"] = {{"center", m.standardizer->center}, {"scale", m.standardizer->scale}};
  if (m.basis) basis["global"] = basis_json(*m.basis);
  if (m.grp_basis) basis["group"] = basis_json(*m.grp_basis);
  basis["n_groups"] = m.n_groups;
  basis["subject_effects"] = m.subject_effects;
  basis["grid_points"] = req.grid_points;

  const auto curves = compute_curves(m, q_natural(g, g.node_index(m.coef_node)), req.grid_points);
  json cj = json::object();
  for (const auto& [name, c] : curves)
    cj[name] = {{"scale", name == "linear_predictor" || m.link == Link::identity ? "linear_predictor" : "response"},
                {"grid", vec_json(c.grid)},
                {"mean", vec_json(c.mean)},
                {"lower95", vec_json(c.lower95)},
                {"upper95", vec_json(c.upper95)}};

  std::vector<std::string> warnings = m.warnings;
  if (rep.nonconjugate) warnings.push_back("non-conjugate fragment present; the ELBO trace need not be monotone");
  if (!rep.converged) warnings.push_back("stopped at --iters " + std::to_string(req.iters) + " without meeting --tol");
  meta["warnings"] = warnings;

  FitOutcome out;
  out.converged = rep.converged;
  out.result["meta"] = meta;
  out.result["q_densities"] = q;
  out.result["elbo_trace"] = rep.elbo_trace;
  out.result["convergence"] = {{"iterations", rep.iterations},
                               {"converged", rep.converged},
                               {"max_relative_delta", rep.max_relative_delta},
                               {"nonconjugate", rep.nonconjugate}};
  out.result["curves"] = cj;
  out.result["basis"] = basis;

  std::ostringstream s;
  s << m.kind << ": n=" << data.rows() << ", " << g.nodes.size() << " nodes, " << g.factors.size() << " factors; "
    << (rep.converged ? "converged" : "not converged") << " after " << rep.iterations << " iterations";
  if (!rep.elbo_trace.empty()) s << ", ELBO " << rep.elbo_trace.back();
  for (const auto& w : warnings) s << "\nwarning: " << w;
  out.summary = s.str();
  return out;
}

Model curve_model_from_result(const json& result) {
  const json& b = result.at("basis");
  Model m;
  m.kind = b.at("model").get<std::string>();
  m.coef_node = b.at("coef_node").get<std::string>();
  m.link = link_from_string(b.at("link").get<std::string>());
  m.x_lo = b.at("x_range").at(0).get<double>();
  m.x_hi = b.at("x_range").at(1).get<double>();
  if (b.contains("standardizer"))
    m.standardizer = Standardizer{b["standardizer"].at("center").get<double>(), b["standardizer"].at("scale").get<double>()};
  if (b.contains("global")) m.basis = json_basis(b["global"]);
  if (b.contains("group")) m.grp_basis = json_basis(b["group"]);
  m.n_groups = b.at("n_groups").get<Index>();
  m.subject_effects = b.at("subject_effects").get<bool>();
  return m;
}

std::map<std::string, FittedCurve> curves_from_result(const json& result) {
  const Model m = curve_model_from_result(result);
  const json& q = result.at("q_densities").at(m.coef_node);
  const NatParam qc{family_from_name(q.at("family").get<std::string>(), q.at("d").get<Index>()), json_vec(q.at("natural"))};
  return compute_curves(m, qc, result.at("basis").at("grid_points").get<std::size_t>());
}

std::string dump_result(const json& result) { return result.dump(2) + "\n"; }

}  // namespace vmp
