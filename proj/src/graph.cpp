#include "vmp/graph.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

namespace vmp {

std::vector<std::size_t> Fragment::port_order() const {
  std::vector<std::size_t> order(port_families().size());
  std::iota(order.begin(), order.end(), 0);
  return order;
}

FactorGraph::FactorGraph(const FactorGraph& other)
    : nodes(other.nodes), iteration(other.iteration) {
  factors.reserve(other.factors.size());
  for (const auto& f : other.factors)
    factors.push_back({f.name, f.fragment->clone(), f.nodes, f.to_node, f.to_factor});
}

FactorGraph& FactorGraph::operator=(const FactorGraph& other) {
  if (this != &other) {
    FactorGraph tmp(other);
    *this = std::move(tmp);
  }
  return *this;
}

std::size_t FactorGraph::node_index(const std::string& name) const {
  for (std::size_t i = 0; i < nodes.size(); ++i)
    if (nodes[i].name == name) return i;
  throw DomainError("no stochastic node named '" + name + "'");
}

std::size_t FactorGraph::factor_index(const std::string& name) const {
  for (std::size_t i = 0; i < factors.size(); ++i)
    if (factors[i].name == name) return i;
  throw DomainError("no factor named '" + name + "'");
}

std::size_t FactorGraph::message_count() const {
  std::size_t n = 0;
  for (const auto& f : factors) n += f.to_node.size() + f.to_factor.size();
  return n;
}

Vec vague_message(const Family& f) {
  const Index d = f.d;
  Vec eta(f.length());
  switch (f.kind) {
    case FamilyKind::MultivariateNormal:
      eta << Vec::Zero(d), -0.5 * vec(1e-2 * Mat::Identity(d, d));
      break;
    case FamilyKind::UnivariateNormal:
      eta << 0.0, -0.5e-2;
      break;
    case FamilyKind::InverseChiSquared:
    case FamilyKind::InverseWishart:
    case FamilyKind::InverseGWishartDiag:
      // kappa = 1, Lambda = I
      eta << -0.5 * static_cast<double>(d + 2), -0.5 * vec(Mat::Identity(d, d));
      break;
    case FamilyKind::Bernoulli:
      eta << 0.0;
      break;
    case FamilyKind::Beta:
      eta << 0.0, 0.0;
      break;
    case FamilyKind::InverseGaussian:
      eta << -0.5, -0.5;
      break;
  }
  return eta;
}

FactorGraph build_factor_graph(const ModelSpec& model) {
  if (model.factors.empty()) throw DomainError("build_factor_graph: model has no factors");
  FactorGraph g;
  std::map<std::string, std::size_t> index;
  for (const auto& n : model.nodes) {
    if (index.count(n.name)) throw DomainError("build_factor_graph: duplicate node '" + n.name + "'");
    index[n.name] = g.nodes.size();
    g.nodes.push_back({n.name, n.family, {}});
  }
  std::set<std::string> factor_names;
  for (const auto& fs : model.factors) {
    if (!fs.fragment) throw DomainError("build_factor_graph: factor '" + fs.name + "' has no fragment");
    if (!factor_names.insert(fs.name).second)
      throw DomainError("build_factor_graph: duplicate factor '" + fs.name + "'");
    const auto fams = fs.fragment->port_families();
    if (fs.ports.empty() || fams.size() != fs.ports.size())
      throw DomainError("build_factor_graph: factor '" + fs.name + "' (" + fs.fragment->kind() + ") needs " +
                        std::to_string(fams.size()) + " ports, got " + std::to_string(fs.ports.size()));
    GraphFactor gf{fs.name, fs.fragment->clone(), {}, {}, {}};
    for (std::size_t k = 0; k < fs.ports.size(); ++k) {
      auto it = index.find(fs.ports[k]);
      if (it == index.end())
        throw DomainError("build_factor_graph: factor '" + fs.name + "' references undeclared node '" +
                          fs.ports[k] + "'");
      const auto& node = g.nodes[it->second];
      if (!(node.family == fams[k]))
        throw DomainError("build_factor_graph: factor '" + fs.name + "' port " + std::to_string(k) +
                          " expects " + fams[k].name() + "(" + std::to_string(fams[k].d) + ") but node '" +
                          node.name + "' is " + node.family.name() + "(" + std::to_string(node.family.d) + ")");
      gf.nodes.push_back(it->second);
      auto init = fs.fragment->initial_message(k);
      gf.to_node.push_back(init ? *init : vague_message(node.family));
      gf.to_factor.push_back(Vec::Zero(node.family.length()));
    }
    g.factors.push_back(std::move(gf));
  }
  for (std::size_t j = 0; j < g.factors.size(); ++j)
    for (std::size_t k = 0; k < g.factors[j].nodes.size(); ++k)
      g.nodes[g.factors[j].nodes[k]].edges.emplace_back(j, k);
  for (const auto& n : g.nodes)
    if (n.edges.empty()) throw DomainError("build_factor_graph: node '" + n.name + "' has no factors");
  for (std::size_t i = 0; i < g.nodes.size(); ++i)
    for (auto [j, k] : g.nodes[i].edges) update_node_to_factor(g, i, j);
  return g;
}

Vec update_node_to_factor(FactorGraph& g, std::size_t node, std::size_t factor) {
  const auto& n = g.nodes.at(node);
  Vec sum = Vec::Zero(n.family.length());
  std::size_t port = SIZE_MAX;
  for (auto [j, k] : n.edges) {
    if (j == factor) {
      port = k;
      continue;
    }
    sum += g.factors[j].to_node[k];
  }
  if (port == SIZE_MAX)
    throw DomainError("update_node_to_factor: node '" + n.name + "' is not adjacent to factor '" +
                      g.factors.at(factor).name + "'");
  g.factors[factor].to_factor[port] = sum;
  return sum;
}

std::vector<Vec> update_factor(FactorGraph& g, std::size_t factor, const UpdateOptions& opts) {
  auto& f = g.factors.at(factor);
  for (std::size_t k = 0; k < f.nodes.size(); ++k) update_node_to_factor(g, f.nodes[k], factor);
  const double rho = opts.damping;
  if (!(rho > 0 && rho <= 1)) throw DomainError("update_factor: damping must lie in (0, 1]");
  const auto fams = f.fragment->port_families();
  for (std::size_t k : f.fragment->port_order()) {
    Vec next;
    try {
      next = f.fragment->update_port(k, f.to_factor, f.to_node);
    } catch (const NumericError& e) {
      throw NumericError("factor '" + f.name + "' -> node '" + g.nodes[f.nodes[k]].name + "'", e.what(),
                         e.rcond());
    } catch (const ImproperError& e) {
      throw ImproperError("factor '" + f.name + "' -> node '" + g.nodes[f.nodes[k]].name + "': " + e.what());
    }
    if (!next.allFinite())
      throw NumericError("factor '" + f.name + "' -> node '" + g.nodes[f.nodes[k]].name + "'",
                         "message has non-finite entries");
    next = canonicalize(fams[k], next);
    f.to_node[k] = rho == 1.0 ? next : Vec(rho * next + (1 - rho) * f.to_node[k]);
  }
  return f.to_node;
}

NatParam q_natural(const FactorGraph& g, std::size_t node) {
  const auto& n = g.nodes.at(node);
  Vec sum = Vec::Zero(n.family.length());
  for (auto [j, k] : n.edges) sum += g.factors[j].to_node[k];
  return {n.family, sum};
}

QDensity q_density(const FactorGraph& g, std::size_t node) {
  const NatParam q = q_natural(g, node);
  if (!is_proper(q))
    throw ImproperError("q-density of node '" + g.nodes[node].name + "' (" + q.family.name() +
                        ") is improper; the fit has not converged or the model is misspecified");
  return {g.nodes[node].name, q, natural_to_common(q)};
}

QDensity q_density(const FactorGraph& g, const std::string& node) { return q_density(g, g.node_index(node)); }

double elbo(const FactorGraph& g) {
  std::vector<NatParam> q;
  q.reserve(g.nodes.size());
  double total = 0;
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    q.push_back(q_density(g, i).eta_q);
    total += entropy(q.back());
  }
  for (const auto& f : g.factors) {
    std::vector<NatParam> qs;
    for (auto i : f.nodes) qs.push_back(q[i]);
    total += f.fragment->expected_log_factor(qs);
  }
  return total;
}

namespace {

Vec stacked_q(const FactorGraph& g) {
  Index len = 0;
  for (const auto& n : g.nodes) len += n.family.length();
  Vec out(len);
  Index at = 0;
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    const Vec e = q_natural(g, i).eta;
    out.segment(at, e.size()) = e;
    at += e.size();
  }
  return out;
}

}  // namespace

ConvergenceReport run_vmp(FactorGraph& g, const RunOptions& opts) {
  if (opts.max_iter < 1) throw DomainError("run_vmp: max_iter must be at least 1");
  if (!(opts.tol > 0)) throw DomainError("run_vmp: tol must be positive");
  std::vector<std::size_t> schedule = opts.schedule;
  if (schedule.empty()) {
    schedule.resize(g.factors.size());
    std::iota(schedule.begin(), schedule.end(), 0);
  }
  for (auto j : schedule)
    if (j >= g.factors.size()) throw DomainError("run_vmp: schedule references factor " + std::to_string(j));
  ConvergenceReport rep;
  for (const auto& f : g.factors) rep.nonconjugate = rep.nonconjugate || !f.fragment->conjugate();
  Vec prev = stacked_q(g);
  for (std::size_t it = 0; it < opts.max_iter; ++it) {
    for (auto j : schedule) update_factor(g, j, {opts.damping});
    ++g.iteration;
    const Vec cur = stacked_q(g);
    double delta = 0;
    for (Index i = 0; i < cur.size(); ++i)
      delta = std::max(delta, std::fabs(cur[i] - prev[i]) / std::max(1.0, std::fabs(prev[i])));
    prev = cur;
    rep.iterations = it + 1;
    rep.max_relative_delta = delta;
    if (opts.track_elbo) rep.elbo_trace.push_back(elbo(g));
    if (opts.on_sweep) opts.on_sweep(it + 1, g);
    if (delta < opts.tol) {
      rep.converged = true;
      break;
    }
  }
  return rep;
}

}  // namespace vmp
