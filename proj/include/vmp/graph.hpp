#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "vmp/expfam.hpp"

namespace vmp {

// A factor together with its closed-form update rules. Ports are ordered;
// port k attaches to a stochastic node of family port_families()[k].
class Fragment {
 public:
  virtual ~Fragment() = default;

  virtual std::string kind() const = 0;
  virtual std::vector<Family> port_families() const = 0;

  // Order in which update_port is applied within one factor update. Each
  // port update sees the outgoing messages already refreshed for earlier
  // ports, so one factor update is a block of coordinate-ascent steps.
  virtual std::vector<std::size_t> port_order() const;

  // New factor -> node message for port k. to_factor[i] is the current node
  // -> factor message on port i, from_factor[i] the current factor -> node
  // message. May update internal variational state (GLM fragments).
  virtual Vec update_port(std::size_t k, const std::vector<Vec>& to_factor,
                          const std::vector<Vec>& from_factor) = 0;

  // E_q{log f} at the supplied q-densities (one per port). Fragments with
  // variational parameters evaluate their bound at the stored parameters.
  virtual double expected_log_factor(const std::vector<NatParam>& q) const = 0;

  // Starting factor -> node message on port k; the vague default when empty.
  virtual std::optional<Vec> initial_message(std::size_t) const { return std::nullopt; }

  virtual bool is_likelihood() const { return false; }
  // False for fragments whose updates are not exact coordinate ascent steps.
  virtual bool conjugate() const { return true; }

  virtual std::unique_ptr<Fragment> clone() const = 0;
};

struct NodeSpec {
  std::string name;
  Family family;
};

struct FactorSpec {
  std::string name;
  std::shared_ptr<const Fragment> fragment;  // prototype, cloned into the graph
  std::vector<std::string> ports;            // node names, one per fragment port
};

struct ModelSpec {
  std::vector<NodeSpec> nodes;
  std::vector<FactorSpec> factors;
};

struct GraphNode {
  std::string name;
  Family family;
  std::vector<std::pair<std::size_t, std::size_t>> edges;  // (factor, port)
};

struct GraphFactor {
  std::string name;
  std::unique_ptr<Fragment> fragment;
  std::vector<std::size_t> nodes;
  std::vector<Vec> to_node;    // factor -> node messages
  std::vector<Vec> to_factor;  // node -> factor messages
};

class FactorGraph {
 public:
  FactorGraph() = default;
  FactorGraph(const FactorGraph& other);
  FactorGraph& operator=(const FactorGraph& other);
  FactorGraph(FactorGraph&&) = default;
  FactorGraph& operator=(FactorGraph&&) = default;

  std::vector<GraphNode> nodes;
  std::vector<GraphFactor> factors;
  std::size_t iteration = 0;

  std::size_t node_index(const std::string& name) const;
  std::size_t factor_index(const std::string& name) const;
  std::size_t message_count() const;
};

// Vague proper member used to initialize every factor -> node message.
Vec vague_message(const Family& family);

FactorGraph build_factor_graph(const ModelSpec& model);

// Sum of the messages reaching `node` from every neighbouring factor except
// `factor`; stored in the graph and returned.
Vec update_node_to_factor(FactorGraph& g, std::size_t node, std::size_t factor);

struct UpdateOptions {
  double damping = 1.0;  // eta <- rho eta_new + (1 - rho) eta_old
};

// Refreshes the factor's incoming messages, then recomputes its outgoing
// messages port by port. Returns the new outgoing messages.
std::vector<Vec> update_factor(FactorGraph& g, std::size_t factor, const UpdateOptions& opts = {});

struct QDensity {
  std::string node;
  NatParam eta_q;
  CommonParameters common;
};

// Natural parameter of q(node): the sum of all incoming factor messages.
NatParam q_natural(const FactorGraph& g, std::size_t node);
QDensity q_density(const FactorGraph& g, std::size_t node);
QDensity q_density(const FactorGraph& g, const std::string& node);

double elbo(const FactorGraph& g);

struct ConvergenceReport {
  std::size_t iterations = 0;
  bool converged = false;
  double max_relative_delta = 0.0;
  std::vector<double> elbo_trace;
  bool nonconjugate = false;  // monotonicity is not expected when set
};

struct RunOptions {
  std::vector<std::size_t> schedule;  // factor order per sweep; empty means declaration order
  std::size_t max_iter = 500;
  double tol = 1e-8;
  double damping = 1.0;
  bool track_elbo = true;
  std::function<void(std::size_t sweep, const FactorGraph&)> on_sweep;
};

ConvergenceReport run_vmp(FactorGraph& g, const RunOptions& opts = {});

}  // namespace vmp
