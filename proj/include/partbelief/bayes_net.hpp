#pragma once

#include "partbelief/knowledge_base.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace partbelief {

struct ParentLink {
    std::string parent_id;
    // Rows follow the child's hypotheses, columns the parent's.
    ConditionalPriorTable table;
};

// Per-node quantities after propagation.
//   support    C_r: posted evidence times the product of child messages
//   prediction P_r: beta * sum_j p(r | parent j) * parent message_j (root prior at roots)
//   belief       : alpha * C_r * P_r
struct NodeBelief {
    std::vector<double> support;
    std::vector<double> prediction;
    std::vector<double> belief;
    double alpha = 1.0;
    double beta = 1.0;
};

struct BeliefState {
    std::vector<std::string> node_ids;
    std::vector<NodeBelief> nodes;
    // Activation sweeps in which at least one message changed.
    int sweeps = 0;
    // Longest path (in links) over all instantiated trees.
    int diameter = 0;

    const NodeBelief& at(std::string_view id) const;
};

// A forest of hypothesis nodes joined by conditional prior tables.
//
// Nodes are created lazily as evidence arrives. Each node has at most one
// parent; multi-parent DAGs are rejected rather than approximated.
class Net {
public:
    struct Node {
        std::string id;
        std::vector<std::string> hypotheses;
        std::optional<std::size_t> parent;
        ConditionalPriorTable table;  // meaningful only when parent is set
        std::vector<std::size_t> children;
        std::optional<std::vector<double>> evidence;
        std::optional<std::vector<double>> root_prior;
    };

    // Adds a node with uniform initial belief. Returns its index.
    std::size_t instantiate_node(std::string id, std::vector<std::string> hypotheses,
                                 std::optional<ParentLink> parent = std::nullopt,
                                 std::optional<std::vector<double>> evidence = std::nullopt);

    // Attaches an existing parentless node below `link.parent_id`.
    void link(std::string_view child_id, ParentLink link);

    // Replaces (never multiplies) the node's evidence likelihood.
    void post_evidence(std::string_view id, std::vector<double> likelihood);

    // Overrides the uniform prior of a root node.
    void set_root_prior(std::string_view id, std::vector<double> prior);

    // Exact propagation by repeated activation of every node until no
    // message changes. Throws InconsistencyError when a node's C * P
    // vanishes.
    const BeliefState& propagate();

    // Normalized belief; throws StaleBeliefError if the net changed since
    // the last propagate().
    std::vector<double> belief(std::string_view id) const;
    const BeliefState& state() const;

    // Removes a competing hypothesis at a node: the incoming table row (or
    // root prior entry) is dropped and renormalized, child tables lose the
    // matching parent column.
    void ablate_node_hypothesis(std::string_view id, std::string_view hypothesis);

    bool dirty() const { return dirty_; }
    std::size_t size() const { return nodes_.size(); }
    std::span<const Node> nodes() const { return nodes_; }
    const Node& node(std::string_view id) const;
    const Node& node(std::size_t index) const { return nodes_.at(index); }
    std::optional<std::size_t> find(std::string_view id) const;

    // Effective root prior (uniform unless overridden). Node must be a root.
    std::vector<double> root_prior(std::size_t index) const;
    int diameter() const;

private:
    std::size_t index_of(std::string_view id) const;
    void check_table(const Node& child, const Node& parent, const ConditionalPriorTable& t) const;

    std::vector<Node> nodes_;
    BeliefState state_;
    bool dirty_ = true;
};

// Every joint assignment of one hypothesis per node, in mixed radix order
// (node 0 varies slowest).
struct JointDistribution {
    std::vector<std::size_t> radix;
    std::vector<double> probability;  // normalized

    std::vector<std::size_t> decode(std::size_t index) const;
};

inline constexpr std::size_t kMaxJointStates = 10'000'000;

// Scores each assignment as prod(root priors) * prod(link tables) * prod(evidence).
JointDistribution enumerate_joint(const Net& net, std::size_t max_states = kMaxJointStates);

// Exact marginals per node (indexed like net.nodes()) by full enumeration.
std::vector<std::vector<double>> brute_force_joint(const Net& net,
                                                   std::size_t max_states = kMaxJointStates);

}  // namespace partbelief
