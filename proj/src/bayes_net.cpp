#include "partbelief/bayes_net.hpp"

#include "partbelief/error.hpp"

#include <algorithm>
#include <deque>
#include <set>

namespace partbelief {

namespace {

using Vec = std::vector<double>;

void check_likelihood(const Vec& v, std::size_t expected, const std::string& what) {
    if (v.size() != expected)
        throw ValidationError(what + ": expected " + std::to_string(expected) + " entries, got " +
                              std::to_string(v.size()));
    bool any = false;
    for (double x : v) {
        if (!(x >= 0.0)) throw ValidationError(what + ": entries must be non-negative");
        any = any || x > 0.0;
    }
    if (!any) throw ValidationError(what + ": all entries are zero");
}

// Scales v to sum 1; leaves an all-zero vector untouched. Returns the sum.
double normalize(Vec& v) {
    double sum = 0.0;
    for (double x : v) sum += x;
    if (sum > 0.0)
        for (double& x : v) x /= sum;
    return sum;
}

Vec erase_at(const Vec& v, std::size_t i) {
    Vec out;
    out.reserve(v.size() - 1);
    for (std::size_t k = 0; k < v.size(); ++k)
        if (k != i) out.push_back(v[k]);
    return out;
}

}  // namespace

const NodeBelief& BeliefState::at(std::string_view id) const {
    for (std::size_t i = 0; i < node_ids.size(); ++i)
        if (node_ids[i] == id) return nodes[i];
    throw ValidationError("no node '" + std::string(id) + "'");
}

std::optional<std::size_t> Net::find(std::string_view id) const {
    for (std::size_t i = 0; i < nodes_.size(); ++i)
        if (nodes_[i].id == id) return i;
    return std::nullopt;
}

std::size_t Net::index_of(std::string_view id) const {
    auto idx = find(id);
    if (!idx) throw ValidationError("no node '" + std::string(id) + "'");
    return *idx;
}

const Net::Node& Net::node(std::string_view id) const { return nodes_[index_of(id)]; }

void Net::check_table(const Node& child, const Node& parent, const ConditionalPriorTable& t) const {
    if (t.child_hypotheses() != child.hypotheses)
        throw StructureError("table rows do not match the hypotheses of node '" + child.id + "'");
    if (t.parent_hypotheses() != parent.hypotheses)
        throw StructureError("table columns do not match the hypotheses of node '" + parent.id +
                             "'");
    t.check_columns();
}

std::size_t Net::instantiate_node(std::string id, std::vector<std::string> hypotheses,
                                  std::optional<ParentLink> parent,
                                  std::optional<Vec> evidence) {
    if (id.empty()) throw ValidationError("node id must not be empty");
    if (find(id)) throw StructureError("node '" + id + "' already exists");
    if (hypotheses.empty()) throw ValidationError("node '" + id + "' has no hypotheses");
    std::set<std::string> distinct(hypotheses.begin(), hypotheses.end());
    if (distinct.size() != hypotheses.size())
        throw ValidationError("node '" + id + "' lists a hypothesis twice");

    Node node;
    node.id = std::move(id);
    node.hypotheses = std::move(hypotheses);
    if (evidence) {
        check_likelihood(*evidence, node.hypotheses.size(), "evidence for '" + node.id + "'");
        node.evidence = std::move(evidence);
    }
    if (parent) {
        const std::size_t p = index_of(parent->parent_id);
        check_table(node, nodes_[p], parent->table);
        node.parent = p;
        node.table = std::move(parent->table);
    }
    nodes_.push_back(std::move(node));
    const std::size_t index = nodes_.size() - 1;
    if (nodes_[index].parent) nodes_[*nodes_[index].parent].children.push_back(index);
    dirty_ = true;
    return index;
}

void Net::link(std::string_view child_id, ParentLink link) {
    const std::size_t c = index_of(child_id);
    const std::size_t p = index_of(link.parent_id);
    if (nodes_[c].parent)
        throw StructureError("node '" + nodes_[c].id + "' already has parent '" +
                             nodes_[*nodes_[c].parent].id + "'");
    for (std::optional<std::size_t> a = p; a; a = nodes_[*a].parent)
        if (*a == c)
            throw StructureError("linking '" + nodes_[c].id + "' below '" + nodes_[p].id +
                                 "' would create a cycle");
    if (nodes_[c].root_prior)
        throw StructureError("node '" + nodes_[c].id + "' has a root prior and cannot take a parent");
    check_table(nodes_[c], nodes_[p], link.table);
    nodes_[c].parent = p;
    nodes_[c].table = std::move(link.table);
    nodes_[p].children.push_back(c);
    dirty_ = true;
}

void Net::post_evidence(std::string_view id, Vec likelihood) {
    Node& n = nodes_[index_of(id)];
    check_likelihood(likelihood, n.hypotheses.size(), "evidence for '" + n.id + "'");
    n.evidence = std::move(likelihood);
    dirty_ = true;
}

void Net::set_root_prior(std::string_view id, Vec prior) {
    Node& n = nodes_[index_of(id)];
    if (n.parent) throw StructureError("node '" + n.id + "' is not a root");
    check_likelihood(prior, n.hypotheses.size(), "root prior for '" + n.id + "'");
    normalize(prior);
    n.root_prior = std::move(prior);
    dirty_ = true;
}

Vec Net::root_prior(std::size_t index) const {
    const Node& n = nodes_.at(index);
    if (n.parent) throw StructureError("node '" + n.id + "' is not a root");
    if (n.root_prior) return *n.root_prior;
    return Vec(n.hypotheses.size(), 1.0 / static_cast<double>(n.hypotheses.size()));
}

int Net::diameter() const {
    const std::size_t n = nodes_.size();
    std::vector<std::vector<std::size_t>> adj(n);
    for (std::size_t i = 0; i < n; ++i)
        if (nodes_[i].parent) {
            adj[i].push_back(*nodes_[i].parent);
            adj[*nodes_[i].parent].push_back(i);
        }
    auto farthest = [&](std::size_t start) {
        std::vector<int> dist(n, -1);
        std::deque<std::size_t> queue{start};
        dist[start] = 0;
        std::pair<std::size_t, int> best{start, 0};
        while (!queue.empty()) {
            std::size_t u = queue.front();
            queue.pop_front();
            if (dist[u] > best.second) best = {u, dist[u]};
            for (std::size_t v : adj[u])
                if (dist[v] < 0) {
                    dist[v] = dist[u] + 1;
                    queue.push_back(v);
                }
        }
        return best;
    };
    int diameter = 0;
    for (std::size_t i = 0; i < n; ++i)
        if (!nodes_[i].parent) diameter = std::max(diameter, farthest(farthest(i).first).second);
    return diameter;
}

const BeliefState& Net::propagate() {
    const std::size_t n = nodes_.size();
    auto evidence_at = [&](std::size_t x, std::size_t r) {
        return nodes_[x].evidence ? (*nodes_[x].evidence)[r] : 1.0;
    };

    // up[x]   : message x -> parent, over the parent's hypotheses
    // down[x] : message parent -> x, over the parent's hypotheses
    std::vector<Vec> up(n), down(n);
    for (std::size_t x = 0; x < n; ++x)
        if (nodes_[x].parent) {
            const std::size_t k = nodes_[*nodes_[x].parent].hypotheses.size();
            up[x].assign(k, 1.0 / static_cast<double>(k));
            down[x].assign(k, 1.0 / static_cast<double>(k));
        }

    // Product of evidence and every child message except `skip`.
    auto support = [&](const std::vector<Vec>& ups, std::size_t x, std::optional<std::size_t> skip) {
        const Node& node = nodes_[x];
        Vec c(node.hypotheses.size());
        for (std::size_t r = 0; r < c.size(); ++r) {
            double v = evidence_at(x, r);
            for (std::size_t child : node.children)
                if (child != skip) v *= ups[child][r];
            c[r] = v;
        }
        return c;
    };
    auto prediction = [&](const std::vector<Vec>& downs, std::size_t x) {
        const Node& node = nodes_[x];
        if (!node.parent) return root_prior(x);
        Vec p(node.hypotheses.size(), 0.0);
        for (std::size_t r = 0; r < p.size(); ++r)
            for (std::size_t j = 0; j < node.table.cols(); ++j)
                p[r] += node.table(r, j) * downs[x][j];
        return p;
    };

    int sweeps = 0;
    // On a tree every message is final after `diameter` sweeps; the extra
    // slack only guards against a broken invariant.
    const int limit = static_cast<int>(n) + 2;
    for (;;) {
        std::vector<Vec> next_up(n), next_down(n);
        for (std::size_t x = 0; x < n; ++x) {
            const Node& node = nodes_[x];
            if (node.parent) {
                const Vec c = support(up, x, std::nullopt);
                Vec m(node.table.cols(), 0.0);
                for (std::size_t j = 0; j < m.size(); ++j)
                    for (std::size_t r = 0; r < c.size(); ++r) m[j] += node.table(r, j) * c[r];
                normalize(m);
                next_up[x] = std::move(m);
            }
            if (!node.children.empty()) {
                const Vec p = prediction(down, x);
                for (std::size_t child : node.children) {
                    // Leave-one-out product instead of dividing the belief by
                    // the child's own message, so zero entries stay defined.
                    Vec m = support(up, x, child);
                    for (std::size_t r = 0; r < m.size(); ++r) m[r] *= p[r];
                    normalize(m);
                    next_down[child] = std::move(m);
                }
            }
        }
        const bool changed = next_up != up || next_down != down;
        up = std::move(next_up);
        down = std::move(next_down);
        if (!changed) break;
        if (++sweeps > limit) throw std::logic_error("propagation did not reach a fixpoint");
    }

    BeliefState state;
    state.sweeps = sweeps;
    state.diameter = diameter();
    for (std::size_t x = 0; x < n; ++x) {
        NodeBelief nb;
        nb.support = support(up, x, std::nullopt);
        nb.prediction = prediction(down, x);
        const double p_sum = normalize(nb.prediction);
        nb.beta = p_sum > 0.0 ? 1.0 / p_sum : 1.0;
        nb.belief.resize(nb.support.size());
        for (std::size_t r = 0; r < nb.belief.size(); ++r)
            nb.belief[r] = nb.support[r] * nb.prediction[r];
        const double b_sum = normalize(nb.belief);
        if (!(b_sum > 0.0))
            throw InconsistencyError(nodes_[x].id, "inconsistent evidence: every hypothesis at node '" +
                                                       nodes_[x].id + "' has zero support");
        nb.alpha = 1.0 / b_sum;
        state.node_ids.push_back(nodes_[x].id);
        state.nodes.push_back(std::move(nb));
    }
    state_ = std::move(state);
    dirty_ = false;
    return state_;
}

const BeliefState& Net::state() const {
    if (dirty_) throw StaleBeliefError("net changed since the last propagation; propagate first");
    return state_;
}

Vec Net::belief(std::string_view id) const {
    const BeliefState& s = state();
    return s.nodes[index_of(id)].belief;
}

void Net::ablate_node_hypothesis(std::string_view id, std::string_view hypothesis) {
    const std::size_t x = index_of(id);
    Node& node = nodes_[x];
    if (hypothesis == kOther) throw ValidationError("cannot ablate the 'other' hypothesis");
    auto it = std::find(node.hypotheses.begin(), node.hypotheses.end(), hypothesis);
    if (it == node.hypotheses.end())
        throw ValidationError("node '" + node.id + "' has no hypothesis '" + std::string(hypothesis) +
                              "'");
    const std::size_t r = static_cast<std::size_t>(it - node.hypotheses.begin());

    // Build every replacement first so a failure leaves the net untouched.
    std::optional<ConditionalPriorTable> table;
    std::optional<Vec> prior;
    if (node.parent) {
        table = ablate_hypothesis(node.table, hypothesis);
    } else {
        const bool has_other = node.hypotheses.back() == kOther;
        if (node.hypotheses.size() <= (has_other ? 2u : 1u))
            throw ValidationError("cannot ablate '" + std::string(hypothesis) + "' at node '" +
                                  node.id + "': it is the last hypothesis besides 'other'");
        if (node.root_prior) {
            prior = erase_at(*node.root_prior, r);
            if (!(normalize(*prior) > 0.0))
                throw ValidationError("ablating '" + std::string(hypothesis) + "' at node '" +
                                      node.id + "' leaves no prior mass");
        }
    }
    std::vector<ConditionalPriorTable> child_tables;
    for (std::size_t c : node.children)
        child_tables.push_back(nodes_[c].table.without_parent(hypothesis));

    node.hypotheses.erase(it);
    if (table) node.table = std::move(*table);
    if (prior) node.root_prior = std::move(prior);
    if (node.evidence) node.evidence = erase_at(*node.evidence, r);
    for (std::size_t k = 0; k < node.children.size(); ++k)
        nodes_[node.children[k]].table = std::move(child_tables[k]);
    dirty_ = true;
}

// ---------------------------------------------------------------------------
// Enumeration oracle

std::vector<std::size_t> JointDistribution::decode(std::size_t index) const {
    std::vector<std::size_t> out(radix.size());
    for (std::size_t i = radix.size(); i-- > 0;) {
        out[i] = index % radix[i];
        index /= radix[i];
    }
    return out;
}

JointDistribution enumerate_joint(const Net& net, std::size_t max_states) {
    JointDistribution joint;
    std::size_t total = 1;
    for (const auto& node : net.nodes()) {
        joint.radix.push_back(node.hypotheses.size());
        if (total > max_states / node.hypotheses.size())
            throw ValidationError("joint state space exceeds " + std::to_string(max_states) +
                                  " assignments");
        total *= node.hypotheses.size();
    }

    std::vector<std::vector<double>> priors(net.size());
    for (std::size_t i = 0; i < net.size(); ++i)
        if (!net.node(i).parent) priors[i] = net.root_prior(i);

    joint.probability.resize(total);
    std::vector<std::size_t> a(net.size(), 0);
    double sum = 0.0;
    for (std::size_t idx = 0; idx < total; ++idx) {
        double score = 1.0;
        for (std::size_t i = 0; i < net.size() && score != 0.0; ++i) {
            const auto& node = net.node(i);
            score *= node.parent ? node.table(a[i], a[*node.parent]) : priors[i][a[i]];
            if (node.evidence) score *= (*node.evidence)[a[i]];
        }
        joint.probability[idx] = score;
        sum += score;
        // Mixed-radix increment, last node fastest.
        for (std::size_t i = net.size(); i-- > 0;) {
            if (++a[i] < joint.radix[i]) break;
            a[i] = 0;
        }
    }
    if (!(sum > 0.0))
        throw InconsistencyError(net.size() ? net.node(0).id : std::string(),
                                 "inconsistent evidence: every joint assignment has zero probability");
    for (double& p : joint.probability) p /= sum;
    return joint;
}

std::vector<std::vector<double>> brute_force_joint(const Net& net, std::size_t max_states) {
    const JointDistribution joint = enumerate_joint(net, max_states);
    std::vector<std::vector<double>> marginals(net.size());
    for (std::size_t i = 0; i < net.size(); ++i) marginals[i].assign(joint.radix[i], 0.0);
    std::vector<std::size_t> a(net.size(), 0);
    for (std::size_t idx = 0; idx < joint.probability.size(); ++idx) {
        for (std::size_t i = 0; i < net.size(); ++i) marginals[i][a[i]] += joint.probability[idx];
        for (std::size_t i = net.size(); i-- > 0;) {
            if (++a[i] < joint.radix[i]) break;
            a[i] = 0;
        }
    }
    return marginals;
}

}  // namespace partbelief
