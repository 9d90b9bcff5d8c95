#include "partbelief/evidence.hpp"

#include "partbelief/error.hpp"

#include "json.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace partbelief {

using json = nlohmann::ordered_json;

const ObservedGC* EvidenceSet::find(std::string_view id) const {
    auto it = std::find_if(gcs.begin(), gcs.end(), [&](const ObservedGC& g) { return g.id == id; });
    return it == gcs.end() ? nullptr : &*it;
}

std::vector<std::string> EvidenceSet::groups() const {
    std::vector<std::string> out;
    for (const auto& g : gcs)
        if (std::find(out.begin(), out.end(), g.group) == out.end()) out.push_back(g.group);
    return out;
}

EvidenceSet load_evidence(std::string_view source, std::string label) {
    EvidenceSet set;
    set.source = std::move(label);
    if (source.find_first_not_of(" \t\r\n") == std::string_view::npos) return set;

    json doc;
    try {
        doc = json::parse(source);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("evidence document: ") + e.what());
    }
    if (!doc.is_object()) throw ParseError("evidence document: top level must be an object");

    try {
        if (doc.contains("gcs")) {
            for (const auto& g : doc.at("gcs")) {
                ObservedGC gc;
                gc.id = g.at("id").get<std::string>();
                if (g.contains("ribbon_class") && !g["ribbon_class"].is_null())
                    gc.ribbon_class = g["ribbon_class"].get<std::string>();
                gc.axis_deg = g.value("axis_deg", 0.0);
                gc.group = g.at("group").get<std::string>();
                set.gcs.push_back(std::move(gc));
            }
        }
        if (doc.contains("angles")) {
            for (const auto& a : doc.at("angles")) {
                auto pair = a.at("pair").get<std::vector<std::string>>();
                if (pair.size() != 2) throw ParseError("evidence angle: pair must name two GCs");
                set.angles.push_back({pair[0], pair[1], a.at("angle_deg").get<double>()});
            }
        }
    } catch (const json::exception& e) {
        throw ParseError(std::string("evidence document: ") + e.what());
    }

    std::set<std::string> ids;
    for (const auto& g : set.gcs)
        if (!ids.insert(g.id).second) throw ValidationError("duplicate GC id '" + g.id + "'");
    std::set<std::pair<std::string, std::string>> seen;
    for (const auto& a : set.angles) {
        const ObservedGC* x = set.find(a.first);
        const ObservedGC* y = set.find(a.second);
        if (!x || !y)
            throw ValidationError("angle references unknown GC '" + (x ? a.second : a.first) + "'");
        if (a.first == a.second) throw ValidationError("angle pairs GC '" + a.first + "' with itself");
        if (x->group != y->group)
            throw ValidationError("angle between '" + a.first + "' and '" + a.second +
                                  "' crosses attachment groups");
        if (!(a.angle_deg >= 0.0 && a.angle_deg <= 180.0))
            throw ValidationError("angle between '" + a.first + "' and '" + a.second +
                                  "' must lie in [0, 180]");
        if (!seen.insert(std::minmax(a.first, a.second)).second)
            throw ValidationError("angle between '" + a.first + "' and '" + a.second +
                                  "' given twice");
    }
    return set;
}

EvidenceSet load_evidence_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open evidence file " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return load_evidence(buffer.str(), path.string());
}

JointTables build_joint_tables(const ModelKB& kb, AngleTableSource& source) {
    JointTables tables;
    tables.bins = source.bins();
    for (const auto& joint : kb.joints) {
        auto& per_pair = tables.by_joint[joint.name];
        for (const auto& pair : joint.pair_angles)
            per_pair.push_back(source.toleranced(pair.theta_deg, pair.tol_deg));
    }
    return tables;
}

namespace {

std::vector<const ObservedGC*> members_of(const EvidenceSet& evidence, std::string_view group) {
    std::vector<const ObservedGC*> out;
    for (const auto& g : evidence.gcs)
        if (g.group == group) out.push_back(&g);
    return out;
}

std::vector<const ObservedAngle*> angles_of(const EvidenceSet& evidence, std::string_view group) {
    std::vector<const ObservedAngle*> out;
    for (const auto& a : evidence.angles)
        if (evidence.find(a.first)->group == group) out.push_back(&a);
    return out;
}

}  // namespace

std::optional<double> group_likelihood(const EvidenceSet& evidence, std::string_view group,
                                       const JointClass& joint, const JointTables& tables) {
    const auto gcs = members_of(evidence, group);
    const auto angles = angles_of(evidence, group);
    const auto instances = joint.member_instances();
    if (gcs.size() > instances.size()) return std::nullopt;

    auto table_it = tables.by_joint.find(joint.name);
    if (table_it == tables.by_joint.end())
        throw ValidationError("no angle tables for joint '" + joint.name + "'");

    std::vector<std::size_t> assignment(gcs.size());
    std::vector<bool> used(instances.size(), false);
    double sum = 0.0;
    std::size_t valid = 0;

    auto gc_index = [&](const std::string& id) {
        for (std::size_t i = 0; i < gcs.size(); ++i)
            if (gcs[i]->id == id) return i;
        return gcs.size();
    };

    auto score = [&]() {
        std::vector<ObservedPairAngle> observed;
        for (const auto* a : angles) {
            const std::size_t i = assignment[gc_index(a->first)];
            const std::size_t j = assignment[gc_index(a->second)];
            if (!joint.find_pair(i, j)) return;  // this correspondence leaves a pair unmodeled
            observed.push_back({i, j, a->angle_deg});
        }
        sum += joint_angle_likelihood(observed, joint, table_it->second);
        ++valid;
    };
    auto assign = [&](auto&& self, std::size_t k) -> void {
        if (k == gcs.size()) {
            score();
            return;
        }
        for (std::size_t m = 0; m < instances.size(); ++m) {
            if (used[m]) continue;
            if (gcs[k]->ribbon_class && *gcs[k]->ribbon_class != instances[m]) continue;
            used[m] = true;
            assignment[k] = m;
            self(self, k + 1);
            used[m] = false;
        }
    };
    assign(assign, 0);

    if (valid == 0) return std::nullopt;
    return sum / static_cast<double>(valid);
}

GeneratedNet generate_hypotheses(const EvidenceSet& evidence, const ModelKB& kb,
                                 const JointTables& tables, std::string_view hypothesis_set) {
    GeneratedNet out;
    const auto groups = evidence.groups();
    if (groups.empty()) return out;

    const HypothesisSet& set = kb.hypothesis_set(hypothesis_set);
    std::vector<PartClass> parents;
    for (const auto& name : set.members) parents.push_back(*kb.find_object(name));
    std::vector<std::string> root_hypotheses = set.members;
    root_hypotheses.emplace_back(kOther);

    for (const auto& group : groups) {
        GroupNodes nodes;
        nodes.group = group;
        const std::string suffix = groups.size() > 1 ? "." + group : std::string();
        nodes.root_id = "root" + suffix;
        nodes.joint_id = "joint" + suffix;

        std::vector<std::string> compatible;
        for (const auto& joint : kb.joints) {
            if (auto lik = group_likelihood(evidence, group, joint, tables)) {
                compatible.push_back(joint.name);
                nodes.leaf_likelihood.push_back(*lik);
            }
        }
        nodes.joint_hypotheses = compatible;
        nodes.joint_hypotheses.emplace_back(kOther);
        nodes.leaf_likelihood.push_back(
            other_angle_likelihood(angles_of(evidence, group).size(), tables.bins));

        ConditionalPriorTable table = with_other_parent(build_conditional_table(compatible, parents));
        out.net.instantiate_node(nodes.root_id, root_hypotheses);
        out.net.instantiate_node(nodes.joint_id, nodes.joint_hypotheses,
                                 ParentLink{nodes.root_id, std::move(table)}, nodes.leaf_likelihood);
        out.groups.push_back(std::move(nodes));
    }
    return out;
}

}  // namespace partbelief
