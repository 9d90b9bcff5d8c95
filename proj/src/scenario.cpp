#include "partbelief/scenario.hpp"

#include "partbelief/error.hpp"

#include "json.hpp"

#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

namespace partbelief {

using json = nlohmann::ordered_json;

namespace {

std::optional<std::vector<double>> optional_vector(const json& node, const char* key,
                                                   const std::string& where) {
    if (!node.contains(key) || node[key].is_null()) return std::nullopt;
    try {
        return node[key].get<std::vector<double>>();
    } catch (const json::exception&) {
        throw ParseError(where + ": '" + key + "' must be a list of numbers");
    }
}

}  // namespace

Net load_scenario(std::string_view source) {
    json doc;
    try {
        doc = json::parse(source);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("scenario document: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("nodes") || !doc["nodes"].is_array())
        throw ParseError("scenario document: expected {\"nodes\": [...]}");

    struct Pending {
        std::string child;
        std::string parent;
        std::vector<std::vector<double>> table;
    };
    Net net;
    std::vector<Pending> links;
    std::vector<std::pair<std::string, std::vector<double>>> priors;
    for (const auto& n : doc["nodes"]) {
        std::string id;
        std::vector<std::string> hypotheses;
        try {
            id = n.at("id").get<std::string>();
            hypotheses = n.at("hypotheses").get<std::vector<std::string>>();
        } catch (const json::exception&) {
            throw ParseError("scenario node: needs string 'id' and list 'hypotheses'");
        }
        const std::string where = "scenario node '" + id + "'";
        net.instantiate_node(id, std::move(hypotheses), std::nullopt,
                             optional_vector(n, "evidence", where));
        if (n.contains("parent") && !n["parent"].is_null()) {
            Pending p;
            p.child = id;
            try {
                p.parent = n["parent"].at("id").get<std::string>();
                p.table = n["parent"].at("table").get<std::vector<std::vector<double>>>();
            } catch (const json::exception&) {
                throw ParseError(where + ": parent needs 'id' and a 'table' matrix");
            }
            links.push_back(std::move(p));
        }
        if (auto prior = optional_vector(n, "root_prior", where)) priors.emplace_back(id, *prior);
    }

    for (auto& l : links) {
        if (!net.find(l.parent))
            throw ValidationError("scenario node '" + l.child + "': unknown parent '" + l.parent + "'");
        const auto& child = net.node(l.child);
        const auto& parent = net.node(l.parent);
        if (l.table.size() != child.hypotheses.size())
            throw StructureError("scenario node '" + l.child + "': table needs one row per hypothesis");
        std::vector<double> entries;
        for (const auto& row : l.table) {
            if (row.size() != parent.hypotheses.size())
                throw StructureError("scenario node '" + l.child +
                                     "': table needs one column per parent hypothesis");
            entries.insert(entries.end(), row.begin(), row.end());
        }
        ConditionalPriorTable table(parent.hypotheses, child.hypotheses, std::move(entries));
        net.link(l.child, ParentLink{l.parent, std::move(table)});
    }
    for (auto& [id, prior] : priors) net.set_root_prior(id, std::move(prior));
    return net;
}

Net load_scenario_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open scenario file " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return load_scenario(buffer.str());
}

std::string dump_scenario(const Net& net) {
    json nodes = json::array();
    for (const auto& node : net.nodes()) {
        json n;
        n["id"] = node.id;
        n["hypotheses"] = node.hypotheses;
        if (node.parent) {
            json rows = json::array();
            for (std::size_t r = 0; r < node.table.rows(); ++r) {
                json row = json::array();
                for (std::size_t c = 0; c < node.table.cols(); ++c) row.push_back(node.table(r, c));
                rows.push_back(std::move(row));
            }
            n["parent"] = {{"id", net.node(*node.parent).id}, {"table", rows}};
        } else {
            n["parent"] = nullptr;
        }
        n["evidence"] = node.evidence ? json(*node.evidence) : json(nullptr);
        n["root_prior"] = node.root_prior ? json(*node.root_prior) : json(nullptr);
        nodes.push_back(std::move(n));
    }
    json doc;
    doc["nodes"] = std::move(nodes);
    return doc.dump(2) + "\n";
}

void write_beliefs_tsv(std::ostream& out, const Net& net) {
    const BeliefState& state = net.state();
    out << "node_id\thypothesis\tbelief\n";
    char buf[64];
    for (std::size_t i = 0; i < net.size(); ++i) {
        const auto& node = net.node(i);
        for (std::size_t r = 0; r < node.hypotheses.size(); ++r) {
            std::snprintf(buf, sizeof buf, "%.6f", state.nodes[i].belief[r]);
            out << node.id << '\t' << node.hypotheses[r] << '\t' << buf << '\n';
        }
    }
}

}  // namespace partbelief
