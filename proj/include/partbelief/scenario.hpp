#pragma once

#include "partbelief/bayes_net.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>

namespace partbelief {

// Scenario document:
//   {"nodes": [{"id": "...", "hypotheses": [...],
//               "parent": {"id": "...", "table": [[...], ...]} | null,
//               "evidence": [...] | null, "root_prior": [...] | null}]}
// `table` rows follow the node's hypotheses, columns the parent's, so each
// column is p(child | parent hypothesis). Parents may appear in any order.
Net load_scenario(std::string_view source);
Net load_scenario_file(const std::filesystem::path& path);
std::string dump_scenario(const Net& net);

// TSV with header "node_id\thypothesis\tbelief", 6 decimal places.
void write_beliefs_tsv(std::ostream& out, const Net& net);

}  // namespace partbelief
