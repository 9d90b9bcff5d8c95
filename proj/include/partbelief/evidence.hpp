#pragma once

#include "partbelief/angle_table_io.hpp"
#include "partbelief/bayes_net.hpp"
#include "partbelief/knowledge_base.hpp"
#include "partbelief/view_geometry.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace partbelief {

// A ribbon observed in the image, interpreted as the projection of a GC.
struct ObservedGC {
    std::string id;
    std::optional<std::string> ribbon_class;  // e.g. "straight", "octagonal"
    double axis_deg = 0.0;                    // axis direction in the image plane
    std::string group;                        // GCs meeting at one attachment point
};

struct ObservedAngle {
    std::string first;
    std::string second;
    double angle_deg = 0.0;
};

struct EvidenceSet {
    std::vector<ObservedGC> gcs;
    std::vector<ObservedAngle> angles;
    std::string source;

    const ObservedGC* find(std::string_view id) const;
    // Attachment groups in order of first appearance.
    std::vector<std::string> groups() const;
};

// Evidence document:
//   {"gcs": [{"id", "ribbon_class", "axis_deg", "group"}],
//    "angles": [{"pair": [id, id], "angle_deg"}]}
EvidenceSet load_evidence(std::string_view source, std::string label = {});
EvidenceSet load_evidence_file(const std::filesystem::path& path);

// Angle tables per joint class, aligned with JointClass::pair_angles.
struct JointTables {
    std::size_t bins = kDefaultBins;
    std::map<std::string, std::vector<AngleLikelihoodTable>> by_joint;
};

// One toleranced table per modeled pair angle of every joint in the KB.
JointTables build_joint_tables(const ModelKB& kb, AngleTableSource& source);

// Mean joint_angle_likelihood over every class-consistent assignment of
// the group's GCs to member instances of `joint`. nullopt when no
// assignment exists (the joint cannot explain the group).
std::optional<double> group_likelihood(const EvidenceSet& evidence, std::string_view group,
                                       const JointClass& joint, const JointTables& tables);

struct GroupNodes {
    std::string group;
    std::string root_id;
    std::string joint_id;
    std::vector<std::string> joint_hypotheses;
    std::vector<double> leaf_likelihood;
};

struct GeneratedNet {
    Net net;
    std::vector<GroupNodes> groups;
};

// One tree per attachment group: an object node over the chosen hypothesis
// set (plus "other") with a joint node below it whose alternatives are the
// compatible joint classes (plus "other"); the joint node carries the
// angle evidence.
GeneratedNet generate_hypotheses(const EvidenceSet& evidence, const ModelKB& kb,
                                 const JointTables& tables, std::string_view hypothesis_set = {});

}  // namespace partbelief
