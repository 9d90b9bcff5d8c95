#include "partbelief/error.hpp"
#include "partbelief/evidence.hpp"
#include "partbelief/scenario.hpp"

#include "doctest.h"

#include <algorithm>
#include <string>

using namespace partbelief;

namespace {

const char* kKb = R"({
  "objects": [
    {"name": "elbow", "constituents": [{"class": "elbow-joint", "count": 1}]},
    {"name": "valve", "constituents": [{"class": "t-joint", "count": 1}]}
  ],
  "joints": [
    {"name": "t-joint", "members": [{"class": "straight", "count": 2}, {"class": "octagonal", "count": 1}],
     "pair_angles": [{"pair": [0, 1], "theta_deg": 180, "tol_deg": 10},
                     {"pair": [0, 2], "theta_deg": 90, "tol_deg": 10},
                     {"pair": [1, 2], "theta_deg": 90, "tol_deg": 10}]},
    {"name": "elbow-joint", "members": [{"class": "straight", "count": 2}],
     "pair_angles": [{"pair": [0, 1], "theta_deg": 90, "tol_deg": 5}]}
  ],
  "hypothesis_sets": {"objects": ["elbow", "valve"]}
})";

// Two bins: (0, 90] and (90, 180].
JointTables two_bin_tables() {
    JointTables t;
    t.bins = 2;
    t.by_joint["t-joint"] = {{180, {0.2, 0.8}, 0.0}, {90, {0.6, 0.4}, 0.0}, {90, {0.6, 0.4}, 0.0}};
    t.by_joint["elbow-joint"] = {{90, {0.7, 0.3}, 0.0}};
    return t;
}

std::string gc(const std::string& id, const std::string& cls, const std::string& group) {
    return R"({"id": ")" + id + R"(", "ribbon_class": ")" + cls + R"(", "axis_deg": 0, "group": ")" + group +
           R"("})";
}

}  // namespace

TEST_CASE("evidence loading") {
    CHECK(load_evidence("").gcs.empty());
    CHECK(load_evidence("  \n").angles.empty());
    CHECK_THROWS_AS(load_evidence("{"), ParseError);
    CHECK_THROWS_AS(load_evidence(R"({"gcs": [{"id": "a"}]})"), ParseError);

    const std::string two = "{\"gcs\": [" + gc("a", "straight", "g") + "," + gc("b", "straight", "g") + "," +
                            gc("c", "straight", "h") + "], \"angles\": [";
    const EvidenceSet ok = load_evidence(two + R"({"pair": ["a", "b"], "angle_deg": 90}]})");
    CHECK(ok.gcs.size() == 3);
    CHECK(ok.groups() == std::vector<std::string>{"g", "h"});
    CHECK(ok.find("b")->ribbon_class == "straight");

    CHECK_THROWS_AS(load_evidence(two + R"({"pair": ["a", "zz"], "angle_deg": 90}]})"), ValidationError);
    CHECK_THROWS_AS(load_evidence(two + R"({"pair": ["a", "a"], "angle_deg": 90}]})"), ValidationError);
    CHECK_THROWS_AS(load_evidence(two + R"({"pair": ["a", "c"], "angle_deg": 90}]})"), ValidationError);
    CHECK_THROWS_AS(load_evidence(two + R"({"pair": ["a", "b"], "angle_deg": 190}]})"), ValidationError);
    CHECK_THROWS_AS(load_evidence(two + R"({"pair": ["a", "b"], "angle_deg": 90},
                                           {"pair": ["b", "a"], "angle_deg": 80}]})"),
                    ValidationError);
    CHECK_THROWS_AS(load_evidence("{\"gcs\": [" + gc("a", "s", "g") + "," + gc("a", "s", "g") + "]}"),
                    ValidationError);
}

TEST_CASE("group likelihood averages over correspondences") {
    const ModelKB kb = load_model_kb(kKb);
    const JointTables tables = two_bin_tables();

    SUBCASE("two straights at 100 degrees") {
        const EvidenceSet ev = load_evidence("{\"gcs\": [" + gc("a", "straight", "g") + "," +
                                            gc("b", "straight", "g") +
                                            R"(], "angles": [{"pair": ["a", "b"], "angle_deg": 100}]})");
        // Elbow: both assignments hit the single pair, bin 2 -> 0.3.
        CHECK(*group_likelihood(ev, "g", *kb.find_joint("elbow-joint"), tables) == 0.3);
        // T-joint: the straights take instances 0 and 1 -> pair (0,1), 0.8.
        CHECK(*group_likelihood(ev, "g", *kb.find_joint("t-joint"), tables) == 0.8);
    }
    SUBCASE("unlabeled ribbons try every member") {
        const EvidenceSet ev = load_evidence(
            R"({"gcs": [{"id": "a", "group": "g"}, {"id": "b", "group": "g"}],
                "angles": [{"pair": ["a", "b"], "angle_deg": 30}]})");
        // Six assignments: (0,1),(1,0) -> 0.2; the other four -> 0.6.
        CHECK(*group_likelihood(ev, "g", *kb.find_joint("t-joint"), tables) ==
              doctest::Approx((2 * 0.2 + 4 * 0.6) / 6).epsilon(1e-15));
    }
    SUBCASE("incompatible joints") {
        const EvidenceSet ev = load_evidence("{\"gcs\": [" + gc("a", "straight", "g") + "," +
                                            gc("b", "octagonal", "g") + "]}");
        CHECK_FALSE(group_likelihood(ev, "g", *kb.find_joint("elbow-joint"), tables));
        CHECK(*group_likelihood(ev, "g", *kb.find_joint("t-joint"), tables) == 1.0);
        const EvidenceSet many = load_evidence("{\"gcs\": [" + gc("a", "straight", "g") + "," +
                                              gc("b", "straight", "g") + "," + gc("c", "straight", "g") + "]}");
        CHECK_FALSE(group_likelihood(many, "g", *kb.find_joint("elbow-joint"), tables));
        CHECK_FALSE(group_likelihood(many, "g", *kb.find_joint("t-joint"), tables));
    }
}

TEST_CASE("hypothesis generation builds one tree per group") {
    const ModelKB kb = load_model_kb(kKb);
    const JointTables tables = two_bin_tables();
    const EvidenceSet ev = load_evidence(
        "{\"gcs\": [" + gc("a", "straight", "g1") + "," + gc("b", "straight", "g1") + "," +
        gc("c", "straight", "g2") + "," + gc("d", "octagonal", "g2") +
        R"(], "angles": [{"pair": ["a", "b"], "angle_deg": 100}, {"pair": ["c", "d"], "angle_deg": 80}]})");

    GeneratedNet gen = generate_hypotheses(ev, kb, tables);
    REQUIRE(gen.groups.size() == 2);
    CHECK(gen.groups[0].root_id == "root.g1");
    CHECK(gen.groups[1].joint_id == "joint.g2");
    CHECK(gen.groups[0].joint_hypotheses == std::vector<std::string>{"t-joint", "elbow-joint", "other"});
    CHECK(gen.groups[1].joint_hypotheses == std::vector<std::string>{"t-joint", "other"});
    CHECK(gen.groups[1].leaf_likelihood == std::vector<double>{0.6, 0.5});
    CHECK(gen.net.size() == 4);
    CHECK(gen.net.diameter() == 1);
    for (const auto& node : gen.net.nodes()) {
        if (!node.parent) {
            CHECK(node.hypotheses == std::vector<std::string>{"elbow", "valve", "other"});
            continue;
        }
        CHECK_NOTHROW(node.table.check_invariants());
        CHECK(node.evidence.has_value());
    }
    const auto& g2 = gen.net.node("joint.g2").table;
    CHECK(g2.column(*g2.parent_index("valve")) == std::vector<double>{1.0, 0.0});

    const BeliefState& s = gen.net.propagate();
    CHECK(s.node_ids.size() == 4);

    GeneratedNet again = generate_hypotheses(ev, kb, tables);
    CHECK(dump_scenario(again.net) == dump_scenario(gen.net));
}

TEST_CASE("empty evidence generates nothing") {
    const ModelKB kb = load_model_kb(kKb);
    CHECK(generate_hypotheses(load_evidence(""), kb, two_bin_tables()).net.size() == 0);
    CHECK_THROWS_AS(generate_hypotheses(load_evidence("{\"gcs\": [" + gc("a", "s", "g") + "]}"), kb,
                                        two_bin_tables(), "missing"),
                    ValidationError);
}

TEST_CASE("an off-model angle favours 'other' at the leaf") {
    const ModelKB kb = load_model_kb(kKb);
    AngleTableSource source(36, ViewpointPrior::uniform(), 32);
    const JointTables tables = build_joint_tables(kb, source);
    REQUIRE(tables.by_joint.at("elbow-joint").size() == 1);
    // The elbow models 90 +/- 5; a 10 degree observation is far from it.
    const EvidenceSet ev = load_evidence("{\"gcs\": [" + gc("a", "straight", "g") + "," +
                                        gc("b", "straight", "g") +
                                        R"(], "angles": [{"pair": ["a", "b"], "angle_deg": 10}]})");
    const GeneratedNet gen = generate_hypotheses(ev, kb, tables);
    const auto& leaf = gen.groups[0].leaf_likelihood;
    REQUIRE(gen.groups[0].joint_hypotheses.back() == "other");
    CHECK(leaf.back() == doctest::Approx(1.0 / 36).epsilon(1e-15));
    CHECK(std::max_element(leaf.begin(), leaf.end()) == leaf.end() - 1);
}
