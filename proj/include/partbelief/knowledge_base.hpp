#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace partbelief {

// Name of the ignorance alternative carried by every hypothesis node.
inline constexpr std::string_view kOther = "other";

enum class Level { object, part, joint, sub_part };

std::string_view to_string(Level level);
std::optional<Level> parse_level(std::string_view text);

struct Constituent {
    std::string class_name;
    int count = 1;
};

// An object or part class and the classes it is composed of.
struct PartClass {
    std::string name;
    std::vector<Constituent> constituents;
    Level level = Level::object;

    // Number of `child` constituents listed directly (0 when absent).
    int count_of(std::string_view child) const;
};

// Modeled angle between two member GC instances of a joint.
// Member instances are the members list expanded by count, in order:
// members [{straight, 2}, {octagonal, 1}] gives instances
// 0 = straight, 1 = straight, 2 = octagonal.
struct PairAngle {
    std::size_t first = 0;
    std::size_t second = 0;
    double theta_deg = 0.0;
    double tol_deg = 0.0;
};

struct JointClass {
    std::string name;
    std::vector<Constituent> members;
    std::vector<PairAngle> pair_angles;

    std::vector<std::string> member_instances() const;
    // Pair entry for instances {i, j} in either order, or nullptr.
    const PairAngle* find_pair(std::size_t i, std::size_t j) const;
};

struct HypothesisSet {
    std::string name;
    std::vector<std::string> members;
};

// The a priori model library. Immutable once returned by load_model_kb.
struct ModelKB {
    std::vector<PartClass> objects;
    std::vector<JointClass> joints;
    std::vector<HypothesisSet> hypothesis_sets;
    // Declared primitive GC classes; empty means "implicit from joint members".
    std::vector<std::string> gc_classes;
    // Non-fatal findings (level alternation) collected during validation.
    std::vector<std::string> warnings;

    const PartClass* find_object(std::string_view name) const;
    const JointClass* find_joint(std::string_view name) const;
    // Named set, or the first set in document order when `name` is empty.
    const HypothesisSet& hypothesis_set(std::string_view name = {}) const;
};

ModelKB load_model_kb(std::string_view source);
ModelKB load_model_kb_file(const std::filesystem::path& path);

// Throws ValidationError naming the offending class; appends warnings.
void validate(ModelKB& kb);

// p(child row | parent column). The last child row is always "other".
class ConditionalPriorTable {
public:
    ConditionalPriorTable() = default;
    ConditionalPriorTable(std::vector<std::string> parent_hypotheses,
                          std::vector<std::string> child_hypotheses,
                          std::vector<double> entries);

    const std::vector<std::string>& parent_hypotheses() const { return parents_; }
    const std::vector<std::string>& child_hypotheses() const { return children_; }

    std::size_t rows() const { return children_.size(); }
    std::size_t cols() const { return parents_.size(); }

    double operator()(std::size_t child, std::size_t parent) const {
        return entries_[child * parents_.size() + parent];
    }
    std::vector<double> column(std::size_t parent) const;
    std::span<const double> entries() const { return entries_; }

    std::optional<std::size_t> child_index(std::string_view name) const;
    std::optional<std::size_t> parent_index(std::string_view name) const;

    // Column sums to 1 within this tolerance.
    static constexpr double kColumnTolerance = 1e-9;

    // Throws ValidationError if any column invariant is broken.
    void check_invariants() const;
    // Column checks only; does not require an "other" row.
    void check_columns() const;

    ConditionalPriorTable without_parent(std::string_view parent) const;

private:
    std::vector<std::string> parents_;
    std::vector<std::string> children_;
    std::vector<double> entries_;
};

// weights[h][i]: unnormalized weight of child hypothesis h under parents[i].
//   w(h, i) = chi(h, i) * count(h, i) / (1 + sum_{j != i} chi(h, j) * count(h, j))
std::vector<std::vector<double>> child_prior_weights(
    std::span<const std::string> child_hypotheses,
    std::span<const PartClass> parents);

// Unnormalized weight of "other" under `parent`: the fraction of the
// (non-other) child hypotheses that do not occur in it.
double other_weight(std::span<const std::string> child_hypotheses,
                    const PartClass& parent);

// Stacks child_prior_weights and other_weight per parent and normalizes
// each column. `child_hypotheses` must not contain "other"; it is appended.
ConditionalPriorTable build_conditional_table(
    std::span<const std::string> child_hypotheses,
    std::span<const PartClass> parents);

// Adds an "other" parent column spreading mass uniformly over all child rows.
ConditionalPriorTable with_other_parent(const ConditionalPriorTable& table);

// Removes a child row and renormalizes every column.
ConditionalPriorTable ablate_hypothesis(const ConditionalPriorTable& table,
                                        std::string_view hypothesis);

}  // namespace partbelief
