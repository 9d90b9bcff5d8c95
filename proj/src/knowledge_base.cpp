#include "partbelief/knowledge_base.hpp"

#include "partbelief/error.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

namespace partbelief {

using json = nlohmann::ordered_json;

std::string_view to_string(Level level) {
    switch (level) {
    case Level::object: return "object";
    case Level::part: return "part";
    case Level::joint: return "joint";
    case Level::sub_part: return "sub-part";
    }
    return "object";
}

std::optional<Level> parse_level(std::string_view text) {
    if (text == "object") return Level::object;
    if (text == "part") return Level::part;
    if (text == "joint") return Level::joint;
    if (text == "sub-part") return Level::sub_part;
    return std::nullopt;
}

int PartClass::count_of(std::string_view child) const {
    int total = 0;
    for (const auto& c : constituents)
        if (c.class_name == child) total += c.count;
    return total;
}

std::vector<std::string> JointClass::member_instances() const {
    std::vector<std::string> out;
    for (const auto& m : members)
        for (int k = 0; k < m.count; ++k) out.push_back(m.class_name);
    return out;
}

const PairAngle* JointClass::find_pair(std::size_t i, std::size_t j) const {
    for (const auto& p : pair_angles)
        if ((p.first == i && p.second == j) || (p.first == j && p.second == i))
            return &p;
    return nullptr;
}

const PartClass* ModelKB::find_object(std::string_view name) const {
    auto it = std::find_if(objects.begin(), objects.end(),
                           [&](const PartClass& p) { return p.name == name; });
    return it == objects.end() ? nullptr : &*it;
}

const JointClass* ModelKB::find_joint(std::string_view name) const {
    auto it = std::find_if(joints.begin(), joints.end(),
                           [&](const JointClass& j) { return j.name == name; });
    return it == joints.end() ? nullptr : &*it;
}

const HypothesisSet& ModelKB::hypothesis_set(std::string_view name) const {
    if (hypothesis_sets.empty())
        throw ValidationError("model has no hypothesis sets");
    if (name.empty()) return hypothesis_sets.front();
    for (const auto& s : hypothesis_sets)
        if (s.name == name) return s;
    throw ValidationError("unknown hypothesis set '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// Loading

namespace {

template <typename T>
T field(const json& node, const char* key, const std::string& where) {
    if (!node.is_object() || !node.contains(key))
        throw ParseError(where + ": missing field '" + key + "'");
    try {
        return node.at(key).get<T>();
    } catch (const json::exception&) {
        throw ParseError(where + ": field '" + key + "' has the wrong type");
    }
}

std::vector<Constituent> parse_constituents(const json& list, const std::string& where) {
    if (!list.is_array()) throw ParseError(where + ": expected an array");
    std::vector<Constituent> out;
    for (const auto& item : list) {
        Constituent c;
        c.class_name = field<std::string>(item, "class", where);
        c.count = field<int>(item, "count", where);
        out.push_back(std::move(c));
    }
    return out;
}

}  // namespace

ModelKB load_model_kb(std::string_view source) {
    json doc;
    try {
        doc = json::parse(source);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("model document: ") + e.what());
    }
    if (!doc.is_object()) throw ParseError("model document: top level must be an object");

    ModelKB kb;
    if (doc.contains("objects")) {
        if (!doc["objects"].is_array()) throw ParseError("objects: expected an array");
        for (const auto& o : doc["objects"]) {
            PartClass p;
            p.name = field<std::string>(o, "name", "object");
            const std::string where = "object '" + p.name + "'";
            p.constituents = o.contains("constituents")
                                 ? parse_constituents(o["constituents"], where)
                                 : std::vector<Constituent>{};
            if (o.contains("level")) {
                auto level = parse_level(field<std::string>(o, "level", where));
                if (!level) throw ParseError(where + ": unknown level");
                p.level = *level;
            }
            kb.objects.push_back(std::move(p));
        }
    }
    if (doc.contains("joints")) {
        if (!doc["joints"].is_array()) throw ParseError("joints: expected an array");
        for (const auto& j : doc["joints"]) {
            JointClass jc;
            jc.name = field<std::string>(j, "name", "joint");
            const std::string where = "joint '" + jc.name + "'";
            jc.members = parse_constituents(field<json>(j, "members", where), where);
            if (j.contains("pair_angles")) {
                for (const auto& pa : j["pair_angles"]) {
                    auto pair = field<std::vector<long long>>(pa, "pair", where);
                    if (pair.size() != 2 || pair[0] < 0 || pair[1] < 0)
                        throw ParseError(where + ": pair must be two member indices");
                    PairAngle angle;
                    angle.first = static_cast<std::size_t>(pair[0]);
                    angle.second = static_cast<std::size_t>(pair[1]);
                    angle.theta_deg = field<double>(pa, "theta_deg", where);
                    angle.tol_deg = field<double>(pa, "tol_deg", where);
                    jc.pair_angles.push_back(angle);
                }
            }
            kb.joints.push_back(std::move(jc));
        }
    }
    if (doc.contains("hypothesis_sets")) {
        const auto& sets = doc["hypothesis_sets"];
        if (!sets.is_object())
            throw ParseError("hypothesis_sets: expected an object of name -> class list");
        for (const auto& [name, members] : sets.items()) {
            HypothesisSet s;
            s.name = name;
            try {
                s.members = members.get<std::vector<std::string>>();
            } catch (const json::exception&) {
                throw ParseError("hypothesis set '" + name + "': expected a list of names");
            }
            kb.hypothesis_sets.push_back(std::move(s));
        }
    }
    if (doc.contains("gc_classes"))
        kb.gc_classes = field<std::vector<std::string>>(doc, "gc_classes", "model document");

    validate(kb);
    return kb;
}

ModelKB load_model_kb_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open model file " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return load_model_kb(buffer.str());
}

// ---------------------------------------------------------------------------
// Validation

namespace {

bool is_part_level(Level level) { return level != Level::joint; }

void check_acyclic(const ModelKB& kb) {
    enum class Mark { none, active, done };
    std::map<std::string, Mark> marks;

    auto visit = [&](auto&& self, const PartClass& p) -> void {
        marks[p.name] = Mark::active;
        for (const auto& c : p.constituents) {
            const PartClass* child = kb.find_object(c.class_name);
            if (!child) continue;  // joints are leaves of the composition graph
            Mark m = marks[child->name];
            if (m == Mark::active)
                throw ValidationError("composition cycle through class '" + child->name + "'");
            if (m == Mark::none) self(self, *child);
        }
        marks[p.name] = Mark::done;
    };
    for (const auto& p : kb.objects)
        if (marks[p.name] == Mark::none) visit(visit, p);
}

}  // namespace

void validate(ModelKB& kb) {
    if (kb.objects.empty() && kb.joints.empty()) throw ValidationError("no classes");

    std::set<std::string> names;
    auto claim = [&](const std::string& name) {
        if (name.empty()) throw ValidationError("class with empty name");
        if (name == kOther) throw ValidationError("class name 'other' is reserved");
        if (!names.insert(name).second)
            throw ValidationError("duplicate class name '" + name + "'");
    };
    for (const auto& p : kb.objects) claim(p.name);
    for (const auto& j : kb.joints) claim(j.name);
    std::set<std::string> gcs;
    for (const auto& g : kb.gc_classes) {
        claim(g);
        gcs.insert(g);
    }

    for (const auto& p : kb.objects) {
        for (const auto& c : p.constituents) {
            if (c.count < 1)
                throw ValidationError("class '" + p.name + "': count of '" + c.class_name +
                                      "' must be >= 1");
            const PartClass* child_part = kb.find_object(c.class_name);
            const JointClass* child_joint = kb.find_joint(c.class_name);
            if (!child_part && !child_joint)
                throw ValidationError("class '" + p.name + "' references unknown class '" +
                                      c.class_name + "'");
            // Layers alternate: part-level classes list joints, joint-level list parts.
            const bool child_is_part = child_part && is_part_level(child_part->level);
            if (is_part_level(p.level) == child_is_part)
                kb.warnings.push_back("class '" + p.name + "' (" +
                                      std::string(to_string(p.level)) + ") lists '" +
                                      c.class_name + "' on the same layer");
        }
    }
    check_acyclic(kb);

    for (const auto& j : kb.joints) {
        std::size_t instances = 0;
        for (const auto& m : j.members) {
            if (m.count < 1)
                throw ValidationError("joint '" + j.name + "': count of '" + m.class_name +
                                      "' must be >= 1");
            if (!gcs.empty() && !gcs.count(m.class_name))
                throw ValidationError("joint '" + j.name + "' references unknown GC class '" +
                                      m.class_name + "'");
            if (kb.find_object(m.class_name) || kb.find_joint(m.class_name))
                throw ValidationError("joint '" + j.name + "' member '" + m.class_name +
                                      "' names a part or joint class, expected a GC class");
            instances += static_cast<std::size_t>(m.count);
        }
        for (const auto& pa : j.pair_angles) {
            if (pa.first == pa.second)
                throw ValidationError("joint '" + j.name + "': pair angle needs two distinct members");
            if (pa.first >= instances || pa.second >= instances)
                throw ValidationError("joint '" + j.name + "': pair index out of range");
            if (!(pa.theta_deg >= 0.0 && pa.theta_deg <= 180.0))
                throw ValidationError("joint '" + j.name + "': theta_deg must lie in [0, 180]");
            if (!(pa.tol_deg > 0.0))
                throw ValidationError("joint '" + j.name + "': tol_deg must be > 0");
        }
        for (const auto& pa : j.pair_angles)
            if (j.find_pair(pa.first, pa.second) != &pa)
                throw ValidationError("joint '" + j.name + "': duplicate pair angle");
    }

    std::set<std::string> set_names;
    for (const auto& s : kb.hypothesis_sets) {
        if (!set_names.insert(s.name).second)
            throw ValidationError("duplicate hypothesis set '" + s.name + "'");
        if (s.members.empty())
            throw ValidationError("hypothesis set '" + s.name + "' is empty");
        std::set<std::string> seen;
        for (const auto& m : s.members) {
            if (!kb.find_object(m))
                throw ValidationError("hypothesis set '" + s.name + "' references unknown class '" +
                                      m + "'");
            if (!seen.insert(m).second)
                throw ValidationError("hypothesis set '" + s.name + "' lists '" + m + "' twice");
        }
    }
}

// ---------------------------------------------------------------------------
// Conditional prior tables

ConditionalPriorTable::ConditionalPriorTable(std::vector<std::string> parent_hypotheses,
                                             std::vector<std::string> child_hypotheses,
                                             std::vector<double> entries)
    : parents_(std::move(parent_hypotheses)),
      children_(std::move(child_hypotheses)),
      entries_(std::move(entries)) {
    if (entries_.size() != parents_.size() * children_.size())
        throw StructureError("conditional table has " + std::to_string(entries_.size()) +
                             " entries, expected " +
                             std::to_string(parents_.size() * children_.size()));
}

std::vector<double> ConditionalPriorTable::column(std::size_t parent) const {
    std::vector<double> out(rows());
    for (std::size_t r = 0; r < rows(); ++r) out[r] = (*this)(r, parent);
    return out;
}

std::optional<std::size_t> ConditionalPriorTable::child_index(std::string_view name) const {
    auto it = std::find(children_.begin(), children_.end(), name);
    if (it == children_.end()) return std::nullopt;
    return static_cast<std::size_t>(it - children_.begin());
}

std::optional<std::size_t> ConditionalPriorTable::parent_index(std::string_view name) const {
    auto it = std::find(parents_.begin(), parents_.end(), name);
    if (it == parents_.end()) return std::nullopt;
    return static_cast<std::size_t>(it - parents_.begin());
}

void ConditionalPriorTable::check_invariants() const {
    if (children_.empty() || children_.back() != kOther)
        throw ValidationError("conditional table: last child row must be 'other'");
    check_columns();
}

void ConditionalPriorTable::check_columns() const {
    for (std::size_t c = 0; c < cols(); ++c) {
        double sum = 0.0;
        for (std::size_t r = 0; r < rows(); ++r) {
            const double v = (*this)(r, c);
            if (!(v >= 0.0 && v <= 1.0))
                throw ValidationError("conditional table: entry outside [0, 1] in column '" +
                                      parents_[c] + "'");
            sum += v;
        }
        if (std::abs(sum - 1.0) > kColumnTolerance)
            throw ValidationError("conditional table: column '" + parents_[c] +
                                  "' does not sum to 1");
    }
}

ConditionalPriorTable ConditionalPriorTable::without_parent(std::string_view parent) const {
    auto idx = parent_index(parent);
    if (!idx) throw ValidationError("conditional table has no parent '" + std::string(parent) + "'");
    std::vector<std::string> parents;
    for (std::size_t c = 0; c < cols(); ++c)
        if (c != *idx) parents.push_back(parents_[c]);
    std::vector<double> entries;
    entries.reserve(rows() * parents.size());
    for (std::size_t r = 0; r < rows(); ++r)
        for (std::size_t c = 0; c < cols(); ++c)
            if (c != *idx) entries.push_back((*this)(r, c));
    return ConditionalPriorTable(std::move(parents), children_, std::move(entries));
}

std::vector<std::vector<double>> child_prior_weights(std::span<const std::string> child_hypotheses,
                                                     std::span<const PartClass> parents) {
    std::vector<std::vector<double>> weights;
    weights.reserve(child_hypotheses.size());
    for (const auto& h : child_hypotheses) {
        // chi(h, parent) * count(h, parent) collapses to count since chi = [count > 0].
        std::vector<double> counts;
        for (const auto& p : parents) counts.push_back(static_cast<double>(p.count_of(h)));
        const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
        std::vector<double> row(parents.size(), 0.0);
        for (std::size_t i = 0; i < parents.size(); ++i) {
            if (counts[i] == 0.0) continue;
            row[i] = counts[i] / (1.0 + (total - counts[i]));
        }
        weights.push_back(std::move(row));
    }
    return weights;
}

double other_weight(std::span<const std::string> child_hypotheses, const PartClass& parent) {
    if (child_hypotheses.empty()) return 1.0;
    double absent = 0.0;
    for (const auto& h : child_hypotheses)
        if (parent.count_of(h) == 0) absent += 1.0;
    return absent / static_cast<double>(child_hypotheses.size());
}

ConditionalPriorTable build_conditional_table(std::span<const std::string> child_hypotheses,
                                              std::span<const PartClass> parents) {
    if (parents.empty()) throw ValidationError("conditional table needs at least one parent");
    for (const auto& h : child_hypotheses)
        if (h == kOther)
            throw ValidationError("child hypotheses must not list 'other'; it is appended");

    const auto weights = child_prior_weights(child_hypotheses, parents);
    const std::size_t rows = child_hypotheses.size() + 1;
    const std::size_t cols = parents.size();
    std::vector<double> entries(rows * cols, 0.0);
    for (std::size_t c = 0; c < cols; ++c) {
        double sum = 0.0;
        for (std::size_t r = 0; r + 1 < rows; ++r) {
            entries[r * cols + c] = weights[r][c];
            sum += weights[r][c];
        }
        const double other = other_weight(child_hypotheses, parents[c]);
        entries[(rows - 1) * cols + c] = other;
        sum += other;
        if (!(sum > 0.0))
            throw ValidationError("degenerate prior column for parent '" + parents[c].name + "'");
        for (std::size_t r = 0; r < rows; ++r) entries[r * cols + c] /= sum;
    }

    std::vector<std::string> parent_names;
    for (const auto& p : parents) parent_names.push_back(p.name);
    std::vector<std::string> child_names(child_hypotheses.begin(), child_hypotheses.end());
    child_names.emplace_back(kOther);
    ConditionalPriorTable table(std::move(parent_names), std::move(child_names), std::move(entries));
    table.check_invariants();
    return table;
}

ConditionalPriorTable with_other_parent(const ConditionalPriorTable& table) {
    if (table.parent_index(kOther))
        throw ValidationError("conditional table already has an 'other' parent");
    auto parents = table.parent_hypotheses();
    parents.emplace_back(kOther);
    const std::size_t cols = parents.size();
    const double uniform = 1.0 / static_cast<double>(table.rows());
    std::vector<double> entries(table.rows() * cols);
    for (std::size_t r = 0; r < table.rows(); ++r) {
        for (std::size_t c = 0; c + 1 < cols; ++c) entries[r * cols + c] = table(r, c);
        entries[r * cols + cols - 1] = uniform;
    }
    return ConditionalPriorTable(std::move(parents), table.child_hypotheses(), std::move(entries));
}

ConditionalPriorTable ablate_hypothesis(const ConditionalPriorTable& table,
                                        std::string_view hypothesis) {
    if (hypothesis == kOther) throw ValidationError("cannot ablate the 'other' hypothesis");
    auto idx = table.child_index(hypothesis);
    if (!idx)
        throw ValidationError("no hypothesis '" + std::string(hypothesis) + "' to ablate");
    const bool has_other = table.child_hypotheses().back() == kOther;
    if (table.rows() <= (has_other ? 2u : 1u))
        throw ValidationError("cannot ablate '" + std::string(hypothesis) +
                              "': it is the last hypothesis besides 'other'");

    std::vector<std::string> children;
    for (std::size_t r = 0; r < table.rows(); ++r)
        if (r != *idx) children.push_back(table.child_hypotheses()[r]);
    const std::size_t rows = children.size();
    const std::size_t cols = table.cols();
    std::vector<double> entries(rows * cols);
    for (std::size_t c = 0; c < cols; ++c) {
        double sum = 0.0;
        for (std::size_t r = 0, out = 0; r < table.rows(); ++r) {
            if (r == *idx) continue;
            entries[out * cols + c] = table(r, c);
            sum += table(r, c);
            ++out;
        }
        if (sum > 0.0) {
            for (std::size_t r = 0; r < rows; ++r) entries[r * cols + c] /= sum;
        } else if (has_other) {
            // The ablated row held all of this column; nothing modeled remains.
            entries[(rows - 1) * cols + c] = 1.0;
        } else {
            throw ValidationError("ablating '" + std::string(hypothesis) +
                                  "' empties column '" + table.parent_hypotheses()[c] + "'");
        }
    }
    ConditionalPriorTable out(table.parent_hypotheses(), std::move(children), std::move(entries));
    out.check_columns();
    return out;
}

}  // namespace partbelief
