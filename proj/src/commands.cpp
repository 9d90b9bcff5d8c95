#include "partbelief/commands.hpp"

#include "partbelief/angle_table_io.hpp"
#include "partbelief/error.hpp"
#include "partbelief/evidence.hpp"
#include "partbelief/random_forest.hpp"
#include "partbelief/scenario.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

namespace partbelief {

namespace {

std::string fixed(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    return buf;
}

std::string scientific(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
}

// Writes to config.out when set, otherwise to `out`.
void emit(const RunConfig& config, std::ostream& out, const std::string& text) {
    if (config.out.empty()) {
        out << text;
        return;
    }
    std::ofstream file(config.out, std::ios::binary);
    if (!file) throw ParseError("cannot write " + config.out.string());
    file << text;
}

bool selects(const std::string& selector, const std::string& id) {
    return id == selector || id.rfind(selector + ".", 0) == 0;
}

template <typename Body>
int guarded(std::ostream& err, Body&& body) {
    try {
        return body();
    } catch (const InconsistencyError& e) {
        err << "error: " << e.what() << '\n';
        return kExitInconsistent;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitInput;
    }
}

}  // namespace

Ablation parse_ablation(const std::string& text) {
    const auto colon = text.find(':');
    if (colon == std::string::npos || colon == 0 || colon + 1 == text.size())
        throw ValidationError("ablation '" + text + "' must look like NODE:HYPOTHESIS");
    return {text.substr(0, colon), text.substr(colon + 1)};
}

Net build_run_net(const RunConfig& config) {
    Net net;
    if (!config.scenario.empty()) {
        net = load_scenario_file(config.scenario);
    } else {
        if (config.kb.empty() || config.evidence.empty())
            throw ValidationError("infer needs --scenario, or both --kb and --evidence");
        const ModelKB kb = load_model_kb_file(config.kb);
        const EvidenceSet evidence = load_evidence_file(config.evidence);
        std::optional<std::filesystem::path> cache;
        if (!config.cache_dir.empty()) cache = config.cache_dir;
        AngleTableSource source(config.bins, ViewpointPrior::parse(config.prior), config.grid, cache);
        const JointTables tables = build_joint_tables(kb, source);
        net = std::move(generate_hypotheses(evidence, kb, tables, config.hypothesis_set).net);
    }
    for (const auto& a : config.ablations) {
        bool matched = false;
        for (std::size_t i = 0; i < net.size(); ++i) {
            const std::string id = net.node(i).id;
            if (!selects(a.node, id)) continue;
            net.ablate_node_hypothesis(id, a.hypothesis);
            matched = true;
        }
        if (!matched) throw ValidationError("ablation names unknown node '" + a.node + "'");
    }
    return net;
}

int cmd_infer(const RunConfig& config, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        Net net = build_run_net(config);
        net.propagate();
        std::ostringstream tsv;
        write_beliefs_tsv(tsv, net);
        emit(config, out, tsv.str());
        return kExitOk;
    });
}

int cmd_angle_table(const RunConfig& config, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        if (!config.true_angle) throw ValidationError("angle-table needs --true-angle");
        const double angle = *config.true_angle;
        if (!(angle > 0.0 && angle <= 180.0))
            throw ValidationError("--true-angle must lie in (0, 180]");
        if (config.bins < 2) throw ValidationError("--bins must be at least 2");
        const ViewpointPrior prior = ViewpointPrior::parse(config.prior);
        const SphereGrid grid = sphere_grid(config.grid);
        const AngleLikelihoodTable table =
            angle_likelihood_table(StandardPairConfig::from_actual(angle), config.bins, prior, grid);
        std::ostringstream tsv;
        write_angle_table_tsv(tsv, table, config.grid, prior.descriptor());
        emit(config, out, tsv.str());
        if (table.degenerate_mass > 0.0)
            err << "note: skipped degenerate viewpoint mass " << scientific(table.degenerate_mass) << '\n';
        return kExitOk;
    });
}

int cmd_quasi_report(const RunConfig& config, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const SphereGrid grid = sphere_grid(config.grid);
        std::ostringstream report;
        report << "t\tcomputed_fraction\tclosed_form\tabs_diff\n";
        for (double t : {0.1, 0.2, 0.3, 0.5}) {
            const double computed = projected_length_fraction(t, grid);
            const double closed = std::sqrt(1.0 - (1.0 - t) * (1.0 - t));
            report << fixed(t, 1) << '\t' << fixed(computed, 6) << '\t' << fixed(closed, 6) << '\t'
                   << fixed(std::abs(computed - closed), 6) << '\n';
        }

        std::mt19937_64 rng(config.seed);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        auto random_direction = [&] {
            const double z = 2.0 * unit(rng) - 1.0;
            const double phi = 2.0 * std::numbers::pi * unit(rng);
            const double r = std::sqrt(1.0 - z * z);
            return Vec3{r * std::cos(phi), r * std::sin(phi), z};
        };
        constexpr int kSamples = 10000;
        double worst = 0.0;
        int used = 0;
        while (used < kSamples) {
            const double ratio = std::exp(std::log(0.1) + unit(rng) * std::log(100.0));
            const Vec3 line = random_direction();
            try {
                const double seen = colinear_ratio_check(ratio * line, line, random_direction());
                worst = std::max(worst, std::abs(seen - ratio));
                ++used;
            } catch (const DegenerateViewpointError&) {
            }
        }
        report << "# colinear_ratio samples=" << used << " max_deviation=" << scientific(worst)
               << (worst <= 1e-12 ? " PASS" : " FAIL") << '\n';
        emit(config, out, report.str());
        return kExitOk;
    });
}

int cmd_kb_validate(const RunConfig& config, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        if (config.kb.empty()) throw ValidationError("kb validate needs --kb");
        const ModelKB kb = load_model_kb_file(config.kb);
        out << "objects=" << kb.objects.size() << " joints=" << kb.joints.size()
            << " hypothesis_sets=" << kb.hypothesis_sets.size() << '\n';
        for (const auto& w : kb.warnings) err << "warning: " << w << '\n';
        return kExitOk;
    });
}

std::vector<std::vector<double>> propagated_marginals(Net& net) {
    const BeliefState& state = net.propagate();
    std::vector<std::vector<double>> out;
    for (const auto& n : state.nodes) out.push_back(n.belief);
    return out;
}

int cmd_oracle_check(const RunConfig& config, std::ostream& out, std::ostream& err,
                     const MarginalSolver& solver) {
    return guarded(err, [&] {
        if (config.trials == 0) throw ValidationError("--trials must be at least 1");
        std::mt19937_64 rng(config.seed);
        double worst = 0.0;
        for (std::size_t trial = 0; trial < config.trials; ++trial) {
            Net net = random_forest(rng);
            const auto expected = brute_force_joint(net);
            const auto actual = solver(net);
            double diff = actual.size() == expected.size() ? 0.0 : 1.0;
            for (std::size_t i = 0; i < expected.size() && i < actual.size(); ++i) {
                if (actual[i].size() != expected[i].size()) {
                    diff = 1.0;
                    continue;
                }
                for (std::size_t r = 0; r < expected[i].size(); ++r)
                    diff = std::max(diff, std::abs(actual[i][r] - expected[i][r]));
            }
            worst = std::max(worst, diff);
            if (!(diff <= kOracleTolerance)) {
                err << "oracle mismatch in trial " << trial << ": max |diff| = " << scientific(diff)
                    << '\n';
                emit(config, out, dump_scenario(net));
                return kExitOracleMismatch;
            }
        }
        out << "trials=" << config.trials << " seed=" << config.seed
            << " max_abs_diff=" << scientific(worst) << " PASS\n";
        return kExitOk;
    });
}

}  // namespace partbelief
