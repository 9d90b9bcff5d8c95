#pragma once

#include "partbelief/bayes_net.hpp"
#include "partbelief/view_geometry.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace partbelief {

enum ExitCode : int {
    kExitOk = 0,
    kExitInput = 1,
    kExitInconsistent = 2,
    kExitOracleMismatch = 3,
};

inline constexpr std::uint64_t kDefaultSeed = 20240917;

struct Ablation {
    std::string node;  // exact id, or a prefix selecting "<prefix>.*" too
    std::string hypothesis;
};

// Parses "NODE:HYP".
Ablation parse_ablation(const std::string& text);

struct RunConfig {
    std::filesystem::path kb;
    std::filesystem::path evidence;
    std::filesystem::path scenario;
    std::filesystem::path out;
    std::filesystem::path cache_dir;
    std::string hypothesis_set;
    std::vector<Ablation> ablations;
    int grid = kDefaultResolution;
    std::size_t bins = kDefaultBins;
    std::string prior = "uniform";
    std::optional<double> true_angle;
    std::size_t trials = 100;
    std::uint64_t seed = kDefaultSeed;
};

// Builds the net for a run: from `scenario`, or from `kb` + `evidence`.
// Ablations are applied before returning.
Net build_run_net(const RunConfig& config);

int cmd_infer(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_angle_table(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_quasi_report(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_kb_validate(const RunConfig& config, std::ostream& out, std::ostream& err);

// Marginals per node, in node order. The oracle check compares this against
// brute_force_joint; tests substitute a faulty one as a negative control.
using MarginalSolver = std::function<std::vector<std::vector<double>>(Net&)>;
std::vector<std::vector<double>> propagated_marginals(Net& net);

inline constexpr double kOracleTolerance = 1e-9;

int cmd_oracle_check(const RunConfig& config, std::ostream& out, std::ostream& err,
                     const MarginalSolver& solver = propagated_marginals);

}  // namespace partbelief
