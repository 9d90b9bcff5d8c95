// Command-line front end: inference runs, ablations, angle tables,
// quasi-invariant reports and oracle checks.

#include "partbelief/commands.hpp"

#include "CLI11.hpp"

#include <iostream>

using namespace partbelief;

int main(int argc, char** argv) {
    CLI::App app{"Hierarchical Bayesian part/joint recognition with viewpoint likelihoods"};
    app.require_subcommand(1);

    RunConfig config;
    std::vector<std::string> ablations;
    std::string kb, evidence, scenario, out, cache;

    auto add_output = [&](CLI::App* cmd) { cmd->add_option("--out", out, "Write the table to PATH"); };
    auto add_geometry = [&](CLI::App* cmd) {
        cmd->add_option("--grid", config.grid, "Latitude bands per hemisphere")->capture_default_str();
        cmd->add_option("--bins", config.bins, "Angle bins over [0, 180]")->capture_default_str();
        cmd->add_option("--prior", config.prior, "uniform | band:LO,HI (elevation, degrees)")
            ->capture_default_str();
    };

    auto* infer = app.add_subcommand("infer", "Propagate beliefs and print them as TSV");
    infer->add_option("--kb", kb, "Model KB (JSON)");
    infer->add_option("--evidence", evidence, "Evidence file (JSON)");
    infer->add_option("--scenario", scenario, "Explicit net (JSON) instead of --kb/--evidence");
    infer->add_option("--ablate", ablations, "Remove hypothesis HYP at NODE (NODE:HYP, repeatable)");
    infer->add_option("--hypothesis-set", config.hypothesis_set, "Root hypothesis set name");
    infer->add_option("--cache-dir", cache, "Directory for cached angle tables");
    add_geometry(infer);
    add_output(infer);

    auto* table = app.add_subcommand("angle-table", "Observed-angle likelihood table for a true angle");
    table->add_option("--true-angle", config.true_angle, "True angle between the axes, degrees")->required();
    add_geometry(table);
    add_output(table);

    auto* quasi = app.add_subcommand("quasi-report", "Projected-length and colinear-ratio checks");
    quasi->add_option("--grid", config.grid, "Latitude bands per hemisphere")->capture_default_str();
    quasi->add_option("--seed", config.seed, "Random seed")->capture_default_str();
    add_output(quasi);

    auto* oracle = app.add_subcommand("oracle-check", "Compare propagation against enumeration");
    oracle->add_option("--trials", config.trials, "Random forests to test")->capture_default_str();
    oracle->add_option("--seed", config.seed, "Random seed")->capture_default_str();
    add_output(oracle);

    auto* kb_cmd = app.add_subcommand("kb", "Model KB utilities");
    kb_cmd->require_subcommand(1);
    auto* validate = kb_cmd->add_subcommand("validate", "Load and validate a model KB");
    validate->add_option("--kb", kb, "Model KB (JSON)")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kExitInput;
    }

    config.kb = kb;
    config.evidence = evidence;
    config.scenario = scenario;
    config.out = out;
    config.cache_dir = cache;
    try {
        for (const auto& a : ablations) config.ablations.push_back(parse_ablation(a));
    } catch (const std::exception& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kExitInput;
    }

    if (*infer) return cmd_infer(config, std::cout, std::cerr);
    if (*table) return cmd_angle_table(config, std::cout, std::cerr);
    if (*quasi) return cmd_quasi_report(config, std::cout, std::cerr);
    if (*oracle) return cmd_oracle_check(config, std::cout, std::cerr);
    if (*validate) return cmd_kb_validate(config, std::cout, std::cerr);
    return kExitInput;
}
