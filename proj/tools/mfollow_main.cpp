// Batch experiment runner for the monotone-follower workbench: builds
// scenario trees, solves capped/uncapped tracking problems, emits
// first-order certificates and ladder/stopping tables. Offline use only;
// outputs are flat JSON/CSV artifacts. Worker count comes from the
// MFOLLOW_THREADS environment variable.

#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "mfollow/errors.hpp"
#include "mfollow/experiment.hpp"

namespace {

struct CommonArgs {
    std::string config_path;
    std::string out_dir = ".";
    std::uint64_t seed = 0;
    bool seed_set = false;
    bool waive = false;
    double tolerance = 1e-6;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool needs_config) {
    auto* opt = cmd->add_option("--config", args.config_path, "experiment config (JSON)");
    if (needs_config)
        opt->required();
    cmd->add_option("--out", args.out_dir, "output directory");
    cmd->add_option("--seed", args.seed, "seed override, recorded in the run manifest")
        ->each([&args](const std::string&) { args.seed_set = true; });
    cmd->add_flag("--waive-coercivity", args.waive,
                  "run the uncapped solver without a coercivity certificate");
    cmd->add_option("--tolerance", args.tolerance, "certificate / equivalence tolerance");
}

mfollow::RunSettings settings_from(const CommonArgs& args) {
    mfollow::RunSettings s;
    s.out_dir = args.out_dir;
    s.waive_coercivity = args.waive;
    s.tolerance = args.tolerance;
    if (args.seed_set)
        s.seed_override = args.seed;
    return s;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"mfollow: scenario-tree workbench for monotone-follower control problems"};
    app.require_subcommand(1);

    CommonArgs solve_args, ladder_args, stop_args, mz_args, repro_args;
    std::string repro_name;

    auto* solve_cmd = app.add_subcommand("solve", "solve the uncapped problem and certify");
    add_common(solve_cmd, solve_args, true);
    auto* ladder_cmd = app.add_subcommand("ladder", "run a cap ladder with convergence tables");
    add_common(ladder_cmd, ladder_args, true);
    auto* stop_cmd = app.add_subcommand("stop", "solve, certify and check the stopping equivalence");
    add_common(stop_cmd, stop_args, true);
    auto* mz_cmd = app.add_subcommand("mzdist", "pseudopath distance matrices for a ladder");
    add_common(mz_cmd, mz_args, true);
    auto* repro_cmd = app.add_subcommand("repro", "reproduce a worked example");
    repro_cmd
        ->add_option("name", repro_name,
                     "quadratic-terminal | exp-nonattain | ray-counterexample")
        ->required();
    add_common(repro_cmd, repro_args, false);

    CLI11_PARSE(app, argc, argv);

    try {
        if (solve_cmd->parsed())
            return mfollow::run_solve(mfollow::load_config(solve_args.config_path),
                                      settings_from(solve_args));
        if (ladder_cmd->parsed())
            return mfollow::run_ladder_experiment(mfollow::load_config(ladder_args.config_path),
                                                  settings_from(ladder_args));
        if (stop_cmd->parsed())
            return mfollow::run_stop(mfollow::load_config(stop_args.config_path),
                                     settings_from(stop_args));
        if (mz_cmd->parsed())
            return mfollow::run_mzdist(mfollow::load_config(mz_args.config_path),
                                       settings_from(mz_args));
        if (repro_cmd->parsed())
            return mfollow::run_repro(repro_name, settings_from(repro_args));
    } catch (const mfollow::config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return mfollow::kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
