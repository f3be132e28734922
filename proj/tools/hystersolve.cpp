#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "hystersolve/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Degenerate diffusion with Preisach hysteresis: simulation and estimate checks"};
    app.require_subcommand(1);

    hyst::CliOptions opts;
    std::string out_dir;
    app.add_flag("--force", opts.force, "run even if the initial data fail the compatibility check");
    app.add_option("--out-dir", out_dir, "output directory (overrides output.directory)");

    std::string config;
    auto* run = app.add_subcommand("run", "simulate and check the estimates");
    run->add_option("config", config, "configuration file")->required();

    int levels = 3;
    auto* refine = app.add_subcommand("refine", "time-step refinement study");
    refine->add_option("config", config, "configuration file")->required();
    refine->add_option("--levels", levels, "number of levels (>= 2)")->check(CLI::Range(2, 12));

    auto* compat = app.add_subcommand("check-compat", "initial compatibility report as JSON");
    compat->add_option("config", config, "configuration file")->required();

    std::string csv;
    std::vector<std::string> norms;
    auto* norm = app.add_subcommand("norms", "norms of sampled data");
    norm->add_option("csv", csv, "input CSV")->required();
    norm->add_option("--norm", norms, "luxemburg:power=P, luxemburg:philog, luxemburg:orlicz-log, luxemburg:exp, "
                                      "H, V, Vstar, X, Y")
        ->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : hyst::exit_code::config_failure;
    }
    if (!out_dir.empty()) opts.out_dir = out_dir;

    if (*run) return hyst::cmd_run(config, opts, std::cout, std::cerr);
    if (*refine) return hyst::cmd_refine(config, levels, opts, std::cout, std::cerr);
    if (*compat) return hyst::cmd_check_compat(config, std::cout, std::cerr);
    return hyst::cmd_norms(csv, norms, std::cout, std::cerr);
}
