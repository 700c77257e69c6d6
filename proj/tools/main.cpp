#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "qhd/runner.hpp"

int main(int argc, char** argv) {
    CLI::App app{"qhd - quantum hydrodynamics toolkit"};
    app.require_subcommand(1);

    std::string scenario_ref;
    std::vector<std::string> overrides;
    qhd::RunOptions opts;
    bool as_json = false;

    CLI::App* run = app.add_subcommand("run", "run a scenario (bundled id or JSON file)");
    run->add_option("scenario", scenario_ref, "bundled scenario id or path to a scenario file")
        ->required();
    run->add_option("--override", overrides, "dotted-path override, key=value (repeatable)");
    run->add_option("--out", opts.out_root, "output root directory (default $QHD_OUT_ROOT or ./runs)");
    run->add_option("--threads", opts.threads, "worker cap for check-level parallelism")
        ->check(CLI::PositiveNumber);
    run->add_flag("--json", as_json, "machine-readable summary");

    std::string filter;
    CLI::App* list = app.add_subcommand("list", "list bundled scenarios");
    list->add_option("filter", filter, "substring filter on scenario ids");
    list->add_flag("--json", as_json, "machine-readable output");

    std::string report_dir;
    CLI::App* report = app.add_subcommand("report", "summarize a run bundle");
    report->add_option("dir", report_dir, "bundle directory")->required();
    report->add_flag("--json", as_json, "machine-readable output");

    CLI11_PARSE(app, argc, argv);

    if (run->parsed()) {
        opts.json_output = as_json;
        return qhd::cmd_run(scenario_ref, overrides, opts, std::cout);
    }
    if (list->parsed()) return qhd::cmd_list(filter, as_json, std::cout);
    return qhd::cmd_report(report_dir, as_json, std::cout);
}
