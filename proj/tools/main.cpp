#include "cascade/cli.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>

int main(int argc, char** argv) {
    CLI::App app{"flowcascade: streaming multi-stage network-attack detection"};
    app.require_subcommand(1);

    cascade::RunCommand run_cmd;
    std::uint64_t seed_value = 0;

    auto* run = app.add_subcommand("run", "run an experiment and write reports");
    run->add_option("--input", run_cmd.input_csv, "flow CSV input");
    run->add_option("--schema", run_cmd.schema_path, "schema file for the CSV input");
    run->add_option("--spec", run_cmd.spec_path, "synthetic stream spec");
    run->add_option("--out", run_cmd.out_dir, "output directory")->required();
    run->add_option("--config", run_cmd.config_path, "run configuration file");
    auto* run_seed = run->add_option("--seed", seed_value, "run seed (random when omitted)");
    run->add_option("--mode", run_cmd.mode, "worker mode: single or concurrent");

    std::string gen_spec, gen_out;
    auto* gen = app.add_subcommand("gen", "generate a synthetic flow CSV");
    gen->add_option("--spec", gen_spec, "synthetic stream spec")->required();
    gen->add_option("--out", gen_out, "output CSV path")->required();
    auto* gen_seed = gen->add_option("--seed", seed_value, "overrides the spec seed");

    std::string report_dir;
    auto* report = app.add_subcommand("report", "re-render a stored run");
    report->add_option("--out", report_dir, "run directory")->required();

    CLI11_PARSE(app, argc, argv);

    if (run->parsed()) {
        if (run_seed->count() > 0) run_cmd.seed = seed_value;
        return cascade::cmd_run(run_cmd, std::cout, std::cerr);
    }
    if (gen->parsed()) {
        std::optional<std::uint64_t> seed;
        if (gen_seed->count() > 0) seed = seed_value;
        return cascade::cmd_gen(gen_spec, gen_out, seed, std::cout, std::cerr);
    }
    return cascade::cmd_report(report_dir, std::cout, std::cerr);
}
