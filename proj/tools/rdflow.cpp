// rdflow: load flow for radial distribution feeders.
//
//   rdflow validate <file>
//   rdflow solve <file> [--kv --mva --tol --max-iter --format --renumber --debug-polar]
//   rdflow compare <file> --golden <csv> [--bound]
//   rdflow bench --sizes ... --leaf-fractions ... --seed ...

#include <iostream>
#include <map>

#include <CLI11.hpp>

#include "rdflow/cli.hpp"

namespace {

void add_network_options(CLI::App* cmd, rdflow::cli::RunConfig& c) {
    cmd->add_option("file", c.input_path, "Branch table (.json for JSON, anything else delimited)")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--root", c.root, "Substation node (default: file value, else 1)");
    cmd->add_option("--kv", c.kv_base, "Base line voltage, kV (default 12.66)")->check(CLI::PositiveNumber);
    cmd->add_option("--mva", c.mva_base, "Base power, MVA (default 10)")->check(CLI::PositiveNumber);
    cmd->add_flag("--renumber", c.renumber, "Renumber nodes and branches into feeder order first");
}

void add_solve_options(CLI::App* cmd, rdflow::cli::RunConfig& c) {
    cmd->add_option("--tol", c.tolerance, "Convergence tolerance on |V|, p.u.")->check(CLI::PositiveNumber);
    cmd->add_option("--max-iter", c.max_iterations, "Iteration limit")->check(CLI::Range(1, 1000000));
    cmd->add_flag("--debug-polar", c.debug_polar, "Cross-check each voltage update in polar form");
    const std::map<std::string, rdflow::ScanMode> scans{{"adjacency", rdflow::ScanMode::adjacency},
                                                        {"literal", rdflow::ScanMode::literal}};
    cmd->add_option("--scan", c.scan, "Child-branch lookup: adjacency or literal")
        ->transform(CLI::CheckedTransformer(scans, CLI::ignore_case));
}

const std::map<std::string, rdflow::cli::OutputFormat> formats{
    {"table", rdflow::cli::OutputFormat::table},
    {"csv", rdflow::cli::OutputFormat::csv},
    {"json", rdflow::cli::OutputFormat::json}};

}  // namespace

int main(int argc, char** argv) {
    using namespace rdflow::cli;

    CLI::App app{"Load flow for radial distribution feeders"};
    app.require_subcommand(1);

    RunConfig validate_cfg;
    auto* validate = app.add_subcommand("validate", "Check that a branch table is a radial feeder");
    add_network_options(validate, validate_cfg);

    RunConfig solve_cfg;
    auto* solve = app.add_subcommand("solve", "Solve the load flow and print voltages and losses");
    add_network_options(solve, solve_cfg);
    add_solve_options(solve, solve_cfg);
    solve->add_option("--format", solve_cfg.output, "table, csv or json")
        ->transform(CLI::CheckedTransformer(formats, CLI::ignore_case));

    RunConfig compare_cfg;
    CompareConfig compare_opts;
    auto* compare = app.add_subcommand("compare", "Compare solved |V| with a golden node,vmag_pu CSV");
    add_network_options(compare, compare_cfg);
    add_solve_options(compare, compare_cfg);
    compare->add_option("--golden", compare_opts.golden_path, "Golden CSV")
        ->required()
        ->check(CLI::ExistingFile);
    compare->add_option("--bound", compare_opts.bound, "Largest accepted deviation, p.u.")
        ->check(CLI::NonNegativeNumber);

    BenchConfig bench_cfg;
    auto* bench = app.add_subcommand("bench", "Step counts of the stack sweep versus the rescanning baseline");
    bench->add_option("--sizes", bench_cfg.sizes, "Node counts")->check(CLI::Range(2, 100000));
    bench->add_option("--leaf-fractions", bench_cfg.leaf_fractions, "Leaf share of the nodes")
        ->check(CLI::Range(0.0, 1.0));
    bench->add_option("--seed", bench_cfg.seed, "RNG seed");
    bench->add_option("--format", bench_cfg.output, "table, csv or json")
        ->transform(CLI::CheckedTransformer(formats, CLI::ignore_case));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : exit_usage;
    }

    if (validate->parsed()) {
        return cmd_validate(validate_cfg, std::cout, std::cerr);
    }
    if (solve->parsed()) {
        return cmd_solve(solve_cfg, std::cout, std::cerr);
    }
    if (compare->parsed()) {
        return cmd_compare(compare_cfg, compare_opts, std::cout, std::cerr);
    }
    return cmd_bench(bench_cfg, std::cout, std::cerr);
}
