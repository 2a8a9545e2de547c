#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "rdflow/model.hpp"
#include "rdflow/solver.hpp"

namespace rdflow::cli {

enum ExitCode : int {
    exit_ok = 0,
    exit_usage = 1,
    exit_parse = 2,        // unreadable file, malformed or inconsistent data
    exit_topology = 3,     // not a radial tree, or out of order
    exit_solver = 4,       // non-convergence, voltage collapse, numeric failure
    exit_comparison = 5,   // golden comparison outside the bound
    exit_internal = 6,
};

enum class OutputFormat { table, csv, json };

struct RunConfig {
    std::string input_path;
    std::optional<NodeId> root;  // default: file's root, else 1
    std::optional<double> kv_base;
    std::optional<double> mva_base;
    double tolerance = 1e-4;
    int max_iterations = 100;
    OutputFormat output = OutputFormat::table;
    bool debug_polar = false;
    bool renumber = false;
    ScanMode scan = ScanMode::adjacency;
};

struct CompareConfig {
    std::string golden_path;
    double bound = 1e-3;
};

struct BenchConfig {
    std::vector<std::size_t> sizes{2, 33, 69, 120};
    std::vector<double> leaf_fractions{0.1, 0.25, 0.5};
    std::uint64_t seed = 1;
    OutputFormat output = OutputFormat::table;
};

int cmd_validate(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_solve(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_compare(const RunConfig& config, const CompareConfig& compare, std::ostream& out,
                std::ostream& err);
int cmd_bench(const BenchConfig& config, std::ostream& out, std::ostream& err);

/// Runs `body`, mapping library exceptions to exit codes with a message on `err`.
int guarded(std::ostream& err, const std::function<int()>& body);

/// One (size, leaf fraction) cell of a benchmark run, in literal-scan counting.
struct BenchCell {
    std::size_t nodes = 0;
    std::size_t leaves = 0;
    double leaf_fraction = 0.0;
    int iterations = 0;
    double proposed_per_iteration = 0.0;  // measured, averaged over iterations
    double baseline_per_iteration = 0.0;
    StepPrediction predicted;
    std::uint64_t proposed_total = 0;
    std::uint64_t baseline_total = 0;

    double measured_saving() const { return baseline_per_iteration / proposed_per_iteration; }
    double predicted_saving() const {
        return static_cast<double>(predicted.baseline_per_iteration) /
               static_cast<double>(predicted.proposed_per_iteration);
    }
};

std::vector<BenchCell> run_bench(const BenchConfig& config);

/// Golden CSV `node,vmag_pu`.
std::vector<std::pair<NodeId, double>> read_golden_csv(const std::string& path);

}  // namespace rdflow::cli
