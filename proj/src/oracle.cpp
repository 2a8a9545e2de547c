#include "rdflow/oracle.hpp"

#include <string>

#include "rdflow/errors.hpp"

namespace rdflow::oracle {

namespace {

std::vector<NodeId> parents_of(const NetworkModel& net) {
    std::vector<NodeId> parent(net.node_count, 0);
    for (const auto& b : net.branches) {
        parent[NetworkModel::slot(b.to)] = b.from;
    }
    return parent;
}

}  // namespace

DownstreamSets downstream_sets(const NetworkModel& net) {
    const auto parent = parents_of(net);
    DownstreamSets out;
    out.nodes.resize(net.branch_count());
    for (std::size_t pos = 0; pos < net.branch_count(); ++pos) {
        const NodeId head = net.branches[pos].to;
        for (NodeId k = 1; k <= net.node_count; ++k) {
            for (NodeId walk = k; walk != 0; walk = parent[NetworkModel::slot(walk)]) {
                if (walk == head) {
                    out.nodes[pos].push_back(k);
                    break;
                }
            }
        }
    }
    return out;
}

std::vector<Phasor> downstream_sum(const NetworkModel& net, const std::vector<Phasor>& load_currents) {
    const auto sets = downstream_sets(net);
    std::vector<Phasor> out(net.branch_count());
    for (std::size_t pos = 0; pos < net.branch_count(); ++pos) {
        for (NodeId k : sets.nodes[pos]) {
            out[pos] += load_currents[NetworkModel::slot(k)];
        }
    }
    return out;
}

namespace {

std::size_t rescan_leaves(const NetworkModel& net, StepCounter& counter) {
    std::size_t leaves = 0;
    for (NodeId k = 1; k <= net.node_count; ++k) {
        std::size_t out_degree = 0;
        for (const auto& b : net.branches) {
            out_degree += b.from == k ? 1 : 0;
        }
        counter.leaf_scan(net.branch_count());
        leaves += (out_degree == 0 && k != net.root) ? 1 : 0;
    }
    return leaves;
}

void rebuild_branch_currents(SolveState& state, const NetworkModel& net, StepCounter& counter) {
    const std::size_t ln = net.branch_count();
    std::vector<bool> marked(net.node_count);
    for (std::size_t pos = 0; pos < ln; ++pos) {
        std::fill(marked.begin(), marked.end(), false);
        marked[NetworkModel::slot(net.branches[pos].to)] = true;
        Phasor sum;
        for (std::size_t j = 0; j < ln; ++j) {
            const auto& b = net.branches[j];
            if (j == pos || (j > pos && marked[NetworkModel::slot(b.from)])) {
                marked[NetworkModel::slot(b.to)] = true;
                sum += state.load_current[NetworkModel::slot(b.to)];
            }
        }
        counter.current(ln);
        state.branch_current[pos] = sum;
    }
}

}  // namespace

SolveReport baseline_solve(const NetworkModel& net, const SolveOptions& options) {
    if (!(options.tolerance > 0.0) || options.max_iterations < 1) {
        throw DataError("tolerance must be positive and max_iterations at least 1");
    }
    if (!net.sequentially_ordered) {
        throw OrderingError("network branches are not sequentially ordered; renumber first");
    }

    SolveReport report;
    report.method = Method::baseline;
    StepCounter counter;
    report.state = SolveState::flat_start(net);
    counter.init(2 * net.node_count + net.branch_count());

    double last_delta = 0.0;
    for (int it = 1; it <= options.max_iterations; ++it) {
        const StepTally before = counter.tally();
        compute_load_currents(report.state, net, &counter);
        report.leaf_count = rescan_leaves(net, counter);
        rebuild_branch_currents(report.state, net, counter);
        forward_sweep(report.state, net, &counter, options.debug_polar ? &report.polar : nullptr);
        const auto check = check_convergence(report.state, options.tolerance, &counter);
        report.history.push_back(
            {it, check.max_delta, check.nodes_above_tolerance, counter.tally() - before});
        last_delta = check.max_delta;
        if (check.converged) {
            report.iterations = it;
            report.steps = counter.tally();
            finalize_report(report, net);
            return report;
        }
    }
    throw NonConvergenceError("baseline: no convergence after " +
                                  std::to_string(options.max_iterations) + " iterations",
                              options.max_iterations, last_delta);
}

}  // namespace rdflow::oracle
