#pragma once

#include <vector>

#include "rdflow/model.hpp"
#include "rdflow/solver.hpp"

namespace rdflow::oracle {

/// For each branch position, the sorted labels of the nodes it feeds.
struct DownstreamSets {
    std::vector<std::vector<NodeId>> nodes;
};

/// Brute-force downstream sets: node k is fed through branch j iff IR(j) lies on
/// the path from k up to the root. Independent of branch ordering.
DownstreamSets downstream_sets(const NetworkModel& net);

/// Branch currents as plain sums of the load currents of each downstream set.
std::vector<Phasor> downstream_sum(const NetworkModel& net, const std::vector<Phasor>& load_currents);

/// Same sweep numerics as solve(), with the cost structure of a method that
/// re-identifies leaves and rebuilds every downstream set on each iteration:
/// an out-degree scan over all branches per node, then for each branch a
/// marking pass over all branches that accumulates downstream load currents.
SolveReport baseline_solve(const NetworkModel& net, const SolveOptions& options = {});

}  // namespace rdflow::oracle
