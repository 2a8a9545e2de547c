#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "rdflow/model.hpp"

namespace rdflow {

/// Nodes that feed no closed branch, ascending.
struct LeafSet {
    std::vector<NodeId> leaves;

    std::size_t size() const { return leaves.size(); }
};

/// How the backward sweep finds the branches leaving a non-leaf node.
enum class ScanMode {
    adjacency,  // precomputed children lists
    literal,    // scan every closed branch
};

struct SolveOptions {
    double tolerance = 1e-4;  // p.u. voltage magnitude
    int max_iterations = 100;
    bool debug_polar = false;
    ScanMode scan = ScanMode::adjacency;
};

/// Marks sending nodes in one pass over the branches and collects unmarked
/// receiving nodes in a second; one step per branch visited.
LeafSet find_leaf_nodes(const NetworkModel& net, StepCounter* counter = nullptr);

struct LeafLookup {
    bool found = false;
    int probes = 0;
};

/// Binary search of the sorted leaf list.
LeafLookup find_leaf(const LeafSet& leaves, NodeId node);
inline bool is_leaf(const LeafSet& leaves, NodeId node) { return find_leaf(leaves, node).found; }

/// LI_i = (PL_i - jQL_i) / conj(V_i); zero-load nodes get exactly zero.
/// Throws VoltageCollapseError for a loaded node at zero voltage.
void compute_load_currents(SolveState& state, const NetworkModel& net,
                           StepCounter* counter = nullptr);

/// Branch currents from the leaves up, in descending branch order. A leaf-fed
/// branch carries its node's load current; any other branch stacks the branches
/// leaving its receiving node, pops and adds their currents, then adds its own
/// node's load current. Throws InternalError if a child current is read before
/// it was computed (branch ordering violated).
void backward_sweep(SolveState& state, const NetworkModel& net, const LeafSet& leaves,
                    ScanMode scan = ScanMode::adjacency, StepCounter* counter = nullptr);

/// Working values of the polar voltage update for one branch.
struct SweepScratch {
    double phi = 0.0;     // current angle + impedance angle, rad
    double re_sum = 0.0;  // Re(I_br)
    double im_sum = 0.0;  // Im(I_br)
};

/// Receiving-end voltage from the polar (magnitude/angle) form of V_r = V_s - I*Z.
Phasor polar_voltage_drop(const Phasor& sending, const Phasor& current, const Phasor& impedance,
                          SweepScratch* scratch = nullptr);

/// V_r = V_s - I_br * Z_br in ascending branch order, root held at 1∠0. With a
/// non-null `polar`, also evaluates the polar form on every branch, records the
/// worst disagreement and throws InternalError above 1e-10.
void forward_sweep(SolveState& state, const NetworkModel& net, StepCounter* counter = nullptr,
                   PolarCheck* polar = nullptr);

struct ConvergenceCheck {
    bool converged = false;
    double max_delta = 0.0;
    std::size_t nodes_above_tolerance = 0;
};

/// Compares |V| against the previous iteration, node by node, then stores the
/// current magnitudes as the new previous ones.
ConvergenceCheck check_convergence(SolveState& state, double tolerance,
                                   StepCounter* counter = nullptr);

struct LossSummary {
    std::vector<BranchLoss> branches;
    Phasor total_pu;
    double total_p_kw = 0.0;
    double total_q_kvar = 0.0;
};

/// LP_j = |I_j|^2 R_j, LQ_j = |I_j|^2 X_j.
LossSummary compute_losses(const SolveState& state, const NetworkModel& net);

struct PowerBalance {
    Phasor root_injection;  // V_root * conj(sum of currents leaving the root)
    Phasor delivered_load;  // sum of V_k * conj(LI_k)
    Phasor nominal_load;    // sum of scheduled loads
    Phasor losses;

    /// root_injection - delivered_load - losses; zero when KCL and KVL hold.
    Phasor mismatch() const { return root_injection - delivered_load - losses; }
};

PowerBalance power_balance(const SolveState& state, const NetworkModel& net);

/// Flat start, one leaf scan, then load currents / backward sweep / forward sweep /
/// convergence check until every node moves by at most `tolerance`.
/// Throws NonConvergenceError after max_iterations, OrderingError on an
/// unordered network.
SolveReport solve(const NetworkModel& net, const SolveOptions& options = {});

/// Fills the report fields derived from a converged state.
void finalize_report(SolveReport& report, const NetworkModel& net);

struct StepPrediction {
    std::uint64_t proposed = 0;
    std::uint64_t baseline = 0;
    std::uint64_t proposed_per_iteration = 0;
    std::uint64_t baseline_per_iteration = 0;
    std::uint64_t setup = 0;
};

/// Closed-form step counts for n nodes, m leaves and r iterations:
///   proposed 3n + n^2 + r(n + nm + n(n-m) + n)
///   baseline 3n + n^2 + r(n + n^2 + n^2 + n)
/// Throws DataError unless n >= 2, 1 <= m < n and r >= 1.
StepPrediction step_model(std::uint64_t n, std::uint64_t m, std::uint64_t r);

}  // namespace rdflow
