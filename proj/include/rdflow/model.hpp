#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "rdflow/phasor.hpp"

namespace rdflow {

/// Node labels are 1-based, as in feeder data sheets.
using NodeId = std::size_t;
using BranchId = std::size_t;

/// One row of a feeder branch table, in physical units.
struct BranchRecord {
    BranchId branch_id = 0;
    NodeId sending_node = 0;
    NodeId receiving_node = 0;
    double resistance_ohm = 0.0;
    double reactance_ohm = 0.0;
    double load_p_kw = 0.0;    // at the receiving node
    double load_q_kvar = 0.0;  // at the receiving node
    std::optional<double> capacity_kva;
    bool is_tie = false;  // normally open; never energized

    friend bool operator==(const BranchRecord&, const BranchRecord&) = default;
};

class PerUnitBase {
public:
    static constexpr double default_kv = 12.66;
    static constexpr double default_mva = 10.0;

    PerUnitBase() : PerUnitBase(default_kv, default_mva) {}
    /// Throws DataError unless both bases are finite and positive.
    PerUnitBase(double kv_base, double mva_base);

    double kv_base() const { return kv_; }
    double mva_base() const { return mva_; }
    double z_base() const { return kv_ * kv_ / mva_; }
    double kva_base() const { return mva_ * 1000.0; }

    friend bool operator==(const PerUnitBase&, const PerUnitBase&) = default;

private:
    double kv_;
    double mva_;
};

/// A closed branch after per-unit conversion.
struct PerUnitBranch {
    BranchId id = 0;
    NodeId from = 0;
    NodeId to = 0;
    Phasor impedance;  // p.u.
    Phasor load;       // complex power drawn at `to`, p.u.
};

/// Converts impedance and receiving-end load to per-unit. Tie branches keep a
/// zero load. Throws DataError naming the branch on non-finite or negative input.
PerUnitBranch to_per_unit(const BranchRecord& record, const PerUnitBase& base);

/// Inverse of to_per_unit for the numeric fields; id, endpoints and tie flag are
/// taken from `like`.
BranchRecord from_per_unit(const PerUnitBranch& branch, const PerUnitBase& base,
                           const BranchRecord& like);

/// Validated radial feeder. Built by validate_radial; immutable afterwards.
struct NetworkModel {
    std::size_t node_count = 0;           // NB; nodes are labelled 1..NB
    NodeId root = 1;
    std::vector<PerUnitBranch> branches;  // closed branches, ascending id, LN = NB - 1
    std::vector<BranchRecord> tie_lines;
    std::vector<std::vector<std::size_t>> children;  // per node slot: outgoing branch positions
    std::vector<std::size_t> parent_branch;          // per node slot: incoming branch position
    std::vector<Phasor> node_load;                   // per node slot, p.u.
    PerUnitBase base;
    bool sequentially_ordered = false;

    std::size_t branch_count() const { return branches.size(); }
    static constexpr std::size_t slot(NodeId node) { return node - 1; }
    static constexpr std::size_t no_parent = static_cast<std::size_t>(-1);
};

/// Per-iteration working arrays of a sweep. Node arrays are indexed by
/// NetworkModel::slot(node); branch arrays by branch position.
struct SolveState {
    std::vector<Phasor> node_voltage;
    std::vector<Phasor> load_current;
    std::vector<Phasor> branch_current;
    std::vector<double> prev_voltage_mag;

    /// Flat start: every voltage 1.0∠0, every current zero.
    static SolveState flat_start(const NetworkModel& net);
};

/// Elementary-step tally, split by algorithm phase.
struct StepTally {
    std::uint64_t init = 0;
    std::uint64_t leaf_scan = 0;
    std::uint64_t current = 0;
    std::uint64_t voltage = 0;
    std::uint64_t convergence = 0;

    std::uint64_t total() const { return init + leaf_scan + current + voltage + convergence; }
    StepTally operator-(const StepTally& earlier) const;
    friend bool operator==(const StepTally&, const StepTally&) = default;
};

/// Monotone step counter. Solvers take it by pointer; a null counter disables counting.
class StepCounter {
public:
    void init(std::uint64_t n = 1) { tally_.init += n; }
    void leaf_scan(std::uint64_t n = 1) { tally_.leaf_scan += n; }
    void current(std::uint64_t n = 1) { tally_.current += n; }
    void voltage(std::uint64_t n = 1) { tally_.voltage += n; }
    void convergence(std::uint64_t n = 1) { tally_.convergence += n; }

    const StepTally& tally() const { return tally_; }
    std::uint64_t total() const { return tally_.total(); }

private:
    StepTally tally_;
};

enum class Method { proposed, baseline };

struct NodeVoltage {
    double magnitude_pu = 0.0;
    double angle_deg = 0.0;
};

struct BranchLoss {
    double p_pu = 0.0;
    double q_pu = 0.0;
    double p_kw = 0.0;
    double q_kvar = 0.0;
};

struct IterationRecord {
    int iteration = 0;
    double max_delta = 0.0;
    std::size_t nodes_above_tolerance = 0;
    StepTally steps;  // spent in this iteration only
};

struct PolarCheck {
    std::size_t evaluations = 0;
    double max_magnitude_error = 0.0;
    double max_angle_error = 0.0;
};

struct SolveReport {
    Method method = Method::proposed;
    bool converged = false;
    int iterations = 0;
    std::vector<NodeVoltage> node_voltages;  // per node slot
    std::vector<double> branch_current_pu;   // per branch position, magnitude
    std::vector<BranchLoss> branch_losses;   // per branch position
    double total_loss_p_kw = 0.0;
    double total_loss_q_kvar = 0.0;
    Phasor total_loss_pu;
    std::size_t leaf_count = 0;
    std::uint64_t step_count_proposed = 0;
    std::uint64_t step_count_baseline = 0;
    StepTally steps;
    std::vector<IterationRecord> history;
    PolarCheck polar;  // populated when debug_polar is on
    SolveState state;  // final arrays, for inspection
};

}  // namespace rdflow
