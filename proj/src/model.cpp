#include "rdflow/model.hpp"

#include <cmath>
#include <string>

#include "rdflow/errors.hpp"

namespace rdflow {

Phasor operator/(const Phasor& a, const Phasor& b) {
    const double den = b.magnitude_squared();
    if (den == 0.0) {
        throw SingularityError("division by a zero-magnitude phasor");
    }
    return {(a.re_ * b.re_ + a.im_ * b.im_) / den, (a.im_ * b.re_ - a.re_ * b.im_) / den};
}

PerUnitBase::PerUnitBase(double kv_base, double mva_base) : kv_(kv_base), mva_(mva_base) {
    if (!(std::isfinite(kv_base) && kv_base > 0.0)) {
        throw DataError("kV base must be positive, got " + std::to_string(kv_base));
    }
    if (!(std::isfinite(mva_base) && mva_base > 0.0)) {
        throw DataError("MVA base must be positive, got " + std::to_string(mva_base));
    }
}

namespace {

void require_non_negative(double value, const char* field, BranchId id) {
    if (!std::isfinite(value)) {
        throw DataError("branch " + std::to_string(id) + ": " + field + " is not finite");
    }
    if (value < 0.0) {
        throw DataError("branch " + std::to_string(id) + ": " + field + " is negative");
    }
}

}  // namespace

PerUnitBranch to_per_unit(const BranchRecord& record, const PerUnitBase& base) {
    require_non_negative(record.resistance_ohm, "resistance", record.branch_id);
    require_non_negative(record.reactance_ohm, "reactance", record.branch_id);
    PerUnitBranch out;
    out.id = record.branch_id;
    out.from = record.sending_node;
    out.to = record.receiving_node;
    out.impedance = Phasor(record.resistance_ohm, record.reactance_ohm) / base.z_base();
    if (!record.is_tie) {
        if (!std::isfinite(record.load_p_kw) || !std::isfinite(record.load_q_kvar)) {
            throw DataError("branch " + std::to_string(record.branch_id) + ": load is not finite");
        }
        out.load = Phasor(record.load_p_kw, record.load_q_kvar) / base.kva_base();
    }
    return out;
}

BranchRecord from_per_unit(const PerUnitBranch& branch, const PerUnitBase& base,
                           const BranchRecord& like) {
    BranchRecord out = like;
    out.resistance_ohm = branch.impedance.re() * base.z_base();
    out.reactance_ohm = branch.impedance.im() * base.z_base();
    out.load_p_kw = branch.load.re() * base.kva_base();
    out.load_q_kvar = branch.load.im() * base.kva_base();
    return out;
}

SolveState SolveState::flat_start(const NetworkModel& net) {
    SolveState s;
    s.node_voltage.assign(net.node_count, Phasor(1.0, 0.0));
    s.load_current.assign(net.node_count, Phasor());
    s.branch_current.assign(net.branch_count(), Phasor());
    s.prev_voltage_mag.assign(net.node_count, 1.0);
    return s;
}

StepTally StepTally::operator-(const StepTally& earlier) const {
    return {init - earlier.init, leaf_scan - earlier.leaf_scan, current - earlier.current,
            voltage - earlier.voltage, convergence - earlier.convergence};
}

}  // namespace rdflow
