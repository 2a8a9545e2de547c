#include "rdflow/solver.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rdflow/errors.hpp"

namespace rdflow {

namespace {

void count(StepCounter* c, void (StepCounter::*phase)(std::uint64_t), std::uint64_t n = 1) {
    if (c != nullptr) {
        (c->*phase)(n);
    }
}

constexpr double polar_agreement_bound = 1e-10;

}  // namespace

LeafSet find_leaf_nodes(const NetworkModel& net, StepCounter* counter) {
    std::vector<bool> sends(net.node_count, false);
    for (const auto& b : net.branches) {
        sends[NetworkModel::slot(b.from)] = true;
    }
    count(counter, &StepCounter::leaf_scan, net.branch_count());

    LeafSet out;
    for (const auto& b : net.branches) {
        if (!sends[NetworkModel::slot(b.to)]) {
            out.leaves.push_back(b.to);
        }
    }
    count(counter, &StepCounter::leaf_scan, net.branch_count());
    std::sort(out.leaves.begin(), out.leaves.end());
    return out;
}

LeafLookup find_leaf(const LeafSet& leaves, NodeId node) {
    LeafLookup out;
    std::ptrdiff_t low = 0;
    std::ptrdiff_t high = static_cast<std::ptrdiff_t>(leaves.leaves.size()) - 1;
    while (low <= high) {
        const std::ptrdiff_t mid = low + (high - low) / 2;
        ++out.probes;
        const NodeId probe = leaves.leaves[static_cast<std::size_t>(mid)];
        if (probe > node) {
            high = mid - 1;
        } else if (probe < node) {
            low = mid + 1;
        } else {
            out.found = true;
            break;
        }
    }
    return out;
}

void compute_load_currents(SolveState& state, const NetworkModel& net, StepCounter* counter) {
    for (std::size_t k = 0; k < net.node_count; ++k) {
        const Phasor& load = net.node_load[k];
        if (load.is_zero() || k == NetworkModel::slot(net.root)) {
            state.load_current[k] = Phasor();
            continue;
        }
        const Phasor& v = state.node_voltage[k];
        if (v.is_zero()) {
            throw VoltageCollapseError("voltage collapsed to zero at loaded node " +
                                           std::to_string(k + 1),
                                       k + 1);
        }
        state.load_current[k] = load.conj() / v.conj();
    }
    count(counter, &StepCounter::current, net.node_count);
}

void backward_sweep(SolveState& state, const NetworkModel& net, const LeafSet& leaves,
                    ScanMode scan, StepCounter* counter) {
    const std::size_t ln = net.branch_count();
    std::vector<bool> computed(ln, false);
    std::vector<std::size_t> stack;
    stack.reserve(ln);

    for (std::size_t pos = ln; pos-- > 0;) {
        const auto& branch = net.branches[pos];
        const auto lookup = find_leaf(leaves, branch.to);
        count(counter, &StepCounter::current, static_cast<std::uint64_t>(lookup.probes));
        const Phasor& own_load = state.load_current[NetworkModel::slot(branch.to)];

        if (lookup.found) {
            state.branch_current[pos] = own_load;
            computed[pos] = true;
            count(counter, &StepCounter::current);
            continue;
        }

        stack.clear();
        if (scan == ScanMode::adjacency) {
            const auto& kids = net.children[NetworkModel::slot(branch.to)];
            stack.insert(stack.end(), kids.begin(), kids.end());
            count(counter, &StepCounter::current, kids.size());
        } else {
            for (std::size_t j = 0; j < ln; ++j) {
                if (net.branches[j].from == branch.to) {
                    stack.push_back(j);
                }
            }
            count(counter, &StepCounter::current, ln);
        }

        Phasor sum;
        while (!stack.empty()) {
            const std::size_t child = stack.back();
            stack.pop_back();
            if (!computed[child]) {
                throw InternalError("branch " + std::to_string(net.branches[child].id) +
                                    " is read before its current was computed; branch " +
                                    std::to_string(branch.id) + " is out of order");
            }
            sum += state.branch_current[child];
            count(counter, &StepCounter::current);
        }
        sum += own_load;
        count(counter, &StepCounter::current);
        state.branch_current[pos] = sum;
        computed[pos] = true;
    }
}

Phasor polar_voltage_drop(const Phasor& sending, const Phasor& current, const Phasor& impedance,
                          SweepScratch* scratch) {
    SweepScratch s;
    s.re_sum = current.re();
    s.im_sum = current.im();
    s.phi = std::atan2(s.im_sum, s.re_sum) + std::atan2(impedance.im(), impedance.re());

    const double vs = sending.magnitude();
    const double theta_s = std::atan2(sending.im(), sending.re());
    const double drop = current.magnitude() * impedance.magnitude();
    const double vr_sq = vs * vs + drop * drop - 2.0 * vs * drop * std::cos(theta_s - s.phi);
    const double theta_r = std::atan2(vs * std::sin(theta_s) - drop * std::sin(s.phi),
                                      vs * std::cos(theta_s) - drop * std::cos(s.phi));
    if (scratch != nullptr) {
        *scratch = s;
    }
    return Phasor::from_polar(std::sqrt(std::max(vr_sq, 0.0)), theta_r);
}

void forward_sweep(SolveState& state, const NetworkModel& net, StepCounter* counter,
                   PolarCheck* polar) {
    state.node_voltage[NetworkModel::slot(net.root)] = Phasor(1.0, 0.0);
    for (std::size_t pos = 0; pos < net.branch_count(); ++pos) {
        const auto& branch = net.branches[pos];
        const Phasor& vs = state.node_voltage[NetworkModel::slot(branch.from)];
        const Phasor& current = state.branch_current[pos];
        const Phasor vr = vs - current * branch.impedance;
        if (!vr.is_finite()) {
            throw NumericError("non-finite voltage at node " + std::to_string(branch.to) +
                               " (branch " + std::to_string(branch.id) + ")");
        }
        if (polar != nullptr) {
            const Phasor vp = polar_voltage_drop(vs, current, branch.impedance);
            const double mag_err = std::abs(vp.magnitude() - vr.magnitude());
            const double ang_err = std::abs(Phasor::wrap_angle(vp.angle() - vr.angle()));
            ++polar->evaluations;
            polar->max_magnitude_error = std::max(polar->max_magnitude_error, mag_err);
            polar->max_angle_error = std::max(polar->max_angle_error, ang_err);
            if (mag_err > polar_agreement_bound || ang_err > polar_agreement_bound) {
                throw InternalError("polar and rectangular voltage disagree on branch " +
                                    std::to_string(branch.id));
            }
        }
        state.node_voltage[NetworkModel::slot(branch.to)] = vr;
    }
    count(counter, &StepCounter::voltage, net.branch_count());
}

ConvergenceCheck check_convergence(SolveState& state, double tolerance, StepCounter* counter) {
    ConvergenceCheck out;
    for (std::size_t k = 0; k < state.node_voltage.size(); ++k) {
        const double mag = state.node_voltage[k].magnitude();
        const double delta = std::abs(mag - state.prev_voltage_mag[k]);
        out.max_delta = std::max(out.max_delta, delta);
        if (delta > tolerance) {
            ++out.nodes_above_tolerance;
        }
        state.prev_voltage_mag[k] = mag;
    }
    count(counter, &StepCounter::convergence, state.node_voltage.size());
    out.converged = out.nodes_above_tolerance == 0;
    return out;
}

LossSummary compute_losses(const SolveState& state, const NetworkModel& net) {
    LossSummary out;
    out.branches.reserve(net.branch_count());
    for (std::size_t pos = 0; pos < net.branch_count(); ++pos) {
        const double i_sq = state.branch_current[pos].magnitude_squared();
        const Phasor& z = net.branches[pos].impedance;
        BranchLoss loss;
        loss.p_pu = i_sq * z.re();
        loss.q_pu = i_sq * z.im();
        loss.p_kw = loss.p_pu * net.base.kva_base();
        loss.q_kvar = loss.q_pu * net.base.kva_base();
        out.total_pu += Phasor(loss.p_pu, loss.q_pu);
        out.total_p_kw += loss.p_kw;
        out.total_q_kvar += loss.q_kvar;
        out.branches.push_back(loss);
    }
    return out;
}

PowerBalance power_balance(const SolveState& state, const NetworkModel& net) {
    PowerBalance out;
    const std::size_t root = NetworkModel::slot(net.root);
    Phasor leaving;
    for (std::size_t pos : net.children[root]) {
        leaving += state.branch_current[pos];
    }
    out.root_injection = state.node_voltage[root] * leaving.conj();
    for (std::size_t k = 0; k < net.node_count; ++k) {
        out.delivered_load += state.node_voltage[k] * state.load_current[k].conj();
        out.nominal_load += net.node_load[k];
    }
    out.losses = compute_losses(state, net).total_pu;
    return out;
}

void finalize_report(SolveReport& report, const NetworkModel& net) {
    const SolveState& s = report.state;
    report.converged = true;
    report.node_voltages.clear();
    for (const auto& v : s.node_voltage) {
        report.node_voltages.push_back({v.magnitude(), rad_to_deg(v.angle())});
    }
    report.branch_current_pu.clear();
    for (const auto& i : s.branch_current) {
        report.branch_current_pu.push_back(i.magnitude());
    }
    auto losses = compute_losses(s, net);
    report.branch_losses = std::move(losses.branches);
    report.total_loss_pu = losses.total_pu;
    report.total_loss_p_kw = losses.total_p_kw;
    report.total_loss_q_kvar = losses.total_q_kvar;
    if (report.method == Method::proposed) {
        report.step_count_proposed = report.steps.total();
    } else {
        report.step_count_baseline = report.steps.total();
    }
}

SolveReport solve(const NetworkModel& net, const SolveOptions& options) {
    if (!(options.tolerance > 0.0) || options.max_iterations < 1) {
        throw DataError("tolerance must be positive and max_iterations at least 1");
    }
    if (!net.sequentially_ordered) {
        throw OrderingError("network branches are not sequentially ordered; renumber first");
    }

    SolveReport report;
    report.method = Method::proposed;
    StepCounter counter;
    report.state = SolveState::flat_start(net);
    counter.init(2 * net.node_count + net.branch_count());

    // Leaves depend only on topology, so they are found once for the whole solve.
    const LeafSet leaves = find_leaf_nodes(net, &counter);
    report.leaf_count = leaves.size();

    double last_delta = 0.0;
    for (int it = 1; it <= options.max_iterations; ++it) {
        const StepTally before = counter.tally();
        compute_load_currents(report.state, net, &counter);
        backward_sweep(report.state, net, leaves, options.scan, &counter);
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
    throw NonConvergenceError("no convergence after " + std::to_string(options.max_iterations) +
                                  " iterations (max delta " + std::to_string(last_delta) + " p.u.)",
                              options.max_iterations, last_delta);
}

StepPrediction step_model(std::uint64_t n, std::uint64_t m, std::uint64_t r) {
    if (n < 2 || m < 1 || m >= n || r < 1) {
        throw DataError("step model needs n >= 2, 1 <= m < n and r >= 1");
    }
    StepPrediction p;
    p.setup = 3 * n + n * n;
    p.proposed_per_iteration = n + n * m + n * (n - m) + n;
    p.baseline_per_iteration = n + n * n + n * n + n;
    p.proposed = p.setup + r * p.proposed_per_iteration;
    p.baseline = p.setup + r * p.baseline_per_iteration;
    return p;
}

}  // namespace rdflow
