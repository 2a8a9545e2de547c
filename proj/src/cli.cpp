#include "rdflow/cli.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <ostream>
#include <random>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ostream.h>
#include <json.hpp>

#include "rdflow/errors.hpp"
#include "rdflow/ingest.hpp"
#include "rdflow/oracle.hpp"
#include "rdflow/synthetic.hpp"

namespace rdflow::cli {

namespace {

struct Loaded {
    RawTable original;
    std::optional<Renumbering> renumbered;
    NetworkModel net;
    std::map<NodeId, BranchId> original_branch_into;  // original receiving node -> branch id

    NodeId label(std::size_t slot) const {
        const NodeId n = slot + 1;
        return renumbered ? renumbered->new_to_old.at(n) : n;
    }
    NodeId label_of(NodeId n) const { return renumbered ? renumbered->new_to_old.at(n) : n; }
    BranchId branch_label(const PerUnitBranch& b) const {
        return renumbered ? original_branch_into.at(label_of(b.to)) : b.id;
    }
};

Loaded load(const RunConfig& config, bool require_ordering) {
    Loaded l;
    l.original = read_branch_file(config.input_path);
    const NodeId root = config.root.value_or(l.original.root.value_or(1));
    const PerUnitBase file_base = l.original.base.value_or(PerUnitBase{});
    const PerUnitBase base(config.kv_base.value_or(file_base.kv_base()),
                           config.mva_base.value_or(file_base.mva_base()));
    for (const auto& r : l.original.rows) {
        if (!r.is_tie) {
            l.original_branch_into[r.receiving_node] = r.branch_id;
        }
    }
    if (config.renumber) {
        l.renumbered = renumber_sequential(l.original, root);
        l.net = validate_radial(l.renumbered->table, 1, base, {require_ordering});
    } else {
        l.net = validate_radial(l.original, root, base, {require_ordering});
    }
    return l;
}

SolveOptions solve_options(const RunConfig& c) {
    if (!(c.tolerance > 0.0)) {
        throw DataError("tolerance must be positive");
    }
    if (c.max_iterations < 1) {
        throw DataError("max-iter must be at least 1");
    }
    SolveOptions o;
    o.tolerance = c.tolerance;
    o.max_iterations = c.max_iterations;
    o.debug_polar = c.debug_polar;
    o.scan = c.scan;
    return o;
}

std::string fixed(double v, int places) {
    // Avoid printing "-0.00000".
    std::string s = fmt::format("{:.{}f}", v, places);
    if (s.front() == '-' && s.find_first_not_of("-0.") == std::string::npos) {
        s.erase(0, 1);
    }
    return s;
}

double displayed(double v, int places) { return std::stod(fixed(v, places)); }

struct NodeRow {
    NodeId node;
    double vmag;
    double angle_deg;
};

struct BranchRow {
    BranchId id;
    NodeId from;
    NodeId to;
    double current_pu;
    double loss_kw;
    double loss_kvar;
};

std::vector<NodeRow> node_rows(const Loaded& l, const SolveReport& r) {
    std::vector<NodeRow> rows;
    for (std::size_t k = 0; k < r.node_voltages.size(); ++k) {
        rows.push_back({l.label(k), r.node_voltages[k].magnitude_pu, r.node_voltages[k].angle_deg});
    }
    std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.node < b.node; });
    return rows;
}

std::vector<BranchRow> branch_rows(const Loaded& l, const SolveReport& r) {
    std::vector<BranchRow> rows;
    for (std::size_t pos = 0; pos < l.net.branch_count(); ++pos) {
        const auto& b = l.net.branches[pos];
        rows.push_back({l.branch_label(b), l.label_of(b.from), l.label_of(b.to),
                        r.branch_current_pu[pos], r.branch_losses[pos].p_kw,
                        r.branch_losses[pos].q_kvar});
    }
    std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
    return rows;
}

void write_solution(std::ostream& out, const RunConfig& c, const Loaded& l, const SolveReport& p,
                    const SolveReport& b) {
    const auto nodes = node_rows(l, p);
    const auto branches = branch_rows(l, p);
    switch (c.output) {
    case OutputFormat::table:
        fmt::print(out, "# nodes={} branches={} leaves={} iterations={} tolerance={}\n",
                   l.net.node_count, l.net.branch_count(), p.leaf_count, p.iterations, c.tolerance);
        out << "node vmag_pu angle_deg\n";
        for (const auto& n : nodes) {
            fmt::print(out, "{} {} {}\n", n.node, fixed(n.vmag, 5), fixed(n.angle_deg, 4));
        }
        out << "\nbranch from to current_pu loss_kw loss_kvar\n";
        for (const auto& r : branches) {
            fmt::print(out, "{} {} {} {} {} {}\n", r.id, r.from, r.to, fixed(r.current_pu, 6),
                       fixed(r.loss_kw, 4), fixed(r.loss_kvar, 4));
        }
        fmt::print(out, "\ntotal_loss_kw {}\ntotal_loss_kvar {}\n", fixed(p.total_loss_p_kw, 4),
                   fixed(p.total_loss_q_kvar, 4));
        fmt::print(out, "steps_proposed {}\nsteps_baseline {}\n", p.step_count_proposed,
                   b.step_count_baseline);
        if (c.debug_polar) {
            fmt::print(out, "polar_checks {}\npolar_max_magnitude_error {:.3e}\npolar_max_angle_error {:.3e}\n",
                       p.polar.evaluations, p.polar.max_magnitude_error, p.polar.max_angle_error);
        }
        break;
    case OutputFormat::csv:
        out << "node,vmag_pu,angle_deg\n";
        for (const auto& n : nodes) {
            fmt::print(out, "{},{},{}\n", n.node, fixed(n.vmag, 5), fixed(n.angle_deg, 4));
        }
        out << "\nbranch,from,to,current_pu,loss_kw,loss_kvar\n";
        for (const auto& r : branches) {
            fmt::print(out, "{},{},{},{},{},{}\n", r.id, r.from, r.to, fixed(r.current_pu, 6),
                       fixed(r.loss_kw, 4), fixed(r.loss_kvar, 4));
        }
        out << "\nkey,value\n";
        fmt::print(out, "iterations,{}\ntotal_loss_kw,{}\ntotal_loss_kvar,{}\nsteps_proposed,{}\nsteps_baseline,{}\n",
                   p.iterations, fixed(p.total_loss_p_kw, 4), fixed(p.total_loss_q_kvar, 4),
                   p.step_count_proposed, b.step_count_baseline);
        break;
    case OutputFormat::json: {
        nlohmann::ordered_json doc;
        doc["converged"] = p.converged;
        doc["iterations"] = p.iterations;
        doc["tolerance"] = c.tolerance;
        doc["node_count"] = l.net.node_count;
        doc["leaf_count"] = p.leaf_count;
        auto& jn = doc["nodes"] = nlohmann::ordered_json::array();
        for (const auto& n : nodes) {
            jn.push_back({{"node", n.node}, {"vmag_pu", n.vmag}, {"angle_deg", n.angle_deg}});
        }
        auto& jb = doc["branches"] = nlohmann::ordered_json::array();
        for (const auto& r : branches) {
            jb.push_back({{"branch", r.id},
                          {"from", r.from},
                          {"to", r.to},
                          {"current_pu", r.current_pu},
                          {"loss_kw", r.loss_kw},
                          {"loss_kvar", r.loss_kvar}});
        }
        doc["total_loss_kw"] = p.total_loss_p_kw;
        doc["total_loss_kvar"] = p.total_loss_q_kvar;
        doc["steps"] = {{"proposed", p.step_count_proposed}, {"baseline", b.step_count_baseline}};
        if (c.debug_polar) {
            doc["polar"] = {{"checks", p.polar.evaluations},
                            {"max_magnitude_error", p.polar.max_magnitude_error},
                            {"max_angle_error", p.polar.max_angle_error}};
        }
        out << doc.dump(2) << '\n';
        break;
    }
    }
}

std::string_view trim(std::string_view s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string_view::npos) {
        return {};
    }
    return s.substr(a, s.find_last_not_of(" \t\r") - a + 1);
}

}  // namespace

int guarded(std::ostream& err, const std::function<int()>& body) {
    try {
        return body();
    } catch (const ParseError& e) {
        fmt::print(err, "parse error: {}\n", e.what());
        return exit_parse;
    } catch (const DataError& e) {
        fmt::print(err, "data error: {}\n", e.what());
        return exit_parse;
    } catch (const OrderingError& e) {
        fmt::print(err, "ordering error: {} (try --renumber)\n", e.what());
        return exit_topology;
    } catch (const TopologyError& e) {
        fmt::print(err, "topology error: {}\n", e.what());
        return exit_topology;
    } catch (const NonConvergenceError& e) {
        fmt::print(err, "solver error: {} (max_delta={:.6g})\n", e.what(), e.max_delta());
        return exit_solver;
    } catch (const NumericError& e) {
        fmt::print(err, "solver error: {}\n", e.what());
        return exit_solver;
    } catch (const std::exception& e) {
        fmt::print(err, "internal error: {}\n", e.what());
        return exit_internal;
    }
}

int cmd_validate(const RunConfig& config, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const Loaded l = load(config, false);
        const LeafSet leaves = find_leaf_nodes(l.net);
        fmt::print(out, "NB={} LN={} ties={} leaves={} ordered={}\n", l.net.node_count,
                   l.net.branch_count(), l.net.tie_lines.size(), leaves.size(),
                   l.net.sequentially_ordered ? "yes" : "no");
        return exit_ok;
    });
}

int cmd_solve(const RunConfig& config, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const Loaded l = load(config, true);
        const SolveOptions opts = solve_options(config);
        const SolveReport proposed = solve(l.net, opts);
        const SolveReport baseline = oracle::baseline_solve(l.net, opts);
        write_solution(out, config, l, proposed, baseline);
        return exit_ok;
    });
}

std::vector<std::pair<NodeId, double>> read_golden_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open golden file '" + path + "'");
    }
    std::vector<std::pair<NodeId, double>> rows;
    std::string line;
    std::size_t line_no = 0;
    bool header = false;
    while (std::getline(in, line)) {
        ++line_no;
        const auto t = trim(line);
        if (t.empty() || t.front() == '#') {
            continue;
        }
        if (!header) {
            if (t != "node,vmag_pu") {
                throw ParseError(path + ": expected header 'node,vmag_pu'", line_no);
            }
            header = true;
            continue;
        }
        const auto comma = t.find(',');
        try {
            if (comma == std::string_view::npos) {
                throw std::invalid_argument("missing comma");
            }
            std::size_t used = 0;
            const std::string node_s(trim(t.substr(0, comma)));
            const std::string v_s(trim(t.substr(comma + 1)));
            const unsigned long node = std::stoul(node_s, &used);
            if (used != node_s.size() || node == 0) {
                throw std::invalid_argument("node");
            }
            const double v = std::stod(v_s, &used);
            if (used != v_s.size()) {
                throw std::invalid_argument("vmag");
            }
            rows.emplace_back(node, v);
        } catch (const std::logic_error&) {
            throw ParseError(path + ": malformed golden row '" + std::string(t) + "'", line_no);
        }
    }
    if (rows.empty()) {
        throw DataError("golden file '" + path + "' has no rows");
    }
    return rows;
}

int cmd_compare(const RunConfig& config, const CompareConfig& compare, std::ostream& out,
                std::ostream& err) {
    return guarded(err, [&] {
        const Loaded l = load(config, true);
        const SolveReport report = solve(l.net, solve_options(config));
        const auto golden = read_golden_csv(compare.golden_path);

        std::map<NodeId, double> computed;
        for (const auto& n : node_rows(l, report)) {
            computed[n.node] = displayed(n.vmag, 5);
        }
        std::set<NodeId> seen;
        for (const auto& [node, v] : golden) {
            if (!computed.count(node)) {
                throw DataError("golden node " + std::to_string(node) + " is not in the network");
            }
            if (!seen.insert(node).second) {
                throw DataError("golden node " + std::to_string(node) + " is listed twice");
            }
        }
        for (const auto& [node, v] : computed) {
            if (!seen.count(node)) {
                throw DataError("network node " + std::to_string(node) + " is missing from golden file");
            }
        }

        double max_dev = 0.0;
        NodeId worst = golden.front().first;
        std::vector<NodeId> failing;
        out << "node golden computed deviation\n";
        for (const auto& [node, g] : golden) {
            const double dev = std::abs(computed[node] - g);
            fmt::print(out, "{} {} {} {}\n", node, fixed(g, 5), fixed(computed[node], 5), fixed(dev, 5));
            if (dev > max_dev) {
                max_dev = dev;
                worst = node;
            }
            if (dev > compare.bound) {
                failing.push_back(node);
            }
        }
        fmt::print(out, "max_deviation {} at node {} (bound {})\n", fixed(max_dev, 5), worst, compare.bound);
        if (!failing.empty()) {
            std::string names;
            for (NodeId n : failing) {
                names += (names.empty() ? "" : ", ") + std::to_string(n);
            }
            fmt::print(err, "comparison failed: node(s) {} exceed bound {}\n", names, compare.bound);
            return static_cast<int>(exit_comparison);
        }
        return static_cast<int>(exit_ok);
    });
}

std::vector<BenchCell> run_bench(const BenchConfig& config) {
    std::vector<BenchCell> cells;
    SolveOptions literal;
    literal.scan = ScanMode::literal;
    for (std::size_t n : config.sizes) {
        if (n < 2) {
            throw DataError("bench sizes must be at least 2");
        }
        for (std::size_t fi = 0; fi < config.leaf_fractions.size(); ++fi) {
            const double f = config.leaf_fractions[fi];
            std::seed_seq seq{config.seed, static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(fi)};
            std::mt19937_64 rng(seq);
            BenchCell cell;
            cell.nodes = n;
            cell.leaf_fraction = f;
            cell.leaves = synthetic::leaves_for_fraction(n, f);
            const NetworkModel net = validate_radial(synthetic::random_feeder(n, cell.leaves, rng));
            const SolveReport p = solve(net, literal);
            const SolveReport b = oracle::baseline_solve(net, literal);
            cell.iterations = p.iterations;
            auto per_iteration = [](const SolveReport& r) {
                double sum = 0.0;
                for (const auto& h : r.history) {
                    sum += static_cast<double>(h.steps.total());
                }
                return sum / static_cast<double>(r.history.size());
            };
            cell.proposed_per_iteration = per_iteration(p);
            cell.baseline_per_iteration = per_iteration(b);
            cell.proposed_total = p.step_count_proposed;
            cell.baseline_total = b.step_count_baseline;
            cell.predicted = step_model(n, cell.leaves, static_cast<std::uint64_t>(p.iterations));
            cells.push_back(cell);
        }
    }
    std::sort(cells.begin(), cells.end(), [](const BenchCell& a, const BenchCell& b) {
        return std::tie(a.nodes, a.leaf_fraction) < std::tie(b.nodes, b.leaf_fraction);
    });
    return cells;
}

int cmd_bench(const BenchConfig& config, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const auto cells = run_bench(config);
        switch (config.output) {
        case OutputFormat::table:
        case OutputFormat::csv: {
            const char* sep = config.output == OutputFormat::csv ? "," : " ";
            out << fmt::format(
                "nodes{0}leaves{0}iterations{0}proposed_per_iter{0}model_proposed_per_iter{0}"
                "baseline_per_iter{0}model_baseline_per_iter{0}proposed_total{0}baseline_total{0}"
                "saving{0}model_saving\n",
                sep);
            for (const auto& c : cells) {
                out << fmt::format("{1}{0}{2}{0}{3}{0}{4:.1f}{0}{5}{0}{6:.1f}{0}{7}{0}{8}{0}{9}{0}{10:.4f}{0}{11:.4f}\n",
                                   sep, c.nodes, c.leaves, c.iterations, c.proposed_per_iteration,
                                   c.predicted.proposed_per_iteration, c.baseline_per_iteration,
                                   c.predicted.baseline_per_iteration, c.proposed_total,
                                   c.baseline_total, c.measured_saving(), c.predicted_saving());
            }
            break;
        }
        case OutputFormat::json: {
            nlohmann::ordered_json doc = nlohmann::ordered_json::array();
            for (const auto& c : cells) {
                doc.push_back({{"nodes", c.nodes},
                               {"leaves", c.leaves},
                               {"iterations", c.iterations},
                               {"proposed_per_iter", c.proposed_per_iteration},
                               {"model_proposed_per_iter", c.predicted.proposed_per_iteration},
                               {"baseline_per_iter", c.baseline_per_iteration},
                               {"model_baseline_per_iter", c.predicted.baseline_per_iteration},
                               {"proposed_total", c.proposed_total},
                               {"baseline_total", c.baseline_total},
                               {"model_proposed_total", c.predicted.proposed},
                               {"model_baseline_total", c.predicted.baseline},
                               {"saving", c.measured_saving()},
                               {"model_saving", c.predicted_saving()}});
            }
            out << doc.dump(2) << '\n';
            break;
        }
        }
        return exit_ok;
    });
}

}  // namespace rdflow::cli
