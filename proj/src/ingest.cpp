#include "rdflow/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <deque>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "rdflow/errors.hpp"

namespace rdflow {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> fields;
    if (line.find(',') != std::string_view::npos) {
        std::size_t start = 0;
        while (true) {
            const auto comma = line.find(',', start);
            fields.push_back(trim(line.substr(start, comma - start)));
            if (comma == std::string_view::npos) {
                break;
            }
            start = comma + 1;
        }
        return fields;
    }
    std::size_t pos = 0;
    while (pos < line.size()) {
        pos = line.find_first_not_of(" \t\r", pos);
        if (pos == std::string_view::npos) {
            break;
        }
        auto end = line.find_first_of(" \t\r", pos);
        if (end == std::string_view::npos) {
            end = line.size();
        }
        fields.push_back(line.substr(pos, end - pos));
        pos = end;
    }
    return fields;
}

double parse_number(std::string_view field, const char* name, std::size_t line) {
    double value = 0.0;
    const auto* begin = field.data();
    const auto* end = field.data() + field.size();
    if (!field.empty() && *begin == '+') {
        ++begin;
    }
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (field.empty() || ec != std::errc{} || ptr != end) {
        throw ParseError(std::string("malformed ") + name + " '" + std::string(field) + "'", line);
    }
    if (!std::isfinite(value)) {
        throw ParseError(std::string(name) + " is not finite", line);
    }
    return value;
}

std::size_t parse_index(std::string_view field, const char* name, std::size_t line) {
    std::size_t value = 0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (field.empty() || ec != std::errc{} || ptr != field.data() + field.size() || value == 0) {
        throw ParseError(std::string("malformed ") + name + " '" + std::string(field) +
                             "' (expected a positive integer)",
                         line);
    }
    return value;
}

double optional_number(std::string_view field, const char* name, std::size_t line) {
    return field.empty() ? 0.0 : parse_number(field, name, line);
}

void check_record(const BranchRecord& r) {
    const auto id = std::to_string(r.branch_id);
    if (r.sending_node == r.receiving_node) {
        throw DataError("branch " + id + " connects node " + std::to_string(r.sending_node) +
                        " to itself");
    }
    if (r.resistance_ohm < 0.0 || r.reactance_ohm < 0.0) {
        throw DataError("branch " + id + " has negative impedance");
    }
    if (r.capacity_kva && !(*r.capacity_kva > 0.0)) {
        throw DataError("branch " + id + " has non-positive capacity");
    }
}

void finish_table(RawTable& table) {
    if (table.rows.empty()) {
        throw DataError("branch table " +
                        (table.source_name.empty() ? std::string() : "'" + table.source_name + "' ") +
                        "has no rows");
    }
    std::set<BranchId> seen;
    for (auto& r : table.rows) {
        if (!seen.insert(r.branch_id).second) {
            throw DataError("duplicate branch id " + std::to_string(r.branch_id));
        }
        if (r.is_tie) {
            r.load_p_kw = 0.0;
            r.load_q_kvar = 0.0;
        }
        check_record(r);
    }
}

RawTable parse_delimited(std::string_view text, std::string source_name) {
    RawTable table;
    table.source_name = std::move(source_name);
    std::size_t line_no = 0;
    std::size_t pos = 0;
    bool seen_data = false;
    while (pos <= text.size()) {
        auto nl = text.find('\n', pos);
        if (nl == std::string_view::npos) {
            nl = text.size();
        }
        const auto line = trim(text.substr(pos, nl - pos));
        pos = nl + 1;
        ++line_no;
        if (line.empty() || line.front() == '#') {
            continue;
        }
        const auto fields = split_fields(line);
        if (!seen_data && !fields.empty()) {
            std::string first(fields.front());
            std::transform(first.begin(), first.end(), first.begin(),
                           [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
            if (first == "branch") {
                seen_data = true;
                continue;
            }
        }
        seen_data = true;

        BranchRecord r;
        auto id_field = fields.front();
        if (!id_field.empty() && id_field.back() == '*') {
            r.is_tie = true;
            id_field.remove_suffix(1);
        }
        r.branch_id = parse_index(id_field, "branch number", line_no);

        const std::size_t n = fields.size();
        const bool closed_ok = n == 7 || n == 8;
        const bool tie_ok = r.is_tie && n >= 5 && n <= 8;
        if (!closed_ok && !tie_ok) {
            throw ParseError("expected 7 or 8 fields, found " + std::to_string(n), line_no);
        }
        r.sending_node = parse_index(fields[1], "sending node", line_no);
        r.receiving_node = parse_index(fields[2], "receiving node", line_no);
        r.resistance_ohm = parse_number(fields[3], "resistance", line_no);
        r.reactance_ohm = parse_number(fields[4], "reactance", line_no);
        std::string_view cap;
        if (n == 6) {
            cap = fields[5];
        } else if (n >= 7) {
            if (r.is_tie) {
                r.load_p_kw = optional_number(fields[5], "P load", line_no);
                r.load_q_kvar = optional_number(fields[6], "Q load", line_no);
            } else {
                r.load_p_kw = parse_number(fields[5], "P load", line_no);
                r.load_q_kvar = parse_number(fields[6], "Q load", line_no);
            }
            if (n == 8) {
                cap = fields[7];
            }
        }
        if (!cap.empty()) {
            r.capacity_kva = parse_number(cap, "capacity", line_no);
        }
        table.rows.push_back(r);
    }
    finish_table(table);
    return table;
}

RawTable parse_json(std::string_view text, std::string source_name) {
    using nlohmann::json;
    RawTable table;
    table.source_name = std::move(source_name);
    json doc;
    try {
        doc = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        throw ParseError(e.what(), 0);
    }
    try {
        if (doc.contains("base")) {
            const auto& b = doc.at("base");
            table.base = PerUnitBase(b.value("kv", PerUnitBase::default_kv),
                                     b.value("mva", PerUnitBase::default_mva));
        }
        if (doc.contains("root")) {
            table.root = doc.at("root").get<NodeId>();
        }
        for (const auto& b : doc.at("branches")) {
            BranchRecord r;
            r.branch_id = b.at("id").get<BranchId>();
            r.sending_node = b.at("from").get<NodeId>();
            r.receiving_node = b.at("to").get<NodeId>();
            r.resistance_ohm = b.at("r").get<double>();
            r.reactance_ohm = b.at("x").get<double>();
            r.is_tie = b.value("open", false);
            r.load_p_kw = r.is_tie ? b.value("p", 0.0) : b.at("p").get<double>();
            r.load_q_kvar = r.is_tie ? b.value("q", 0.0) : b.at("q").get<double>();
            if (b.contains("cap") && !b.at("cap").is_null()) {
                r.capacity_kva = b.at("cap").get<double>();
            }
            if (r.branch_id == 0 || r.sending_node == 0 || r.receiving_node == 0) {
                throw ParseError("branch, from and to must be positive integers", 0);
            }
            table.rows.push_back(r);
        }
    } catch (const json::exception& e) {
        throw ParseError(std::string("invalid network JSON: ") + e.what(), 0);
    }
    finish_table(table);
    return table;
}

std::string shortest(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

}  // namespace

RawTable parse_branch_table(std::string_view text, TableFormat format, std::string source_name) {
    return format == TableFormat::json ? parse_json(text, std::move(source_name))
                                       : parse_delimited(text, std::move(source_name));
}

std::string serialize_branch_table(const RawTable& table, TableFormat format) {
    if (format == TableFormat::json) {
        nlohmann::ordered_json doc;
        if (table.base) {
            doc["base"] = {{"kv", table.base->kv_base()}, {"mva", table.base->mva_base()}};
        }
        if (table.root) {
            doc["root"] = *table.root;
        }
        auto& rows = doc["branches"] = nlohmann::ordered_json::array();
        for (const auto& r : table.rows) {
            nlohmann::ordered_json b = {{"id", r.branch_id},     {"from", r.sending_node},
                                        {"to", r.receiving_node}, {"r", r.resistance_ohm},
                                        {"x", r.reactance_ohm},   {"p", r.load_p_kw},
                                        {"q", r.load_q_kvar}};
            b["cap"] = r.capacity_kva ? nlohmann::ordered_json(*r.capacity_kva)
                                      : nlohmann::ordered_json(nullptr);
            b["open"] = r.is_tie;
            rows.push_back(std::move(b));
        }
        return doc.dump(2) + "\n";
    }
    std::ostringstream out;
    out << "# branch from to r_ohm x_ohm p_kw q_kvar cap_kva\n";
    for (const auto& r : table.rows) {
        out << r.branch_id << (r.is_tie ? "*" : "") << ' ' << r.sending_node << ' '
            << r.receiving_node << ' ' << shortest(r.resistance_ohm) << ' '
            << shortest(r.reactance_ohm);
        if (r.is_tie) {
            if (r.capacity_kva) {
                out << ' ' << shortest(*r.capacity_kva);
            }
        } else {
            out << ' ' << shortest(r.load_p_kw) << ' ' << shortest(r.load_q_kvar);
            if (r.capacity_kva) {
                out << ' ' << shortest(*r.capacity_kva);
            }
        }
        out << '\n';
    }
    return out.str();
}

RawTable read_branch_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("cannot open '" + path + "'");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    const bool json = path.size() >= 5 && path.compare(path.size() - 5, 5, ".json") == 0;
    try {
        return parse_branch_table(buf.str(), json ? TableFormat::json : TableFormat::delimited, path);
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what(), 0);
    }
}

namespace {

/// Parent links of the closed rows, checked to be a tree hanging from `root`.
struct TreeShape {
    std::vector<NodeId> nodes;                          // ascending
    std::map<NodeId, std::size_t> parent_row;           // node -> row index into closed
    std::map<NodeId, std::vector<std::size_t>> child_rows;
    std::vector<const BranchRecord*> closed;
};

std::string edge_name(const BranchRecord& r) {
    return "branch " + std::to_string(r.branch_id) + " (" + std::to_string(r.sending_node) + "->" +
           std::to_string(r.receiving_node) + ")";
}

TreeShape analyze_tree(const RawTable& table, NodeId root) {
    TreeShape shape;
    std::set<NodeId> nodes{root};
    bool root_sends = false;
    for (const auto& r : table.rows) {
        if (r.is_tie) {
            continue;
        }
        const std::size_t idx = shape.closed.size();
        shape.closed.push_back(&r);
        nodes.insert(r.sending_node);
        nodes.insert(r.receiving_node);
        root_sends = root_sends || r.sending_node == root;
        auto [it, fresh] = shape.parent_row.emplace(r.receiving_node, idx);
        if (!fresh) {
            throw TopologyError("node " + std::to_string(r.receiving_node) +
                                " is fed by two closed branches: " +
                                edge_name(*shape.closed[it->second]) + " and " + edge_name(r));
        }
        shape.child_rows[r.sending_node].push_back(idx);
    }
    if (!root_sends) {
        throw TopologyError("root node " + std::to_string(root) + " feeds no closed branch");
    }
    shape.nodes.assign(nodes.begin(), nodes.end());

    // Every node has at most one parent, so following parent links either ends at a
    // parentless node or revisits a node on the current walk (a cycle).
    std::map<NodeId, int> state;  // 1 = on current walk, 2 = finished
    for (NodeId start : shape.nodes) {
        std::vector<NodeId> walk;
        NodeId n = start;
        while (state[n] != 2) {
            if (state[n] == 1) {
                throw TopologyError("cycle detected through " +
                                    edge_name(*shape.closed[shape.parent_row.at(n)]));
            }
            state[n] = 1;
            walk.push_back(n);
            auto p = shape.parent_row.find(n);
            if (p == shape.parent_row.end()) {
                break;
            }
            n = shape.closed[p->second]->sending_node;
        }
        for (NodeId w : walk) {
            state[w] = 2;
        }
    }
    if (auto p = shape.parent_row.find(root); p != shape.parent_row.end()) {
        throw TopologyError("root node " + std::to_string(root) + " is fed by " +
                            edge_name(*shape.closed[p->second]));
    }
    for (NodeId n : shape.nodes) {
        if (n != root && !shape.parent_row.count(n)) {
            throw TopologyError("node " + std::to_string(n) + " is disconnected from root " +
                                std::to_string(root));
        }
    }
    // No cycles, one parent each, root parentless: the walk up from any node ends
    // at a parentless node, which can only be the root. Hence connected.
    return shape;
}

}  // namespace

NetworkModel validate_radial(const RawTable& table, NodeId root, const PerUnitBase& base,
                             ValidateOptions options) {
    const TreeShape shape = analyze_tree(table, root);
    const std::size_t nb = shape.nodes.size();
    for (std::size_t k = 0; k < nb; ++k) {
        if (shape.nodes[k] != k + 1) {
            throw TopologyError("node labels must run 1.." + std::to_string(nb) + "; node " +
                                std::to_string(k + 1) + " is disconnected");
        }
    }

    NetworkModel net;
    net.node_count = nb;
    net.root = root;
    net.base = base;

    std::vector<const BranchRecord*> closed = shape.closed;
    std::sort(closed.begin(), closed.end(),
              [](const BranchRecord* a, const BranchRecord* b) { return a->branch_id < b->branch_id; });
    net.branches.reserve(closed.size());
    net.children.assign(nb, {});
    net.parent_branch.assign(nb, NetworkModel::no_parent);
    net.node_load.assign(nb, Phasor());
    for (const auto* r : closed) {
        const std::size_t pos = net.branches.size();
        net.branches.push_back(to_per_unit(*r, base));
        net.children[NetworkModel::slot(r->sending_node)].push_back(pos);
        net.parent_branch[NetworkModel::slot(r->receiving_node)] = pos;
        net.node_load[NetworkModel::slot(r->receiving_node)] = net.branches.back().load;
    }
    for (const auto& r : table.rows) {
        if (!r.is_tie) {
            continue;
        }
        to_per_unit(r, base);  // value checks only
        if (r.sending_node > nb || r.receiving_node > nb) {
            throw TopologyError("tie line " + edge_name(r) + " ends outside the network");
        }
        net.tie_lines.push_back(r);
    }

    net.sequentially_ordered = true;
    for (const auto& b : net.branches) {
        const std::size_t feeder = net.parent_branch[NetworkModel::slot(b.from)];
        if (feeder != NetworkModel::no_parent && net.branches[feeder].id > b.id) {
            net.sequentially_ordered = false;
            if (options.require_ordering) {
                throw OrderingError("branch " + std::to_string(b.id) + " precedes branch " +
                                    std::to_string(net.branches[feeder].id) +
                                    " which feeds its sending node " + std::to_string(b.from));
            }
        }
    }
    return net;
}

bool Renumbering::is_identity() const {
    return std::all_of(old_to_new.begin(), old_to_new.end(),
                       [](const auto& kv) { return kv.first == kv.second; });
}

Renumbering renumber_sequential(const RawTable& table, NodeId root) {
    const TreeShape shape = analyze_tree(table, root);

    auto sorted_children = [&](NodeId n) {
        std::vector<std::size_t> rows;
        if (auto it = shape.child_rows.find(n); it != shape.child_rows.end()) {
            rows = it->second;
        }
        std::sort(rows.begin(), rows.end(), [&](std::size_t a, std::size_t b) {
            return shape.closed[a]->receiving_node < shape.closed[b]->receiving_node;
        });
        return rows;
    };

    Renumbering out;
    std::vector<std::size_t> row_order;  // closed rows in new numbering order
    std::deque<std::size_t> pending;     // rows entering the start node of a queued lateral
    NodeId next = 1;
    out.old_to_new[root] = next++;
    auto take = [&](std::size_t row) {
        out.old_to_new[shape.closed[row]->receiving_node] = next++;
        row_order.push_back(row);
        return shape.closed[row]->receiving_node;
    };
    auto walk_from = [&](NodeId n) {
        for (auto kids = sorted_children(n); !kids.empty(); kids = sorted_children(n)) {
            pending.insert(pending.end(), kids.begin() + 1, kids.end());
            n = take(kids.front());
        }
    };
    walk_from(root);
    while (!pending.empty()) {
        const std::size_t row = pending.front();
        pending.pop_front();
        walk_from(take(row));
    }
    for (const auto& [o, n] : out.old_to_new) {
        out.new_to_old[n] = o;
    }

    out.table.source_name = table.source_name;
    out.table.base = table.base;
    out.table.root = table.root ? std::optional<NodeId>(1) : std::nullopt;
    for (std::size_t idx : row_order) {
        BranchRecord r = *shape.closed[idx];
        r.sending_node = out.old_to_new.at(r.sending_node);
        r.receiving_node = out.old_to_new.at(r.receiving_node);
        r.branch_id = r.receiving_node - 1;
        out.table.rows.push_back(r);
    }
    std::sort(out.table.rows.begin(), out.table.rows.end(),
              [](const BranchRecord& a, const BranchRecord& b) { return a.branch_id < b.branch_id; });
    BranchId next_id = out.table.rows.size() + 1;
    for (const auto& r : table.rows) {
        if (!r.is_tie) {
            continue;
        }
        auto from = out.old_to_new.find(r.sending_node);
        auto to = out.old_to_new.find(r.receiving_node);
        if (from == out.old_to_new.end() || to == out.old_to_new.end()) {
            throw TopologyError("tie line " + edge_name(r) + " ends outside the network");
        }
        BranchRecord t = r;
        t.sending_node = from->second;
        t.receiving_node = to->second;
        t.branch_id = next_id++;
        out.table.rows.push_back(t);
    }
    return out;
}

}  // namespace rdflow
