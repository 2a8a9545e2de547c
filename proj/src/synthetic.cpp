#include "rdflow/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "rdflow/errors.hpp"

namespace rdflow::synthetic {

namespace {

double uniform(std::mt19937_64& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

std::size_t pick(std::mt19937_64& rng, std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

}  // namespace

std::size_t leaves_for_fraction(std::size_t nodes, double fraction) {
    if (nodes < 2) {
        throw DataError("a feeder needs at least 2 nodes");
    }
    const auto m = static_cast<long long>(std::llround(fraction * static_cast<double>(nodes)));
    return static_cast<std::size_t>(std::clamp<long long>(m, 1, static_cast<long long>(nodes) - 1));
}

RawTable random_feeder(std::size_t nodes, std::size_t leaves, std::mt19937_64& rng) {
    if (nodes < 2 || leaves < 1 || leaves >= nodes) {
        throw DataError("random feeder needs nodes >= 2 and 1 <= leaves < nodes");
    }
    // Internal nodes 1..k form a skeleton whose childless nodes never outnumber
    // `leaves`; nodes k+1..n are the leaves, each hung from an internal node,
    // first covering every childless one.
    const std::size_t internal = nodes - leaves;
    std::vector<NodeId> parent(nodes + 1, 0);
    std::set<NodeId> childless{1};
    for (NodeId k = 2; k <= internal; ++k) {
        NodeId p;
        if (childless.size() < leaves) {
            p = 1 + pick(rng, k - 1);
        } else {
            auto it = childless.begin();
            std::advance(it, static_cast<std::ptrdiff_t>(pick(rng, childless.size())));
            p = *it;
        }
        parent[k] = p;
        childless.erase(p);
        childless.insert(k);
    }
    NodeId next = internal + 1;
    for (NodeId p : childless) {
        parent[next++] = p;
    }
    for (; next <= nodes; ++next) {
        parent[next] = 1 + pick(rng, internal);
    }

    const double scale = 20.0 / static_cast<double>(std::max<std::size_t>(nodes, 20));
    const double mean_kw = 2000.0 / static_cast<double>(nodes - 1);
    RawTable table;
    table.source_name = "synthetic";
    for (NodeId k = 2; k <= nodes; ++k) {
        BranchRecord r;
        r.branch_id = k - 1;
        r.sending_node = parent[k];
        r.receiving_node = k;
        r.resistance_ohm = uniform(rng, 0.05, 0.8) * scale;
        r.reactance_ohm = uniform(rng, 0.02, 0.4) * scale;
        r.load_p_kw = uniform(rng, 0.0, 2.0 * mean_kw);
        r.load_q_kvar = uniform(rng, 0.0, 0.75) * r.load_p_kw;
        table.rows.push_back(r);
    }
    return table;
}

RawTable shuffle_labels(const RawTable& table, NodeId root, std::mt19937_64& rng) {
    std::set<NodeId> labels;
    for (const auto& r : table.rows) {
        labels.insert(r.sending_node);
        labels.insert(r.receiving_node);
    }
    labels.erase(root);
    std::vector<NodeId> from(labels.begin(), labels.end());
    std::vector<NodeId> to = from;
    std::shuffle(to.begin(), to.end(), rng);
    std::map<NodeId, NodeId> relabel{{root, root}};
    for (std::size_t i = 0; i < from.size(); ++i) {
        relabel[from[i]] = to[i];
    }

    RawTable out = table;
    std::vector<BranchId> ids;
    for (const auto& r : out.rows) {
        ids.push_back(r.branch_id);
    }
    std::shuffle(ids.begin(), ids.end(), rng);
    for (std::size_t i = 0; i < out.rows.size(); ++i) {
        auto& r = out.rows[i];
        r.sending_node = relabel.at(r.sending_node);
        r.receiving_node = relabel.at(r.receiving_node);
        r.branch_id = ids[i];
    }
    std::shuffle(out.rows.begin(), out.rows.end(), rng);
    return out;
}

}  // namespace rdflow::synthetic
