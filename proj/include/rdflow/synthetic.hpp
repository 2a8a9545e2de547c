#pragma once

#include <cstdint>
#include <random>

#include "rdflow/ingest.hpp"

namespace rdflow::synthetic {

/// Random sequentially-numbered radial feeder with `nodes` nodes of which exactly
/// `leaves` feed nothing. Impedances shrink with size so that deep feeders keep a
/// sane voltage profile at the default base; total load is about 2 MW.
/// Requires nodes >= 2 and 1 <= leaves < nodes.
RawTable random_feeder(std::size_t nodes, std::size_t leaves, std::mt19937_64& rng);

/// Leaf count for a fractional share of the nodes, clamped to [1, nodes - 1].
std::size_t leaves_for_fraction(std::size_t nodes, double fraction);

/// Randomly relabels every node except `root` and shuffles branch ids and row order.
RawTable shuffle_labels(const RawTable& table, NodeId root, std::mt19937_64& rng);

}  // namespace rdflow::synthetic
