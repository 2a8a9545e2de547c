#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rdflow/model.hpp"

namespace rdflow {

enum class TableFormat { delimited, json };

/// Parsed branch table, physical units (ohms, kW, kVAr, kVA).
struct RawTable {
    std::vector<BranchRecord> rows;
    std::string source_name;
    // Only JSON files carry these.
    std::optional<PerUnitBase> base;
    std::optional<NodeId> root;
};

/// Parses a branch table.
///
/// Delimited rows are `branch from to r x p q [cap]`, separated by commas or
/// whitespace. A trailing `*` on the branch number marks a tie line, whose load
/// columns may be omitted (a six-field tie row is `branch from to r x cap`).
/// Lines starting with `#` and blank lines are ignored, as is a leading header
/// row whose first field is `branch`.
///
/// Throws ParseError (with line number) on malformed fields and DataError on
/// duplicate ids, invalid values, or an empty table.
RawTable parse_branch_table(std::string_view text, TableFormat format,
                            std::string source_name = {});

/// Writes `table` in `format`; parse_branch_table reads it back unchanged.
std::string serialize_branch_table(const RawTable& table, TableFormat format);

/// Picks the format from the file extension (.json, anything else delimited) and parses.
RawTable read_branch_file(const std::string& path);

struct ValidateOptions {
    bool require_ordering = true;
};

/// Builds the per-unit radial model from the closed rows of `table`.
///
/// Nodes must be labelled 1..NB. Throws TopologyError for a cycle, a node with
/// two feeding branches, or a node not reached from the root; OrderingError
/// when `require_ordering` is set and some branch precedes its feeder.
NetworkModel validate_radial(const RawTable& table, NodeId root = 1,
                             const PerUnitBase& base = PerUnitBase{},
                             ValidateOptions options = {});

struct Renumbering {
    RawTable table;
    std::map<NodeId, NodeId> old_to_new;
    std::map<NodeId, NodeId> new_to_old;

    bool is_identity() const;
};

/// Relabels nodes and branches so that every branch follows its feeder.
///
/// Feeders are numbered main path first: from each start node the walk continues
/// into the lowest-labelled child, and the remaining children are queued, in
/// ascending label order, as starts of later laterals. The root becomes node 1
/// and each closed branch takes id (new receiving node - 1). Tie lines keep their
/// relative order and are numbered after the closed branches, with endpoints
/// relabelled. Throws TopologyError when the closed rows are not a tree.
Renumbering renumber_sequential(const RawTable& table, NodeId root = 1);

}  // namespace rdflow
