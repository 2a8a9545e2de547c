#include <doctest.h>

#include <random>
#include <set>

#include "helpers.hpp"
#include "rdflow/errors.hpp"
#include "rdflow/ingest.hpp"
#include "rdflow/synthetic.hpp"

using namespace rdflow;
using rdflow::test::table_of;

namespace {

const BranchRecord& row(const RawTable& t, BranchId id) {
    for (const auto& r : t.rows) {
        if (r.branch_id == id) {
            return r;
        }
    }
    throw std::out_of_range("no branch " + std::to_string(id));
}

}  // namespace

TEST_CASE("parse closed and tie rows") {
    const auto t = parse_branch_table("5 5 6 0.3660 0.1864 2.60 2.20 1899\n69* 11 43 0.5000 0.5000 566\n",
                                      TableFormat::delimited);
    REQUIRE(t.rows.size() == 2);
    CHECK(t.rows[0] == BranchRecord{5, 5, 6, 0.3660, 0.1864, 2.60, 2.20, 1899.0, false});
    CHECK(t.rows[1] == BranchRecord{69, 11, 43, 0.5, 0.5, 0.0, 0.0, 566.0, true});
}

TEST_CASE("comma separated rows with blank tie loads and a header") {
    const auto t = parse_branch_table(
        "branch,from,to,r_ohm,x_ohm,p_kw,q_kvar,cap_kva\n"
        "# comment\n"
        "\n"
        "1,1,2,0.0005,0.0012,0.0,0.0,10761\n"
        "2,2,3,0.1,0.2,10,5\n"
        "69*,11,43,0.5,0.5,,,566\n",
        TableFormat::delimited);
    REQUIRE(t.rows.size() == 3);
    CHECK(t.rows[0].capacity_kva == 10761.0);
    CHECK_FALSE(t.rows[1].capacity_kva.has_value());
    CHECK(t.rows[2].is_tie);
    CHECK(t.rows[2].load_p_kw == 0.0);
    CHECK(t.rows[2].capacity_kva == 566.0);
}

TEST_CASE("parse errors carry line numbers") {
    CHECK_THROWS_WITH_AS(parse_branch_table("1 1 2 0.1 0.1 1 1\n2 2 3 0.1 abc 1 1\n", TableFormat::delimited),
                         doctest::Contains("line 2"), ParseError);
    CHECK_THROWS_WITH_AS(parse_branch_table("# x\n1 1 2 0.1 0.1 1\n", TableFormat::delimited),
                         doctest::Contains("line 2"), ParseError);
    CHECK_THROWS_AS(parse_branch_table("1 1 2 0.1 0.1 , 1\n", TableFormat::delimited), ParseError);
    CHECK_THROWS_AS(parse_branch_table("0 1 2 0.1 0.1 1 1\n", TableFormat::delimited), ParseError);
    CHECK_THROWS_AS(parse_branch_table("1 1 2 0.1 0.1 1 1 9 9\n", TableFormat::delimited), ParseError);
    CHECK_THROWS_AS(parse_branch_table("{\"branches\": [", TableFormat::json), ParseError);
    CHECK_THROWS_AS(parse_branch_table("{\"branches\": [{\"id\": 1}]}", TableFormat::json), ParseError);
}

TEST_CASE("data errors") {
    CHECK_THROWS_AS(parse_branch_table("", TableFormat::delimited), DataError);
    CHECK_THROWS_AS(parse_branch_table("# only comments\n\n", TableFormat::delimited), DataError);
    CHECK_THROWS_WITH_AS(parse_branch_table("1 1 2 0.1 0.1 1 1\n1 2 3 0.1 0.1 1 1\n", TableFormat::delimited),
                         doctest::Contains("duplicate branch id 1"), DataError);
    CHECK_THROWS_AS(parse_branch_table("1 1 1 0.1 0.1 1 1\n", TableFormat::delimited), DataError);
    CHECK_THROWS_AS(parse_branch_table("1 1 2 -0.1 0.1 1 1\n", TableFormat::delimited), DataError);
    CHECK_THROWS_AS(parse_branch_table("1 1 2 0.1 0.1 1 1 0\n", TableFormat::delimited), DataError);
    CHECK_THROWS_AS(parse_branch_table("{\"branches\": []}", TableFormat::json), DataError);
}

TEST_CASE("json network file") {
    const auto t = parse_branch_table(R"({
        "base": {"kv": 11.0, "mva": 5},
        "root": 1,
        "branches": [
            {"id": 1, "from": 1, "to": 2, "r": 0.1, "x": 0.2, "p": 10, "q": 5, "cap": 400, "open": false},
            {"id": 2, "from": 2, "to": 1, "r": 0.3, "x": 0.3, "open": true}
        ]})",
                                      TableFormat::json);
    REQUIRE(t.base.has_value());
    CHECK(t.base->kv_base() == 11.0);
    CHECK(t.base->mva_base() == 5.0);
    CHECK(t.root == NodeId{1});
    CHECK(t.rows[0] == BranchRecord{1, 1, 2, 0.1, 0.2, 10, 5, 400.0, false});
    CHECK(t.rows[1].is_tie);
    CHECK_FALSE(t.rows[1].capacity_kva.has_value());
}

TEST_CASE("parse, serialize, parse is a fixed point") {
    std::mt19937_64 rng(3);
    auto tables = std::vector<RawTable>{rdflow::test::fixture_table("ieee69.dat"),
                                        rdflow::test::fixture_table("ieee33.dat")};
    for (int i = 0; i < 20; ++i) {
        auto t = synthetic::random_feeder(2 + i * 5, 1 + i, rng);
        t.base = PerUnitBase(11.0 + i, 1.0 + i);
        t.root = 1;
        tables.push_back(std::move(t));
    }
    for (const auto& t : tables) {
        for (auto fmt : {TableFormat::delimited, TableFormat::json}) {
            const auto once = parse_branch_table(serialize_branch_table(t, fmt), fmt);
            const auto twice = parse_branch_table(serialize_branch_table(once, fmt), fmt);
            CHECK(once.rows == t.rows);
            CHECK(twice.rows == once.rows);
            if (fmt == TableFormat::json) {
                CHECK(once.base == t.base);
                CHECK(once.root == t.root);
            }
        }
    }
}

TEST_CASE("bundled feeder files") {
    const auto t69 = rdflow::test::fixture_table("ieee69.dat");
    CHECK(t69.rows.size() == 73);
    CHECK(row(t69, 5) == BranchRecord{5, 5, 6, 0.3660, 0.1864, 2.60, 2.20, 1899.0, false});
    CHECK(row(t69, 17) == BranchRecord{17, 17, 18, 0.0047, 0.0016, 60.0, 35.0, 2200.0, false});
    CHECK(row(t69, 60) == BranchRecord{60, 60, 61, 0.5075, 0.2585, 1244.0, 888.0, 1899.0, false});
    CHECK(row(t69, 69) == BranchRecord{69, 11, 43, 0.5, 0.5, 0.0, 0.0, 566.0, true});

    const auto n69 = validate_radial(t69);
    CHECK(n69.node_count == 69);
    CHECK(n69.branch_count() == 68);
    CHECK(n69.tie_lines.size() == 5);
    CHECK(n69.sequentially_ordered);

    const auto n33 = rdflow::test::fixture("ieee33.dat");
    CHECK(n33.node_count == 33);
    CHECK(n33.branch_count() == 32);
    CHECK(n33.tie_lines.empty());

    // The JSON copy carries the base and must describe the same network.
    const auto j69 = rdflow::test::fixture_table("ieee69.json");
    CHECK(j69.rows == t69.rows);
    REQUIRE(j69.base.has_value());
    CHECK(*j69.base == PerUnitBase(12.66, 10.0));
}

TEST_CASE("validate_radial topology errors") {
    CHECK_THROWS_WITH_AS(validate_radial(table_of({{1, 2}, {2, 3}, {3, 1}})), doctest::Contains("cycle"),
                         TopologyError);
    CHECK_THROWS_WITH_AS(validate_radial(table_of({{1, 2}, {3, 4}, {4, 3}})), doctest::Contains("cycle"),
                         TopologyError);
    CHECK_THROWS_WITH_AS(validate_radial(table_of({{1, 2}, {1, 3}, {2, 3}})),
                         doctest::Contains("fed by two"), TopologyError);
    CHECK_THROWS_WITH_AS(validate_radial(table_of({{1, 2}, {3, 4}})), doctest::Contains("node 3"),
                         TopologyError);
    CHECK_THROWS_WITH_AS(validate_radial(table_of({{1, 2}, {2, 4}})), doctest::Contains("node 3"),
                         TopologyError);
    CHECK_THROWS_WITH_AS(validate_radial(table_of({{2, 3}})), doctest::Contains("root"), TopologyError);
    CHECK_THROWS_WITH_AS(validate_radial(table_of({{2, 1}, {1, 3}})), doctest::Contains("root node 1 is fed"),
                         TopologyError);

    auto with_bad_tie = table_of({{1, 2}});
    with_bad_tie.rows.push_back({2, 2, 9, 0.5, 0.5, 0, 0, std::nullopt, true});
    CHECK_THROWS_AS(validate_radial(with_bad_tie), TopologyError);
}

TEST_CASE("ordering check") {
    // Branch 1 (2->3) is fed by branch 2 (1->2).
    const auto t = table_of({{2, 3}, {1, 2}});
    CHECK_THROWS_AS(validate_radial(t), OrderingError);
    const auto net = validate_radial(t, 1, PerUnitBase{}, {false});
    CHECK_FALSE(net.sequentially_ordered);
    CHECK(validate_radial(renumber_sequential(t).table).sequentially_ordered);
}

TEST_CASE("validate builds adjacency and loads") {
    const auto net = validate_radial(table_of({{1, 2, 0.1, 0.1, 10, 5}, {2, 3, 0.1, 0.1, 20, 8}, {2, 4}}));
    CHECK(net.children[0] == std::vector<std::size_t>{0});
    CHECK(net.children[1] == std::vector<std::size_t>{1, 2});
    CHECK(net.children[2].empty());
    CHECK(net.parent_branch[0] == NetworkModel::no_parent);
    CHECK(net.parent_branch[3] == 2);
    CHECK(net.node_load[2] == Phasor(20, 8) / 10000.0);
    CHECK(net.node_load[0] == Phasor());
}

TEST_CASE("renumber_sequential") {
    SUBCASE("bundled data is already in feeder order") {
        for (const char* name : {"ieee69.dat", "ieee33.dat"}) {
            const auto t = rdflow::test::fixture_table(name);
            const auto r = renumber_sequential(t);
            CHECK(r.is_identity());
            CHECK(r.table.rows == t.rows);
            const auto before = validate_radial(t);
            const auto after = validate_radial(r.table);
            REQUIRE(before.branch_count() == after.branch_count());
            for (std::size_t i = 0; i < before.branch_count(); ++i) {
                CHECK(before.branches[i].id == after.branches[i].id);
                CHECK(before.branches[i].from == after.branches[i].from);
                CHECK(before.branches[i].to == after.branches[i].to);
            }
        }
    }
    SUBCASE("chain out of order") {
        const auto r = renumber_sequential(table_of({{1, 3}, {3, 2}}));
        CHECK(r.old_to_new.at(3) == 2);
        CHECK(r.old_to_new.at(2) == 3);
        REQUIRE(r.table.rows.size() == 2);
        CHECK(r.table.rows[0].branch_id == 1);
        CHECK(r.table.rows[0].sending_node == 1);
        CHECK(r.table.rows[0].receiving_node == 2);
        CHECK(r.table.rows[1].branch_id == 2);
        CHECK(r.table.rows[1].sending_node == 2);
        CHECK(r.table.rows[1].receiving_node == 3);
    }
    SUBCASE("star children by old label") {
        const auto r = renumber_sequential(table_of({{1, 4}, {1, 3}, {1, 2}}));
        CHECK(r.old_to_new.at(2) == 2);
        CHECK(r.old_to_new.at(3) == 3);
        CHECK(r.old_to_new.at(4) == 4);
        CHECK(r.new_to_old.at(4) == 4);
    }
    SUBCASE("loads follow their nodes") {
        const auto r = renumber_sequential(table_of({{1, 3, 0.1, 0.1, 30, 3}, {3, 2, 0.2, 0.2, 20, 2}}));
        CHECK(r.table.rows[0].load_p_kw == 30);
        CHECK(r.table.rows[1].load_p_kw == 20);
        CHECK(r.table.rows[1].resistance_ohm == 0.2);
    }
    SUBCASE("non-tree input") {
        CHECK_THROWS_AS(renumber_sequential(table_of({{1, 2}, {2, 3}, {3, 2}})), TopologyError);
    }
}

TEST_CASE("renumbered random trees always validate in order") {
    std::mt19937_64 rng(2024);
    for (int i = 0; i < 300; ++i) {
        const std::size_t n = 2 + rng() % 199;
        const std::size_t m = 1 + rng() % (n - 1);
        const auto shuffled = synthetic::shuffle_labels(synthetic::random_feeder(n, m, rng), 1, rng);
        const auto r = renumber_sequential(shuffled);
        NetworkModel net;
        CHECK_NOTHROW(net = validate_radial(r.table));
        CHECK(net.sequentially_ordered);
        CHECK(net.node_count == n);

        // Relabelling preserves the edge set.
        std::set<std::pair<NodeId, NodeId>> original, mapped;
        for (const auto& row : shuffled.rows) {
            original.insert({row.sending_node, row.receiving_node});
        }
        for (const auto& row : r.table.rows) {
            mapped.insert({r.new_to_old.at(row.sending_node), r.new_to_old.at(row.receiving_node)});
        }
        CHECK(original == mapped);
    }
}
