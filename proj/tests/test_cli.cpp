#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <sys/wait.h>
#include <unistd.h>

#include <json.hpp>

#include "helpers.hpp"
#include "rdflow/cli.hpp"

using namespace rdflow;
using namespace rdflow::cli;
using rdflow::test::data_path;

namespace {

struct Run {
    int code = 0;
    std::string out;
    std::string err;
};

template <class F>
Run capture(F&& f) {
    std::ostringstream out, err;
    const int code = f(out, err);
    return {code, out.str(), err.str()};
}

Run validate(const std::string& path) {
    RunConfig c;
    c.input_path = path;
    return capture([&](auto& o, auto& e) { return cmd_validate(c, o, e); });
}

Run solve_with(const RunConfig& c) {
    return capture([&](auto& o, auto& e) { return cmd_solve(c, o, e); });
}

Run solve(const std::string& path, OutputFormat f = OutputFormat::table) {
    RunConfig c;
    c.input_path = path;
    c.output = f;
    return solve_with(c);
}

Run compare(const std::string& path, const std::string& golden, double bound = 1e-3) {
    RunConfig c;
    c.input_path = path;
    CompareConfig g{golden, bound};
    return capture([&](auto& o, auto& e) { return cmd_compare(c, g, o, e); });
}

class TempDir {
public:
    TempDir() {
        static int counter = 0;
        path_ = std::filesystem::temp_directory_path() /
                ("rdflow_cli_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() { std::filesystem::remove_all(path_); }

    std::string missing() const { return (path_ / "absent.dat").string(); }

    std::string write(const std::string& name, const std::string& text) const {
        const auto p = path_ / name;
        std::ofstream(p, std::ios::binary) << text;
        return p.string();
    }

private:
    std::filesystem::path path_;
};

// node -> displayed |V| from the table section of `solve` output.
std::map<NodeId, std::string> voltage_rows(const std::string& table) {
    std::map<NodeId, std::string> rows;
    std::istringstream in(table);
    std::string line;
    while (std::getline(in, line) && line != "node vmag_pu angle_deg") {
    }
    while (std::getline(in, line) && !line.empty()) {
        std::istringstream f(line);
        NodeId n = 0;
        std::string v;
        f >> n >> v;
        rows[n] = v;
    }
    return rows;
}

std::string golden_from(const std::map<NodeId, std::string>& rows) {
    std::string s = "node,vmag_pu\n";
    for (const auto& [n, v] : rows) {
        s += std::to_string(n) + "," + v + "\n";
    }
    return s;
}

std::string fmt_fixed5(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.5f", v);
    return buf;
}

int run_binary(const std::string& args) {
    const std::string cmd = std::string(RDFLOW_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("validate reports the feeder shape") {
    auto r = validate(data_path("ieee69.dat"));
    CHECK(r.code == exit_ok);
    CHECK(r.out == "NB=69 LN=68 ties=5 leaves=8 ordered=yes\n");

    r = validate(data_path("ieee33.dat"));
    CHECK(r.code == exit_ok);
    CHECK(r.out == "NB=33 LN=32 ties=0 leaves=4 ordered=yes\n");

    r = validate(data_path("ieee69.json"));
    CHECK(r.out == "NB=69 LN=68 ties=5 leaves=8 ordered=yes\n");
}

TEST_CASE("validate rejects bad tables") {
    TempDir dir;
    auto r = validate(dir.write("cycle.dat", "1 1 2 0.1 0.1 1 1\n2 2 3 0.1 0.1 1 1\n3 3 2 0.1 0.1 1 1\n"));
    CHECK(r.code != exit_ok);
    CHECK(r.out.empty());
    CHECK_FALSE(r.err.empty());

    r = validate(dir.write("loop.dat", "1 1 2 0.1 0.1 1 1\n2 2 3 0.1 0.1 1 1\n3 3 4 0.1 0.1 1 1\n4 4 2 0.1 0.1 1 1\n"));
    CHECK(r.code == exit_topology);

    r = validate(dir.write("bad.dat", "1 1 2 0.1 x 1 1\n"));
    CHECK(r.code == exit_parse);
    CHECK(r.err.find("line 1") != std::string::npos);

    r = validate(dir.write("empty.dat", ""));
    CHECK(r.code == exit_parse);

    r = validate(dir.write("unordered.dat", "1 2 3 0.1 0.1 1 1\n2 1 2 0.1 0.1 1 1\n"));
    CHECK(r.code == exit_ok);
    CHECK(r.out.find("ordered=no") != std::string::npos);

    r = validate(dir.missing());
    CHECK(r.code == exit_parse);
}

TEST_CASE("solve table output") {
    const auto r = solve(data_path("ieee69.dat"));
    REQUIRE(r.code == exit_ok);
    const auto rows = voltage_rows(r.out);
    REQUIRE(rows.size() == 69);
    CHECK(std::abs(std::stod(rows.at(65)) - 0.90901) <= 1e-3);
    CHECK(rows.at(1) == "1.00000");
    CHECK(r.out.find("total_loss_kw") != std::string::npos);
    CHECK(r.out.find("steps_proposed") != std::string::npos);

    // Byte-identical reruns.
    CHECK(solve(data_path("ieee69.dat")).out == r.out);
    CHECK(solve(data_path("ieee69.json")).out == r.out);
}

TEST_CASE("solve on an unloaded pair of nodes") {
    TempDir dir;
    const auto r = solve(dir.write("two.dat", "1 1 2 0.1 0.1 0 0\n"));
    REQUIRE(r.code == exit_ok);
    CHECK(voltage_rows(r.out).at(2) == "1.00000");
    CHECK(r.out.find("2 1.00000") != std::string::npos);
}

TEST_CASE("json output agrees with the table") {
    const auto table = voltage_rows(solve(data_path("ieee69.dat")).out);
    const auto json = nlohmann::json::parse(solve(data_path("ieee69.dat"), OutputFormat::json).out);
    CHECK(json["converged"] == true);
    REQUIRE(json["nodes"].size() == 69);
    for (const auto& n : json["nodes"]) {
        const NodeId id = n["node"];
        CHECK(fmt_fixed5(n["vmag_pu"].get<double>()) == table.at(id));
    }
    CHECK(json["branches"].size() == 68);
    CHECK(json["steps"]["proposed"].get<std::uint64_t>() < json["steps"]["baseline"].get<std::uint64_t>());
}

TEST_CASE("csv output") {
    const auto r = solve(data_path("ieee33.dat"), OutputFormat::csv);
    REQUIRE(r.code == exit_ok);
    CHECK(r.out.rfind("node,vmag_pu,angle_deg\n1,1.00000,", 0) == 0);
    CHECK(r.out.find("\nkey,value\niterations,") != std::string::npos);
}

TEST_CASE("solve options") {
    RunConfig c;
    c.input_path = data_path("ieee69.dat");
    c.debug_polar = true;
    auto r = solve_with(c);
    CHECK(r.code == exit_ok);
    CHECK(r.out.find("polar_checks") != std::string::npos);

    c.debug_polar = false;
    c.max_iterations = 1;
    r = solve_with(c);
    CHECK(r.code == exit_solver);
    CHECK(r.err.find("solver error") != std::string::npos);

    TempDir dir;
    c = RunConfig{};
    c.input_path = dir.write("unordered.dat", "1 2 3 0.1 0.1 10 5\n2 1 2 0.1 0.1 10 5\n");
    r = solve_with(c);
    CHECK(r.code == exit_topology);
    CHECK(r.err.find("--renumber") != std::string::npos);

    c.renumber = true;
    r = solve_with(c);
    REQUIRE(r.code == exit_ok);
    // Results are reported under the labels of the input file.
    const auto rows = voltage_rows(r.out);
    CHECK(rows.size() == 3);
    CHECK(std::stod(rows.at(3)) < std::stod(rows.at(2)));

    c = RunConfig{};
    c.input_path = data_path("ieee69.dat");
    c.kv_base = 11.0;
    const auto other = voltage_rows(solve_with(c).out);
    CHECK(std::stod(other.at(65)) < 0.90901);
}

TEST_CASE("compare against golden voltages") {
    TempDir dir;
    const auto own = voltage_rows(solve(data_path("ieee69.dat")).out);

    auto r = compare(data_path("ieee69.dat"), dir.write("own.csv", golden_from(own)), 0.0);
    CHECK(r.code == exit_ok);

    r = compare(data_path("ieee69.dat"), data_path("ieee69_vmag.csv"));
    CHECK(r.code == exit_ok);
    CHECK(r.out.find("max_deviation") != std::string::npos);

    auto bumped = own;
    bumped[27] = fmt_fixed5(std::stod(own.at(27)) + 0.01);
    r = compare(data_path("ieee69.dat"), dir.write("bumped.csv", golden_from(bumped)));
    CHECK(r.code == exit_comparison);
    CHECK(r.err.find("27") != std::string::npos);

    auto missing = own;
    missing.erase(40);
    r = compare(data_path("ieee69.dat"), dir.write("missing.csv", golden_from(missing)));
    CHECK(r.code == exit_parse);

    r = compare(data_path("ieee69.dat"), dir.write("junk.csv", "node,vmag_pu\n1,abc\n"));
    CHECK(r.code == exit_parse);
}

TEST_CASE("bench") {
    BenchConfig c;
    c.sizes = {2, 69};
    c.leaf_fractions = {0.12};
    c.seed = 42;
    const auto a = capture([&](auto& o, auto& e) { return cmd_bench(c, o, e); });
    const auto b = capture([&](auto& o, auto& e) { return cmd_bench(c, o, e); });
    CHECK(a.code == exit_ok);
    CHECK(a.out == b.out);

    const auto cells = run_bench(c);
    REQUIRE(cells.size() == 2);
    CHECK(cells[0].nodes == 2);
    CHECK(cells[0].leaves == 1);
    CHECK(cells[0].proposed_per_iteration <= cells[0].baseline_per_iteration);

    const auto& big = cells[1];
    CHECK(big.nodes == 69);
    CHECK(big.leaves == 8);
    CHECK(big.proposed_per_iteration < big.baseline_per_iteration);
    CHECK(std::abs(big.proposed_per_iteration / double(big.predicted.proposed_per_iteration) - 1.0) <= 0.2);
    CHECK(std::abs(big.baseline_per_iteration / double(big.predicted.baseline_per_iteration) - 1.0) <= 0.2);

    c.seed = 43;
    CHECK(capture([&](auto& o, auto& e) { return cmd_bench(c, o, e); }).out != a.out);
}

TEST_CASE("exit codes of the executable") {
    TempDir dir;
    CHECK(run_binary("validate " + data_path("ieee69.dat")) == exit_ok);
    CHECK(run_binary("") == exit_usage);
    CHECK(run_binary("solve") == exit_usage);
    CHECK(run_binary("solve " + data_path("ieee69.dat") + " --format xml") == exit_usage);
    CHECK(run_binary("validate " + dir.write("bad.dat", "1 1 2 a b c d\n")) == exit_parse);
    CHECK(run_binary("validate " + dir.write("cyc.dat", "1 1 2 1 1 1 1\n2 2 3 1 1 1 1\n3 3 2 1 1 1 1\n")) ==
          exit_topology);
    CHECK(run_binary("solve " + data_path("ieee69.dat") + " --max-iter 1") == exit_solver);
    CHECK(run_binary("compare " + data_path("ieee69.dat") + " --golden " + data_path("ieee69_vmag.csv") +
                     " --bound 0.00001") == exit_comparison);
    CHECK(run_binary("bench --sizes 5 --leaf-fractions 0.5 --seed 3") == exit_ok);
}
