#pragma once

#include <complex>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>

#include "rdflow/ingest.hpp"
#include "rdflow/model.hpp"

namespace rdflow::test {

inline std::string data_path(const std::string& name) { return std::string(RDFLOW_DATA_DIR) + "/" + name; }

inline std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

inline RawTable fixture_table(const std::string& name) { return read_branch_file(data_path(name)); }

inline NetworkModel fixture(const std::string& name) { return validate_radial(fixture_table(name)); }

struct Edge {
    NodeId from;
    NodeId to;
    double r_ohm = 0.1;
    double x_ohm = 0.05;
    double p_kw = 0.0;
    double q_kvar = 0.0;
};

/// Branch ids follow list order, starting at 1.
inline RawTable table_of(std::initializer_list<Edge> edges) {
    RawTable t;
    BranchId id = 1;
    for (const auto& e : edges) {
        BranchRecord r;
        r.branch_id = id++;
        r.sending_node = e.from;
        r.receiving_node = e.to;
        r.resistance_ohm = e.r_ohm;
        r.reactance_ohm = e.x_ohm;
        r.load_p_kw = e.p_kw;
        r.load_q_kvar = e.q_kvar;
        t.rows.push_back(r);
    }
    return t;
}

inline std::complex<double> cx(const Phasor& p) { return {p.re(), p.im()}; }

inline double dist(const Phasor& a, const Phasor& b) { return (a - b).magnitude(); }

}  // namespace rdflow::test
