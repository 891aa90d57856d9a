#include <doctest.h>

#include <cmath>

#include "mms/derive.hpp"
#include "mms/errors.hpp"
#include "mms/planted.hpp"
#include "mms/schedule.hpp"
#include "mms/util.hpp"
#include "test_helpers.hpp"

using namespace mms;

namespace {

HinGraph small_graph() {
    auto spec = mmstest::toy_planted_spec();
    spec.node_types = {{"A", 24}, {"P", 18}, {"C", 12}};
    return generate_planted_hin(3, spec);
}

// Alpha values realizing given strengths (softmax of their logs).
std::vector<double> alpha_for(const std::vector<double>& strengths) {
    std::vector<double> a;
    for (double p : strengths) a.push_back(std::log(p));
    return a;
}

ArchParams uniform_arch(const SuperNetTopology& topo) {
    ArchParams arch;
    for (const auto& e : topo.multi_edges)
        arch.alpha[e].assign(topo.candidates.at(e).size(), 0.0);
    return arch;
}

}  // namespace

TEST_SUITE("derive") {

TEST_CASE("uniform strengths derive the lowest-index candidate everywhere") {
    auto g = small_graph();
    auto topo = make_full_topology(2, g.schema);
    auto arch = uniform_arch(topo);
    auto s = derive_structure(StructureKind::MetaGraph, arch, topo, g.schema, 1.0, 0.9);
    CHECK(s.retained.size() == topo.multi_edges.size());
    for (const auto& e : s.retained) CHECK(e.type == "ID");  // candidate index 0
}

TEST_CASE("threshold arithmetic from trained strengths") {
    auto g = small_graph();
    SuperNetTopology topo;
    topo.depth = 1;
    topo.multi_edges = {{0, 1}};
    topo.candidates[{0, 1}] = {0, 1, 2};
    ArchParams arch;

    SUBCASE("clear leader keeps only the first") {
        arch.alpha[{0, 1}] = alpha_for({0.5, 0.3, 0.2});
        auto p = path_strengths(arch, {0, 1});
        CHECK(std::fabs(strength_threshold(p, 0.9) - 0.47) <= 1e-12);
        auto s = derive_structure(StructureKind::MetaMultigraph, arch, topo, g.schema, 0.9, 0.9);
        CHECK(s.retained.size() == 1);
        CHECK(s.retained[0].type == g.schema.edge_types[0].name);
    }
    SUBCASE("close pair: the threshold still sits above the runner-up") {
        arch.alpha[{0, 1}] = alpha_for({0.4, 0.35, 0.25});
        auto p = path_strengths(arch, {0, 1});
        CHECK(std::fabs(strength_threshold(p, 0.9) - 0.385) <= 1e-12);
        // 0.35 < 0.385, so only the leader survives the threshold rule.
        auto s = derive_structure(StructureKind::MetaMultigraph, arch, topo, g.schema, 0.9, 0.9);
        CHECK(s.retained.size() == 1);
        CHECK(s.retained[0].type == g.schema.edge_types[0].name);
    }
    SUBCASE("genuinely close strengths keep both") {
        arch.alpha[{0, 1}] = alpha_for({0.4, 0.39, 0.21});
        auto s = derive_structure(StructureKind::MetaMultigraph, arch, topo, g.schema, 0.9, 0.9);
        CHECK(s.retained.size() == 2);
    }
}

TEST_CASE("meta-path derivation keeps the chain and drops residuals") {
    auto g = small_graph();
    auto topo = make_full_topology(3, g.schema);
    Rng rng(41);
    ArchParams arch;
    for (const auto& e : topo.multi_edges) {
        std::vector<double> a(topo.candidates.at(e).size());
        for (double& v : a) v = rng.normal();
        arch.alpha[e] = a;
    }
    auto s = derive_structure(StructureKind::MetaPath, arch, topo, g.schema, 1.0, 0.9);
    CHECK(s.retained.size() == 3);
    for (const auto& e : s.retained) CHECK(e.to - e.from == 1);
    CHECK_NOTHROW(s.validate(&g.schema));

    // Each hop keeps exactly the argmax candidate of its multi-edge.
    for (int j = 1; j <= 3; ++j) {
        auto p = path_strengths(arch, {j - 1, j});
        int best = argmax_lowest(p);
        CHECK(s.retained[j - 1].type ==
              topo.candidate_name(g.schema, topo.candidates.at({j - 1, j})[best]));
    }
}

TEST_CASE("meta-graph retention is a subset of meta-multigraph retention") {
    auto g = small_graph();
    auto topo = make_full_topology(2, g.schema);
    Rng rng(43);
    for (int trial = 0; trial < 100; ++trial) {
        ArchParams arch;
        for (const auto& e : topo.multi_edges) {
            std::vector<double> a(topo.candidates.at(e).size());
            for (double& v : a) v = 1.5 * rng.normal();
            arch.alpha[e] = a;
        }
        double lambda = rng.uniform();
        auto graph_s = derive_structure(StructureKind::MetaGraph, arch, topo, g.schema, 1.0, 0.9);
        auto multi_s =
            derive_structure(StructureKind::MetaMultigraph, arch, topo, g.schema, lambda, 0.9);
        for (const auto& e : graph_s.retained)
            CHECK(multi_s.contains(e.from, e.to, e.type));
    }
}

TEST_CASE("attenuated thresholds retain more near the source") {
    auto g = small_graph();
    auto topo = make_full_topology(3, g.schema);
    // Identical strength vectors on every multi-edge isolate the depth term.
    ArchParams arch;
    std::vector<double> a = {0.6, 0.2, 0.4, -0.1, -0.5};
    for (const auto& e : topo.multi_edges) arch.alpha[e] = a;
    auto s = derive_structure(StructureKind::C2cMetaMultigraph, arch, topo, g.schema, 1.0, 0.6);
    std::map<std::pair<int, int>, int> per_edge;
    for (const auto& e : s.retained) per_edge[{e.from, e.to}]++;
    CHECK(per_edge[{0, 1}] >= per_edge[{0, 2}]);
    CHECK(per_edge[{0, 2}] >= per_edge[{0, 3}]);
    CHECK(per_edge[{0, 3}] == 1);  // lambda_eff = 1 at the sink

    SUBCASE("c2c matches the directly computed attenuated rule") {
        auto p = path_strengths(arch, {0, 1});
        for (const auto& e : topo.multi_edges) {
            double lam = std::pow(0.6, 3 - e.second) * 1.0;
            auto expect = activated_paths(p, lam);
            CHECK(per_edge[{e.first, e.second}] == static_cast<int>(expect.size()));
        }
    }
}

TEST_CASE("derivation is a pure function of its inputs") {
    auto g = small_graph();
    auto topo = make_full_topology(2, g.schema);
    Rng rng(47);
    ArchParams arch;
    for (const auto& e : topo.multi_edges) {
        std::vector<double> a(topo.candidates.at(e).size());
        for (double& v : a) v = rng.normal();
        arch.alpha[e] = a;
    }
    auto s1 = derive_structure(StructureKind::C2cMetaMultigraph, arch, topo, g.schema, 0.9, 0.8);
    auto s2 = derive_structure(StructureKind::C2cMetaMultigraph, arch, topo, g.schema, 0.9, 0.8);
    CHECK(s1.to_json_string() == s2.to_json_string());
}

TEST_CASE("target forward: pass-through, hops, and the dense oracle") {
    auto g = small_graph();
    SUBCASE("identity chain reproduces the projected input") {
        MetaStructure s;
        s.kind = StructureKind::MetaPath;
        s.depth = 1;
        s.retained = {{0, 1, "ID"}};
        SuperNet net(g, make_full_topology(1, g.schema), 5, 8, TaskKind::Classification, 9);
        Tape tape;
        auto h0 = net.projected_input(tape);
        auto out = target_forward(tape, s, net);
        CHECK(mmstest::max_abs_diff(h0->to_matrix(), out->to_matrix()) == 0.0);
    }
    SUBCASE("meta-path structure equals sequential hop application") {
        MetaStructure s;
        s.kind = StructureKind::MetaPath;
        s.depth = 2;
        s.retained = {{0, 1, "PC"}, {1, 2, "AP"}};
        SuperNet net(g, make_full_topology(2, g.schema), 5, 8, TaskKind::Classification, 9);
        Tape tape;
        auto h0 = net.projected_input(tape);
        auto hop1 = tape.sparse_aggregate(net.lifted(g.schema.edge_type_index("PC")), h0);
        auto hop2 = tape.sparse_aggregate(net.lifted(g.schema.edge_type_index("AP")), hop1);
        auto out = target_forward(tape, s, net);
        CHECK(mmstest::max_abs_diff(hop2->to_matrix(), out->to_matrix()) <= 1e-15);
    }
    SUBCASE("two-edge multigraph matches an unweighted dense evaluation") {
        MetaStructure s;
        s.kind = StructureKind::MetaMultigraph;
        s.depth = 2;
        s.retained = {{0, 1, "PC"}, {0, 1, "PA"}, {0, 2, "AP"}, {1, 2, "AP"}, {1, 2, "ID"}};
        SuperNet net(g, make_full_topology(2, g.schema), 5, 8, TaskKind::Classification, 10);
        Tape tape;
        auto out = target_forward(tape, s, net);

        auto agg = [&](const std::string& name, const Matrix& h) {
            Matrix lifted(h.rows, h.cols);
            int r = g.schema.edge_type_index(name);
            const auto& e = g.schema.edge_types[r];
            const auto& adj = g.adjacency[r];
            int so = g.schema.block_offset(e.src_type), to = g.schema.block_offset(e.dst_type);
            for (int i = 0; i < adj.rows; ++i) {
                for (int k = adj.row_ptr[i]; k < adj.row_ptr[i + 1]; ++k)
                    for (int c = 0; c < h.cols; ++c)
                        lifted.at(to + i, c) += h.at(so + adj.col_idx[k], c);
                for (int c = 0; c < h.cols; ++c)
                    if (adj.row_degree[i] > 0) lifted.at(to + i, c) /= adj.row_degree[i];
            }
            return lifted;
        };
        Tape tape2;
        Matrix h0 = net.projected_input(tape2)->to_matrix();
        Matrix h1(h0.rows, h0.cols);
        for (const std::string name : {"PC", "PA"}) {
            Matrix m = agg(name, h0);
            for (std::size_t k = 0; k < h1.values.size(); ++k) h1.values[k] += m.values[k];
        }
        Matrix h2 = agg("AP", h0);
        Matrix h2b = agg("AP", h1);
        for (std::size_t k = 0; k < h2.values.size(); ++k)
            h2.values[k] += h2b.values[k] + h1.values[k];
        CHECK(mmstest::max_abs_diff(out->to_matrix(), h2) <= 1e-10);
    }
}

TEST_CASE("keeping every candidate scales the weighted forward by K") {
    auto g = small_graph();
    SuperNetTopology topo;
    topo.depth = 1;
    topo.multi_edges = {{0, 1}};
    topo.candidates[{0, 1}] = {0, 1, 2, 3};
    SuperNet net(g, topo, 4, 8, TaskKind::Classification, 11);  // uniform strengths
    MetaStructure s;
    s.kind = StructureKind::MetaMultigraph;
    s.depth = 1;
    for (int r = 0; r < 4; ++r) s.retained.push_back({0, 1, g.schema.edge_types[r].name});
    Tape tape;
    auto unweighted = target_forward(tape, s, net)->to_matrix();
    auto weighted = forward_full(tape, net)->to_matrix();
    for (double& v : weighted.values) v *= 4.0;
    CHECK(mmstest::max_abs_diff(unweighted, weighted) <= 1e-12);
}

TEST_CASE("structure validation catches shape violations") {
    MetaStructure s;
    s.kind = StructureKind::MetaPath;
    s.depth = 2;
    s.retained = {{0, 2, "AP"}};
    CHECK_THROWS_AS(s.validate(), DataError);  // residual edge in a path

    s.kind = StructureKind::MetaGraph;
    s.retained = {{0, 1, "AP"}, {0, 1, "PA"}, {1, 2, "AP"}};
    CHECK_THROWS_AS(s.validate(), DataError);  // two types on one multi-edge

    s.kind = StructureKind::MetaMultigraph;
    s.retained = {{1, 2, "AP"}};
    CHECK_THROWS_AS(s.validate(), DataError);  // node 1 unreachable

    s.retained = {{0, 1, "AP"}, {1, 2, "AP"}};
    CHECK_NOTHROW(s.validate());

    NetworkSchema schema;
    schema.node_types = {{"a", 2}, {"b", 2}};
    schema.edge_types = {{"AB", 0, 1}, {"BA", 1, 0}};
    s.retained = {{0, 1, "XX"}, {1, 2, "AB"}};
    CHECK_THROWS_AS(s.validate(&schema), DataError);  // unknown edge type
}

TEST_CASE("dot export is deterministic and matches the golden rendering") {
    MetaStructure s;
    s.kind = StructureKind::MetaMultigraph;
    s.depth = 2;
    s.retained = {{0, 1, "PC"}, {0, 2, "ID"}, {1, 2, "AP"}, {0, 1, "PA"}};
    const std::string golden =
        "digraph meta_structure {\n"
        "  rankdir=LR;\n"
        "  H0 [shape=circle];\n"
        "  H1 [shape=circle];\n"
        "  H2 [shape=circle];\n"
        "  H0 -> H1 [label=\"PA\"];\n"
        "  H0 -> H1 [label=\"PC\"];\n"
        "  H0 -> H2 [label=\"ID\"];\n"
        "  H1 -> H2 [label=\"AP\"];\n"
        "}\n";
    CHECK(export_dot(s) == golden);
    CHECK(export_dot(s) == export_dot(s));

    SUBCASE("identity chain renders every hyper-node") {
        MetaStructure chain;
        chain.kind = StructureKind::MetaPath;
        chain.depth = 3;
        chain.retained = {{0, 1, "ID"}, {1, 2, "ID"}, {2, 3, "ID"}};
        auto dot = export_dot(chain);
        for (int j = 0; j <= 3; ++j)
            CHECK(dot.find("H" + std::to_string(j) + " [shape=circle]") != std::string::npos);
        CHECK(dot.find("label=\"ID\"") != std::string::npos);
    }
}

TEST_CASE("structure json round-trips") {
    MetaStructure s;
    s.kind = StructureKind::C2cMetaMultigraph;
    s.depth = 2;
    s.lambda = 1.0;
    s.beta = 0.8;
    s.retained = {{0, 1, "PC"}, {0, 2, "AP"}, {1, 2, "AP"}};
    auto text = s.to_json_string();
    auto back = MetaStructure::from_json_string(text);
    CHECK(back.to_json_string() == text);
    CHECK(back.kind == s.kind);
    CHECK(back.retained == s.retained);
}

}  // TEST_SUITE
