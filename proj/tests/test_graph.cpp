#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "mms/errors.hpp"
#include "mms/graph.hpp"
#include "mms/planted.hpp"
#include "mms/util.hpp"
#include "test_helpers.hpp"

using namespace mms;

namespace {

// Toy academic network: 3 authors, 4 papers, 2 conferences.
HinGraph toy_graph() {
    HinGraph g;
    g.schema.node_types = {{"author", 3}, {"paper", 4}, {"conf", 2}};
    g.schema.edge_types = {{"AP", 1, 0}, {"PA", 0, 1}, {"PC", 2, 1}, {"CP", 1, 2}};
    std::vector<std::pair<int, int>> ap = {{0, 0}, {1, 0}, {1, 1}, {2, 1}, {3, 2}};
    g.adjacency.resize(4);
    g.adjacency[0] = TypedAdjacency::from_pairs(3, 4, ap);
    g.adjacency[1] = g.adjacency[0].transposed();
    std::vector<std::pair<int, int>> pc = {{0, 0}, {0, 1}, {1, 2}, {1, 3}};
    g.adjacency[2] = TypedAdjacency::from_pairs(4, 2, pc);
    g.adjacency[3] = g.adjacency[2].transposed();
    g.features.resize(3);
    Matrix feats(3, 2);
    feats.at(0, 0) = 1.0;
    feats.at(1, 1) = 1.0;
    feats.at(2, 0) = 0.5;
    g.features[0] = feats;
    LabelSet ls;
    ls.num_classes = 2;
    ls.labels = {0, 1, 0};
    g.labels["author"] = ls;
    NodeSplits s;
    s.target_type = "author";
    s.train = {0};
    s.val = {1};
    s.test = {2};
    g.node_splits = s;
    g.validate();
    return g;
}

std::string temp_path(const std::string& name) {
    return std::string("/tmp/mms_test_") + name;
}

}  // namespace

TEST_SUITE("graph") {

TEST_CASE("toy graph adjacency shapes follow the schema") {
    auto g = toy_graph();
    CHECK(g.adjacency[0].rows == 3);
    CHECK(g.adjacency[0].cols == 4);
    CHECK(g.adjacency[1].rows == 4);
    CHECK(g.adjacency[1].cols == 3);
    CHECK(g.adjacency[2].rows == 4);
    CHECK(g.adjacency[2].cols == 2);
    CHECK(g.adjacency[3].rows == 2);
    CHECK(g.adjacency[3].cols == 4);
}

TEST_CASE("bundled json round trip preserves everything") {
    auto g = toy_graph();
    auto path = temp_path("roundtrip.json");
    save_graph(g, path);
    auto loaded = load_graph(path, GraphFormat::BundledJson);
    CHECK(loaded.digest() == g.digest());
    save_graph(loaded, path + "2");
    auto reloaded = load_graph(path + "2", GraphFormat::BundledJson);
    CHECK(reloaded.digest() == g.digest());
    std::remove(path.c_str());
    std::remove((path + "2").c_str());
}

TEST_CASE("edge-list loader parses the documented layout") {
    std::string dir = "/tmp/mms_test_el";
    std::filesystem::create_directories(dir);
    {
        std::ofstream h(dir + "/header.txt");
        h << "# toy network\n";
        h << "node_type author 3\n";
        h << "node_type paper 4\n";
        h << "edge_type AP paper author ap.edges\n";
        h << "edge_type PA author paper pa.edges\n";
        h << "labels author 2 author.labels\n";
        h << "target author\n";
        h << "split train train.idx\nsplit val val.idx\nsplit test test.idx\n";
    }
    {
        std::ofstream f(dir + "/ap.edges");
        f << "0 0\n1 0\n2 1\n3 2\n";
    }
    {
        std::ofstream f(dir + "/pa.edges");
        f << "0 0\n0 1\n1 2\n2 3\n";
    }
    {
        std::ofstream f(dir + "/author.labels");
        f << "0 0\n1 1\n2 0\n";
    }
    { std::ofstream f(dir + "/train.idx"); f << "0\n"; }
    { std::ofstream f(dir + "/val.idx"); f << "1\n"; }
    { std::ofstream f(dir + "/test.idx"); f << "2\n"; }

    auto g = load_graph(dir + "/header.txt", GraphFormat::EdgeList);
    CHECK(g.schema.node_types.size() == 2);
    CHECK(g.adjacency[0].rows == 3);
    CHECK(g.adjacency[0].cols == 4);
    CHECK(g.labels.at("author").num_classes == 2);
    CHECK(g.node_splits->test == std::vector<int>{2});

    SUBCASE("unknown node type in header is a schema violation") {
        std::ofstream h(dir + "/bad.txt");
        h << "node_type author 3\n";
        h << "edge_type AX x author ax.edges\n";
        h.close();
        CHECK_THROWS_AS(load_graph(dir + "/bad.txt", GraphFormat::EdgeList), DataError);
    }
    SUBCASE("malformed integer reports file and line") {
        { std::ofstream f(dir + "/ap.edges"); f << "0 zero\n"; }
        try {
            load_graph(dir + "/header.txt", GraphFormat::EdgeList);
            FAIL("expected a parse error");
        } catch (const DataError& e) {
            CHECK(std::string(e.what()).find("ap.edges:1") != std::string::npos);
        }
    }
    std::filesystem::remove_all(dir);
}

TEST_CASE("four-type bundle keeps its class count") {
    HinGraph g;
    g.schema.node_types = {{"a", 4}, {"p", 4}, {"c", 2}, {"t", 2}};
    g.schema.edge_types = {{"AP", 1, 0}, {"PA", 0, 1}, {"PC", 2, 1}, {"PT", 3, 1}};
    g.adjacency.resize(4);
    g.adjacency[0] = TypedAdjacency::from_pairs(4, 4, {{0, 0}, {1, 1}, {2, 2}, {3, 3}});
    g.adjacency[1] = g.adjacency[0].transposed();
    g.adjacency[2] = TypedAdjacency::from_pairs(4, 2, {{0, 0}, {1, 1}, {0, 2}, {1, 3}});
    g.adjacency[3] = TypedAdjacency::from_pairs(4, 2, {{0, 0}, {1, 1}, {0, 2}, {1, 3}});
    g.features.resize(4);
    LabelSet ls;
    ls.num_classes = 4;
    ls.labels = {0, 1, 2, 3};
    g.labels["a"] = ls;
    g.validate();
    auto path = temp_path("four.json");
    save_graph(g, path);
    auto loaded = load_graph(path, GraphFormat::BundledJson);
    CHECK(loaded.schema.node_types.size() == 4);
    CHECK(loaded.labels.at("a").num_classes == 4);
    std::remove(path.c_str());
}

TEST_CASE("loader rejects undeclared node types in json") {
    auto path = temp_path("badtype.json");
    {
        std::ofstream f(path);
        f << R"({"schema":{"node_types":[{"name":"a","count":2}],
                 "edge_types":[{"name":"AX","src":"X","dst":"a"}]},"edges":{"AX":[]}})";
    }
    CHECK_THROWS_AS(load_graph(path, GraphFormat::BundledJson), DataError);
    std::remove(path.c_str());
}

TEST_CASE("normalized aggregate: means, empty rows, identity") {
    SUBCASE("hand example") {
        auto adj = TypedAdjacency::from_pairs(2, 2, {{0, 0}, {1, 0}});
        Matrix h(2, 1);
        h.at(0, 0) = 2.0;
        h.at(1, 0) = 4.0;
        auto out = normalized_aggregate(adj, h);
        CHECK(out.at(0, 0) == doctest::Approx(3.0));
        CHECK(out.at(1, 0) == 0.0);
    }
    SUBCASE("identity adjacency reproduces the input") {
        std::vector<std::pair<int, int>> eye;
        for (int i = 0; i < 5; ++i) eye.emplace_back(i, i);
        auto adj = TypedAdjacency::from_pairs(5, 5, eye);
        Rng rng(3);
        auto h = mmstest::random_matrix(rng, 5, 3);
        auto out = normalized_aggregate(adj, h);
        CHECK(mmstest::max_abs_diff(out, h) == 0.0);
    }
    SUBCASE("matches the dense row-normalized oracle") {
        Rng rng(11);
        auto adj = mmstest::random_adjacency(rng, 5, 7, 0.4);
        auto h = mmstest::random_matrix(rng, 7, 3);
        // Dense oracle: explicit row-normalized matrix product.
        Matrix dense(5, 7);
        for (int i = 0; i < 5; ++i) {
            int deg = adj.row_degree[i];
            for (int k = adj.row_ptr[i]; k < adj.row_ptr[i + 1]; ++k)
                dense.at(i, adj.col_idx[k]) = 1.0 / deg;
        }
        Matrix expect(5, 3);
        for (int i = 0; i < 5; ++i)
            for (int c = 0; c < 3; ++c)
                for (int j = 0; j < 7; ++j) expect.at(i, c) += dense.at(i, j) * h.at(j, c);
        auto out = normalized_aggregate(adj, h);
        CHECK(mmstest::max_abs_diff(out, expect) <= 1e-12);
    }
    SUBCASE("dimension mismatch throws") {
        auto adj = TypedAdjacency::from_pairs(2, 3, {{0, 0}});
        Matrix h(2, 1);
        CHECK_THROWS_AS(normalized_aggregate(adj, h), DataError);
    }
}

TEST_CASE("aggregation is linear in its input") {
    Rng rng(5);
    for (int trial = 0; trial < 10; ++trial) {
        auto adj = mmstest::random_adjacency(rng, 6, 4, 0.5);
        auto x = mmstest::random_matrix(rng, 4, 3);
        auto y = mmstest::random_matrix(rng, 4, 3);
        double a = rng.normal(), b = rng.normal();
        Matrix mix(4, 3);
        for (std::size_t i = 0; i < mix.values.size(); ++i)
            mix.values[i] = a * x.values[i] + b * y.values[i];
        auto lhs = normalized_aggregate(adj, mix);
        auto fx = normalized_aggregate(adj, x);
        auto fy = normalized_aggregate(adj, y);
        Matrix rhs(6, 3);
        for (std::size_t i = 0; i < rhs.values.size(); ++i)
            rhs.values[i] = a * fx.values[i] + b * fy.values[i];
        CHECK(mmstest::max_abs_diff(lhs, rhs) <= 1e-12);
    }
}

TEST_CASE("planted generation is deterministic and oracle-perfect") {
    auto spec = mmstest::toy_planted_spec();
    auto g1 = generate_planted_hin(7, spec);
    auto g2 = generate_planted_hin(7, spec);
    CHECK(g1.digest() == g2.digest());
    auto g3 = generate_planted_hin(8, spec);
    CHECK(g1.digest() != g3.digest());

    // The oracle classifier that aggregates along the planted path labels
    // every held-out node correctly when noise is zero.
    auto pred = planted_oracle_predictions(g1, spec);
    const auto& labels = g1.labels.at("A").labels;
    for (int idx : g1.node_splits->test) CHECK(pred[idx] == labels[idx]);
    for (int idx : g1.node_splits->val) CHECK(pred[idx] == labels[idx]);
}

TEST_CASE("planted generator rejects bad specs") {
    auto spec = mmstest::toy_planted_spec();
    SUBCASE("noise at the boundary") {
        spec.label_noise = 0.5;
        CHECK_THROWS_AS(generate_planted_hin(1, spec), ConfigError);
    }
    SUBCASE("type-incompatible path") {
        spec.planted_path = {"PC", "AP"};
        CHECK_THROWS_AS(generate_planted_hin(1, spec), ConfigError);
    }
}

TEST_CASE("label noise flips roughly the requested fraction") {
    auto spec = mmstest::toy_planted_spec();
    spec.label_noise = 0.2;
    auto noisy = generate_planted_hin(7, spec);
    spec.label_noise = 0.0;
    auto clean = generate_planted_hin(7, spec);
    const auto& a = noisy.labels.at("A").labels;
    const auto& b = clean.labels.at("A").labels;
    int flips = 0;
    for (std::size_t i = 0; i < a.size(); ++i) flips += a[i] != b[i] ? 1 : 0;
    double rate = static_cast<double>(flips) / a.size();
    CHECK(rate > 0.08);
    CHECK(rate < 0.35);
}

TEST_CASE("fallback features are a pure function of digest and type") {
    auto g = toy_graph();
    auto f1 = fallback_features(g, 1, 6);
    auto f2 = fallback_features(g, 1, 6);
    CHECK(f1.values == f2.values);
    CHECK(f1.rows == 4);
    CHECK(f1.cols == 6);
    auto other_type = fallback_features(g, 2, 6);
    CHECK(f1.values != other_type.values);
    // Stored features win.
    auto inp = input_features(g, 0, 6);
    CHECK(inp.cols == 2);
}

TEST_CASE("schema validation rejects degenerate networks") {
    NetworkSchema s;
    s.node_types = {{"only", 3}};
    s.edge_types = {{"E", 0, 0}};
    CHECK_THROWS_AS(s.validate(), DataError);
    s.edge_types.push_back({"F", 0, 0});
    CHECK_NOTHROW(s.validate());  // one type, two relations is heterogeneous
    s.edge_types.push_back({"ID", 0, 0});
    CHECK_THROWS_AS(s.validate(), DataError);  // reserved name
}

TEST_CASE("duplicate coordinate entries are merged") {
    auto adj = TypedAdjacency::from_pairs(2, 2, {{0, 0}, {0, 0}, {1, 0}});
    CHECK(adj.nnz() == 2);
    CHECK(adj.row_degree[0] == 2);
}

}  // TEST_SUITE
