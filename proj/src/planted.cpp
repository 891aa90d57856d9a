#include "mms/planted.hpp"

#include <algorithm>
#include <set>

#include "mms/errors.hpp"
#include "mms/util.hpp"

namespace mms {

namespace {

int find_type(const std::vector<NodeTypeInfo>& types, const std::string& name) {
    for (std::size_t i = 0; i < types.size(); ++i)
        if (types[i].name == name) return static_cast<int>(i);
    return -1;
}

}  // namespace

void PlantedSpec::validate() const {
    if (node_types.empty()) throw ConfigError("planted spec: no node types");
    for (const auto& t : node_types)
        if (t.count <= 0) throw ConfigError("planted spec: node counts must be positive");
    if (find_type(node_types, label_type) < 0)
        throw ConfigError("planted spec: unknown label type '" + label_type + "'");
    if (num_classes < 2) throw ConfigError("planted spec: need at least 2 classes");
    if (feature_dim < num_classes)
        throw ConfigError("planted spec: feature_dim must be >= num_classes");
    if (!(label_noise >= 0.0 && label_noise < 0.5))
        throw ConfigError("planted spec: label noise must be in [0, 0.5)");
    if (train_frac <= 0 || val_frac <= 0 || train_frac + val_frac >= 1.0)
        throw ConfigError("planted spec: split fractions must be positive and sum below 1");

    std::set<std::string> edge_names;
    for (const auto& r : relations) {
        if (r.density <= 0 || r.density > 1)
            throw ConfigError("planted spec: relation density must be in (0, 1]");
        if (find_type(node_types, r.src_type) < 0 || find_type(node_types, r.dst_type) < 0)
            throw ConfigError("planted spec: relation '" + r.name + "' uses unknown node type");
        if (!edge_names.insert(r.name).second || !edge_names.insert(r.reverse_name).second)
            throw ConfigError("planted spec: duplicate edge type name");
    }
    if (planted_path.empty()) throw ConfigError("planted spec: empty planted path");

    // Type-compatibility of the planted meta-path.
    auto direction = [&](const std::string& edge) -> std::pair<std::string, std::string> {
        for (const auto& r : relations) {
            if (r.name == edge) return {r.src_type, r.dst_type};
            if (r.reverse_name == edge) return {r.dst_type, r.src_type};
        }
        throw ConfigError("planted spec: path edge '" + edge + "' is not a declared edge type");
    };
    std::string expect_dst = label_type;
    for (const auto& edge : planted_path) {
        auto [src, dst] = direction(edge);
        if (dst != expect_dst)
            throw ConfigError("planted spec: path edge '" + edge + "' targets '" + dst +
                              "', expected '" + expect_dst + "'");
        expect_dst = src;
    }
    // Each class must have at least one node of every type on the path.
    for (const auto& t : node_types)
        if (t.count < num_classes)
            throw ConfigError("planted spec: node type '" + t.name +
                              "' has fewer nodes than classes");
}

HinGraph generate_planted_hin(std::uint64_t seed, const PlantedSpec& spec) {
    spec.validate();

    HinGraph g;
    g.schema.node_types = spec.node_types;
    for (const auto& r : spec.relations) {
        g.schema.edge_types.push_back(
            {r.name, g.schema.node_type_index(r.src_type), g.schema.node_type_index(r.dst_type)});
        g.schema.edge_types.push_back(
            {r.reverse_name, g.schema.node_type_index(r.dst_type), g.schema.node_type_index(r.src_type)});
    }
    g.schema.validate();

    const int num_classes = spec.num_classes;
    auto class_of = [num_classes](int node) { return node % num_classes; };
    std::set<std::string> path_edges(spec.planted_path.begin(), spec.planted_path.end());

    // Edge generation. Path edge types connect same-class pairs only, with a
    // guaranteed in-neighbor per target node; everything else is uniform noise.
    g.adjacency.resize(g.schema.edge_types.size());
    for (const auto& r : spec.relations) {
        int src_t = g.schema.node_type_index(r.src_type);
        int dst_t = g.schema.node_type_index(r.dst_type);
        int n_src = g.schema.node_types[src_t].count;
        int n_dst = g.schema.node_types[dst_t].count;
        bool structured = path_edges.count(r.name) > 0 || path_edges.count(r.reverse_name) > 0;

        Rng rng(stream_seed(seed, {tag64("edges"), tag64(r.name)}));
        std::vector<std::pair<int, int>> pairs;
        for (int d = 0; d < n_dst; ++d) {
            int before = static_cast<int>(pairs.size());
            for (int s = 0; s < n_src; ++s) {
                if (structured && class_of(s) != class_of(d)) continue;
                if (rng.uniform() < r.density) pairs.emplace_back(s, d);
            }
            if (structured && static_cast<int>(pairs.size()) == before) {
                // Keep every target reachable along the planted path.
                int cls = class_of(d);
                int in_class = (n_src - 1 - cls) / num_classes + 1;
                int pick = cls + num_classes * static_cast<int>(rng.below(in_class));
                pairs.emplace_back(pick, d);
            }
        }
        int fwd = g.schema.edge_type_index(r.name);
        g.adjacency[fwd] = TypedAdjacency::from_pairs(n_dst, n_src, pairs);
        g.adjacency[g.schema.edge_type_index(r.reverse_name)] = g.adjacency[fwd].transposed();
    }

    // Features: class prototypes on the deep end of the path (scaled one-hot
    // plus jitter), faint noise elsewhere.
    std::string deep_type = spec.label_type;
    {
        auto direction = [&](const std::string& edge) -> std::pair<std::string, std::string> {
            for (const auto& r : spec.relations) {
                if (r.name == edge) return {r.src_type, r.dst_type};
                if (r.reverse_name == edge) return {r.dst_type, r.src_type};
            }
            return {"", ""};
        };
        for (const auto& edge : spec.planted_path) deep_type = direction(edge).first;
    }
    g.features.resize(g.schema.node_types.size());
    for (std::size_t t = 0; t < g.schema.node_types.size(); ++t) {
        const auto& info = g.schema.node_types[t];
        Rng rng(stream_seed(seed, {tag64("features"), tag64(info.name)}));
        Matrix m(info.count, spec.feature_dim);
        if (info.name == deep_type) {
            for (int i = 0; i < m.rows; ++i) {
                m.at(i, class_of(i)) = 1.0;
                for (int c = 0; c < m.cols; ++c) m.at(i, c) += spec.feature_noise * rng.normal();
            }
        } else {
            for (double& v : m.values) v = spec.background_scale * rng.normal();
        }
        g.features[t] = std::move(m);
    }

    // Labels: the class signal read back off the planted aggregation, then
    // flipped with the configured noise rate.
    int label_t = g.schema.node_type_index(spec.label_type);
    int deep_t = g.schema.node_type_index(deep_type);
    Matrix agg = planted_aggregate(g, spec.planted_path, *g.features[deep_t]);
    LabelSet ls;
    ls.num_classes = num_classes;
    ls.labels.resize(g.schema.node_types[label_t].count);
    {
        Rng rng(stream_seed(seed, {tag64("labels")}));
        for (int i = 0; i < agg.rows; ++i) {
            int best = 0;
            for (int c = 1; c < num_classes; ++c)
                if (agg.at(i, c) > agg.at(i, best)) best = c;
            if (spec.label_noise > 0 && rng.uniform() < spec.label_noise)
                best = (best + 1 + static_cast<int>(rng.below(num_classes - 1))) % num_classes;
            ls.labels[i] = best;
        }
    }
    g.labels[spec.label_type] = std::move(ls);

    // Splits.
    {
        Rng rng(stream_seed(seed, {tag64("splits")}));
        int n = g.schema.node_types[label_t].count;
        std::vector<int> idx(n);
        for (int i = 0; i < n; ++i) idx[i] = i;
        rng.shuffle(idx);
        int n_train = std::max(1, static_cast<int>(n * spec.train_frac));
        int n_val = std::max(1, static_cast<int>(n * spec.val_frac));
        NodeSplits s;
        s.target_type = spec.label_type;
        s.train.assign(idx.begin(), idx.begin() + n_train);
        s.val.assign(idx.begin() + n_train, idx.begin() + n_train + n_val);
        s.test.assign(idx.begin() + n_train + n_val, idx.end());
        std::sort(s.train.begin(), s.train.end());
        std::sort(s.val.begin(), s.val.end());
        std::sort(s.test.begin(), s.test.end());
        g.node_splits = std::move(s);
    }

    g.validate();
    return g;
}

Matrix planted_aggregate(const HinGraph& graph, const std::vector<std::string>& path,
                         const Matrix& deep_features) {
    Matrix h = deep_features;
    for (auto it = path.rbegin(); it != path.rend(); ++it) {
        int r = graph.schema.edge_type_index(*it);
        if (r < 0) throw DataError("planted path references unknown edge type '" + *it + "'");
        h = normalized_aggregate(graph.adjacency[r], h);
    }
    return h;
}

std::vector<int> planted_oracle_predictions(const HinGraph& graph, const PlantedSpec& spec) {
    std::string deep_type = spec.label_type;
    for (const auto& edge : spec.planted_path) {
        int r = graph.schema.edge_type_index(edge);
        if (r < 0) throw DataError("planted path references unknown edge type '" + edge + "'");
        deep_type = graph.schema.node_types[graph.schema.edge_types[r].src_type].name;
    }
    int deep_t = graph.schema.node_type_index(deep_type);
    Matrix agg = planted_aggregate(graph, spec.planted_path, *graph.features[deep_t]);
    std::vector<int> pred(agg.rows);
    for (int i = 0; i < agg.rows; ++i) {
        int best = 0;
        for (int c = 1; c < spec.num_classes; ++c)
            if (agg.at(i, c) > agg.at(i, best)) best = c;
        pred[i] = best;
    }
    return pred;
}

}  // namespace mms
