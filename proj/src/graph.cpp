#include "mms/graph.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "mms/errors.hpp"
#include "mms/util.hpp"

namespace mms {

namespace {

// Candidate ids -1/-2 are reserved for the pass-through and no-op
// candidates of the search space; their display names must stay free.
const char* kReservedEdgeNames[] = {"ID", "ZERO"};

}  // namespace

int NetworkSchema::node_type_index(const std::string& name) const {
    for (std::size_t i = 0; i < node_types.size(); ++i)
        if (node_types[i].name == name) return static_cast<int>(i);
    return -1;
}

int NetworkSchema::edge_type_index(const std::string& name) const {
    for (std::size_t i = 0; i < edge_types.size(); ++i)
        if (edge_types[i].name == name) return static_cast<int>(i);
    return -1;
}

void NetworkSchema::validate() const {
    std::set<std::string> names;
    for (const auto& t : node_types) {
        if (t.name.empty()) throw DataError("schema: empty node type name");
        if (!names.insert(t.name).second)
            throw DataError("schema: duplicate node type name '" + t.name + "'");
        if (t.count <= 0)
            throw DataError("schema: node type '" + t.name + "' has non-positive count");
    }
    std::set<std::string> enames;
    for (const auto& e : edge_types) {
        if (e.name.empty()) throw DataError("schema: empty edge type name");
        for (const char* r : kReservedEdgeNames)
            if (e.name == r) throw DataError("schema: edge type name '" + e.name + "' is reserved");
        if (!enames.insert(e.name).second)
            throw DataError("schema: duplicate edge type name '" + e.name + "'");
        if (e.src_type < 0 || e.src_type >= static_cast<int>(node_types.size()) ||
            e.dst_type < 0 || e.dst_type >= static_cast<int>(node_types.size()))
            throw DataError("schema: edge type '" + e.name + "' references unknown node type");
    }
    if (node_types.size() <= 1 && edge_types.size() <= 1)
        throw DataError("schema: network must have multiple node types or multiple edge types");
}

int NetworkSchema::total_nodes() const {
    int n = 0;
    for (const auto& t : node_types) n += t.count;
    return n;
}

int NetworkSchema::block_offset(int node_type) const {
    int off = 0;
    for (int i = 0; i < node_type; ++i) off += node_types[i].count;
    return off;
}

TypedAdjacency TypedAdjacency::from_pairs(int rows, int cols,
                                          const std::vector<std::pair<int, int>>& src_dst) {
    for (const auto& [s, d] : src_dst) {
        if (s < 0 || s >= cols) throw DataError("adjacency: source index out of range");
        if (d < 0 || d >= rows) throw DataError("adjacency: target index out of range");
    }
    std::vector<std::vector<int>> by_row(rows);
    for (const auto& [s, d] : src_dst) by_row[d].push_back(s);

    TypedAdjacency a;
    a.rows = rows;
    a.cols = cols;
    a.row_ptr.assign(rows + 1, 0);
    a.row_degree.assign(rows, 0);
    for (int i = 0; i < rows; ++i) {
        auto& r = by_row[i];
        std::sort(r.begin(), r.end());
        r.erase(std::unique(r.begin(), r.end()), r.end());
        a.row_degree[i] = static_cast<int>(r.size());
        a.row_ptr[i + 1] = a.row_ptr[i] + a.row_degree[i];
        a.col_idx.insert(a.col_idx.end(), r.begin(), r.end());
    }
    return a;
}

TypedAdjacency TypedAdjacency::transposed() const {
    std::vector<std::pair<int, int>> pairs;
    pairs.reserve(col_idx.size());
    for (int i = 0; i < rows; ++i)
        for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k)
            pairs.emplace_back(i, col_idx[k]);  // src<->dst swapped
    return from_pairs(cols, rows, pairs);
}

std::vector<std::pair<int, int>> TypedAdjacency::to_pairs() const {
    std::vector<std::pair<int, int>> pairs;
    pairs.reserve(col_idx.size());
    for (int i = 0; i < rows; ++i)
        for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k)
            pairs.emplace_back(col_idx[k], i);
    return pairs;
}

void HinGraph::validate() const {
    schema.validate();
    if (adjacency.size() != schema.edge_types.size())
        throw DataError("graph: adjacency count does not match edge type count");
    for (std::size_t r = 0; r < adjacency.size(); ++r) {
        const auto& e = schema.edge_types[r];
        const auto& a = adjacency[r];
        if (a.rows != schema.node_types[e.dst_type].count ||
            a.cols != schema.node_types[e.src_type].count)
            throw DataError("graph: adjacency '" + e.name + "' has wrong shape");
        for (int i = 0; i < a.rows; ++i) {
            if (a.row_degree[i] != a.row_ptr[i + 1] - a.row_ptr[i])
                throw DataError("graph: adjacency '" + e.name + "' row degree mismatch");
            for (int k = a.row_ptr[i] + 1; k < a.row_ptr[i + 1]; ++k)
                if (a.col_idx[k] <= a.col_idx[k - 1])
                    throw DataError("graph: adjacency '" + e.name + "' has duplicate entries");
        }
    }
    if (features.size() != schema.node_types.size())
        throw DataError("graph: feature slot count does not match node type count");
    for (std::size_t t = 0; t < features.size(); ++t) {
        if (features[t] && features[t]->rows != schema.node_types[t].count)
            throw DataError("graph: features for '" + schema.node_types[t].name +
                            "' have wrong row count");
    }
    for (const auto& [type_name, ls] : labels) {
        int t = schema.node_type_index(type_name);
        if (t < 0) throw DataError("graph: labels reference unknown node type '" + type_name + "'");
        if (static_cast<int>(ls.labels.size()) != schema.node_types[t].count)
            throw DataError("graph: label vector for '" + type_name + "' has wrong length");
        for (int v : ls.labels)
            if (v != -1 && (v < 0 || v >= ls.num_classes))
                throw DataError("graph: label out of range for '" + type_name + "'");
    }
    if (node_splits) {
        int t = schema.node_type_index(node_splits->target_type);
        if (t < 0) throw DataError("graph: splits reference unknown node type");
        int n = schema.node_types[t].count;
        std::set<int> seen;
        for (const auto* part : {&node_splits->train, &node_splits->val, &node_splits->test}) {
            for (int idx : *part) {
                if (idx < 0 || idx >= n) throw DataError("graph: split index out of range");
                if (!seen.insert(idx).second)
                    throw DataError("graph: split index sets are not disjoint");
            }
        }
    }
    if (link_splits) {
        int st = schema.node_type_index(link_splits->src_type);
        int dt = schema.node_type_index(link_splits->dst_type);
        if (st < 0 || dt < 0) throw DataError("graph: link splits reference unknown node type");
        int ns = schema.node_types[st].count, nd = schema.node_types[dt].count;
        for (const auto* split : {&link_splits->train, &link_splits->val, &link_splits->test})
            for (const auto* side : {&split->pos, &split->neg})
                for (const auto& [u, v] : *side)
                    if (u < 0 || u >= ns || v < 0 || v >= nd)
                        throw DataError("graph: link pair index out of range");
    }
}

std::uint64_t HinGraph::digest() const {
    Fnv1a h;
    h.u64(schema.node_types.size());
    for (const auto& t : schema.node_types) {
        h.str(t.name);
        h.i64(t.count);
    }
    h.u64(schema.edge_types.size());
    for (const auto& e : schema.edge_types) {
        h.str(e.name);
        h.i64(e.src_type);
        h.i64(e.dst_type);
    }
    for (const auto& a : adjacency) {
        h.i64(a.rows);
        h.i64(a.cols);
        for (int i = 0; i <= a.rows; ++i) h.i64(a.row_ptr[i]);
        for (int c : a.col_idx) h.i64(c);
    }
    for (const auto& f : features) {
        h.u64(f.has_value());
        if (f) {
            h.i64(f->rows);
            h.i64(f->cols);
            for (double v : f->values) h.f64(v);
        }
    }
    h.u64(labels.size());
    for (const auto& [name, ls] : labels) {
        h.str(name);
        h.i64(ls.num_classes);
        for (int v : ls.labels) h.i64(v);
    }
    h.u64(node_splits.has_value());
    if (node_splits) {
        h.str(node_splits->target_type);
        for (const auto* part : {&node_splits->train, &node_splits->val, &node_splits->test}) {
            h.u64(part->size());
            for (int idx : *part) h.i64(idx);
        }
    }
    h.u64(link_splits.has_value());
    if (link_splits) {
        h.str(link_splits->src_type);
        h.str(link_splits->dst_type);
        for (const auto* split : {&link_splits->train, &link_splits->val, &link_splits->test})
            for (const auto* side : {&split->pos, &split->neg}) {
                h.u64(side->size());
                for (const auto& [u, v] : *side) {
                    h.i64(u);
                    h.i64(v);
                }
            }
    }
    return h.value();
}

std::string HinGraph::digest_hex() const {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(digest()));
    return std::string(buf);
}

Matrix normalized_aggregate(const TypedAdjacency& adj, const Matrix& h) {
    if (h.rows != adj.cols)
        throw DataError("normalized_aggregate: input has " + std::to_string(h.rows) +
                        " rows, adjacency expects " + std::to_string(adj.cols));
    Matrix out(adj.rows, h.cols);
    for (int i = 0; i < adj.rows; ++i) {
        int deg = adj.row_degree[i];
        if (deg == 0) continue;
        double inv = 1.0 / deg;
        double* dst = out.row(i);
        for (int k = adj.row_ptr[i]; k < adj.row_ptr[i + 1]; ++k) {
            const double* src = h.row(adj.col_idx[k]);
            for (int c = 0; c < h.cols; ++c) dst[c] += src[c];
        }
        for (int c = 0; c < h.cols; ++c) dst[c] *= inv;
    }
    return out;
}

Matrix fallback_features(const HinGraph& graph, int node_type, int dim) {
    if (dim <= 0) throw DataError("fallback_features: dimension must be positive");
    Rng rng(stream_seed(graph.digest(),
                        {tag64("fallback"), tag64(graph.schema.node_types[node_type].name)}));
    Matrix m(graph.schema.node_types[node_type].count, dim);
    for (double& v : m.values) v = rng.normal();
    return m;
}

Matrix input_features(const HinGraph& graph, int node_type, int fallback_dim) {
    if (graph.features[node_type]) return *graph.features[node_type];
    return fallback_features(graph, node_type, fallback_dim);
}

// ---------------------------------------------------------------------------
// Bundled JSON I/O. Key names are part of the stable on-disk format; see
// README for the documented schema.

namespace {

using nlohmann::json;

json graph_to_json(const HinGraph& g) {
    json j;
    json nts = json::array();
    for (const auto& t : g.schema.node_types) nts.push_back({{"name", t.name}, {"count", t.count}});
    json ets = json::array();
    for (const auto& e : g.schema.edge_types)
        ets.push_back({{"name", e.name},
                       {"src", g.schema.node_types[e.src_type].name},
                       {"dst", g.schema.node_types[e.dst_type].name}});
    j["schema"] = {{"node_types", nts}, {"edge_types", ets}};

    json edges = json::object();
    for (std::size_t r = 0; r < g.adjacency.size(); ++r) {
        json pairs = json::array();
        for (const auto& [s, d] : g.adjacency[r].to_pairs()) pairs.push_back({s, d});
        edges[g.schema.edge_types[r].name] = std::move(pairs);
    }
    j["edges"] = std::move(edges);

    json feats = json::object();
    for (std::size_t t = 0; t < g.features.size(); ++t) {
        if (!g.features[t]) continue;
        const Matrix& m = *g.features[t];
        json rows = json::array();
        for (int i = 0; i < m.rows; ++i) {
            json row = json::array();
            for (int c = 0; c < m.cols; ++c) row.push_back(m.at(i, c));
            rows.push_back(std::move(row));
        }
        feats[g.schema.node_types[t].name] = std::move(rows);
    }
    if (!feats.empty()) j["features"] = std::move(feats);

    if (!g.labels.empty()) {
        json labels = json::object();
        for (const auto& [name, ls] : g.labels) {
            json entries = json::array();
            for (std::size_t i = 0; i < ls.labels.size(); ++i)
                if (ls.labels[i] >= 0) entries.push_back({static_cast<int>(i), ls.labels[i]});
            labels[name] = {{"num_classes", ls.num_classes}, {"entries", std::move(entries)}};
        }
        j["labels"] = std::move(labels);
    }

    if (g.node_splits) {
        j["splits"] = {{"target_type", g.node_splits->target_type},
                       {"train", g.node_splits->train},
                       {"val", g.node_splits->val},
                       {"test", g.node_splits->test}};
    }
    if (g.link_splits) {
        auto split_json = [](const LinkSplit& s) {
            json pos = json::array(), neg = json::array();
            for (const auto& [u, v] : s.pos) pos.push_back({u, v});
            for (const auto& [u, v] : s.neg) neg.push_back({u, v});
            return json{{"pos", std::move(pos)}, {"neg", std::move(neg)}};
        };
        j["links"] = {{"src_type", g.link_splits->src_type},
                      {"dst_type", g.link_splits->dst_type},
                      {"train", split_json(g.link_splits->train)},
                      {"val", split_json(g.link_splits->val)},
                      {"test", split_json(g.link_splits->test)}};
    }
    return j;
}

HinGraph graph_from_json(const json& j, const std::string& context) {
    HinGraph g;
    try {
        for (const auto& t : j.at("schema").at("node_types"))
            g.schema.node_types.push_back({t.at("name").get<std::string>(), t.at("count").get<int>()});
        for (const auto& e : j.at("schema").at("edge_types")) {
            EdgeTypeInfo info;
            info.name = e.at("name").get<std::string>();
            info.src_type = g.schema.node_type_index(e.at("src").get<std::string>());
            info.dst_type = g.schema.node_type_index(e.at("dst").get<std::string>());
            if (info.src_type < 0 || info.dst_type < 0)
                throw DataError(context + ": edge type '" + info.name +
                                "' references undeclared node type");
            g.schema.edge_types.push_back(info);
        }
        g.schema.validate();

        g.adjacency.resize(g.schema.edge_types.size());
        const json& edges = j.at("edges");
        for (std::size_t r = 0; r < g.schema.edge_types.size(); ++r) {
            const auto& e = g.schema.edge_types[r];
            if (!edges.contains(e.name))
                throw DataError(context + ": missing edge list for type '" + e.name + "'");
            std::vector<std::pair<int, int>> pairs;
            for (const auto& p : edges.at(e.name))
                pairs.emplace_back(p.at(0).get<int>(), p.at(1).get<int>());
            g.adjacency[r] = TypedAdjacency::from_pairs(g.schema.node_types[e.dst_type].count,
                                                        g.schema.node_types[e.src_type].count, pairs);
        }

        g.features.resize(g.schema.node_types.size());
        if (j.contains("features")) {
            for (const auto& [name, rows] : j.at("features").items()) {
                int t = g.schema.node_type_index(name);
                if (t < 0)
                    throw DataError(context + ": features reference unknown node type '" + name + "'");
                int count = g.schema.node_types[t].count;
                if (static_cast<int>(rows.size()) != count)
                    throw DataError(context + ": features for '" + name + "' have wrong row count");
                int dim = rows.empty() ? 0 : static_cast<int>(rows.at(0).size());
                Matrix m(count, dim);
                for (int i = 0; i < count; ++i) {
                    const auto& row = rows.at(i);
                    if (static_cast<int>(row.size()) != dim)
                        throw DataError(context + ": ragged feature rows for '" + name + "'");
                    for (int c = 0; c < dim; ++c) m.at(i, c) = row.at(c).get<double>();
                }
                g.features[t] = std::move(m);
            }
        }

        if (j.contains("labels")) {
            for (const auto& [name, spec] : j.at("labels").items()) {
                int t = g.schema.node_type_index(name);
                if (t < 0)
                    throw DataError(context + ": labels reference unknown node type '" + name + "'");
                LabelSet ls;
                ls.num_classes = spec.at("num_classes").get<int>();
                ls.labels.assign(g.schema.node_types[t].count, -1);
                for (const auto& entry : spec.at("entries")) {
                    int idx = entry.at(0).get<int>();
                    if (idx < 0 || idx >= static_cast<int>(ls.labels.size()))
                        throw DataError(context + ": label index out of range for '" + name + "'");
                    ls.labels[idx] = entry.at(1).get<int>();
                }
                g.labels[name] = std::move(ls);
            }
        }

        if (j.contains("splits")) {
            NodeSplits s;
            const auto& sj = j.at("splits");
            s.target_type = sj.at("target_type").get<std::string>();
            s.train = sj.at("train").get<std::vector<int>>();
            s.val = sj.at("val").get<std::vector<int>>();
            s.test = sj.at("test").get<std::vector<int>>();
            g.node_splits = std::move(s);
        }

        if (j.contains("links")) {
            LinkSplits s;
            const auto& lj = j.at("links");
            s.src_type = lj.at("src_type").get<std::string>();
            s.dst_type = lj.at("dst_type").get<std::string>();
            auto read_split = [&](const json& part) {
                LinkSplit out;
                for (const auto& p : part.at("pos"))
                    out.pos.emplace_back(p.at(0).get<int>(), p.at(1).get<int>());
                for (const auto& p : part.at("neg"))
                    out.neg.emplace_back(p.at(0).get<int>(), p.at(1).get<int>());
                return out;
            };
            s.train = read_split(lj.at("train"));
            s.val = read_split(lj.at("val"));
            s.test = read_split(lj.at("test"));
            g.link_splits = std::move(s);
        }
    } catch (const json::exception& e) {
        throw DataError(context + ": " + e.what());
    }
    g.validate();
    return g;
}

// ---------------------------------------------------------------------------
// Edge-list format: a header file declaring node/edge types, features,
// labels, and splits, each payload in its own whitespace-separated file.

std::string dirname_of(const std::string& path) {
    auto pos = path.find_last_of('/');
    if (pos == std::string::npos) return ".";
    return path.substr(0, pos);
}

std::vector<std::string> split_ws(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream iss(line);
    std::string tok;
    while (iss >> tok) out.push_back(tok);
    return out;
}

std::ifstream open_or_throw(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open file: " + path);
    return in;
}

std::vector<std::pair<int, int>> read_pair_file(const std::string& path) {
    auto in = open_or_throw(path);
    std::vector<std::pair<int, int>> pairs;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto toks = split_ws(line);
        if (toks.empty() || toks[0][0] == '#') continue;
        if (toks.size() != 2)
            throw DataError(path + ":" + std::to_string(lineno) + ": expected two fields");
        try {
            pairs.emplace_back(std::stoi(toks[0]), std::stoi(toks[1]));
        } catch (const std::exception&) {
            throw DataError(path + ":" + std::to_string(lineno) + ": invalid integer");
        }
    }
    return pairs;
}

std::vector<int> read_index_file(const std::string& path) {
    auto in = open_or_throw(path);
    std::vector<int> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto toks = split_ws(line);
        if (toks.empty() || toks[0][0] == '#') continue;
        for (const auto& t : toks) {
            try {
                out.push_back(std::stoi(t));
            } catch (const std::exception&) {
                throw DataError(path + ":" + std::to_string(lineno) + ": invalid index");
            }
        }
    }
    return out;
}

Matrix read_feature_file(const std::string& path, int expected_rows) {
    auto in = open_or_throw(path);
    std::vector<std::vector<double>> rows;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto toks = split_ws(line);
        if (toks.empty() || toks[0][0] == '#') continue;
        std::vector<double> row;
        for (const auto& t : toks) {
            try {
                row.push_back(std::stod(t));
            } catch (const std::exception&) {
                throw DataError(path + ":" + std::to_string(lineno) + ": invalid float");
            }
        }
        if (!rows.empty() && row.size() != rows.front().size())
            throw DataError(path + ":" + std::to_string(lineno) + ": ragged feature row");
        rows.push_back(std::move(row));
    }
    if (static_cast<int>(rows.size()) != expected_rows)
        throw DataError(path + ": expected " + std::to_string(expected_rows) + " feature rows, got " +
                        std::to_string(rows.size()));
    Matrix m(expected_rows, rows.empty() ? 0 : static_cast<int>(rows.front().size()));
    for (int i = 0; i < m.rows; ++i)
        for (int c = 0; c < m.cols; ++c) m.at(i, c) = rows[i][c];
    return m;
}

HinGraph load_edge_list(const std::string& header_path) {
    auto in = open_or_throw(header_path);
    std::string dir = dirname_of(header_path);

    HinGraph g;
    struct PendingEdge { std::string name, file; };
    std::vector<PendingEdge> pending_edges;
    std::map<std::string, std::string> pending_features;     // type -> file
    std::map<std::string, std::pair<int, std::string>> pending_labels;
    std::map<std::string, std::string> pending_splits;       // train/val/test -> file
    std::map<std::string, std::string> pending_links;        // "train pos" etc -> file
    std::string target_type, link_src, link_dst;

    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto toks = split_ws(line);
        if (toks.empty() || toks[0][0] == '#') continue;
        const std::string where = header_path + ":" + std::to_string(lineno);
        const std::string& kw = toks[0];
        auto need = [&](std::size_t n) {
            if (toks.size() != n)
                throw DataError(where + ": '" + kw + "' expects " + std::to_string(n - 1) +
                                " fields");
        };
        if (kw == "node_type") {
            need(3);
            try {
                g.schema.node_types.push_back({toks[1], std::stoi(toks[2])});
            } catch (const std::exception&) {
                throw DataError(where + ": invalid node count");
            }
        } else if (kw == "edge_type") {
            need(5);
            EdgeTypeInfo e;
            e.name = toks[1];
            e.src_type = g.schema.node_type_index(toks[2]);
            e.dst_type = g.schema.node_type_index(toks[3]);
            if (e.src_type < 0 || e.dst_type < 0)
                throw DataError(where + ": edge type '" + e.name +
                                "' references undeclared node type");
            g.schema.edge_types.push_back(e);
            pending_edges.push_back({e.name, toks[4]});
        } else if (kw == "features") {
            need(3);
            pending_features[toks[1]] = toks[2];
        } else if (kw == "labels") {
            need(4);
            try {
                pending_labels[toks[1]] = {std::stoi(toks[2]), toks[3]};
            } catch (const std::exception&) {
                throw DataError(where + ": invalid class count");
            }
        } else if (kw == "split") {
            need(3);
            if (toks[1] != "train" && toks[1] != "val" && toks[1] != "test")
                throw DataError(where + ": unknown split name '" + toks[1] + "'");
            pending_splits[toks[1]] = toks[2];
        } else if (kw == "target") {
            need(2);
            target_type = toks[1];
        } else if (kw == "link_types") {
            need(3);
            link_src = toks[1];
            link_dst = toks[2];
        } else if (kw == "link") {
            need(4);
            pending_links[toks[1] + " " + toks[2]] = toks[3];
        } else {
            throw DataError(where + ": unknown keyword '" + kw + "'");
        }
    }
    g.schema.validate();

    g.adjacency.resize(g.schema.edge_types.size());
    for (const auto& pe : pending_edges) {
        int r = g.schema.edge_type_index(pe.name);
        const auto& e = g.schema.edge_types[r];
        g.adjacency[r] = TypedAdjacency::from_pairs(g.schema.node_types[e.dst_type].count,
                                                    g.schema.node_types[e.src_type].count,
                                                    read_pair_file(dir + "/" + pe.file));
    }

    g.features.resize(g.schema.node_types.size());
    for (const auto& [type_name, file] : pending_features) {
        int t = g.schema.node_type_index(type_name);
        if (t < 0)
            throw DataError(header_path + ": features reference unknown node type '" + type_name + "'");
        g.features[t] = read_feature_file(dir + "/" + file, g.schema.node_types[t].count);
    }

    for (const auto& [type_name, spec] : pending_labels) {
        int t = g.schema.node_type_index(type_name);
        if (t < 0)
            throw DataError(header_path + ": labels reference unknown node type '" + type_name + "'");
        LabelSet ls;
        ls.num_classes = spec.first;
        ls.labels.assign(g.schema.node_types[t].count, -1);
        for (const auto& [node, cls] : read_pair_file(dir + "/" + spec.second)) {
            if (node < 0 || node >= static_cast<int>(ls.labels.size()))
                throw DataError(header_path + ": label node index out of range for '" + type_name + "'");
            ls.labels[node] = cls;
        }
        g.labels[type_name] = std::move(ls);
    }

    if (!pending_splits.empty()) {
        NodeSplits s;
        s.target_type = !target_type.empty()
                            ? target_type
                            : (g.labels.size() == 1 ? g.labels.begin()->first : std::string());
        if (s.target_type.empty())
            throw DataError(header_path + ": splits present but no target node type declared");
        for (const auto& [name, file] : pending_splits) {
            auto idx = read_index_file(dir + "/" + file);
            if (name == "train") s.train = idx;
            else if (name == "val") s.val = idx;
            else s.test = idx;
        }
        g.node_splits = std::move(s);
    }

    if (!pending_links.empty()) {
        if (link_src.empty() || link_dst.empty())
            throw DataError(header_path + ": link files present but no link_types declared");
        LinkSplits s;
        s.src_type = link_src;
        s.dst_type = link_dst;
        for (const auto& [key, file] : pending_links) {
            auto pairs = read_pair_file(dir + "/" + file);
            LinkSplit* split = nullptr;
            if (key.rfind("train", 0) == 0) split = &s.train;
            else if (key.rfind("val", 0) == 0) split = &s.val;
            else if (key.rfind("test", 0) == 0) split = &s.test;
            else throw DataError(header_path + ": unknown link split '" + key + "'");
            if (key.find(" pos") != std::string::npos) split->pos = pairs;
            else if (key.find(" neg") != std::string::npos) split->neg = pairs;
            else throw DataError(header_path + ": link side must be pos or neg");
        }
        g.link_splits = std::move(s);
    }

    g.validate();
    return g;
}

}  // namespace

HinGraph load_graph(const std::string& path, GraphFormat format) {
    if (format == GraphFormat::EdgeList) return load_edge_list(path);
    auto in = open_or_throw(path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw DataError(path + ": " + e.what());
    }
    return graph_from_json(j, path);
}

void save_graph(const HinGraph& graph, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write file: " + path);
    out << graph_to_json(graph).dump(2) << "\n";
}

}  // namespace mms
