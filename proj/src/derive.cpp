#include "mms/derive.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "mms/errors.hpp"
#include "mms/schedule.hpp"

namespace mms {

std::string kind_token(StructureKind kind) {
    switch (kind) {
        case StructureKind::MetaPath: return "meta-path";
        case StructureKind::MetaGraph: return "meta-graph";
        case StructureKind::MetaMultigraph: return "meta-multigraph";
        case StructureKind::C2cMetaMultigraph: return "c2c-meta-multigraph";
    }
    return "meta-multigraph";
}

StructureKind kind_from_token(const std::string& token) {
    if (token == "meta-path") return StructureKind::MetaPath;
    if (token == "meta-graph") return StructureKind::MetaGraph;
    if (token == "meta-multigraph") return StructureKind::MetaMultigraph;
    if (token == "c2c-meta-multigraph") return StructureKind::C2cMetaMultigraph;
    throw ConfigError("unknown structure kind '" + token + "'");
}

bool MetaStructure::contains(int from, int to, const std::string& type) const {
    return std::find(retained.begin(), retained.end(), RetainedEdge{from, to, type}) !=
           retained.end();
}

void MetaStructure::validate(const NetworkSchema* schema) const {
    if (depth < 1) throw DataError("structure: depth must be >= 1");
    std::set<RetainedEdge> seen;
    for (const auto& e : retained) {
        if (!(e.from >= 0 && e.from < e.to && e.to <= depth))
            throw DataError("structure: retained edge endpoints out of range");
        if (!seen.insert(e).second) throw DataError("structure: duplicate retained edge");
        if (schema && e.type != "ID" && e.type != "ZERO" && schema->edge_type_index(e.type) < 0)
            throw DataError("structure: unknown edge type '" + e.type + "'");
    }
    if (kind == StructureKind::MetaPath) {
        for (const auto& e : retained)
            if (e.to - e.from != 1)
                throw DataError("structure: meta-path keeps a residual edge");
        for (int j = 1; j <= depth; ++j) {
            bool any = false;
            for (const auto& e : retained) any = any || (e.from == j - 1 && e.to == j);
            if (!any) throw DataError("structure: meta-path missing hop into node " +
                                      std::to_string(j));
        }
    }
    if (kind == StructureKind::MetaGraph) {
        std::map<std::pair<int, int>, int> per_edge;
        for (const auto& e : retained) per_edge[{e.from, e.to}]++;
        for (const auto& [edge, n] : per_edge)
            if (n != 1) throw DataError("structure: meta-graph with multiple types on one edge");
    }
    // Reachability over message-carrying edges: 0 reaches everything and
    // everything reaches the sink.
    std::vector<std::vector<int>> out(depth + 1), in(depth + 1);
    for (const auto& e : retained) {
        if (e.type == "ZERO") continue;
        out[e.from].push_back(e.to);
        in[e.to].push_back(e.from);
    }
    auto sweep = [&](int start, const std::vector<std::vector<int>>& adj) {
        std::vector<char> seen(depth + 1, 0);
        std::vector<int> stack{start};
        seen[start] = 1;
        while (!stack.empty()) {
            int u = stack.back();
            stack.pop_back();
            for (int v : adj[u])
                if (!seen[v]) {
                    seen[v] = 1;
                    stack.push_back(v);
                }
        }
        return seen;
    };
    auto fwd = sweep(0, out);
    auto bwd = sweep(depth, in);
    for (int j = 0; j <= depth; ++j) {
        if (!fwd[j]) throw DataError("structure: hyper-node " + std::to_string(j) +
                                     " unreachable from the source");
        if (!bwd[j]) throw DataError("structure: hyper-node " + std::to_string(j) +
                                     " cannot reach the sink");
    }
}

MetaStructure derive_structure(StructureKind kind, const ArchParams& arch,
                               const SuperNetTopology& topo, const NetworkSchema& schema,
                               double lambda, double beta) {
    if (lambda < 0.0 || lambda > 1.0) throw ConfigError("lambda out of range");
    if (beta <= 0.0 || beta > 1.0) throw ConfigError("beta out of range");
    MetaStructure s;
    s.kind = kind;
    s.depth = topo.depth;
    s.lambda = lambda;
    s.beta = beta;

    auto keep = [&](const MultiEdge& edge, const std::vector<int>& picks) {
        const auto& cands = topo.candidates.at(edge);
        for (int idx : picks)
            s.retained.push_back(
                {edge.first, edge.second, topo.candidate_name(schema, cands.at(idx))});
    };

    for (const auto& edge : topo.multi_edges) {
        auto strengths = path_strengths(arch, edge);
        switch (kind) {
            case StructureKind::MetaPath:
                if (edge.second - edge.first == 1) keep(edge, {argmax_lowest(strengths)});
                break;  // residual multi-edges dropped
            case StructureKind::MetaGraph:
                keep(edge, {argmax_lowest(strengths)});
                break;
            case StructureKind::MetaMultigraph:
                keep(edge, activated_paths(strengths, lambda));
                break;
            case StructureKind::C2cMetaMultigraph: {
                double lambda_eff = std::pow(beta, topo.depth - edge.second) * lambda;
                keep(edge, activated_paths(strengths, lambda_eff));
                break;
            }
        }
    }

    // Pathological thresholds could leave a hyper-node without a
    // message-carrying input; repair with a pass-through hop.
    for (int j = 1; j <= topo.depth; ++j) {
        bool fed = false;
        for (const auto& e : s.retained) fed = fed || (e.to == j && e.type != "ZERO");
        if (!fed) s.retained.push_back({j - 1, j, "ID"});
    }

    std::sort(s.retained.begin(), s.retained.end());
    s.validate(&schema);
    return s;
}

TensorPtr target_forward(Tape& tape, const MetaStructure& structure, const SuperNet& net) {
    structure.validate(&net.graph().schema);
    if (structure.depth != net.topology().depth)
        throw DataError("target_forward: structure depth does not match the network");
    std::vector<TensorPtr> states(structure.depth + 1);
    states[0] = net.projected_input(tape);
    for (int j = 1; j <= structure.depth; ++j) {
        TensorPtr acc = nullptr;
        for (const auto& e : structure.retained) {
            if (e.to != j || e.type == "ZERO") continue;
            TensorPtr term;
            if (e.type == "ID") {
                term = states[e.from];
            } else {
                int r = net.graph().schema.edge_type_index(e.type);
                term = tape.sparse_aggregate(net.lifted(r), states[e.from]);
            }
            acc = acc ? tape.add(acc, term) : term;
        }
        if (!acc) acc = tape.scale(states[j - 1], 0.0);
        states[j] = acc;
    }
    return states[structure.depth];
}

std::string export_dot(const MetaStructure& structure) {
    auto edges = structure.retained;
    std::sort(edges.begin(), edges.end());
    std::ostringstream out;
    out << "digraph meta_structure {\n";
    out << "  rankdir=LR;\n";
    for (int j = 0; j <= structure.depth; ++j) out << "  H" << j << " [shape=circle];\n";
    for (const auto& e : edges)
        out << "  H" << e.from << " -> H" << e.to << " [label=\"" << e.type << "\"];\n";
    out << "}\n";
    return out.str();
}

std::string MetaStructure::to_json_string() const {
    nlohmann::json j;
    j["kind"] = kind_token(kind);
    j["depth"] = depth;
    j["lambda"] = lambda;
    j["beta"] = beta;
    nlohmann::json edges = nlohmann::json::array();
    auto sorted = retained;
    std::sort(sorted.begin(), sorted.end());
    for (const auto& e : sorted)
        edges.push_back({{"from", e.from}, {"to", e.to}, {"type", e.type}});
    j["retained"] = std::move(edges);
    return j.dump(2);
}

MetaStructure MetaStructure::from_json_string(const std::string& text) {
    MetaStructure s;
    try {
        auto j = nlohmann::json::parse(text);
        s.kind = kind_from_token(j.at("kind").get<std::string>());
        s.depth = j.at("depth").get<int>();
        s.lambda = j.at("lambda").get<double>();
        s.beta = j.at("beta").get<double>();
        for (const auto& e : j.at("retained"))
            s.retained.push_back({e.at("from").get<int>(), e.at("to").get<int>(),
                                  e.at("type").get<std::string>()});
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("structure json: ") + e.what());
    }
    std::sort(s.retained.begin(), s.retained.end());
    s.validate();
    return s;
}

MetaStructure MetaStructure::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return from_json_string(buf.str());
}

void MetaStructure::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write file: " + path);
    out << to_json_string() << "\n";
}

}  // namespace mms
