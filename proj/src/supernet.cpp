#include "mms/supernet.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <json.hpp>

#include "mms/errors.hpp"
#include "mms/util.hpp"

namespace mms {

void SuperNetTopology::validate(const NetworkSchema& schema) const {
    if (depth < 1) throw ConfigError("topology: depth must be >= 1");
    std::set<MultiEdge> seen;
    for (const auto& e : multi_edges) {
        if (!(e.first >= 0 && e.first < e.second && e.second <= depth))
            throw ConfigError("topology: multi-edge endpoints out of order");
        if (!seen.insert(e).second) throw ConfigError("topology: duplicate multi-edge");
        auto it = candidates.find(e);
        if (it == candidates.end() || it->second.empty())
            throw ConfigError("topology: multi-edge without candidates");
        std::set<int> cs;
        for (int c : it->second) {
            if (c != kIdentityCandidate && c != kZeroCandidate &&
                (c < 0 || c >= static_cast<int>(schema.edge_types.size())))
                throw ConfigError("topology: unknown candidate id");
            if (!cs.insert(c).second) throw ConfigError("topology: duplicate candidate");
        }
    }
}

std::string SuperNetTopology::candidate_name(const NetworkSchema& schema, int candidate_id) const {
    if (candidate_id == kIdentityCandidate) return "ID";
    if (candidate_id == kZeroCandidate) return "ZERO";
    return schema.edge_types.at(candidate_id).name;
}

SuperNetTopology make_full_topology(int depth, const NetworkSchema& schema, bool include_zero) {
    SuperNetTopology topo;
    topo.depth = depth;
    for (int j = 1; j <= depth; ++j)
        for (int i = 0; i < j; ++i) {
            MultiEdge e{i, j};
            topo.multi_edges.push_back(e);
            std::vector<int> cands;
            cands.push_back(kIdentityCandidate);
            for (int r = 0; r < static_cast<int>(schema.edge_types.size()); ++r) cands.push_back(r);
            if (include_zero) cands.push_back(kZeroCandidate);
            topo.candidates[e] = std::move(cands);
        }
    std::sort(topo.multi_edges.begin(), topo.multi_edges.end());
    topo.validate(schema);
    return topo;
}

std::vector<double> path_strengths(const ArchParams& arch, const MultiEdge& edge) {
    auto it = arch.alpha.find(edge);
    if (it == arch.alpha.end()) throw ConfigError("path_strengths: unknown multi-edge");
    const auto& a = it->second;
    double mx = *std::max_element(a.begin(), a.end());
    std::vector<double> p(a.size());
    double z = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        p[i] = std::exp(a[i] - mx);
        z += p[i];
    }
    for (double& v : p) v /= z;
    return p;
}

int gate_keep_count(int num_candidates, double sampling_p) {
    int keep = static_cast<int>(std::floor(num_candidates / sampling_p + 0.5));
    return std::max(1, keep);
}

void GateMask::validate(const SuperNetTopology& topo) const {
    for (const auto& e : topo.multi_edges) {
        auto it = mask.find(e);
        if (it == mask.end()) throw ConfigError("gate mask: missing multi-edge");
        int k = static_cast<int>(topo.candidates.at(e).size());
        if (static_cast<int>(it->second.size()) != k)
            throw ConfigError("gate mask: wrong bit count");
        int set = 0;
        for (auto b : it->second) set += b ? 1 : 0;
        if (set != gate_keep_count(k, sampling_p))
            throw ConfigError("gate mask: active count violates sampling proportion");
    }
}

GateMask draw_gate_mask(const SuperNetTopology& topo, double sampling_p, std::uint64_t seed,
                        int iteration, int phase) {
    GateMask gm;
    gm.sampling_p = sampling_p;
    Rng rng(stream_seed(seed, {tag64("gate-mask"), static_cast<std::uint64_t>(iteration),
                               static_cast<std::uint64_t>(phase)}));
    for (const auto& e : topo.multi_edges) {
        int k = static_cast<int>(topo.candidates.at(e).size());
        int keep = gate_keep_count(k, sampling_p);
        std::vector<std::uint8_t> bits(k, 0);
        for (int idx : rng.subset(k, keep)) bits[idx] = 1;
        gm.mask[e] = std::move(bits);
    }
    return gm;
}

std::vector<TensorPtr> NetworkWeights::all_params() const {
    std::vector<TensorPtr> out = projections;
    if (head_weight) out.push_back(head_weight);
    if (head_bias) out.push_back(head_bias);
    return out;
}

namespace {

TypedAdjacency lift_adjacency(const NetworkSchema& schema, const EdgeTypeInfo& e,
                              const TypedAdjacency& a) {
    int total = schema.total_nodes();
    int src_off = schema.block_offset(e.src_type);
    int dst_off = schema.block_offset(e.dst_type);
    TypedAdjacency out;
    out.rows = total;
    out.cols = total;
    out.row_ptr.assign(total + 1, 0);
    out.row_degree.assign(total, 0);
    out.col_idx.reserve(a.col_idx.size());
    for (int i = 0; i < total; ++i) {
        out.row_ptr[i + 1] = out.row_ptr[i];
        int local = i - dst_off;
        if (local >= 0 && local < a.rows) {
            for (int k = a.row_ptr[local]; k < a.row_ptr[local + 1]; ++k)
                out.col_idx.push_back(src_off + a.col_idx[k]);
            out.row_degree[i] = a.row_degree[local];
            out.row_ptr[i + 1] += a.row_degree[local];
        }
    }
    return out;
}

}  // namespace

SuperNet::SuperNet(const HinGraph& graph, SuperNetTopology topology, int hidden_dim,
                   int fallback_dim, TaskKind task, std::uint64_t weight_seed)
    : graph_(&graph), topo_(std::move(topology)), hidden_dim_(hidden_dim), task_(task) {
    topo_.validate(graph.schema);
    if (hidden_dim_ < 1) throw ConfigError("supernet: hidden dimension must be >= 1");

    int num_classes = 0;
    if (task_ == TaskKind::Classification) {
        if (!graph.node_splits) throw DataError("supernet: classification needs node splits");
        target_type_ = graph.schema.node_type_index(graph.node_splits->target_type);
        auto lt = graph.labels.find(graph.node_splits->target_type);
        if (lt == graph.labels.end())
            throw DataError("supernet: no labels for target type '" +
                            graph.node_splits->target_type + "'");
        num_classes = lt->second.num_classes;
    } else {
        if (!graph.link_splits) throw DataError("supernet: recommendation needs link splits");
        link_src_type_ = graph.schema.node_type_index(graph.link_splits->src_type);
        link_dst_type_ = graph.schema.node_type_index(graph.link_splits->dst_type);
    }

    for (std::size_t t = 0; t < graph.schema.node_types.size(); ++t)
        inputs_.push_back(input_features(graph, static_cast<int>(t), fallback_dim));
    for (std::size_t r = 0; r < graph.schema.edge_types.size(); ++r)
        lifted_.push_back(lift_adjacency(graph.schema, graph.schema.edge_types[r], graph.adjacency[r]));

    for (const auto& e : topo_.multi_edges) {
        auto a = Tensor::zeros(1, static_cast<int>(topo_.candidates.at(e).size()), true);
        alphas_[e] = std::move(a);
    }

    Rng rng(stream_seed(weight_seed, {tag64("weights")}));
    auto init = [&rng](int rows, int cols) {
        auto t = Tensor::zeros(rows, cols, true);
        double scale = std::sqrt(2.0 / (rows + cols));
        for (double& v : t->values) v = scale * rng.normal();
        return t;
    };
    for (const auto& m : inputs_) weights_.projections.push_back(init(m.cols, hidden_dim_));
    if (task_ == TaskKind::Classification) {
        weights_.head_weight = init(hidden_dim_, num_classes);
        weights_.head_bias = Tensor::zeros(1, num_classes, true);
    }
}

std::vector<TensorPtr> SuperNet::alpha_params() const {
    std::vector<TensorPtr> out;
    for (const auto& e : topo_.multi_edges) out.push_back(alphas_.at(e));
    return out;
}

ArchParams SuperNet::snapshot_arch() const {
    ArchParams a;
    for (const auto& [edge, t] : alphas_) a.alpha[edge] = t->values;
    return a;
}

void SuperNet::load_arch(const ArchParams& arch) {
    for (auto& [edge, t] : alphas_) {
        auto it = arch.alpha.find(edge);
        if (it == arch.alpha.end() || it->second.size() != t->values.size())
            throw ConfigError("load_arch: shape mismatch");
        t->values = it->second;
    }
}

int SuperNet::global_index(int node_type, int node) const {
    return graph_->schema.block_offset(node_type) + node;
}

int SuperNet::target_offset() const { return graph_->schema.block_offset(target_type_); }

TensorPtr SuperNet::projected_input(Tape& tape) const {
    // ReLU(X_t * Theta_t), one block per node type, stacked over all nodes.
    std::vector<TensorPtr> blocks;
    for (std::size_t t = 0; t < inputs_.size(); ++t) {
        auto x = Tensor::from(inputs_[t]);
        blocks.push_back(tape.relu(tape.matmul(x, weights_.projections[t])));
    }
    return tape.concat_rows(blocks);
}

void SuperNet::zero_inactive_alpha_grads(const ActiveSets& active_sets) {
    for (auto& [edge, t] : alphas_) {
        auto it = active_sets.find(edge);
        if (it == active_sets.end()) continue;
        std::vector<std::uint8_t> keep(t->size(), 0);
        for (int idx : it->second) keep[idx] = 1;
        for (int k = 0; k < t->size(); ++k)
            if (!keep[k]) t->grad[k] = 0.0;
    }
}

namespace {

// Shared forward core. For each multi-edge, sums the selected candidates'
// contributions into the target hyper-node state.
struct EdgePlan {
    std::vector<int> active;   // candidate indices
    double rescale = 1.0;      // multiplies the softmax strength
    bool weighted = true;      // false: unweighted sum (target-net style)
};

TensorPtr forward_core(Tape& tape, const SuperNet& net,
                       const std::map<MultiEdge, EdgePlan>& plans) {
    const auto& topo = net.topology();
    std::vector<TensorPtr> states(topo.depth + 1);
    states[0] = net.projected_input(tape);

    for (int j = 1; j <= topo.depth; ++j) {
        TensorPtr acc = nullptr;
        for (const auto& e : topo.multi_edges) {
            if (e.second != j) continue;
            const auto& plan = plans.at(e);
            const auto& cands = topo.candidates.at(e);
            TensorPtr strengths;
            if (plan.weighted) strengths = tape.softmax(net.alpha_tensor(e), Axis::Rows);
            for (int idx : plan.active) {
                int cand = cands.at(idx);
                if (cand == kZeroCandidate) continue;
                TensorPtr message;
                if (cand == kIdentityCandidate) message = states[e.first];
                else message = tape.sparse_aggregate(net.lifted(cand), states[e.first]);
                TensorPtr term = plan.weighted
                                     ? tape.scale_by_entry(message, strengths, idx, plan.rescale)
                                     : message;
                acc = acc ? tape.add(acc, term) : term;
            }
        }
        if (!acc) acc = tape.scale(states[j - 1], 0.0);  // no incoming messages at all
        states[j] = acc;
    }
    return states[topo.depth];
}

std::map<MultiEdge, EdgePlan> full_plans(const SuperNet& net) {
    std::map<MultiEdge, EdgePlan> plans;
    for (const auto& e : net.topology().multi_edges) {
        EdgePlan p;
        int k = static_cast<int>(net.topology().candidates.at(e).size());
        for (int i = 0; i < k; ++i) p.active.push_back(i);
        plans[e] = std::move(p);
    }
    return plans;
}

}  // namespace

TensorPtr forward_full(Tape& tape, const SuperNet& net) {
    return forward_core(tape, net, full_plans(net));
}

TensorPtr forward_partial(Tape& tape, const SuperNet& net, const GateMask& mask) {
    std::map<MultiEdge, EdgePlan> plans;
    for (const auto& e : net.topology().multi_edges) {
        auto it = mask.mask.find(e);
        if (it == mask.mask.end()) throw ConfigError("forward_partial: mask missing multi-edge");
        EdgePlan p;
        for (std::size_t i = 0; i < it->second.size(); ++i)
            if (it->second[i]) p.active.push_back(static_cast<int>(i));
        if (p.active.empty()) throw ConfigError("forward_partial: empty active set on multi-edge");
        plans[e] = std::move(p);
    }
    return forward_core(tape, net, plans);
}

ActiveSets threshold_active_sets(const SuperNet& net,
                                 const std::map<MultiEdge, double>& thresholds) {
    ActiveSets sets;
    ArchParams arch = net.snapshot_arch();
    for (const auto& e : net.topology().multi_edges) {
        auto strengths = path_strengths(arch, e);
        double tau = thresholds.at(e);
        std::vector<int> act;
        for (std::size_t i = 0; i < strengths.size(); ++i)
            if (strengths[i] >= tau) act.push_back(static_cast<int>(i));
        sets[e] = std::move(act);
    }
    return sets;
}

TensorPtr forward_progressive_sets(Tape& tape, const SuperNet& net, const ActiveSets& active) {
    std::map<MultiEdge, EdgePlan> plans;
    for (const auto& e : net.topology().multi_edges) {
        auto it = active.find(e);
        if (it == active.end() || it->second.empty())
            throw ConfigError("forward_progressive: empty active set on multi-edge");
        EdgePlan p;
        p.active = it->second;
        int k = static_cast<int>(net.topology().candidates.at(e).size());
        p.rescale = static_cast<double>(k) / static_cast<double>(p.active.size());
        plans[e] = std::move(p);
    }
    return forward_core(tape, net, plans);
}

TensorPtr forward_progressive(Tape& tape, const SuperNet& net,
                              const std::map<MultiEdge, double>& thresholds) {
    return forward_progressive_sets(tape, net, threshold_active_sets(net, thresholds));
}

std::string arch_snapshot_json(const SuperNetTopology& topo, const ArchParams& arch,
                               const NetworkSchema& schema) {
    nlohmann::json j;
    j["depth"] = topo.depth;
    nlohmann::json edges = nlohmann::json::array();
    for (const auto& e : topo.multi_edges) {
        nlohmann::json cands = nlohmann::json::array();
        for (int c : topo.candidates.at(e)) cands.push_back(topo.candidate_name(schema, c));
        edges.push_back({{"from", e.first},
                         {"to", e.second},
                         {"candidates", cands},
                         {"alpha", arch.alpha.at(e)},
                         {"strengths", path_strengths(arch, e)}});
    }
    j["multi_edges"] = std::move(edges);
    return j.dump(2);
}

}  // namespace mms
