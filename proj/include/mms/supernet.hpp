#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "mms/adam.hpp"
#include "mms/graph.hpp"
#include "mms/tensor.hpp"

namespace mms {

/// Candidate ids: a non-negative id is a schema edge type; the two reserved
/// ids are the pass-through and (optionally) the no-message candidates.
constexpr int kIdentityCandidate = -1;
constexpr int kZeroCandidate = -2;

using MultiEdge = std::pair<int, int>;  // (i, j) with 0 <= i < j <= depth

/// The searchable DAG: depth + 1 hyper-node states and, per multi-edge, an
/// ordered list of candidate message types.
struct SuperNetTopology {
    int depth = 1;
    std::vector<MultiEdge> multi_edges;
    std::map<MultiEdge, std::vector<int>> candidates;

    void validate(const NetworkSchema& schema) const;
    std::string candidate_name(const NetworkSchema& schema, int candidate_id) const;
};

/// Full DAG over all (i, j) pairs, pass-through first then every schema edge
/// type on each multi-edge.
SuperNetTopology make_full_topology(int depth, const NetworkSchema& schema,
                                    bool include_zero = false);

/// Plain-value snapshot of the architecture parameters.
struct ArchParams {
    std::map<MultiEdge, std::vector<double>> alpha;
};

/// Softmax strengths over one multi-edge's candidates.
std::vector<double> path_strengths(const ArchParams& arch, const MultiEdge& edge);

/// Per-iteration binary activation masks for the partial forward.
struct GateMask {
    std::map<MultiEdge, std::vector<std::uint8_t>> mask;
    double sampling_p = 1.0;

    void validate(const SuperNetTopology& topo) const;
};

/// Active-bit count per multi-edge: max(1, round_half_up(K / p)).
int gate_keep_count(int num_candidates, double sampling_p);

/// Uniform mask draw, deterministic in (seed, iteration, phase).
GateMask draw_gate_mask(const SuperNetTopology& topo, double sampling_p, std::uint64_t seed,
                        int iteration, int phase);

/// Per-node-type projections into the shared hidden space plus the optional
/// classification head.
struct NetworkWeights {
    std::vector<TensorPtr> projections;  // parallel to schema.node_types
    TensorPtr head_weight;               // hidden x num_classes, classification only
    TensorPtr head_bias;                 // 1 x num_classes

    std::vector<TensorPtr> all_params() const;
};

enum class TaskKind { Classification, Recommendation };

/// One search run's state: the immutable graph, lifted per-type operators,
/// architecture parameters as live tensors, and the network weights.
class SuperNet {
public:
    SuperNet(const HinGraph& graph, SuperNetTopology topology, int hidden_dim, int fallback_dim,
             TaskKind task, std::uint64_t weight_seed);

    const HinGraph& graph() const { return *graph_; }
    const SuperNetTopology& topology() const { return topo_; }
    TaskKind task() const { return task_; }
    int hidden_dim() const { return hidden_dim_; }

    std::vector<TensorPtr> alpha_params() const;
    TensorPtr alpha_tensor(const MultiEdge& edge) const { return alphas_.at(edge); }
    NetworkWeights& weights() { return weights_; }
    const NetworkWeights& weights() const { return weights_; }

    ArchParams snapshot_arch() const;
    void load_arch(const ArchParams& arch);

    /// Stacked input features, one block per node type, stored fallbacks
    /// materialized once at construction.
    TensorPtr projected_input(Tape& tape) const;

    int target_type() const { return target_type_; }
    int target_offset() const;
    int link_src_type() const { return link_src_type_; }
    int link_dst_type() const { return link_dst_type_; }
    int global_index(int node_type, int node) const;

    const TypedAdjacency& lifted(int edge_type) const { return lifted_[edge_type]; }

    /// Zeroes gradient entries of candidates outside each multi-edge's
    /// active set (their updates are masked anyway; reports stay clean).
    void zero_inactive_alpha_grads(const std::map<MultiEdge, std::vector<int>>& active_sets);

private:
    const HinGraph* graph_;
    SuperNetTopology topo_;
    int hidden_dim_;
    TaskKind task_;
    int target_type_ = -1;
    int link_src_type_ = -1;
    int link_dst_type_ = -1;
    std::vector<Matrix> inputs_;          // per node type
    std::vector<TypedAdjacency> lifted_;  // per edge type, total x total
    std::map<MultiEdge, TensorPtr> alphas_;
    NetworkWeights weights_;
};

using ActiveSets = std::map<MultiEdge, std::vector<int>>;

/// Weighted sum over every candidate on every multi-edge.
TensorPtr forward_full(Tape& tape, const SuperNet& net);

/// Weighted sum restricted to mask-selected candidates; strengths stay the
/// full softmax values (no renormalization).
TensorPtr forward_partial(Tape& tape, const SuperNet& net, const GateMask& mask);

/// Threshold-selected candidates with strengths rescaled by K / |active|.
TensorPtr forward_progressive(Tape& tape, const SuperNet& net,
                              const std::map<MultiEdge, double>& thresholds);
TensorPtr forward_progressive_sets(Tape& tape, const SuperNet& net, const ActiveSets& active);

/// Active sets implied by per-edge thresholds on current strengths.
ActiveSets threshold_active_sets(const SuperNet& net, const std::map<MultiEdge, double>& thresholds);

/// JSON snapshot of {topology, alpha, strengths}: the per-epoch export.
std::string arch_snapshot_json(const SuperNetTopology& topo, const ArchParams& arch,
                               const NetworkSchema& schema);

}  // namespace mms
