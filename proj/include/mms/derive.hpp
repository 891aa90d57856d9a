#pragma once

#include <string>
#include <vector>

#include "mms/supernet.hpp"

namespace mms {

enum class StructureKind { MetaPath, MetaGraph, MetaMultigraph, C2cMetaMultigraph };

std::string kind_token(StructureKind kind);
StructureKind kind_from_token(const std::string& token);

struct RetainedEdge {
    int from = 0;
    int to = 0;
    std::string type;  // edge type name; "ID" pass-through, "ZERO" no message

    bool operator<(const RetainedEdge& o) const {
        if (from != o.from) return from < o.from;
        if (to != o.to) return to < o.to;
        return type < o.type;
    }
    bool operator==(const RetainedEdge& o) const {
        return from == o.from && to == o.to && type == o.type;
    }
};

/// A derived target architecture: the retained message-passing steps.
struct MetaStructure {
    StructureKind kind = StructureKind::MetaMultigraph;
    int depth = 1;
    std::vector<RetainedEdge> retained;  // sorted
    double lambda = 0.9;
    double beta = 0.9;

    bool contains(int from, int to, const std::string& type) const;
    /// Structural invariants: edge bounds, kind shape rules, reachability.
    /// With a schema, also checks that edge type names resolve.
    void validate(const NetworkSchema* schema = nullptr) const;

    std::string to_json_string() const;
    static MetaStructure from_json_string(const std::string& text);
    static MetaStructure load(const std::string& path);
    void save(const std::string& path) const;
};

/// Threshold-based pruning of the trained strengths into one of the four
/// target shapes. Pure function of (strengths, kind, lambda, beta).
MetaStructure derive_structure(StructureKind kind, const ArchParams& arch,
                               const SuperNetTopology& topo, const NetworkSchema& schema,
                               double lambda, double beta);

/// Unweighted sum over retained message-passing steps.
TensorPtr target_forward(Tape& tape, const MetaStructure& structure, const SuperNet& net);

/// Graphviz rendering, deterministic byte-for-byte.
std::string export_dot(const MetaStructure& structure);

}  // namespace mms
