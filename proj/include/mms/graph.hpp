#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mms/matrix.hpp"

namespace mms {

/// Type-level description of a heterogeneous network: named node types and
/// directed edge types. An edge type carries messages src_type -> dst_type.
struct NodeTypeInfo {
    std::string name;
    int count = 0;
};

struct EdgeTypeInfo {
    std::string name;
    int src_type = -1;  // index into node_types; message source
    int dst_type = -1;  // index into node_types; message target
};

class NetworkSchema {
public:
    std::vector<NodeTypeInfo> node_types;
    std::vector<EdgeTypeInfo> edge_types;

    int node_type_index(const std::string& name) const;  // -1 if unknown
    int edge_type_index(const std::string& name) const;

    /// Throws DataError on duplicate names, dangling endpoints, non-positive
    /// counts, reserved names, or a fully homogeneous schema.
    void validate() const;

    int total_nodes() const;
    /// Row offset of a node type's block in a stacked all-nodes matrix.
    int block_offset(int node_type) const;
};

/// Sparse adjacency for one edge type, compressed row storage.
/// Row i lists the in-neighbors (source-node indices) of target node i.
struct TypedAdjacency {
    int rows = 0;
    int cols = 0;
    std::vector<int> row_ptr;   // size rows + 1
    std::vector<int> col_idx;   // size nnz, sorted and unique within a row
    std::vector<int> row_degree;

    /// Builds from coordinate pairs (src, dst); duplicates are merged.
    static TypedAdjacency from_pairs(int rows, int cols,
                                     const std::vector<std::pair<int, int>>& src_dst);
    TypedAdjacency transposed() const;
    int nnz() const { return static_cast<int>(col_idx.size()); }
    std::vector<std::pair<int, int>> to_pairs() const;  // (src, dst), row-major order
};

/// Per-node-type labels for node classification. -1 marks an unlabeled node.
struct LabelSet {
    int num_classes = 0;
    std::vector<int> labels;
};

struct NodeSplits {
    std::string target_type;
    std::vector<int> train, val, test;  // node indices within target_type
};

using LinkPair = std::pair<int, int>;

struct LinkSplit {
    std::vector<LinkPair> pos, neg;
};

struct LinkSplits {
    std::string src_type, dst_type;
    LinkSplit train, val, test;
};

/// A heterogeneous information network instance. Immutable after
/// construction; safe to share across concurrent search runs.
struct HinGraph {
    NetworkSchema schema;
    std::vector<TypedAdjacency> adjacency;             // parallel to schema.edge_types
    std::vector<std::optional<Matrix>> features;       // parallel to schema.node_types
    std::map<std::string, LabelSet> labels;            // node-type name -> labels
    std::optional<NodeSplits> node_splits;
    std::optional<LinkSplits> link_splits;

    /// Throws DataError if any structural invariant fails.
    void validate() const;
    std::uint64_t digest() const;
    std::string digest_hex() const;
};

enum class GraphFormat { EdgeList, BundledJson };

HinGraph load_graph(const std::string& path, GraphFormat format);
void save_graph(const HinGraph& graph, const std::string& path);  // bundled-json

/// Mean aggregation: out[i] = mean of h rows over in-neighbors of i.
/// Rows with no stored entries yield zero vectors.
Matrix normalized_aggregate(const TypedAdjacency& adj, const Matrix& h);

/// Deterministic pseudo-random standard-normal features for node types
/// without stored input features. Seeded from the graph digest and the
/// type name, so repeated calls agree byte for byte.
Matrix fallback_features(const HinGraph& graph, int node_type, int dim);

/// Input features for a node type: stored ones, or the seeded fallback.
Matrix input_features(const HinGraph& graph, int node_type, int fallback_dim);

}  // namespace mms
