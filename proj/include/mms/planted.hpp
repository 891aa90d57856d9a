#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mms/graph.hpp"

namespace mms {

/// One bidirectional relation; the generator materializes the forward edge
/// type and its transpose under the reverse name.
struct PlantedRelation {
    std::string name;          // forward edge type, carries src -> dst messages
    std::string reverse_name;  // transpose edge type
    std::string src_type;
    std::string dst_type;
    double density = 0.05;
};

/// Recipe for a synthetic HIN whose labels are, by construction, a
/// deterministic function of features aggregated along one meta-path.
/// Path edge types are wired class-block diagonal so that the aggregate at
/// a labeled node recovers its class prototype; everything else is noise.
struct PlantedSpec {
    std::vector<NodeTypeInfo> node_types;
    std::vector<PlantedRelation> relations;
    /// Edge types from the labeled type outward: the first entry's target
    /// type is label_type, each entry's source type is the next entry's
    /// target type. Aggregation applies them innermost-last.
    std::vector<std::string> planted_path;
    std::string label_type;
    int num_classes = 3;
    double label_noise = 0.0;      // flip probability, must be in [0, 0.5)
    int feature_dim = 8;
    double feature_noise = 0.05;   // jitter on prototype features
    double background_scale = 0.1; // scale of uninformative features
    double train_frac = 0.3;
    double val_frac = 0.3;

    void validate() const;  // throws ConfigError
};

HinGraph generate_planted_hin(std::uint64_t seed, const PlantedSpec& spec);

/// Aggregates features along the planted meta-path: the reference pipeline
/// used both for labeling during generation and as a test-side oracle.
Matrix planted_aggregate(const HinGraph& graph, const std::vector<std::string>& path,
                         const Matrix& deep_features);

/// Oracle classifier: argmax of the planted aggregate over the first
/// num_classes feature dimensions, lowest index on ties.
std::vector<int> planted_oracle_predictions(const HinGraph& graph, const PlantedSpec& spec);

}  // namespace mms
