#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mms/derive.hpp"
#include "mms/schedule.hpp"
#include "mms/supernet.hpp"

namespace mms {

enum class Algorithm { PartialMessage, Progressive };

std::string algorithm_token(Algorithm a);
Algorithm algorithm_from_token(const std::string& token);

struct SearchConfig {
    Algorithm algorithm = Algorithm::Progressive;
    StructureKind kind = StructureKind::C2cMetaMultigraph;
    int iterations = 50;        // partial-message driver
    int epochs = 50;            // progressive driver
    double sampling_p = 2.0;    // 1/p of candidates sampled per multi-edge
    double lambda_final = 1.0;
    double beta = 0.9;
    Growth growth = Growth::Linear;
    int warmup_epochs = 5;
    double alpha_lr = 3e-4;
    double omega_lr = 5e-4;
    double weight_decay = 1e-3;
    bool decay_alpha = false;   // weight decay normally applies to omega only
    std::uint64_t seed = 0;
    int depth = 4;
    int hidden_dim = 64;
    int fallback_dim = 32;
    bool include_zero = false;  // add a no-message candidate to every multi-edge

    void validate() const;  // throws ConfigError
};

struct EdgeRecord {
    MultiEdge edge;
    std::vector<double> strengths;  // end of epoch
    int active_count = 0;           // |S| used during the epoch
};

struct EpochRecord {
    int epoch = 0;
    double lambda_e = 0.0;
    double train_loss = 0.0;
    double val_loss = 0.0;
    std::vector<EdgeRecord> edges;
};

struct SearchReport {
    std::string algorithm;
    std::uint64_t seed = 0;
    std::string graph_digest;
    std::vector<EpochRecord> epochs;
    ArchParams final_arch;
    MetaStructure final_structure;
    double final_val_metric = 0.0;  // super-net validation metric at the end
    double wall_clock_seconds = 0.0;

    /// Deterministic JSON; wall clock is reported via the run manifest only.
    std::string to_json_string(const SuperNetTopology& topo, const NetworkSchema& schema) const;
};

struct SearchOutcome {
    ArchParams arch;
    MetaStructure structure;
    SearchReport report;
};

TaskKind detect_task(const HinGraph& graph);

/// Alternating first-order optimization with uniformly sampled binary gates;
/// the structure is derived from the final strengths afterwards.
SearchOutcome pmmm_search(const HinGraph& graph, const SearchConfig& config);

/// Progressive threshold search; the activated sets of the last epoch are
/// the final structure.
SearchOutcome pcmm_search(const HinGraph& graph, const SearchConfig& config);

SearchOutcome run_search(const HinGraph& graph, const SearchConfig& config);

}  // namespace mms
