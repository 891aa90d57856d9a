#pragma once

#include <optional>
#include <string>

#include "mms/evaluate.hpp"
#include "mms/graph.hpp"
#include "mms/planted.hpp"
#include "mms/search.hpp"

namespace mms {

struct DatasetConfig {
    std::string path;
    GraphFormat format = GraphFormat::BundledJson;
};

struct EvaluateConfig {
    RetrainOptions options;
    int num_seeds = 1;
    std::uint64_t seed_base = 0;

    std::vector<std::uint64_t> seeds() const;
};

struct GenerateConfig {
    PlantedSpec spec;
    std::uint64_t seed = 0;
    std::string out = "planted.json";
};

/// One structured config file drives every subcommand; sections it does not
/// need are ignored. Defaults follow the library defaults in SearchConfig.
struct RunConfig {
    std::optional<DatasetConfig> dataset;
    SearchConfig search;
    EvaluateConfig evaluate;
    std::optional<GenerateConfig> generate;
    std::string config_digest;  // canonical-content hash of the file
};

RunConfig load_run_config(const std::string& path);
HinGraph load_dataset(const RunConfig& config);

}  // namespace mms
