#pragma once

#include <string>
#include <vector>

#include "mms/config.hpp"

namespace mms {

inline constexpr const char* kToolVersion = "0.1.0";

// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;       // unexpected failure
inline constexpr int kExitConfig = 2;      // bad configuration
inline constexpr int kExitData = 3;        // unreadable or invalid data
inline constexpr int kExitDivergence = 4;  // non-finite optimization

struct RunManifest {
    std::string tool_version = kToolVersion;
    std::string created_at;  // ISO 8601 UTC; the only timestamped output
    std::string config_digest;
    std::string graph_digest;
    std::vector<std::uint64_t> seeds;
    std::vector<std::string> outputs;
    std::string status = "running";
    double wall_clock_seconds = 0.0;

    void write(const std::string& out_dir) const;
};

struct SearchCliOptions {
    int seeds = 1;                  // independent search runs
    std::string select = "best-val";
    int jobs = 1;                   // seed-level parallelism
};

/// search: writes report.json, structure.json, structure.dot, manifest.json.
int cmd_search(const std::string& config_path, const std::string& out_dir,
               const SearchCliOptions& options = {});

/// evaluate: retrains a stored structure; writes result.json, manifest.json.
int cmd_evaluate(const std::string& structure_path, const std::string& config_path,
                 const std::string& out_dir);

/// consistency: repeated search + retrain; writes result.json, manifest.json.
int cmd_consistency(const std::string& config_path, int n_runs, const std::string& out_dir);

/// derive: re-prunes a stored report's final strengths into a new kind.
int cmd_derive(const std::string& report_path, const std::string& config_path,
               const std::string& kind_token_str, double lambda, double beta,
               const std::string& out_dir);

/// generate: writes the planted synthetic graph named by the config.
int cmd_generate(const std::string& config_path);

/// export-dot: renders a stored structure; empty out path prints to stdout.
int cmd_export_dot(const std::string& structure_path, const std::string& out_path);

}  // namespace mms
