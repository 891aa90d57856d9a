#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "mms/derive.hpp"
#include "mms/search.hpp"
#include "mms/supernet.hpp"

namespace mms {

/// Macro- and micro-averaged F1. Classes absent from both predictions and
/// ground truth are excluded from the macro mean.
std::pair<double, double> f1_scores(const std::vector<int>& predictions,
                                    const std::vector<int>& labels, int num_classes);

/// Area under the ROC curve with exact tie handling (average ranks).
double roc_auc(const std::vector<double>& scores, const std::vector<int>& labels);

/// Tie-corrected rank correlation over all pairs. Throws on all-equal input.
double kendall_tau(const std::vector<double>& xs, const std::vector<double>& ys);

struct MetricSummary {
    double mean = 0.0;
    double stddev = 0.0;  // sample standard deviation, 0 for a single run
    std::vector<double> per_run;
};

struct EvalResult {
    TaskKind task = TaskKind::Classification;
    std::vector<std::uint64_t> seeds;
    std::map<std::string, MetricSummary> metrics;

    std::string to_json_string() const;
    std::string to_csv() const;  // "metric,mean,std" rows
};

struct RetrainOptions {
    int epochs = 100;
    double lr = 0.01;
    double weight_decay = 1e-3;
    int hidden_dim = 64;
    int fallback_dim = 32;
};

/// Retrains the target-net from scratch once per seed, checkpointing on the
/// validation metric, and reports test metrics across seeds.
EvalResult retrain_and_evaluate(const MetaStructure& structure, const HinGraph& graph,
                                const RetrainOptions& options,
                                const std::vector<std::uint64_t>& seeds);

struct ConsistencyResult {
    std::vector<std::uint64_t> seeds;
    std::vector<std::pair<double, double>> pairs;  // (super-net val, target-net test)
    double kendall = 0.0;

    std::string to_json_string() const;
};

/// Repeats the search over distinct seeds, retrains each result, and
/// correlates super-net validation metrics with target-net test metrics.
ConsistencyResult consistency_experiment(const HinGraph& graph, const SearchConfig& config,
                                         const RetrainOptions& retrain, int n_runs);
ConsistencyResult consistency_experiment(const HinGraph& graph, const SearchConfig& config,
                                         const RetrainOptions& retrain,
                                         const std::vector<std::uint64_t>& seeds);

// Plain-value helpers shared with the search drivers.
std::vector<LinkPair> sample_negatives(const HinGraph& graph, const LinkSplits& links, int count,
                                       std::uint64_t seed);
double classification_accuracy(const Matrix& hn, const HinGraph& graph, const SuperNet& net,
                               const std::vector<int>& rows);
double link_auc(const Matrix& hn, const HinGraph& graph, const SuperNet& net,
                const LinkSplit& split);

}  // namespace mms
