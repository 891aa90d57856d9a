#include "mms/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include <json.hpp>

#include "mms/errors.hpp"
#include "mms/util.hpp"

namespace mms {

std::pair<double, double> f1_scores(const std::vector<int>& predictions,
                                    const std::vector<int>& labels, int num_classes) {
    if (predictions.empty() || predictions.size() != labels.size())
        throw std::invalid_argument("f1_scores: empty or mismatched inputs");
    for (std::size_t i = 0; i < labels.size(); ++i)
        if (labels[i] < 0 || labels[i] >= num_classes || predictions[i] < 0 ||
            predictions[i] >= num_classes)
            throw std::invalid_argument("f1_scores: class out of range");

    std::vector<double> tp(num_classes, 0), fp(num_classes, 0), fn(num_classes, 0);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (predictions[i] == labels[i]) {
            tp[labels[i]] += 1;
        } else {
            fp[predictions[i]] += 1;
            fn[labels[i]] += 1;
        }
    }
    double macro = 0.0;
    int present = 0;
    for (int c = 0; c < num_classes; ++c) {
        if (tp[c] + fp[c] + fn[c] == 0) continue;  // class absent everywhere
        macro += 2 * tp[c] / (2 * tp[c] + fp[c] + fn[c]);
        ++present;
    }
    macro /= present;
    double tp_all = std::accumulate(tp.begin(), tp.end(), 0.0);
    double fp_all = std::accumulate(fp.begin(), fp.end(), 0.0);
    double fn_all = std::accumulate(fn.begin(), fn.end(), 0.0);
    double micro = tp_all / (tp_all + 0.5 * (fp_all + fn_all));
    return {macro, micro};
}

double roc_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
    if (scores.size() != labels.size() || scores.empty())
        throw std::invalid_argument("roc_auc: empty or mismatched inputs");
    std::size_t n_pos = 0;
    for (int y : labels) {
        if (y != 0 && y != 1) throw std::invalid_argument("roc_auc: labels must be 0/1");
        n_pos += y;
    }
    std::size_t n_neg = scores.size() - n_pos;
    if (n_pos == 0 || n_neg == 0) throw std::invalid_argument("roc_auc: both classes required");

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
    // Average ranks across ties give exact half credit per tied pair.
    double rank_sum_pos = 0.0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() && scores[order[j + 1]] == scores[order[i]]) ++j;
        double avg_rank = 0.5 * (i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k)
            if (labels[order[k]]) rank_sum_pos += avg_rank;
        i = j + 1;
    }
    double u = rank_sum_pos - static_cast<double>(n_pos) * (n_pos + 1) / 2.0;
    return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

double kendall_tau(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size() || xs.size() < 2)
        throw std::invalid_argument("kendall_tau: need at least two paired values");
    long long concordant = 0, discordant = 0, ties_x = 0, ties_y = 0;
    const std::size_t n = xs.size();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            double dx = xs[i] - xs[j], dy = ys[i] - ys[j];
            if (dx == 0 && dy == 0) {
                ++ties_x;
                ++ties_y;
            } else if (dx == 0) {
                ++ties_x;
            } else if (dy == 0) {
                ++ties_y;
            } else if ((dx > 0) == (dy > 0)) {
                ++concordant;
            } else {
                ++discordant;
            }
        }
    long long n0 = static_cast<long long>(n) * (n - 1) / 2;
    double denom_x = static_cast<double>(n0 - ties_x);
    double denom_y = static_cast<double>(n0 - ties_y);
    if (denom_x == 0 || denom_y == 0)
        throw std::invalid_argument("kendall_tau: one side is constant");
    return (concordant - discordant) / std::sqrt(denom_x * denom_y);
}

std::vector<LinkPair> sample_negatives(const HinGraph& graph, const LinkSplits& links, int count,
                                       std::uint64_t seed) {
    int n_src = graph.schema.node_types[graph.schema.node_type_index(links.src_type)].count;
    int n_dst = graph.schema.node_types[graph.schema.node_type_index(links.dst_type)].count;
    std::set<LinkPair> known;
    for (const auto* split : {&links.train, &links.val, &links.test})
        known.insert(split->pos.begin(), split->pos.end());
    if (static_cast<long long>(known.size()) >= static_cast<long long>(n_src) * n_dst)
        throw DataError("sample_negatives: no non-edges available");
    Rng rng(seed);
    std::vector<LinkPair> out;
    out.reserve(count);
    while (static_cast<int>(out.size()) < count) {
        LinkPair cand{static_cast<int>(rng.below(n_src)), static_cast<int>(rng.below(n_dst))};
        if (known.count(cand)) continue;
        out.push_back(cand);
    }
    return out;
}

namespace {

std::vector<int> head_predictions(const Matrix& hn, const HinGraph& graph, const SuperNet& net) {
    const auto& w = *net.weights().head_weight;
    const auto& b = *net.weights().head_bias;
    int offset = net.target_offset();
    int count = graph.schema.node_types[net.target_type()].count;
    std::vector<int> pred(count);
    for (int i = 0; i < count; ++i) {
        int best = 0;
        double best_v = -1e300;
        for (int c = 0; c < w.cols; ++c) {
            double v = b.values[c];
            for (int k = 0; k < w.rows; ++k) v += hn.at(offset + i, k) * w.at(k, c);
            if (v > best_v) {
                best_v = v;
                best = c;
            }
        }
        pred[i] = best;
    }
    return pred;
}

std::vector<double> link_scores(const Matrix& hn, const std::vector<LinkPair>& pairs,
                                int offset_u, int offset_v) {
    std::vector<double> out;
    out.reserve(pairs.size());
    for (const auto& [u, v] : pairs) {
        double s = 0.0;
        for (int c = 0; c < hn.cols; ++c) s += hn.at(offset_u + u, c) * hn.at(offset_v + v, c);
        out.push_back(s);
    }
    return out;
}

}  // namespace

double classification_accuracy(const Matrix& hn, const HinGraph& graph, const SuperNet& net,
                               const std::vector<int>& rows) {
    auto pred = head_predictions(hn, graph, net);
    const auto& labels = graph.labels.at(graph.node_splits->target_type).labels;
    int hit = 0;
    for (int r : rows) hit += pred[r] == labels[r] ? 1 : 0;
    return rows.empty() ? 0.0 : static_cast<double>(hit) / rows.size();
}

double link_auc(const Matrix& hn, const HinGraph& graph, const SuperNet& net,
                const LinkSplit& split) {
    int off_u = graph.schema.block_offset(net.link_src_type());
    int off_v = graph.schema.block_offset(net.link_dst_type());
    std::vector<double> scores = link_scores(hn, split.pos, off_u, off_v);
    auto neg_scores = link_scores(hn, split.neg, off_u, off_v);
    scores.insert(scores.end(), neg_scores.begin(), neg_scores.end());
    std::vector<int> labels(split.pos.size(), 1);
    labels.insert(labels.end(), split.neg.size(), 0);
    return roc_auc(scores, labels);
}

namespace {

MetricSummary summarize(std::vector<double> values) {
    MetricSummary s;
    s.per_run = values;
    for (double v : values) s.mean += v;
    s.mean /= values.size();
    if (values.size() > 1) {
        double acc = 0.0;
        for (double v : values) acc += (v - s.mean) * (v - s.mean);
        s.stddev = std::sqrt(acc / (values.size() - 1));
    }
    return s;
}

struct RunMetrics {
    std::map<std::string, double> values;
};

RunMetrics retrain_once(const MetaStructure& structure, const HinGraph& graph,
                        const RetrainOptions& options, std::uint64_t seed) {
    TaskKind task = detect_task(graph);
    SuperNet net(graph, make_full_topology(structure.depth, graph.schema), options.hidden_dim,
                 options.fallback_dim, task, stream_seed(seed, {tag64("retrain-init")}));
    Adam opt(net.weights().all_params(), {options.lr, 0.9, 0.999, 1e-8, options.weight_decay});

    const LabelSet* labels = task == TaskKind::Classification
                                 ? &graph.labels.at(graph.node_splits->target_type)
                                 : nullptr;

    auto forward_matrix = [&]() {
        Tape tape;
        return target_forward(tape, structure, net)->to_matrix();
    };

    double best_val = -1e300;
    std::vector<std::vector<double>> best_weights;
    auto snapshot = [&]() {
        best_weights.clear();
        for (const auto& p : net.weights().all_params()) best_weights.push_back(p->values);
    };
    auto restore = [&]() {
        auto params = net.weights().all_params();
        for (std::size_t i = 0; i < params.size(); ++i) params[i]->values = best_weights[i];
    };

    int bad_steps = 0;
    bool any_finite = false;
    for (int epoch = 1; epoch <= options.epochs; ++epoch) {
        Tape tape;
        opt.zero_grad();
        auto hn = target_forward(tape, structure, net);
        TensorPtr loss_t;
        if (task == TaskKind::Classification) {
            auto block = tape.slice_rows(hn, net.target_offset(),
                                         graph.schema.node_types[net.target_type()].count);
            auto logits = tape.add_row_bias(tape.matmul(block, net.weights().head_weight),
                                            net.weights().head_bias);
            loss_t = tape.cross_entropy(logits, labels->labels, graph.node_splits->train);
        } else {
            const auto& ls = *graph.link_splits;
            auto neg = sample_negatives(graph, ls, static_cast<int>(ls.train.pos.size()),
                                        stream_seed(seed, {tag64("retrain-neg"),
                                                           static_cast<std::uint64_t>(epoch)}));
            std::vector<std::pair<int, int>> pairs;
            std::vector<double> targets;
            for (const auto& [u, v] : ls.train.pos) {
                pairs.push_back({net.global_index(net.link_src_type(), u),
                                 net.global_index(net.link_dst_type(), v)});
                targets.push_back(1.0);
            }
            for (const auto& [u, v] : neg) {
                pairs.push_back({net.global_index(net.link_src_type(), u),
                                 net.global_index(net.link_dst_type(), v)});
                targets.push_back(0.0);
            }
            loss_t = tape.binary_cross_entropy(tape.pairwise_dot(hn, pairs), targets);
        }
        double loss = loss_t->scalar();
        if (!std::isfinite(loss)) {
            if (++bad_steps >= 3)
                throw DivergenceError("retraining diverged at epoch " + std::to_string(epoch));
            continue;
        }
        bad_steps = 0;
        any_finite = true;
        tape.backward(loss_t);
        opt.step();

        Matrix hn_now = forward_matrix();
        double val = task == TaskKind::Classification
                         ? classification_accuracy(hn_now, graph, net, graph.node_splits->val)
                         : link_auc(hn_now, graph, net, graph.link_splits->val);
        if (val > best_val) {
            best_val = val;
            snapshot();
        }
    }
    if (!any_finite) throw DivergenceError("retraining never produced a finite loss");
    if (best_weights.empty()) snapshot();
    restore();

    RunMetrics out;
    Matrix hn = forward_matrix();
    if (task == TaskKind::Classification) {
        auto pred = head_predictions(hn, graph, net);
        std::vector<int> test_pred, test_true;
        for (int r : graph.node_splits->test) {
            test_pred.push_back(pred[r]);
            test_true.push_back(labels->labels[r]);
        }
        auto [macro, micro] = f1_scores(test_pred, test_true, labels->num_classes);
        int hit = 0;
        for (std::size_t i = 0; i < test_pred.size(); ++i)
            hit += test_pred[i] == test_true[i] ? 1 : 0;
        out.values["macro_f1"] = macro;
        out.values["micro_f1"] = micro;
        out.values["accuracy"] = static_cast<double>(hit) / test_pred.size();
    } else {
        out.values["auc"] = link_auc(hn, graph, net, graph.link_splits->test);
    }
    out.values["val_metric"] = best_val;
    return out;
}

}  // namespace

EvalResult retrain_and_evaluate(const MetaStructure& structure, const HinGraph& graph,
                                const RetrainOptions& options,
                                const std::vector<std::uint64_t>& seeds) {
    if (seeds.empty()) throw ConfigError("retrain_and_evaluate: need at least one seed");
    structure.validate(&graph.schema);
    EvalResult result;
    result.task = detect_task(graph);
    result.seeds = seeds;
    std::map<std::string, std::vector<double>> per_metric;
    for (std::uint64_t seed : seeds) {
        auto run = retrain_once(structure, graph, options, seed);
        for (const auto& [name, value] : run.values) per_metric[name].push_back(value);
    }
    for (auto& [name, values] : per_metric) result.metrics[name] = summarize(std::move(values));
    return result;
}

ConsistencyResult consistency_experiment(const HinGraph& graph, const SearchConfig& config,
                                         const RetrainOptions& retrain, int n_runs) {
    if (n_runs < 2) throw ConfigError("consistency experiment needs at least 2 runs");
    std::vector<std::uint64_t> seeds;
    for (int i = 0; i < n_runs; ++i) seeds.push_back(config.seed + static_cast<std::uint64_t>(i));
    return consistency_experiment(graph, config, retrain, seeds);
}

ConsistencyResult consistency_experiment(const HinGraph& graph, const SearchConfig& config,
                                         const RetrainOptions& retrain,
                                         const std::vector<std::uint64_t>& seeds) {
    if (seeds.size() < 2) throw ConfigError("consistency experiment needs at least 2 runs");
    ConsistencyResult result;
    result.seeds = seeds;
    for (std::uint64_t seed : seeds) {
        SearchConfig run_config = config;
        run_config.seed = seed;
        auto outcome = run_search(graph, run_config);
        auto eval = retrain_and_evaluate(outcome.structure, graph, retrain, {seed});
        double test_metric = eval.task == TaskKind::Classification
                                 ? eval.metrics.at("accuracy").mean
                                 : eval.metrics.at("auc").mean;
        result.pairs.emplace_back(outcome.report.final_val_metric, test_metric);
    }
    std::vector<double> xs, ys;
    for (const auto& [x, y] : result.pairs) {
        xs.push_back(x);
        ys.push_back(y);
    }
    try {
        result.kendall = kendall_tau(xs, ys);
    } catch (const std::invalid_argument& e) {
        throw DataError(std::string("consistency experiment degenerate: ") + e.what());
    }
    return result;
}

std::string EvalResult::to_json_string() const {
    nlohmann::json j;
    j["task"] = task == TaskKind::Classification ? "classification" : "recommendation";
    j["seeds"] = seeds;
    nlohmann::json metrics_json = nlohmann::json::object();
    for (const auto& [name, s] : metrics)
        metrics_json[name] = {{"mean", s.mean}, {"std", s.stddev}, {"per_run", s.per_run}};
    j["metrics"] = std::move(metrics_json);
    return j.dump(2);
}

std::string EvalResult::to_csv() const {
    std::ostringstream out;
    out << "metric,mean,std\n";
    for (const auto& [name, s] : metrics) out << name << "," << s.mean << "," << s.stddev << "\n";
    return out.str();
}

std::string ConsistencyResult::to_json_string() const {
    nlohmann::json j;
    j["seeds"] = seeds;
    nlohmann::json pairs_json = nlohmann::json::array();
    for (const auto& [sup, tgt] : pairs) pairs_json.push_back({sup, tgt});
    j["pairs"] = std::move(pairs_json);
    j["kendall"] = kendall;
    return j.dump(2);
}

}  // namespace mms
