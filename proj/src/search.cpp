#include "mms/search.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include <json.hpp>

#include "mms/errors.hpp"
#include "mms/evaluate.hpp"
#include "mms/util.hpp"

namespace mms {

std::string algorithm_token(Algorithm a) {
    return a == Algorithm::PartialMessage ? "pmmm" : "pcmm";
}

Algorithm algorithm_from_token(const std::string& token) {
    if (token == "pmmm" || token == "partial-message") return Algorithm::PartialMessage;
    if (token == "pcmm" || token == "progressive") return Algorithm::Progressive;
    throw ConfigError("unknown algorithm '" + token + "'");
}

void SearchConfig::validate() const {
    if (lambda_final < 0.0 || lambda_final > 1.0) throw ConfigError("lambda out of range");
    if (beta <= 0.0 || beta > 1.0) throw ConfigError("beta out of range");
    if (sampling_p < 1.0) throw ConfigError("sampling proportion must be >= 1");
    if (iterations < 1) throw ConfigError("iterations must be >= 1");
    if (epochs < 1) throw ConfigError("epochs must be >= 1");
    if (depth < 1) throw ConfigError("depth must be >= 1");
    if (hidden_dim < 1) throw ConfigError("hidden dimension must be >= 1");
    if (fallback_dim < 1) throw ConfigError("fallback feature dimension must be >= 1");
    if (alpha_lr <= 0 || omega_lr <= 0) throw ConfigError("learning rates must be positive");
    if (weight_decay < 0) throw ConfigError("weight decay must be non-negative");
    if (warmup_epochs < 0) throw ConfigError("warmup epochs must be non-negative");
    if (algorithm == Algorithm::Progressive &&
        (kind == StructureKind::MetaPath || kind == StructureKind::MetaGraph) &&
        lambda_final != 1.0)
        throw ConfigError("meta-path and meta-graph targets require lambda = 1");
}

TaskKind detect_task(const HinGraph& graph) {
    if (graph.node_splits) return TaskKind::Classification;
    if (graph.link_splits) return TaskKind::Recommendation;
    throw DataError("graph carries neither node splits nor link splits");
}

namespace {

enum class SplitSel { Train, Val };

struct Driver {
    Driver(const HinGraph& graph, const SearchConfig& config)
        : config(config),
          task(detect_task(graph)),
          net(graph, make_full_topology(config.depth, graph.schema, config.include_zero),
              config.hidden_dim, config.fallback_dim, task,
              stream_seed(config.seed, {tag64("supernet-init")})),
          omega_opt(net.weights().all_params(),
                    {config.omega_lr, 0.9, 0.999, 1e-8, config.weight_decay}),
          alpha_opt(net.alpha_params(),
                    {config.alpha_lr, 0.9, 0.999, 1e-8,
                     config.decay_alpha ? config.weight_decay : 0.0}) {
        if (task == TaskKind::Classification) {
            const auto& splits = *graph.node_splits;
            labels = &graph.labels.at(splits.target_type);
            if (splits.train.empty() || splits.val.empty())
                throw DataError("search: empty train or validation split");
        } else {
            const auto& ls = *graph.link_splits;
            if (ls.train.pos.empty() || ls.val.pos.empty() || ls.val.neg.empty())
                throw DataError("search: recommendation needs train positives and val pos/neg");
        }
    }

    TensorPtr loss_for(Tape& tape, const TensorPtr& hn, SplitSel sel, int step, int phase) {
        const auto& graph = net.graph();
        if (task == TaskKind::Classification) {
            auto block = tape.slice_rows(hn, net.target_offset(),
                                         graph.schema.node_types[net.target_type()].count);
            auto logits = tape.add_row_bias(tape.matmul(block, net.weights().head_weight),
                                            net.weights().head_bias);
            const auto& rows =
                sel == SplitSel::Train ? graph.node_splits->train : graph.node_splits->val;
            return tape.cross_entropy(logits, labels->labels, rows);
        }
        const auto& ls = *graph.link_splits;
        std::vector<LinkPair> pos, neg;
        if (sel == SplitSel::Train) {
            pos = ls.train.pos;
            neg = sample_negatives(graph, ls, static_cast<int>(pos.size()),
                                   stream_seed(config.seed, {tag64("train-neg"),
                                                             static_cast<std::uint64_t>(step),
                                                             static_cast<std::uint64_t>(phase)}));
        } else {
            pos = ls.val.pos;
            neg = ls.val.neg;
        }
        std::vector<std::pair<int, int>> pairs;
        std::vector<double> targets;
        for (const auto& [u, v] : pos) {
            pairs.push_back({net.global_index(net.link_src_type(), u),
                             net.global_index(net.link_dst_type(), v)});
            targets.push_back(1.0);
        }
        for (const auto& [u, v] : neg) {
            pairs.push_back({net.global_index(net.link_src_type(), u),
                             net.global_index(net.link_dst_type(), v)});
            targets.push_back(0.0);
        }
        return tape.binary_cross_entropy(tape.pairwise_dot(hn, pairs), targets);
    }

    /// Validation metric of the super-net with a given forward output:
    /// accuracy for classification, AUC for recommendation.
    double val_metric(const Matrix& hn) const {
        const auto& graph = net.graph();
        if (task == TaskKind::Classification) {
            return classification_accuracy(hn, graph, net, graph.node_splits->val);
        }
        return link_auc(hn, graph, net, graph.link_splits->val);
    }

    void check_divergence(double loss, int step) {
        if (std::isfinite(loss)) {
            bad_steps = 0;
            return;
        }
        if (++bad_steps >= 3)
            throw DivergenceError("non-finite loss for 3 consecutive steps (step " +
                                  std::to_string(step) + ")");
    }

    const SearchConfig& config;
    TaskKind task;
    SuperNet net;
    Adam omega_opt;
    Adam alpha_opt;
    const LabelSet* labels = nullptr;
    int bad_steps = 0;
};

std::vector<std::vector<std::uint8_t>> alpha_masks(const SuperNetTopology& topo,
                                                   const GateMask& mask) {
    std::vector<std::vector<std::uint8_t>> masks;
    for (const auto& e : topo.multi_edges) masks.push_back(mask.mask.at(e));
    return masks;
}

std::vector<std::vector<std::uint8_t>> alpha_masks(const SuperNetTopology& topo,
                                                   const ActiveSets& active) {
    std::vector<std::vector<std::uint8_t>> masks;
    for (const auto& e : topo.multi_edges) {
        std::vector<std::uint8_t> bits(topo.candidates.at(e).size(), 0);
        for (int idx : active.at(e)) bits[idx] = 1;
        masks.push_back(std::move(bits));
    }
    return masks;
}

ActiveSets mask_to_sets(const SuperNetTopology& topo, const GateMask& mask) {
    ActiveSets sets;
    for (const auto& e : topo.multi_edges) {
        std::vector<int> act;
        const auto& bits = mask.mask.at(e);
        for (std::size_t i = 0; i < bits.size(); ++i)
            if (bits[i]) act.push_back(static_cast<int>(i));
        sets[e] = std::move(act);
    }
    return sets;
}

void record_epoch(SearchReport& report, const Driver& d, int epoch, double lambda_e,
                  double train_loss, double val_loss, const ActiveSets& active) {
    EpochRecord rec;
    rec.epoch = epoch;
    rec.lambda_e = lambda_e;
    rec.train_loss = train_loss;
    rec.val_loss = val_loss;
    ArchParams arch = d.net.snapshot_arch();
    for (const auto& e : d.net.topology().multi_edges) {
        EdgeRecord er;
        er.edge = e;
        er.strengths = path_strengths(arch, e);
        er.active_count = static_cast<int>(active.at(e).size());
        rec.edges.push_back(std::move(er));
    }
    report.epochs.push_back(std::move(rec));
}

MetaStructure structure_from_sets(const SearchConfig& config, const SuperNet& net,
                                  const ActiveSets& sets) {
    MetaStructure s;
    s.kind = config.kind;
    s.depth = net.topology().depth;
    s.lambda = config.lambda_final;
    s.beta = config.beta;
    const auto& topo = net.topology();
    const auto& schema = net.graph().schema;
    for (const auto& e : topo.multi_edges) {
        if (config.kind == StructureKind::MetaPath && e.second - e.first != 1) continue;
        const auto& cands = topo.candidates.at(e);
        for (int idx : sets.at(e))
            s.retained.push_back({e.first, e.second, topo.candidate_name(schema, cands.at(idx))});
    }
    for (int j = 1; j <= s.depth; ++j) {
        bool fed = false;
        for (const auto& e : s.retained) fed = fed || (e.to == j && e.type != "ZERO");
        if (!fed) s.retained.push_back({j - 1, j, "ID"});
    }
    std::sort(s.retained.begin(), s.retained.end());
    s.validate(&schema);
    return s;
}

}  // namespace

SearchOutcome pmmm_search(const HinGraph& graph, const SearchConfig& config) {
    config.validate();
    if (config.algorithm != Algorithm::PartialMessage)
        throw ConfigError("pmmm_search requires the partial-message algorithm");
    auto start = std::chrono::steady_clock::now();

    Driver d(graph, config);
    SearchReport report;
    report.algorithm = algorithm_token(config.algorithm);
    report.seed = config.seed;
    report.graph_digest = graph.digest_hex();

    const auto& topo = d.net.topology();
    for (int t = 1; t <= config.iterations; ++t) {
        // Phase 0: network weights on the training loss through a fresh mask.
        GateMask mask_w = draw_gate_mask(topo, config.sampling_p, config.seed, t, 0);
        Tape tape_w;
        d.omega_opt.zero_grad();
        d.alpha_opt.zero_grad();
        auto train_loss_t = d.loss_for(tape_w, forward_partial(tape_w, d.net, mask_w),
                                       SplitSel::Train, t, 0);
        double train_loss = train_loss_t->scalar();
        d.check_divergence(train_loss, t);
        if (std::isfinite(train_loss)) {
            tape_w.backward(train_loss_t);
            d.omega_opt.step();
        }

        // Phase 1: architecture parameters on the validation loss, new mask.
        GateMask mask_a = draw_gate_mask(topo, config.sampling_p, config.seed, t, 1);
        Tape tape_a;
        d.omega_opt.zero_grad();
        d.alpha_opt.zero_grad();
        auto val_loss_t = d.loss_for(tape_a, forward_partial(tape_a, d.net, mask_a),
                                     SplitSel::Val, t, 1);
        double val_loss = val_loss_t->scalar();
        d.check_divergence(val_loss, t);
        if (std::isfinite(val_loss)) {
            tape_a.backward(val_loss_t);
            d.net.zero_inactive_alpha_grads(mask_to_sets(topo, mask_a));
            d.alpha_opt.step(alpha_masks(topo, mask_a));
        }

        record_epoch(report, d, t, 0.0, train_loss, val_loss, mask_to_sets(topo, mask_a));
    }

    SearchOutcome out;
    out.arch = d.net.snapshot_arch();
    out.structure = derive_structure(config.kind, out.arch, topo, graph.schema,
                                     config.lambda_final, config.beta);
    {
        Tape tape;
        out.report = std::move(report);
        out.report.final_val_metric = d.val_metric(forward_full(tape, d.net)->to_matrix());
    }
    out.report.final_arch = out.arch;
    out.report.final_structure = out.structure;
    out.report.wall_clock_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
}

SearchOutcome pcmm_search(const HinGraph& graph, const SearchConfig& config) {
    config.validate();
    if (config.algorithm != Algorithm::Progressive)
        throw ConfigError("pcmm_search requires the progressive algorithm");
    auto start = std::chrono::steady_clock::now();

    Driver d(graph, config);
    SearchReport report;
    report.algorithm = algorithm_token(config.algorithm);
    report.seed = config.seed;
    report.graph_digest = graph.digest_hex();

    ThresholdSchedule schedule{config.growth, config.lambda_final, config.warmup_epochs};
    const auto& topo = d.net.topology();
    ActiveSets sets;
    for (int e = 1; e <= config.epochs; ++e) {
        double lambda_e = schedule.lambda_at(e, config.epochs);

        // Activated sets from the strengths entering this epoch.
        ArchParams arch = d.net.snapshot_arch();
        sets.clear();
        for (const auto& edge : topo.multi_edges) {
            double lambda_eff = lambda_e;
            if (config.kind == StructureKind::C2cMetaMultigraph)
                lambda_eff = std::pow(config.beta, topo.depth - edge.second) * lambda_e;
            sets[edge] = activated_paths(path_strengths(arch, edge), lambda_eff);
        }

        Tape tape_w;
        d.omega_opt.zero_grad();
        d.alpha_opt.zero_grad();
        auto train_loss_t = d.loss_for(tape_w, forward_progressive_sets(tape_w, d.net, sets),
                                       SplitSel::Train, e, 0);
        double train_loss = train_loss_t->scalar();
        d.check_divergence(train_loss, e);
        if (std::isfinite(train_loss)) {
            tape_w.backward(train_loss_t);
            d.omega_opt.step();
        }

        Tape tape_a;
        d.omega_opt.zero_grad();
        d.alpha_opt.zero_grad();
        auto val_loss_t = d.loss_for(tape_a, forward_progressive_sets(tape_a, d.net, sets),
                                     SplitSel::Val, e, 1);
        double val_loss = val_loss_t->scalar();
        d.check_divergence(val_loss, e);
        if (std::isfinite(val_loss)) {
            tape_a.backward(val_loss_t);
            d.net.zero_inactive_alpha_grads(sets);
            d.alpha_opt.step(alpha_masks(topo, sets));
        }

        record_epoch(report, d, e, lambda_e, train_loss, val_loss, sets);
    }

    SearchOutcome out;
    out.arch = d.net.snapshot_arch();
    // The activated sets of the last epoch are the target-net.
    out.structure = structure_from_sets(config, d.net, sets);
    {
        Tape tape;
        out.report = std::move(report);
        out.report.final_val_metric =
            d.val_metric(forward_progressive_sets(tape, d.net, sets)->to_matrix());
    }
    out.report.final_arch = out.arch;
    out.report.final_structure = out.structure;
    out.report.wall_clock_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
}

SearchOutcome run_search(const HinGraph& graph, const SearchConfig& config) {
    return config.algorithm == Algorithm::PartialMessage ? pmmm_search(graph, config)
                                                         : pcmm_search(graph, config);
}

std::string SearchReport::to_json_string(const SuperNetTopology& topo,
                                         const NetworkSchema& schema) const {
    nlohmann::json j;
    j["algorithm"] = algorithm;
    j["seed"] = seed;
    j["graph_digest"] = graph_digest;
    j["final_val_metric"] = final_val_metric;
    nlohmann::json eps = nlohmann::json::array();
    for (const auto& rec : epochs) {
        nlohmann::json edges = nlohmann::json::array();
        for (const auto& er : rec.edges)
            edges.push_back({{"from", er.edge.first},
                             {"to", er.edge.second},
                             {"strengths", er.strengths},
                             {"active", er.active_count}});
        eps.push_back({{"epoch", rec.epoch},
                       {"lambda", rec.lambda_e},
                       {"train_loss", rec.train_loss},
                       {"val_loss", rec.val_loss},
                       {"edges", std::move(edges)}});
    }
    j["epochs"] = std::move(eps);
    j["final_arch"] = nlohmann::json::parse(arch_snapshot_json(topo, final_arch, schema));
    j["final_structure"] = nlohmann::json::parse(final_structure.to_json_string());
    return j.dump(2);
}

}  // namespace mms
