#include "mms/config.hpp"

#include <fstream>

#include <json.hpp>

#include "mms/errors.hpp"
#include "mms/util.hpp"

namespace mms {

using nlohmann::json;

namespace {

// "warmup" may carry its epoch count inline, e.g. "warmup-5".
Growth growth_from_token(const std::string& token, int* warmup_epochs) {
    if (token == "linear") return Growth::Linear;
    if (token == "quadratic") return Growth::Quadratic;
    if (token == "step") return Growth::Step;
    if (token.rfind("warmup", 0) == 0) {
        if (token.size() > 6) {
            if (token[6] != '-') throw ConfigError("unknown growth policy '" + token + "'");
            try {
                *warmup_epochs = std::stoi(token.substr(7));
            } catch (const std::exception&) {
                throw ConfigError("invalid warmup epoch count in '" + token + "'");
            }
        }
        return Growth::Warmup;
    }
    throw ConfigError("unknown growth policy '" + token + "'");
}

template <typename T>
void maybe(const json& j, const char* key, T& out) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(std::string("invalid value for '") + key + "'");
    }
}

void parse_search(const json& j, SearchConfig& s) {
    if (j.contains("algorithm")) s.algorithm = algorithm_from_token(j.at("algorithm").get<std::string>());
    if (j.contains("kind")) s.kind = kind_from_token(j.at("kind").get<std::string>());
    // Per-algorithm default: the partial-message driver derives with a
    // threshold just below the maximum; the progressive one ends at 1.
    if (!j.contains("lambda"))
        s.lambda_final = s.algorithm == Algorithm::PartialMessage ? 0.9 : 1.0;
    maybe(j, "iterations", s.iterations);
    maybe(j, "epochs", s.epochs);
    maybe(j, "sampling_p", s.sampling_p);
    maybe(j, "lambda", s.lambda_final);
    maybe(j, "beta", s.beta);
    if (j.contains("growth"))
        s.growth = growth_from_token(j.at("growth").get<std::string>(), &s.warmup_epochs);
    maybe(j, "warmup_epochs", s.warmup_epochs);
    maybe(j, "alpha_lr", s.alpha_lr);
    maybe(j, "omega_lr", s.omega_lr);
    maybe(j, "weight_decay", s.weight_decay);
    maybe(j, "decay_alpha", s.decay_alpha);
    maybe(j, "seed", s.seed);
    maybe(j, "depth", s.depth);
    maybe(j, "hidden_dim", s.hidden_dim);
    maybe(j, "fallback_dim", s.fallback_dim);
    maybe(j, "include_zero", s.include_zero);
    s.validate();
}

void parse_evaluate(const json& j, EvaluateConfig& e) {
    maybe(j, "epochs", e.options.epochs);
    maybe(j, "lr", e.options.lr);
    maybe(j, "weight_decay", e.options.weight_decay);
    maybe(j, "hidden_dim", e.options.hidden_dim);
    maybe(j, "fallback_dim", e.options.fallback_dim);
    maybe(j, "num_seeds", e.num_seeds);
    maybe(j, "seed_base", e.seed_base);
    if (e.num_seeds < 1) throw ConfigError("evaluate.num_seeds must be >= 1");
    if (e.options.epochs < 1) throw ConfigError("evaluate.epochs must be >= 1");
}

void parse_generate(const json& j, GenerateConfig& g) {
    maybe(j, "seed", g.seed);
    maybe(j, "out", g.out);
    auto& s = g.spec;
    if (j.contains("node_types"))
        for (const auto& t : j.at("node_types"))
            s.node_types.push_back({t.at("name").get<std::string>(), t.at("count").get<int>()});
    if (j.contains("relations"))
        for (const auto& r : j.at("relations")) {
            PlantedRelation rel;
            rel.name = r.at("name").get<std::string>();
            rel.reverse_name = r.at("reverse").get<std::string>();
            rel.src_type = r.at("src").get<std::string>();
            rel.dst_type = r.at("dst").get<std::string>();
            if (r.contains("density")) rel.density = r.at("density").get<double>();
            s.relations.push_back(std::move(rel));
        }
    maybe(j, "planted_path", s.planted_path);
    maybe(j, "label_type", s.label_type);
    maybe(j, "num_classes", s.num_classes);
    maybe(j, "label_noise", s.label_noise);
    maybe(j, "feature_dim", s.feature_dim);
    maybe(j, "feature_noise", s.feature_noise);
    maybe(j, "background_scale", s.background_scale);
    maybe(j, "train_frac", s.train_frac);
    maybe(j, "val_frac", s.val_frac);
    s.validate();
}

}  // namespace

std::vector<std::uint64_t> EvaluateConfig::seeds() const {
    std::vector<std::uint64_t> out;
    for (int i = 0; i < num_seeds; ++i) out.push_back(seed_base + static_cast<std::uint64_t>(i));
    return out;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError(path + ": " + e.what());
    }

    RunConfig config;
    try {
        if (j.contains("dataset")) {
            DatasetConfig d;
            const auto& dj = j.at("dataset");
            d.path = dj.at("path").get<std::string>();
            std::string fmt = dj.value("format", "bundled-json");
            if (fmt == "bundled-json") d.format = GraphFormat::BundledJson;
            else if (fmt == "edge-list") d.format = GraphFormat::EdgeList;
            else throw ConfigError("unknown dataset format '" + fmt + "'");
            config.dataset = std::move(d);
        }
        if (j.contains("search")) parse_search(j.at("search"), config.search);
        if (j.contains("evaluate")) parse_evaluate(j.at("evaluate"), config.evaluate);
        if (j.contains("generate")) {
            GenerateConfig g;
            parse_generate(j.at("generate"), g);
            config.generate = std::move(g);
        }
    } catch (const json::exception& e) {
        throw ConfigError(path + ": " + e.what());
    }

    Fnv1a digest;
    digest.str(j.dump());  // canonical: sorted keys, no whitespace noise
    config.config_digest = digest.hex();
    return config;
}

HinGraph load_dataset(const RunConfig& config) {
    if (!config.dataset) throw ConfigError("config has no dataset section");
    return load_graph(config.dataset->path, config.dataset->format);
}

}  // namespace mms
