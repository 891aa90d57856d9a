#include "mms/cli.hpp"

#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include <json.hpp>

#include "mms/errors.hpp"
#include "mms/util.hpp"

namespace mms {

namespace fs = std::filesystem;

namespace {

std::string utc_now() {
    auto now = std::chrono::system_clock::now();
    std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::tm tm_utc{};
    gmtime_r(&t, &tm_utc);
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    return std::string(buf);
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write file: " + path);
    out << text;
    if (!text.empty() && text.back() != '\n') out << "\n";
}

int report_error(const std::exception& e) {
    const char* category = "internal";
    int code = kExitError;
    if (dynamic_cast<const ConfigError*>(&e)) {
        category = "config";
        code = kExitConfig;
    } else if (dynamic_cast<const DataError*>(&e)) {
        category = "data";
        code = kExitData;
    } else if (dynamic_cast<const DivergenceError*>(&e)) {
        category = "divergence";
        code = kExitDivergence;
    } else if (dynamic_cast<const std::invalid_argument*>(&e)) {
        category = "data";
        code = kExitData;
    }
    std::cerr << "error[" << category << "]: " << e.what() << std::endl;
    return code;
}

/// Runs one search per seed, optionally in parallel; results come back in
/// seed order regardless of scheduling. The first failure is rethrown.
std::vector<SearchOutcome> run_seeds(const HinGraph& graph, const SearchConfig& base,
                                     const std::vector<std::uint64_t>& seeds, int jobs) {
    std::vector<SearchOutcome> results(seeds.size());
    std::vector<std::exception_ptr> errors(seeds.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            std::size_t k = next.fetch_add(1);
            if (k >= seeds.size()) return;
            SearchConfig cfg = base;
            cfg.seed = seeds[k];
            try {
                results[k] = run_search(graph, cfg);
            } catch (...) {
                errors[k] = std::current_exception();
            }
        }
    };
    int n_threads = std::max(1, std::min<int>(jobs, static_cast<int>(seeds.size())));
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    for (auto& err : errors)
        if (err) std::rethrow_exception(err);
    return results;
}

}  // namespace

void RunManifest::write(const std::string& out_dir) const {
    nlohmann::json j;
    j["tool"] = "mmsearch";
    j["version"] = tool_version;
    j["created_at"] = created_at;
    j["config_digest"] = config_digest;
    j["graph_digest"] = graph_digest;
    j["seeds"] = seeds;
    j["outputs"] = outputs;
    j["status"] = status;
    j["wall_clock_seconds"] = wall_clock_seconds;
    write_text((fs::path(out_dir) / "manifest.json").string(), j.dump(2));
}

int cmd_search(const std::string& config_path, const std::string& out_dir,
               const SearchCliOptions& options) {
    auto start = std::chrono::steady_clock::now();
    try {
        if (options.seeds < 1) throw ConfigError("--seeds must be >= 1");
        if (options.jobs < 1) throw ConfigError("--jobs must be >= 1");
        if (!options.select.empty() && options.select != "best-val")
            throw ConfigError("unknown --select policy '" + options.select + "'");
        RunConfig config = load_run_config(config_path);
        HinGraph graph = load_dataset(config);
        fs::create_directories(out_dir);

        std::vector<std::uint64_t> seeds;
        for (int i = 0; i < options.seeds; ++i)
            seeds.push_back(config.search.seed + static_cast<std::uint64_t>(i));

        RunManifest manifest;
        manifest.created_at = utc_now();
        manifest.config_digest = config.config_digest;
        manifest.graph_digest = graph.digest_hex();
        manifest.seeds = seeds;
        manifest.outputs = {"report.json", "structure.json", "structure.dot"};
        manifest.write(out_dir);

        auto results = run_seeds(graph, config.search, seeds, options.jobs);
        // best-val selection; ties fall to the earliest seed.
        std::size_t best = 0;
        for (std::size_t k = 1; k < results.size(); ++k)
            if (results[k].report.final_val_metric > results[best].report.final_val_metric)
                best = k;
        const auto& chosen = results[best];

        SuperNetTopology topo =
            make_full_topology(config.search.depth, graph.schema, config.search.include_zero);
        write_text((fs::path(out_dir) / "report.json").string(),
                   chosen.report.to_json_string(topo, graph.schema));
        chosen.structure.save((fs::path(out_dir) / "structure.json").string());
        write_text((fs::path(out_dir) / "structure.dot").string(), export_dot(chosen.structure));

        manifest.status = "completed";
        manifest.wall_clock_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        manifest.write(out_dir);
        return kExitOk;
    } catch (const std::exception& e) {
        return report_error(e);
    }
}

int cmd_evaluate(const std::string& structure_path, const std::string& config_path,
                 const std::string& out_dir) {
    auto start = std::chrono::steady_clock::now();
    try {
        RunConfig config = load_run_config(config_path);
        HinGraph graph = load_dataset(config);
        MetaStructure structure = MetaStructure::load(structure_path);
        structure.validate(&graph.schema);
        fs::create_directories(out_dir);

        RunManifest manifest;
        manifest.created_at = utc_now();
        manifest.config_digest = config.config_digest;
        manifest.graph_digest = graph.digest_hex();
        manifest.seeds = config.evaluate.seeds();
        manifest.outputs = {"result.json", "result.csv"};
        manifest.write(out_dir);

        EvalResult result = retrain_and_evaluate(structure, graph, config.evaluate.options,
                                                 config.evaluate.seeds());
        write_text((fs::path(out_dir) / "result.json").string(), result.to_json_string());
        write_text((fs::path(out_dir) / "result.csv").string(), result.to_csv());

        manifest.status = "completed";
        manifest.wall_clock_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        manifest.write(out_dir);
        return kExitOk;
    } catch (const std::exception& e) {
        return report_error(e);
    }
}

int cmd_consistency(const std::string& config_path, int n_runs, const std::string& out_dir) {
    auto start = std::chrono::steady_clock::now();
    try {
        if (n_runs < 2) throw ConfigError("consistency needs at least 2 runs");
        RunConfig config = load_run_config(config_path);
        HinGraph graph = load_dataset(config);
        fs::create_directories(out_dir);

        RunManifest manifest;
        manifest.created_at = utc_now();
        manifest.config_digest = config.config_digest;
        manifest.graph_digest = graph.digest_hex();
        for (int i = 0; i < n_runs; ++i)
            manifest.seeds.push_back(config.search.seed + static_cast<std::uint64_t>(i));
        manifest.outputs = {"result.json"};
        manifest.write(out_dir);

        ConsistencyResult result =
            consistency_experiment(graph, config.search, config.evaluate.options, n_runs);
        write_text((fs::path(out_dir) / "result.json").string(), result.to_json_string());

        manifest.status = "completed";
        manifest.wall_clock_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        manifest.write(out_dir);
        return kExitOk;
    } catch (const std::exception& e) {
        return report_error(e);
    }
}

int cmd_derive(const std::string& report_path, const std::string& config_path,
               const std::string& kind_token_str, double lambda, double beta,
               const std::string& out_dir) {
    try {
        RunConfig config = load_run_config(config_path);
        HinGraph graph = load_dataset(config);
        StructureKind kind = kind_from_token(kind_token_str);

        std::ifstream in(report_path);
        if (!in) throw DataError("cannot open file: " + report_path);
        nlohmann::json report;
        try {
            in >> report;
        } catch (const nlohmann::json::exception& e) {
            throw DataError(report_path + ": " + e.what());
        }

        // Rebuild the topology and strengths from the stored snapshot.
        SuperNetTopology topo;
        ArchParams arch;
        try {
            const auto& snap = report.at("final_arch");
            topo.depth = snap.at("depth").get<int>();
            for (const auto& ej : snap.at("multi_edges")) {
                MultiEdge edge{ej.at("from").get<int>(), ej.at("to").get<int>()};
                topo.multi_edges.push_back(edge);
                std::vector<int> cands;
                for (const auto& name : ej.at("candidates")) {
                    std::string n = name.get<std::string>();
                    if (n == "ID") cands.push_back(kIdentityCandidate);
                    else if (n == "ZERO") cands.push_back(kZeroCandidate);
                    else {
                        int r = graph.schema.edge_type_index(n);
                        if (r < 0) throw DataError("report references unknown edge type '" + n + "'");
                        cands.push_back(r);
                    }
                }
                topo.candidates[edge] = std::move(cands);
                arch.alpha[edge] = ej.at("alpha").get<std::vector<double>>();
            }
        } catch (const nlohmann::json::exception& e) {
            throw DataError(report_path + ": " + e.what());
        }
        topo.validate(graph.schema);

        MetaStructure structure = derive_structure(kind, arch, topo, graph.schema, lambda, beta);
        fs::create_directories(out_dir);
        structure.save((fs::path(out_dir) / "structure.json").string());
        write_text((fs::path(out_dir) / "structure.dot").string(), export_dot(structure));
        return kExitOk;
    } catch (const std::exception& e) {
        return report_error(e);
    }
}

int cmd_generate(const std::string& config_path) {
    try {
        RunConfig config = load_run_config(config_path);
        if (!config.generate) throw ConfigError("config has no generate section");
        HinGraph graph = generate_planted_hin(config.generate->seed, config.generate->spec);
        save_graph(graph, config.generate->out);
        std::cout << "wrote " << config.generate->out << " digest " << graph.digest_hex()
                  << std::endl;
        return kExitOk;
    } catch (const std::exception& e) {
        return report_error(e);
    }
}

int cmd_export_dot(const std::string& structure_path, const std::string& out_path) {
    try {
        MetaStructure structure = MetaStructure::load(structure_path);
        std::string dot = export_dot(structure);
        if (out_path.empty()) {
            std::cout << dot;
        } else {
            write_text(out_path, dot);
        }
        return kExitOk;
    } catch (const std::exception& e) {
        return report_error(e);
    }
}

}  // namespace mms
