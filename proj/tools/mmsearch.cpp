// mmsearch: differentiable meta-structure search on heterogeneous
// information networks. See README.md for formats and exit codes.

#include <string>

#include <CLI11.hpp>

#include "mms/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"meta-structure search on heterogeneous information networks"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string("mmsearch ") + mms::kToolVersion);

    std::string config_path, out_dir, structure_path, report_path, out_path;
    mms::SearchCliOptions search_opts;
    int n_runs = 6;
    std::string kind = "meta-multigraph";
    double lambda = 0.9, beta = 0.9;

    auto* search = app.add_subcommand("search", "run the meta-structure search");
    search->add_option("--config", config_path, "config file")->required();
    search->add_option("--out", out_dir, "output directory")->required();
    search->add_option("--seeds", search_opts.seeds, "number of independent search seeds");
    search->add_option("--select", search_opts.select, "run selection policy (best-val)");
    search->add_option("--jobs", search_opts.jobs, "parallel seed workers");

    auto* evaluate = app.add_subcommand("evaluate", "retrain and score a derived structure");
    evaluate->add_option("--structure", structure_path, "structure.json path")->required();
    evaluate->add_option("--config", config_path, "config file")->required();
    evaluate->add_option("--out", out_dir, "output directory")->required();

    auto* consistency = app.add_subcommand("consistency", "super-net vs target-net correlation");
    consistency->add_option("--config", config_path, "config file")->required();
    consistency->add_option("--runs", n_runs, "number of search seeds");
    consistency->add_option("--out", out_dir, "output directory")->required();

    auto* derive = app.add_subcommand("derive", "re-derive a structure from a search report");
    derive->add_option("--report", report_path, "report.json path")->required();
    derive->add_option("--config", config_path, "config file")->required();
    derive->add_option("--kind", kind, "meta-path|meta-graph|meta-multigraph|c2c-meta-multigraph");
    derive->add_option("--lambda", lambda, "retention threshold control");
    derive->add_option("--beta", beta, "depth attenuation ratio");
    derive->add_option("--out", out_dir, "output directory")->required();

    auto* generate = app.add_subcommand("generate", "write the planted synthetic graph");
    generate->add_option("--config", config_path, "config file")->required();

    auto* export_dot = app.add_subcommand("export-dot", "render a structure as Graphviz");
    export_dot->add_option("--structure", structure_path, "structure.json path")->required();
    export_dot->add_option("--out", out_path, "output file (stdout when omitted)");

    CLI11_PARSE(app, argc, argv);

    if (search->parsed()) return mms::cmd_search(config_path, out_dir, search_opts);
    if (evaluate->parsed()) return mms::cmd_evaluate(structure_path, config_path, out_dir);
    if (consistency->parsed()) return mms::cmd_consistency(config_path, n_runs, out_dir);
    if (derive->parsed())
        return mms::cmd_derive(report_path, config_path, kind, lambda, beta, out_dir);
    if (generate->parsed()) return mms::cmd_generate(config_path);
    if (export_dot->parsed()) return mms::cmd_export_dot(structure_path, out_path);
    return mms::kExitError;
}
