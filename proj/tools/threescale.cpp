// Command-line driver for the three-scale singular-limit experiments.
//
//   threescale <reduce|converge|blowup|normwatch> --config <file> [--out <dir>]
//
// Exit codes: 0 success, 2 when a written assertion flag failed (monotone
// decrease, slope match, 2M bound), 1 on configuration or runtime errors.

#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <string>

#include "tsl/experiments.hpp"

namespace {

int run(const std::string& kind, const std::string& config_path, const std::string& out_dir) {
    try {
        tsl::ExperimentConfig cfg = tsl::load_config(config_path);
        if (cfg.experiment != kind) {
            std::fprintf(stderr, "config declares experiment '%s' but subcommand is '%s'\n",
                         cfg.experiment.c_str(), kind.c_str());
            return 1;
        }
        const tsl::ExperimentResult res = tsl::run_experiment(cfg, out_dir);
        for (const auto& note : res.notes) std::fprintf(stderr, "note: %s\n", note.c_str());
        if (!res.flags_ok) {
            std::fprintf(stderr, "one or more assertion flags failed; see %s\n", out_dir.c_str());
            return 2;
        }
        return 0;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"three-scale singular limit laboratory"};
    app.require_subcommand(1);

    std::string config_path, out_dir = "out";
    int rc = 0;
    for (const std::string kind : {"reduce", "converge", "blowup", "normwatch"}) {
        CLI::App* sub = app.add_subcommand(kind, kind + " experiment");
        sub->add_option("--config", config_path, "experiment config (JSON)")->required();
        sub->add_option("--out", out_dir, "output directory");
        sub->callback([kind, &config_path, &out_dir, &rc]() {
            rc = run(kind, config_path, out_dir);
        });
    }

    CLI11_PARSE(app, argc, argv);
    return rc;
}
