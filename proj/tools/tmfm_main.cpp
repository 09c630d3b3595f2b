// tmfm — config-driven experiment runner.
//
// Subcommands (one per experiment kind):
//   tmfm unimodal-kl    --config cfg.json --out dir [--seed N] [--threads T]
//   tmfm mixture-kl     ...
//   tmfm posterior-hist ...
//   tmfm bounds-check   ...
//   tmfm cost-model     ...
//
// Exit codes: 0 success, 2 config error, 3 runtime/numerical error.

#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "tmfm/experiment.hpp"
#include "tmfm/version.hpp"

namespace {

struct SubcommandArgs {
    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int threads = 0;
    bool threads_set = false;
};

void add_subcommand(CLI::App& app, const std::string& name, tmfm::ExperimentKind kind,
                    const std::string& description, int& exit_code) {
    auto args = std::make_shared<SubcommandArgs>();
    CLI::App* sub = app.add_subcommand(name, description);
    sub->add_option("--config", args->config_path, "experiment config (JSON)")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("--out", args->out_dir, "output directory")->required();
    sub->add_option("--seed", args->seed, "override the config seed")
        ->each([args](const std::string&) { args->seed_set = true; });
    sub->add_option("--threads", args->threads, "cap worker threads (0 = hardware)")
        ->each([args](const std::string&) { args->threads_set = true; });

    sub->callback([args, kind, &exit_code]() {
        try {
            tmfm::ExperimentConfig config = tmfm::load_config(args->config_path);
            if (config.kind != kind) {
                std::cerr << "error: config is for experiment '" << tmfm::to_string(config.kind)
                          << "', not '" << tmfm::to_string(kind) << "'\n";
                exit_code = 2;
                return;
            }
            if (args->seed_set) config.seed = args->seed;
            if (args->threads_set) config.threads = args->threads;
            tmfm::run_experiment(config, args->out_dir);
            std::cout << "wrote " << args->out_dir << "/manifest.json\n";
        } catch (const tmfm::ConfigError& e) {
            std::cerr << "config error: " << e.what() << '\n';
            exit_code = 2;
        } catch (const std::exception& e) {
            std::cerr << "runtime error: " << e.what() << '\n';
            exit_code = 3;
        }
    });
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sampler analysis experiments on Gaussian targets"};
    app.set_version_flag("--version", tmfm::kVersion);
    app.require_subcommand(1);

    int exit_code = 0;
    add_subcommand(app, "unimodal-kl", tmfm::ExperimentKind::unimodal_kl,
                   "closed-form and Monte Carlo KL sweeps on a unimodal target", exit_code);
    add_subcommand(app, "mixture-kl", tmfm::ExperimentKind::mixture_kl,
                   "Monte Carlo KL-vs-cost curves on mixture targets", exit_code);
    add_subcommand(app, "posterior-hist", tmfm::ExperimentKind::posterior_hist,
                   "cosine-similarity histograms of posterior draws", exit_code);
    add_subcommand(app, "bounds-check", tmfm::ExperimentKind::bounds_check,
                   "bound-vs-oracle validation sweeps", exit_code);
    add_subcommand(app, "cost-model", tmfm::ExperimentKind::cost_model,
                   "modeled compute-cost tables", exit_code);

    CLI11_PARSE(app, argc, argv);
    return exit_code;
}
