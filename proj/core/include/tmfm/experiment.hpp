// Config-driven experiment runner. Each experiment kind reads a validated
// JSON config, runs the corresponding pipeline deterministically, and writes
// CSV tables, SVG plots, and a manifest into the output directory. The
// manifest echoes the resolved config, lists every artifact with a status,
// and maps each CSV column to the library operation that produced it; it is
// written last so its presence marks a completed run.

#ifndef TMFM_EXPERIMENT_HPP
#define TMFM_EXPERIMENT_HPP

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "tmfm/cost.hpp"
#include "tmfm/targets.hpp"

namespace tmfm {

class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& message) : std::runtime_error(message) {}
};

enum class ExperimentKind { unimodal_kl, mixture_kl, posterior_hist, bounds_check, cost_model };

std::string to_string(ExperimentKind kind);

struct TargetSpec {
    std::string label;
    std::variant<UnimodalGaussianTarget, GaussianMixtureTarget> value{
        UnimodalGaussianTarget({0.0}, 1.0)};

    int dim() const;
    bool is_mixture() const { return std::holds_alternative<GaussianMixtureTarget>(value); }
    const GaussianMixtureTarget& mixture() const { return std::get<GaussianMixtureTarget>(value); }
    const UnimodalGaussianTarget& unimodal() const {
        return std::get<UnimodalGaussianTarget>(value);
    }
    // Mixture view of either variant (K = 1 for unimodal targets).
    GaussianMixtureTarget as_mixture() const;
};

struct BoundsCheckSettings {
    int tv_general_configs = 200;
    int tv_separated_configs = 200;
    int escape_configs = 50;
    int dominance_configs = 50;
    std::size_t escape_draws = 100000;
    int dominance_points = 1000;
};

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::unimodal_kl;
    std::uint64_t seed = 1;
    int threads = 1;
    std::size_t samples = 100000;  // Monte Carlo KL sample count

    std::vector<TargetSpec> targets;

    std::vector<int> fm_steps;
    int tm_outer = 1;
    std::vector<int> tm_inner;

    ComputeCostModel cost_model = ComputeCostModel::image_task();
    std::string cost_model_label = "image";

    // posterior_hist
    std::vector<double> t_grid;
    int histogram_bins = 80;
    std::size_t hist_draws = 10000;
    int anchor_component = 0;

    BoundsCheckSettings bounds;

    bool emit_traces = false;
};

// Parse + validate. Throws ConfigError with a description of the offending
// field.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);

// Applies CLI overrides after parsing.
struct ConfigOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
};

// Runs the experiment, writing artifacts under out_dir (created if needed).
// On error, a manifest marking incomplete artifacts is still written and
// the exception is rethrown.
void run_experiment(const ExperimentConfig& config, const std::string& out_dir);

}  // namespace tmfm

#endif  // TMFM_EXPERIMENT_HPP
