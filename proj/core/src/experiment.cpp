#include "tmfm/experiment.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "tmfm/bounds.hpp"
#include "tmfm/csv.hpp"
#include "tmfm/divergence.hpp"
#include "tmfm/posterior.hpp"
#include "tmfm/recursion.hpp"
#include "tmfm/rng.hpp"
#include "tmfm/samplers.hpp"
#include "tmfm/svg.hpp"
#include "tmfm/vec.hpp"
#include "tmfm/version.hpp"

namespace tmfm {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string sanitize_label(const std::string& label) {
    std::string out;
    for (char c : label) {
        if (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_') {
            out += c;
        } else {
            out += '_';
        }
    }
    return out.empty() ? std::string("target") : out;
}

ExperimentKind parse_kind(const std::string& name) {
    if (name == "unimodal_kl") return ExperimentKind::unimodal_kl;
    if (name == "mixture_kl") return ExperimentKind::mixture_kl;
    if (name == "posterior_hist") return ExperimentKind::posterior_hist;
    if (name == "bounds_check") return ExperimentKind::bounds_check;
    if (name == "cost_model") return ExperimentKind::cost_model;
    throw ConfigError("unknown experiment kind '" + name + "'");
}

TargetSpec parse_target(const json& node, const std::string& fallback_label) {
    if (!node.is_object()) throw ConfigError("target must be an object");
    TargetSpec spec;
    spec.label = node.value("label", fallback_label);
    const std::string type = node.value("type", "");
    try {
        if (type == "unimodal") {
            if (!node.contains("mu") || !node.contains("sigma"))
                throw ConfigError("unimodal target needs 'mu' and 'sigma'");
            spec.value = UnimodalGaussianTarget(node.at("mu").get<std::vector<double>>(),
                                                node.at("sigma").get<double>());
        } else if (type == "mixture") {
            if (!node.contains("components")) throw ConfigError("mixture target needs 'components'");
            std::vector<MixtureComponent> components;
            for (const auto& comp : node.at("components")) {
                MixtureComponent c;
                c.weight = comp.at("pi").get<double>();
                c.mu = comp.at("mu").get<std::vector<double>>();
                c.sigma = comp.at("sigma").get<double>();
                components.push_back(std::move(c));
            }
            spec.value = GaussianMixtureTarget(std::move(components));
        } else {
            throw ConfigError("target 'type' must be 'unimodal' or 'mixture'");
        }
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("invalid target: ") + e.what());
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed target: ") + e.what());
    }
    return spec;
}

json target_to_json(const TargetSpec& spec) {
    json node;
    node["label"] = spec.label;
    if (spec.is_mixture()) {
        node["type"] = "mixture";
        json components = json::array();
        for (const auto& c : spec.mixture().components()) {
            components.push_back({{"pi", c.weight}, {"mu", c.mu}, {"sigma", c.sigma}});
        }
        node["components"] = components;
    } else {
        node["type"] = "unimodal";
        node["mu"] = spec.unimodal().mu;
        node["sigma"] = spec.unimodal().sigma;
    }
    return node;
}

json config_to_json(const ExperimentConfig& config) {
    json node;
    node["experiment"] = to_string(config.kind);
    node["seed"] = config.seed;
    node["threads"] = config.threads;
    node["samples"] = config.samples;
    json targets = json::array();
    for (const auto& t : config.targets) targets.push_back(target_to_json(t));
    node["targets"] = targets;
    node["fm_steps"] = config.fm_steps;
    node["tm_outer"] = config.tm_outer;
    node["tm_inner"] = config.tm_inner;
    node["cost_model"] = {{"label", config.cost_model_label},
                          {"backbone_cost", config.cost_model.backbone_cost},
                          {"head_cost", config.cost_model.head_cost},
                          {"kappa", config.cost_model.kappa()}};
    node["t_grid"] = config.t_grid;
    node["histogram_bins"] = config.histogram_bins;
    node["hist_draws"] = config.hist_draws;
    node["anchor_component"] = config.anchor_component;
    node["bounds"] = {{"tv_general", config.bounds.tv_general_configs},
                      {"tv_separated", config.bounds.tv_separated_configs},
                      {"escape", config.bounds.escape_configs},
                      {"dominance", config.bounds.dominance_configs},
                      {"escape_draws", config.bounds.escape_draws},
                      {"dominance_points", config.bounds.dominance_points}};
    node["emit_traces"] = config.emit_traces;
    return node;
}

// Tracks per-artifact completion and column provenance for the manifest.
class ArtifactTracker {
public:
    void begin(const std::string& file, std::initializer_list<std::pair<std::string, std::string>> columns) {
        Artifact artifact;
        artifact.file = file;
        for (const auto& [name, provenance] : columns) artifact.columns[name] = provenance;
        artifacts_.push_back(std::move(artifact));
    }

    void complete(const std::string& file) {
        for (auto& a : artifacts_)
            if (a.file == file) a.complete = true;
    }

    json to_json() const {
        json list = json::array();
        for (const auto& a : artifacts_) {
            json node;
            node["file"] = a.file;
            node["status"] = a.complete ? "complete" : "incomplete";
            if (!a.columns.empty()) node["columns"] = a.columns;
            list.push_back(node);
        }
        return list;
    }

    bool all_complete() const {
        return std::all_of(artifacts_.begin(), artifacts_.end(),
                           [](const Artifact& a) { return a.complete; });
    }

private:
    struct Artifact {
        std::string file;
        bool complete = false;
        std::map<std::string, std::string> columns;
    };
    std::vector<Artifact> artifacts_;
};

void write_manifest(const fs::path& dir, const ExperimentConfig& config,
                    const ArtifactTracker& tracker, const std::string& status,
                    const std::string& error = {}) {
    json manifest;
    manifest["tool"] = "tmfm";
    manifest["version"] = kVersion;
    manifest["experiment"] = to_string(config.kind);
    manifest["status"] = status;
    if (!error.empty()) manifest["error"] = error;
    manifest["resolved_config"] = config_to_json(config);
    manifest["artifacts"] = tracker.to_json();
    std::ofstream out(dir / "manifest.json");
    out << manifest.dump(2) << '\n';
}

void write_text_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path.string());
    out << content;
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t salt) {
    std::uint64_t state = base ^ (salt * kGolden);
    return splitmix64(state);
}

// ---------------------------------------------------------------------------
// unimodal_kl

void run_unimodal_kl(const ExperimentConfig& config, const fs::path& dir,
                     ArtifactTracker& tracker) {
    const auto& target = config.targets.front().unimodal();
    const int d = target.dim();
    const double sigma = target.sigma;
    const auto log_q = [&](std::span<const double> x) { return target.log_density(x); };

    tracker.begin("unimodal_kl.csv",
                  {{"method", "sampler family"},
                   {"N", "outer step count"},
                   {"S", "inner step count (0 for fm)"},
                   {"modeled_cost", "tmfm::cost_fm / tmfm::cost_tm"},
                   {"kl_closed_form", "tmfm::gaussian_kl_from_trace"},
                   {"kl_mc", "tmfm::knn_kl over tmfm::run_sampler output"},
                   {"mc_se", "tmfm::knn_kl bootstrap standard error"}});
    tracker.begin("kl_estimates.csv",
                  {{"config_id", "sweep point identifier"},
                   {"method", "tmfm::KLMethod"},
                   {"value", "tmfm::gaussian_kl_from_trace / tmfm::knn_kl"},
                   {"std_error", "tmfm::knn_kl bootstrap standard error"},
                   {"M", "sample count"}});
    tracker.begin("unimodal_kl.svg", {});

    const std::vector<std::string> header = {"method", "N",          "S",    "modeled_cost",
                                             "kl_closed_form", "kl_mc", "mc_se"};
    csv::Writer table((dir / "unimodal_kl.csv").string(), header);
    const std::vector<std::string> est_header = {"config_id", "method", "value", "std_error", "M"};
    csv::Writer estimates((dir / "kl_estimates.csv").string(), est_header);

    RunOptions run_options;
    run_options.threads = config.threads;

    svg::Series fm_cf{"fm closed form", {}, {}, true, false};
    svg::Series tm_cf{"tm closed form", {}, {}, true, false};
    svg::Series fm_mc{"fm knn estimate", {}, {}, false, true};
    svg::Series tm_mc{"tm knn estimate", {}, {}, false, true};

    std::uint64_t run_index = 0;
    const fs::path trace_dir = dir / "traces";
    if (config.emit_traces) fs::create_directories(trace_dir);

    for (int n : config.fm_steps) {
        const VarianceTrace trace = fm_variance_trace(sigma, n, d);
        const KLReport report = gaussian_kl_from_trace(trace, sigma, d);
        const double modeled = cost_fm(config.cost_model, n);
        const RunResult run = run_sampler(target, SamplerKind::flow(), Schedule(n), config.samples,
                                          derive_seed(config.seed, run_index++), run_options);
        const KLEstimate mc = knn_kl(run.final_batch.states, d, log_q);
        const std::string id = "fm_N" + std::to_string(n);
        table.row({"fm", csv::format(n), csv::format(0), csv::format(modeled),
                   csv::format(report.kl_fm), csv::format(mc.value), csv::format(mc.std_error)});
        estimates.row({id, "closed_form", csv::format(report.kl_fm), csv::format(0.0),
                       csv::format(std::size_t{0})});
        estimates.row({id, "knn_mc", csv::format(mc.value), csv::format(mc.std_error),
                       csv::format(mc.sample_count)});
        fm_cf.x.push_back(modeled);
        fm_cf.y.push_back(report.kl_fm);
        fm_mc.x.push_back(modeled);
        fm_mc.y.push_back(mc.value);
        if (config.emit_traces) {
            std::ofstream trace_out(trace_dir / ("trace_fm_N" + std::to_string(n) + ".csv"));
            write_trace_csv(trace, trace_out);
        }
    }
    for (int s : config.tm_inner) {
        const VarianceTrace trace = tm_variance_trace(sigma, config.tm_outer, s, d);
        const KLReport report = gaussian_kl_from_trace(trace, sigma, d);
        const double modeled = cost_tm(config.cost_model, config.tm_outer, s);
        const RunResult run =
            run_sampler(target, SamplerKind::transition(s), Schedule(config.tm_outer, s),
                        config.samples, derive_seed(config.seed, run_index++), run_options);
        const KLEstimate mc = knn_kl(run.final_batch.states, d, log_q);
        const std::string id = "tm_N" + std::to_string(config.tm_outer) + "_S" + std::to_string(s);
        table.row({"tm", csv::format(config.tm_outer), csv::format(s), csv::format(modeled),
                   csv::format(report.kl_tm), csv::format(mc.value), csv::format(mc.std_error)});
        estimates.row({id, "closed_form", csv::format(report.kl_tm), csv::format(0.0),
                       csv::format(std::size_t{0})});
        estimates.row({id, "knn_mc", csv::format(mc.value), csv::format(mc.std_error),
                       csv::format(mc.sample_count)});
        tm_cf.x.push_back(modeled);
        tm_cf.y.push_back(report.kl_tm);
        tm_mc.x.push_back(modeled);
        tm_mc.y.push_back(mc.value);
        if (config.emit_traces) {
            std::ofstream trace_out(trace_dir / ("trace_tm_N" + std::to_string(config.tm_outer) +
                                                 "_S" + std::to_string(s) + ".csv"));
            write_trace_csv(trace, trace_out);
        }
    }
    tracker.complete("unimodal_kl.csv");
    tracker.complete("kl_estimates.csv");

    svg::ChartSpec spec;
    spec.title = "KL divergence vs modeled cost (unimodal target)";
    spec.x_label = "modeled cost [s]";
    spec.y_label = "KL divergence";
    spec.log_x = true;
    spec.log_y = true;
    const svg::Series series[] = {fm_cf, tm_cf, fm_mc, tm_mc};
    write_text_file(dir / "unimodal_kl.svg", svg::render_chart(spec, series));
    tracker.complete("unimodal_kl.svg");
}

// ---------------------------------------------------------------------------
// mixture_kl

void run_mixture_kl(const ExperimentConfig& config, const fs::path& dir,
                    ArtifactTracker& tracker) {
    tracker.begin("mixture_kl.csv",
                  {{"target_label", "config"},
                   {"d_min", "GaussianMixtureTarget::min_mean_separation"},
                   {"method", "sampler family"},
                   {"N", "outer step count"},
                   {"S", "inner step count (0 for fm)"},
                   {"modeled_cost", "tmfm::cost_fm / tmfm::cost_tm"},
                   {"kl_mc", "tmfm::mixture_kl_comparison (tmfm::knn_kl)"},
                   {"mc_se", "tmfm::knn_kl bootstrap standard error"}});
    tracker.begin("kl_estimates.csv",
                  {{"config_id", "sweep point identifier"},
                   {"method", "tmfm::KLMethod"},
                   {"value", "tmfm::knn_kl"},
                   {"std_error", "tmfm::knn_kl bootstrap standard error"},
                   {"M", "sample count"}});
    tracker.begin("mixture_kl.svg", {});

    const std::vector<std::string> header = {"target_label", "d_min", "method", "N",
                                             "S",            "modeled_cost", "kl_mc", "mc_se"};
    csv::Writer table((dir / "mixture_kl.csv").string(), header);
    const std::vector<std::string> est_header = {"config_id", "method", "value", "std_error", "M"};
    csv::Writer estimates((dir / "kl_estimates.csv").string(), est_header);

    std::vector<svg::Series> series;
    std::uint64_t target_index = 0;
    for (const auto& target_spec : config.targets) {
        const GaussianMixtureTarget target = target_spec.as_mixture();
        MixtureKLConfig mk;
        mk.fm_steps = config.fm_steps;
        mk.tm_outer = config.tm_outer;
        mk.tm_inner = config.tm_inner;
        mk.samples = config.samples;
        mk.seed = derive_seed(config.seed, target_index);
        mk.threads = config.threads;
        const std::vector<MixtureKLRow> rows = mixture_kl_comparison(target, mk);

        svg::Series fm_series{target_spec.label + " fm", {}, {}, true, true};
        svg::Series tm_series{target_spec.label + " tm", {}, {}, true, true};
        for (const auto& row : rows) {
            const bool is_tm = row.method == "tm";
            const double modeled = is_tm ? cost_tm(config.cost_model, row.n_steps, row.inner_steps)
                                         : cost_fm(config.cost_model, row.n_steps);
            table.row({target_spec.label, csv::format(target.min_mean_separation()), row.method,
                       csv::format(row.n_steps), csv::format(row.inner_steps), csv::format(modeled),
                       csv::format(row.kl.value), csv::format(row.kl.std_error)});
            std::string id = target_spec.label + "_" + row.method + "_N" + std::to_string(row.n_steps);
            if (is_tm) id += "_S" + std::to_string(row.inner_steps);
            estimates.row({id, "knn_mc", csv::format(row.kl.value), csv::format(row.kl.std_error),
                           csv::format(row.kl.sample_count)});
            auto& s = is_tm ? tm_series : fm_series;
            s.x.push_back(modeled);
            s.y.push_back(row.kl.value);
        }
        series.push_back(std::move(fm_series));
        series.push_back(std::move(tm_series));
        ++target_index;
    }
    tracker.complete("mixture_kl.csv");
    tracker.complete("kl_estimates.csv");

    svg::ChartSpec spec;
    spec.title = "KL divergence vs modeled cost (mixture targets)";
    spec.x_label = "modeled cost [s]";
    spec.y_label = "KL divergence";
    spec.log_x = true;
    spec.log_y = true;
    write_text_file(dir / "mixture_kl.svg", svg::render_chart(spec, series));
    tracker.complete("mixture_kl.svg");
}

// ---------------------------------------------------------------------------
// posterior_hist

void run_posterior_hist(const ExperimentConfig& config, const fs::path& dir,
                        ArtifactTracker& tracker) {
    tracker.begin("posterior_hist_summary.csv",
                  {{"target_label", "config"},
                   {"t", "time grid"},
                   {"draws", "tmfm::sample_posterior count"},
                   {"excluded_zero_norm", "tmfm::cosine_similarity_histogram"},
                   {"fraction_above_0_9", "tmfm::cosine_similarity_histogram"},
                   {"std_error", "binomial standard error of the fraction"}});
    const std::vector<std::string> summary_header = {
        "target_label", "t", "draws", "excluded_zero_norm", "fraction_above_0_9", "std_error"};
    csv::Writer summary((dir / "posterior_hist_summary.csv").string(), summary_header);

    std::uint64_t target_index = 0;
    for (const auto& target_spec : config.targets) {
        const GaussianMixtureTarget target = target_spec.as_mixture();
        const int d = target.dim();
        const std::string safe_label = sanitize_label(target_spec.label);
        const std::string csv_name = "posterior_hist_" + safe_label + ".csv";
        const std::string svg_name = "posterior_hist_" + safe_label + ".svg";
        tracker.begin(csv_name, {{"t", "time grid"},
                                 {"bin_left", "tmfm::cosine_similarity_histogram"},
                                 {"bin_right", "tmfm::cosine_similarity_histogram"},
                                 {"count", "tmfm::cosine_similarity_histogram"}});
        tracker.begin(svg_name, {});
        const std::vector<std::string> header = {"t", "bin_left", "bin_right", "count"};
        csv::Writer table((dir / csv_name).string(), header);

        std::vector<svg::HistogramPanel> panels;
        const auto& anchor_mu = target.component(config.anchor_component).mu;
        for (std::size_t t_index = 0; t_index < config.t_grid.size(); ++t_index) {
            const double t = config.t_grid[t_index];
            std::vector<double> x(static_cast<std::size_t>(d));
            for (int c = 0; c < d; ++c)
                x[static_cast<std::size_t>(c)] = t * anchor_mu[static_cast<std::size_t>(c)];
            const MixturePosterior post = mixture_posterior(target, t, x);
            const std::vector<double> reference = post.mean();
            std::vector<double> draws(config.hist_draws * static_cast<std::size_t>(d));
            Rng rng = Rng::stream(config.seed, target_index, t_index, stream_tag::target_draw);
            sample_posterior(post, rng, config.hist_draws, draws);
            CosSimHistogram hist =
                cosine_similarity_histogram(draws, d, reference, config.histogram_bins);
            hist.t = t;

            for (std::size_t b = 0; b < hist.counts.size(); ++b) {
                table.row({csv::format(t), csv::format(hist.edges[b]), csv::format(hist.edges[b + 1]),
                           csv::format(hist.counts[b])});
            }
            const double frac = hist.fraction_above_0_9;
            const double se = hist.total > 0
                                  ? std::sqrt(frac * (1.0 - frac) / static_cast<double>(hist.total))
                                  : 0.0;
            summary.row({target_spec.label, csv::format(t), csv::format(hist.total),
                         csv::format(hist.excluded_zero_norm), csv::format(frac), csv::format(se)});

            svg::HistogramPanel panel;
            panel.label = "t = " + csv::format(t);
            panel.edges = hist.edges;
            panel.heights.assign(hist.counts.begin(), hist.counts.end());
            panels.push_back(std::move(panel));
        }
        write_text_file(dir / svg_name,
                        svg::render_histogram_panels(
                            "Cosine similarity of posterior draws: " + target_spec.label, panels));
        tracker.complete(csv_name);
        tracker.complete(svg_name);
        ++target_index;
    }
    tracker.complete("posterior_hist_summary.csv");
}

// ---------------------------------------------------------------------------
// bounds_check

void run_bounds_check(const ExperimentConfig& config, const fs::path& dir,
                      ArtifactTracker& tracker) {
    tracker.begin("bounds_check.csv",
                  {{"config_id", "random configuration index"},
                   {"bound_name", "tmfm bound operation"},
                   {"bound_value", "tv_bound / tv_bound_separated / good_region_escape_bound / "
                                   "responsibility_dominance_bound"},
                   {"oracle_value", "brute_force_tv / mc_escape_frequency / responsibilities"},
                   {"vacuous_flag", "bound >= 1"},
                   {"pass", "oracle consistent with bound"}});
    tracker.begin("bounds_check.svg", {});
    const std::vector<std::string> header = {"config_id",    "bound_name", "bound_value",
                                             "oracle_value", "vacuous_flag", "pass"};
    csv::Writer table((dir / "bounds_check.csv").string(), header);

    svg::Series points{"(oracle, bound)", {}, {}, false, true};
    const auto record = [&](const std::string& id, const std::string& name, double bound,
                            double oracle, bool vacuous, bool pass) {
        table.row({id, name, csv::format(bound), csv::format(oracle),
                   vacuous ? std::string("1") : std::string("0"),
                   pass ? std::string("1") : std::string("0")});
        points.x.push_back(std::max(oracle, 1e-18));
        points.y.push_back(std::max(bound, 1e-18));
    };

    // Proposition-style TV bound against the quadrature oracle.
    for (int i = 0; i < config.bounds.tv_general_configs; ++i) {
        Rng rng = Rng::stream(config.seed, 11, static_cast<std::uint64_t>(i), stream_tag::scratch);
        const GaussianMixtureTarget target = random_mixture(rng);
        const double t = rng.uniform(0.3, 0.95);
        const std::vector<double> x = random_point_near_mode(rng, target, t, 2.0);
        const TVBoundReport report = tv_bound(target, t, x);
        const double oracle = brute_force_tv(target, t, x);
        const bool pass = oracle <= std::min(1.0, report.bound) + 1e-9;
        record("tv_general_" + std::to_string(i), "tv_bound", report.bound, oracle, report.vacuous, pass);
    }

    // Equal-variance simplified bound on its precondition set.
    for (int i = 0; i < config.bounds.tv_separated_configs; ++i) {
        Rng rng = Rng::stream(config.seed, 12, static_cast<std::uint64_t>(i), stream_tag::scratch);
        RandomMixtureOptions options;
        options.equal_sigmas = true;
        const GaussianMixtureTarget target = random_mixture(rng, options);
        const double t = rng.uniform(0.3, 0.95);
        const std::vector<double> x = random_point_near_mode(rng, target, t, 0.999);
        const double bound = tv_bound_separated(target, t, x);
        const double oracle = brute_force_tv(target, t, x);
        const bool pass = oracle <= std::min(1.0, bound) + 1e-9;
        record("tv_separated_" + std::to_string(i), "tv_bound_separated", bound, oracle, bound >= 1.0, pass);
    }

    // Good-region escape probability against direct interpolant draws.
    for (int i = 0; i < config.bounds.escape_configs; ++i) {
        Rng rng = Rng::stream(config.seed, 13, static_cast<std::uint64_t>(i), stream_tag::scratch);
        const GaussianMixtureTarget target = random_mixture(rng);
        GoodRegionSpec spec;
        spec.t = rng.uniform(0.3, 0.95);
        // B_t is increasing in sigma, so the smallest component sigma gives B_min.
        const double b_min = path_variance(spec.t, target.min_sigma());
        spec.r = rng.uniform(0.5, 3.0) * std::sqrt(b_min);
        spec.rho_star = rng.uniform(0.0, 0.9) * spec.t * target.min_mean_separation();
        const ProbabilityBound bound = good_region_escape_bound(target, spec);
        const FrequencyEstimate freq =
            mc_escape_frequency(target, spec, config.bounds.escape_draws,
                                derive_seed(config.seed, 1300 + static_cast<std::uint64_t>(i)));
        const bool pass = freq.frequency <= bound.value + 3.0 * freq.std_error + 1e-12;
        record("escape_" + std::to_string(i), "good_region_escape_bound", bound.value,
               freq.frequency, bound.vacuous, pass);
    }

    // Responsibility dominance over sampled in-region points.
    for (int i = 0; i < config.bounds.dominance_configs; ++i) {
        Rng rng = Rng::stream(config.seed, 14, static_cast<std::uint64_t>(i), stream_tag::scratch);
        const GaussianMixtureTarget target = random_mixture(rng);
        const double t = rng.uniform(0.3, 0.95);
        const double beta = rng.uniform(0.1, 0.4);
        const GoodRegionSpec spec = GoodRegionSpec::from_beta(target, t, beta);
        const double epsilon = responsibility_dominance_bound(target, t, spec);
        const std::vector<double> xs =
            sample_in_good_region(target, spec, static_cast<std::size_t>(config.bounds.dominance_points),
                                  derive_seed(config.seed, 1400 + static_cast<std::uint64_t>(i)));
        double worst = 0.0;
        for (int p = 0; p < config.bounds.dominance_points; ++p) {
            const auto x = vec::row(std::span<const double>(xs), static_cast<std::size_t>(p),
                                    target.dim());
            const NearestModeInfo info = nearest_mode(target, t, x);
            const std::vector<double> w = responsibilities(target, t, x);
            worst = std::max(worst, 1.0 - w[static_cast<std::size_t>(info.k_star)]);
        }
        const bool pass = worst <= epsilon + 1e-12;
        record("dominance_" + std::to_string(i), "responsibility_dominance_bound", epsilon, worst,
               epsilon >= 1.0, pass);
    }

    tracker.complete("bounds_check.csv");
    svg::ChartSpec spec;
    spec.title = "Bound value vs oracle value";
    spec.x_label = "oracle";
    spec.y_label = "bound";
    spec.log_x = true;
    spec.log_y = true;
    spec.diagonal_guide = true;
    const svg::Series series[] = {points};
    write_text_file(dir / "bounds_check.svg", svg::render_chart(spec, series));
    tracker.complete("bounds_check.svg");
}

// ---------------------------------------------------------------------------
// cost_model

void run_cost_model(const ExperimentConfig& config, const fs::path& dir,
                    ArtifactTracker& tracker) {
    tracker.begin("cost_model.csv", {{"model_label", "config"},
                                     {"method", "sampler family"},
                                     {"N", "outer step count"},
                                     {"S", "inner step count (0 for fm)"},
                                     {"modeled_cost", "tmfm::cost_fm / tmfm::cost_tm"},
                                     {"delta_inner_steps", "tmfm::delta_inner_steps"}});
    tracker.begin("cost_model.svg", {});
    const std::vector<std::string> header = {"model_label", "method",       "N",
                                             "S",           "modeled_cost", "delta_inner_steps"};
    csv::Writer table((dir / "cost_model.csv").string(), header);

    svg::Series fm_series{"fm (vs N)", {}, {}, true, true};
    svg::Series tm_series{"tm N=" + std::to_string(config.tm_outer) + " (vs S)", {}, {}, true, true};
    for (int n : config.fm_steps) {
        const double modeled = cost_fm(config.cost_model, n);
        table.row({config.cost_model_label, "fm", csv::format(n), csv::format(0),
                   csv::format(modeled), csv::format(delta_inner_steps(config.cost_model, n))});
        fm_series.x.push_back(n);
        fm_series.y.push_back(modeled);
    }
    for (int s : config.tm_inner) {
        const double modeled = cost_tm(config.cost_model, config.tm_outer, s);
        table.row({config.cost_model_label, "tm", csv::format(config.tm_outer), csv::format(s),
                   csv::format(modeled),
                   csv::format(delta_inner_steps(config.cost_model, config.tm_outer))});
        tm_series.x.push_back(s);
        tm_series.y.push_back(modeled);
    }
    tracker.complete("cost_model.csv");

    svg::ChartSpec spec;
    spec.title = "Modeled sampling cost (" + config.cost_model_label + ")";
    spec.x_label = "steps (N for fm, S for tm)";
    spec.y_label = "modeled cost [s]";
    const svg::Series series[] = {fm_series, tm_series};
    write_text_file(dir / "cost_model.svg", svg::render_chart(spec, series));
    tracker.complete("cost_model.svg");
}

}  // namespace

std::string to_string(ExperimentKind kind) {
    switch (kind) {
        case ExperimentKind::unimodal_kl: return "unimodal_kl";
        case ExperimentKind::mixture_kl: return "mixture_kl";
        case ExperimentKind::posterior_hist: return "posterior_hist";
        case ExperimentKind::bounds_check: return "bounds_check";
        case ExperimentKind::cost_model: return "cost_model";
    }
    return "unknown";
}

int TargetSpec::dim() const {
    return is_mixture() ? mixture().dim() : unimodal().dim();
}

GaussianMixtureTarget TargetSpec::as_mixture() const {
    return is_mixture() ? mixture() : GaussianMixtureTarget::from_unimodal(unimodal());
}

ExperimentConfig parse_config(const std::string& json_text) {
    json node;
    try {
        node = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("invalid JSON: ") + e.what());
    }
    if (!node.is_object()) throw ConfigError("config root must be an object");

    ExperimentConfig config;
    try {
        if (!node.contains("experiment")) throw ConfigError("missing 'experiment'");
        config.kind = parse_kind(node.at("experiment").get<std::string>());
        config.seed = node.value("seed", std::uint64_t{1});
        config.threads = node.value("threads", 1);
        config.samples = node.value("samples", std::size_t{100000});

        if (node.contains("targets")) {
            std::size_t index = 0;
            for (const auto& t : node.at("targets")) {
                config.targets.push_back(parse_target(t, "target" + std::to_string(index)));
                ++index;
            }
        } else if (node.contains("target")) {
            config.targets.push_back(parse_target(node.at("target"), "target0"));
        }

        config.fm_steps = node.value("fm_steps", std::vector<int>{});
        config.tm_outer = node.value("tm_outer", 1);
        config.tm_inner = node.value("tm_inner", std::vector<int>{});

        if (node.contains("cost_model")) {
            const auto& cm = node.at("cost_model");
            if (cm.contains("preset")) {
                const std::string preset = cm.at("preset").get<std::string>();
                if (preset == "image") {
                    config.cost_model = ComputeCostModel::image_task();
                } else if (preset == "video") {
                    config.cost_model = ComputeCostModel::video_task();
                } else {
                    throw ConfigError("cost_model preset must be 'image' or 'video'");
                }
                config.cost_model_label = preset;
            } else {
                std::optional<double> kappa;
                if (cm.contains("kappa")) kappa = cm.at("kappa").get<double>();
                config.cost_model = ComputeCostModel(cm.at("backbone_cost").get<double>(),
                                                     cm.at("head_cost").get<double>(), kappa);
                config.cost_model_label = cm.value("label", "custom");
            }
        }

        config.t_grid = node.value("t_grid", std::vector<double>{});
        config.histogram_bins = node.value("histogram_bins", 80);
        config.hist_draws = node.value("hist_draws", std::size_t{10000});
        config.anchor_component = node.value("anchor_component", 0);

        if (node.contains("bounds")) {
            const auto& b = node.at("bounds");
            config.bounds.tv_general_configs = b.value("tv_general", 200);
            config.bounds.tv_separated_configs = b.value("tv_separated", 200);
            config.bounds.escape_configs = b.value("escape", 50);
            config.bounds.dominance_configs = b.value("dominance", 50);
            config.bounds.escape_draws = b.value("escape_draws", std::size_t{100000});
            config.bounds.dominance_points = b.value("dominance_points", 1000);
        }
        config.emit_traces = node.value("emit_traces", false);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed config: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("invalid config value: ") + e.what());
    }

    // Per-kind validation; everything is checked before any run starts.
    const auto require = [](bool condition, const std::string& message) {
        if (!condition) throw ConfigError(message);
    };
    require(config.threads >= 0, "'threads' must be nonnegative");
    require(config.tm_outer >= 1, "'tm_outer' must be >= 1");
    for (int n : config.fm_steps) require(n >= 1, "'fm_steps' entries must be >= 1");
    for (int s : config.tm_inner) require(s >= 1, "'tm_inner' entries must be >= 1");
    switch (config.kind) {
        case ExperimentKind::unimodal_kl:
            require(config.targets.size() == 1, "unimodal_kl needs exactly one target");
            require(!config.targets.front().is_mixture(), "unimodal_kl needs a unimodal target");
            require(!config.fm_steps.empty(), "unimodal_kl needs 'fm_steps'");
            require(!config.tm_inner.empty(), "unimodal_kl needs 'tm_inner'");
            require(config.samples >= 1000, "unimodal_kl needs 'samples' >= 1000");
            break;
        case ExperimentKind::mixture_kl:
            require(!config.targets.empty(), "mixture_kl needs at least one target");
            require(!config.fm_steps.empty(), "mixture_kl needs 'fm_steps'");
            require(!config.tm_inner.empty(), "mixture_kl needs 'tm_inner'");
            require(config.samples >= 1000, "mixture_kl needs 'samples' >= 1000");
            break;
        case ExperimentKind::posterior_hist:
            require(!config.targets.empty(), "posterior_hist needs at least one target");
            require(!config.t_grid.empty(), "posterior_hist needs 't_grid'");
            for (double t : config.t_grid)
                require(t >= 0.0 && t <= 1.0, "'t_grid' entries must lie in [0,1]");
            require(config.hist_draws >= 1, "posterior_hist needs 'hist_draws' >= 1");
            require(config.histogram_bins >= 1, "'histogram_bins' must be >= 1");
            for (const auto& target : config.targets)
                require(config.anchor_component >= 0 &&
                            config.anchor_component < target.as_mixture().size(),
                        "'anchor_component' out of range for target " + target.label);
            break;
        case ExperimentKind::bounds_check:
            require(config.bounds.tv_general_configs >= 0 && config.bounds.tv_separated_configs >= 0 &&
                        config.bounds.escape_configs >= 0 && config.bounds.dominance_configs >= 0,
                    "bounds_check counts must be nonnegative");
            require(config.bounds.escape_draws >= 100, "'escape_draws' must be >= 100");
            require(config.bounds.dominance_points >= 1, "'dominance_points' must be >= 1");
            break;
        case ExperimentKind::cost_model:
            require(!config.fm_steps.empty(), "cost_model needs 'fm_steps'");
            require(!config.tm_inner.empty(), "cost_model needs 'tm_inner'");
            break;
    }
    return config;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_config(buffer.str());
}

void run_experiment(const ExperimentConfig& config, const std::string& out_dir) {
    const fs::path dir(out_dir);
    fs::create_directories(dir);
    ArtifactTracker tracker;
    try {
        switch (config.kind) {
            case ExperimentKind::unimodal_kl: run_unimodal_kl(config, dir, tracker); break;
            case ExperimentKind::mixture_kl: run_mixture_kl(config, dir, tracker); break;
            case ExperimentKind::posterior_hist: run_posterior_hist(config, dir, tracker); break;
            case ExperimentKind::bounds_check: run_bounds_check(config, dir, tracker); break;
            case ExperimentKind::cost_model: run_cost_model(config, dir, tracker); break;
        }
    } catch (const std::exception& e) {
        write_manifest(dir, config, tracker, "incomplete", e.what());
        throw;
    }
    write_manifest(dir, config, tracker, tracker.all_complete() ? "complete" : "incomplete");
}

}  // namespace tmfm
