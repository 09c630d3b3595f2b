#include "tmfm/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "tmfm/parallel.hpp"
#include "tmfm/rng.hpp"
#include "tmfm/vec.hpp"

namespace tmfm {

namespace {

void check_mixture_time(double t, const char* where) {
    if (!(t > 0.0 && t <= 1.0))
        throw std::domain_error(std::string(where) + ": t must lie in (0,1]");
}

// B_t(j) range over components.
struct BRange {
    double b_min;
    double b_max;
};

BRange b_range(const GaussianMixtureTarget& target, double t) {
    double b_min = std::numeric_limits<double>::infinity();
    double b_max = 0.0;
    for (int j = 0; j < target.size(); ++j) {
        const double b = path_variance(t, target.component(j).sigma);
        b_min = std::min(b_min, b);
        b_max = std::max(b_max, b);
    }
    return {b_min, b_max};
}

double component_log_density_at_t(const GaussianMixtureTarget& target, int j, double t,
                                  std::span<const double> x) {
    const auto& c = target.component(j);
    const double b = path_variance(t, c.sigma);
    double quad = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double diff = x[i] - t * c.mu[static_cast<std::size_t>(i)];
        quad += diff * diff;
    }
    const double d = static_cast<double>(target.dim());
    return -0.5 * d * std::log(2.0 * std::numbers::pi * b) - 0.5 * quad / b;
}

// 1D Gaussian density table over a uniform grid.
std::vector<double> axis_density_table(double mean, double tau, double lo, double spacing,
                                       std::size_t points) {
    std::vector<double> table(points);
    const double inv_norm = 1.0 / (std::sqrt(2.0 * std::numbers::pi) * tau);
    for (std::size_t p = 0; p < points; ++p) {
        const double v = lo + spacing * static_cast<double>(p);
        const double z = (v - mean) / tau;
        table[p] = inv_norm * std::exp(-0.5 * z * z);
    }
    return table;
}

double tv_on_grid(const MixturePosterior& post, int k_star, double spacing_target,
                  std::span<const double> lo, std::span<const double> hi) {
    const int d = post.dim();
    const int k_count = post.size();
    std::vector<std::size_t> points(static_cast<std::size_t>(d));
    std::vector<double> spacing(static_cast<std::size_t>(d));
    for (int axis = 0; axis < d; ++axis) {
        const double width = hi[static_cast<std::size_t>(axis)] - lo[static_cast<std::size_t>(axis)];
        const std::size_t n =
            static_cast<std::size_t>(std::ceil(width / spacing_target)) + 1;
        points[static_cast<std::size_t>(axis)] = std::max<std::size_t>(n, 2);
        spacing[static_cast<std::size_t>(axis)] =
            width / static_cast<double>(points[static_cast<std::size_t>(axis)] - 1);
    }

    // Isotropic Gaussians factor across axes; tabulate per (component, axis).
    std::vector<std::vector<double>> tables(static_cast<std::size_t>(k_count * d));
    for (int j = 0; j < k_count; ++j) {
        const double tau = std::sqrt(post.components[static_cast<std::size_t>(j)].tau2);
        for (int axis = 0; axis < d; ++axis) {
            tables[static_cast<std::size_t>(j) * static_cast<std::size_t>(d) + static_cast<std::size_t>(axis)] =
                axis_density_table(
                post.components[static_cast<std::size_t>(j)].mean[static_cast<std::size_t>(axis)],
                tau, lo[static_cast<std::size_t>(axis)], spacing[static_cast<std::size_t>(axis)],
                points[static_cast<std::size_t>(axis)]);
        }
    }

    double acc = 0.0;
    if (d == 1) {
        const std::size_t n = points[0];
        for (std::size_t p = 0; p < n; ++p) {
            double mix = 0.0;
            for (int j = 0; j < k_count; ++j)
                mix += post.weights[static_cast<std::size_t>(j)] * tables[static_cast<std::size_t>(j)][p];
            const double lead = tables[static_cast<std::size_t>(k_star)][p];
            const double wgt = (p == 0 || p == n - 1) ? 0.5 : 1.0;
            acc += wgt * std::abs(mix - lead);
        }
        return 0.5 * acc * spacing[0];
    }

    const std::size_t n1 = points[0];
    const std::size_t n2 = points[1];
    for (std::size_t p1 = 0; p1 < n1; ++p1) {
        const double w1 = (p1 == 0 || p1 == n1 - 1) ? 0.5 : 1.0;
        double row_acc = 0.0;
        for (std::size_t p2 = 0; p2 < n2; ++p2) {
            double mix = 0.0;
            for (int j = 0; j < k_count; ++j) {
                mix += post.weights[static_cast<std::size_t>(j)] *
                       tables[2 * static_cast<std::size_t>(j)][p1] *
                       tables[2 * static_cast<std::size_t>(j) + 1][p2];
            }
            const double lead =
                tables[2 * static_cast<std::size_t>(k_star)][p1] *
                tables[2 * static_cast<std::size_t>(k_star) + 1][p2];
            const double w2 = (p2 == 0 || p2 == n2 - 1) ? 0.5 : 1.0;
            row_acc += w2 * std::abs(mix - lead);
        }
        acc += w1 * row_acc;
    }
    return 0.5 * acc * spacing[0] * spacing[1];
}

}  // namespace

GoodRegionSpec GoodRegionSpec::from_beta(const GaussianMixtureTarget& target, double t_hit,
                                         double beta) {
    if (!(beta > 0.0 && beta < 0.5))
        throw std::invalid_argument("GoodRegionSpec: beta must lie in (0, 1/2)");
    if (!(t_hit > 0.0 && t_hit <= 1.0))
        throw std::invalid_argument("GoodRegionSpec: hitting time must lie in (0,1]");
    const double scale = t_hit * target.min_mean_separation();
    GoodRegionSpec spec;
    spec.t = t_hit;
    spec.r = beta * scale;
    spec.rho_star = (1.0 - 2.0 * beta) * scale;
    spec.beta = beta;
    return spec;
}

TVBoundReport tv_bound(const GaussianMixtureTarget& target, double t, std::span<const double> x) {
    TVBoundReport report;
    const NearestModeInfo info = nearest_mode(target, t, x);
    report.k_star = info.k_star;
    report.distance = info.distance;
    report.margin = info.margin;
    if (target.size() == 1) {
        report.c_pi = 0.0;
        report.bound = 0.0;
        const double b = path_variance(t, target.component(0).sigma);
        report.b_min = b;
        report.b_max = b;
        return report;
    }
    check_mixture_time(t, "tv_bound");
    const BRange range = b_range(target, t);
    report.b_min = range.b_min;
    report.b_max = range.b_max;
    report.c_pi = 1.0 / target.component(info.k_star).weight - 1.0;
    const double d_half = 0.5 * static_cast<double>(target.dim());
    const double exponent =
        0.5 * info.distance * info.distance * (1.0 / range.b_min - 1.0 / range.b_max) -
        0.5 * info.margin * info.margin / range.b_max;
    report.bound = report.c_pi * std::pow(range.b_max / range.b_min, d_half) * std::exp(exponent);
    report.vacuous = report.bound >= 1.0;
    return report;
}

double brute_force_tv(const GaussianMixtureTarget& target, double t, std::span<const double> x,
                      const TVGridSpec& grid) {
    const int d = target.dim();
    if (d > 2) throw std::invalid_argument("brute_force_tv: only dimensions 1 and 2 are supported");
    if (target.size() == 1) return 0.0;
    check_mixture_time(t, "brute_force_tv");

    const MixturePosterior post = mixture_posterior(target, t, x);
    const int k_star = nearest_mode(target, t, x).k_star;

    double tau_min = std::numeric_limits<double>::infinity();
    for (const auto& comp : post.components) tau_min = std::min(tau_min, std::sqrt(comp.tau2));

    std::vector<double> lo(static_cast<std::size_t>(d), std::numeric_limits<double>::infinity());
    std::vector<double> hi(static_cast<std::size_t>(d), -std::numeric_limits<double>::infinity());
    for (const auto& comp : post.components) {
        const double tau = std::sqrt(comp.tau2);
        for (int axis = 0; axis < d; ++axis) {
            lo[static_cast<std::size_t>(axis)] =
                std::min(lo[static_cast<std::size_t>(axis)],
                         comp.mean[static_cast<std::size_t>(axis)] - grid.half_width_sds * tau);
            hi[static_cast<std::size_t>(axis)] =
                std::max(hi[static_cast<std::size_t>(axis)],
                         comp.mean[static_cast<std::size_t>(axis)] + grid.half_width_sds * tau);
        }
    }

    double spacing = tau_min / grid.spacing_divisor;
    double previous = tv_on_grid(post, k_star, spacing, lo, hi);
    for (int refinement = 0; refinement < grid.max_refinements; ++refinement) {
        spacing *= 0.5;
        const double current = tv_on_grid(post, k_star, spacing, lo, hi);
        const double change = std::abs(current - previous);
        previous = current;
        if (change < grid.refine_tol) return current;
    }
    return previous;
}

double tv_bound_separated(const GaussianMixtureTarget& target, double t, std::span<const double> x) {
    if (target.size() == 1) return 0.0;
    check_mixture_time(t, "tv_bound_separated");
    const BRange range = b_range(target, t);
    if (range.b_max - range.b_min > 1e-9 * range.b_max)
        throw std::invalid_argument(
            "tv_bound_separated: components must have equal variances (B_max != B_min)");
    const NearestModeInfo info = nearest_mode(target, t, x);
    if (info.distance > std::sqrt(range.b_min))
        throw std::invalid_argument(
            "tv_bound_separated: x outside the neighborhood (D_t(x) > sqrt(B_min))");
    const double c_pi = 1.0 / target.component(info.k_star).weight - 1.0;
    const double d_min = target.min_mean_separation();
    return c_pi * std::exp(2.0 - t * t * d_min * d_min / (4.0 * range.b_max));
}

MembershipResult good_region_membership(const GaussianMixtureTarget& target,
                                        const GoodRegionSpec& spec, std::span<const double> x) {
    MembershipResult result;
    result.info = nearest_mode(target, spec.t, x);
    result.inside = result.info.distance <= spec.r && result.info.margin >= spec.rho_star;
    return result;
}

ProbabilityBound good_region_escape_bound(const GaussianMixtureTarget& target,
                                          const GoodRegionSpec& spec) {
    check_mixture_time(spec.t, "good_region_escape_bound");
    const double t_dmin = spec.t * target.min_mean_separation();
    if (spec.rho_star > t_dmin)
        throw std::invalid_argument("good_region_escape_bound: requires rho* <= t D_min");
    const BRange range = b_range(target, spec.t);
    const double ball_term = std::exp(-spec.r * spec.r / (2.0 * range.b_min));
    const double margin_gap = t_dmin - spec.rho_star;
    const double margin_term = std::exp(-margin_gap * margin_gap / (8.0 * range.b_min));
    ProbabilityBound bound;
    bound.value = ball_term + margin_term;
    bound.vacuous = bound.value >= 1.0;
    return bound;
}

double attraction_failure_bound(const GaussianMixtureTarget& target, const GoodRegionSpec& spec,
                                int n_steps, int hit_step, int dim) {
    if (hit_step < 0 || hit_step > n_steps - 1)
        throw std::invalid_argument("attraction_failure_bound: hitting step must lie in [0, N-1]");
    const double one_minus_t = 1.0 - spec.t;
    const double b_star = one_minus_t * one_minus_t + target.max_sigma() * target.max_sigma();
    const double arg = spec.r / std::sqrt(b_star) - std::sqrt(static_cast<double>(dim));
    const double clamped = std::max(arg, 0.0);
    return static_cast<double>(n_steps - hit_step + 1) * std::exp(-0.5 * clamped * clamped);
}

double responsibility_dominance_bound(const GaussianMixtureTarget& target, double t,
                                      const GoodRegionSpec& spec) {
    if (target.size() == 1) return 0.0;
    check_mixture_time(t, "responsibility_dominance_bound");
    const BRange range = b_range(target, t);
    double min_weight = 1.0;
    for (int k = 0; k < target.size(); ++k) min_weight = std::min(min_weight, target.component(k).weight);
    const double odds = (1.0 - min_weight) / min_weight;
    const double d_half = 0.5 * static_cast<double>(target.dim());
    const double exponent =
        -spec.rho_star * spec.rho_star / (2.0 * range.b_max) + spec.r * spec.r / (2.0 * range.b_min);
    return std::pow(range.b_max / range.b_min, d_half) * odds * std::exp(exponent);
}

double zeta_bound(const GaussianMixtureTarget& target, double t, std::span<const double> x,
                  const GoodRegionSpec& spec) {
    if (target.size() == 1) return 0.0;
    const MembershipResult membership = good_region_membership(target, spec, x);
    if (!membership.inside)
        throw std::invalid_argument("zeta_bound: x lies outside the good region");
    const int k = membership.info.k_star;
    const double b_k = path_variance(t, target.component(k).sigma);
    const double pi_k = target.component(k).weight;
    const double d_half = 0.5 * static_cast<double>(target.dim());
    double worst = 0.0;
    for (int j = 0; j < target.size(); ++j) {
        if (j == k) continue;
        const double b_j = path_variance(t, target.component(j).sigma);
        const double term = std::pow(b_k / b_j, d_half) *
                            std::exp(-spec.rho_star * spec.rho_star / (2.0 * b_j) +
                                     spec.r * spec.r / (2.0 * b_k));
        worst = std::max(worst, term);
    }
    return (1.0 - pi_k) / pi_k * worst;
}

double zeta_direct(const GaussianMixtureTarget& target, double t, std::span<const double> x) {
    if (target.size() == 1) return 0.0;
    check_mixture_time(t, "zeta_direct");
    const int k = nearest_mode(target, t, x).k_star;
    const double log_lead =
        std::log(target.component(k).weight) + component_log_density_at_t(target, k, t, x);
    double zeta = 0.0;
    for (int j = 0; j < target.size(); ++j) {
        if (j == k) continue;
        const double log_term =
            std::log(target.component(j).weight) + component_log_density_at_t(target, j, t, x);
        zeta += std::exp(log_term - log_lead);
    }
    return zeta;
}

KLGapReport kl_gap_decomposition(std::span<const double> q_samples, int dim,
                                 const GaussianMixtureTarget& target, int component_index,
                                 double epsilon, std::uint64_t seed) {
    if (component_index < 0 || component_index >= target.size())
        throw std::invalid_argument("kl_gap_decomposition: component index out of range");
    if (!(epsilon >= 0.0 && epsilon < 1.0))
        throw std::invalid_argument("kl_gap_decomposition: epsilon must lie in [0, 1)");
    const std::size_t count = q_samples.size() / static_cast<std::size_t>(dim);
    const auto& comp = target.component(component_index);
    const UnimodalGaussianTarget phi_k(comp.mu, comp.sigma);

    // Empirical dominance check: min_i w(x_i, k) >= 1 - epsilon.
    double min_w = 1.0;
    for (std::size_t i = 0; i < count; ++i) {
        const auto x = vec::row(q_samples, i, dim);
        const double log_w = std::log(comp.weight) + phi_k.log_density(x) - target.log_density(x);
        min_w = std::min(min_w, std::exp(log_w));
    }
    if (min_w < 1.0 - epsilon)
        throw std::invalid_argument("kl_gap_decomposition: dominance precondition violated (min w = " +
                                    std::to_string(min_w) + ")");

    KnnKLOptions options;
    options.bootstrap_seed = seed;
    const KLEstimate kl_mix = knn_kl(
        q_samples, dim, [&](std::span<const double> x) { return target.log_density(x); }, options);
    const KLEstimate kl_comp = knn_kl(
        q_samples, dim, [&](std::span<const double> x) { return phi_k.log_density(x); }, options);

    KLGapReport report;
    report.kl_vs_mixture = kl_mix.value;
    report.kl_vs_component = kl_comp.value;
    report.se_mixture = kl_mix.std_error;
    report.se_component = kl_comp.std_error;
    report.log_inv_pi = std::log(1.0 / comp.weight);
    report.delta = kl_mix.value - kl_comp.value - report.log_inv_pi;
    report.epsilon = epsilon;
    return report;
}

std::vector<MixtureKLRow> mixture_kl_comparison(const GaussianMixtureTarget& target,
                                                const MixtureKLConfig& config) {
    std::vector<MixtureKLRow> rows;
    const auto log_q = [&](std::span<const double> x) { return target.log_density(x); };
    std::uint64_t seed_state = config.seed;

    RunOptions run_options;
    run_options.threads = config.threads;

    for (int n : config.fm_steps) {
        const Schedule schedule(n);
        const std::uint64_t run_seed = splitmix64(seed_state);
        const RunResult run =
            run_sampler(target, SamplerKind::flow(), schedule, config.samples, run_seed, run_options);
        MixtureKLRow row;
        row.method = "fm";
        row.n_steps = n;
        row.inner_steps = 0;
        row.kl = knn_kl(run.final_batch.states, target.dim(), log_q);
        rows.push_back(std::move(row));
    }
    for (int s : config.tm_inner) {
        const Schedule schedule(config.tm_outer, s);
        const std::uint64_t run_seed = splitmix64(seed_state);
        const RunResult run = run_sampler(target, SamplerKind::transition(s), schedule,
                                          config.samples, run_seed, run_options);
        MixtureKLRow row;
        row.method = "tm";
        row.n_steps = config.tm_outer;
        row.inner_steps = s;
        row.kl = knn_kl(run.final_batch.states, target.dim(), log_q);
        rows.push_back(std::move(row));
    }
    return rows;
}

FrequencyEstimate mc_escape_frequency(const GaussianMixtureTarget& target,
                                      const GoodRegionSpec& spec, std::size_t draws,
                                      std::uint64_t seed) {
    if (draws < 1) throw std::invalid_argument("mc_escape_frequency: need at least one draw");
    const int d = target.dim();
    std::size_t outside = 0;
    std::vector<double> x(static_cast<std::size_t>(d));
    for (std::size_t i = 0; i < draws; ++i) {
        Rng rng = Rng::stream(seed, i, 0, stream_tag::target_draw);
        target.sample(rng, x);  // X1
        for (int c = 0; c < d; ++c) {
            const double x0 = rng.normal();
            x[static_cast<std::size_t>(c)] =
                (1.0 - spec.t) * x0 + spec.t * x[static_cast<std::size_t>(c)];
        }
        if (!good_region_membership(target, spec, x).inside) ++outside;
    }
    FrequencyEstimate estimate;
    estimate.trials = draws;
    estimate.frequency = static_cast<double>(outside) / static_cast<double>(draws);
    estimate.std_error =
        std::sqrt(estimate.frequency * (1.0 - estimate.frequency) / static_cast<double>(draws));
    return estimate;
}

std::vector<double> sample_in_good_region(const GaussianMixtureTarget& target,
                                          const GoodRegionSpec& spec, std::size_t count,
                                          std::uint64_t seed) {
    const int d = target.dim();
    std::vector<double> out(count * static_cast<std::size_t>(d));
    std::vector<double> candidate(static_cast<std::size_t>(d));
    Rng rng = Rng::stream(seed, 0, 0, stream_tag::scratch);
    const std::size_t max_attempts = 20000 * std::max<std::size_t>(count, 1);
    std::size_t produced = 0;
    for (std::size_t attempt = 0; attempt < max_attempts && produced < count; ++attempt) {
        const int anchor = static_cast<int>(attempt % static_cast<std::size_t>(target.size()));
        // Uniform draw in the radius-r ball around the anchor's scaled mean.
        double norm_sq = 0.0;
        for (int c = 0; c < d; ++c) {
            candidate[static_cast<std::size_t>(c)] = rng.normal();
            norm_sq += candidate[static_cast<std::size_t>(c)] * candidate[static_cast<std::size_t>(c)];
        }
        const double norm = std::sqrt(norm_sq);
        const double radius =
            spec.r * std::pow(rng.uniform(), 1.0 / static_cast<double>(d));
        const auto& mu = target.component(anchor).mu;
        for (int c = 0; c < d; ++c)
            candidate[static_cast<std::size_t>(c)] =
                spec.t * mu[static_cast<std::size_t>(c)] +
                (norm > 0.0 ? radius * candidate[static_cast<std::size_t>(c)] / norm : 0.0);
        const MembershipResult membership = good_region_membership(target, spec, candidate);
        if (membership.inside && membership.info.k_star == anchor) {
            std::copy(candidate.begin(), candidate.end(),
                      out.begin() + static_cast<std::ptrdiff_t>(produced * static_cast<std::size_t>(d)));
            ++produced;
        }
    }
    if (produced < count)
        throw std::runtime_error("sample_in_good_region: region appears empty for this spec");
    return out;
}

GaussianMixtureTarget random_mixture(Rng& rng, const RandomMixtureOptions& options) {
    for (int attempt = 0; attempt < 1000; ++attempt) {
        const int k_count =
            options.min_components +
            static_cast<int>(rng.uniform_index(
                static_cast<std::uint64_t>(options.max_components) -
                static_cast<std::uint64_t>(options.min_components) + 1));
        const int d = options.min_dim +
                      static_cast<int>(rng.uniform_index(
                          static_cast<std::uint64_t>(options.max_dim) -
                          static_cast<std::uint64_t>(options.min_dim) + 1));
        std::vector<double> raw_weights(static_cast<std::size_t>(k_count));
        double weight_sum = 0.0;
        for (auto& w : raw_weights) {
            w = options.min_weight + rng.uniform();
            weight_sum += w;
        }
        const double shared_sigma = rng.uniform(options.sigma_lo, options.sigma_hi);
        std::vector<MixtureComponent> components;
        components.reserve(static_cast<std::size_t>(k_count));
        for (int k = 0; k < k_count; ++k) {
            MixtureComponent c;
            c.weight = raw_weights[static_cast<std::size_t>(k)] / weight_sum;
            c.sigma = options.equal_sigmas ? shared_sigma
                                           : rng.uniform(options.sigma_lo, options.sigma_hi);
            c.mu.resize(static_cast<std::size_t>(d));
            for (auto& v : c.mu) v = rng.uniform(-options.mean_box, options.mean_box);
            components.push_back(std::move(c));
        }
        GaussianMixtureTarget target(std::move(components));
        if (target.min_mean_separation() >= options.min_separation) return target;
    }
    throw std::runtime_error("random_mixture: could not satisfy the separation constraint");
}

std::vector<double> random_point_near_mode(Rng& rng, const GaussianMixtureTarget& target,
                                           double t, double max_sd_multiple) {
    const int d = target.dim();
    const int k = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(target.size())));
    const double b = path_variance(t, target.component(k).sigma);
    std::vector<double> x(static_cast<std::size_t>(d));
    double norm_sq = 0.0;
    for (auto& v : x) {
        v = rng.normal();
        norm_sq += v * v;
    }
    const double norm = std::sqrt(norm_sq);
    const double radius = rng.uniform() * max_sd_multiple * std::sqrt(b);
    const auto& mu = target.component(k).mu;
    for (int c = 0; c < d; ++c)
        x[static_cast<std::size_t>(c)] = t * mu[static_cast<std::size_t>(c)] +
                                         (norm > 0.0 ? radius * x[static_cast<std::size_t>(c)] / norm : 0.0);
    return x;
}

AttractionOracleResult attraction_escape_frequency(const GaussianMixtureTarget& target,
                                                   const SamplerKind& kind,
                                                   const Schedule& schedule, double beta,
                                                   int hit_step, std::size_t trajectories,
                                                   std::uint64_t seed) {
    // The hitting step must have t > 0; the beta-parameterized region is
    // empty at t = 0.
    if (hit_step < 1 || hit_step > schedule.n_outer - 1)
        throw std::invalid_argument("attraction_escape_frequency: hitting step must lie in [1, N-1]");
    const int effective_hit = hit_step;
    const GoodRegionSpec hit_spec =
        GoodRegionSpec::from_beta(target, schedule.t(hit_step), beta);

    RunOptions options;
    options.record_trajectory = true;
    const RunResult run = run_sampler(target, kind, schedule, trajectories, seed, options);

    std::size_t retained = 0;
    std::size_t escaped = 0;
    for (std::size_t m = 0; m < trajectories; ++m) {
        const auto x_hit = run.trajectory[static_cast<std::size_t>(effective_hit)].state(m);
        const MembershipResult at_hit = good_region_membership(target, hit_spec, x_hit);
        if (!at_hit.inside) continue;
        ++retained;
        const int home = at_hit.info.k_star;
        bool left = false;
        for (int n = effective_hit + 1; n <= schedule.n_outer && !left; ++n) {
            GoodRegionSpec spec_n = hit_spec;
            spec_n.t = schedule.t(n);
            const MembershipResult at_n =
                good_region_membership(target, spec_n, run.trajectory[static_cast<std::size_t>(n)].state(m));
            left = !at_n.inside || at_n.info.k_star != home;
        }
        if (left) ++escaped;
    }

    AttractionOracleResult result;
    result.simulated = trajectories;
    result.retained = retained;
    result.escape.trials = retained;
    if (retained > 0) {
        result.escape.frequency = static_cast<double>(escaped) / static_cast<double>(retained);
        result.escape.std_error = std::sqrt(result.escape.frequency *
                                            (1.0 - result.escape.frequency) /
                                            static_cast<double>(retained));
    }
    return result;
}

}  // namespace tmfm
