// Mixture-mode theory: total-variation bounds on the local-unimodal
// approximation of the difference-latent posterior, good-region
// concentration and attraction bounds, responsibility dominance, the
// mixture-density correction factor zeta, the KL-gap decomposition against a
// dominant component, and the Monte Carlo / quadrature oracles that validate
// each bound.
//
// Bounds that can exceed 1 are returned as computed together with a vacuous
// flag; they are never clamped silently.

#ifndef TMFM_BOUNDS_HPP
#define TMFM_BOUNDS_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tmfm/divergence.hpp"
#include "tmfm/posterior.hpp"
#include "tmfm/samplers.hpp"
#include "tmfm/targets.hpp"

namespace tmfm {

// Good region G_t(r, rho*): within radius r of the nearest scaled mode mean
// and margin at least rho* to all other modes.
struct GoodRegionSpec {
    double t = 0.0;
    double r = 0.0;
    double rho_star = 0.0;
    std::optional<double> beta;  // set when derived from the (beta, t_M) form

    // r = beta t_M D_min, rho* = (1 - 2 beta) t_M D_min, beta in (0, 1/2);
    // the combination satisfies 2r + rho* = t_M D_min exactly.
    static GoodRegionSpec from_beta(const GaussianMixtureTarget& target, double t_hit,
                                    double beta);
};

struct TVBoundReport {
    double bound = 0.0;
    double c_pi = 0.0;    // 1/pi_{k*} - 1
    double b_min = 0.0;
    double b_max = 0.0;
    double distance = 0.0;  // D_t(x)
    double margin = 0.0;    // rho_t(x)
    int k_star = 0;
    bool vacuous = false;  // bound >= 1
    std::optional<double> brute_force_tv;
};

// Upper bound on || p(V|X_t=x) - p(V|X_t=x, Z=k*) ||_TV:
//   C_pi (B_max/B_min)^{d/2} exp( D_t^2/2 (1/B_min - 1/B_max) - rho_t^2 / (2 B_max) ).
// K = 1 gives 0. Requires t in (0, 1] for K >= 2.
TVBoundReport tv_bound(const GaussianMixtureTarget& target, double t, std::span<const double> x);

struct TVGridSpec {
    double half_width_sds = 8.0;    // grid extends this many posterior sds past every mean
    double spacing_divisor = 20.0;  // initial spacing = tau_min / spacing_divisor
    double refine_tol = 1e-4;       // stop when successive refinements agree this well
    int max_refinements = 5;
};

// Numerical oracle: 1/2 integral | p(V|x) - p(V|x, Z=k*) | dV on a dense
// trapezoidal grid, refined until stable. Dimensions 1 and 2 only.
double brute_force_tv(const GaussianMixtureTarget& target, double t, std::span<const double> x,
                      const TVGridSpec& grid = {});

// Simplified bound for equal component variances and x within the
// neighborhood D_t(x) <= sqrt(B_min):
//   C_pi(x) exp( 2 - t^2 D_min^2 / (4 B_max) ).
// Throws std::invalid_argument naming the violated precondition.
double tv_bound_separated(const GaussianMixtureTarget& target, double t, std::span<const double> x);

struct MembershipResult {
    bool inside = false;
    NearestModeInfo info;
};

MembershipResult good_region_membership(const GaussianMixtureTarget& target,
                                        const GoodRegionSpec& spec, std::span<const double> x);

struct ProbabilityBound {
    double value = 0.0;
    bool vacuous = false;  // value >= 1
};

// P(X_t outside G_t(r, rho*)) <= exp(-r^2 / (2 B_min))
//                              + exp(-(t D_min - rho*)^2 / (8 B_min)).
// Requires rho* <= t D_min.
ProbabilityBound good_region_escape_bound(const GaussianMixtureTarget& target,
                                          const GoodRegionSpec& spec);

// Probability bound delta on ever leaving the good region after hitting it
// at outer step M (of N): (N - M + 1) exp(-1/2 ((r/sqrt(B*) - sqrt(d))_+)^2)
// with B* = (1 - t_M)^2 + sigma_max^2.
double attraction_failure_bound(const GaussianMixtureTarget& target, const GoodRegionSpec& spec,
                                int n_steps, int hit_step, int dim);

// Responsibility dominance: for every x in G_t(r, rho*) with nearest mode k,
// 1 - w_t(x, k) <= epsilon where
//   epsilon = (B_max/B_min)^{d/2} ((1-pi_k)/pi_k)
//             exp(-rho*^2/(2 B_max) + r^2/(2 B_min)).
// The returned value is the worst case over k.
double responsibility_dominance_bound(const GaussianMixtureTarget& target, double t,
                                      const GoodRegionSpec& spec);

// Upper bound on the mixture-density correction factor zeta_t(x) for
// x in the good region; 0 for K = 1. Throws if x is outside the region.
double zeta_bound(const GaussianMixtureTarget& target, double t, std::span<const double> x,
                  const GoodRegionSpec& spec);

// Direct evaluation of zeta_t(x) from the component densities.
double zeta_direct(const GaussianMixtureTarget& target, double t, std::span<const double> x);

struct KLGapReport {
    double kl_vs_mixture = 0.0;
    double kl_vs_component = 0.0;
    double log_inv_pi = 0.0;
    double delta = 0.0;    // measured residual; lies in [log(1-eps), 0]
    double epsilon = 0.0;  // dominance slack used for the check
    double se_mixture = 0.0;
    double se_component = 0.0;
};

// Decomposition KL(q || p1) = KL(q || phi_k) + log(1/pi_k) + Delta for a
// sample set from q dominated by component k. Throws if the empirical
// dominance min_i w(x_i, k) >= 1 - epsilon fails.
KLGapReport kl_gap_decomposition(std::span<const double> q_samples, int dim,
                                 const GaussianMixtureTarget& target, int component_index,
                                 double epsilon, std::uint64_t seed);

struct MixtureKLConfig {
    std::vector<int> fm_steps;
    int tm_outer = 1;
    std::vector<int> tm_inner;
    std::size_t samples = 100000;
    std::uint64_t seed = 1;
    int threads = 1;
};

struct MixtureKLRow {
    std::string method;  // "fm" or "tm"
    int n_steps = 0;
    int inner_steps = 0;
    KLEstimate kl;
};

// Monte Carlo KL(sampler output || target) across a step grid; the
// experiment behind the sampler-vs-sampler mixture comparison.
std::vector<MixtureKLRow> mixture_kl_comparison(const GaussianMixtureTarget& target,
                                                const MixtureKLConfig& config);

struct FrequencyEstimate {
    double frequency = 0.0;
    double std_error = 0.0;
    std::size_t trials = 0;
};

// Monte Carlo estimate of P(X_t outside G) by direct interpolant draws
// X_t = (1 - t) X0 + t X1.
FrequencyEstimate mc_escape_frequency(const GaussianMixtureTarget& target,
                                      const GoodRegionSpec& spec, std::size_t draws,
                                      std::uint64_t seed);

// Uniform-in-ball rejection sampler of points inside the good region
// (cycling over anchor components); flat (count x dim) output.
std::vector<double> sample_in_good_region(const GaussianMixtureTarget& target,
                                          const GoodRegionSpec& spec, std::size_t count,
                                          std::uint64_t seed);

// Deterministic random mixture generation for bound-validation sweeps.
struct RandomMixtureOptions {
    int min_components = 2;
    int max_components = 3;
    int min_dim = 1;
    int max_dim = 2;
    double sigma_lo = 0.5;
    double sigma_hi = 1.5;
    bool equal_sigmas = false;   // share one sigma across components
    double mean_box = 3.0;       // means drawn uniformly in [-box, box]^d
    double min_separation = 0.2; // regenerate until D_min exceeds this
    double min_weight = 0.15;    // simplex draw floor before normalization
};

GaussianMixtureTarget random_mixture(class Rng& rng, const RandomMixtureOptions& options = {});

// x = t mu_k + u * max_sd_multiple * sqrt(B_t(k)) * direction for a random
// component k; the kind of point the TV bounds are evaluated at.
std::vector<double> random_point_near_mode(class Rng& rng, const GaussianMixtureTarget& target,
                                           double t, double max_sd_multiple);

struct AttractionOracleResult {
    FrequencyEstimate escape;   // among retained trajectories
    std::size_t retained = 0;   // trajectories inside G at the hitting step
    std::size_t simulated = 0;
};

// Simulates sampler trajectories, retains those inside G_{t_M}(r, rho*) at
// the hitting step, and reports how often a retained trajectory later
// leaves the (growing-time) good region or switches nearest mode.
AttractionOracleResult attraction_escape_frequency(const GaussianMixtureTarget& target,
                                                   const SamplerKind& kind,
                                                   const Schedule& schedule, double beta,
                                                   int hit_step, std::size_t trajectories,
                                                   std::uint64_t seed);

}  // namespace tmfm

#endif  // TMFM_BOUNDS_HPP
