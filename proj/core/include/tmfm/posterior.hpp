// Exact conditional distribution of the difference latent V = X1 - X0 given
// X_t = x, for unimodal and mixture targets. These closed forms stand in for
// the networks a trained sampler would use: the conditional mean is the flow
// velocity, and ancestral draws from the posterior are perfect transition
// samples.
//
// For a single Gaussian component N(mu, sigma^2 I):
//     E[V | X_t = x]   = mu + k(t) (x - t mu)
//     Cov(V | X_t = x) = tau^2(t) I
// For a mixture, V | X_t = x is itself a mixture: responsibilities w_t(x, j)
// weight the per-component posteriors. Responsibilities are evaluated in log
// space (log-sum-exp) because the per-component variances B_t(j) can be tiny
// near t = 1.

#ifndef TMFM_POSTERIOR_HPP
#define TMFM_POSTERIOR_HPP

#include <span>
#include <vector>

#include "tmfm/targets.hpp"

namespace tmfm {

class Rng;

struct UnimodalPosterior {
    std::vector<double> mean;
    double tau2;  // isotropic variance, >= 0 (0 in the sigma -> 0 limit)

    int dim() const { return static_cast<int>(mean.size()); }
};

struct MixturePosterior {
    std::vector<double> weights;                 // responsibilities, sum to 1
    std::vector<UnimodalPosterior> components;   // one per mixture component

    int dim() const { return components.empty() ? 0 : components.front().dim(); }
    int size() const { return static_cast<int>(weights.size()); }

    // Conditional mean: sum_j w_j mean_j.
    std::vector<double> mean() const;
};

struct NearestModeInfo {
    int k_star;       // index of the nearest scaled mode mean
    double distance;  // ||x - t mu_{k*}||
    double margin;    // gap to the second-nearest scaled mode; +inf for K=1
};

UnimodalPosterior unimodal_posterior(const UnimodalGaussianTarget& target, double t,
                                     std::span<const double> x);

// Posterior responsibilities w_t(x, j); normalized, log-sum-exp stabilized.
std::vector<double> responsibilities(const GaussianMixtureTarget& target, double t,
                                     std::span<const double> x);

// log w_t(x, j); useful when the weights themselves underflow.
std::vector<double> log_responsibilities(const GaussianMixtureTarget& target, double t,
                                         std::span<const double> x);

MixturePosterior mixture_posterior(const GaussianMixtureTarget& target, double t,
                                   std::span<const double> x);

// Nearest scaled mode, distance, and margin. Ties broken toward the lowest
// component index so runs are reproducible.
NearestModeInfo nearest_mode(const GaussianMixtureTarget& target, double t,
                             std::span<const double> x);

// i.i.d. draws, flat (count x dim). Deterministic given the rng state.
void sample_posterior(const UnimodalPosterior& post, Rng& rng, std::size_t count,
                      std::span<double> out);
void sample_posterior(const MixturePosterior& post, Rng& rng, std::size_t count,
                      std::span<double> out);

// E[V | X_t = x]; the exact flow velocity at (t, x).
void conditional_mean_velocity(const UnimodalGaussianTarget& target, double t,
                               std::span<const double> x, std::span<double> out);
void conditional_mean_velocity(const GaussianMixtureTarget& target, double t,
                               std::span<const double> x, std::span<double> out);

// Allocation-free variant for hot loops: fills the posterior mixture at
// (t, x) into caller-provided buffers of sizes K, K*dim, K.
void posterior_mixture_into(const GaussianMixtureTarget& target, double t,
                            std::span<const double> x, std::span<double> weights_out,
                            std::span<double> means_out, std::span<double> taus_out);

// Allocation-free velocity evaluator over a generic isotropic Gaussian
// mixture (weights, means, sigmas). Used both for the data-space problem
// (components of the target) and for the latent-space inner problem, where
// the "target" is a conditional posterior whose sigmas may be zero. Times
// strictly below 1 are required when any sigma is zero.
class MixtureVelocity {
public:
    MixtureVelocity(std::vector<double> weights, std::vector<double> means_flat,
                    std::vector<double> sigmas, int dim);

    explicit MixtureVelocity(const GaussianMixtureTarget& target);
    explicit MixtureVelocity(const MixturePosterior& posterior);

    // Re-point at a new component set without reallocating (capacity
    // permitting); used once per outer step in the nested sampler.
    void assign(std::span<const double> weights, std::span<const double> means_flat,
                std::span<const double> sigmas, int dim);

    int dim() const { return dim_; }
    int size() const { return static_cast<int>(sigmas_.size()); }

    // Writes E[Y1 - Y0 | Y_t = y] for source N(0, I), target the stored
    // mixture. Reuses internal scratch; not thread-safe across instances
    // shared by threads (give each thread its own copy).
    void operator()(double t, std::span<const double> y, std::span<double> out);

    // Ancestral draw from the stored mixture into out (dim entries).
    void sample_target(Rng& rng, std::span<double> out) const;

private:
    std::vector<double> weights_;
    std::vector<double> log_weights_;
    std::vector<double> means_;   // flat (K x dim)
    std::vector<double> sigmas_;
    std::vector<double> scratch_;  // per-component log responsibilities
    int dim_;
};

}  // namespace tmfm

#endif  // TMFM_POSTERIOR_HPP
