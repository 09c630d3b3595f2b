// Divergence estimation: exact Gaussian-Gaussian KL for isotropic
// covariances, a Monte Carlo KL estimator against a known target density,
// and the cosine-similarity histogram diagnostic for posterior draws.
//
// The Monte Carlo estimator combines the Kozachenko-Leonenko first-nearest-
// neighbor differential entropy estimate with the exact cross-entropy term
// (the target log-density is known in closed form here), i.e.
//     KL(p || q) ~= -H_hat(samples) - mean_i log q(x_i).
// Standard errors come from a 200-resample bootstrap over the per-sample
// summands. Per-sample terms are sorted before any summation so the result
// is invariant to the order of the input samples.

#ifndef TMFM_DIVERGENCE_HPP
#define TMFM_DIVERGENCE_HPP

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace tmfm {

enum class KLMethod { closed_form, knn_mc };

struct KLEstimate {
    double value = 0.0;
    double std_error = 0.0;  // 0 for closed-form results
    KLMethod method = KLMethod::closed_form;
    std::size_t sample_count = 0;
    std::size_t jittered = 0;  // duplicate points nudged before NN search
};

// KL( N(mu_p, var_p I) || N(mu_q, var_q I) ); var arguments are isotropic
// variances. Throws on nonpositive variances or dimension mismatch.
KLEstimate gaussian_kl(std::span<const double> mu_p, double var_p, std::span<const double> mu_q,
                       double var_q);

struct KnnKLOptions {
    int bootstrap_resamples = 200;
    std::uint64_t bootstrap_seed = 0x51ED270B6A4C9ull;
};

// KL(samples || q) for samples stored flat (count x dim) and a log-density
// callback for q. Requires count >= 2; duplicate points are jittered at
// 1e-12 scale and counted in the result.
KLEstimate knn_kl(std::span<const double> samples, int dim,
                  const std::function<double(std::span<const double>)>& log_q,
                  const KnnKLOptions& options = {});

// Kozachenko-Leonenko differential entropy estimate (k = 1), exposed for
// validation against closed-form Gaussian entropies.
double knn_entropy(std::span<const double> samples, int dim);

struct CosSimHistogram {
    double t = 0.0;  // caller-assigned timestamp label
    std::vector<double> edges;    // bins + 1 edges spanning [-1, 1]
    std::vector<std::size_t> counts;
    std::size_t total = 0;               // number of binned samples
    std::size_t excluded_zero_norm = 0;  // zero-norm draws, not binned
    double fraction_above_0_9 = 0.0;

    // Fraction of binned draws with cosine above c, from the raw values.
    double fraction_above(double c) const;
    std::vector<double> values;  // raw cosines, kept for fraction queries
};

// Histogram over [-1, 1] of cos(draw_m, reference). Zero-norm draws are
// excluded and counted; a zero reference is an error.
CosSimHistogram cosine_similarity_histogram(std::span<const double> draws, int dim,
                                            std::span<const double> reference, int bins = 80);

}  // namespace tmfm

#endif  // TMFM_DIVERGENCE_HPP
