// Internal allocation-free kernels for isotropic Gaussian mixtures under the
// linear interpolation path. Shared by the posterior module and the sampler
// hot loops; all buffers are caller-owned.

#ifndef TMFM_MIXTURE_DETAIL_HPP
#define TMFM_MIXTURE_DETAIL_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>

#include "path_detail.hpp"
#include "tmfm/vec.hpp"

namespace tmfm::detail {

// Per-component posterior mean: mu + k (x - t mu).
inline void component_posterior_mean(std::span<const double> mu, double k, double t,
                                     std::span<const double> x, std::span<double> out) {
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = mu[i] + k * (x[i] - t * mu[i]);
}

// Normalized log responsibilities of x at time t for the mixture given by
// (log_weights, means_flat, sigmas). Sigmas may be zero as long as t < 1.
inline void log_responsibilities_into(std::span<const double> log_weights,
                                      std::span<const double> means_flat,
                                      std::span<const double> sigmas, int dim, double t,
                                      std::span<const double> x, std::span<double> lw) {
    const std::size_t k_count = sigmas.size();
    const double half_dim = 0.5 * static_cast<double>(dim);
    for (std::size_t j = 0; j < k_count; ++j) {
        const double b = path_b(t, sigmas[j]);
        const auto mu = vec::row(means_flat, j, dim);
        double quad = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double diff = x[i] - t * mu[i];
            quad += diff * diff;
        }
        lw[j] = log_weights[j] - half_dim * std::log(b) - 0.5 * quad / b;
    }
    double max_term = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < k_count; ++j) max_term = std::max(max_term, lw[j]);
    double acc = 0.0;
    for (std::size_t j = 0; j < k_count; ++j) acc += std::exp(lw[j] - max_term);
    const double lse = max_term + std::log(acc);
    for (std::size_t j = 0; j < k_count; ++j) lw[j] -= lse;
}

// E[Y1 - Y0 | Y_t = y] for source N(0, I) and target the given mixture.
// scratch must hold K doubles.
inline void mixture_velocity_into(std::span<const double> log_weights,
                                  std::span<const double> means_flat,
                                  std::span<const double> sigmas, int dim, double t,
                                  std::span<const double> y, std::span<double> out,
                                  std::span<double> scratch) {
    const std::size_t k_count = sigmas.size();
    log_responsibilities_into(log_weights, means_flat, sigmas, dim, t, y, scratch);
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t j = 0; j < k_count; ++j) {
        const double w = std::exp(scratch[j]);
        const double b = path_b(t, sigmas[j]);
        const double k = path_a(t, sigmas[j]) / b;
        const auto mu = vec::row(means_flat, j, dim);
        for (std::size_t i = 0; i < y.size(); ++i) out[i] += w * (mu[i] + k * (y[i] - t * mu[i]));
    }
}

}  // namespace tmfm::detail

#endif  // TMFM_MIXTURE_DETAIL_HPP
