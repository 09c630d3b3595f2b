#include "tmfm/posterior.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "mixture_detail.hpp"
#include "path_detail.hpp"
#include "tmfm/rng.hpp"
#include "tmfm/vec.hpp"

namespace tmfm {

using detail::component_posterior_mean;
using detail::log_responsibilities_into;

namespace {

void check_dim(std::span<const double> x, int d, const char* where) {
    if (static_cast<int>(x.size()) != d)
        throw std::invalid_argument(std::string(where) + ": dimension mismatch");
}

void check_time(double t, const char* where) {
    if (!(t >= 0.0 && t <= 1.0))
        throw std::domain_error(std::string(where) + ": t must lie in [0,1]");
}

}  // namespace

std::vector<double> MixturePosterior::mean() const {
    std::vector<double> out(static_cast<std::size_t>(dim()), 0.0);
    for (std::size_t j = 0; j < weights.size(); ++j)
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += weights[j] * components[j].mean[i];
    return out;
}

UnimodalPosterior unimodal_posterior(const UnimodalGaussianTarget& target, double t,
                                     std::span<const double> x) {
    check_dim(x, target.dim(), "unimodal_posterior");
    const PathCoefficients path = path_coefficients(t, target.sigma);
    UnimodalPosterior post;
    post.mean.resize(x.size());
    component_posterior_mean(target.mu, path.k, t, x, post.mean);
    post.tau2 = path.tau2;
    return post;
}

std::vector<double> log_responsibilities(const GaussianMixtureTarget& target, double t,
                                         std::span<const double> x) {
    check_dim(x, target.dim(), "log_responsibilities");
    check_time(t, "log_responsibilities");
    const int k_count = target.size();
    std::vector<double> log_w(static_cast<std::size_t>(k_count));
    std::vector<double> means_flat(static_cast<std::size_t>(k_count * target.dim()));
    std::vector<double> sigmas(static_cast<std::size_t>(k_count));
    for (int j = 0; j < k_count; ++j) {
        const auto& c = target.component(j);
        log_w[static_cast<std::size_t>(j)] = std::log(c.weight);
        sigmas[static_cast<std::size_t>(j)] = c.sigma;
        std::copy(c.mu.begin(), c.mu.end(),
                  means_flat.begin() + static_cast<std::ptrdiff_t>(j) * target.dim());
    }
    std::vector<double> lw(static_cast<std::size_t>(k_count));
    log_responsibilities_into(log_w, means_flat, sigmas, target.dim(), t, x, lw);
    return lw;
}

std::vector<double> responsibilities(const GaussianMixtureTarget& target, double t,
                                     std::span<const double> x) {
    std::vector<double> w = log_responsibilities(target, t, x);
    for (auto& v : w) v = std::exp(v);
    return w;
}

MixturePosterior mixture_posterior(const GaussianMixtureTarget& target, double t,
                                   std::span<const double> x) {
    MixturePosterior post;
    post.weights = responsibilities(target, t, x);
    post.components.reserve(static_cast<std::size_t>(target.size()));
    for (int j = 0; j < target.size(); ++j) {
        const auto& c = target.component(j);
        UnimodalGaussianTarget comp_target(c.mu, c.sigma);
        post.components.push_back(unimodal_posterior(comp_target, t, x));
    }
    return post;
}

NearestModeInfo nearest_mode(const GaussianMixtureTarget& target, double t,
                             std::span<const double> x) {
    check_dim(x, target.dim(), "nearest_mode");
    check_time(t, "nearest_mode");
    const int k_count = target.size();
    int best = 0;
    double best_dist = std::numeric_limits<double>::infinity();
    std::vector<double> dists(static_cast<std::size_t>(k_count));
    for (int j = 0; j < k_count; ++j) {
        const auto& mu = target.component(j).mu;
        double quad = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double diff = x[i] - t * mu[i];
            quad += diff * diff;
        }
        const double dist = std::sqrt(quad);
        dists[static_cast<std::size_t>(j)] = dist;
        if (dist < best_dist) {  // strict: ties keep the lowest index
            best_dist = dist;
            best = j;
        }
    }
    double margin = std::numeric_limits<double>::infinity();
    for (int j = 0; j < k_count; ++j)
        if (j != best) margin = std::min(margin, dists[static_cast<std::size_t>(j)] - best_dist);
    return NearestModeInfo{best, best_dist, margin};
}

void sample_posterior(const UnimodalPosterior& post, Rng& rng, std::size_t count,
                      std::span<double> out) {
    const std::size_t d = post.mean.size();
    if (out.size() != count * d) throw std::invalid_argument("sample_posterior: output size mismatch");
    const double tau = std::sqrt(post.tau2);
    for (std::size_t m = 0; m < count; ++m) {
        auto row = vec::row(out, m, static_cast<int>(d));
        for (std::size_t i = 0; i < d; ++i) row[i] = post.mean[i] + tau * rng.normal();
    }
}

void sample_posterior(const MixturePosterior& post, Rng& rng, std::size_t count,
                      std::span<double> out) {
    const std::size_t d = static_cast<std::size_t>(post.dim());
    if (out.size() != count * d) throw std::invalid_argument("sample_posterior: output size mismatch");
    const std::size_t k_count = post.weights.size();
    for (std::size_t m = 0; m < count; ++m) {
        std::size_t pick = 0;
        if (k_count > 1) {
            const double u = rng.uniform();
            double cum = 0.0;
            pick = k_count - 1;
            for (std::size_t j = 0; j < k_count; ++j) {
                cum += post.weights[j];
                if (u < cum) {
                    pick = j;
                    break;
                }
            }
        }
        const auto& comp = post.components[pick];
        const double tau = std::sqrt(comp.tau2);
        auto row = vec::row(out, m, static_cast<int>(d));
        for (std::size_t i = 0; i < d; ++i) row[i] = comp.mean[i] + tau * rng.normal();
    }
}

void conditional_mean_velocity(const UnimodalGaussianTarget& target, double t,
                               std::span<const double> x, std::span<double> out) {
    check_dim(x, target.dim(), "conditional_mean_velocity");
    const double b = detail::path_b(t, target.sigma);
    const double k = detail::path_a(t, target.sigma) / b;
    component_posterior_mean(target.mu, k, t, x, out);
}

void conditional_mean_velocity(const GaussianMixtureTarget& target, double t,
                               std::span<const double> x, std::span<double> out) {
    MixtureVelocity velocity(target);
    velocity(t, x, out);
}

void posterior_mixture_into(const GaussianMixtureTarget& target, double t,
                            std::span<const double> x, std::span<double> weights_out,
                            std::span<double> means_out, std::span<double> taus_out) {
    const int k_count = target.size();
    const int d = target.dim();
    if (static_cast<int>(weights_out.size()) != k_count ||
        static_cast<int>(taus_out.size()) != k_count ||
        static_cast<int>(means_out.size()) != k_count * d)
        throw std::invalid_argument("posterior_mixture_into: buffer size mismatch");

    // Responsibilities, log-space; reuse weights_out as the lw buffer.
    std::vector<double> log_w(static_cast<std::size_t>(k_count));
    std::vector<double> means_flat(static_cast<std::size_t>(k_count * d));
    std::vector<double> sigmas(static_cast<std::size_t>(k_count));
    for (int j = 0; j < k_count; ++j) {
        const auto& c = target.component(j);
        log_w[static_cast<std::size_t>(j)] = std::log(c.weight);
        sigmas[static_cast<std::size_t>(j)] = c.sigma;
        std::copy(c.mu.begin(), c.mu.end(), means_flat.begin() + static_cast<std::ptrdiff_t>(j) * d);
    }
    log_responsibilities_into(log_w, means_flat, sigmas, d, t, x, weights_out);
    for (auto& v : weights_out) v = std::exp(v);

    for (int j = 0; j < k_count; ++j) {
        const auto& c = target.component(j);
        const double b = detail::path_b(t, c.sigma);
        const double k = detail::path_a(t, c.sigma) / b;
        component_posterior_mean(c.mu, k, t, x, vec::row(means_out, static_cast<std::size_t>(j), d));
        taus_out[static_cast<std::size_t>(j)] = std::sqrt(c.sigma * c.sigma / b);
    }
}

MixtureVelocity::MixtureVelocity(std::vector<double> weights, std::vector<double> means_flat,
                                 std::vector<double> sigmas, int dim)
    : weights_(std::move(weights)), means_(std::move(means_flat)), sigmas_(std::move(sigmas)), dim_(dim) {
    if (weights_.size() != sigmas_.size() || means_.size() != weights_.size() * static_cast<std::size_t>(dim_))
        throw std::invalid_argument("MixtureVelocity: inconsistent component buffers");
    log_weights_.resize(weights_.size());
    for (std::size_t j = 0; j < weights_.size(); ++j) log_weights_[j] = std::log(weights_[j]);
    scratch_.resize(weights_.size());
}

MixtureVelocity::MixtureVelocity(const GaussianMixtureTarget& target)
    : dim_(target.dim()) {
    const std::size_t k_count = static_cast<std::size_t>(target.size());
    weights_.resize(k_count);
    sigmas_.resize(k_count);
    means_.resize(k_count * static_cast<std::size_t>(dim_));
    for (std::size_t j = 0; j < k_count; ++j) {
        const auto& c = target.component(static_cast<int>(j));
        weights_[j] = c.weight;
        sigmas_[j] = c.sigma;
        std::copy(c.mu.begin(), c.mu.end(), means_.begin() + static_cast<std::ptrdiff_t>(j * static_cast<std::size_t>(dim_)));
    }
    log_weights_.resize(k_count);
    for (std::size_t j = 0; j < k_count; ++j) log_weights_[j] = std::log(weights_[j]);
    scratch_.resize(k_count);
}

MixtureVelocity::MixtureVelocity(const MixturePosterior& posterior)
    : dim_(posterior.dim()) {
    const std::size_t k_count = posterior.weights.size();
    weights_ = posterior.weights;
    sigmas_.resize(k_count);
    means_.resize(k_count * static_cast<std::size_t>(dim_));
    for (std::size_t j = 0; j < k_count; ++j) {
        sigmas_[j] = std::sqrt(posterior.components[j].tau2);
        std::copy(posterior.components[j].mean.begin(), posterior.components[j].mean.end(),
                  means_.begin() + static_cast<std::ptrdiff_t>(j * static_cast<std::size_t>(dim_)));
    }
    log_weights_.resize(k_count);
    for (std::size_t j = 0; j < k_count; ++j) log_weights_[j] = std::log(weights_[j]);
    scratch_.resize(k_count);
}

void MixtureVelocity::assign(std::span<const double> weights, std::span<const double> means_flat,
                             std::span<const double> sigmas, int dim) {
    dim_ = dim;
    weights_.assign(weights.begin(), weights.end());
    means_.assign(means_flat.begin(), means_flat.end());
    sigmas_.assign(sigmas.begin(), sigmas.end());
    log_weights_.resize(weights_.size());
    for (std::size_t j = 0; j < weights_.size(); ++j) log_weights_[j] = std::log(weights_[j]);
    scratch_.resize(weights_.size());
}

void MixtureVelocity::operator()(double t, std::span<const double> y, std::span<double> out) {
    detail::mixture_velocity_into(log_weights_, means_, sigmas_, dim_, t, y, out, scratch_);
}

void MixtureVelocity::sample_target(Rng& rng, std::span<double> out) const {
    const std::size_t k_count = weights_.size();
    std::size_t pick = 0;
    if (k_count > 1) {
        const double u = rng.uniform();
        double cum = 0.0;
        pick = k_count - 1;
        for (std::size_t j = 0; j < k_count; ++j) {
            cum += weights_[j];
            if (u < cum) {
                pick = j;
                break;
            }
        }
    }
    const auto mu = vec::row(std::span<const double>(means_), pick, dim_);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = mu[i] + sigmas_[pick] * rng.normal();
}

}  // namespace tmfm
