#include "tmfm/targets.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include "path_detail.hpp"
#include "tmfm/rng.hpp"
#include "tmfm/vec.hpp"

namespace tmfm {

namespace {

void check_time_and_sigma(double t, double sigma, const char* where) {
    if (!(t >= 0.0 && t <= 1.0))
        throw std::domain_error(std::string(where) + ": t must lie in [0,1], got " + std::to_string(t));
    if (!(sigma > 0.0))
        throw std::domain_error(std::string(where) + ": sigma must be positive, got " + std::to_string(sigma));
}

double isotropic_log_density(std::span<const double> x, std::span<const double> mu, double variance) {
    const double d = static_cast<double>(x.size());
    return -0.5 * d * std::log(2.0 * std::numbers::pi * variance) -
           0.5 * vec::squared_distance(x, mu) / variance;
}

}  // namespace

UnimodalGaussianTarget::UnimodalGaussianTarget(std::vector<double> mean, double sigma_in)
    : mu(std::move(mean)), sigma(sigma_in) {
    if (mu.empty()) throw std::invalid_argument("UnimodalGaussianTarget: dimension must be >= 1");
    if (!(sigma > 0.0)) throw std::invalid_argument("UnimodalGaussianTarget: sigma must be positive");
    for (double v : mu)
        if (!std::isfinite(v)) throw std::invalid_argument("UnimodalGaussianTarget: mean must be finite");
}

double UnimodalGaussianTarget::log_density(std::span<const double> x) const {
    if (x.size() != mu.size()) throw std::invalid_argument("log_density: dimension mismatch");
    return isotropic_log_density(x, mu, sigma * sigma);
}

GaussianMixtureTarget::GaussianMixtureTarget(std::vector<MixtureComponent> components)
    : components_(std::move(components)) {
    if (components_.empty()) throw std::invalid_argument("GaussianMixtureTarget: need K >= 1 components");
    dim_ = static_cast<int>(components_.front().mu.size());
    if (dim_ < 1) throw std::invalid_argument("GaussianMixtureTarget: dimension must be >= 1");

    double weight_sum = 0.0;
    sigma_max_ = 0.0;
    sigma_min_ = std::numeric_limits<double>::infinity();
    for (const auto& c : components_) {
        if (static_cast<int>(c.mu.size()) != dim_)
            throw std::invalid_argument("GaussianMixtureTarget: inconsistent component dimensions");
        if (!(c.sigma > 0.0))
            throw std::invalid_argument("GaussianMixtureTarget: component sigma must be positive");
        if (!(c.weight > 0.0 && c.weight < 1.0) && components_.size() > 1)
            throw std::invalid_argument("GaussianMixtureTarget: weights must lie in (0,1)");
        if (components_.size() == 1 && std::abs(c.weight - 1.0) > 1e-12)
            throw std::invalid_argument("GaussianMixtureTarget: single component must have weight 1");
        for (double v : c.mu)
            if (!std::isfinite(v)) throw std::invalid_argument("GaussianMixtureTarget: means must be finite");
        weight_sum += c.weight;
        sigma_max_ = std::max(sigma_max_, c.sigma);
        sigma_min_ = std::min(sigma_min_, c.sigma);
    }
    if (std::abs(weight_sum - 1.0) > 1e-12)
        throw std::invalid_argument("GaussianMixtureTarget: weights must sum to 1 (got " +
                                    std::to_string(weight_sum) + ")");

    d_min_ = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < components_.size(); ++j) {
        for (std::size_t k = j + 1; k < components_.size(); ++k) {
            const double dist = vec::distance(components_[j].mu, components_[k].mu);
            if (dist == 0.0 && components_[j].sigma == components_[k].sigma)
                throw std::invalid_argument(
                    "GaussianMixtureTarget: duplicate components (same mean and sigma) are not allowed");
            d_min_ = std::min(d_min_, dist);
        }
    }
}

GaussianMixtureTarget GaussianMixtureTarget::from_unimodal(const UnimodalGaussianTarget& target) {
    return GaussianMixtureTarget({MixtureComponent{1.0, target.mu, target.sigma}});
}

double GaussianMixtureTarget::log_density(std::span<const double> x) const {
    if (static_cast<int>(x.size()) != dim_) throw std::invalid_argument("log_density: dimension mismatch");
    double max_term = -std::numeric_limits<double>::infinity();
    std::vector<double> terms(components_.size());
    for (std::size_t j = 0; j < components_.size(); ++j) {
        const auto& c = components_[j];
        terms[j] = std::log(c.weight) + isotropic_log_density(x, c.mu, c.sigma * c.sigma);
        max_term = std::max(max_term, terms[j]);
    }
    double acc = 0.0;
    for (double term : terms) acc += std::exp(term - max_term);
    return max_term + std::log(acc);
}

void GaussianMixtureTarget::sample(Rng& rng, std::span<double> out) const {
    if (static_cast<int>(out.size()) != dim_) throw std::invalid_argument("sample: dimension mismatch");
    std::size_t pick = 0;
    if (components_.size() > 1) {
        const double u = rng.uniform();
        double cum = 0.0;
        pick = components_.size() - 1;
        for (std::size_t j = 0; j < components_.size(); ++j) {
            cum += components_[j].weight;
            if (u < cum) {
                pick = j;
                break;
            }
        }
    }
    const auto& c = components_[pick];
    for (int i = 0; i < dim_; ++i) out[static_cast<std::size_t>(i)] = c.mu[static_cast<std::size_t>(i)] + c.sigma * rng.normal();
}

Schedule::Schedule(int outer_steps, int inner_steps) : n_outer(outer_steps), n_inner(inner_steps) {
    if (n_outer < 1) throw std::invalid_argument("Schedule: outer step count must be >= 1");
    if (n_inner < 1) throw std::invalid_argument("Schedule: inner step count must be >= 1");
}

double path_variance(double t, double sigma) {
    check_time_and_sigma(t, sigma, "path_variance");
    return detail::path_b(t, sigma);
}

double path_cross_covariance(double t, double sigma) {
    check_time_and_sigma(t, sigma, "path_cross_covariance");
    return detail::path_a(t, sigma);
}

PathCoefficients path_coefficients(double t, double sigma) {
    const double B = path_variance(t, sigma);
    const double A = path_cross_covariance(t, sigma);
    const double sigma2 = sigma * sigma;
    // Internal consistency: A^2 + sigma^2 = (1 + sigma^2) B.
    const double lhs = A * A + sigma2;
    const double rhs = (1.0 + sigma2) * B;
    if (std::abs(lhs - rhs) > 1e-10 * std::max(std::abs(lhs), std::abs(rhs)))
        throw std::logic_error("path_coefficients: covariance identity violated");
    return PathCoefficients{t, B, A, A / B, sigma2 / B};
}

}  // namespace tmfm
