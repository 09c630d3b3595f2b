// Target distributions and the scalar path functions of the linear
// (conditional optimal transport) interpolation X_t = (1-t) X0 + t X1 with
// source N(0, I_d).
//
// For an isotropic Gaussian target N(mu, sigma^2 I_d) the interpolant at
// time t has variance B(t) = (1-t)^2 + sigma^2 t^2 and the cross-covariance
// between X_t and the difference latent V = X1 - X0 is A(t) = t(1+sigma^2)-1.
// These two scalars drive everything else: the conditional posterior slope
// k(t) = A/B and its variance tau^2(t) = sigma^2/B.

#ifndef TMFM_TARGETS_HPP
#define TMFM_TARGETS_HPP

#include <span>
#include <vector>

namespace tmfm {

struct UnimodalGaussianTarget {
    std::vector<double> mu;  // length d
    double sigma;            // isotropic standard deviation, > 0

    UnimodalGaussianTarget(std::vector<double> mean, double sigma_in);

    int dim() const { return static_cast<int>(mu.size()); }

    double log_density(std::span<const double> x) const;
};

struct MixtureComponent {
    double weight;           // in (0, 1)
    std::vector<double> mu;  // length d
    double sigma;            // > 0
};

class GaussianMixtureTarget {
public:
    // Validates: weights sum to 1 (1e-12), sigma > 0, consistent dimensions,
    // K >= 1, and no two components with identical mean and sigma.
    explicit GaussianMixtureTarget(std::vector<MixtureComponent> components);

    static GaussianMixtureTarget from_unimodal(const UnimodalGaussianTarget& target);

    int dim() const { return dim_; }
    int size() const { return static_cast<int>(components_.size()); }
    const MixtureComponent& component(int k) const { return components_[static_cast<std::size_t>(k)]; }
    const std::vector<MixtureComponent>& components() const { return components_; }

    // Minimum pairwise distance between component means; +infinity for K=1.
    double min_mean_separation() const { return d_min_; }
    double max_sigma() const { return sigma_max_; }
    double min_sigma() const { return sigma_min_; }

    // Log-density of the mixture itself (the t=1 target), stabilized in
    // log space.
    double log_density(std::span<const double> x) const;

    // Ancestral draw: component by weight, then isotropic Gaussian.
    void sample(class Rng& rng, std::span<double> out) const;

private:
    std::vector<MixtureComponent> components_;
    int dim_ = 0;
    double d_min_ = 0.0;
    double sigma_max_ = 0.0;
    double sigma_min_ = 0.0;
};

// Outer/inner Euler discretization of [0,1]. Grid nodes are represented as
// the exact rationals n/N so that t(0) == 0 and t(N) == 1 hold bitwise.
struct Schedule {
    int n_outer;  // N >= 1
    int n_inner;  // S >= 1

    explicit Schedule(int outer_steps, int inner_steps = 1);

    double t(int n) const { return static_cast<double>(n) / static_cast<double>(n_outer); }
    double t_inner(int s) const { return static_cast<double>(s) / static_cast<double>(n_inner); }
    double dt() const { return 1.0 / static_cast<double>(n_outer); }
    double ds() const { return 1.0 / static_cast<double>(n_inner); }
};

struct PathCoefficients {
    double t;
    double B;     // interpolant variance, > 0
    double A;     // cross-covariance with the difference latent
    double k;     // posterior slope A/B
    double tau2;  // posterior variance sigma^2/B
};

// B(t) = (1-t)^2 + sigma^2 t^2. Throws std::domain_error outside t in [0,1]
// or sigma <= 0.
double path_variance(double t, double sigma);

// A(t) = t(1 + sigma^2) - 1. Same domain checks.
double path_cross_covariance(double t, double sigma);

// All four scalars at once. Verifies A^2 + sigma^2 = (1+sigma^2) B to 1e-10
// relative and throws std::logic_error on violation.
PathCoefficients path_coefficients(double t, double sigma);

}  // namespace tmfm

#endif  // TMFM_TARGETS_HPP
