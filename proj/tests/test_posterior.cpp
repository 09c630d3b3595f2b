#include <doctest.h>

#include <cmath>
#include <cstring>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "tmfm/bounds.hpp"
#include "tmfm/posterior.hpp"
#include "tmfm/rng.hpp"
#include "tmfm/targets.hpp"
#include "tmfm/vec.hpp"

using namespace tmfm;

namespace {

GaussianMixtureTarget symmetric_pair(double separation, double sigma, int dim = 1) {
    std::vector<double> mu1(static_cast<std::size_t>(dim), 0.0);
    std::vector<double> mu2(static_cast<std::size_t>(dim), 0.0);
    mu1[0] = separation / 2.0;
    mu2[0] = -separation / 2.0;
    return GaussianMixtureTarget({{0.5, mu1, sigma}, {0.5, mu2, sigma}});
}

}  // namespace

TEST_CASE("unimodal posterior fixed points") {
    {
        const UnimodalGaussianTarget target({0.0}, 1.0);
        const UnimodalPosterior post = unimodal_posterior(target, 0.5, std::vector<double>{0.0});
        CHECK(post.mean[0] == doctest::Approx(0.0));
        CHECK(post.tau2 == doctest::Approx(2.0));
    }
    {
        const UnimodalGaussianTarget target({0.0}, 1.0);
        const UnimodalPosterior post = unimodal_posterior(target, 0.0, std::vector<double>{0.0});
        CHECK(post.mean[0] == doctest::Approx(0.0));
        CHECK(post.tau2 == doctest::Approx(1.0));
    }
    {
        // x on the path mean: posterior mean is exactly the target mean and
        // tau^2 = sigma^2 / B(0.8) = 0.25 / 0.2.
        const UnimodalGaussianTarget target({2.0}, 0.5);
        const UnimodalPosterior post = unimodal_posterior(target, 0.8, std::vector<double>{1.6});
        CHECK(post.mean[0] == doctest::Approx(2.0).epsilon(1e-14));
        CHECK(post.tau2 == doctest::Approx(1.25).epsilon(1e-14));
    }
}

TEST_CASE("unimodal posterior mean at the path mean is the target mean exactly") {
    const std::vector<double> mus = {-3.0, 0.0, 0.7, 42.0};
    for (double mu : mus) {
        for (double sigma : {0.2, 1.0, 4.0}) {
            for (double t : {0.0, 0.3, 0.5, 0.99, 1.0}) {
                const UnimodalGaussianTarget target({mu}, sigma);
                const UnimodalPosterior post =
                    unimodal_posterior(target, t, std::vector<double>{t * mu});
                CHECK(std::abs(post.mean[0] - mu) <= 1e-12 * std::max(1.0, std::abs(mu)));
            }
        }
    }
}

TEST_CASE("unimodal posterior dimension mismatch") {
    const UnimodalGaussianTarget target({0.0, 0.0}, 1.0);
    CHECK_THROWS_AS(unimodal_posterior(target, 0.5, std::vector<double>{0.0}),
                    std::invalid_argument);
}

TEST_CASE("responsibilities: symmetry, single component, closed form") {
    const GaussianMixtureTarget pair = symmetric_pair(4.0, 1.0);
    // Equidistant point.
    const std::vector<double> w_mid = responsibilities(pair, 0.7, std::vector<double>{0.0});
    CHECK(w_mid[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(w_mid[1] == doctest::Approx(0.5).epsilon(1e-12));

    // Single component.
    const GaussianMixtureTarget single({{1.0, {2.0}, 0.5}});
    const std::vector<double> w_one = responsibilities(single, 0.4, std::vector<double>{1.0});
    CHECK(w_one.size() == 1);
    CHECK(w_one[0] == 1.0);

    // x = t mu_1: w_1 = 1 / (1 + exp(-t^2 D^2 / (2 B_t))) for equal sigmas.
    const double t = 0.6;
    const double d_sep = 4.0;
    const std::vector<double> x = {t * 2.0};
    const std::vector<double> w = responsibilities(pair, t, x);
    const double b = path_variance(t, 1.0);
    const double expected = 1.0 / (1.0 + std::exp(-t * t * d_sep * d_sep / (2.0 * b)));
    CHECK(w[0] == doctest::Approx(expected).epsilon(1e-12));

    // Same value from a direct density-ratio evaluation.
    const auto log_comp = [&](int j) {
        const double mu = pair.component(j).mu[0];
        const double diff = x[0] - t * mu;
        return -0.5 * std::log(2.0 * std::numbers::pi * b) - 0.5 * diff * diff / b;
    };
    const double direct =
        std::exp(log_comp(0)) / (std::exp(log_comp(0)) + std::exp(log_comp(1)));
    CHECK(w[0] == doctest::Approx(direct).epsilon(1e-12));
}

TEST_CASE("responsibilities sum to one and stay in [0,1], even in extreme regimes") {
    Rng rng(99);
    for (int trial = 0; trial < 200; ++trial) {
        const double sep = rng.uniform(0.1, 60.0);
        const double sigma = rng.uniform(0.01, 2.0);
        const GaussianMixtureTarget target = symmetric_pair(sep, sigma, 2);
        const double t = rng.uniform(0.0, 1.0);
        const std::vector<double> x = {rng.uniform(-sep, sep), rng.uniform(-2.0, 2.0)};
        const std::vector<double> w = responsibilities(target, t, x);
        double sum = 0.0;
        for (double v : w) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
            sum += v;
        }
        CHECK(std::abs(sum - 1.0) <= 1e-10);
    }
}

TEST_CASE("responsibilities survive where direct exponentials underflow") {
    // Far-separated means with tiny variances near t = 1: the unnormalized
    // densities underflow to zero in linear space, but the log-space path
    // still produces a valid distribution.
    const GaussianMixtureTarget target = symmetric_pair(80.0, 0.001);
    const std::vector<double> x = {0.999 * 40.0 + 0.3};
    const std::vector<double> w = responsibilities(target, 0.999, x);
    CHECK(std::abs(w[0] + w[1] - 1.0) <= 1e-10);
    CHECK(w[0] > 0.999);

    // The same computation done naively underflows: both unnormalized
    // densities are zero.
    const double b = path_variance(0.999, 0.001);
    const double q0 = std::exp(-0.5 * (x[0] - 0.999 * 40.0) * (x[0] - 0.999 * 40.0) / b) / b;
    const double q1 = std::exp(-0.5 * (x[0] + 0.999 * 40.0) * (x[0] + 0.999 * 40.0) / b) / b;
    CHECK(q0 + q1 == 0.0);
}

TEST_CASE("log responsibilities normalize consistently") {
    const GaussianMixtureTarget a({{0.2, {-1.0}, 0.8}, {0.8, {1.5}, 1.1}});
    const std::vector<double> x = {0.3};
    const std::vector<double> lw = log_responsibilities(a, 0.6, x);
    const std::vector<double> w = responsibilities(a, 0.6, x);
    for (std::size_t j = 0; j < w.size(); ++j)
        CHECK(std::exp(lw[j]) == doctest::Approx(w[j]).epsilon(1e-14));
    double sum = 0.0;
    for (double v : w) sum += v;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("mixture posterior combines responsibilities with component posteriors") {
    const GaussianMixtureTarget pair = symmetric_pair(6.0, 0.7, 2);
    const std::vector<double> x = {1.1, -0.4};
    const double t = 0.55;
    const MixturePosterior post = mixture_posterior(pair, t, x);
    const std::vector<double> w = responsibilities(pair, t, x);

    REQUIRE(post.size() == 2);
    for (int j = 0; j < 2; ++j) {
        CHECK(post.weights[static_cast<std::size_t>(j)] == w[static_cast<std::size_t>(j)]);
        const auto& comp = pair.component(j);
        const UnimodalGaussianTarget comp_target(comp.mu, comp.sigma);
        const UnimodalPosterior expected = unimodal_posterior(comp_target, t, x);
        CHECK(post.components[static_cast<std::size_t>(j)].tau2 == expected.tau2);
        for (int i = 0; i < 2; ++i)
            CHECK(post.components[static_cast<std::size_t>(j)].mean[static_cast<std::size_t>(i)] ==
                  expected.mean[static_cast<std::size_t>(i)]);
    }

    // Conditional mean is the responsibility-weighted component mean.
    const std::vector<double> mean = post.mean();
    for (int i = 0; i < 2; ++i) {
        const double expected = w[0] * post.components[0].mean[static_cast<std::size_t>(i)] +
                                w[1] * post.components[1].mean[static_cast<std::size_t>(i)];
        CHECK(mean[static_cast<std::size_t>(i)] == doctest::Approx(expected).epsilon(1e-14));
    }
}

TEST_CASE("K=1 mixture posterior agrees bitwise with the unimodal posterior") {
    const UnimodalGaussianTarget unimodal({1.25, -0.75}, 0.6);
    const GaussianMixtureTarget as_mixture = GaussianMixtureTarget::from_unimodal(unimodal);
    for (double t : {0.0, 0.25, 0.5, 0.9, 1.0}) {
        const std::vector<double> x = {0.4, 2.2};
        const UnimodalPosterior u = unimodal_posterior(unimodal, t, x);
        const MixturePosterior m = mixture_posterior(as_mixture, t, x);
        CHECK(m.weights[0] == 1.0);
        CHECK(std::memcmp(m.components[0].mean.data(), u.mean.data(), sizeof(double) * 2) == 0);
        CHECK(m.components[0].tau2 == u.tau2);

        // Velocity path agrees bitwise too.
        std::vector<double> v_uni(2);
        std::vector<double> v_mix(2);
        conditional_mean_velocity(unimodal, t, x, v_uni);
        conditional_mean_velocity(as_mixture, t, x, v_mix);
        CHECK(std::memcmp(v_uni.data(), v_mix.data(), sizeof(double) * 2) == 0);
    }
}

TEST_CASE("nearest mode: geometry, ties, single component") {
    const GaussianMixtureTarget pair = symmetric_pair(8.0, 1.0, 2);
    const double t = 0.5;
    {
        // Exactly at the scaled second mode.
        const std::vector<double> x = {t * -4.0, 0.0};
        const NearestModeInfo info = nearest_mode(pair, t, x);
        CHECK(info.k_star == 1);
        CHECK(info.distance == doctest::Approx(0.0));
        CHECK(info.margin == doctest::Approx(t * 8.0).epsilon(1e-12));
    }
    {
        // Equidistant: tie broken toward the lower index, margin zero.
        const std::vector<double> x = {0.0, 1.3};
        const NearestModeInfo info = nearest_mode(pair, t, x);
        CHECK(info.k_star == 0);
        CHECK(info.margin == doctest::Approx(0.0));
    }
    {
        // Two modes on the unit circle at polar angles +-2pi/9, t = 1,
        // x = mu_1: margin is the chord length 2 sin(2pi/9).
        const double theta = 2.0 * std::numbers::pi / 9.0;
        const GaussianMixtureTarget circle(
            {{0.5, {std::cos(theta), std::sin(theta)}, 0.1},
             {0.5, {std::cos(theta), -std::sin(theta)}, 0.1}});
        const std::vector<double> x = {std::cos(theta), std::sin(theta)};
        const NearestModeInfo info = nearest_mode(circle, 1.0, x);
        CHECK(info.k_star == 0);
        CHECK(info.distance == doctest::Approx(0.0));
        CHECK(info.margin == doctest::Approx(2.0 * std::sin(theta)).epsilon(1e-12));
    }
    {
        const GaussianMixtureTarget single({{1.0, {3.0}, 1.0}});
        const NearestModeInfo info = nearest_mode(single, 0.5, std::vector<double>{0.0});
        CHECK(info.k_star == 0);
        CHECK(std::isinf(info.margin));
    }
}

TEST_CASE("sample_posterior: point mass, determinism, CLT mean check") {
    {
        // Degenerate posterior samples as a point mass.
        UnimodalPosterior post;
        post.mean = {1.0, -2.0};
        post.tau2 = 0.0;
        Rng rng(7);
        std::vector<double> out(5 * 2);
        sample_posterior(post, rng, 5, out);
        for (std::size_t m = 0; m < 5; ++m) {
            CHECK(out[2 * m] == 1.0);
            CHECK(out[2 * m + 1] == -2.0);
        }
    }
    {
        // Identical rng state, identical output.
        UnimodalPosterior post;
        post.mean = {0.5};
        post.tau2 = 1.7;
        Rng rng_a(1234);
        Rng rng_b(1234);
        std::vector<double> out_a(1000);
        std::vector<double> out_b(1000);
        sample_posterior(post, rng_a, 1000, out_a);
        sample_posterior(post, rng_b, 1000, out_b);
        CHECK(std::memcmp(out_a.data(), out_b.data(), sizeof(double) * 1000) == 0);
    }
    {
        // Sample mean within 4 tau / sqrt(M) of the true mean per coordinate.
        const std::size_t m_count = 1000000;
        UnimodalPosterior post;
        post.mean = {2.0};
        post.tau2 = 0.49;
        Rng rng(42);
        std::vector<double> out(m_count);
        sample_posterior(post, rng, m_count, out);
        double mean = 0.0;
        for (double v : out) mean += v;
        mean /= static_cast<double>(m_count);
        const double tolerance = 4.0 * std::sqrt(post.tau2 / static_cast<double>(m_count));
        CHECK(std::abs(mean - 2.0) <= tolerance);
    }
}

TEST_CASE("mixture posterior mean matches Monte Carlo draws within 5 standard errors") {
    const GaussianMixtureTarget pair = symmetric_pair(3.0, 0.8, 2);
    const double t = 0.45;
    const std::vector<double> x = {0.6, -0.2};
    const MixturePosterior post = mixture_posterior(pair, t, x);
    const std::vector<double> exact_mean = post.mean();

    const std::size_t m_count = 100000;
    std::vector<double> draws(m_count * 2);
    Rng rng(314159);
    sample_posterior(post, rng, m_count, draws);

    for (int i = 0; i < 2; ++i) {
        double mean = 0.0;
        double second = 0.0;
        for (std::size_t m = 0; m < m_count; ++m) {
            const double v = draws[2 * m + static_cast<std::size_t>(i)];
            mean += v;
            second += v * v;
        }
        mean /= static_cast<double>(m_count);
        const double variance = second / static_cast<double>(m_count) - mean * mean;
        const double se = std::sqrt(variance / static_cast<double>(m_count));
        CHECK(std::abs(mean - exact_mean[static_cast<std::size_t>(i)]) <= 5.0 * se);
    }
}

TEST_CASE("deep in a mode's region the responsibility concentrates") {
    // Well-separated pair at late time: the near mode dominates, and the
    // measured responsibility deficit respects the dominance bound for a
    // region containing x.
    const GaussianMixtureTarget pair = symmetric_pair(10.0, 0.5, 2);
    const double t = 0.9;
    const std::vector<double> x = {t * 5.0, 0.0};
    const std::vector<double> w = responsibilities(pair, t, x);
    CHECK(w[0] > 0.99);

    const GoodRegionSpec spec = GoodRegionSpec::from_beta(pair, t, 0.1);
    REQUIRE(good_region_membership(pair, spec, x).inside);
    const double epsilon = responsibility_dominance_bound(pair, t, spec);
    CHECK(epsilon < 0.01);
    CHECK(1.0 - w[0] <= epsilon);
}

TEST_CASE("mixture posterior matches joint interpolant sampling") {
    // Independent oracle for the analytic posterior: draw (X0, X1) jointly,
    // form X_t and V = X1 - X0, keep pairs with X_t in a narrow window
    // around x, and compare the windowed moments of V against the claimed
    // mixture-of-Gaussians conditional.
    const GaussianMixtureTarget target({{0.4, {1.5}, 0.6}, {0.6, {-1.0}, 0.9}});
    const double t = 0.6;
    const double x = 0.35;
    const double window = 0.02;

    Rng rng(777);
    std::vector<double> kept_v;
    std::vector<double> x1(1);
    for (int i = 0; i < 4000000; ++i) {
        target.sample(rng, x1);
        const double x0 = rng.normal();
        const double xt = (1.0 - t) * x0 + t * x1[0];
        if (std::abs(xt - x) < window) kept_v.push_back(x1[0] - x0);
    }
    REQUIRE(kept_v.size() > 5000);

    double mc_mean = 0.0;
    for (double v : kept_v) mc_mean += v;
    mc_mean /= static_cast<double>(kept_v.size());
    double mc_var = 0.0;
    for (double v : kept_v) mc_var += (v - mc_mean) * (v - mc_mean);
    mc_var /= static_cast<double>(kept_v.size()) - 1.0;

    const MixturePosterior post = mixture_posterior(target, t, std::vector<double>{x});
    const double exact_mean = post.mean()[0];
    double exact_var = -exact_mean * exact_mean;
    for (int j = 0; j < post.size(); ++j) {
        const auto& comp = post.components[static_cast<std::size_t>(j)];
        exact_var += post.weights[static_cast<std::size_t>(j)] *
                     (comp.tau2 + comp.mean[0] * comp.mean[0]);
    }

    const double se_mean = std::sqrt(mc_var / static_cast<double>(kept_v.size()));
    // Window bias is O(window); allow it alongside the Monte Carlo error.
    CHECK(std::abs(mc_mean - exact_mean) <= 5.0 * se_mean + 0.1 * window);
    CHECK(std::abs(mc_var - exact_var) <= 0.05 * exact_var);
}

TEST_CASE("MixtureVelocity matches conditional_mean_velocity and handles sigma = 0") {
    const GaussianMixtureTarget pair = symmetric_pair(5.0, 0.9, 2);
    MixtureVelocity velocity(pair);
    std::vector<double> out_a(2);
    std::vector<double> out_b(2);
    const std::vector<double> x = {0.7, 0.1};
    velocity(0.3, x, out_a);
    conditional_mean_velocity(pair, 0.3, x, out_b);
    CHECK(out_a[0] == out_b[0]);
    CHECK(out_a[1] == out_b[1]);

    // Zero-sigma components (degenerate posterior as inner target) are legal
    // for times strictly below one.
    const std::vector<double> weights = {0.5, 0.5};
    const std::vector<double> means = {1.0, 0.0, -1.0, 0.0};
    const std::vector<double> sigmas = {0.0, 0.0};
    MixtureVelocity inner(weights, means, sigmas, 2);
    std::vector<double> v_out(2);
    inner(0.5, std::vector<double>{0.2, 0.0}, v_out);
    CHECK(std::isfinite(v_out[0]));
    CHECK(std::isfinite(v_out[1]));
}
