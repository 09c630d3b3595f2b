// Test-only statistical helpers: a two-sample energy-distance permutation
// test and simple moment utilities. Lives in test code so the checks stay
// independent of the library implementation they validate.

#ifndef TMFM_TESTS_STAT_TESTS_HPP
#define TMFM_TESTS_STAT_TESTS_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "tmfm/rng.hpp"
#include "tmfm/vec.hpp"

namespace tmfm_tests {

struct EnergyTestResult {
    double statistic = 0.0;
    double p_value = 1.0;
};

// Two-sample energy-distance test with a permutation null. Uses the first
// m_per_side rows of each sample set (rows are i.i.d. draws).
inline EnergyTestResult energy_distance_test(std::span<const double> xs,
                                             std::span<const double> ys, int dim,
                                             std::size_t m_per_side, int permutations,
                                             std::uint64_t seed) {
    const std::size_t m = m_per_side;
    const std::size_t total = 2 * m;
    std::vector<double> pooled(total * static_cast<std::size_t>(dim));
    std::copy_n(xs.begin(), m * static_cast<std::size_t>(dim), pooled.begin());
    std::copy_n(ys.begin(), m * static_cast<std::size_t>(dim),
                pooled.begin() + static_cast<std::ptrdiff_t>(m * static_cast<std::size_t>(dim)));

    // Pairwise distances of the pooled set, float to halve the footprint.
    std::vector<float> dist(total * total, 0.0f);
    for (std::size_t i = 0; i < total; ++i) {
        const auto a = tmfm::vec::row(std::span<const double>(pooled), i, dim);
        for (std::size_t j = i + 1; j < total; ++j) {
            const auto b = tmfm::vec::row(std::span<const double>(pooled), j, dim);
            const float dij = static_cast<float>(tmfm::vec::distance(a, b));
            dist[i * total + j] = dij;
            dist[j * total + i] = dij;
        }
    }

    const auto statistic_for = [&](const std::vector<std::size_t>& labels_a) {
        // labels_a holds the indices assigned to group A (size m).
        std::vector<char> in_a(total, 0);
        for (std::size_t idx : labels_a) in_a[idx] = 1;
        double sum_ab = 0.0;
        double sum_aa = 0.0;
        double sum_bb = 0.0;
        for (std::size_t i = 0; i < total; ++i) {
            for (std::size_t j = i + 1; j < total; ++j) {
                const double dij = dist[i * total + j];
                if (in_a[i] && in_a[j]) {
                    sum_aa += dij;
                } else if (!in_a[i] && !in_a[j]) {
                    sum_bb += dij;
                } else {
                    sum_ab += dij;
                }
            }
        }
        const double md = static_cast<double>(m);
        return 2.0 * sum_ab / (md * md) - 2.0 * sum_aa / (md * md) - 2.0 * sum_bb / (md * md);
    };

    std::vector<std::size_t> identity(m);
    std::iota(identity.begin(), identity.end(), std::size_t{0});
    EnergyTestResult result;
    result.statistic = statistic_for(identity);

    tmfm::Rng rng(seed);
    std::vector<std::size_t> order(total);
    std::iota(order.begin(), order.end(), std::size_t{0});
    int at_least = 0;
    for (int p = 0; p < permutations; ++p) {
        for (std::size_t i = total - 1; i > 0; --i) {
            const std::size_t j = rng.uniform_index(i + 1);
            std::swap(order[i], order[j]);
        }
        std::vector<std::size_t> group_a(order.begin(),
                                         order.begin() + static_cast<std::ptrdiff_t>(m));
        if (statistic_for(group_a) >= result.statistic) ++at_least;
    }
    result.p_value = (static_cast<double>(at_least) + 1.0) / (static_cast<double>(permutations) + 1.0);
    return result;
}

struct Moments {
    double mean = 0.0;
    double variance = 0.0;
    std::size_t count = 0;
};

inline Moments column_moments(std::span<const double> flat, int dim, int column) {
    Moments m;
    m.count = flat.size() / static_cast<std::size_t>(dim);
    for (std::size_t i = 0; i < m.count; ++i)
        m.mean += flat[i * static_cast<std::size_t>(dim) + static_cast<std::size_t>(column)];
    m.mean /= static_cast<double>(m.count);
    for (std::size_t i = 0; i < m.count; ++i) {
        const double v =
            flat[i * static_cast<std::size_t>(dim) + static_cast<std::size_t>(column)] - m.mean;
        m.variance += v * v;
    }
    m.variance /= static_cast<double>(m.count - 1);
    return m;
}

}  // namespace tmfm_tests

#endif  // TMFM_TESTS_STAT_TESTS_HPP
