// Small dense-vector helpers over std::span<const double>. States are kept
// as flat row-major buffers (count x dim) throughout the library.

#ifndef TMFM_VEC_HPP
#define TMFM_VEC_HPP

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace tmfm::vec {

inline double dot(std::span<const double> a, std::span<const double> b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

inline double squared_norm(std::span<const double> a) { return dot(a, a); }

inline double norm(std::span<const double> a) { return std::sqrt(squared_norm(a)); }

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double diff = a[i] - b[i];
        acc += diff * diff;
    }
    return acc;
}

inline double distance(std::span<const double> a, std::span<const double> b) {
    return std::sqrt(squared_distance(a, b));
}

// Row view into a flat (count x dim) buffer.
inline std::span<const double> row(std::span<const double> flat, std::size_t i, int dim) {
    return flat.subspan(i * static_cast<std::size_t>(dim), static_cast<std::size_t>(dim));
}

inline std::span<double> row(std::span<double> flat, std::size_t i, int dim) {
    return flat.subspan(i * static_cast<std::size_t>(dim), static_cast<std::size_t>(dim));
}

}  // namespace tmfm::vec

#endif  // TMFM_VEC_HPP
