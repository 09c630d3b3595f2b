// Unchecked scalar path functions shared between the public path API and the
// hot mixture kernels. Both must evaluate the exact same expressions so that
// a K=1 mixture and the unimodal code path agree bitwise.

#ifndef TMFM_PATH_DETAIL_HPP
#define TMFM_PATH_DETAIL_HPP

namespace tmfm::detail {

inline double path_b(double t, double sigma) {
    const double one_minus_t = 1.0 - t;
    return one_minus_t * one_minus_t + sigma * sigma * t * t;
}

inline double path_a(double t, double sigma) { return t * (1.0 + sigma * sigma) - 1.0; }

}  // namespace tmfm::detail

#endif  // TMFM_PATH_DETAIL_HPP
