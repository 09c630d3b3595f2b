// Closed-form, sampling-free evolution of the two samplers' moments on an
// isotropic Gaussian target, and the KL divergences they imply.
//
// Both samplers track the interpolation mean exactly, so the comparison is
// purely about variance. With a_n = 1 + dt k(t_n):
//
//   flow sampler:        s_{n+1} = a_n^2 s_n                    (deterministic)
//   transition sampler:  s_{n+1} = a_n^2 s_n + dt^2 c_S tau^2(t_n)
//
// where c_S in [0, 1] is the variance contraction of the S-step inner flow
// (c_S -> 1 as S -> infinity; exact inner sampling has c_S = 1). In ratio
// form r_n = s_n / B(t_n):
//
//   r_{n+1}^flow = w_n r_n^flow
//   r_{n+1}^tm   = w_n r_n^tm + (1 - w_n) c_S,
//   w_n = a_n^2 / (a_n^2 + dt^2 sigma^2 / B(t_n)^2).
//
// The final KL against the target is d/2 (x - 1 - log x) with x = s_N/sigma^2.

#ifndef TMFM_RECURSION_HPP
#define TMFM_RECURSION_HPP

#include <iosfwd>
#include <span>
#include <vector>

namespace tmfm {

struct TraceRow {
    int n;
    double t;
    double B;     // interpolant variance at t_n
    double A;     // cross-covariance at t_n
    double k;     // posterior slope
    double tau2;  // posterior variance
    // Step quantities for the step n -> n+1; NaN on the final row.
    double a;        // 1 + dt k(t_n)
    double b_coeff;  // drift offset scale: b_n = b_coeff * mu
    double w;        // ratio contraction weight
    double c_s;      // inner contraction at tau(t_n); NaN for flow-only traces
    // State quantities at node n.
    double s_fm;
    double r_fm;
    double s_tm;  // NaN for flow-only traces
    double r_tm;  // NaN for flow-only traces
};

struct VarianceTrace {
    double sigma = 0.0;
    int n_outer = 0;
    int inner_steps = 0;   // 0 encodes the exact-inner (c_S = 1) limit
    int dim = 1;
    bool has_tm = false;
    std::vector<TraceRow> rows;  // nodes 0..N

    const TraceRow& final_row() const { return rows.back(); }
};

// Variance evolution of the flow sampler only.
VarianceTrace fm_variance_trace(double sigma, int n_steps, int dim);

// Variance contraction c_S of an S-step inner flow whose target standard
// deviation is tau: the product of the inner w factors. Note c_1 = 0 (a
// single inner Euler step lands exactly on the conditional mean, which is
// why S = 1 reproduces the flow sampler).
double inner_contraction(double tau, int inner_steps);

// Full trace with both samplers' columns. exact_inner = true uses c_S = 1
// at every step (the S -> infinity limit).
VarianceTrace tm_variance_trace(double sigma, int n_steps, int inner_steps, int dim,
                                bool exact_inner = false);

struct KLReport {
    double kl_fm = 0.0;      // +infinity when s_fm = 0 (N = 1 flow sampler)
    double kl_tm = 0.0;      // NaN for flow-only traces
    int dim = 1;
    double s_fm_final = 0.0;
    double s_tm_final = 0.0;  // NaN for flow-only traces
    bool has_tm = false;
};

KLReport gaussian_kl_from_trace(const VarianceTrace& trace, double sigma, int dim);

// d/2 (x - 1 - log x) with x = s / sigma^2; +infinity at s = 0.
double gaussian_kl_isotropic_ratio(double s, double sigma2, int dim);

struct RateFit {
    double slope = 0.0;
    double intercept = 0.0;
    double residual_rms = 0.0;
    std::size_t n_points = 0;
    double x_min = 0.0;
    double x_max = 0.0;
};

// Least-squares slope of log(kl) against log(x). Points with kl < 1e-14 are
// dropped (floating-point floor); throws if any kl <= 0 or fewer than four
// points remain.
RateFit fit_rate(std::span<const double> xs, std::span<const double> kls);

// P(sigma) = sigma^2 * integral_0^1 B(t)^-2 dt via adaptive Simpson
// quadrature (1e-10 absolute tolerance). N (1 - r_N^flow) converges to this
// constant.
double p_constant(double sigma);

// CSV export: header plus one row per node with columns
// (n, t, B, A, k, tau2, a, w, s_fm, s_tm, r_fm, r_tm, c_S). Step columns are
// "nan" on the final row; TM columns are "nan" for flow-only traces.
void write_trace_csv(const VarianceTrace& trace, std::ostream& out);

}  // namespace tmfm

#endif  // TMFM_RECURSION_HPP
