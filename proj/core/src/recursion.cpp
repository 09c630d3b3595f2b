#include "tmfm/recursion.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "tmfm/targets.hpp"

namespace tmfm {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double contraction_weight(double a, double dt, double sigma, double b) {
    const double g = sigma * sigma / (b * b);
    return a * a / (a * a + dt * dt * g);
}

// Adaptive Simpson on [lo, hi] to absolute tolerance tol.
double adaptive_simpson(double (*f)(double, double), double param, double lo, double hi,
                        double f_lo, double f_mid, double f_hi, double whole, double tol,
                        int depth) {
    const double mid = 0.5 * (lo + hi);
    const double lmid = 0.5 * (lo + mid);
    const double rmid = 0.5 * (mid + hi);
    const double f_lmid = f(lmid, param);
    const double f_rmid = f(rmid, param);
    const double left = (mid - lo) / 6.0 * (f_lo + 4.0 * f_lmid + f_mid);
    const double right = (hi - mid) / 6.0 * (f_mid + 4.0 * f_rmid + f_hi);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    return adaptive_simpson(f, param, lo, mid, f_lo, f_lmid, f_mid, left, 0.5 * tol, depth - 1) +
           adaptive_simpson(f, param, mid, hi, f_mid, f_rmid, f_hi, right, 0.5 * tol, depth - 1);
}

double inverse_b_squared(double t, double sigma) {
    const double b = path_variance(t, sigma);
    return 1.0 / (b * b);
}

VarianceTrace build_trace(double sigma, int n_steps, int inner_steps, int dim, bool with_tm,
                          bool exact_inner) {
    if (n_steps < 1) throw std::invalid_argument("variance trace: N must be >= 1");
    if (!(sigma > 0.0)) throw std::invalid_argument("variance trace: sigma must be positive");
    if (dim < 1) throw std::invalid_argument("variance trace: dim must be >= 1");
    if (with_tm && !exact_inner && inner_steps < 1)
        throw std::invalid_argument("variance trace: S must be >= 1");

    const Schedule schedule(n_steps, with_tm && !exact_inner ? inner_steps : 1);
    VarianceTrace trace;
    trace.sigma = sigma;
    trace.n_outer = n_steps;
    trace.inner_steps = with_tm ? (exact_inner ? 0 : inner_steps) : 0;
    trace.dim = dim;
    trace.has_tm = with_tm;
    trace.rows.resize(static_cast<std::size_t>(n_steps) + 1);

    const double dt = schedule.dt();
    double s_fm = 1.0;
    double r_tm = 1.0;
    for (int n = 0; n <= n_steps; ++n) {
        auto& row = trace.rows[static_cast<std::size_t>(n)];
        const PathCoefficients path = path_coefficients(schedule.t(n), sigma);
        row.n = n;
        row.t = path.t;
        row.B = path.B;
        row.A = path.A;
        row.k = path.k;
        row.tau2 = path.tau2;
        row.s_fm = s_fm;
        row.r_fm = s_fm / path.B;
        if (with_tm) {
            row.r_tm = r_tm;
            row.s_tm = r_tm * path.B;
        } else {
            row.r_tm = kNaN;
            row.s_tm = kNaN;
        }
        if (n < n_steps) {
            row.a = 1.0 + dt * path.k;
            row.b_coeff = dt * (1.0 - path.k * path.t);
            row.w = contraction_weight(row.a, dt, sigma, path.B);
            if (with_tm) {
                const double c_s =
                    exact_inner ? 1.0 : inner_contraction(std::sqrt(path.tau2), inner_steps);
                row.c_s = c_s;
                r_tm = row.w * r_tm + (1.0 - row.w) * c_s;
            } else {
                row.c_s = kNaN;
            }
            s_fm = row.a * row.a * s_fm;
        } else {
            row.a = kNaN;
            row.b_coeff = kNaN;
            row.w = kNaN;
            row.c_s = kNaN;
        }
    }
    return trace;
}

}  // namespace

VarianceTrace fm_variance_trace(double sigma, int n_steps, int dim) {
    return build_trace(sigma, n_steps, 0, dim, /*with_tm=*/false, /*exact_inner=*/false);
}

double inner_contraction(double tau, int inner_steps) {
    if (!(tau > 0.0)) throw std::invalid_argument("inner_contraction: tau must be positive");
    if (inner_steps < 1) throw std::invalid_argument("inner_contraction: S must be >= 1");
    // The inner problem has its own S-step unit-interval discretization.
    const Schedule inner(inner_steps);
    const double ds = inner.dt();
    double c = 1.0;
    for (int s_idx = 0; s_idx < inner_steps; ++s_idx) {
        const PathCoefficients path = path_coefficients(inner.t(s_idx), tau);
        const double a = 1.0 + ds * path.k;
        c *= contraction_weight(a, ds, tau, path.B);
    }
    return c;
}

VarianceTrace tm_variance_trace(double sigma, int n_steps, int inner_steps, int dim,
                                bool exact_inner) {
    return build_trace(sigma, n_steps, inner_steps, dim, /*with_tm=*/true, exact_inner);
}

double gaussian_kl_isotropic_ratio(double s, double sigma2, int dim) {
    if (!(sigma2 > 0.0)) throw std::invalid_argument("gaussian_kl: target variance must be positive");
    if (s < 0.0) throw std::invalid_argument("gaussian_kl: sampler variance must be nonnegative");
    if (s == 0.0) return std::numeric_limits<double>::infinity();
    const double x = s / sigma2;
    return 0.5 * static_cast<double>(dim) * (x - 1.0 - std::log(x));
}

KLReport gaussian_kl_from_trace(const VarianceTrace& trace, double sigma, int dim) {
    const TraceRow& last = trace.final_row();
    KLReport report;
    report.dim = dim;
    report.has_tm = trace.has_tm;
    report.s_fm_final = last.s_fm;
    report.kl_fm = gaussian_kl_isotropic_ratio(last.s_fm, sigma * sigma, dim);
    if (trace.has_tm) {
        report.s_tm_final = last.s_tm;
        report.kl_tm = gaussian_kl_isotropic_ratio(last.s_tm, sigma * sigma, dim);
    } else {
        report.s_tm_final = kNaN;
        report.kl_tm = kNaN;
    }
    return report;
}

RateFit fit_rate(std::span<const double> xs, std::span<const double> kls) {
    if (xs.size() != kls.size()) throw std::invalid_argument("fit_rate: size mismatch");
    std::vector<double> lx;
    std::vector<double> ly;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (!(kls[i] > 0.0)) throw std::invalid_argument("fit_rate: KL values must be positive");
        if (kls[i] < 1e-14) continue;  // floating-point floor; excluded from the fit
        if (!(xs[i] > 0.0)) throw std::invalid_argument("fit_rate: grid values must be positive");
        lx.push_back(std::log(xs[i]));
        ly.push_back(std::log(kls[i]));
    }
    if (lx.size() < 4) throw std::invalid_argument("fit_rate: need at least 4 usable points");

    const double n = static_cast<double>(lx.size());
    double mean_x = 0.0;
    double mean_y = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        mean_x += lx[i];
        mean_y += ly[i];
    }
    mean_x /= n;
    mean_y /= n;
    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxx += (lx[i] - mean_x) * (lx[i] - mean_x);
        sxy += (lx[i] - mean_x) * (ly[i] - mean_y);
    }
    RateFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = mean_y - fit.slope * mean_x;
    double rss = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        const double resid = ly[i] - (fit.intercept + fit.slope * lx[i]);
        rss += resid * resid;
    }
    fit.residual_rms = std::sqrt(rss / n);
    fit.n_points = lx.size();
    fit.x_min = std::exp(*std::min_element(lx.begin(), lx.end()));
    fit.x_max = std::exp(*std::max_element(lx.begin(), lx.end()));
    return fit;
}

double p_constant(double sigma) {
    if (!(sigma > 0.0)) throw std::invalid_argument("p_constant: sigma must be positive");
    const double tol = 1e-10;
    const double f_lo = inverse_b_squared(0.0, sigma);
    const double f_mid = inverse_b_squared(0.5, sigma);
    const double f_hi = inverse_b_squared(1.0, sigma);
    const double whole = (1.0 / 6.0) * (f_lo + 4.0 * f_mid + f_hi);
    const double integral =
        adaptive_simpson(inverse_b_squared, sigma, 0.0, 1.0, f_lo, f_mid, f_hi, whole, tol, 40);
    return sigma * sigma * integral;
}

void write_trace_csv(const VarianceTrace& trace, std::ostream& out) {
    out << "n,t,B,A,k,tau2,a,w,s_fm,s_tm,r_fm,r_tm,c_S\n";
    char buffer[352];
    for (const auto& row : trace.rows) {
        std::snprintf(buffer, sizeof(buffer),
                      "%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                      row.n, row.t, row.B, row.A, row.k, row.tau2, row.a, row.w, row.s_fm, row.s_tm,
                      row.r_fm, row.r_tm, row.c_s);
        out << buffer;
    }
}

}  // namespace tmfm
