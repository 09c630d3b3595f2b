#include "tmfm/divergence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include "tmfm/rng.hpp"
#include "tmfm/vec.hpp"

namespace tmfm {

namespace {

// Compact k-d tree for 1-nearest-neighbor queries, built once over the
// sample set. Splits on the axis of maximum extent at the median.
class KdTree {
public:
    KdTree(std::span<const double> points, int dim)
        : points_(points), dim_(dim), count_(points.size() / static_cast<std::size_t>(dim)) {
        indices_.resize(count_);
        std::iota(indices_.begin(), indices_.end(), std::size_t{0});
        nodes_.reserve(2 * count_ / kLeafSize + 2);
        root_ = build(0, count_);
    }

    // Squared distance to the nearest neighbor of the point at row `self`,
    // excluding `self` itself.
    double nearest_sq(std::size_t self) const {
        double best = std::numeric_limits<double>::infinity();
        query(root_, vec::row(points_, self, dim_), self, best);
        return best;
    }

private:
    static constexpr std::size_t kLeafSize = 12;

    struct Node {
        int axis = -1;  // -1 marks a leaf
        double split = 0.0;
        std::size_t begin = 0, end = 0;  // leaf payload range in indices_
        int left = -1, right = -1;
    };

    int build(std::size_t begin, std::size_t end) {
        Node node;
        if (end - begin <= kLeafSize) {
            node.begin = begin;
            node.end = end;
            nodes_.push_back(node);
            return static_cast<int>(nodes_.size()) - 1;
        }
        // Axis of maximum extent over this range.
        int axis = 0;
        double best_extent = -1.0;
        for (int a = 0; a < dim_; ++a) {
            double lo = std::numeric_limits<double>::infinity();
            double hi = -lo;
            for (std::size_t i = begin; i < end; ++i) {
                const double v = coord(indices_[i], a);
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
            if (hi - lo > best_extent) {
                best_extent = hi - lo;
                axis = a;
            }
        }
        const std::size_t mid = begin + (end - begin) / 2;
        std::nth_element(indices_.begin() + static_cast<std::ptrdiff_t>(begin),
                         indices_.begin() + static_cast<std::ptrdiff_t>(mid),
                         indices_.begin() + static_cast<std::ptrdiff_t>(end),
                         [&](std::size_t a, std::size_t b) { return coord(a, axis) < coord(b, axis); });
        node.axis = axis;
        node.split = coord(indices_[mid], axis);
        nodes_.push_back(node);
        const int self = static_cast<int>(nodes_.size()) - 1;
        const int left = build(begin, mid);
        const int right = build(mid, end);
        nodes_[static_cast<std::size_t>(self)].left = left;
        nodes_[static_cast<std::size_t>(self)].right = right;
        return self;
    }

    void query(int node_id, std::span<const double> q, std::size_t self, double& best) const {
        const Node& node = nodes_[static_cast<std::size_t>(node_id)];
        if (node.axis < 0) {
            for (std::size_t i = node.begin; i < node.end; ++i) {
                const std::size_t idx = indices_[i];
                if (idx == self) continue;
                const double d2 = vec::squared_distance(q, vec::row(points_, idx, dim_));
                best = std::min(best, d2);
            }
            return;
        }
        const double delta = q[static_cast<std::size_t>(node.axis)] - node.split;
        const int near = delta < 0.0 ? node.left : node.right;
        const int far = delta < 0.0 ? node.right : node.left;
        query(near, q, self, best);
        if (delta * delta < best) query(far, q, self, best);
    }

    double coord(std::size_t row, int axis) const {
        return points_[row * static_cast<std::size_t>(dim_) + static_cast<std::size_t>(axis)];
    }

    std::span<const double> points_;
    int dim_;
    std::size_t count_;
    std::vector<std::size_t> indices_;
    std::vector<Node> nodes_;
    int root_ = -1;
};

// psi(m) for integer m >= 1, exact via the harmonic sum.
double digamma_int(std::size_t m) {
    double acc = -std::numbers::egamma;
    for (std::size_t j = 1; j < m; ++j) acc += 1.0 / static_cast<double>(j);
    return acc;
}

double log_unit_ball_volume(int dim) {
    const double half_d = 0.5 * static_cast<double>(dim);
    return half_d * std::log(std::numbers::pi) - std::lgamma(half_d + 1.0);
}

}  // namespace

KLEstimate gaussian_kl(std::span<const double> mu_p, double var_p, std::span<const double> mu_q,
                       double var_q) {
    if (mu_p.size() != mu_q.size()) throw std::invalid_argument("gaussian_kl: dimension mismatch");
    if (!(var_p > 0.0) || !(var_q > 0.0))
        throw std::invalid_argument("gaussian_kl: variances must be positive");
    const double d = static_cast<double>(mu_p.size());
    const double ratio = var_p / var_q;
    const double mean_term = vec::squared_distance(mu_q, mu_p) / (2.0 * var_q);
    KLEstimate est;
    est.value = 0.5 * d * (ratio - 1.0 - std::log(ratio)) + mean_term;
    est.method = KLMethod::closed_form;
    est.sample_count = 0;
    return est;
}

double knn_entropy(std::span<const double> samples, int dim) {
    const std::size_t count = samples.size() / static_cast<std::size_t>(dim);
    if (count < 2) throw std::invalid_argument("knn_entropy: need at least two samples");
    KdTree tree(samples, dim);
    std::vector<double> logs(count);
    for (std::size_t i = 0; i < count; ++i) logs[i] = 0.5 * std::log(tree.nearest_sq(i));
    std::sort(logs.begin(), logs.end());
    double acc = 0.0;
    for (double v : logs) acc += v;
    return static_cast<double>(dim) * acc / static_cast<double>(count) + log_unit_ball_volume(dim) +
           digamma_int(count) - digamma_int(1);
}

KLEstimate knn_kl(std::span<const double> samples, int dim,
                  const std::function<double(std::span<const double>)>& log_q,
                  const KnnKLOptions& options) {
    const std::size_t count = samples.size() / static_cast<std::size_t>(dim);
    if (count < 2) throw std::invalid_argument("knn_kl: need at least two samples");
    if (samples.size() != count * static_cast<std::size_t>(dim))
        throw std::invalid_argument("knn_kl: sample buffer not a multiple of dim");

    std::vector<double> points(samples.begin(), samples.end());

    // Per-sample summands: -d log rho_i - log q(x_i). Duplicates (rho = 0)
    // get a deterministic jitter and another NN pass; near-degenerate point
    // clouds can need several passes before every pair separates, with the
    // scale growing each time.
    std::vector<double> nn_sq(count);
    std::size_t jittered = 0;
    double jitter_scale = 1e-12;
    Rng rng = Rng::stream(options.bootstrap_seed, stream_tag::scratch);
    for (int pass = 0; pass < 8; ++pass) {
        KdTree tree(points, dim);
        for (std::size_t i = 0; i < count; ++i) nn_sq[i] = tree.nearest_sq(i);
        std::size_t zeros = 0;
        for (std::size_t i = 0; i < count; ++i) {
            if (nn_sq[i] == 0.0) {
                ++zeros;
                auto row = vec::row(std::span<double>(points), i, dim);
                for (auto& v : row) v += jitter_scale * rng.normal();
            }
        }
        if (pass == 0) jittered = zeros;
        if (zeros == 0) break;
        jitter_scale *= 16.0;
    }

    std::vector<double> terms(count);
    const double d = static_cast<double>(dim);
    for (std::size_t i = 0; i < count; ++i) {
        terms[i] = -0.5 * d * std::log(nn_sq[i]) - log_q(vec::row(std::span<const double>(points), i, dim));
    }
    std::sort(terms.begin(), terms.end());

    const double entropy_const = log_unit_ball_volume(dim) + digamma_int(count) - digamma_int(1);
    double mean_term = 0.0;
    for (double v : terms) mean_term += v;
    mean_term /= static_cast<double>(count);

    KLEstimate est;
    est.value = mean_term - entropy_const;
    est.method = KLMethod::knn_mc;
    est.sample_count = count;
    est.jittered = jittered;

    // Bootstrap over the summands.
    const int resamples = options.bootstrap_resamples;
    if (resamples > 1) {
        Rng rng = Rng::stream(options.bootstrap_seed, stream_tag::bootstrap);
        std::vector<double> replicate_means(static_cast<std::size_t>(resamples));
        for (int r = 0; r < resamples; ++r) {
            double acc = 0.0;
            for (std::size_t i = 0; i < count; ++i) acc += terms[rng.uniform_index(count)];
            replicate_means[static_cast<std::size_t>(r)] = acc / static_cast<double>(count);
        }
        double mean_rep = 0.0;
        for (double v : replicate_means) mean_rep += v;
        mean_rep /= static_cast<double>(resamples);
        double var_rep = 0.0;
        for (double v : replicate_means) var_rep += (v - mean_rep) * (v - mean_rep);
        var_rep /= static_cast<double>(resamples - 1);
        est.std_error = std::sqrt(var_rep);
    }
    return est;
}

double CosSimHistogram::fraction_above(double c) const {
    if (values.empty()) return 0.0;
    std::size_t above = 0;
    for (double v : values)
        if (v > c) ++above;
    return static_cast<double>(above) / static_cast<double>(values.size());
}

CosSimHistogram cosine_similarity_histogram(std::span<const double> draws, int dim,
                                            std::span<const double> reference, int bins) {
    if (bins < 1) throw std::invalid_argument("cosine_similarity_histogram: bins must be >= 1");
    if (static_cast<int>(reference.size()) != dim)
        throw std::invalid_argument("cosine_similarity_histogram: reference dimension mismatch");
    const double ref_norm = vec::norm(reference);
    if (ref_norm == 0.0)
        throw std::invalid_argument("cosine_similarity_histogram: reference must be nonzero");
    const std::size_t count = draws.size() / static_cast<std::size_t>(dim);
    if (count < 1) throw std::invalid_argument("cosine_similarity_histogram: need at least one draw");

    CosSimHistogram hist;
    hist.edges.resize(static_cast<std::size_t>(bins) + 1);
    for (int b = 0; b <= bins; ++b)
        hist.edges[static_cast<std::size_t>(b)] = -1.0 + 2.0 * static_cast<double>(b) / bins;
    hist.counts.assign(static_cast<std::size_t>(bins), 0);
    hist.values.reserve(count);

    for (std::size_t m = 0; m < count; ++m) {
        const auto v = vec::row(draws, m, dim);
        const double norm = vec::norm(v);
        if (norm == 0.0) {
            ++hist.excluded_zero_norm;
            continue;
        }
        double cosine = vec::dot(v, reference) / (norm * ref_norm);
        cosine = std::clamp(cosine, -1.0, 1.0);
        int bin = static_cast<int>((cosine + 1.0) * 0.5 * bins);
        bin = std::clamp(bin, 0, bins - 1);  // bin cosine = 1 into the top bin
        ++hist.counts[static_cast<std::size_t>(bin)];
        hist.values.push_back(cosine);
    }
    hist.total = hist.values.size();
    hist.fraction_above_0_9 = hist.fraction_above(0.9);
    return hist;
}

}  // namespace tmfm
