// Modeled compute cost of the two samplers. A flow sampler pays one
// backbone evaluation per outer step; the transition sampler pays one
// backbone evaluation per outer step plus S lightweight head evaluations:
//
//   cost_fm(N)    = N * C_B
//   cost_tm(N, S) = N * C_B + N * S * C_H
//
// The exchange rate between the two axes is kappa = C_B / C_H: one extra
// flow step buys kappa / N extra inner steps.

#ifndef TMFM_COST_HPP
#define TMFM_COST_HPP

#include <optional>
#include <stdexcept>

#include "tmfm/samplers.hpp"

namespace tmfm {

struct ComputeCostModel {
    double backbone_cost = 0.0;  // C_B, seconds per backbone evaluation
    double head_cost = 0.0;      // C_H, seconds per flow-head evaluation
    // Published ratio, when it differs from backbone_cost / head_cost due
    // to rounding of the published per-call costs.
    std::optional<double> kappa_published;

    ComputeCostModel(double c_backbone, double c_head,
                     std::optional<double> kappa = std::nullopt)
        : backbone_cost(c_backbone), head_cost(c_head), kappa_published(kappa) {
        if (!(backbone_cost > 0.0) || !(head_cost > 0.0))
            throw std::invalid_argument("ComputeCostModel: costs must be positive");
    }

    double kappa() const { return kappa_published ? *kappa_published : backbone_cost / head_cost; }

    // Measured per-call costs of the reference image-generation setup.
    static ComputeCostModel image_task() { return ComputeCostModel(0.01120, 0.00238, 4.70); }
    // Measured per-call costs of the reference video-generation setup.
    static ComputeCostModel video_task() { return ComputeCostModel(0.00965, 0.00024, 40.08); }
};

inline double cost_fm(const ComputeCostModel& model, int n_steps) {
    if (n_steps < 1) throw std::invalid_argument("cost_fm: N must be >= 1");
    return static_cast<double>(n_steps) * model.backbone_cost;
}

inline double cost_tm(const ComputeCostModel& model, int n_steps, int inner_steps) {
    if (n_steps < 1) throw std::invalid_argument("cost_tm: N must be >= 1");
    if (inner_steps < 1) throw std::invalid_argument("cost_tm: S must be >= 1");
    return static_cast<double>(n_steps) * model.backbone_cost +
           static_cast<double>(n_steps) * static_cast<double>(inner_steps) * model.head_cost;
}

inline double cost(const ComputeCostModel& model, const SamplerKind& kind, int n_steps,
                   int inner_steps) {
    return kind.is_tm() ? cost_tm(model, n_steps, inner_steps) : cost_fm(model, n_steps);
}

// Inner steps one backbone evaluation buys at outer step count N: kappa / N.
// Real-valued; callers decide how to round.
inline double delta_inner_steps(const ComputeCostModel& model, double n_steps) {
    if (!(n_steps >= 1.0)) throw std::invalid_argument("delta_inner_steps: N must be >= 1");
    return model.kappa() / n_steps;
}

}  // namespace tmfm

#endif  // TMFM_COST_HPP
