#pragma once

#include "hvgan/autodiff.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace hvgan {

/// Adam with bias correction. Moments are created lazily on the first step
/// and are matched to parameters by position.
struct AdamState {
    double lr = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::uint64_t step = 0;
    std::vector<Tensor> m;
    std::vector<Tensor> v;
};

void adam_step(AdamState& state, std::span<Parameter* const> params);

/// base * 0.5^(number of milestones <= iteration)
[[nodiscard]] auto scheduled_lr(double base, std::span<const std::size_t> milestones, std::size_t iteration) -> double;

} // namespace hvgan
