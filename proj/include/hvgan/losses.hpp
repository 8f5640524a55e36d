#pragma once

// Generator and discriminator losses as differentiable scalars on a tape.
// All reductions are means, and probabilities are clamped to
// [kProbClamp, 1 - kProbClamp] before any log.

#include "hvgan/autodiff.hpp"

#include <cstdint>
#include <vector>

namespace hvgan {

inline constexpr double kProbClamp = 1e-7;
inline constexpr double kLeakySlope = 0.2;

enum class FeatureTap { PreActivation, PostActivation };

/// Frozen random convolution stack standing in for a pretrained perceptual
/// network: three 3x3 convs (C -> 8 -> 16 -> 16) with leaky ReLU(0.2).
/// Weights are unit-normal / sqrt(fan_in) from `seed`, biases zero.
class FeatureExtractor {
public:
    FeatureExtractor(std::size_t channels, std::uint64_t seed, FeatureTap tap = FeatureTap::PostActivation);

    /// Feature map of the last layer, before or after its activation.
    [[nodiscard]] auto features(Tape& tape, Var images) const -> Var;

    [[nodiscard]] auto channels() const noexcept -> std::size_t { return channels_; }
    [[nodiscard]] auto tap() const noexcept -> FeatureTap { return tap_; }
    [[nodiscard]] auto weights() const noexcept -> const std::vector<Tensor>& { return weights_; }

    static constexpr std::size_t kWidths[3] = {8, 16, 16};

private:
    std::size_t channels_;
    FeatureTap tap_;
    std::vector<Tensor> weights_;
    std::vector<Tensor> biases_;
};

struct DiscriminatorOutputs {
    Var logits_real;
    Var logits_fake;
};

/// -mean log sigma(real) - mean log(1 - sigma(fake))
[[nodiscard]] auto disc_loss(const DiscriminatorOutputs& outs) -> Var;

/// -mean log sigma(fake)
[[nodiscard]] auto adv_loss_standard_g(Var logits_fake) -> Var;

/// Relativistic-average generator loss with D_ra(a, b) = sigma(a - mean(b)):
/// -mean log(1 - D_ra(real, fake)) - mean log D_ra(fake, real)
[[nodiscard]] auto adv_loss_relativistic_g(Var logits_real, Var logits_fake) -> Var;

/// mean |fake - real|^p for p in {1, 2}
[[nodiscard]] auto pixel_loss(Var fake, Var real, int p) -> Var;

/// pixel_loss between the extractor's feature maps of fake and real.
[[nodiscard]] auto feature_loss(Var fake, Var real, const FeatureExtractor& extractor, int p) -> Var;

} // namespace hvgan
