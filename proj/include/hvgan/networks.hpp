#pragma once

// Small convolutional generator (x4 super-resolution) and discriminator.

#include "hvgan/autodiff.hpp"

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace hvgan {

struct ArchConfig {
    std::size_t channels = 1;
    std::size_t gen_width = 16;
    std::size_t disc_width1 = 8;
    std::size_t disc_width2 = 16;
};

void validate(const ArchConfig& arch);

/// Whether a forward pass records parameters as trainable leaves or as
/// constants (frozen network).
enum class Track { Gradients, Frozen };

class GeneratorNet {
public:
    GeneratorNet(const ArchConfig& arch, std::mt19937_64& rng);

    /// (N,C,H,W) -> (N,C,4H,4W), values in (0,1).
    [[nodiscard]] auto forward(Tape& tape, Var lr, Track track = Track::Gradients) -> Var;
    [[nodiscard]] auto parameters() -> std::vector<Parameter*>;
    [[nodiscard]] auto parameters() const -> std::vector<const Parameter*>;
    [[nodiscard]] auto arch() const noexcept -> const ArchConfig& { return arch_; }

    friend auto operator==(const GeneratorNet&, const GeneratorNet&) -> bool;

private:
    ArchConfig arch_;
    std::vector<Parameter> params_; // (weight, bias) for conv1..conv4
};

class DiscriminatorNet {
public:
    DiscriminatorNet(const ArchConfig& arch, std::mt19937_64& rng);

    /// (N,C,H,W) -> (N) raw logits.
    [[nodiscard]] auto forward(Tape& tape, Var images, Track track = Track::Gradients) -> Var;
    [[nodiscard]] auto parameters() -> std::vector<Parameter*>;
    [[nodiscard]] auto parameters() const -> std::vector<const Parameter*>;
    [[nodiscard]] auto arch() const noexcept -> const ArchConfig& { return arch_; }

    friend auto operator==(const DiscriminatorNet&, const DiscriminatorNet&) -> bool;

private:
    ArchConfig arch_;
    std::vector<Parameter> params_; // conv1 w/b, conv2 w/b, dense w/b
};

/// Unit-normal weights scaled by 1/sqrt(fan_in), zero biases; generator
/// first, then discriminator, from one seeded stream.
[[nodiscard]] auto init_networks(std::uint64_t seed, const ArchConfig& arch) -> std::pair<GeneratorNet, DiscriminatorNet>;

} // namespace hvgan
