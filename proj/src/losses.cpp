#include "hvgan/losses.hpp"

#include "hvgan/error.hpp"

#include <cmath>
#include <random>

namespace hvgan {

FeatureExtractor::FeatureExtractor(std::size_t channels, std::uint64_t seed, FeatureTap tap)
    : channels_(channels), tap_(tap)
{
    if (channels == 0) {
        throw ValidationError("feature extractor needs at least one input channel");
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::size_t in = channels;
    for (std::size_t out : kWidths) {
        Tensor w(Shape{out, in, 3, 3});
        const double scale = 1.0 / std::sqrt(static_cast<double>(in * 9));
        for (double& v : w.data()) {
            v = normal(rng) * scale;
        }
        weights_.push_back(std::move(w));
        biases_.emplace_back(Shape{out});
        in = out;
    }
}

auto FeatureExtractor::features(Tape& tape, Var images) const -> Var
{
    if (images.shape().size() != 4 || images.shape()[1] != channels_) {
        throw ValidationError("feature extractor expects (N," + std::to_string(channels_) + ",H,W) input, got "
                              + to_string(images.shape()));
    }
    Var h = images;
    for (std::size_t layer = 0; layer < weights_.size(); ++layer) {
        h = conv2d(h, tape.constant(weights_[layer]), tape.constant(biases_[layer]), 1);
        const bool last = layer + 1 == weights_.size();
        if (!last || tap_ == FeatureTap::PostActivation) {
            h = leaky_relu(h, kLeakySlope);
        }
    }
    return h;
}

namespace {

    auto probability(Var logits) -> Var
    {
        return clamp(sigmoid(logits), kProbClamp, 1.0 - kProbClamp);
    }

    void require_nonempty(Var v, const char* what)
    {
        if (v.value().size() == 0) {
            throw ValidationError(std::string(what) + ": empty batch");
        }
    }

} // namespace

auto disc_loss(const DiscriminatorOutputs& outs) -> Var
{
    require_nonempty(outs.logits_real, "disc_loss");
    require_nonempty(outs.logits_fake, "disc_loss");
    if (outs.logits_real.shape() != outs.logits_fake.shape()) {
        throw ValidationError("disc_loss: real and fake batches differ in shape");
    }
    return -mean(log(probability(outs.logits_real))) - mean(log(1.0 - probability(outs.logits_fake)));
}

auto adv_loss_standard_g(Var logits_fake) -> Var
{
    require_nonempty(logits_fake, "adv_loss_standard_g");
    return -mean(log(probability(logits_fake)));
}

auto adv_loss_relativistic_g(Var logits_real, Var logits_fake) -> Var
{
    require_nonempty(logits_real, "adv_loss_relativistic_g");
    if (logits_real.shape() != logits_fake.shape()) {
        throw ValidationError("adv_loss_relativistic_g: batch mismatch " + to_string(logits_real.shape()) + " vs "
                              + to_string(logits_fake.shape()));
    }
    const Var real_vs_fake = probability(logits_real - mean(logits_fake));
    const Var fake_vs_real = probability(logits_fake - mean(logits_real));
    return -mean(log(1.0 - real_vs_fake)) - mean(log(fake_vs_real));
}

auto pixel_loss(Var fake, Var real, int p) -> Var
{
    if (fake.shape() != real.shape()) {
        throw ValidationError("pixel_loss: shape mismatch " + to_string(fake.shape()) + " vs "
                              + to_string(real.shape()));
    }
    if (p != 1 && p != 2) {
        throw ValidationError("pixel_loss: norm must be 1 or 2");
    }
    const Var diff = fake - real;
    return mean(p == 1 ? abs(diff) : square(diff));
}

auto feature_loss(Var fake, Var real, const FeatureExtractor& extractor, int p) -> Var
{
    if (fake.shape() != real.shape()) {
        throw ValidationError("feature_loss: shape mismatch " + to_string(fake.shape()) + " vs "
                              + to_string(real.shape()));
    }
    Tape& tape = *fake.tape();
    return pixel_loss(extractor.features(tape, fake), extractor.features(tape, real), p);
}

} // namespace hvgan
