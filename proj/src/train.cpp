#include "hvgan/train.hpp"

#include "hvgan/error.hpp"

#include <cmath>
#include <cstdio>

namespace hvgan {

auto default_mu(AdvVariant variant) -> std::vector<double>
{
    return {variant == AdvVariant::Relativistic ? 20.0 : 200.0, 0.1, 10.0};
}

void validate(const TrainConfig& config)
{
    validate(config.arch);
    if (config.mu.size() != 3) {
        throw ValidationError("mu must have three entries (gan, pix, fea)");
    }
    (void)UpperBounds(config.mu);
    if (!(config.eps > 0.0) || !std::isfinite(config.eps)) {
        throw ValidationError("eps must be positive");
    }
    if (config.norm_p != 1 && config.norm_p != 2) {
        throw ValidationError("norm_p must be 1 or 2");
    }
    if (config.batch_size == 0) {
        throw ValidationError("batch_size must be positive");
    }
    if (config.patch_size == 0 || config.patch_size % kScaleFactor != 0) {
        throw ValidationError("patch_size must be a positive multiple of 4");
    }
    if (!(config.lr > 0.0) || !(config.pretrain_lr > 0.0)) {
        throw ValidationError("learning rates must be positive");
    }
    for (std::size_t i = 1; i < config.milestones.size(); ++i) {
        if (config.milestones[i] <= config.milestones[i - 1]) {
            throw ValidationError("milestones must be strictly increasing");
        }
    }
    if (const auto* lin = std::get_if<LinearFixed>(&config.mode); lin != nullptr && lin->weights.size() != 3) {
        throw ValidationError("linear mode needs three weights");
    }
}

PatchSampler::PatchSampler(std::vector<ImageBuffer> images, std::size_t patch_size, std::uint64_t seed, bool augment)
    : images_(std::move(images)), patch_size_(patch_size), augment_(augment), rng_(seed)
{
    if (images_.empty()) {
        throw ValidationError("empty dataset");
    }
}

auto PatchSampler::next(std::size_t batch_size) -> Batch
{
    std::vector<ImageBuffer> lr, hr;
    std::uniform_int_distribution<std::size_t> pick(0, images_.size() - 1);
    for (std::size_t b = 0; b < batch_size; ++b) {
        const std::size_t idx = pick(rng_);
        PatchPair pair = extract_patches(images_[idx], patch_size_, 1, rng_(), idx).front();
        if (augment_) {
            pair = augment(pair, rng_());
        }
        lr.push_back(std::move(pair.lr));
        hr.push_back(std::move(pair.hr));
    }
    return {to_tensor(lr), to_tensor(hr)};
}

auto generator_gradients(GeneratorNet& g, DiscriminatorNet& d, const Batch& batch,
                         const GeneratorObjective& objective) -> GeneratorStep
{
    if (objective.features == nullptr) {
        throw ValidationError("generator objective has no feature extractor");
    }
    Tape tape;
    const Var hr = tape.constant(batch.hr);
    const Var fake = g.forward(tape, tape.constant(batch.lr));
    if (fake.shape() != hr.shape()) {
        throw ValidationError("generator output " + to_string(fake.shape()) + " does not match HR batch "
                              + to_string(hr.shape()));
    }
    const Var logits_fake = d.forward(tape, fake, Track::Frozen);
    const Var l_gan = objective.adv_variant == AdvVariant::Standard
        ? adv_loss_standard_g(logits_fake)
        : adv_loss_relativistic_g(d.forward(tape, hr, Track::Frozen), logits_fake);
    const Var l_pix = pixel_loss(fake, hr, objective.norm_p);
    const Var l_fea = feature_loss(fake, hr, *objective.features, objective.norm_p);

    GeneratorStep step;
    step.losses = {l_gan.item(), l_pix.item(), l_fea.item()};
    step.scalar = scalarize(step.losses, objective.mode, objective.mu, objective.eps);
    const auto w = mode_weights(step.losses, objective.mode, objective.mu, objective.eps);
    std::copy(w.begin(), w.end(), step.weights.begin());
    if (is_hypervolume_mode(objective.mode)) {
        step.clamped = clamp_mask(step.losses, objective.mu, objective.eps);
    }
    const std::array<Var, 3> parts = {l_gan, l_pix, l_fea};
    tape.backward(scalarized(parts, step.scalar, w));
    return step;
}

auto train_step_generator(GeneratorNet& g, DiscriminatorNet& d, const Batch& batch,
                          const GeneratorObjective& objective, AdamState& adam) -> GeneratorStep
{
    const GeneratorStep step = generator_gradients(g, d, batch, objective);
    adam_step(adam, g.parameters());
    return step;
}

auto train_step_discriminator(GeneratorNet& g, DiscriminatorNet& d, const Batch& batch, AdamState& adam) -> double
{
    Tensor fake;
    {
        Tape scratch;
        fake = g.forward(scratch, scratch.constant(batch.lr), Track::Frozen).value();
    }
    if (fake.shape() != batch.hr.shape()) {
        throw ValidationError("generator output " + to_string(fake.shape()) + " does not match HR batch "
                              + to_string(batch.hr.shape()));
    }
    Tape tape;
    const Var real_logits = d.forward(tape, tape.constant(batch.hr));
    const Var fake_logits = d.forward(tape, tape.constant(std::move(fake)));
    const Var loss = disc_loss({real_logits, fake_logits});
    const double value = loss.item();
    tape.backward(loss);
    adam_step(adam, d.parameters());
    return value;
}

auto pretrain_generator(GeneratorNet& g, PatchSampler& data, std::size_t iterations, std::size_t batch_size,
                        double lr, int norm_p) -> std::vector<double>
{
    AdamState adam;
    adam.lr = lr;
    std::vector<double> losses;
    losses.reserve(iterations);
    for (std::size_t i = 0; i < iterations; ++i) {
        const Batch batch = data.next(batch_size);
        Tape tape;
        const Var loss = pixel_loss(g.forward(tape, tape.constant(batch.lr)), tape.constant(batch.hr), norm_p);
        losses.push_back(loss.item());
        tape.backward(loss);
        adam_step(adam, g.parameters());
    }
    return losses;
}

auto stream_seed(std::uint64_t seed, std::uint64_t stream) -> std::uint64_t
{
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream)};
    std::array<std::uint32_t, 2> out{};
    seq.generate(out.begin(), out.end());
    return (std::uint64_t{out[0]} << 32) | out[1];
}

namespace {
    enum Stream : std::uint64_t { kPretrainData = 1, kAdversarialData = 2, kFeatures = 3 };
}

auto pretrain(const TrainConfig& config, const std::vector<ImageBuffer>& data, std::vector<double>* losses)
    -> Networks
{
    validate(config);
    auto [g, d] = init_networks(config.seed, config.arch);
    if (config.pretrain_iters > 0) {
        PatchSampler sampler(data, config.patch_size, stream_seed(config.seed, kPretrainData));
        auto l = pretrain_generator(g, sampler, config.pretrain_iters, config.batch_size, config.pretrain_lr,
                                    config.norm_p);
        if (losses != nullptr) {
            *losses = std::move(l);
        }
    }
    return {std::move(g), std::move(d)};
}

auto adversarial(const TrainConfig& config, const std::vector<ImageBuffer>& data, Networks& nets) -> TrainHistory
{
    validate(config);
    TrainHistory history;
    if (config.adv_iters == 0) {
        return history;
    }
    const FeatureExtractor features(config.arch.channels, stream_seed(config.seed, kFeatures), config.feature_tap);
    const GeneratorObjective objective{config.mode,     UpperBounds(config.mu), config.eps, config.adv_variant,
                                       config.norm_p, &features};
    PatchSampler sampler(data, config.patch_size, stream_seed(config.seed, kAdversarialData));
    AdamState adam_g, adam_d;
    history.reserve(config.adv_iters);
    for (std::size_t i = 0; i < config.adv_iters; ++i) {
        const double lr = scheduled_lr(config.lr, config.milestones, i);
        adam_g.lr = lr;
        adam_d.lr = lr;
        const Batch batch = sampler.next(config.batch_size);
        try {
            (void)train_step_discriminator(nets.g, nets.d, batch, adam_d);
            history.push_back({i, train_step_generator(nets.g, nets.d, batch, objective, adam_g), lr});
        } catch (const NumericError& e) {
            throw NumericError("adversarial iteration " + std::to_string(i) + ": " + e.what());
        }
    }
    return history;
}

auto train(const TrainConfig& config, const std::vector<ImageBuffer>& data) -> TrainResult
{
    std::vector<double> losses;
    Networks nets = pretrain(config, data, &losses);
    TrainHistory history = adversarial(config, data, nets);
    return {std::move(nets), std::move(losses), std::move(history)};
}

auto load_dataset(const std::filesystem::path& dir) -> std::vector<ImageBuffer>
{
    std::vector<ImageBuffer> images;
    for (const auto& path : list_images(dir)) {
        images.push_back(load_image(path));
        if (images.back().channels() != images.front().channels()) {
            throw ValidationError("dataset image " + path.string() + " has a different channel count");
        }
    }
    if (images.empty()) {
        throw ValidationError("dataset " + dir.string() + " contains no .pgm/.ppm images");
    }
    return images;
}

auto super_resolve(GeneratorNet& g, const ImageBuffer& lr) -> ImageBuffer
{
    Tape tape;
    const std::array<ImageBuffer, 1> one = {lr};
    return image_from_tensor(g.forward(tape, tape.constant(to_tensor(one)), Track::Frozen).value());
}

auto evaluate_generator(GeneratorNet& g, std::span<const ImageBuffer> hr_images) -> MetricReport
{
    if (hr_images.empty()) {
        throw ValidationError("evaluation needs at least one image");
    }
    MetricReport mean{0.0, 0.0, 0.0};
    for (const ImageBuffer& full : hr_images) {
        const ImageBuffer hr = crop(full, 0, 0, full.height() - full.height() % kScaleFactor,
                                    full.width() - full.width() % kScaleFactor);
        const MetricReport r = evaluate(hr, super_resolve(g, bicubic_downscale(hr)));
        mean.psnr += r.psnr;
        mean.ssim += r.ssim;
        mean.gmsd += r.gmsd;
    }
    const auto n = static_cast<double>(hr_images.size());
    return {mean.psnr / n, mean.ssim / n, mean.gmsd / n};
}

namespace {

    void append_number(std::string& out, double v)
    {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        out += buf;
    }

} // namespace

auto history_csv(const TrainHistory& history) -> std::string
{
    std::string out = "iter,l_gan,l_pix,l_fea,scalar,w_gan,w_pix,w_fea,clamped,lr\n";
    for (const HistoryRecord& r : history) {
        out += std::to_string(r.iter);
        for (double v : r.step.losses) {
            out += ',';
            append_number(out, v);
        }
        out += ',';
        append_number(out, r.step.scalar);
        for (double v : r.step.weights) {
            out += ',';
            append_number(out, v);
        }
        out += ',' + std::to_string(r.step.clamped) + ',';
        append_number(out, r.lr);
        out += '\n';
    }
    return out;
}

auto losses_csv(std::span<const double> losses) -> std::string
{
    std::string out = "iter,l_pix\n";
    for (std::size_t i = 0; i < losses.size(); ++i) {
        out += std::to_string(i) + ',';
        append_number(out, losses[i]);
        out += '\n';
    }
    return out;
}

} // namespace hvgan
