#pragma once

// Pixel-loss pretraining and the alternating discriminator/generator loop
// whose generator objective goes through a scalarization mode.

#include "hvgan/adam.hpp"
#include "hvgan/image.hpp"
#include "hvgan/losses.hpp"
#include "hvgan/metrics.hpp"
#include "hvgan/networks.hpp"
#include "hvgan/scalarize.hpp"

#include <array>
#include <filesystem>
#include <optional>
#include <string>

namespace hvgan {

enum class AdvVariant { Standard, Relativistic };

/// Upper bounds (gan, pix, fea) used when a config does not give them.
[[nodiscard]] auto default_mu(AdvVariant variant) -> std::vector<double>;

struct TrainConfig {
    std::uint64_t seed = 1;
    ScalarizationMode mode = HypervolLogNormalized{};
    std::vector<double> mu = default_mu(AdvVariant::Relativistic);
    double eps = kDefaultClampEps;
    AdvVariant adv_variant = AdvVariant::Relativistic;
    int norm_p = 1;
    std::size_t pretrain_iters = 2000;
    std::size_t adv_iters = 1000;
    std::size_t batch_size = 4;
    std::size_t patch_size = 48;
    double lr = 1e-4;
    double pretrain_lr = 1e-3;
    std::vector<std::size_t> milestones = {500};
    std::string dataset;
    std::string output_dir = "out";
    ArchConfig arch;
    FeatureTap feature_tap = FeatureTap::PostActivation;
};

void validate(const TrainConfig& config);

struct Batch {
    Tensor lr;
    Tensor hr;
};

/// Seeded stream of augmented random patch batches drawn from a corpus.
class PatchSampler {
public:
    PatchSampler(std::vector<ImageBuffer> images, std::size_t patch_size, std::uint64_t seed, bool augment = true);
    [[nodiscard]] auto next(std::size_t batch_size) -> Batch;

private:
    std::vector<ImageBuffer> images_;
    std::size_t patch_size_;
    bool augment_;
    std::mt19937_64 rng_;
};

/// Everything the generator objective depends on besides the networks.
struct GeneratorObjective {
    ScalarizationMode mode;
    UpperBounds mu;
    double eps = kDefaultClampEps;
    AdvVariant adv_variant = AdvVariant::Relativistic;
    int norm_p = 1;
    const FeatureExtractor* features = nullptr;
};

struct GeneratorStep {
    std::array<double, 3> losses{}; // gan, pix, fea
    double scalar = 0.0;
    std::array<double, 3> weights{};
    unsigned clamped = 0;
};

/// Forward and backward through G (with D frozen), leaving dScalar/dTheta in
/// the generator parameters' grad fields. No optimizer step.
[[nodiscard]] auto generator_gradients(GeneratorNet& g, DiscriminatorNet& d, const Batch& batch,
                                       const GeneratorObjective& objective) -> GeneratorStep;

/// generator_gradients followed by one Adam step on G.
auto train_step_generator(GeneratorNet& g, DiscriminatorNet& d, const Batch& batch,
                          const GeneratorObjective& objective, AdamState& adam) -> GeneratorStep;

/// One Adam step on D against detached G outputs. Returns the loss before the step.
auto train_step_discriminator(GeneratorNet& g, DiscriminatorNet& d, const Batch& batch, AdamState& adam) -> double;

/// Adam on pixel loss only. Returns the per-iteration pixel loss.
auto pretrain_generator(GeneratorNet& g, PatchSampler& data, std::size_t iterations, std::size_t batch_size,
                        double lr, int norm_p = 1) -> std::vector<double>;

struct HistoryRecord {
    std::size_t iter = 0;
    GeneratorStep step;
    double lr = 0.0;
};
using TrainHistory = std::vector<HistoryRecord>;

struct Networks {
    GeneratorNet g;
    DiscriminatorNet d;
};

/// Freshly initialized networks after the pretraining phase.
[[nodiscard]] auto pretrain(const TrainConfig& config, const std::vector<ImageBuffer>& data,
                            std::vector<double>* losses = nullptr) -> Networks;

/// The alternating phase, starting from `nets`. Aborts with NumericError
/// naming the iteration if anything becomes non-finite.
[[nodiscard]] auto adversarial(const TrainConfig& config, const std::vector<ImageBuffer>& data, Networks& nets)
    -> TrainHistory;

struct TrainResult {
    Networks nets;
    std::vector<double> pretrain_losses;
    TrainHistory history;
};

[[nodiscard]] auto train(const TrainConfig& config, const std::vector<ImageBuffer>& data) -> TrainResult;

/// Loads every .pgm/.ppm in a directory; all must share a channel count.
[[nodiscard]] auto load_dataset(const std::filesystem::path& dir) -> std::vector<ImageBuffer>;

/// Derived seed for an independent random stream of a run.
[[nodiscard]] auto stream_seed(std::uint64_t seed, std::uint64_t stream) -> std::uint64_t;

/// G applied to a single LR image.
[[nodiscard]] auto super_resolve(GeneratorNet& g, const ImageBuffer& lr) -> ImageBuffer;

/// Mean psnr/ssim/gmsd of G(downscale(hr)) against hr over a set of images,
/// each cropped to a multiple of 4 first.
[[nodiscard]] auto evaluate_generator(GeneratorNet& g, std::span<const ImageBuffer> hr_images) -> MetricReport;

// History CSV: iter,l_gan,l_pix,l_fea,scalar,w_gan,w_pix,w_fea,clamped,lr
[[nodiscard]] auto history_csv(const TrainHistory& history) -> std::string;
[[nodiscard]] auto losses_csv(std::span<const double> losses) -> std::string;

// Checkpoint: "HVGN", u32 version, u64 count, then per parameter u16 name
// length, name, u8 rank, u64 extents, little-endian f64 values.
inline constexpr std::uint32_t kCheckpointVersion = 1;
[[nodiscard]] auto checkpoint_bytes(const Networks& nets) -> std::string;
[[nodiscard]] auto parse_checkpoint(const std::string& bytes) -> std::vector<Parameter>;
void restore(Networks& nets, const std::vector<Parameter>& params);
[[nodiscard]] auto fnv1a64(std::string_view bytes) -> std::uint64_t;

void write_file(const std::filesystem::path& path, const std::string& contents);
[[nodiscard]] auto read_file(const std::filesystem::path& path) -> std::string;

} // namespace hvgan
