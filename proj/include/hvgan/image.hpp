#pragma once

// Planar images in [0,1], binary PGM/PPM I/O and the LR/HR patch pipeline.

#include "hvgan/tensor.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace hvgan {

/// Planar (C,H,W) image with 1 or 3 channels and every value in [0,1].
class ImageBuffer {
public:
    ImageBuffer() = default;
    /// Throws ValidationError when a value falls outside [0,1] or the sizes disagree.
    ImageBuffer(std::size_t channels, std::size_t height, std::size_t width, std::vector<double> values);
    /// Same, but out-of-range values are clamped into [0,1] (NaN is rejected).
    [[nodiscard]] static auto clamped(std::size_t channels, std::size_t height, std::size_t width,
                                      std::vector<double> values) -> ImageBuffer;
    [[nodiscard]] static auto filled(std::size_t channels, std::size_t height, std::size_t width, double v)
        -> ImageBuffer;

    [[nodiscard]] auto channels() const noexcept -> std::size_t { return channels_; }
    [[nodiscard]] auto height() const noexcept -> std::size_t { return height_; }
    [[nodiscard]] auto width() const noexcept -> std::size_t { return width_; }
    [[nodiscard]] auto values() const noexcept -> std::span<const double> { return values_; }
    [[nodiscard]] auto at(std::size_t c, std::size_t y, std::size_t x) const -> double
    {
        return values_[(c * height_ + y) * width_ + x];
    }
    /// One channel as a single-channel image.
    [[nodiscard]] auto channel(std::size_t c) const -> ImageBuffer;
    [[nodiscard]] auto same_shape(const ImageBuffer& other) const noexcept -> bool
    {
        return channels_ == other.channels_ && height_ == other.height_ && width_ == other.width_;
    }

    friend auto operator==(const ImageBuffer&, const ImageBuffer&) -> bool = default;

private:
    std::size_t channels_ = 0;
    std::size_t height_ = 0;
    std::size_t width_ = 0;
    std::vector<double> values_;
};

/// Reads binary P5 (grayscale) or P6 (RGB) with maxval 255; values become v/255.
[[nodiscard]] auto load_image(const std::filesystem::path& path) -> ImageBuffer;
/// Writes P5 or P6; bytes are round-half-up of v*255.
void save_image(const ImageBuffer& img, const std::filesystem::path& path);

/// Keys cubic convolution kernel with a = -0.5.
[[nodiscard]] auto keys_kernel(double distance) -> double;
/// Tap weights for the four samples floor(x)-1 .. floor(x)+2 around position x.
[[nodiscard]] auto bicubic_weights(double x) -> std::array<double, 4>;
/// Separable bicubic reduction by an integer factor with edge-clamped sampling.
/// Output pixel i samples the input at (i + 0.5) * factor - 0.5.
[[nodiscard]] auto bicubic_downscale(const ImageBuffer& img, std::size_t factor = 4) -> ImageBuffer;
/// Nearest-neighbour enlargement (the interpolation baseline).
[[nodiscard]] auto nearest_upscale(const ImageBuffer& img, std::size_t factor = 4) -> ImageBuffer;

[[nodiscard]] auto flip_horizontal(const ImageBuffer& img) -> ImageBuffer;
/// Counter-clockwise rotation by quarter_turns * 90 degrees.
[[nodiscard]] auto rotate90(const ImageBuffer& img, unsigned quarter_turns) -> ImageBuffer;
[[nodiscard]] auto crop(const ImageBuffer& img, std::size_t top, std::size_t left, std::size_t height,
                        std::size_t width) -> ImageBuffer;

inline constexpr std::size_t kScaleFactor = 4;

struct PatchPair {
    ImageBuffer lr;
    ImageBuffer hr;
    std::size_t source = 0;
    std::size_t top = 0;
    std::size_t left = 0;
};

/// `count` random HR crops of hr_size x hr_size with their bicubic LR versions.
[[nodiscard]] auto extract_patches(const ImageBuffer& img, std::size_t hr_size, std::size_t count,
                                   std::uint64_t seed, std::size_t source = 0) -> std::vector<PatchPair>;

struct Augmentation {
    bool flip = false;
    unsigned quarter_turns = 0;
};

[[nodiscard]] auto draw_augmentation(std::uint64_t seed) -> Augmentation;
/// Applies the same flip (first) and rotation to both images of the pair.
[[nodiscard]] auto apply_augmentation(const PatchPair& pair, Augmentation aug) -> PatchPair;
[[nodiscard]] auto augment(const PatchPair& pair, std::uint64_t seed) -> PatchPair;

/// Stacks images of identical shape into an (N,C,H,W) tensor.
[[nodiscard]] auto to_tensor(std::span<const ImageBuffer> images) -> Tensor;
/// Image n of an (N,C,H,W) tensor, clamped into [0,1].
[[nodiscard]] auto image_from_tensor(const Tensor& t, std::size_t n = 0) -> ImageBuffer;

/// Smooth gradients plus hard-edged rectangles and discs, single channel.
[[nodiscard]] auto synthetic_image(std::size_t size, std::uint64_t seed) -> ImageBuffer;
[[nodiscard]] auto synthetic_corpus(std::size_t count, std::size_t size, std::uint64_t seed)
    -> std::vector<ImageBuffer>;

/// All .pgm/.ppm files in a directory, sorted by file name.
[[nodiscard]] auto list_images(const std::filesystem::path& dir) -> std::vector<std::filesystem::path>;

} // namespace hvgan
