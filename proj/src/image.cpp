#include "hvgan/image.hpp"

#include "hvgan/error.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

namespace hvgan {

ImageBuffer::ImageBuffer(std::size_t channels, std::size_t height, std::size_t width, std::vector<double> values)
    : channels_(channels), height_(height), width_(width), values_(std::move(values))
{
    if (channels != 1 && channels != 3) {
        throw ValidationError("images must have 1 or 3 channels, got " + std::to_string(channels));
    }
    if (height == 0 || width == 0) {
        throw ValidationError("image dimensions must be at least 1");
    }
    if (values_.size() != channels * height * width) {
        throw ValidationError("image value count does not match its dimensions");
    }
    for (double v : values_) {
        if (!(v >= 0.0 && v <= 1.0)) {
            throw ValidationError("image value " + std::to_string(v) + " outside [0,1]");
        }
    }
}

auto ImageBuffer::clamped(std::size_t channels, std::size_t height, std::size_t width, std::vector<double> values)
    -> ImageBuffer
{
    for (double& v : values) {
        if (std::isnan(v)) {
            throw NumericError("NaN in image data");
        }
        v = std::clamp(v, 0.0, 1.0);
    }
    return {channels, height, width, std::move(values)};
}

auto ImageBuffer::filled(std::size_t channels, std::size_t height, std::size_t width, double v) -> ImageBuffer
{
    return {channels, height, width, std::vector<double>(channels * height * width, v)};
}

auto ImageBuffer::channel(std::size_t c) const -> ImageBuffer
{
    const std::size_t plane = height_ * width_;
    const auto first = values_.begin() + static_cast<std::ptrdiff_t>(c * plane);
    return {1, height_, width_, std::vector<double>(first, first + static_cast<std::ptrdiff_t>(plane))};
}

namespace {

    // Reads one header token, skipping whitespace and '#' comments.
    auto header_token(std::istream& in) -> std::string
    {
        std::string tok;
        char ch = 0;
        while (in.get(ch)) {
            if (ch == '#') {
                std::string ignored;
                std::getline(in, ignored);
                continue;
            }
            if (std::isspace(static_cast<unsigned char>(ch))) {
                if (!tok.empty()) {
                    break;
                }
                continue;
            }
            tok.push_back(ch);
        }
        return tok;
    }

    auto header_number(std::istream& in, const std::filesystem::path& path, const char* what) -> std::size_t
    {
        const std::string tok = header_token(in);
        std::size_t value = 0;
        std::size_t used = 0;
        try {
            value = std::stoul(tok, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (tok.empty() || used != tok.size()) {
            throw ValidationError(path.string() + ": bad " + what + " in header");
        }
        return value;
    }

} // namespace

auto load_image(const std::filesystem::path& path) -> ImageBuffer
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open image " + path.string());
    }
    const std::string magic = header_token(in);
    std::size_t channels = 0;
    if (magic == "P5") {
        channels = 1;
    } else if (magic == "P6") {
        channels = 3;
    } else {
        throw ValidationError(path.string() + ": unsupported image format '" + magic + "' (need P5 or P6)");
    }
    const std::size_t width = header_number(in, path, "width");
    const std::size_t height = header_number(in, path, "height");
    const std::size_t maxval = header_number(in, path, "maxval");
    if (maxval != 255) {
        throw ValidationError(path.string() + ": maxval " + std::to_string(maxval) + " unsupported (need 255)");
    }
    if (width == 0 || height == 0) {
        throw ValidationError(path.string() + ": empty image");
    }
    std::vector<unsigned char> bytes(channels * width * height);
    in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (static_cast<std::size_t>(in.gcount()) != bytes.size()) {
        throw IoError(path.string() + ": truncated pixel data");
    }
    // Interleaved on disk, planar in memory.
    std::vector<double> values(bytes.size());
    const std::size_t plane = width * height;
    for (std::size_t i = 0; i < plane; ++i) {
        for (std::size_t c = 0; c < channels; ++c) {
            values[c * plane + i] = bytes[i * channels + c] / 255.0;
        }
    }
    return {channels, height, width, std::move(values)};
}

void save_image(const ImageBuffer& img, const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot write image " + path.string());
    }
    const std::size_t c = img.channels();
    out << (c == 1 ? "P5" : "P6") << '\n' << img.width() << ' ' << img.height() << "\n255\n";
    const std::size_t plane = img.width() * img.height();
    std::vector<unsigned char> bytes(c * plane);
    for (std::size_t i = 0; i < plane; ++i) {
        for (std::size_t ch = 0; ch < c; ++ch) {
            const double v = std::floor(img.values()[ch * plane + i] * 255.0 + 0.5);
            bytes[i * c + ch] = static_cast<unsigned char>(std::clamp(v, 0.0, 255.0));
        }
    }
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw IoError("failed writing image " + path.string());
    }
}

auto keys_kernel(double distance) -> double
{
    constexpr double a = -0.5;
    const double x = std::abs(distance);
    if (x <= 1.0) {
        return ((a + 2.0) * x - (a + 3.0)) * x * x + 1.0;
    }
    if (x < 2.0) {
        return ((a * x - 5.0 * a) * x + 8.0 * a) * x - 4.0 * a;
    }
    return 0.0;
}

auto bicubic_weights(double x) -> std::array<double, 4>
{
    const double base = std::floor(x);
    std::array<double, 4> w{};
    for (int t = 0; t < 4; ++t) {
        w[static_cast<std::size_t>(t)] = keys_kernel(x - (base - 1.0 + t));
    }
    return w;
}

namespace {

    // Resamples `count` lines of length `n` (stride `step` between samples,
    // `line_stride` between lines) down by `factor`.
    void resample_lines(const double* src, double* dst, std::size_t lines, std::size_t n, std::size_t step,
                        std::size_t line_stride, std::size_t out_step, std::size_t out_line_stride,
                        std::size_t factor)
    {
        const std::size_t out_n = n / factor;
        for (std::size_t i = 0; i < out_n; ++i) {
            const double x = (static_cast<double>(i) + 0.5) * static_cast<double>(factor) - 0.5;
            const auto w = bicubic_weights(x);
            const auto base = static_cast<std::ptrdiff_t>(std::floor(x)) - 1;
            std::array<std::size_t, 4> idx{};
            for (std::ptrdiff_t t = 0; t < 4; ++t) {
                idx[static_cast<std::size_t>(t)]
                    = static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(base + t, 0, static_cast<std::ptrdiff_t>(n) - 1));
            }
            for (std::size_t l = 0; l < lines; ++l) {
                const double* line = src + l * line_stride;
                double s = 0.0;
                for (std::size_t t = 0; t < 4; ++t) {
                    s += w[t] * line[idx[t] * step];
                }
                dst[l * out_line_stride + i * out_step] = s;
            }
        }
    }

} // namespace

auto bicubic_downscale(const ImageBuffer& img, std::size_t factor) -> ImageBuffer
{
    if (factor == 0 || img.height() % factor != 0 || img.width() % factor != 0) {
        throw ValidationError("image " + std::to_string(img.height()) + "x" + std::to_string(img.width())
                              + " is not divisible by factor " + std::to_string(factor));
    }
    const std::size_t h = img.height();
    const std::size_t w = img.width();
    const std::size_t oh = h / factor;
    const std::size_t ow = w / factor;
    std::vector<double> out(img.channels() * oh * ow);
    std::vector<double> rows(h * ow);
    for (std::size_t c = 0; c < img.channels(); ++c) {
        const double* plane = img.values().data() + c * h * w;
        resample_lines(plane, rows.data(), h, w, 1, w, 1, ow, factor);
        resample_lines(rows.data(), out.data() + c * oh * ow, ow, h, ow, 1, ow, 1, factor);
    }
    return ImageBuffer::clamped(img.channels(), oh, ow, std::move(out));
}

auto nearest_upscale(const ImageBuffer& img, std::size_t factor) -> ImageBuffer
{
    const std::size_t oh = img.height() * factor;
    const std::size_t ow = img.width() * factor;
    std::vector<double> out(img.channels() * oh * ow);
    for (std::size_t c = 0; c < img.channels(); ++c)
        for (std::size_t y = 0; y < oh; ++y)
            for (std::size_t x = 0; x < ow; ++x)
                out[(c * oh + y) * ow + x] = img.at(c, y / factor, x / factor);
    return {img.channels(), oh, ow, std::move(out)};
}

auto flip_horizontal(const ImageBuffer& img) -> ImageBuffer
{
    const std::size_t h = img.height();
    const std::size_t w = img.width();
    std::vector<double> out(img.values().size());
    for (std::size_t c = 0; c < img.channels(); ++c)
        for (std::size_t y = 0; y < h; ++y)
            for (std::size_t x = 0; x < w; ++x)
                out[(c * h + y) * w + x] = img.at(c, y, w - 1 - x);
    return {img.channels(), h, w, std::move(out)};
}

auto rotate90(const ImageBuffer& img, unsigned quarter_turns) -> ImageBuffer
{
    ImageBuffer cur = img;
    for (unsigned t = 0; t < quarter_turns % 4; ++t) {
        const std::size_t h = cur.height();
        const std::size_t w = cur.width();
        // New image is w x h; new(y, x) = old(x, w - 1 - y).
        std::vector<double> out(cur.values().size());
        for (std::size_t c = 0; c < cur.channels(); ++c)
            for (std::size_t y = 0; y < w; ++y)
                for (std::size_t x = 0; x < h; ++x)
                    out[(c * w + y) * h + x] = cur.at(c, x, w - 1 - y);
        cur = ImageBuffer(cur.channels(), w, h, std::move(out));
    }
    return cur;
}

auto crop(const ImageBuffer& img, std::size_t top, std::size_t left, std::size_t height, std::size_t width)
    -> ImageBuffer
{
    if (top + height > img.height() || left + width > img.width()) {
        throw ValidationError("crop window exceeds the image");
    }
    std::vector<double> out(img.channels() * height * width);
    for (std::size_t c = 0; c < img.channels(); ++c)
        for (std::size_t y = 0; y < height; ++y)
            for (std::size_t x = 0; x < width; ++x)
                out[(c * height + y) * width + x] = img.at(c, top + y, left + x);
    return {img.channels(), height, width, std::move(out)};
}

auto extract_patches(const ImageBuffer& img, std::size_t hr_size, std::size_t count, std::uint64_t seed,
                     std::size_t source) -> std::vector<PatchPair>
{
    if (hr_size == 0 || hr_size % kScaleFactor != 0) {
        throw ValidationError("HR patch size must be a positive multiple of " + std::to_string(kScaleFactor));
    }
    if (hr_size > img.height() || hr_size > img.width()) {
        throw ValidationError("patch size " + std::to_string(hr_size) + " exceeds image "
                              + std::to_string(img.height()) + "x" + std::to_string(img.width()));
    }
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> row(0, img.height() - hr_size);
    std::uniform_int_distribution<std::size_t> col(0, img.width() - hr_size);
    std::vector<PatchPair> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        const std::size_t top = row(rng);
        const std::size_t left = col(rng);
        ImageBuffer hr = crop(img, top, left, hr_size, hr_size);
        ImageBuffer lr = bicubic_downscale(hr, kScaleFactor);
        out.push_back({std::move(lr), std::move(hr), source, top, left});
    }
    return out;
}

auto draw_augmentation(std::uint64_t seed) -> Augmentation
{
    std::mt19937_64 rng(seed);
    std::bernoulli_distribution flip(0.5);
    std::uniform_int_distribution<unsigned> turns(0, 3);
    Augmentation aug;
    aug.flip = flip(rng);
    aug.quarter_turns = turns(rng);
    return aug;
}

auto apply_augmentation(const PatchPair& pair, Augmentation aug) -> PatchPair
{
    if (aug.quarter_turns % 2 == 1
        && (pair.hr.height() != pair.hr.width() || pair.lr.height() != pair.lr.width())) {
        throw ValidationError("odd quarter-turn rotation of a non-square patch");
    }
    PatchPair out = pair;
    if (aug.flip) {
        out.lr = flip_horizontal(out.lr);
        out.hr = flip_horizontal(out.hr);
    }
    out.lr = rotate90(out.lr, aug.quarter_turns);
    out.hr = rotate90(out.hr, aug.quarter_turns);
    return out;
}

auto augment(const PatchPair& pair, std::uint64_t seed) -> PatchPair
{
    return apply_augmentation(pair, draw_augmentation(seed));
}

auto to_tensor(std::span<const ImageBuffer> images) -> Tensor
{
    if (images.empty()) {
        throw ValidationError("cannot stack an empty image list");
    }
    const auto& first = images.front();
    Tensor t(Shape{images.size(), first.channels(), first.height(), first.width()});
    const std::size_t per = first.values().size();
    for (std::size_t n = 0; n < images.size(); ++n) {
        if (!images[n].same_shape(first)) {
            throw ValidationError("cannot stack images of different shapes");
        }
        std::copy(images[n].values().begin(), images[n].values().end(), t.data().begin() + static_cast<std::ptrdiff_t>(n * per));
    }
    return t;
}

auto image_from_tensor(const Tensor& t, std::size_t n) -> ImageBuffer
{
    if (t.rank() != 4 || n >= t.extent(0)) {
        throw ValidationError("image_from_tensor needs an (N,C,H,W) tensor and a valid index");
    }
    const std::size_t per = t.extent(1) * t.extent(2) * t.extent(3);
    const auto first = t.data().begin() + static_cast<std::ptrdiff_t>(n * per);
    return ImageBuffer::clamped(t.extent(1), t.extent(2), t.extent(3),
                                std::vector<double>(first, first + static_cast<std::ptrdiff_t>(per)));
}

auto synthetic_image(std::size_t size, std::uint64_t seed) -> ImageBuffer
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double s = static_cast<double>(size);

    // Smooth background: a tilted plane plus a low-frequency wave.
    const double base = 0.2 + 0.3 * u(rng);
    const double gx = (u(rng) - 0.5) * 0.6;
    const double gy = (u(rng) - 0.5) * 0.6;
    const double amp = 0.05 + 0.1 * u(rng);
    const double fx = (1.0 + 2.0 * u(rng)) * 2.0 * std::numbers::pi / s;
    const double fy = (1.0 + 2.0 * u(rng)) * 2.0 * std::numbers::pi / s;
    const double phase = 2.0 * std::numbers::pi * u(rng);

    std::vector<double> v(size * size);
    for (std::size_t y = 0; y < size; ++y) {
        for (std::size_t x = 0; x < size; ++x) {
            const double px = static_cast<double>(x) / s;
            const double py = static_cast<double>(y) / s;
            v[y * size + x] = base + gx * px + gy * py
                + amp * std::sin(fx * static_cast<double>(x) + fy * static_cast<double>(y) + phase);
        }
    }

    // Hard-edged shapes painted on top.
    const int shapes = 3 + static_cast<int>(u(rng) * 3.0);
    for (int k = 0; k < shapes; ++k) {
        const double level = u(rng);
        const double cx = u(rng) * s;
        const double cy = u(rng) * s;
        const double r = (0.08 + 0.2 * u(rng)) * s;
        const bool disc = u(rng) < 0.5;
        for (std::size_t y = 0; y < size; ++y) {
            for (std::size_t x = 0; x < size; ++x) {
                const double dx = static_cast<double>(x) + 0.5 - cx;
                const double dy = static_cast<double>(y) + 0.5 - cy;
                const bool inside = disc ? dx * dx + dy * dy <= r * r : std::abs(dx) <= r && std::abs(dy) <= 0.6 * r;
                if (inside) {
                    v[y * size + x] = level;
                }
            }
        }
    }
    return ImageBuffer::clamped(1, size, size, std::move(v));
}

auto synthetic_corpus(std::size_t count, std::size_t size, std::uint64_t seed) -> std::vector<ImageBuffer>
{
    std::vector<ImageBuffer> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        out.push_back(synthetic_image(size, seed * 1000003ULL + i));
    }
    return out;
}

auto list_images(const std::filesystem::path& dir) -> std::vector<std::filesystem::path>
{
    std::error_code ec;
    if (!std::filesystem::is_directory(dir, ec)) {
        throw IoError("dataset directory not found: " + dir.string());
    }
    std::vector<std::filesystem::path> out;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        const auto ext = entry.path().extension().string();
        if (entry.is_regular_file() && (ext == ".pgm" || ext == ".ppm")) {
            out.push_back(entry.path());
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace hvgan
