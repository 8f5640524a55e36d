#include "hvgan/metrics.hpp"

#include "hvgan/error.hpp"

#include <array>
#include <cmath>
#include <limits>

namespace hvgan {

namespace {

    constexpr std::size_t kWindow = 11;
    constexpr double kSigma = 1.5;
    constexpr double kC1 = 0.01 * 0.01;
    constexpr double kC2 = 0.03 * 0.03;
    constexpr double kGmsdC = 170.0 / (255.0 * 255.0);

    void require_same_shape(const ImageBuffer& a, const ImageBuffer& b, const char* metric)
    {
        if (!a.same_shape(b)) {
            throw ValidationError(std::string(metric) + ": shape mismatch " + std::to_string(a.channels()) + "x"
                                  + std::to_string(a.height()) + "x" + std::to_string(a.width()) + " vs "
                                  + std::to_string(b.channels()) + "x" + std::to_string(b.height()) + "x"
                                  + std::to_string(b.width()));
        }
    }

    auto gaussian_taps() -> std::array<double, kWindow>
    {
        std::array<double, kWindow> g{};
        double total = 0.0;
        for (std::size_t i = 0; i < kWindow; ++i) {
            const double d = static_cast<double>(i) - 5.0;
            g[i] = std::exp(-d * d / (2.0 * kSigma * kSigma));
            total += g[i];
        }
        for (double& v : g) {
            v /= total;
        }
        return g;
    }

    // Valid-mode separable Gaussian filter of an h x w plane.
    auto gaussian_valid(const std::vector<double>& p, std::size_t h, std::size_t w) -> std::vector<double>
    {
        static const auto g = gaussian_taps();
        const std::size_t oh = h - kWindow + 1;
        const std::size_t ow = w - kWindow + 1;
        std::vector<double> rows(h * ow);
        for (std::size_t y = 0; y < h; ++y)
            for (std::size_t x = 0; x < ow; ++x) {
                double s = 0.0;
                for (std::size_t k = 0; k < kWindow; ++k) s += g[k] * p[y * w + x + k];
                rows[y * ow + x] = s;
            }
        std::vector<double> out(oh * ow);
        for (std::size_t y = 0; y < oh; ++y)
            for (std::size_t x = 0; x < ow; ++x) {
                double s = 0.0;
                for (std::size_t k = 0; k < kWindow; ++k) s += g[k] * rows[(y + k) * ow + x];
                out[y * ow + x] = s;
            }
        return out;
    }

    auto ssim_plane(const ImageBuffer& a, const ImageBuffer& b) -> double
    {
        const std::size_t h = a.height();
        const std::size_t w = a.width();
        const std::size_t n = h * w;
        std::vector<double> pa(a.values().begin(), a.values().end());
        std::vector<double> pb(b.values().begin(), b.values().end());
        std::vector<double> aa(n), bb(n), ab(n);
        for (std::size_t i = 0; i < n; ++i) {
            aa[i] = pa[i] * pa[i];
            bb[i] = pb[i] * pb[i];
            ab[i] = pa[i] * pb[i];
        }
        const auto mu_a = gaussian_valid(pa, h, w);
        const auto mu_b = gaussian_valid(pb, h, w);
        const auto e_aa = gaussian_valid(aa, h, w);
        const auto e_bb = gaussian_valid(bb, h, w);
        const auto e_ab = gaussian_valid(ab, h, w);

        double total = 0.0;
        for (std::size_t i = 0; i < mu_a.size(); ++i) {
            const double ma = mu_a[i];
            const double mb = mu_b[i];
            const double var_a = e_aa[i] - ma * ma;
            const double var_b = e_bb[i] - mb * mb;
            const double cov = e_ab[i] - ma * mb;
            const double num = (2.0 * ma * mb + kC1) * (2.0 * cov + kC2);
            const double den = (ma * ma + mb * mb + kC1) * (var_a + var_b + kC2);
            total += num / den;
        }
        return total / static_cast<double>(mu_a.size());
    }

    auto average_pool2(const ImageBuffer& img) -> std::pair<std::vector<double>, std::pair<std::size_t, std::size_t>>
    {
        const std::size_t h = img.height() / 2;
        const std::size_t w = img.width() / 2;
        std::vector<double> out(h * w);
        for (std::size_t y = 0; y < h; ++y)
            for (std::size_t x = 0; x < w; ++x)
                out[y * w + x] = 0.25
                    * (img.at(0, 2 * y, 2 * x) + img.at(0, 2 * y, 2 * x + 1) + img.at(0, 2 * y + 1, 2 * x)
                       + img.at(0, 2 * y + 1, 2 * x + 1));
        return {std::move(out), {h, w}};
    }

    auto prewitt_magnitude(const std::vector<double>& p, std::size_t h, std::size_t w) -> std::vector<double>
    {
        auto px = [&](std::ptrdiff_t y, std::ptrdiff_t x) {
            y = std::clamp<std::ptrdiff_t>(y, 0, static_cast<std::ptrdiff_t>(h) - 1);
            x = std::clamp<std::ptrdiff_t>(x, 0, static_cast<std::ptrdiff_t>(w) - 1);
            return p[static_cast<std::size_t>(y) * w + static_cast<std::size_t>(x)];
        };
        std::vector<double> m(h * w);
        for (std::ptrdiff_t y = 0; y < static_cast<std::ptrdiff_t>(h); ++y)
            for (std::ptrdiff_t x = 0; x < static_cast<std::ptrdiff_t>(w); ++x) {
                double gx = 0.0;
                double gy = 0.0;
                for (std::ptrdiff_t d = -1; d <= 1; ++d) {
                    gx += px(y + d, x + 1) - px(y + d, x - 1);
                    gy += px(y + 1, x + d) - px(y - 1, x + d);
                }
                gx /= 3.0;
                gy /= 3.0;
                m[static_cast<std::size_t>(y) * w + static_cast<std::size_t>(x)] = std::sqrt(gx * gx + gy * gy);
            }
        return m;
    }

    auto gmsd_plane(const ImageBuffer& a, const ImageBuffer& b) -> double
    {
        const auto [pa, dims] = average_pool2(a);
        const auto pb = average_pool2(b).first;
        const auto [h, w] = dims;
        const auto ma = prewitt_magnitude(pa, h, w);
        const auto mb = prewitt_magnitude(pb, h, w);
        std::vector<double> gms(ma.size());
        double mean = 0.0;
        for (std::size_t i = 0; i < gms.size(); ++i) {
            gms[i] = (2.0 * ma[i] * mb[i] + kGmsdC) / (ma[i] * ma[i] + mb[i] * mb[i] + kGmsdC);
            mean += gms[i];
        }
        mean /= static_cast<double>(gms.size());
        double var = 0.0;
        for (double v : gms) {
            var += (v - mean) * (v - mean);
        }
        return std::sqrt(var / static_cast<double>(gms.size()));
    }

} // namespace

auto psnr(const ImageBuffer& a, const ImageBuffer& b, double peak) -> double
{
    require_same_shape(a, b, "psnr");
    if (!(peak > 0.0)) {
        throw ValidationError("psnr: peak must be positive");
    }
    double se = 0.0;
    for (std::size_t i = 0; i < a.values().size(); ++i) {
        const double d = a.values()[i] - b.values()[i];
        se += d * d;
    }
    if (se == 0.0) {
        return std::numeric_limits<double>::infinity();
    }
    const double mse = se / static_cast<double>(a.values().size());
    return 10.0 * std::log10(peak * peak / mse);
}

auto ssim(const ImageBuffer& a, const ImageBuffer& b) -> double
{
    require_same_shape(a, b, "ssim");
    if (a.height() < kWindow || a.width() < kWindow) {
        throw ValidationError("ssim: image smaller than the 11x11 window");
    }
    double total = 0.0;
    for (std::size_t c = 0; c < a.channels(); ++c) {
        total += ssim_plane(a.channel(c), b.channel(c));
    }
    return total / static_cast<double>(a.channels());
}

auto gmsd(const ImageBuffer& a, const ImageBuffer& b) -> double
{
    require_same_shape(a, b, "gmsd");
    if (a.height() < 4 || a.width() < 4) {
        throw ValidationError("gmsd: image smaller than 4x4");
    }
    double total = 0.0;
    for (std::size_t c = 0; c < a.channels(); ++c) {
        total += gmsd_plane(a.channel(c), b.channel(c));
    }
    return total / static_cast<double>(a.channels());
}

auto evaluate(const ImageBuffer& reference, const ImageBuffer& test) -> MetricReport
{
    return {psnr(reference, test), ssim(reference, test), gmsd(reference, test)};
}

} // namespace hvgan
