#pragma once

// Full-reference image quality metrics. Multi-channel images are scored per
// channel and averaged (PSNR uses the MSE over all channels), with no border
// cropping.

#include "hvgan/image.hpp"

namespace hvgan {

struct MetricReport {
    double psnr = 0.0; ///< dB; +infinity for identical images
    double ssim = 0.0;
    double gmsd = 0.0;
};

/// 10 log10(peak^2 / MSE); +infinity when MSE is zero.
[[nodiscard]] auto psnr(const ImageBuffer& a, const ImageBuffer& b, double peak = 1.0) -> double;

/// Mean SSIM over all fully-contained 11x11 Gaussian (sigma 1.5) windows,
/// K1 = 0.01, K2 = 0.03, dynamic range 1.
[[nodiscard]] auto ssim(const ImageBuffer& a, const ImageBuffer& b) -> double;

/// Gradient magnitude similarity deviation: 2x2 average pooling, Prewitt
/// gradients with replicated borders, c = 170/255^2. Lower is better. An odd
/// trailing row or column is dropped by the pooling.
[[nodiscard]] auto gmsd(const ImageBuffer& a, const ImageBuffer& b) -> double;

[[nodiscard]] auto evaluate(const ImageBuffer& reference, const ImageBuffer& test) -> MetricReport;

} // namespace hvgan
