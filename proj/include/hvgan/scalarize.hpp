#pragma once

// Negative-log hypervolume scalarization of a loss vector against per-loss
// upper bounds, plus the fixed-weight baseline.

#include <span>
#include <variant>
#include <vector>

namespace hvgan {

inline constexpr double kDefaultClampEps = 1e-6;

/// Per-loss upper bounds mu_k; each strictly positive and finite.
class UpperBounds {
public:
    explicit UpperBounds(std::vector<double> mu);

    [[nodiscard]] auto values() const noexcept -> std::span<const double> { return mu_; }
    [[nodiscard]] auto size() const noexcept -> std::size_t { return mu_.size(); }
    [[nodiscard]] auto operator[](std::size_t k) const -> double { return mu_[k]; }

private:
    std::vector<double> mu_;
};

struct HypervolLog {};
struct HypervolLogNormalized {};
struct LinearFixed {
    std::vector<double> weights;
};

using ScalarizationMode = std::variant<HypervolLog, HypervolLogNormalized, LinearFixed>;

[[nodiscard]] auto is_hypervolume_mode(const ScalarizationMode& mode) -> bool;

/// -sum_k log(max(mu_k - l_k, eps))
[[nodiscard]] auto hv_log_loss(std::span<const double> losses, const UpperBounds& mu,
                               double eps = kDefaultClampEps) -> double;

/// -sum_k log(max(1 - l_k / mu_k, eps))
[[nodiscard]] auto hv_log_loss_normalized(std::span<const double> losses, const UpperBounds& mu,
                                          double eps = kDefaultClampEps) -> double;

/// w_k = 1 / max(mu_k - l_k, eps), the derivative of either hypervolume
/// objective with respect to l_k.
[[nodiscard]] auto gradient_weights(std::span<const double> losses, const UpperBounds& mu,
                                    double eps = kDefaultClampEps) -> std::vector<double>;

/// Bitmask with bit k set when mu_k - l_k fell below eps.
[[nodiscard]] auto clamp_mask(std::span<const double> losses, const UpperBounds& mu,
                              double eps = kDefaultClampEps) -> unsigned;

[[nodiscard]] auto linear_fixed(std::span<const double> losses, std::span<const double> weights) -> double;

[[nodiscard]] auto scalarize(std::span<const double> losses, const ScalarizationMode& mode, const UpperBounds& mu,
                             double eps = kDefaultClampEps) -> double;

/// d(scalarize)/d(l_k) as used for the generator update: gradient_weights for
/// the hypervolume modes, the fixed weights for LinearFixed.
[[nodiscard]] auto mode_weights(std::span<const double> losses, const ScalarizationMode& mode,
                                const UpperBounds& mu, double eps = kDefaultClampEps) -> std::vector<double>;

} // namespace hvgan
