#include "hvgan/scalarize.hpp"

#include "hvgan/error.hpp"

#include <cmath>
#include <string>

namespace hvgan {

namespace {

    void check_args(std::span<const double> losses, const UpperBounds& mu, double eps)
    {
        if (losses.size() != mu.size()) {
            throw ValidationError("loss vector has " + std::to_string(losses.size()) + " entries but "
                                  + std::to_string(mu.size()) + " upper bounds were given");
        }
        if (!(eps > 0.0) || !std::isfinite(eps)) {
            throw ValidationError("clamp eps must be positive and finite");
        }
        for (std::size_t k = 0; k < losses.size(); ++k) {
            if (!std::isfinite(losses[k])) {
                throw NumericError("loss " + std::to_string(k) + " is not finite");
            }
        }
    }

} // namespace

UpperBounds::UpperBounds(std::vector<double> mu) : mu_(std::move(mu))
{
    for (double m : mu_) {
        if (!(m > 0.0) || !std::isfinite(m)) {
            throw ValidationError("upper bounds must be strictly positive and finite");
        }
    }
}

auto is_hypervolume_mode(const ScalarizationMode& mode) -> bool
{
    return !std::holds_alternative<LinearFixed>(mode);
}

auto hv_log_loss(std::span<const double> losses, const UpperBounds& mu, double eps) -> double
{
    check_args(losses, mu, eps);
    double total = 0.0;
    for (std::size_t k = 0; k < losses.size(); ++k) {
        total -= std::log(std::max(mu[k] - losses[k], eps));
    }
    return total;
}

auto hv_log_loss_normalized(std::span<const double> losses, const UpperBounds& mu, double eps) -> double
{
    check_args(losses, mu, eps);
    double total = 0.0;
    for (std::size_t k = 0; k < losses.size(); ++k) {
        total -= std::log(std::max(1.0 - losses[k] / mu[k], eps));
    }
    return total;
}

auto gradient_weights(std::span<const double> losses, const UpperBounds& mu, double eps) -> std::vector<double>
{
    check_args(losses, mu, eps);
    std::vector<double> w(losses.size());
    for (std::size_t k = 0; k < losses.size(); ++k) {
        w[k] = 1.0 / std::max(mu[k] - losses[k], eps);
    }
    return w;
}

auto clamp_mask(std::span<const double> losses, const UpperBounds& mu, double eps) -> unsigned
{
    check_args(losses, mu, eps);
    unsigned mask = 0;
    for (std::size_t k = 0; k < losses.size(); ++k) {
        if (mu[k] - losses[k] < eps) {
            mask |= 1U << k;
        }
    }
    return mask;
}

auto linear_fixed(std::span<const double> losses, std::span<const double> weights) -> double
{
    if (losses.size() != weights.size()) {
        throw ValidationError("loss vector has " + std::to_string(losses.size()) + " entries but "
                              + std::to_string(weights.size()) + " weights were given");
    }
    double total = 0.0;
    for (std::size_t k = 0; k < losses.size(); ++k) {
        if (!(weights[k] >= 0.0) || !std::isfinite(weights[k])) {
            throw ValidationError("fixed weights must be nonnegative and finite");
        }
        total += weights[k] * losses[k];
    }
    return total;
}

auto scalarize(std::span<const double> losses, const ScalarizationMode& mode, const UpperBounds& mu, double eps)
    -> double
{
    if (const auto* fixed = std::get_if<LinearFixed>(&mode)) {
        return linear_fixed(losses, fixed->weights);
    }
    if (std::holds_alternative<HypervolLogNormalized>(mode)) {
        return hv_log_loss_normalized(losses, mu, eps);
    }
    return hv_log_loss(losses, mu, eps);
}

auto mode_weights(std::span<const double> losses, const ScalarizationMode& mode, const UpperBounds& mu,
                  double eps) -> std::vector<double>
{
    if (const auto* fixed = std::get_if<LinearFixed>(&mode)) {
        if (fixed->weights.size() != losses.size()) {
            throw ValidationError("fixed weights do not match the loss count");
        }
        return fixed->weights;
    }
    return gradient_weights(losses, mu, eps);
}

} // namespace hvgan
