#include "hvgan/tensor.hpp"

#include "hvgan/error.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

namespace hvgan {

auto numel(const Shape& shape) -> std::size_t
{
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

auto to_string(const Shape& shape) -> std::string
{
    std::string s = "(";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        s += (i ? "," : "") + std::to_string(shape[i]);
    }
    return s + ")";
}

Tensor::Tensor(Shape shape, double fill) : shape_(std::move(shape)), data_(numel(shape_), fill) {}

Tensor::Tensor(Shape shape, std::vector<double> data) : shape_(std::move(shape)), data_(std::move(data))
{
    if (data_.size() != numel(shape_)) {
        throw ValidationError("tensor data has " + std::to_string(data_.size()) + " values but shape "
                              + to_string(shape_) + " needs " + std::to_string(numel(shape_)));
    }
}

auto Tensor::reshaped(Shape shape) const -> Tensor
{
    return Tensor(std::move(shape), data_);
}

auto Tensor::item() const -> double
{
    if (data_.size() != 1) {
        throw ValidationError("item() on a tensor of shape " + to_string(shape_));
    }
    return data_[0];
}

auto Tensor::all_finite() const noexcept -> bool
{
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

void Tensor::fill(double v)
{
    std::fill(data_.begin(), data_.end(), v);
}

} // namespace hvgan
