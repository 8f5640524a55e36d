#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace hvgan {

using Shape = std::vector<std::size_t>;

[[nodiscard]] auto numel(const Shape& shape) -> std::size_t;
[[nodiscard]] auto to_string(const Shape& shape) -> std::string;

/// Dense row-major array of doubles. Rank 0 (empty shape) is a scalar.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(Shape shape, double fill = 0.0);
    Tensor(Shape shape, std::vector<double> data);

    [[nodiscard]] static auto scalar(double v) -> Tensor { return Tensor(Shape{}, v); }

    [[nodiscard]] auto shape() const noexcept -> const Shape& { return shape_; }
    [[nodiscard]] auto rank() const noexcept -> std::size_t { return shape_.size(); }
    [[nodiscard]] auto extent(std::size_t axis) const -> std::size_t { return shape_.at(axis); }
    [[nodiscard]] auto size() const noexcept -> std::size_t { return data_.size(); }
    [[nodiscard]] auto empty() const noexcept -> bool { return data_.empty(); }

    [[nodiscard]] auto data() noexcept -> std::span<double> { return data_; }
    [[nodiscard]] auto data() const noexcept -> std::span<const double> { return data_; }
    [[nodiscard]] auto operator[](std::size_t i) -> double& { return data_[i]; }
    [[nodiscard]] auto operator[](std::size_t i) const -> double { return data_[i]; }

    /// Element access for rank-4 (N,C,H,W) tensors.
    [[nodiscard]] auto at(std::size_t n, std::size_t c, std::size_t y, std::size_t x) -> double&
    {
        return data_[((n * shape_[1] + c) * shape_[2] + y) * shape_[3] + x];
    }
    [[nodiscard]] auto at(std::size_t n, std::size_t c, std::size_t y, std::size_t x) const -> double
    {
        return data_[((n * shape_[1] + c) * shape_[2] + y) * shape_[3] + x];
    }

    /// Same data, new shape with the same element count.
    [[nodiscard]] auto reshaped(Shape shape) const -> Tensor;
    [[nodiscard]] auto item() const -> double;
    [[nodiscard]] auto all_finite() const noexcept -> bool;

    void fill(double v);

    friend auto operator==(const Tensor&, const Tensor&) -> bool = default;

private:
    Shape shape_;
    std::vector<double> data_;
};

} // namespace hvgan
