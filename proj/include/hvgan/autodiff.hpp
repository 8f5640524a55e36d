#pragma once

// Tape-based reverse-mode differentiation over dense double tensors.
//
// A Tape records one node per operation; parents always precede children, so
// backward() is a single reverse walk. Trainable values enter the tape through
// Parameter leaves and receive their gradients in Parameter::grad.

#include "hvgan/tensor.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace hvgan {

struct Parameter {
    std::string name;
    Tensor value;
    Tensor grad;
    bool requires_grad = true;

    Parameter() = default;
    Parameter(std::string n, Tensor v) : name(std::move(n)), value(std::move(v)) {}
};

enum class Op : std::uint8_t {
    Leaf,
    Constant,
    Add,
    Sub,
    Mul,
    Scale,
    AddScalar,
    Matmul,
    Conv2d,
    LeakyRelu,
    Sigmoid,
    Log,
    Exp,
    Abs,
    Square,
    Sum,
    Mean,
    UpsampleNearest2,
    Clamp,
    Reshape,
    SpatialMean,
    Scalarized,
};

[[nodiscard]] auto op_name(Op op) -> const char*;

class Tape;

/// Handle to a node on a tape. Cheap to copy; valid until the tape is cleared.
class Var {
public:
    Var() = default;

    [[nodiscard]] auto value() const -> const Tensor&;
    [[nodiscard]] auto shape() const -> const Shape&;
    [[nodiscard]] auto item() const -> double { return value().item(); }
    [[nodiscard]] auto tape() const noexcept -> Tape* { return tape_; }
    [[nodiscard]] auto id() const noexcept -> std::size_t { return id_; }

private:
    friend class Tape;
    Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

    Tape* tape_ = nullptr;
    std::size_t id_ = 0;
};

class Tape {
public:
    Tape() = default;
    Tape(const Tape&) = delete;
    auto operator=(const Tape&) -> Tape& = delete;

    [[nodiscard]] auto constant(Tensor value) -> Var;
    /// Leaf bound to `p`. A parameter with requires_grad == false is recorded
    /// as a constant.
    [[nodiscard]] auto parameter(Parameter& p) -> Var;

    /// Reverse pass from a single-element root. Every parameter on the tape
    /// gets its gradient overwritten (zero when unreachable); the tape is
    /// cleared afterwards.
    void backward(Var root);

    [[nodiscard]] auto size() const noexcept -> std::size_t { return nodes_.size(); }
    [[nodiscard]] auto empty() const noexcept -> bool { return nodes_.empty(); }
    void clear() noexcept { nodes_.clear(); }

    struct Node {
        Op op = Op::Constant;
        std::array<std::ptrdiff_t, 3> parents{-1, -1, -1};
        Tensor value;
        double a = 0.0; // slope, scale factor, offset or lower bound
        double b = 0.0; // upper bound
        std::size_t pad = 0;
        Parameter* param = nullptr;
        std::vector<double> weights;
        bool requires_grad = false;
    };

    [[nodiscard]] auto node(std::size_t id) const -> const Node& { return nodes_.at(id); }
    auto record(Node node) -> Var;

private:
    std::vector<Node> nodes_;
};

// Elementwise ops accept one operand holding a single element, which is
// broadcast; otherwise shapes must match exactly.
[[nodiscard]] auto add(Var a, Var b) -> Var;
[[nodiscard]] auto sub(Var a, Var b) -> Var;
[[nodiscard]] auto mul(Var a, Var b) -> Var;
[[nodiscard]] auto scale(Var a, double factor) -> Var;
[[nodiscard]] auto add_scalar(Var a, double offset) -> Var;
/// (m,k) x (k,n) -> (m,n)
[[nodiscard]] auto matmul(Var a, Var b) -> Var;
/// Stride-1 convolution with symmetric zero padding.
/// x: (N,C,H,W), w: (O,C,K,K), bias: (O) -> (N,O,H+2p-K+1,W+2p-K+1)
[[nodiscard]] auto conv2d(Var x, Var w, std::size_t pad) -> Var;
[[nodiscard]] auto conv2d(Var x, Var w, Var bias, std::size_t pad) -> Var;
[[nodiscard]] auto leaky_relu(Var a, double slope) -> Var;
[[nodiscard]] auto sigmoid(Var a) -> Var;
/// Throws NumericError on any non-positive input.
[[nodiscard]] auto log(Var a) -> Var;
[[nodiscard]] auto exp(Var a) -> Var;
[[nodiscard]] auto abs(Var a) -> Var;
[[nodiscard]] auto square(Var a) -> Var;
[[nodiscard]] auto sum(Var a) -> Var;
[[nodiscard]] auto mean(Var a) -> Var;
/// (N,C,H,W) -> (N,C,2H,2W)
[[nodiscard]] auto upsample_nearest2(Var a) -> Var;
/// Gradient passes only where lo <= x <= hi.
[[nodiscard]] auto clamp(Var a, double lo, double hi) -> Var;
[[nodiscard]] auto reshape(Var a, Shape shape) -> Var;
/// Global average pool: (N,C,H,W) -> (N,C)
[[nodiscard]] auto spatial_mean(Var a) -> Var;

/// Scalar node with a caller-supplied forward value whose derivative with
/// respect to scalar input k is weights[k]. Used to attach an analytically
/// differentiated outer function (the loss scalarizer) to the tape.
[[nodiscard]] auto scalarized(std::span<const Var> inputs, double value, std::vector<double> weights) -> Var;

inline auto operator+(Var a, Var b) -> Var { return add(a, b); }
inline auto operator-(Var a, Var b) -> Var { return sub(a, b); }
inline auto operator*(Var a, Var b) -> Var { return mul(a, b); }
inline auto operator*(double f, Var a) -> Var { return scale(a, f); }
inline auto operator*(Var a, double f) -> Var { return scale(a, f); }
inline auto operator+(Var a, double c) -> Var { return add_scalar(a, c); }
inline auto operator-(double c, Var a) -> Var { return add_scalar(scale(a, -1.0), c); }
inline auto operator-(Var a) -> Var { return scale(a, -1.0); }

using ScalarFunction = std::function<Var(Tape&, Var)>;

/// Compares the backward-pass gradient of `f` at `x` with central
/// differences; returns max_i |g_ad - g_fd| / max(1, |g_fd|).
[[nodiscard]] auto finite_diff_check(const ScalarFunction& f, const Tensor& x, double step = 1e-6) -> double;

struct GradcheckResult {
    std::string primitive;
    double max_rel_error = 0.0;
};

/// Seeded finite-difference battery: each primitive of the op set is checked
/// at `points` random inputs (every differentiable operand).
[[nodiscard]] auto gradcheck_suite(std::size_t points = 10, std::uint64_t seed = 7) -> std::vector<GradcheckResult>;

} // namespace hvgan
