#include "hvgan/autodiff.hpp"

#include "hvgan/error.hpp"

#include <algorithm>
#include <cmath>

namespace hvgan {

auto op_name(Op op) -> const char*
{
    switch (op) {
    case Op::Leaf: return "leaf";
    case Op::Constant: return "constant";
    case Op::Add: return "add";
    case Op::Sub: return "sub";
    case Op::Mul: return "mul";
    case Op::Scale: return "scale";
    case Op::AddScalar: return "add_scalar";
    case Op::Matmul: return "matmul";
    case Op::Conv2d: return "conv2d";
    case Op::LeakyRelu: return "leaky_relu";
    case Op::Sigmoid: return "sigmoid";
    case Op::Log: return "log";
    case Op::Exp: return "exp";
    case Op::Abs: return "abs";
    case Op::Square: return "square";
    case Op::Sum: return "sum";
    case Op::Mean: return "mean";
    case Op::UpsampleNearest2: return "upsample_nearest2";
    case Op::Clamp: return "clamp";
    case Op::Reshape: return "reshape";
    case Op::SpatialMean: return "spatial_mean";
    case Op::Scalarized: return "scalarized";
    }
    return "unknown";
}

auto Var::value() const -> const Tensor&
{
    return tape_->node(id_).value;
}

auto Var::shape() const -> const Shape&
{
    return value().shape();
}

auto Tape::record(Node node) -> Var
{
    if (!node.value.all_finite()) {
        throw NumericError(std::string("non-finite output from ") + op_name(node.op));
    }
    for (auto p : node.parents) {
        if (p >= 0) {
            node.requires_grad = node.requires_grad || nodes_[static_cast<std::size_t>(p)].requires_grad;
        }
    }
    nodes_.push_back(std::move(node));
    return {this, nodes_.size() - 1};
}

auto Tape::constant(Tensor value) -> Var
{
    Node n;
    n.op = Op::Constant;
    n.value = std::move(value);
    return record(std::move(n));
}

auto Tape::parameter(Parameter& p) -> Var
{
    if (!p.requires_grad) {
        return constant(p.value);
    }
    Node n;
    n.op = Op::Leaf;
    n.value = p.value;
    n.param = &p;
    n.requires_grad = true;
    return record(std::move(n));
}

namespace {

    auto pidx(std::ptrdiff_t p) -> std::size_t { return static_cast<std::size_t>(p); }

    auto tape_of(Var a, Var b) -> Tape&
    {
        if (a.tape() == nullptr || a.tape() != b.tape()) {
            throw ValidationError("operands live on different tapes");
        }
        return *a.tape();
    }

    auto tape_of(Var a) -> Tape&
    {
        if (a.tape() == nullptr) {
            throw ValidationError("operation on an unbound variable");
        }
        return *a.tape();
    }

    auto make_node(Op op, Tensor value, std::initializer_list<Var> parents) -> Tape::Node
    {
        Tape::Node n;
        n.op = op;
        n.value = std::move(value);
        std::size_t i = 0;
        for (Var p : parents) {
            n.parents[i++] = static_cast<std::ptrdiff_t>(p.id());
        }
        return n;
    }

    template <class F>
    auto binary(Op op, Var a, Var b, F f) -> Var
    {
        Tape& tape = tape_of(a, b);
        const Tensor& x = a.value();
        const Tensor& y = b.value();
        Tensor out;
        if (x.shape() == y.shape()) {
            out = Tensor(x.shape());
            for (std::size_t i = 0; i < out.size(); ++i) {
                out[i] = f(x[i], y[i]);
            }
        } else if (y.size() == 1) {
            out = Tensor(x.shape());
            for (std::size_t i = 0; i < out.size(); ++i) {
                out[i] = f(x[i], y[0]);
            }
        } else if (x.size() == 1) {
            out = Tensor(y.shape());
            for (std::size_t i = 0; i < out.size(); ++i) {
                out[i] = f(x[0], y[i]);
            }
        } else {
            throw ValidationError(std::string(op_name(op)) + ": shape mismatch " + to_string(x.shape()) + " vs "
                                  + to_string(y.shape()));
        }
        return tape.record(make_node(op, std::move(out), {a, b}));
    }

    template <class F>
    auto unary(Op op, Var a, F f, double attr = 0.0) -> Var
    {
        Tape& tape = tape_of(a);
        const Tensor& x = a.value();
        Tensor out(x.shape());
        for (std::size_t i = 0; i < out.size(); ++i) {
            out[i] = f(x[i]);
        }
        auto n = make_node(op, std::move(out), {a});
        n.a = attr;
        return tape.record(std::move(n));
    }

    auto sigmoid_value(double x) -> double
    {
        // Split by sign so exp never overflows.
        if (x >= 0.0) {
            return 1.0 / (1.0 + std::exp(-x));
        }
        const double e = std::exp(x);
        return e / (1.0 + e);
    }

    struct ConvDims {
        std::size_t n, c, h, w, o, k, oh, ow, pad;
    };

    auto conv_dims(const Shape& xs, const Shape& ws, std::size_t pad) -> ConvDims
    {
        if (xs.size() != 4 || ws.size() != 4) {
            throw ValidationError("conv2d: input and kernel must be rank 4, got " + to_string(xs) + " and "
                                  + to_string(ws));
        }
        if (xs[1] != ws[1] || ws[2] != ws[3]) {
            throw ValidationError("conv2d: kernel " + to_string(ws) + " incompatible with input " + to_string(xs));
        }
        const std::size_t k = ws[2];
        if (xs[2] + 2 * pad < k || xs[3] + 2 * pad < k) {
            throw ValidationError("conv2d: kernel larger than padded input");
        }
        return {xs[0], xs[1], xs[2], xs[3], ws[0], k, xs[2] + 2 * pad - k + 1, xs[3] + 2 * pad - k + 1, pad};
    }

    // Output columns ox for which ix = ox + kx - pad lies in [0, w).
    auto col_range(const ConvDims& d, std::size_t kx) -> std::pair<std::size_t, std::size_t>
    {
        const std::ptrdiff_t shift = static_cast<std::ptrdiff_t>(kx) - static_cast<std::ptrdiff_t>(d.pad);
        const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, -shift);
        const std::ptrdiff_t hi
            = std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(d.ow), static_cast<std::ptrdiff_t>(d.w) - shift);
        return {static_cast<std::size_t>(lo), static_cast<std::size_t>(std::max(lo, hi))};
    }

    // Calls body(out_row, in_row, count) for every valid (output row, input row) pair
    // of one (kernel row, kernel col) tap.
    template <class F>
    void for_each_tap_row(const ConvDims& d, std::size_t ky, std::size_t kx, F body)
    {
        const auto [x0, x1] = col_range(d, kx);
        if (x1 <= x0) {
            return;
        }
        for (std::size_t oy = 0; oy < d.oh; ++oy) {
            const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(oy + ky) - static_cast<std::ptrdiff_t>(d.pad);
            if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(d.h)) {
                continue;
            }
            const std::size_t in_off = static_cast<std::size_t>(iy) * d.w + x0 + kx - d.pad;
            body(oy * d.ow + x0, in_off, x1 - x0);
        }
    }

    auto conv_forward(const Tensor& x, const Tensor& w, const Tensor* bias, const ConvDims& d) -> Tensor
    {
        Tensor out(Shape{d.n, d.o, d.oh, d.ow});
        const std::size_t in_plane = d.h * d.w;
        const std::size_t out_plane = d.oh * d.ow;
        for (std::size_t n = 0; n < d.n; ++n) {
            for (std::size_t o = 0; o < d.o; ++o) {
                double* dst = out.data().data() + (n * d.o + o) * out_plane;
                if (bias != nullptr) {
                    std::fill(dst, dst + out_plane, (*bias)[o]);
                }
                for (std::size_t c = 0; c < d.c; ++c) {
                    const double* src = x.data().data() + (n * d.c + c) * in_plane;
                    for (std::size_t ky = 0; ky < d.k; ++ky) {
                        for (std::size_t kx = 0; kx < d.k; ++kx) {
                            const double wv = w[((o * d.c + c) * d.k + ky) * d.k + kx];
                            for_each_tap_row(d, ky, kx, [&](std::size_t oo, std::size_t io, std::size_t cnt) {
                                double* out_row = dst + oo;
                                const double* in_row = src + io;
                                for (std::size_t i = 0; i < cnt; ++i) {
                                    out_row[i] += wv * in_row[i];
                                }
                            });
                        }
                    }
                }
            }
        }
        return out;
    }

    void conv_backward(const Tensor& g, const Tensor& x, const Tensor& w, const ConvDims& d, Tensor* dx,
                       Tensor* dw, Tensor* db)
    {
        const std::size_t in_plane = d.h * d.w;
        const std::size_t out_plane = d.oh * d.ow;
        for (std::size_t n = 0; n < d.n; ++n) {
            for (std::size_t o = 0; o < d.o; ++o) {
                const double* grow = g.data().data() + (n * d.o + o) * out_plane;
                if (db != nullptr) {
                    double s = 0.0;
                    for (std::size_t i = 0; i < out_plane; ++i) {
                        s += grow[i];
                    }
                    (*db)[o] += s;
                }
                for (std::size_t c = 0; c < d.c; ++c) {
                    const double* src = x.data().data() + (n * d.c + c) * in_plane;
                    double* dsrc = dx != nullptr ? dx->data().data() + (n * d.c + c) * in_plane : nullptr;
                    for (std::size_t ky = 0; ky < d.k; ++ky) {
                        for (std::size_t kx = 0; kx < d.k; ++kx) {
                            const std::size_t widx = ((o * d.c + c) * d.k + ky) * d.k + kx;
                            const double wv = w[widx];
                            double acc = 0.0;
                            for_each_tap_row(d, ky, kx, [&](std::size_t oo, std::size_t io, std::size_t cnt) {
                                const double* g_row = grow + oo;
                                if (dw != nullptr) {
                                    // Four partial sums so the reduction vectorizes.
                                    const double* in_row = src + io;
                                    double part[4] = {0.0, 0.0, 0.0, 0.0};
                                    std::size_t i = 0;
                                    for (; i + 4 <= cnt; i += 4) {
                                        for (std::size_t j = 0; j < 4; ++j) {
                                            part[j] += g_row[i + j] * in_row[i + j];
                                        }
                                    }
                                    for (; i < cnt; ++i) {
                                        part[0] += g_row[i] * in_row[i];
                                    }
                                    acc += (part[0] + part[1]) + (part[2] + part[3]);
                                }
                                if (dsrc != nullptr) {
                                    double* d_row = dsrc + io;
                                    for (std::size_t i = 0; i < cnt; ++i) {
                                        d_row[i] += wv * g_row[i];
                                    }
                                }
                            });
                            if (dw != nullptr) {
                                (*dw)[widx] += acc;
                            }
                        }
                    }
                }
            }
        }
    }

} // namespace

auto add(Var a, Var b) -> Var
{
    return binary(Op::Add, a, b, [](double x, double y) { return x + y; });
}

auto sub(Var a, Var b) -> Var
{
    return binary(Op::Sub, a, b, [](double x, double y) { return x - y; });
}

auto mul(Var a, Var b) -> Var
{
    return binary(Op::Mul, a, b, [](double x, double y) { return x * y; });
}

auto scale(Var a, double factor) -> Var
{
    return unary(Op::Scale, a, [factor](double x) { return factor * x; }, factor);
}

auto add_scalar(Var a, double offset) -> Var
{
    return unary(Op::AddScalar, a, [offset](double x) { return x + offset; }, offset);
}

auto matmul(Var a, Var b) -> Var
{
    Tape& tape = tape_of(a, b);
    const Tensor& x = a.value();
    const Tensor& y = b.value();
    if (x.rank() != 2 || y.rank() != 2 || x.extent(1) != y.extent(0)) {
        throw ValidationError("matmul: shape mismatch " + to_string(x.shape()) + " x " + to_string(y.shape()));
    }
    const std::size_t m = x.extent(0);
    const std::size_t k = x.extent(1);
    const std::size_t n = y.extent(1);
    Tensor out(Shape{m, n});
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t p = 0; p < k; ++p) {
            const double xv = x[i * k + p];
            for (std::size_t j = 0; j < n; ++j) {
                out[i * n + j] += xv * y[p * n + j];
            }
        }
    }
    return tape.record(make_node(Op::Matmul, std::move(out), {a, b}));
}

auto conv2d(Var x, Var w, std::size_t pad) -> Var
{
    Tape& tape = tape_of(x, w);
    const auto d = conv_dims(x.shape(), w.shape(), pad);
    auto n = make_node(Op::Conv2d, conv_forward(x.value(), w.value(), nullptr, d), {x, w});
    n.pad = pad;
    return tape.record(std::move(n));
}

auto conv2d(Var x, Var w, Var bias, std::size_t pad) -> Var
{
    Tape& tape = tape_of(x, w);
    tape_of(x, bias);
    const auto d = conv_dims(x.shape(), w.shape(), pad);
    if (bias.value().rank() != 1 || bias.value().size() != d.o) {
        throw ValidationError("conv2d: bias shape " + to_string(bias.shape()) + " does not match "
                              + std::to_string(d.o) + " output channels");
    }
    auto n = make_node(Op::Conv2d, conv_forward(x.value(), w.value(), &bias.value(), d), {x, w, bias});
    n.pad = pad;
    return tape.record(std::move(n));
}

auto leaky_relu(Var a, double slope) -> Var
{
    return unary(Op::LeakyRelu, a, [slope](double x) { return x > 0.0 ? x : slope * x; }, slope);
}

auto sigmoid(Var a) -> Var
{
    return unary(Op::Sigmoid, a, sigmoid_value);
}

auto log(Var a) -> Var
{
    for (double v : a.value().data()) {
        if (!(v > 0.0)) {
            throw NumericError("log of non-positive value " + std::to_string(v));
        }
    }
    return unary(Op::Log, a, [](double x) { return std::log(x); });
}

auto exp(Var a) -> Var
{
    return unary(Op::Exp, a, [](double x) { return std::exp(x); });
}

auto abs(Var a) -> Var
{
    return unary(Op::Abs, a, [](double x) { return std::abs(x); });
}

auto square(Var a) -> Var
{
    return unary(Op::Square, a, [](double x) { return x * x; });
}

auto sum(Var a) -> Var
{
    Tape& tape = tape_of(a);
    double s = 0.0;
    for (double v : a.value().data()) {
        s += v;
    }
    return tape.record(make_node(Op::Sum, Tensor::scalar(s), {a}));
}

auto mean(Var a) -> Var
{
    Tape& tape = tape_of(a);
    const std::size_t count = a.value().size();
    if (count == 0) {
        throw ValidationError("mean of an empty tensor");
    }
    double s = 0.0;
    for (double v : a.value().data()) {
        s += v;
    }
    return tape.record(make_node(Op::Mean, Tensor::scalar(s / static_cast<double>(count)), {a}));
}

auto upsample_nearest2(Var a) -> Var
{
    Tape& tape = tape_of(a);
    const Tensor& x = a.value();
    if (x.rank() != 4) {
        throw ValidationError("upsample_nearest2 needs a rank-4 input, got " + to_string(x.shape()));
    }
    const std::size_t planes = x.extent(0) * x.extent(1);
    const std::size_t h = x.extent(2);
    const std::size_t w = x.extent(3);
    Tensor out(Shape{x.extent(0), x.extent(1), 2 * h, 2 * w});
    for (std::size_t p = 0; p < planes; ++p) {
        for (std::size_t y = 0; y < 2 * h; ++y) {
            for (std::size_t xx = 0; xx < 2 * w; ++xx) {
                out[(p * 2 * h + y) * 2 * w + xx] = x[(p * h + y / 2) * w + xx / 2];
            }
        }
    }
    return tape.record(make_node(Op::UpsampleNearest2, std::move(out), {a}));
}

auto clamp(Var a, double lo, double hi) -> Var
{
    if (!(lo <= hi)) {
        throw ValidationError("clamp: lower bound exceeds upper bound");
    }
    Tape& tape = tape_of(a);
    const Tensor& x = a.value();
    Tensor out(x.shape());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = std::clamp(x[i], lo, hi);
    }
    auto n = make_node(Op::Clamp, std::move(out), {a});
    n.a = lo;
    n.b = hi;
    return tape.record(std::move(n));
}

auto reshape(Var a, Shape shape) -> Var
{
    Tape& tape = tape_of(a);
    if (numel(shape) != a.value().size()) {
        throw ValidationError("reshape: cannot view " + to_string(a.shape()) + " as " + to_string(shape));
    }
    return tape.record(make_node(Op::Reshape, a.value().reshaped(std::move(shape)), {a}));
}

auto spatial_mean(Var a) -> Var
{
    Tape& tape = tape_of(a);
    const Tensor& x = a.value();
    if (x.rank() != 4) {
        throw ValidationError("spatial_mean needs a rank-4 input, got " + to_string(x.shape()));
    }
    const std::size_t planes = x.extent(0) * x.extent(1);
    const std::size_t area = x.extent(2) * x.extent(3);
    Tensor out(Shape{x.extent(0), x.extent(1)});
    for (std::size_t p = 0; p < planes; ++p) {
        double s = 0.0;
        for (std::size_t i = 0; i < area; ++i) {
            s += x[p * area + i];
        }
        out[p] = s / static_cast<double>(area);
    }
    return tape.record(make_node(Op::SpatialMean, std::move(out), {a}));
}

auto scalarized(std::span<const Var> inputs, double value, std::vector<double> weights) -> Var
{
    if (inputs.empty() || inputs.size() != weights.size()) {
        throw ValidationError("scalarized: need one weight per input");
    }
    Tape& tape = tape_of(inputs[0]);
    Tape::Node n;
    n.op = Op::Scalarized;
    n.value = Tensor::scalar(value);
    n.weights = std::move(weights);
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        if (inputs[i].tape() != &tape) {
            throw ValidationError("scalarized: inputs live on different tapes");
        }
        if (inputs[i].value().size() != 1) {
            throw ValidationError("scalarized: inputs must be single-element tensors");
        }
    }
    if (inputs.size() > n.parents.size()) {
        throw ValidationError("scalarized: at most three inputs are supported");
    }
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        n.parents[i] = static_cast<std::ptrdiff_t>(inputs[i].id());
    }
    return tape.record(std::move(n));
}

namespace {

    // Adds `g` (shaped like the op output) into the gradient of a binary-op
    // operand, summing over the broadcast dimension when the operand is a
    // single element.
    void accumulate_operand(Tensor& acc, const Tensor& operand, const Tensor& g, const Tensor* factor)
    {
        if (operand.size() == g.size() && operand.shape() == g.shape()) {
            for (std::size_t i = 0; i < g.size(); ++i) {
                acc[i] += factor ? g[i] * (factor->size() == 1 ? (*factor)[0] : (*factor)[i]) : g[i];
            }
            return;
        }
        double s = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) {
            s += factor ? g[i] * (factor->size() == 1 ? (*factor)[0] : (*factor)[i]) : g[i];
        }
        acc[0] += s;
    }

} // namespace

void Tape::backward(Var root)
{
    if (nodes_.empty()) {
        throw ValidationError("backward on an empty tape");
    }
    if (root.tape() != this || root.id() >= nodes_.size()) {
        throw ValidationError("backward root does not belong to this tape");
    }
    if (nodes_[root.id()].value.size() != 1) {
        throw ValidationError("backward root must be a scalar, got shape "
                              + to_string(nodes_[root.id()].value.shape()));
    }

    for (auto& n : nodes_) {
        if (n.op == Op::Leaf) {
            n.param->grad = Tensor(n.value.shape());
        }
    }

    std::vector<Tensor> grads(nodes_.size());
    grads[root.id()] = Tensor(nodes_[root.id()].value.shape(), 1.0);

    auto acc = [&](std::ptrdiff_t p) -> Tensor* {
        auto& node = nodes_[pidx(p)];
        if (!node.requires_grad) {
            return nullptr;
        }
        auto& g = grads[pidx(p)];
        if (g.empty() && !node.value.empty()) {
            g = Tensor(node.value.shape());
        }
        return &g;
    };

    for (std::size_t id = root.id() + 1; id-- > 0;) {
        Node& n = nodes_[id];
        const Tensor& g = grads[id];
        if (g.empty() || !n.requires_grad) {
            continue;
        }
        const auto [p0, p1, p2] = n.parents;
        const Tensor* x = p0 >= 0 ? &nodes_[pidx(p0)].value : nullptr;
        const Tensor* y = p1 >= 0 ? &nodes_[pidx(p1)].value : nullptr;

        switch (n.op) {
        case Op::Leaf: {
            Tensor& pg = n.param->grad;
            for (std::size_t i = 0; i < g.size(); ++i) {
                pg[i] += g[i];
            }
            break;
        }
        case Op::Constant:
            break;
        case Op::Add:
            if (auto* a = acc(p0)) accumulate_operand(*a, *x, g, nullptr);
            if (auto* b = acc(p1)) accumulate_operand(*b, *y, g, nullptr);
            break;
        case Op::Sub:
            if (auto* a = acc(p0)) accumulate_operand(*a, *x, g, nullptr);
            if (auto* b = acc(p1)) {
                const Tensor neg(Shape{}, -1.0);
                accumulate_operand(*b, *y, g, &neg);
            }
            break;
        case Op::Mul:
            if (auto* a = acc(p0)) accumulate_operand(*a, *x, g, y);
            if (auto* b = acc(p1)) accumulate_operand(*b, *y, g, x);
            break;
        case Op::Scale:
            if (auto* a = acc(p0)) {
                for (std::size_t i = 0; i < g.size(); ++i) (*a)[i] += n.a * g[i];
            }
            break;
        case Op::AddScalar:
        case Op::Reshape:
            if (auto* a = acc(p0)) {
                for (std::size_t i = 0; i < g.size(); ++i) (*a)[i] += g[i];
            }
            break;
        case Op::Matmul: {
            const std::size_t m = x->extent(0);
            const std::size_t k = x->extent(1);
            const std::size_t cols = y->extent(1);
            if (auto* a = acc(p0)) {
                for (std::size_t i = 0; i < m; ++i)
                    for (std::size_t p = 0; p < k; ++p) {
                        double s = 0.0;
                        for (std::size_t j = 0; j < cols; ++j) s += g[i * cols + j] * (*y)[p * cols + j];
                        (*a)[i * k + p] += s;
                    }
            }
            if (auto* b = acc(p1)) {
                for (std::size_t i = 0; i < m; ++i)
                    for (std::size_t p = 0; p < k; ++p) {
                        const double xv = (*x)[i * k + p];
                        for (std::size_t j = 0; j < cols; ++j) (*b)[p * cols + j] += xv * g[i * cols + j];
                    }
            }
            break;
        }
        case Op::Conv2d: {
            const auto d = conv_dims(x->shape(), y->shape(), n.pad);
            Tensor* dx = acc(p0);
            Tensor* dw = acc(p1);
            Tensor* db = p2 >= 0 ? acc(p2) : nullptr;
            if (dx || dw || db) {
                conv_backward(g, *x, *y, d, dx, dw, db);
            }
            break;
        }
        case Op::LeakyRelu:
            if (auto* a = acc(p0)) {
                for (std::size_t i = 0; i < g.size(); ++i) (*a)[i] += (*x)[i] > 0.0 ? g[i] : n.a * g[i];
            }
            break;
        case Op::Sigmoid:
            if (auto* a = acc(p0)) {
                for (std::size_t i = 0; i < g.size(); ++i) {
                    const double s = n.value[i];
                    (*a)[i] += g[i] * s * (1.0 - s);
                }
            }
            break;
        case Op::Log:
            if (auto* a = acc(p0)) {
                for (std::size_t i = 0; i < g.size(); ++i) (*a)[i] += g[i] / (*x)[i];
            }
            break;
        case Op::Exp:
            if (auto* a = acc(p0)) {
                for (std::size_t i = 0; i < g.size(); ++i) (*a)[i] += g[i] * n.value[i];
            }
            break;
        case Op::Abs:
            if (auto* a = acc(p0)) {
                for (std::size_t i = 0; i < g.size(); ++i) {
                    const double v = (*x)[i];
                    (*a)[i] += v > 0.0 ? g[i] : (v < 0.0 ? -g[i] : 0.0);
                }
            }
            break;
        case Op::Square:
            if (auto* a = acc(p0)) {
                for (std::size_t i = 0; i < g.size(); ++i) (*a)[i] += 2.0 * (*x)[i] * g[i];
            }
            break;
        case Op::Sum:
            if (auto* a = acc(p0)) {
                for (std::size_t i = 0; i < a->size(); ++i) (*a)[i] += g[0];
            }
            break;
        case Op::Mean:
            if (auto* a = acc(p0)) {
                const double share = g[0] / static_cast<double>(a->size());
                for (std::size_t i = 0; i < a->size(); ++i) (*a)[i] += share;
            }
            break;
        case Op::UpsampleNearest2:
            if (auto* a = acc(p0)) {
                const std::size_t planes = x->extent(0) * x->extent(1);
                const std::size_t h = x->extent(2);
                const std::size_t w = x->extent(3);
                for (std::size_t p = 0; p < planes; ++p)
                    for (std::size_t yy = 0; yy < 2 * h; ++yy)
                        for (std::size_t xx = 0; xx < 2 * w; ++xx)
                            (*a)[(p * h + yy / 2) * w + xx / 2] += g[(p * 2 * h + yy) * 2 * w + xx];
            }
            break;
        case Op::Clamp:
            if (auto* a = acc(p0)) {
                for (std::size_t i = 0; i < g.size(); ++i) {
                    const double v = (*x)[i];
                    if (v >= n.a && v <= n.b) (*a)[i] += g[i];
                }
            }
            break;
        case Op::SpatialMean:
            if (auto* a = acc(p0)) {
                const std::size_t planes = x->extent(0) * x->extent(1);
                const std::size_t area = x->extent(2) * x->extent(3);
                for (std::size_t p = 0; p < planes; ++p) {
                    const double share = g[p] / static_cast<double>(area);
                    for (std::size_t i = 0; i < area; ++i) (*a)[p * area + i] += share;
                }
            }
            break;
        case Op::Scalarized:
            for (std::size_t k = 0; k < n.weights.size(); ++k) {
                if (auto* a = acc(n.parents[k])) (*a)[0] += n.weights[k] * g[0];
            }
            break;
        }
        // Free intermediate gradients as soon as they have been propagated.
        if (n.op != Op::Leaf) {
            grads[id] = Tensor();
        }
    }

    for (const auto& n : nodes_) {
        if (n.op == Op::Leaf && !n.param->grad.all_finite()) {
            nodes_.clear();
            throw NumericError("non-finite gradient for parameter " + n.param->name);
        }
    }
    nodes_.clear();
}

auto finite_diff_check(const ScalarFunction& f, const Tensor& x, double step) -> double
{
    if (!(step > 0.0)) {
        throw ValidationError("finite-difference step must be positive");
    }
    Parameter p("x", x);
    {
        Tape tape;
        Var root = f(tape, tape.parameter(p));
        tape.backward(root);
    }
    auto eval = [&](const Tensor& at) {
        Tape tape;
        const double v = f(tape, tape.constant(at)).item();
        if (!std::isfinite(v)) {
            throw NumericError("finite-difference evaluation is not finite");
        }
        return v;
    };
    double worst = 0.0;
    Tensor probe = x;
    for (std::size_t i = 0; i < x.size(); ++i) {
        probe[i] = x[i] + step;
        const double up = eval(probe);
        probe[i] = x[i] - step;
        const double down = eval(probe);
        probe[i] = x[i];
        const double fd = (up - down) / (2.0 * step);
        worst = std::max(worst, std::abs(p.grad[i] - fd) / std::max(1.0, std::abs(fd)));
    }
    return worst;
}

} // namespace hvgan
