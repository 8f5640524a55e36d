#include "hvgan/autodiff.hpp"

#include <algorithm>
#include <random>

namespace hvgan {

namespace {

    // Values in [0.2, 1] with a random sign: far from the kinks of abs,
    // leaky_relu and the clamp bounds used below.
    auto random_tensor(Shape shape, std::mt19937_64& rng, bool positive = false) -> Tensor
    {
        std::uniform_real_distribution<double> mag(0.2, 1.0);
        std::bernoulli_distribution sign(0.5);
        Tensor t(std::move(shape));
        for (double& v : t.data()) {
            v = mag(rng);
            if (!positive && sign(rng)) {
                v = -v;
            }
        }
        return t;
    }

    // Contracts an op output with a fixed random tensor so every output
    // element contributes a distinct weight to the scalar being checked.
    auto project(Tape& tape, Var out, const Tensor& weights) -> Var
    {
        return sum(out * tape.constant(weights.reshaped(out.shape())));
    }

    struct Case {
        const char* name;
        std::vector<Shape> operand_shapes;
        bool positive = false;
        std::function<Var(Tape&, std::span<const Var>)> op;
    };

    auto cases() -> std::vector<Case>
    {
        using Vars = std::span<const Var>;
        return {
            {"add", {{2, 3}, {2, 3}}, false, [](Tape&, Vars v) { return v[0] + v[1]; }},
            {"sub", {{2, 3}, {2, 3}}, false, [](Tape&, Vars v) { return v[0] - v[1]; }},
            {"mul", {{2, 3}, {2, 3}}, false, [](Tape&, Vars v) { return v[0] * v[1]; }},
            {"scalar_mul", {{2, 3}}, false, [](Tape&, Vars v) { return scale(v[0], -1.7); }},
            {"add_scalar", {{2, 3}}, false, [](Tape&, Vars v) { return add_scalar(v[0], 0.3); }},
            {"matmul", {{2, 3}, {3, 4}}, false, [](Tape&, Vars v) { return matmul(v[0], v[1]); }},
            {"conv2d", {{1, 2, 5, 5}, {3, 2, 3, 3}, {3}}, false,
             [](Tape&, Vars v) { return conv2d(v[0], v[1], v[2], 1); }},
            {"leaky_relu", {{2, 3}}, false, [](Tape&, Vars v) { return leaky_relu(v[0], 0.2); }},
            {"sigmoid", {{2, 3}}, false, [](Tape&, Vars v) { return sigmoid(v[0]); }},
            {"log", {{2, 3}}, true, [](Tape&, Vars v) { return log(v[0]); }},
            {"exp", {{2, 3}}, false, [](Tape&, Vars v) { return exp(v[0]); }},
            {"abs", {{2, 3}}, false, [](Tape&, Vars v) { return abs(v[0]); }},
            {"square", {{2, 3}}, false, [](Tape&, Vars v) { return square(v[0]); }},
            {"sum", {{2, 3}}, false, [](Tape&, Vars v) { return sum(v[0]); }},
            {"mean", {{2, 3}}, false, [](Tape&, Vars v) { return mean(v[0]); }},
            {"upsample_nearest", {{1, 2, 3, 3}}, false, [](Tape&, Vars v) { return upsample_nearest2(v[0]); }},
            {"clamp", {{2, 3}}, false, [](Tape&, Vars v) { return clamp(v[0], -0.1, 0.1); }},
            {"reshape", {{2, 3}}, false, [](Tape&, Vars v) { return reshape(v[0], {3, 2}); }},
            {"spatial_mean", {{2, 2, 3, 3}}, false, [](Tape&, Vars v) { return spatial_mean(v[0]); }},
            {"scalarized", {{}, {}, {}}, false,
             [](Tape&, Vars v) {
                 const double value = 0.5 * v[0].item() + 2.0 * v[1].item() - 1.5 * v[2].item();
                 return scalarized(v, value, {0.5, 2.0, -1.5});
             }},
        };
    }

} // namespace

auto gradcheck_suite(std::size_t points, std::uint64_t seed) -> std::vector<GradcheckResult>
{
    std::vector<GradcheckResult> results;
    std::mt19937_64 rng(seed);
    for (const auto& c : cases()) {
        GradcheckResult r{c.name, 0.0};
        for (std::size_t trial = 0; trial < points; ++trial) {
            std::vector<Tensor> operands;
            for (const auto& s : c.operand_shapes) {
                operands.push_back(random_tensor(s, rng, c.positive));
            }
            Tensor out_weights;
            {
                Tape probe;
                std::vector<Var> vars;
                for (const auto& t : operands) {
                    vars.push_back(probe.constant(t));
                }
                out_weights = random_tensor(c.op(probe, vars).shape(), rng);
            }
            // Each differentiable operand in turn, the others held constant.
            for (std::size_t k = 0; k < operands.size(); ++k) {
                auto f = [&](Tape& tape, Var x) {
                    std::vector<Var> vars;
                    for (std::size_t j = 0; j < operands.size(); ++j) {
                        vars.push_back(j == k ? x : tape.constant(operands[j]));
                    }
                    return project(tape, c.op(tape, vars), out_weights);
                };
                r.max_rel_error = std::max(r.max_rel_error, finite_diff_check(f, operands[k]));
            }
        }
        results.push_back(r);
    }
    return results;
}

} // namespace hvgan
