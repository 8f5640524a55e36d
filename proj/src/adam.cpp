#include "hvgan/adam.hpp"

#include "hvgan/error.hpp"

#include <cmath>

namespace hvgan {

void adam_step(AdamState& state, std::span<Parameter* const> params)
{
    if (state.m.empty()) {
        for (const Parameter* p : params) {
            state.m.emplace_back(p->value.shape());
            state.v.emplace_back(p->value.shape());
        }
    }
    if (state.m.size() != params.size()) {
        throw ValidationError("optimizer state tracks " + std::to_string(state.m.size()) + " parameters, got "
                              + std::to_string(params.size()));
    }
    ++state.step;
    const double t = static_cast<double>(state.step);
    const double c1 = 1.0 - std::pow(state.beta1, t);
    const double c2 = 1.0 - std::pow(state.beta2, t);
    for (std::size_t i = 0; i < params.size(); ++i) {
        Parameter& p = *params[i];
        if (p.grad.shape() != p.value.shape() || state.m[i].shape() != p.value.shape()) {
            throw ValidationError("parameter " + p.name + " has no gradient matching its shape");
        }
        auto value = p.value.data();
        auto grad = p.grad.data();
        auto m = state.m[i].data();
        auto v = state.v[i].data();
        for (std::size_t j = 0; j < value.size(); ++j) {
            m[j] = state.beta1 * m[j] + (1.0 - state.beta1) * grad[j];
            v[j] = state.beta2 * v[j] + (1.0 - state.beta2) * grad[j] * grad[j];
            value[j] -= state.lr * (m[j] / c1) / (std::sqrt(v[j] / c2) + state.epsilon);
        }
    }
}

auto scheduled_lr(double base, std::span<const std::size_t> milestones, std::size_t iteration) -> double
{
    double lr = base;
    for (std::size_t m : milestones) {
        if (m <= iteration) {
            lr *= 0.5;
        }
    }
    return lr;
}

} // namespace hvgan
