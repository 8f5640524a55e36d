#include "hvgan/networks.hpp"

#include "hvgan/error.hpp"

#include <cmath>

namespace hvgan {

namespace {

    constexpr double kSlope = 0.2;

    auto weight(std::string name, Shape shape, std::size_t fan_in, std::mt19937_64& rng) -> Parameter
    {
        std::normal_distribution<double> normal(0.0, 1.0);
        Tensor t(std::move(shape));
        const double scale = 1.0 / std::sqrt(static_cast<double>(fan_in));
        for (double& v : t.data()) {
            v = normal(rng) * scale;
        }
        return Parameter{std::move(name), std::move(t)};
    }

    auto bias(std::string name, std::size_t n) -> Parameter
    {
        return Parameter{std::move(name), Tensor(Shape{n})};
    }

    void add_conv(std::vector<Parameter>& out, const std::string& prefix, std::size_t in, std::size_t outc,
                  std::mt19937_64& rng)
    {
        out.push_back(weight(prefix + ".weight", {outc, in, 3, 3}, in * 9, rng));
        out.push_back(bias(prefix + ".bias", outc));
    }

    auto bind(Tape& tape, Parameter& p, Track track) -> Var
    {
        return track == Track::Gradients ? tape.parameter(p) : tape.constant(p.value);
    }

    auto conv(Tape& tape, Var x, std::vector<Parameter>& ps, std::size_t layer, Track track) -> Var
    {
        return conv2d(x, bind(tape, ps[2 * layer], track), bind(tape, ps[2 * layer + 1], track), 1);
    }

    template <class Params>
    auto pointers(Params& ps)
    {
        std::vector<decltype(&ps.front())> out;
        for (auto& p : ps) {
            out.push_back(&p);
        }
        return out;
    }

    auto same_values(const std::vector<Parameter>& a, const std::vector<Parameter>& b) -> bool
    {
        if (a.size() != b.size()) {
            return false;
        }
        for (std::size_t i = 0; i < a.size(); ++i) {
            if (a[i].name != b[i].name || !(a[i].value == b[i].value)) {
                return false;
            }
        }
        return true;
    }

    void check_input(Var x, std::size_t channels, const char* who)
    {
        const Shape& s = x.shape();
        if (s.size() != 4 || s[1] != channels || s[0] == 0) {
            throw ValidationError(std::string(who) + ": expected (N," + std::to_string(channels) + ",H,W) input, got "
                                  + to_string(s));
        }
    }

} // namespace

void validate(const ArchConfig& arch)
{
    if (arch.channels != 1 && arch.channels != 3) {
        throw ValidationError("channels must be 1 or 3");
    }
    if (arch.gen_width == 0 || arch.disc_width1 == 0 || arch.disc_width2 == 0) {
        throw ValidationError("network widths must be positive");
    }
}

GeneratorNet::GeneratorNet(const ArchConfig& arch, std::mt19937_64& rng) : arch_(arch)
{
    validate(arch);
    const std::size_t c = arch.channels;
    const std::size_t w = arch.gen_width;
    add_conv(params_, "g.conv1", c, w, rng);
    add_conv(params_, "g.conv2", w, w, rng);
    add_conv(params_, "g.conv3", w, w, rng);
    add_conv(params_, "g.conv4", w, c, rng);
}

auto GeneratorNet::forward(Tape& tape, Var lr, Track track) -> Var
{
    check_input(lr, arch_.channels, "generator");
    Var h = leaky_relu(conv(tape, lr, params_, 0, track), kSlope);
    h = leaky_relu(conv(tape, h, params_, 1, track), kSlope);
    h = upsample_nearest2(h);
    h = leaky_relu(conv(tape, h, params_, 2, track), kSlope);
    h = upsample_nearest2(h);
    return sigmoid(conv(tape, h, params_, 3, track));
}

auto GeneratorNet::parameters() -> std::vector<Parameter*>
{
    return pointers(params_);
}

auto GeneratorNet::parameters() const -> std::vector<const Parameter*>
{
    return pointers(params_);
}

auto operator==(const GeneratorNet& a, const GeneratorNet& b) -> bool
{
    return same_values(a.params_, b.params_);
}

DiscriminatorNet::DiscriminatorNet(const ArchConfig& arch, std::mt19937_64& rng) : arch_(arch)
{
    validate(arch);
    add_conv(params_, "d.conv1", arch.channels, arch.disc_width1, rng);
    add_conv(params_, "d.conv2", arch.disc_width1, arch.disc_width2, rng);
    params_.push_back(weight("d.dense.weight", {arch.disc_width2, 1}, arch.disc_width2, rng));
    params_.push_back(bias("d.dense.bias", 1));
}

auto DiscriminatorNet::forward(Tape& tape, Var images, Track track) -> Var
{
    check_input(images, arch_.channels, "discriminator");
    Var h = leaky_relu(conv(tape, images, params_, 0, track), kSlope);
    h = leaky_relu(conv(tape, h, params_, 1, track), kSlope);
    h = spatial_mean(h);
    h = matmul(h, bind(tape, params_[4], track)) + bind(tape, params_[5], track);
    return reshape(h, {images.shape()[0]});
}

auto DiscriminatorNet::parameters() -> std::vector<Parameter*>
{
    return pointers(params_);
}

auto DiscriminatorNet::parameters() const -> std::vector<const Parameter*>
{
    return pointers(params_);
}

auto operator==(const DiscriminatorNet& a, const DiscriminatorNet& b) -> bool
{
    return same_values(a.params_, b.params_);
}

auto init_networks(std::uint64_t seed, const ArchConfig& arch) -> std::pair<GeneratorNet, DiscriminatorNet>
{
    std::mt19937_64 rng(seed);
    GeneratorNet g(arch, rng);
    DiscriminatorNet d(arch, rng);
    return {std::move(g), std::move(d)};
}

} // namespace hvgan
