#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "hvgan/error.hpp"
#include "hvgan/losses.hpp"
#include "test_support.hpp"

#include <cmath>

using namespace hvgan;
using hvgan::testing::random_tensor;
using hvgan::testing::rel_diff;

namespace {

auto log_sigmoid(double x) -> double
{
    return -std::log1p(std::exp(-x));
}

// Plain nested-loop forward of the extractor, reading only its weights.
auto reference_features(const FeatureExtractor& fx, const Tensor& x) -> std::vector<double>
{
    std::size_t c = x.shape()[1];
    const std::size_t h = x.shape()[2];
    const std::size_t w = x.shape()[3];
    std::vector<double> cur(x.data().begin(), x.data().end());
    for (std::size_t layer = 0; layer < 3; ++layer) {
        const Tensor& k = fx.weights()[layer];
        const std::size_t out_c = k.shape()[0];
        std::vector<double> next(out_c * h * w, 0.0);
        for (std::size_t o = 0; o < out_c; ++o) {
            for (std::size_t y = 0; y < h; ++y) {
                for (std::size_t xx = 0; xx < w; ++xx) {
                    double acc = 0.0;
                    for (std::size_t i = 0; i < c; ++i) {
                        for (int dy = -1; dy <= 1; ++dy) {
                            for (int dx = -1; dx <= 1; ++dx) {
                                const long yy = static_cast<long>(y) + dy;
                                const long xs = static_cast<long>(xx) + dx;
                                if (yy < 0 || xs < 0 || yy >= static_cast<long>(h) || xs >= static_cast<long>(w)) {
                                    continue;
                                }
                                acc += k.data()[((o * c + i) * 3 + (dy + 1)) * 3 + (dx + 1)]
                                     * cur[(i * h + yy) * w + xs];
                            }
                        }
                    }
                    const bool activate = layer < 2 || fx.tap() == FeatureTap::PostActivation;
                    next[(o * h + y) * w + xx] = (activate && acc < 0.0) ? 0.2 * acc : acc;
                }
            }
        }
        cur = std::move(next);
        c = out_c;
    }
    return cur;
}

} // namespace

TEST_CASE("discriminator loss")
{
    Tape tape;
    SUBCASE("zero logits give 2 log 2")
    {
        const auto l = disc_loss({tape.constant(Tensor({4}, 0.0)), tape.constant(Tensor({4}, 0.0))});
        CHECK(l.item() == doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-12));
        CHECK(l.item() == doctest::Approx(1.386294).epsilon(1e-6));
    }
    SUBCASE("a confident correct discriminator hits the probability clamp")
    {
        const auto l = disc_loss({tape.constant(Tensor({3}, 50.0)), tape.constant(Tensor({3}, -50.0))});
        CHECK(l.item() == doctest::Approx(-2.0 * std::log1p(-kProbClamp)).epsilon(1e-9));
        CHECK(std::isfinite(l.item()));
    }
    SUBCASE("matches the closed form for random logits")
    {
        std::mt19937_64 rng(3);
        const Tensor r = random_tensor({5}, rng, -3, 3);
        const Tensor f = random_tensor({5}, rng, -3, 3);
        double expect = 0.0;
        for (std::size_t i = 0; i < 5; ++i) {
            expect -= (log_sigmoid(r[i]) + log_sigmoid(-f[i])) / 5.0;
        }
        const auto l = disc_loss({tape.constant(r), tape.constant(f)});
        CHECK(rel_diff(l.item(), expect) < 1e-12);
    }
    SUBCASE("empty or mismatched batches")
    {
        CHECK_THROWS_AS((void)disc_loss({tape.constant(Tensor({0})), tape.constant(Tensor({0}))}), ValidationError);
        CHECK_THROWS_AS((void)disc_loss({tape.constant(Tensor({2})), tape.constant(Tensor({3}))}), ValidationError);
    }
}

TEST_CASE("generator adversarial losses")
{
    Tape tape;
    CHECK(adv_loss_standard_g(tape.constant(Tensor({2}, 0.0))).item() == doctest::Approx(std::log(2.0)));

    // real = 1, fake = 0: both terms equal -log sigma(-1).
    const auto rel = adv_loss_relativistic_g(tape.constant(Tensor({1}, 1.0)), tape.constant(Tensor({1}, 0.0)));
    CHECK(rel.item() == doctest::Approx(-2.0 * log_sigmoid(-1.0)).epsilon(1e-12));
    CHECK(rel.item() == doctest::Approx(2.626523).epsilon(1e-6));

    std::mt19937_64 rng(11);
    const Tensor r = random_tensor({4}, rng, -2, 2);
    const Tensor f = random_tensor({4}, rng, -2, 2);
    double mr = 0.0, mf = 0.0;
    for (std::size_t i = 0; i < 4; ++i) {
        mr += r[i] / 4.0;
        mf += f[i] / 4.0;
    }
    double expect = 0.0;
    for (std::size_t i = 0; i < 4; ++i) {
        expect -= (log_sigmoid(-(r[i] - mf)) + log_sigmoid(f[i] - mr)) / 4.0;
    }
    CHECK(rel_diff(adv_loss_relativistic_g(tape.constant(r), tape.constant(f)).item(), expect) < 1e-12);

    CHECK_THROWS_AS((void)adv_loss_relativistic_g(tape.constant(Tensor({2})), tape.constant(Tensor({3}))),
                    ValidationError);
    CHECK_THROWS_AS((void)adv_loss_standard_g(tape.constant(Tensor({0}))), ValidationError);
}

TEST_CASE("adversarial gradient pushes fake logits up")
{
    Parameter fake{"fake", Tensor({3}, 0.0)};
    Tape tape;
    tape.backward(adv_loss_standard_g(tape.parameter(fake)));
    for (double g : fake.grad.data()) {
        CHECK(g == doctest::Approx(-0.5 / 3.0));
    }
}

TEST_CASE("pixel loss")
{
    Tape tape;
    const auto a = tape.constant(Tensor({1, 1, 4, 4}, 0.5));
    const auto b = tape.constant(Tensor({1, 1, 4, 4}, 0.0));
    CHECK(pixel_loss(a, b, 1).item() == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(pixel_loss(a, b, 2).item() == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(pixel_loss(a, a, 1).item() == 0.0);
    CHECK_THROWS_AS((void)pixel_loss(a, tape.constant(Tensor({1, 1, 4, 5})), 1), ValidationError);
    CHECK_THROWS_AS((void)pixel_loss(a, b, 3), ValidationError);
}

TEST_CASE("feature extractor is deterministic and seeded")
{
    const FeatureExtractor a(1, 42), b(1, 42), c(1, 43);
    REQUIRE(a.weights().size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(a.weights()[i] == b.weights()[i]);
    }
    CHECK_FALSE(a.weights()[0] == c.weights()[0]);
    CHECK(a.weights()[0].shape() == Shape{8, 1, 3, 3});
    CHECK(a.weights()[2].shape() == Shape{16, 16, 3, 3});
}

TEST_CASE("feature loss matches a nested-loop reference")
{
    for (FeatureTap tap : {FeatureTap::PreActivation, FeatureTap::PostActivation}) {
        for (int p : {1, 2}) {
            CAPTURE(p);
            const FeatureExtractor fx(1, 42, tap);
            const Tensor real({1, 1, 8, 8}, 0.0);
            const Tensor fake({1, 1, 8, 8}, 0.1);
            const auto fr = reference_features(fx, real);
            const auto ff = reference_features(fx, fake);
            double expect = 0.0;
            for (std::size_t i = 0; i < fr.size(); ++i) {
                const double d = std::abs(ff[i] - fr[i]);
                expect += (p == 1 ? d : d * d) / static_cast<double>(fr.size());
            }
            Tape tape;
            const double got = feature_loss(tape.constant(fake), tape.constant(real), fx, p).item();
            CHECK(expect > 0.0);
            CHECK(rel_diff(got, expect) < 1e-12);
        }
    }

    std::mt19937_64 rng(5);
    const FeatureExtractor fx3(3, 9);
    const Tensor x = random_tensor({2, 3, 6, 7}, rng, 0, 1);
    const Tensor y = random_tensor({2, 3, 6, 7}, rng, 0, 1);
    Tape tape;
    const auto got = fx3.features(tape, tape.constant(x));
    std::vector<double> expect;
    for (std::size_t n = 0; n < 2; ++n) {
        Tensor one({1, 3, 6, 7}, std::vector<double>(x.data().begin() + n * 126, x.data().begin() + (n + 1) * 126));
        const auto part = reference_features(fx3, one);
        expect.insert(expect.end(), part.begin(), part.end());
    }
    REQUIRE(got.value().size() == expect.size());
    double worst = 0.0;
    for (std::size_t i = 0; i < expect.size(); ++i) {
        worst = std::max(worst, std::abs(got.value()[i] - expect[i]));
    }
    CHECK(worst < 1e-12);
    CHECK(feature_loss(tape.constant(x), tape.constant(x), fx3, 1).item() == 0.0);
    CHECK_THROWS_AS((void)feature_loss(tape.constant(x), tape.constant(Tensor({2, 3, 6, 6})), fx3, 1), ValidationError);
    CHECK_THROWS_AS((void)FeatureExtractor(1, 1).features(tape, tape.constant(x)), ValidationError);
}

TEST_CASE("feature loss gradient flows to the fake image only")
{
    const FeatureExtractor fx(1, 42);
    std::mt19937_64 rng(8);
    const Tensor real = random_tensor({1, 1, 6, 6}, rng, 0, 1);
    const Tensor start = random_tensor({1, 1, 6, 6}, rng, 0, 1);
    const double err = finite_diff_check(
        [&](Tape& t, Var x) { return feature_loss(x, t.constant(real), fx, 2); }, start);
    CHECK(err < 1e-6);
    const double err_pix = finite_diff_check(
        [&](Tape& t, Var x) { return pixel_loss(x, t.constant(real), 2); }, start);
    CHECK(err_pix < 1e-6);
}
