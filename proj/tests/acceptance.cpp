// Acceptance gate: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include "cli.hpp"
#include "hvgan/error.hpp"
#include "hvgan/metrics.hpp"
#include "hvgan/scalarize.hpp"
#include "hvgan/train.hpp"
#include "test_support.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>

using namespace hvgan;
using hvgan::testing::rel_diff;
namespace fs = std::filesystem;

namespace {

const fs::path kSource = HVGAN_SOURCE_DIR;

using Clock = std::chrono::steady_clock;

auto seconds_since(Clock::time_point t0) -> double
{
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
    bool pass = false;
    std::string detail;
};

auto format(const char* pattern, auto... args) -> std::string
{
    char buf[512];
    std::snprintf(buf, sizeof buf, pattern, args...);
    return buf;
}

// Shared between criteria 6 and 7 so the pretraining runs once.
struct PretrainedState {
    TrainConfig config;
    std::vector<ImageBuffer> data;
    std::optional<Networks> nets;
    double seconds = 0.0;
};

auto default_config() -> TrainConfig
{
    TrainConfig c;
    c.dataset = (kSource / "data" / "train").string();
    return c;
}

auto criterion1() -> Outcome
{
    const auto t0 = Clock::now();
    std::mt19937_64 rng(101);
    std::uniform_int_distribution<std::size_t> dim(2, 3), count(2, 8);
    int within = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = dim(rng);
        const auto pts = testing::random_points(rng, count(rng), n);
        const PointSet set = testing::to_set(pts);
        const ReferencePoint ref{std::vector<double>(n, 1.0)};
        const double exact = hypervolume_exact(set, ref);
        const auto mc = hypervolume_mc(set, ref, 1'000'000, 1000 + trial);
        within += std::abs(exact - mc.estimate) <= 4.0 * mc.standard_error ? 1 : 0;
    }
    const double secs = seconds_since(t0);
    return {within >= 95 && secs < 60.0, format("%d/100 within 4 stderr, %.1f s", within, secs)};
}

auto random_unclamped(std::mt19937_64& rng, std::size_t n) -> std::pair<std::vector<double>, std::vector<double>>
{
    std::uniform_real_distribution<double> mu_dist(0.05, 200.0), frac(0.0, 0.9);
    std::vector<double> l(n), mu(n);
    for (std::size_t k = 0; k < n; ++k) {
        mu[k] = mu_dist(rng);
        l[k] = frac(rng) * mu[k];
    }
    return {l, mu};
}

auto criterion2() -> Outcome
{
    std::mt19937_64 rng(202);
    std::uniform_int_distribution<std::size_t> dim(1, 6);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const auto [l, mu] = random_unclamped(rng, dim(rng));
        PointSet single;
        single.push_back(ObjectiveVector(l, Orientation::Minimize));
        const double hv = hypervolume_exact(single, ReferencePoint{mu});
        worst = std::max(worst, rel_diff(std::exp(-hv_log_loss(l, UpperBounds(mu))), hv));
    }
    return {worst <= 1e-12, format("max relative error %.3g over 1000 pairs", worst)};
}

// -sum log(max(mu - l, eps)) and -sum log(max(1 - l/mu, eps)) from tape primitives.
auto autodiff_grad(const std::vector<double>& l, const std::vector<double>& mu, bool normalized)
    -> std::vector<double>
{
    const std::size_t n = l.size();
    Parameter p{"l", Tensor({n}, l)};
    Tape tape;
    const Var x = tape.parameter(p);
    Var margin;
    if (normalized) {
        std::vector<double> inv(n);
        for (std::size_t k = 0; k < n; ++k) {
            inv[k] = 1.0 / mu[k];
        }
        margin = 1.0 - x * tape.constant(Tensor({n}, inv));
    } else {
        margin = tape.constant(Tensor({n}, mu)) - x;
    }
    const Var loss = -sum(log(clamp(margin, kDefaultClampEps, std::numeric_limits<double>::max())));
    tape.backward(loss);
    return {p.grad.data().begin(), p.grad.data().end()};
}

auto criterion3() -> Outcome
{
    std::mt19937_64 rng(303);
    std::uniform_int_distribution<std::size_t> dim(1, 6);
    double worst_grad = 0.0, worst_offset = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const auto [l, mu] = random_unclamped(rng, dim(rng));
        const UpperBounds bounds(mu);
        const auto w = gradient_weights(l, bounds);
        for (bool normalized : {false, true}) {
            const auto g = autodiff_grad(l, mu, normalized);
            for (std::size_t k = 0; k < l.size(); ++k) {
                worst_grad = std::max(worst_grad, std::abs(w[k] - g[k]));
            }
        }
        double sum_log_mu = 0.0;
        for (double m : mu) {
            sum_log_mu += std::log(m);
        }
        const double diff = hv_log_loss_normalized(l, bounds) - hv_log_loss(l, bounds);
        worst_offset = std::max(worst_offset, rel_diff(diff, sum_log_mu));
    }
    return {worst_grad <= 1e-10 && worst_offset <= 1e-12,
            format("max |w - autodiff| %.3g, max offset relative error %.3g", worst_grad, worst_offset)};
}

auto criterion4() -> Outcome
{
    double worst = 0.0;
    std::string worst_name;
    const auto results = gradcheck_suite(10, 7);
    for (const auto& r : results) {
        if (r.max_rel_error >= worst) {
            worst = r.max_rel_error;
            worst_name = r.primitive;
        }
    }
    std::mt19937_64 rng(404);
    double conv_err = 0.0;
    for (std::size_t pad : {0u, 1u, 2u}) {
        const Tensor x = testing::random_tensor({2, 3, 9, 7}, rng);
        const Tensor w = testing::random_tensor({4, 3, 3, 3}, rng);
        const Tensor b = testing::random_tensor({4}, rng);
        Tape tape;
        const Tensor out = conv2d(tape.constant(x), tape.constant(w), tape.constant(b), pad).value();
        const Tensor ref = testing::naive_conv(x, w, b, pad);
        for (std::size_t i = 0; i < out.size(); ++i) {
            conv_err = std::max(conv_err, std::abs(out[i] - ref[i]));
        }
    }
    return {worst < 1e-5 && conv_err <= 1e-12,
            format("%zu primitives, worst %s %.3g; conv2d vs naive %.3g", results.size(), worst_name.c_str(), worst,
                   conv_err)};
}

auto criterion5() -> Outcome
{
    TrainConfig c = default_config();
    c.pretrain_iters = 200;
    const auto data = load_dataset(c.dataset);
    const std::string ckpt = checkpoint_bytes(pretrain(c, data));
    auto fresh = [&] {
        auto [g, d] = init_networks(c.seed, c.arch);
        Networks nets{std::move(g), std::move(d)};
        restore(nets, parse_checkpoint(ckpt));
        return nets;
    };
    const FeatureExtractor features(1, stream_seed(c.seed, 3));
    const Batch batch = PatchSampler(data, c.patch_size, 55).next(c.batch_size);
    auto objective = [&](ScalarizationMode mode) {
        return GeneratorObjective{std::move(mode), UpperBounds(c.mu), c.eps, c.adv_variant, c.norm_p, &features};
    };
    auto update = [&](const ScalarizationMode& mode, GeneratorStep* step) {
        Networks nets = fresh();
        const GeneratorStep s = generator_gradients(nets.g, nets.d, batch, objective(mode));
        if (step != nullptr) {
            *step = s;
        }
        std::vector<double> u;
        for (const Parameter* p : nets.g.parameters()) {
            for (double gv : p->grad.data()) {
                u.push_back(-c.lr * gv);
            }
        }
        return u;
    };
    GeneratorStep hv;
    const auto total = update(HypervolLog{}, &hv);
    std::vector<double> combined(total.size(), 0.0);
    for (std::size_t k = 0; k < 3; ++k) {
        std::vector<double> e(3, 0.0);
        e[k] = 1.0;
        const auto single = update(LinearFixed{e}, nullptr);
        for (std::size_t i = 0; i < single.size(); ++i) {
            combined[i] += hv.weights[k] * single[i];
        }
    }
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < total.size(); ++i) {
        num += (total[i] - combined[i]) * (total[i] - combined[i]);
        den += total[i] * total[i];
    }
    const double rel = std::sqrt(num / den);
    return {den > 0.0 && rel <= 1e-8 && hv.clamped == 0,
            format("relative error %.3g over %zu generator parameters (w = %.4g, %.4g, %.4g)", rel, total.size(),
                   hv.weights[0], hv.weights[1], hv.weights[2])};
}

auto criterion6(PretrainedState& state) -> Outcome
{
    state.config = default_config();
    state.data = load_dataset(state.config.dataset);
    const auto t0 = Clock::now();
    state.nets = pretrain(state.config, state.data);
    state.seconds = seconds_since(t0);
    double gen = 0.0, nn = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < state.data.size(); ++i) {
        for (const PatchPair& p : extract_patches(state.data[i], state.config.patch_size, 8, 600 + i, i)) {
            gen += psnr(p.hr, super_resolve(state.nets->g, p.lr));
            nn += psnr(p.hr, nearest_upscale(p.lr));
            ++n;
        }
    }
    gen /= static_cast<double>(n);
    nn /= static_cast<double>(n);
    return {gen - nn >= 0.5 && state.seconds < 900.0,
            format("generator %.3f dB vs nearest %.3f dB (gain %.3f dB) on %zu patches, %zu iterations in %.1f s", gen,
                   nn, gen - nn, n, state.config.pretrain_iters, state.seconds)};
}

auto all_finite(const TrainHistory& history) -> bool
{
    for (const HistoryRecord& r : history) {
        for (double v : {r.step.losses[0], r.step.losses[1], r.step.losses[2], r.step.scalar, r.step.weights[0],
                         r.step.weights[1], r.step.weights[2], r.lr}) {
            if (!std::isfinite(v)) {
                return false;
            }
        }
    }
    return true;
}

auto write_config(const fs::path& dir, const std::string& body) -> fs::path
{
    fs::create_directories(dir);
    const fs::path p = dir / "config.json";
    std::ofstream(p) << body;
    return p;
}

auto criterion7(PretrainedState& state) -> Outcome
{
    // Default bounds, continuing from the criterion-6 pretrained networks.
    bool finite = false;
    std::size_t default_clamps = 0;
    std::string failure;
    const auto t0 = Clock::now();
    try {
        Networks nets = *state.nets;
        const TrainHistory h = adversarial(state.config, state.data, nets);
        finite = h.size() == state.config.adv_iters && all_finite(h);
        for (const auto& r : h) {
            default_clamps += r.step.clamped != 0 ? 1 : 0;
        }
        for (const Parameter* p : nets.g.parameters()) {
            finite = finite && p->value.all_finite();
        }
    } catch (const std::exception& e) {
        failure = e.what();
    }
    const double default_secs = seconds_since(t0);

    // Loose bounds (10x defaults) through the compare command.
    const fs::path dir = fs::temp_directory_path() / "hvgan_acceptance_c7";
    fs::remove_all(dir);
    const auto config = write_config(dir, R"({
  "seed": 1, "mu": [200, 1, 100], "pretrain_iters": 2000, "adv_iters": 1000,
  "baseline_weights": [0.005, 0.01, 1.0],
  "dataset": ")" + (kSource / "data" / "train").string()
                                              + R"(", "eval_list": [")" + (kSource / "data" / "heldout").string()
                                              + R"("], "output_dir": "out"
})");
    std::ostringstream log;
    const auto t1 = Clock::now();
    const auto cmp = cli::run_compare(config, log);
    const double cmp_secs = seconds_since(t1);
    const auto& a = cmp.rows.at(1);
    const auto& b = cmp.rows.at(2);
    const double agree = std::max({std::abs(a.metrics.psnr - b.metrics.psnr), std::abs(a.metrics.ssim - b.metrics.ssim),
                                   std::abs(a.metrics.gmsd - b.metrics.gmsd)});
    const bool shared = a.start_hash == cmp.pretrained_hash && b.start_hash == cmp.pretrained_hash
                     && cmp.rows.at(0).start_hash == cmp.pretrained_hash;
    const bool pass = finite && failure.empty() && a.clamp_events == 0 && b.clamp_events == 0 && agree <= 1e-6
                   && shared && all_finite(a.history) && all_finite(b.history);
    return {pass, format("default mu: %s, %zu iterations, %zu clamp rows, %.0f s; loose mu: clamp events %zu/%zu, "
                         "max metric difference %.3g, shared start %s, psnr %.4f/%.4f/%.4f dB, %.0f s%s%s",
                         finite ? "all finite" : "NON-FINITE", state.config.adv_iters, default_clamps, default_secs,
                         a.clamp_events, b.clamp_events, agree, shared ? "yes" : "NO", cmp.rows[0].metrics.psnr,
                         a.metrics.psnr, b.metrics.psnr, cmp_secs, failure.empty() ? "" : "; error: ",
                         failure.c_str())};
}

auto criterion8() -> Outcome
{
    std::vector<std::string> failed;
    auto check = [&](bool ok, const char* what) {
        if (!ok) {
            failed.emplace_back(what);
        }
    };
    std::mt19937_64 rng(808);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    auto random_image = [&](std::size_t c, std::size_t h, std::size_t w) {
        std::vector<double> v(c * h * w);
        for (double& x : v) {
            x = u(rng);
        }
        return ImageBuffer(c, h, w, v);
    };
    for (int trial = 0; trial < 10; ++trial) {
        const std::size_t c = trial % 2 == 0 ? 1 : 3;
        const ImageBuffer a = random_image(c, 24, 32);
        const ImageBuffer b = random_image(c, 24, 32);
        check(std::isinf(psnr(a, a)) && psnr(a, a) > 0, "psnr identity");
        check(ssim(a, a) == 1.0, "ssim identity");
        check(gmsd(a, a) == 0.0, "gmsd identity");
        check(psnr(a, b) == psnr(b, a), "psnr symmetry");
        check(ssim(a, b) == ssim(b, a), "ssim symmetry");
        check(gmsd(a, b) == gmsd(b, a), "gmsd symmetry");
        const ImageBuffer fa = flip_horizontal(a), fb = flip_horizontal(b);
        check(std::abs(psnr(fa, fb) - psnr(a, b)) <= 1e-12, "psnr flip");
        check(std::abs(ssim(fa, fb) - ssim(a, b)) <= 1e-12, "ssim flip");
        check(std::abs(gmsd(fa, fb) - gmsd(a, b)) <= 1e-12, "gmsd flip");
        check(ssim(a, b) >= -1.0 && ssim(a, b) <= 1.0 && gmsd(a, b) >= 0.0, "ranges");
    }
    const ImageBuffer zeros = ImageBuffer::filled(1, 16, 16, 0.0);
    const double p255 = psnr(zeros, ImageBuffer::filled(1, 16, 16, 1.0), 255.0);
    const double p_half = psnr(zeros, ImageBuffer::filled(1, 16, 16, 0.5));
    check(std::abs(p255 - 48.1308) <= 1e-3, "48.1308 dB case");
    check(std::abs(p_half - 6.0206) <= 1e-3, "6.0206 dB case");
    check(gmsd(zeros, ImageBuffer::filled(1, 16, 16, 0.7)) == 0.0, "gmsd constant pair");
    const ImageBuffer r = random_image(1, 32, 32);
    std::vector<double> inv(r.values().begin(), r.values().end());
    for (double& v : inv) {
        v = 1.0 - v;
    }
    check(ssim(r, ImageBuffer(1, 32, 32, inv)) < 0.0, "ssim inverted image");
    std::string detail = format("psnr cases %.4f dB and %.4f dB", p255, p_half);
    for (const auto& f : failed) {
        detail += "; failed " + f;
    }
    return {failed.empty(), detail};
}

auto criterion9() -> Outcome
{
    const fs::path dir = fs::temp_directory_path() / "hvgan_acceptance_c9";
    fs::remove_all(dir);
    const std::string body = R"({
  "seed": 9, "pretrain_iters": 30, "adv_iters": 20, "milestones": [10], "batch_size": 2,
  "baseline_weights": [0.005, 0.01, 1.0],
  "dataset": ")" + (kSource / "data" / "train").string()
                           + R"(", "eval_list": [")" + (kSource / "data" / "heldout").string()
                           + R"("], "output_dir": "out"
})";
    const auto config = write_config(dir, body);
    std::ostringstream log;
    auto snapshot = [&] {
        std::vector<std::string> files;
        (void)cli::run_train(config, log);
        for (const char* f : {"history.csv", "pretrain.csv", "checkpoint.bin"}) {
            files.push_back(read_file(dir / "out" / f));
        }
        (void)cli::run_compare(config, log);
        for (const char* f : {"results.csv", "baseline/history.csv", "hypervol_log/history.csv",
                              "hypervol_log_norm/history.csv", "pretrained.bin"}) {
            files.push_back(read_file(dir / "out" / f));
        }
        std::ostringstream hv, eval;
        const fs::path pts = kSource / "tests" / "data" / "three_points.csv";
        cli::run_hv({pts, {3, 3}, Orientation::Minimize, 10000, 4}, hv);
        cli::run_pareto(pts, Orientation::Minimize, hv);
        cli::run_eval(kSource / "data" / "heldout" / "img000.pgm", kSource / "data" / "heldout" / "img001.pgm", eval);
        files.push_back(hv.str());
        files.push_back(eval.str());
        return files;
    };
    const auto first = snapshot();
    const auto second = snapshot();
    std::size_t same = 0;
    for (std::size_t i = 0; i < first.size(); ++i) {
        same += first[i] == second[i] && !first[i].empty() ? 1 : 0;
    }
    return {same == first.size(), format("%zu/%zu outputs byte-identical across repeated runs", same, first.size())};
}

} // namespace

int main()
{
    PretrainedState state;
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
        {"hypervolume exact vs Monte-Carlo", criterion1},
        {"log-loss hypervolume identity", criterion2},
        {"gradient weight law", criterion3},
        {"autodiff soundness", criterion4},
        {"weighted-sum generator update", criterion5},
        {"pretraining efficacy", [&] { return criterion6(state); }},
        {"adversarial-phase stability", [&] { return state.nets ? criterion7(state) : Outcome{false, "no pretrained networks"}; }},
        {"metric identities", criterion8},
        {"determinism", criterion9},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failures += o.pass ? 0 : 1;
        std::printf("criterion %zu [PRIMARY] %s: %s -- %s\n", i + 1, o.pass ? "PASS" : "FAIL", criteria[i].first,
                    o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria failed\n", failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
