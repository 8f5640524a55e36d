#include "cli.hpp"

#include "hvgan/error.hpp"
#include "hvgan/points_csv.hpp"
#include "hvgan/version.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <ostream>
#include <set>

namespace hvgan::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

    auto fmt(const char* pattern, double v) -> std::string
    {
        if (std::isinf(v)) {
            return v > 0 ? "inf" : "-inf";
        }
        char buf[64];
        std::snprintf(buf, sizeof buf, pattern, v);
        return buf;
    }

    auto hex64(std::uint64_t v) -> std::string
    {
        char buf[24];
        std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
        return buf;
    }

    auto utc_now() -> std::string
    {
        const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
        std::tm tm{};
        gmtime_r(&t, &tm);
        char buf[32];
        std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
        return buf;
    }

    auto resolve(const fs::path& base, const std::string& p) -> fs::path
    {
        const fs::path path(p);
        return path.is_absolute() ? path : base / path;
    }

    // Typed field access that reports the offending key.
    class Fields {
    public:
        explicit Fields(const json& obj) : obj_(obj) {}

        template <class T>
        auto get(const std::string& key) const -> T
        {
            try {
                return obj_.at(key).get<T>();
            } catch (const json::exception&) {
                throw ValidationError("config key \"" + key + "\": " + describe<T>());
            }
        }

        auto count(const std::string& key) const -> std::size_t
        {
            const json& v = obj_.at(key);
            if (!v.is_number_integer() || v.get<long long>() < 0) {
                throw ValidationError("config key \"" + key + "\": expected a non-negative integer");
            }
            return v.get<std::size_t>();
        }

        auto has(const std::string& key) const -> bool { return obj_.contains(key); }

    private:
        template <class T>
        static auto describe() -> std::string
        {
            if constexpr (std::is_same_v<T, std::string>) {
                return "expected a string";
            } else if constexpr (std::is_same_v<T, double>) {
                return "expected a number";
            } else {
                return "expected an array of numbers";
            }
        }

        const json& obj_;
    };

    const std::set<std::string> kKeys = {
        "seed",      "mode",        "mu",          "eps",     "adv_variant", "norm_p",     "pretrain_iters",
        "adv_iters", "batch_size",  "patch_size",  "lr",      "pretrain_lr", "milestones", "dataset",
        "output_dir", "gen_width",  "feature_tap", "baseline_weights",       "eval_list",
    };

    auto mode_name(const ScalarizationMode& mode) -> std::string
    {
        if (std::holds_alternative<HypervolLog>(mode)) {
            return "hypervol_log";
        }
        if (std::holds_alternative<HypervolLogNormalized>(mode)) {
            return "hypervol_log_norm";
        }
        return "baseline";
    }

    auto load_images(const std::vector<fs::path>& paths) -> std::vector<ImageBuffer>
    {
        std::vector<ImageBuffer> images;
        for (const fs::path& p : paths) {
            if (fs::is_directory(p)) {
                for (const fs::path& f : list_images(p)) {
                    images.push_back(load_image(f));
                }
            } else {
                images.push_back(load_image(p));
            }
        }
        return images;
    }

    // Dataset images with the generator channel count taken from them.
    auto dataset_for(RunConfig& cfg) -> std::vector<ImageBuffer>
    {
        if (cfg.dataset.empty()) {
            throw ValidationError("config key \"dataset\" is required");
        }
        auto data = load_dataset(cfg.dataset);
        cfg.train.arch.channels = data.front().channels();
        validate(cfg.train);
        return data;
    }

    void write_manifest(const RunConfig& cfg, const fs::path& dir, const std::string& started,
                        const std::vector<std::string>& outputs)
    {
        json m;
        m["version"] = kVersion;
        m["seed"] = cfg.train.seed;
        m["config"] = cfg.text;
        m["started"] = started;
        m["finished"] = utc_now();
        m["outputs"] = outputs;
        write_file(dir / "manifest.json", m.dump(2) + "\n");
    }

    void make_dir(const fs::path& dir)
    {
        std::error_code ec;
        fs::create_directories(dir, ec);
        if (ec) {
            throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
        }
    }

} // namespace

auto parse_run_config(const std::string& text, const fs::path& base_dir) -> RunConfig
{
    json obj;
    try {
        obj = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!obj.is_object()) {
        throw ValidationError("config must be a JSON object");
    }
    for (const auto& item : obj.items()) {
        if (kKeys.count(item.key()) == 0) {
            throw ValidationError("unknown config key \"" + item.key() + "\"");
        }
    }
    const Fields f(obj);
    RunConfig cfg;
    cfg.text = text;
    TrainConfig& t = cfg.train;
    if (f.has("seed")) t.seed = f.count("seed");
    if (f.has("adv_variant")) {
        const auto v = f.get<std::string>("adv_variant");
        if (v == "standard") {
            t.adv_variant = AdvVariant::Standard;
        } else if (v == "relativistic") {
            t.adv_variant = AdvVariant::Relativistic;
        } else {
            throw ValidationError("config key \"adv_variant\": expected \"standard\" or \"relativistic\"");
        }
    }
    t.mu = f.has("mu") ? f.get<std::vector<double>>("mu") : default_mu(t.adv_variant);
    if (f.has("baseline_weights")) cfg.baseline_weights = f.get<std::vector<double>>("baseline_weights");
    if (f.has("mode")) {
        const auto m = f.get<std::string>("mode");
        if (m == "hypervol_log") {
            t.mode = HypervolLog{};
        } else if (m == "hypervol_log_norm") {
            t.mode = HypervolLogNormalized{};
        } else if (m == "linear") {
            if (!cfg.baseline_weights) {
                throw ValidationError("config key \"mode\": linear mode needs \"baseline_weights\"");
            }
            t.mode = LinearFixed{*cfg.baseline_weights};
        } else {
            throw ValidationError("config key \"mode\": expected hypervol_log, hypervol_log_norm or linear");
        }
    }
    if (f.has("eps")) t.eps = f.get<double>("eps");
    if (f.has("norm_p")) t.norm_p = static_cast<int>(f.count("norm_p"));
    if (f.has("pretrain_iters")) t.pretrain_iters = f.count("pretrain_iters");
    if (f.has("adv_iters")) t.adv_iters = f.count("adv_iters");
    if (f.has("batch_size")) t.batch_size = f.count("batch_size");
    if (f.has("patch_size")) t.patch_size = f.count("patch_size");
    if (f.has("lr")) t.lr = f.get<double>("lr");
    if (f.has("pretrain_lr")) t.pretrain_lr = f.get<double>("pretrain_lr");
    if (f.has("milestones")) {
        if (!obj.at("milestones").is_array()) {
            throw ValidationError("config key \"milestones\": expected an array of non-negative integers");
        }
        t.milestones.clear();
        for (const json& m : obj.at("milestones")) {
            if (!m.is_number_integer() || m.get<long long>() < 0) {
                throw ValidationError("config key \"milestones\": expected an array of non-negative integers");
            }
            t.milestones.push_back(m.get<std::size_t>());
        }
    }
    if (f.has("gen_width")) t.arch.gen_width = f.count("gen_width");
    if (f.has("feature_tap")) {
        const auto v = f.get<std::string>("feature_tap");
        if (v == "pre") {
            t.feature_tap = FeatureTap::PreActivation;
        } else if (v == "post") {
            t.feature_tap = FeatureTap::PostActivation;
        } else {
            throw ValidationError("config key \"feature_tap\": expected \"pre\" or \"post\"");
        }
    }
    if (f.has("dataset")) {
        t.dataset = f.get<std::string>("dataset");
        cfg.dataset = resolve(base_dir, t.dataset);
    }
    if (f.has("output_dir")) t.output_dir = f.get<std::string>("output_dir");
    cfg.output_dir = resolve(base_dir, t.output_dir);
    if (f.has("eval_list")) {
        for (const auto& p : f.get<std::vector<std::string>>("eval_list")) {
            cfg.eval_list.push_back(resolve(base_dir, p));
        }
    }
    if (cfg.baseline_weights && cfg.baseline_weights->size() != 3) {
        throw ValidationError("config key \"baseline_weights\": expected three weights");
    }
    try {
        validate(t);
    } catch (const ValidationError& e) {
        throw ValidationError(std::string("config: ") + e.what());
    }
    return cfg;
}

auto load_run_config(const fs::path& path) -> RunConfig
{
    return parse_run_config(read_file(path), path.parent_path());
}

auto parse_orientation(const std::string& s) -> Orientation
{
    if (s == "min") {
        return Orientation::Minimize;
    }
    if (s == "max") {
        return Orientation::Maximize;
    }
    throw ValidationError("orientation must be min or max, got " + s);
}

void run_hv(const HvOptions& opts, std::ostream& out)
{
    const PointSet set = read_points_csv(opts.points, opts.orientation);
    const ReferencePoint ref{opts.ref};
    const double hv = hypervolume_exact(set, ref);
    out << (hv == 0.0 ? std::string("0") : fmt("%#.12g", hv)) << '\n';
    if (opts.mc_samples > 0) {
        const auto mc = hypervolume_mc(set, ref, opts.mc_samples, opts.seed);
        out << "mc " << fmt("%#.12g", mc.estimate) << " stderr " << fmt("%#.12g", mc.standard_error) << '\n';
    }
}

void run_pareto(const fs::path& points, Orientation orientation, std::ostream& out)
{
    const PointSet front = pareto_filter(read_points_csv(points, orientation));
    for (const ObjectiveVector& p : front.points()) {
        for (std::size_t k = 0; k < p.size(); ++k) {
            out << (k ? "," : "") << fmt("%.17g", p[k]);
        }
        out << '\n';
    }
}

void run_eval(const fs::path& ref, const fs::path& test, std::ostream& out)
{
    const MetricReport r = evaluate(load_image(ref), load_image(test));
    out << fmt("%.4f", r.psnr) << ',' << fmt("%.6f", r.ssim) << ',' << fmt("%.6f", r.gmsd) << '\n';
}

auto run_gradcheck(std::ostream& out) -> int
{
    std::vector<std::string> failing;
    for (const GradcheckResult& r : gradcheck_suite()) {
        out << r.primitive << ' ' << fmt("%.2e", r.max_rel_error) << '\n';
        if (!(r.max_rel_error <= 1e-4)) {
            failing.push_back(r.primitive);
        }
    }
    if (!failing.empty()) {
        out << "FAILED:";
        for (const auto& name : failing) {
            out << ' ' << name;
        }
        out << '\n';
        return 1;
    }
    return 0;
}

void run_synth(const fs::path& dir, std::size_t count, std::size_t size, std::uint64_t seed)
{
    make_dir(dir);
    const auto images = synthetic_corpus(count, size, seed);
    for (std::size_t i = 0; i < images.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "img%03zu.pgm", i);
        save_image(images[i], dir / name);
    }
}

auto run_train(const fs::path& config_path, std::ostream& log) -> TrainOutputs
{
    const std::string started = utc_now();
    RunConfig cfg = load_run_config(config_path);
    const auto data = dataset_for(cfg);
    make_dir(cfg.output_dir);
    TrainResult result = train(cfg.train, data);
    write_file(cfg.output_dir / "history.csv", history_csv(result.history));
    write_file(cfg.output_dir / "pretrain.csv", losses_csv(result.pretrain_losses));
    const std::string ckpt = checkpoint_bytes(result.nets);
    write_file(cfg.output_dir / "checkpoint.bin", ckpt);
    write_file(cfg.output_dir / "config.json", cfg.text);
    write_manifest(cfg, cfg.output_dir, started,
                   {"history.csv", "pretrain.csv", "checkpoint.bin", "config.json", "manifest.json"});
    log << "trained " << result.history.size() << " adversarial iterations; checkpoint fnv1a64 " << hex64(fnv1a64(ckpt))
        << '\n';
    return {std::move(result), cfg.output_dir};
}

auto results_csv(const std::vector<CompareRow>& rows) -> std::string
{
    std::string out = "mode,psnr,ssim,gmsd,clamp_events\n";
    for (const CompareRow& r : rows) {
        out += r.mode + ',' + fmt("%.17g", r.metrics.psnr) + ',' + fmt("%.17g", r.metrics.ssim) + ','
             + fmt("%.17g", r.metrics.gmsd) + ',' + std::to_string(r.clamp_events) + '\n';
    }
    return out;
}

auto run_compare(const fs::path& config_path, std::ostream& log) -> CompareOutputs
{
    const std::string started = utc_now();
    RunConfig cfg = load_run_config(config_path);
    if (!cfg.baseline_weights) {
        throw ValidationError("compare needs config key \"baseline_weights\"");
    }
    if (cfg.eval_list.empty()) {
        throw ValidationError("compare needs config key \"eval_list\"");
    }
    const auto data = dataset_for(cfg);
    const auto eval_images = load_images(cfg.eval_list);
    if (eval_images.empty()) {
        throw ValidationError("eval_list contains no images");
    }
    make_dir(cfg.output_dir);

    const Networks pretrained = pretrain(cfg.train, data);
    const std::string ckpt = checkpoint_bytes(pretrained);
    CompareOutputs outputs;
    outputs.pretrained_hash = fnv1a64(ckpt);
    outputs.output_dir = cfg.output_dir;
    write_file(cfg.output_dir / "pretrained.bin", ckpt);
    log << "pretrained checkpoint fnv1a64 " << hex64(outputs.pretrained_hash) << '\n';

    std::vector<std::string> inventory = {"pretrained.bin"};
    const std::vector<ScalarizationMode> modes = {LinearFixed{*cfg.baseline_weights}, HypervolLog{},
                                                  HypervolLogNormalized{}};
    for (const ScalarizationMode& mode : modes) {
        TrainConfig run = cfg.train;
        run.mode = mode;
        auto [g, d] = init_networks(run.seed, run.arch);
        Networks nets{std::move(g), std::move(d)};
        restore(nets, parse_checkpoint(ckpt));
        CompareRow row;
        row.mode = mode_name(mode);
        row.start_hash = fnv1a64(checkpoint_bytes(nets));
        log << row.mode << ": start checkpoint fnv1a64 " << hex64(row.start_hash)
            << (row.start_hash == outputs.pretrained_hash ? " (matches)" : " (MISMATCH)") << '\n';
        row.history = adversarial(run, data, nets);
        for (const HistoryRecord& r : row.history) {
            row.clamp_events += r.step.clamped != 0 ? 1 : 0;
        }
        row.metrics = evaluate_generator(nets.g, eval_images);
        const fs::path dir = cfg.output_dir / row.mode;
        make_dir(dir);
        write_file(dir / "history.csv", history_csv(row.history));
        write_file(dir / "checkpoint.bin", checkpoint_bytes(nets));
        inventory.push_back(row.mode + "/history.csv");
        inventory.push_back(row.mode + "/checkpoint.bin");
        outputs.rows.push_back(std::move(row));
    }
    write_file(cfg.output_dir / "results.csv", results_csv(outputs.rows));
    write_file(cfg.output_dir / "config.json", cfg.text);
    for (const char* name : {"results.csv", "config.json", "manifest.json"}) {
        inventory.emplace_back(name);
    }
    write_manifest(cfg, cfg.output_dir, started, inventory);
    return outputs;
}

auto exit_code(const std::exception& e) -> int
{
    if (dynamic_cast<const IoError*>(&e) != nullptr || dynamic_cast<const std::filesystem::filesystem_error*>(&e)) {
        return 2;
    }
    return 1;
}

} // namespace hvgan::cli
