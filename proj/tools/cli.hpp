#pragma once

// Commands behind the `hvgan` executable, callable without a process so the
// acceptance checks exercise the same code paths.

#include "hvgan/moo.hpp"
#include "hvgan/train.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>

namespace hvgan::cli {

/// A training/compare config file: TrainConfig plus the extra compare keys.
/// Relative paths inside the file resolve against the file's directory.
struct RunConfig {
    TrainConfig train;
    std::optional<std::vector<double>> baseline_weights;
    std::vector<std::filesystem::path> eval_list;
    std::filesystem::path dataset;
    std::filesystem::path output_dir;
    std::string text; // the config exactly as read
};

[[nodiscard]] auto parse_run_config(const std::string& text, const std::filesystem::path& base_dir) -> RunConfig;
[[nodiscard]] auto load_run_config(const std::filesystem::path& path) -> RunConfig;

[[nodiscard]] auto parse_orientation(const std::string& s) -> Orientation;

struct HvOptions {
    std::filesystem::path points;
    std::vector<double> ref;
    Orientation orientation = Orientation::Minimize;
    std::size_t mc_samples = 0;
    std::uint64_t seed = 1;
};
void run_hv(const HvOptions& opts, std::ostream& out);
void run_pareto(const std::filesystem::path& points, Orientation orientation, std::ostream& out);
void run_eval(const std::filesystem::path& ref, const std::filesystem::path& test, std::ostream& out);
/// Returns the process exit code (1 if any primitive exceeds the tolerance).
auto run_gradcheck(std::ostream& out) -> int;
void run_synth(const std::filesystem::path& dir, std::size_t count, std::size_t size, std::uint64_t seed);

struct TrainOutputs {
    TrainResult result;
    std::filesystem::path output_dir;
};
auto run_train(const std::filesystem::path& config_path, std::ostream& log) -> TrainOutputs;

struct CompareRow {
    std::string mode;
    MetricReport metrics;
    std::size_t clamp_events = 0;
    std::uint64_t start_hash = 0;
    TrainHistory history;
};
struct CompareOutputs {
    std::vector<CompareRow> rows;
    std::uint64_t pretrained_hash = 0;
    std::filesystem::path output_dir;
};
auto run_compare(const std::filesystem::path& config_path, std::ostream& log) -> CompareOutputs;

[[nodiscard]] auto results_csv(const std::vector<CompareRow>& rows) -> std::string;

/// 0 success, 1 validation/precondition failure, 2 I/O failure.
[[nodiscard]] auto exit_code(const std::exception& e) -> int;

} // namespace hvgan::cli
