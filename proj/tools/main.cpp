#include "cli.hpp"

#include "hvgan/points_csv.hpp"
#include "hvgan/version.hpp"

#include <CLI11.hpp>

#include <iostream>

using namespace hvgan;

int main(int argc, char** argv)
{
    CLI::App app{"Hypervolume-scalarized GAN training and multi-objective utilities"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    cli::HvOptions hv;
    std::string ref_text, orient = "min";
    auto* hv_cmd = app.add_subcommand("hv", "Exact hypervolume of a points CSV");
    hv_cmd->add_option("points", hv.points, "Points CSV, one objective vector per row")->required();
    hv_cmd->add_option("--ref", ref_text, "Reference point, comma separated")->required();
    hv_cmd->add_option("--orient", orient, "min or max")->check(CLI::IsMember({"min", "max"}));
    hv_cmd->add_option("--mc", hv.mc_samples, "Also print a Monte-Carlo estimate with this many samples");
    hv_cmd->add_option("--seed", hv.seed, "Monte-Carlo seed");

    std::filesystem::path pareto_points;
    auto* pareto_cmd = app.add_subcommand("pareto", "Print the nondominated rows of a points CSV");
    pareto_cmd->add_option("points", pareto_points)->required();
    pareto_cmd->add_option("--orient", orient, "min or max")->check(CLI::IsMember({"min", "max"}));

    std::filesystem::path config;
    auto* train_cmd = app.add_subcommand("train", "Pretrain and adversarially train a generator");
    train_cmd->add_option("--config", config, "JSON config")->required();
    auto* compare_cmd = app.add_subcommand("compare", "Train baseline and both hypervolume modes from one start");
    compare_cmd->add_option("--config", config, "JSON config")->required();

    std::filesystem::path ref_img, test_img;
    auto* eval_cmd = app.add_subcommand("eval", "Print psnr,ssim,gmsd of a test image against a reference");
    eval_cmd->add_option("--ref", ref_img)->required();
    eval_cmd->add_option("--test", test_img)->required();

    auto* gradcheck_cmd = app.add_subcommand("gradcheck", "Finite-difference check of every autodiff primitive");

    std::filesystem::path synth_dir;
    std::size_t synth_count = 8, synth_size = 64;
    std::uint64_t synth_seed = 2024;
    auto* synth_cmd = app.add_subcommand("synth", "Write a synthetic grayscale training corpus as PGM files");
    synth_cmd->add_option("--out", synth_dir)->required();
    synth_cmd->add_option("--count", synth_count);
    synth_cmd->add_option("--size", synth_size);
    synth_cmd->add_option("--seed", synth_seed);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*hv_cmd) {
            hv.ref = parse_number_list(ref_text);
            hv.orientation = cli::parse_orientation(orient);
            cli::run_hv(hv, std::cout);
        } else if (*pareto_cmd) {
            cli::run_pareto(pareto_points, cli::parse_orientation(orient), std::cout);
        } else if (*train_cmd) {
            (void)cli::run_train(config, std::cerr);
        } else if (*compare_cmd) {
            const auto out = cli::run_compare(config, std::cerr);
            std::cout << cli::results_csv(out.rows);
        } else if (*eval_cmd) {
            cli::run_eval(ref_img, test_img, std::cout);
        } else if (*gradcheck_cmd) {
            return cli::run_gradcheck(std::cout);
        } else if (*synth_cmd) {
            cli::run_synth(synth_dir, synth_count, synth_size, synth_seed);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return cli::exit_code(e);
    }
    return 0;
}
