#include <CLI11.hpp>

#include "adamixup/runner.hpp"

int main(int argc, char** argv) {
    CLI::App app{"AdaMixUp experiment runner: learned mixing-policy regions, "
                 "fold-k mixing, and an intrusion discriminator at desk scale"};
    app.require_subcommand(1);

    std::string config_path, checkpoint_path, data_spec, out_dir, grid_spec;
    int count = 5;
    uint64_t seed = 1;

    auto* train = app.add_subcommand("train", "Train a model from a config file");
    train->add_option("--config", config_path, "Run config (.ini)")->required();

    auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint on a dataset");
    eval->add_option("--checkpoint", checkpoint_path, "Checkpoint file (.amx)")->required();
    eval->add_option("--data", data_spec,
                     "Dataset spec: synthetic:k=v,... | idx:<images>,<labels> | csv:<path>")
        ->required();

    auto* exp = app.add_subcommand("export-mixed",
                                   "Write mixed-image triples (x1, x2, mix) as PGM files");
    exp->add_option("--checkpoint", checkpoint_path, "Checkpoint file (.amx)")->required();
    exp->add_option("--data", data_spec, "Dataset spec")->required();
    exp->add_option("--count", count, "Number of mixed pairs");
    exp->add_option("--out", out_dir, "Output directory")->required();
    exp->add_option("--seed", seed, "Pair-drawing seed");

    auto* sweep = app.add_subcommand("sweep", "Run a config over a parameter grid");
    sweep->add_option("--config", config_path, "Base run config (.ini)")->required();
    sweep->add_option("--grid", grid_spec, "Grid: section.key=v1,v2[;section.key=...]")
        ->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    if (train->parsed()) return adamixup::cmd_train(config_path);
    if (eval->parsed()) return adamixup::cmd_eval(checkpoint_path, data_spec);
    if (exp->parsed()) {
        return adamixup::cmd_export_mixed(checkpoint_path, data_spec, count, out_dir, seed);
    }
    if (sweep->parsed()) return adamixup::cmd_sweep(config_path, grid_spec);
    return 1;
}
