#include "gsig/commands.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"Graph signature networks: data generation, training and diagnostics"};
    app.require_subcommand(1);

    struct Flags {
        std::string config;
        std::uint64_t seed = 0;
        std::string out;
        bool corrupt = false;
    };
    Flags flags;

    const std::vector<std::pair<std::string, std::string>> commands{
        {"gen", "generate a synthetic dataset"},
        {"train", "train a model and write checkpoint, history and metrics"},
        {"eval", "evaluate a trained checkpoint"},
        {"gradcheck", "compare analytic and finite-difference gradients"},
        {"sigcheck", "run the path-signature self checks"},
        {"ablate", "MAV analysis and ablation grid"},
    };
    std::vector<CLI::App*> subs;
    for (const auto& [name, help] : commands) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->add_option("--config", flags.config, "JSON run config");
        sub->add_option("--seed", flags.seed, "override the config seed");
        sub->add_option("--out", flags.out, "output directory");
        if (name == "gradcheck") sub->add_flag("--corrupt-gradient", flags.corrupt)->group("");
        subs.push_back(sub);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? gsig::kExitOk : gsig::kExitValidation;
    }

    for (CLI::App* sub : subs) {
        if (!sub->parsed()) continue;
        gsig::CommandOptions opts;
        if (sub->count("--config") > 0) opts.config = flags.config;
        if (sub->count("--seed") > 0) opts.seed = flags.seed;
        if (sub->count("--out") > 0) opts.out = flags.out;
        opts.corrupt_gradient = flags.corrupt;
        return gsig::run_command(sub->get_name(), opts, std::cout, std::cerr);
    }
    return gsig::kExitValidation;
}
