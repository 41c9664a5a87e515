#include <CLI11.hpp>

#include <iostream>
#include <map>

#include "rgtn/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Renormalization-group tensor-network structure search"};
    app.require_subcommand(0, 1);
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<std::size_t> workers;
    bool emit_defaults = false;
    app.add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
    app.add_option("--seed", seed, "Override the configured seed");
    app.add_option("--out", out, "Override the output directory");
    app.add_option("--workers", workers, "Worker threads for reveal")->check(CLI::PositiveNumber);
    app.add_flag("--emit-defaults", emit_defaults, "Print the effective configuration and exit");
    app.fallthrough();
    const std::map<std::string, std::string> about = {
        {"synth", "Generate a ground-truth tensor, its structure and an optional mask"},
        {"search", "Search a compact structure for input.tensor within eval.re_bound"},
        {"complete", "Fill the missing entries of input.tensor under input.mask"},
        {"reveal", "Run the structure-revealing success-rate experiment"},
        {"compare", "Run each compare.methods entry at each RE bound on input.tensor"},
    };
    for (const auto& name : rgtn::cli::command_names()) {
        const auto it = about.find(name);
        app.add_subcommand(name, it == about.end() ? std::string() : it->second);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : rgtn::cli::kExitUsage;
    }

    rgtn::RunConfig cfg;
    try {
        if (!config_path.empty()) cfg = rgtn::load_config(config_path);
        if (seed) cfg.seed = *seed;
        if (out) cfg.out = *out;
        if (workers) cfg.workers = *workers;
        cfg.validate();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return rgtn::cli::kExitUsage;
    }

    if (emit_defaults) {
        std::cout << rgtn::to_json(cfg).dump(2) << '\n';
        return rgtn::cli::kExitOk;
    }
    const auto subs = app.get_subcommands();
    if (subs.empty()) {
        std::cerr << app.help();
        return rgtn::cli::kExitUsage;
    }
    return rgtn::cli::run(subs.front()->get_name(), cfg, std::cout, std::cerr);
}
