#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "ksep/pipeline.hpp"
#include "ksep/version.hpp"

namespace {

struct CliOptions {
    std::string config_path;
    std::string out_dir;
    std::string stage;
    std::uint64_t rng_seed = 0;
    bool seed_given = false;
    bool quiet = false;
};

void add_common(CLI::App* app, CliOptions& opt) {
    app->add_option("--config", opt.config_path, "pipeline config (JSON)");
    app->add_option("--out", opt.out_dir, "output directory (overrides config \"outputs\")");
    app->add_option("--seed", opt.rng_seed, "override the sampling rng_seed")
        ->each([&opt](const std::string&) { opt.seed_given = true; });
    app->add_flag("--quiet", opt.quiet, "suppress progress output");
}

int run(const CliOptions& opt, const std::string& stage_name) {
    if (opt.config_path.empty()) throw ksep::ConfigError("--config is required");
    ksep::PipelineConfig cfg = ksep::load_config(opt.config_path);
    if (!opt.out_dir.empty()) cfg.outputs = opt.out_dir;
    if (cfg.outputs.empty()) {
        if (const char* env = std::getenv("KSEP_OUT")) cfg.outputs = env;
    }
    if (opt.seed_given) cfg.rng_seed = opt.rng_seed;

    if (stage_name.empty()) {
        ksep::run_pipeline(cfg, opt.quiet);
    } else {
        auto stage = ksep::stage_from_string(stage_name);
        if (!stage) throw ksep::ConfigError("unknown stage '" + stage_name + "'");
        ksep::run_stage(cfg, *stage, opt.quiet);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Stability-boundary estimation from Koopman principal eigenfunctions"};
    app.set_version_flag("--version", ksep::kVersion);

    CliOptions opt;
    add_common(&app, opt);
    app.add_option("--stage", opt.stage, "run a single stage (equilibria|eigfun|fit|contour|cct)");

    // Subcommand form: `ksep <stage> --config ...` is equivalent to --stage;
    // `ksep run` is the full pipeline. All forms share the same options.
    CLI::App* run_all = app.add_subcommand("run", "run every stage in order");
    add_common(run_all, opt);
    run_all->add_option("--stage", opt.stage, "run a single stage instead");
    for (const char* name : {"equilibria", "eigfun", "fit", "contour", "cct"}) {
        CLI::App* sub = app.add_subcommand(name, std::string("run the ") + name + " stage");
        add_common(sub, opt);
    }

    CLI11_PARSE(app, argc, argv);

    try {
        for (const CLI::App* sub : app.get_subcommands()) {
            if (sub->get_name() != "run") opt.stage = sub->get_name();
        }
        return run(opt, opt.stage);
    } catch (const ksep::Error& e) {
        std::cerr << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
