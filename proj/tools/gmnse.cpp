#include <CLI11.hpp>

#include <cstdio>
#include <string>

#include "gmnse/experiments.hpp"

namespace {

struct CliOptions {
    std::string config_path;
    std::string out_dir = "out";
    std::uint64_t seed = 0;
    bool seed_set = false;
    int threads = 0;
};

int run(const std::string& kind, const CliOptions& opt) {
    using namespace gmnse;
    ExperimentConfig cfg;
    try {
        cfg = load_config(opt.config_path);
        if (cfg.kind != experiment_kind_from_string(kind))
            throw ConfigError("config `experiment` does not match subcommand `" + kind + "`");
        if (opt.seed_set) cfg.seed = opt.seed;
        if (opt.threads > 0) cfg.threads = opt.threads;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    }
    try {
        RunResult res = run_experiment(cfg, opt.out_dir);
        for (const auto& c : res.checks)
            std::printf("[%s] %s  (%s)\n", c.pass ? "pass" : "FAIL", c.name.c_str(),
                        c.law.c_str());
        if (res.status != 0) std::fprintf(stderr, "assertion failure; see checks above\n");
        return res.status;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const Error& e) {
        std::fprintf(stderr, "failure: %s\n", e.what());
        return 1;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"pseudo-spectral laboratory for the globally modified Navier-Stokes equations"};
    app.require_subcommand(1);

    CliOptions opt;
    std::string chosen;
    for (const char* name :
         {"simulate", "verify", "attractor", "semicontinuity", "gronwall", "rates"}) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("--config", opt.config_path, "experiment config (JSON)")->required();
        sub->add_option("--out", opt.out_dir, "output directory");
        sub->add_option("--seed", opt.seed, "override the config seed")
            ->each([&](const std::string&) { opt.seed_set = true; });
        sub->add_option("--threads", opt.threads, "ensemble fan-out width");
        sub->callback([&chosen, name] { chosen = name; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    return run(chosen, opt);
}
