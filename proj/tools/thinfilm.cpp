// thinfilm: simulator and verification laboratory for the fourth-order
// thin-film growth equation du/dt + div(grad Lap u - g(grad u)) = 0.
//
//   thinfilm <kernel|ibvp|cauchy|verify|convergence> --config FILE --out DIR
//            [--seed N]
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "thinfilm/runner.hpp"

int main(int argc, char** argv) {
    CLI::App app{"thin-film growth equation simulator and verification lab"};
    app.require_subcommand(1);

    std::string config_path, out_dir;
    std::int64_t seed_override = -1;
    for (const char* name :
         {"kernel", "ibvp", "cauchy", "verify", "convergence"}) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "run configuration file")
            ->required();
        sub->add_option("--out", out_dir, "output directory")->required();
        sub->add_option("--seed", seed_override, "override the config seed");
    }

    CLI11_PARSE(app, argc, argv);
    const std::string subcommand = app.get_subcommands().front()->get_name();

    std::ifstream in(config_path);
    if (!in) {
        std::fprintf(stderr, "error: cannot read config file %s\n",
                     config_path.c_str());
        return 2;
    }
    std::stringstream ss;
    ss << in.rdbuf();

    auto parsed = thinfilm::parse_config(ss.str(), subcommand);
    if (!parsed.ok()) {
        for (const auto& e : parsed.errors)
            std::fprintf(stderr, "%s:%d: %s\n", config_path.c_str(), e.line,
                         e.message.c_str());
        return 2;
    }
    thinfilm::RunConfig cfg = *parsed.config;
    cfg.out_dir = out_dir;
    if (seed_override >= 0) cfg.seed = static_cast<std::uint64_t>(seed_override);

    try {
        const int code = thinfilm::run(cfg);
        if (code != 0)
            std::fprintf(stderr, "thinfilm %s finished with status %d\n",
                         subcommand.c_str(), code);
        return code;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
}
