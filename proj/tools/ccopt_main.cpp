// Batch front door: forward / gradcheck / optimize / diagnose, each driven by
// a block-structured plain-text configuration (see README for the grammar).
// Failures exit nonzero with a one-line machine-parsable category on stderr:
//   error: <config|cfl|solver|io>: <message>

#include <cstdio>
#include <exception>
#include <string>

#include "CLI11.hpp"

#include "ccopt/commands.hpp"

namespace {

int exit_code(ccopt::ErrorCategory c) {
    switch (c) {
        case ccopt::ErrorCategory::config: return 2;
        case ccopt::ErrorCategory::cfl: return 3;
        case ccopt::ErrorCategory::solver: return 4;
        case ccopt::ErrorCategory::io: return 5;
    }
    return 1;
}

int dispatch(const std::string& command, const std::string& config_path,
             const std::string& output_dir) {
    try {
        ccopt::RunConfig cfg = ccopt::parse_config_file(config_path);
        if (!output_dir.empty()) cfg.output.dir = output_dir;
        if (command == "forward") {
            ccopt::run_forward(cfg);
            return 0;
        }
        if (command == "diagnose") {
            ccopt::run_diagnose(cfg);
            return 0;
        }
        if (command == "gradcheck") {
            const bool pass = ccopt::run_gradcheck(cfg);
            if (!pass) std::fprintf(stderr, "gradcheck: checks failed (see gradcheck.json)\n");
            return pass ? 0 : 1;
        }
        if (command == "optimize") {
            const bool converged = ccopt::run_optimize(cfg);
            if (!converged)
                std::fprintf(stderr, "optimize: not converged (see optimize_summary.json)\n");
            return converged ? 0 : 1;
        }
        std::fprintf(stderr, "error: config: unknown command '%s'\n", command.c_str());
        return 2;
    } catch (const ccopt::Error& e) {
        std::fprintf(stderr, "error: %s: %s\n", ccopt::to_string(e.category()), e.what());
        return exit_code(e.category());
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: solver: %s\n", e.what());
        return exit_code(ccopt::ErrorCategory::solver);
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"optimal control toolkit for a chemotaxis-consumption system"};
    app.require_subcommand(1);

    std::string config_path;
    std::string output_dir;

    for (const char* name : {"forward", "gradcheck", "optimize", "diagnose"}) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("config", config_path, "configuration file")->required();
        sub->add_option("-o,--output-dir", output_dir,
                        "output directory (overrides the config)");
    }

    CLI11_PARSE(app, argc, argv);
    return dispatch(app.get_subcommands().front()->get_name(), config_path, output_dir);
}
