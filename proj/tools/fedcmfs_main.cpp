#include <CLI11.hpp>
#include <iostream>

#include "fedcmfs/experiment.hpp"
#include "fedcmfs/types.hpp"

namespace {

int exit_code_for(const fedcmfs::Error& e) { return static_cast<int>(e.kind()); }

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"FedCMFS: causal multi-label feature selection over horizontally partitioned data"};
    app.require_subcommand(1);

    CLI::App* run = app.add_subcommand("run", "Run a feature-selection experiment grid from a config file");
    std::string config_path;
    std::vector<std::string> overrides;
    std::string out_dir;
    bool trace = false;
    run->add_option("--config", config_path, "Path to a key=value config file")->required();
    run->add_option("--override", overrides, "Override a config key, e.g. --override alpha=0.01");
    run->add_option("--out", out_dir, "Output directory (overrides the config's out_dir)");
    run->add_flag("--trace", trace, "Write the federation message trace per cell");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1; // usage problems are configuration errors
    }

    try {
        fedcmfs::RunConfig cfg = fedcmfs::RunConfig::from_file(config_path);
        cfg.apply_environment();
        for (const std::string& ov : overrides) {
            const size_t eq = ov.find('=');
            if (eq == std::string::npos) {
                std::cerr << "error: --override expects key=value, got '" << ov << "'\n";
                return 1;
            }
            cfg.apply_key(ov.substr(0, eq), ov.substr(eq + 1));
        }
        if (!out_dir.empty()) cfg.out_dir = out_dir;
        if (trace) cfg.trace_messages = true;

        const int rc = fedcmfs::run_experiment(cfg);
        if (rc == 0) std::cout << "results written to " << cfg.out_dir << "\n";
        return rc;
    } catch (const fedcmfs::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e);
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 3;
    }
}
