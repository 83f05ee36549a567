// Command-line driver: stefan --config run.json [--mode solve|optimize|verify]
//                             [--out dir] [--workers k] [--seed s]

#include "stefan/config.hpp"
#include "stefan/run.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

int main(int argc, char** argv) {
    CLI::App app{"Multiphase Stefan problem: forward solves, flux identification and verification studies"};
    std::string config_path;
    std::string mode;
    std::string out_dir;
    int workers = 0;
    std::optional<std::uint64_t> seed;
    app.add_option("--config", config_path, "JSON run configuration")->required();
    app.add_option("--mode", mode, "override the configured mode")->check(CLI::IsMember({"solve", "optimize", "verify"}));
    app.add_option("--out", out_dir, "output directory (overrides output.directory)");
    app.add_option("--workers", workers, "worker threads for independent grid levels")->check(CLI::PositiveNumber);
    app.add_option("--seed", seed, "optimizer random seed");
    CLI11_PARSE(app, argc, argv);

    std::filesystem::path dir = out_dir.empty() ? std::filesystem::path("out") : std::filesystem::path(out_dir);
    try {
        std::optional<stefan::RunMode> override_mode;
        if (!mode.empty()) override_mode = stefan::parse_run_mode(mode);
        stefan::RunConfig cfg = stefan::parse_config(config_path, override_mode);
        if (!out_dir.empty()) cfg.output.directory = out_dir;
        dir = cfg.output.directory;
        if (workers > 0) cfg.workers = workers;
        if (seed) cfg.optimizer.seed = *seed;
        return stefan::run(cfg);
    } catch (const stefan::StefanError& e) {
        std::cerr << "error: " << e.what() << '\n';
        try {
            stefan::write_error_report(e, dir);
        } catch (...) {
        }
        return e.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
