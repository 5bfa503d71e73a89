#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "vpinv/commands.hpp"
#include "vpinv/error.hpp"

using namespace vpinv;

namespace {

int report(const Error& e) {
    std::cerr << "error: " << e.name() << ": " << e.what() << "\n";
    return is_validation_error(e.code()) ? 2 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Beam-tomography inversion of doping profiles from Vlasov-Poisson exit data"};
    app.require_subcommand(1);
    app.fallthrough();
    std::string config_path;
    std::vector<std::string> overrides;
    std::string out_dir;
    int workers = -1;
    bool quiet = false;
    app.add_option("-c,--config", config_path, "key = value configuration file");
    app.add_option("-s,--set", overrides, "override a config key (key=value), repeatable");
    app.add_option("-o,--out", out_dir, "output directory (config key output_dir)");
    app.add_option("-j,--workers", workers, "worker threads, 0 = available parallelism");
    app.add_flag("-q,--quiet", quiet, "suppress progress messages");

    auto* forward = app.add_subcommand("forward", "simulate one beam and write its measurement");
    bool trajectory = false;
    double angle = NAN, offset = NAN, speed = NAN;
    forward->add_flag("--trajectory", trajectory, "also write trajectory.csv for the central characteristic");
    forward->add_option("--angle", angle, "chord angle (config key angle)");
    forward->add_option("--offset", offset, "chord offset (config key offset)");
    forward->add_option("--speed", speed, "beam speed (config key speed)");

    auto* scan = app.add_subcommand("scan", "acquire the sinogram (mode simulate or oracle)");
    auto* recon = app.add_subcommand("reconstruct", "FBP, -div and metrics from a sinogram file");
    std::string sinogram_path;
    recon->add_option("--sinogram", sinogram_path, "sinogram CSV")->required();
    auto* pipeline = app.add_subcommand("pipeline", "scan followed by reconstruct");
    auto* validate = app.add_subcommand("validate", "run the invariant suite and write a pass/fail report");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        ExperimentConfig cfg = config_path.empty() ? ExperimentConfig{} : ExperimentConfig::load(config_path);
        for (const auto& kv : overrides) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos)
                throw Error(ErrorCode::invalid_config, "--set expects key=value, got '" + kv + "'");
            cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
        }
        if (!out_dir.empty()) cfg.output_dir = out_dir;
        if (workers >= 0) cfg.workers = workers;
        if (!std::isnan(angle)) cfg.angle = angle;
        if (!std::isnan(offset)) cfg.offset = offset;
        if (!std::isnan(speed)) cfg.speed = speed;
        cfg.validate();

        LogFn log;
        if (!quiet) log = [](const std::string& m) { std::cerr << m << "\n"; };

        if (*forward) {
            cmd_forward(cfg, trajectory, log);
        } else if (*scan) {
            cmd_scan(cfg, log);
        } else if (*recon) {
            cmd_reconstruct(cfg, sinogram_path, log);
        } else if (*pipeline) {
            cmd_pipeline(cfg, log);
        } else if (*validate) {
            const auto results = cmd_validate(cfg, log);
            for (const auto& r : results)
                if (!r.passed) return 1;
        }
        return 0;
    } catch (const Error& e) {
        return report(e);
    } catch (const std::exception& e) {
        std::cerr << "error: runtime: " << e.what() << "\n";
        return 1;
    }
}
