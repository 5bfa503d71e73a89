#include "vpinv/commands.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>

#include "vpinv/error.hpp"
#include "vpinv/io.hpp"
#include "vpinv/poisson.hpp"

namespace vpinv {

namespace {

std::string join(const std::string& dir, const std::string& name) { return dir + "/" + name; }

void say(const LogFn& log, const std::string& msg) {
    if (log) log(msg);
}

void write_config_copy(const ExperimentConfig& c) {
    std::ofstream out(join(c.output_dir, "config.txt"));
    if (!out) throw Error(ErrorCode::io_error, "cannot write config copy in " + c.output_dir);
    out << "# config_hash," << c.hash() << "\n" << c.serialize();
}

FieldGrid doping_field(const ExperimentConfig& c, const DopingProfile& profile, const LogFn& log) {
    const auto t0 = std::chrono::steady_clock::now();
    FieldGrid f = assemble_doping_field(profile, field_layout(c.nx, c.radius));
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    char buf[96];
    std::snprintf(buf, sizeof buf, "assembled doping field (nx=%d, %.2f s)", c.nx, dt);
    say(log, buf);
    return f;
}

void prepare(const ExperimentConfig& c) {
    c.validate();
    apply_workers(c.workers);
    ensure_directory(c.output_dir);
    write_config_copy(c);
}

}  // namespace

MeasureOptions measure_options(const ExperimentConfig& c) {
    MeasureOptions m;
    m.c0 = c.c0;
    m.c0p = c.c0p;
    m.fixed_point.tol = c.tol;
    m.fixed_point.max_iter = c.max_iter;
    m.fixed_point.deposit.n_v = c.n_v;
    m.fixed_point.self_field = c.self_field;
    m.central_step_scale = c.central_step_scale;
    m.verify_peak = c.verify_peak;
    return m;
}

AcquireOptions acquire_options(const ExperimentConfig& c) {
    AcquireOptions a;
    a.mode = parse_acquire_mode(c.mode);
    a.speeds = c.speeds;
    a.measure = measure_options(c);
    a.offset_fraction = c.offset_fraction;
    a.max_failure_fraction = c.max_failure_fraction;
    return a;
}

Measurement cmd_forward(const ExperimentConfig& c, bool trajectory, const LogFn& log) {
    c.validate();
    const DopingProfile profile = parse_profile(c.profile);
    const Chord chord = chord_from(DiskDomain(c.radius), c.angle, c.offset);
    prepare(c);
    const FieldGrid f = doping_field(c, profile, log);
    MeasureOptions mo = measure_options(c);
    mo.record_path = trajectory;
    KineticState st;
    const Measurement ms = measure_beam(chord, c.speed, f, mo, &st);
    const std::string h = c.hash();
    write_lines(join(c.output_dir, "measurement.jsonl"), {measurement_json(ms, h)});
    write_grid_csv(join(c.output_dir, "rho.csv"), st.rho, h);
    write_grid_csv(join(c.output_dir, "field.csv"), st.field, h);
    write_residual_csv(join(c.output_dir, "residuals.csv"), st.residuals, h);
    if (trajectory) write_trajectory_csv(join(c.output_dir, "trajectory.csv"), ms.path, h);
    say(log, "m = (" + fmt17(ms.m.x) + ", " + fmt17(ms.m.y) + "), m_perp = " + fmt17(ms.m_perp));
    return ms;
}

AcquireResult cmd_scan(const ExperimentConfig& c, const LogFn& log) {
    c.validate();
    const DopingProfile profile = parse_profile(c.profile);
    AcquireOptions ao = acquire_options(c);
    prepare(c);
    const FieldGrid f = doping_field(c, profile, log);
    if (log) {
        int last = -1;
        ao.progress = [&last, &log](int done, int total) {
            const int pct = static_cast<int>(100.0 * done / total);
            if (pct / 5 != last / 5) {
                last = pct;
                log("scan " + std::to_string(done) + "/" + std::to_string(total));
            }
        };
    }
    AcquireResult ar = acquire(f, c.n_a, c.n_s, ao);
    const std::string h = c.hash();
    write_sinogram_csv(join(c.output_dir, "sinogram.csv"), ar.sinogram, h);
    if (ao.mode == AcquireMode::simulate) {
        std::vector<std::string> lines;
        for (const auto& r : ar.records) lines.push_back(chord_record_json(r, h));
        write_lines(join(c.output_dir, "chords.jsonl"), lines);
        write_convergence_csv(join(c.output_dir, "convergence.csv"), ar.records, h);
    }
    say(log, "scan done: " + std::to_string(ar.failures) + " failed chords interpolated");
    return ar;
}

namespace {

ReconstructionResult reconstruct_and_write(const ExperimentConfig& c, const Sinogram& sino,
                                           const LogFn& log) {
    const DopingProfile truth = parse_profile(c.profile);
    ReconstructionResult rr = reconstruct(sino, c.n, truth);
    const std::string h = c.hash();
    write_grid_csv(join(c.output_dir, "e_hat.csv"), rr.e_hat, h);
    write_grid_csv(join(c.output_dir, "n_hat.csv"), rr.n_hat, h);
    write_metrics_csv(join(c.output_dir, "metrics.csv"), rr.metrics, h);
    say(log, "relative L2 " + fmt17(rr.metrics.l2_rel) + ", Linf " + fmt17(rr.metrics.linf));
    return rr;
}

}  // namespace

ReconstructionResult cmd_reconstruct(const ExperimentConfig& c, const std::string& sinogram_path,
                                     const LogFn& log) {
    c.validate();
    const Sinogram sino = read_sinogram_csv(sinogram_path);
    prepare(c);
    return reconstruct_and_write(c, sino, log);
}

ReconstructionResult cmd_pipeline(const ExperimentConfig& c, const LogFn& log) {
    const AcquireResult ar = cmd_scan(c, log);
    return reconstruct_and_write(c, ar.sinogram, log);
}

std::vector<CheckResult> cmd_validate(const ExperimentConfig& c, const LogFn& log) {
    prepare(c);
    const auto results = run_validation(c);
    write_lines(join(c.output_dir, "validation.csv"), {validation_csv(results, c.hash())});
    int failed = 0;
    for (const auto& r : results) {
        say(log, std::string(r.passed ? "PASS " : "FAIL ") + r.module + ": " + r.name + " (" +
                     fmt17(r.value) + " vs " + fmt17(r.limit) + ")");
        failed += !r.passed;
    }
    say(log, std::to_string(results.size() - failed) + "/" + std::to_string(results.size()) + " checks passed");
    return results;
}

}  // namespace vpinv
