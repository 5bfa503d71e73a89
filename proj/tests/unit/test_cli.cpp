#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "vpinv/commands.hpp"
#include "vpinv/error.hpp"
#include "vpinv/io.hpp"

using namespace vpinv;
namespace fs = std::filesystem;

namespace {

ExperimentConfig small_config(const std::string& name) {
    ExperimentConfig c;
    c.nx = 32;
    c.n = 32;
    c.n_a = 12;
    c.n_s = 9;
    c.output_dir = (fs::temp_directory_path() / ("vpinv_cli_" + name)).string();
    fs::remove_all(c.output_dir);
    return c;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("forward writes its outputs") {
    ExperimentConfig c = small_config("forward");
    c.angle = 0.5;
    c.offset = 0.2;
    c.speed = 50.0;
    const Measurement m = cmd_forward(c, true);
    CHECK(m.exit.status == ExitStatus::exited);
    for (const char* f : {"measurement.jsonl", "rho.csv", "field.csv", "residuals.csv", "trajectory.csv", "config.txt"})
        CHECK(fs::exists(fs::path(c.output_dir) / f));
    CHECK(ExperimentConfig::load((fs::path(c.output_dir) / "config.txt").string()) == c);
    CHECK(slurp(fs::path(c.output_dir) / "measurement.jsonl").find(c.hash()) != std::string::npos);
}

TEST_CASE("forward rejects a chord that misses the disk") {
    ExperimentConfig c = small_config("miss");
    c.offset = 1.0;
    try {
        cmd_forward(c, false);
        FAIL("expected no-intersection");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::no_intersection);
    }
}

TEST_CASE("scan then reconstruct equals pipeline, and is deterministic") {
    const ExperimentConfig c = small_config("scan");
    const AcquireResult a = cmd_scan(c);
    const fs::path sino = fs::path(c.output_dir) / "sinogram.csv";
    REQUIRE(fs::exists(sino));
    const ReconstructionResult r = cmd_reconstruct(c, sino.string());
    for (const char* f : {"e_hat.csv", "n_hat.csv", "metrics.csv"}) CHECK(fs::exists(fs::path(c.output_dir) / f));
    const std::string first = slurp(fs::path(c.output_dir) / "n_hat.csv");

    ExperimentConfig p = small_config("pipe");
    const ReconstructionResult rp = cmd_pipeline(p);
    CHECK(rp.n_hat.values == r.n_hat.values);
    CHECK(a.sinogram.values.size() == 12u * 9u);

    cmd_reconstruct(c, sino.string());
    CHECK(slurp(fs::path(c.output_dir) / "n_hat.csv") == first);
}

TEST_CASE("zero sinogram reconstructs to zeros") {
    ExperimentConfig c = small_config("zero");
    fs::create_directories(c.output_dir);
    const std::string path = (fs::path(c.output_dir) / "zero.csv").string();
    write_sinogram_csv(path, Sinogram(8, 9, 1.0), c.hash());
    c.profile = "zero";
    const ReconstructionResult r = cmd_reconstruct(c, path);
    for (double v : r.n_hat.values) CHECK(v == 0.0);
    CHECK(r.metrics.l2_rel == 0.0);
}

TEST_CASE("validate writes a passing check table") {
    ExperimentConfig c;
    c.output_dir = small_config("validate").output_dir;
    const std::vector<CheckResult> res = cmd_validate(c);
    CHECK(!res.empty());
    for (const auto& r : res) CHECK_MESSAGE(r.passed, r.module << "/" << r.name << ": " << r.detail);
    CHECK(fs::exists(fs::path(c.output_dir) / "validation.csv"));
}

}
