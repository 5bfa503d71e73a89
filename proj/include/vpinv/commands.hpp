#pragma once

#include <functional>
#include <string>

#include "vpinv/albedo.hpp"
#include "vpinv/config.hpp"
#include "vpinv/tomography.hpp"
#include "vpinv/validation.hpp"

namespace vpinv {

/// Progress/status sink for long commands (stderr in the CLI, silent in tests).
using LogFn = std::function<void(const std::string&)>;

/// Writes measurement.jsonl, rho.csv, field.csv, residuals.csv and, with
/// `trajectory`, trajectory.csv into config.output_dir.
Measurement cmd_forward(const ExperimentConfig& config, bool trajectory, const LogFn& log = {});

/// Writes sinogram.csv; simulate mode adds chords.jsonl and convergence.csv.
AcquireResult cmd_scan(const ExperimentConfig& config, const LogFn& log = {});

/// Reads a sinogram file, writes e_hat.csv, n_hat.csv and metrics.csv.
ReconstructionResult cmd_reconstruct(const ExperimentConfig& config, const std::string& sinogram_path,
                                     const LogFn& log = {});

/// scan followed by reconstruct on the in-memory sinogram.
ReconstructionResult cmd_pipeline(const ExperimentConfig& config, const LogFn& log = {});

/// Writes validation.csv; returns the check list.
std::vector<CheckResult> cmd_validate(const ExperimentConfig& config, const LogFn& log = {});

/// AcquireOptions / MeasureOptions assembled from a config.
MeasureOptions measure_options(const ExperimentConfig& config);
AcquireOptions acquire_options(const ExperimentConfig& config);

}  // namespace vpinv
