#pragma once

#include <string>
#include <vector>

#include "vpinv/albedo.hpp"
#include "vpinv/grid.hpp"
#include "vpinv/tomography.hpp"

namespace vpinv {

/*!
 * Grid CSV: three header comment lines
 *   # dims,<side>,<side>,<components>,<cells>,<pad>
 *   # extent,<xmin>,<xmax>,<ymin>,<ymax>,<radius>
 *   # config_hash,<hex>
 * then a column row and one row per node: i,j,x,y,<values>,mask.
 */
struct GridFile {
    GridLayout layout;
    int components{1};
    std::vector<double> c1;
    std::vector<double> c2;
    std::vector<std::uint8_t> mask;
    std::string config_hash;

    ScalarGrid scalar() const;
};

void write_grid_csv(const std::string& path, const ScalarGrid& grid, const std::string& hash);
void write_grid_csv(const std::string& path, const FieldGrid& field, const std::string& hash);
GridFile read_grid_csv(const std::string& path);

/*!
 * Sinogram CSV: `# config_hash,<hex>`, the row `n_a,n_s,R_d` and its values,
 * then angle_index,offset_index,alpha,s,v1,v2,parallel_residual rows.
 * Reading checks that angles and offsets are uniform (non-uniform-sampling).
 */
void write_sinogram_csv(const std::string& path, const Sinogram& sino, const std::string& hash);
Sinogram read_sinogram_csv(const std::string& path);

/// t,x1,x2,v1,v2
void write_trajectory_csv(const std::string& path, const std::vector<PathSample>& path_samples,
                          const std::string& hash);
/// iteration,residual
void write_residual_csv(const std::string& path, const std::vector<double>& residuals,
                        const std::string& hash);
void write_metrics_csv(const std::string& path, const Metrics& m, const std::string& hash);
/// One row per (chord, speed): angle_index,offset_index,alpha,s,speed,m1,m2,m_parallel,m_perp,t_plus,lambda_hat,iterations
void write_convergence_csv(const std::string& path, const std::vector<ChordRecord>& records,
                           const std::string& hash);

/// JSON object (one line) describing a measurement.
std::string measurement_json(const Measurement& ms, const std::string& hash);
/// JSON object (one line) describing a sinogram chord.
std::string chord_record_json(const ChordRecord& rec, const std::string& hash);
void write_lines(const std::string& path, const std::vector<std::string>& lines);

/// %.17g
std::string fmt17(double v);

void ensure_directory(const std::string& dir);

}  // namespace vpinv
