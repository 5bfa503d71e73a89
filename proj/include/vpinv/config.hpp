#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vpinv/profiles.hpp"

namespace vpinv {

/*!
 * Flat key = value experiment configuration.
 *
 * Lines are `key = value`; `#` starts a comment; blank lines are ignored.
 * Unknown keys and out-of-range values are invalid-config errors. Lists are
 * comma separated. serialize() emits every key in a fixed order with
 * round-trip precision, and hash() is the FNV-1a digest of that text.
 */
struct ExperimentConfig {
    double radius{1.0};
    std::string profile{"gaussian:1,0.2,0,0.15"};
    int nx{64};              ///< field grid cells across the diameter
    int n{128};              ///< reconstruction grid cells
    double c0{1.0};
    double c0p{4.0};
    int n_v{8};
    std::vector<double> speeds{50.0, 100.0};
    int n_a{180};
    int n_s{129};
    double offset_fraction{0.95};
    std::string mode{"oracle"};
    double tol{1e-10};
    int max_iter{20};
    double central_step_scale{0.125};
    bool self_field{true};
    bool verify_peak{false};
    double max_failure_fraction{0.02};
    double angle{0.0};       ///< forward: chord angle
    double offset{0.0};      ///< forward: chord offset
    double speed{100.0};     ///< forward: beam speed
    std::string output_dir{"out"};
    std::uint64_t seed{12345};
    int workers{0};          ///< 0 = available parallelism

    /// Sets one key from text; throws invalid-config for unknown keys or bad values.
    void set(const std::string& key, const std::string& value);
    /// Range checks across all fields.
    void validate() const;

    std::string serialize() const;
    std::string hash() const;

    static ExperimentConfig parse(const std::string& text);
    static ExperimentConfig load(const std::string& path);
    static const std::vector<std::string>& keys();

    bool operator==(const ExperimentConfig&) const = default;
};

/*!
 * Profile spec strings:
 *   zero | constant:n0 | gaussian:A,cx,cy,sigma | radial:c0,c1,... | grid:path
 */
DopingProfile parse_profile(const std::string& spec);

/// Shortest round-trip text for a double.
std::string format_double(double v);

/// 64-bit FNV-1a digest as 16 hex digits.
std::string fnv1a_hex(const std::string& text);

/// Applies the worker-count knob to every parallel region.
void apply_workers(int workers);

}  // namespace vpinv
