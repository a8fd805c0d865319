#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cqed/mtef.hpp"
#include "cqed/model.hpp"

namespace cqed {

inline constexpr const char* kVersion = "0.1.0";

// Resolved run configuration. Defaults reproduce the two-level spontaneous
// emission setup (400 modes, 1e4 trajectories, snapshots at 100/600/1200/2100).
struct RunConfig {
    // [model]
    int levels = 2;
    std::vector<double> energies;  // empty: built-in defaults for `levels`
    std::vector<double> dipole;    // empty: built-in defaults; row-major levels^2
    int initial_level = -1;        // -1: highest level

    // [cavity]
    int n_modes = 400;
    double length = 2.362e5;
    double atom_position = -1.0;  // -1: L/2
    double coupling = 0.0103;

    // [mtef]
    int n_traj = 10000;
    std::uint64_t seed = 20230;
    double dt = 0.02;

    // [exact]
    int per_mode_cap = 2;
    int total_cap = 2;
    double tolerance = 1e-9;
    int krylov_dim = 30;
    std::uint64_t max_states = 1000000;

    // [output]
    double t_final = 2100.0;
    std::vector<double> snapshot_times{100.0, 600.0, 1200.0, 2100.0};
    double series_interval = 10.0;
    int r_points = 1024;
    int g2_points = 256;
    std::string dir = "out";

    // [estimators]
    std::string g2_variant = "full";         // full | paper
    std::string intensity_variant = "full";  // full | diagonal
    std::string g2_denominator = "glauber";  // glauber | intensity
    double g2_mask_rel = 1e-3;

    void validate() const;

    AtomModel resolved_atom() const;
    CavityModel resolved_cavity() const;
    RunPlan resolved_plan() const;
    EnsembleOptions resolved_options() const;
    EnsembleSpec resolved_spec() const;

    std::string to_ini_text() const;
};

// Parses the sectioned key = value format; unknown sections or keys, type
// mismatches, and invariant violations raise config_error naming the key and
// line number.
RunConfig parse_config(const std::string& text);

RunConfig load_config_file(const std::string& path);

} // namespace cqed
