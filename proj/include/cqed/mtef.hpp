#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <vector>

#include "cqed/model.hpp"
#include "cqed/observables.hpp"
#include "cqed/sampling.hpp"

namespace cqed {

// Atomic reduced density matrix carried by one trajectory (m <= 3).
struct AtomState {
    int levels = 2;
    std::array<std::complex<double>, 9> rho{};

    static AtomState pure(int levels, int level_index);

    std::complex<double>& at(int k, int l) { return rho[static_cast<std::size_t>(k) * levels + l]; }
    const std::complex<double>& at(int k, int l) const {
        return rho[static_cast<std::size_t>(k) * levels + l];
    }
    double population(int k) const { return at(k, k).real(); }
    double trace_real() const;
    double trace_defect() const;        // |Tr rho - 1|
    double hermiticity_defect() const;  // max |rho - rho^dagger|
};

struct TrajectoryState {
    AtomState atom;
    PhasePoint field;
    double time = 0.0;
};

// Propagation and output plan. All output times must be integer multiples of
// dt (observables are evaluated at exact times, never interpolated).
struct RunPlan {
    double dt = 0.02;
    double t_final = 2100.0;
    std::vector<double> snapshot_times{100.0, 600.0, 1200.0, 2100.0};  // field observables
    std::vector<double> series_times;                                  // populations, photon number
    std::vector<double> r_grid;   // intensity profile grid
    std::vector<double> g2_grid;  // g2 pair grid (may be empty to skip g2)

    void validate(double cavity_length) const;
    // Sorted union of series and snapshot times (first entry may be 0).
    std::vector<double> output_times() const;
};

std::vector<double> make_series_times(double t_final, double interval);

// Tr(rho mu), real for Hermitian rho and symmetric mu.
double mean_dipole(const AtomState& state, const AtomModel& atom);

// Conserved Ehrenfest energy: Tr(rho H_A) + sum_a (P^2 + w^2 Q^2)/2 + s <mu>,
// with s = sum_a w_a lambda_a Q_a.
double ehrenfest_energy(const TrajectoryState& state, const AtomModel& atom,
                        const CavityModel& cavity);

// One classic RK4 step of the coupled Ehrenfest equations over all modes:
//   d rho/dt = -i [H_A + s mu, rho]
//   dQ_a/dt  = P_a
//   dP_a/dt  = -w_a^2 Q_a - w_a lambda_a Tr(rho mu)
void step(TrajectoryState& state, const AtomModel& atom, const CavityModel& cavity, double dt);

struct TrajectoryResult {
    bool ok = true;
    double max_energy_drift = 0.0;  // max_t |E(t) - E(0)| / |E(0)| over output times
    std::vector<double> series_times;
    std::vector<double> populations;    // series x m, row-major
    std::vector<double> photon_number;  // series
    std::vector<double> energy;         // series
    std::vector<TrajectoryState> snapshots;
};

// Propagates one trajectory through all plan output times. Modes with zero
// coupling evolve freely and are advanced per output segment by the closed
// n-step RK4 map of the harmonic oscillator (identical linear map, applied
// as a matrix power); coupled modes and the atom take explicit RK4 steps.
TrajectoryResult run_trajectory(const TrajectoryState& initial, const RunPlan& plan,
                                const AtomModel& atom, const CavityModel& cavity);

struct EnsembleOptions {
    G2Variant g2_variant = G2Variant::full;
    IntensityVariant intensity_variant = IntensityVariant::full;
    G2Denominator g2_denominator = G2Denominator::glauber;
    double g2_mask_rel = 1e-3;
    int initial_level = -1;  // -1: highest level (the paper's initial condition)
    int threads = 0;         // 0: library default
    int chunk_size = 16;     // trajectories per deterministic reduction chunk
};

struct SnapshotEnsemble {
    double time = 0.0;
    std::vector<double> intensity_mean, intensity_err;
    std::vector<double> glauber_mean, glauber_err;
    std::vector<double> intensity_g2_mean, intensity_g2_err;
    std::vector<double> g2num_mean, g2num_err;  // packed pairs
    G2Grid g2;
    G2DiagonalCuts cuts;
};

struct EnsembleResult {
    int n_traj = 0;
    int flagged_trajectories = 0;
    double max_energy_drift = 0.0;
    std::vector<double> series_times;
    std::vector<double> pop_mean, pop_err;        // series x m
    std::vector<double> photon_mean, photon_err;  // series
    std::vector<SnapshotEnsemble> snapshots;

    std::vector<double> populations_at(double time) const;
};

// Weighted trajectory ensemble with a deterministic fixed-order reduction:
// results are identical for any worker count.
EnsembleResult run_ensemble(const AtomModel& atom, const CavityModel& cavity,
                            const EnsembleSpec& spec, const RunPlan& plan,
                            const EnsembleOptions& options = {});

} // namespace cqed
