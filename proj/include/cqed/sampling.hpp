#pragma once

#include <cstdint>
#include <vector>

#include "cqed/model.hpp"

namespace cqed {

// One point in the classical field phase space (all cavity modes).
struct PhasePoint {
    std::vector<double> q;
    std::vector<double> p;
};

// Trajectory ensemble description. Empty weights mean uniform 1/n_traj.
struct EnsembleSpec {
    int n_traj = 10000;
    std::uint64_t seed = 20230;
    std::vector<double> weights;

    double weight(int traj) const;
    void validate() const;
};

// Counter-based stream: every (seed, trajectory, mode) triple owns an
// independent substream, so draws are reproducible in any execution order.
namespace rng {

std::uint64_t mix64(std::uint64_t x);
std::uint64_t substream_key(std::uint64_t seed, std::uint64_t trajectory, std::uint64_t mode);
double uniform01(std::uint64_t key, std::uint64_t counter);

// Two independent standard normal draws (Box-Muller) from one substream.
void gaussian_pair(std::uint64_t key, double& z0, double& z1);

} // namespace rng

// Draw (Q, P) for every cavity mode from the Wigner transform of the
// zero-temperature vacuum: Var(Q_a) = 1/(2 w_a), Var(P_a) = w_a/2.
PhasePoint sample_vacuum(const CavityModel& cavity, const EnsembleSpec& spec, int trajectory_index);

} // namespace cqed
