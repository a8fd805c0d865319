#include "cqed/sampling.hpp"

#include <cmath>
#include <string>

namespace cqed {

double EnsembleSpec::weight(int traj) const {
    if (weights.empty()) return 1.0 / static_cast<double>(n_traj);
    return weights[static_cast<std::size_t>(traj)];
}

void EnsembleSpec::validate() const {
    if (n_traj < 1) throw config_error("ensemble: n_traj must be at least 1");
    if (!weights.empty()) {
        if (weights.size() != static_cast<std::size_t>(n_traj))
            throw config_error("ensemble: weights size must equal n_traj");
        double sum = 0.0;
        for (double w : weights) {
            if (!(w >= 0.0)) throw config_error("ensemble: weights must be non-negative");
            sum += w;
        }
        if (std::abs(sum - 1.0) > 1e-10)
            throw config_error("ensemble: weights must sum to 1, got " + std::to_string(sum));
    }
}

namespace rng {

// SplitMix64 finalizer; passes the usual avalanche tests.
std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t substream_key(std::uint64_t seed, std::uint64_t trajectory, std::uint64_t mode) {
    std::uint64_t h = mix64(seed ^ 0x243f6a8885a308d3ULL);
    h = mix64(h ^ trajectory);
    h = mix64(h ^ (mode + 0x13198a2e03707344ULL));
    return h;
}

double uniform01(std::uint64_t key, std::uint64_t counter) {
    const std::uint64_t bits = mix64(key + counter * 0x9e3779b97f4a7c15ULL);
    // (0,1): offset by half an ulp of the 53-bit grid to avoid exact 0 and 1.
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

void gaussian_pair(std::uint64_t key, double& z0, double& z1) {
    const double u1 = uniform01(key, 0);
    const double u2 = uniform01(key, 1);
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * 3.14159265358979323846 * u2;
    z0 = radius * std::cos(angle);
    z1 = radius * std::sin(angle);
}

} // namespace rng

PhasePoint sample_vacuum(const CavityModel& cavity, const EnsembleSpec& spec, int trajectory_index) {
    PhasePoint point;
    point.q.resize(cavity.n_modes);
    point.p.resize(cavity.n_modes);
    for (int a = 0; a < cavity.n_modes; ++a) {
        const double omega = cavity.frequencies[a];
        double zq, zp;
        rng::gaussian_pair(rng::substream_key(spec.seed, static_cast<std::uint64_t>(trajectory_index),
                                              static_cast<std::uint64_t>(a)),
                           zq, zp);
        point.q[a] = zq * std::sqrt(0.5 / omega);
        point.p[a] = zp * std::sqrt(0.5 * omega);
    }
    return point;
}

} // namespace cqed
