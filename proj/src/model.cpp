#include "cqed/model.hpp"

#include <cmath>
#include <string>

namespace cqed {

namespace {

constexpr double kPi = 3.14159265358979323846;

// sin(alpha*pi/2) evaluated exactly from alpha mod 4, so even modes decouple
// with coupling exactly zero rather than at the level of sin() round-off.
double half_pi_sine(int alpha) {
    switch (alpha & 3) {
        case 1: return 1.0;
        case 3: return -1.0;
        default: return 0.0;
    }
}

} // namespace

void Constants::validate() const {
    if (hbar != 1.0) throw config_error("constants: hbar must be 1 (atomic units)");
    if (!(c > 0.0)) throw config_error("constants: c must be positive");
    if (!(eps0 > 0.0)) throw config_error("constants: eps0 must be positive");
}

void AtomModel::validate() const {
    if (levels < 2) throw config_error("atom: needs at least two levels");
    if (energies.size() != static_cast<std::size_t>(levels))
        throw config_error("atom: energies size does not match level count");
    if (dipole.size() != static_cast<std::size_t>(levels) * levels)
        throw config_error("atom: dipole matrix size does not match level count");
    for (int k = 1; k < levels; ++k)
        if (!(energies[k] > energies[k - 1]))
            throw config_error("atom: energies must be strictly increasing");
    for (int k = 0; k < levels; ++k)
        for (int l = 0; l < k; ++l)
            if (mu(k, l) != mu(l, k))
                throw config_error("atom: dipole matrix must be symmetric");
}

int CavityModel::coupled_mode_count() const {
    int n = 0;
    for (double lam : couplings)
        if (lam != 0.0) ++n;
    return n;
}

void CavityModel::validate() const {
    constants.validate();
    if (n_modes < 1) throw config_error("cavity: n_modes must be at least 1");
    if (!(length > 0.0)) throw config_error("cavity: length must be positive");
    if (!(atom_position > 0.0) || !(atom_position < length))
        throw config_error("cavity: atom_position must lie strictly inside (0, L)");
    if (frequencies.size() != static_cast<std::size_t>(n_modes) ||
        couplings.size() != static_cast<std::size_t>(n_modes))
        throw config_error("cavity: frequency/coupling arrays not populated");
}

AtomModel build_default_atom(int levels) {
    if (levels == 2) {
        AtomModel atom;
        atom.levels = 2;
        atom.energies = {-0.6738, -0.2798};
        atom.dipole = {0.0, 1.034,
                       1.034, 0.0};
        atom.validate();
        return atom;
    }
    if (levels == 3) {
        AtomModel atom;
        atom.levels = 3;
        atom.energies = {-0.6738, -0.2798, -0.1547};
        atom.dipole = {0.0, 1.034, 0.0,
                       1.034, 0.0, -2.536,
                       0.0, -2.536, 0.0};
        atom.validate();
        return atom;
    }
    throw config_error("atom: unsupported level count " + std::to_string(levels) +
                       " (defaults exist for 2 and 3)");
}

AtomModel build_atom(std::vector<double> energies, std::vector<double> dipole) {
    AtomModel atom;
    atom.levels = static_cast<int>(energies.size());
    atom.energies = std::move(energies);
    atom.dipole = std::move(dipole);
    atom.validate();
    return atom;
}

CavityModel build_cavity(int n_modes, double length, double atom_position,
                         const Constants& constants, double coupling_strength) {
    if (n_modes < 1) throw config_error("cavity: n_modes must be at least 1");
    if (!(length > 0.0)) throw config_error("cavity: length must be positive");
    constants.validate();

    CavityModel cavity;
    cavity.n_modes = n_modes;
    cavity.length = length;
    cavity.atom_position = atom_position;
    cavity.coupling_strength = coupling_strength;
    cavity.constants = constants;
    cavity.frequencies.resize(n_modes);
    cavity.couplings.resize(n_modes);
    const double omega1 = 2.0 * kPi * constants.c / length;
    for (int alpha = 1; alpha <= n_modes; ++alpha) {
        cavity.frequencies[alpha - 1] = omega1 * alpha;
        cavity.couplings[alpha - 1] = coupling_strength * half_pi_sine(alpha);
    }
    cavity.validate();
    return cavity;
}

double mode_function(const CavityModel& cavity, int alpha, double r) {
    if (alpha < 1 || alpha > cavity.n_modes)
        throw domain_error("mode_function: mode index out of range");
    if (r < 0.0 || r > cavity.length)
        throw domain_error("mode_function: position outside [0, L]");
    const double omega = cavity.frequencies[alpha - 1];
    const double norm = std::sqrt(omega / (cavity.constants.eps0 * cavity.length));
    return norm * std::sin(alpha * kPi * r / cavity.length);
}

std::vector<double> interaction_matrix(const AtomModel& atom, const CavityModel& cavity,
                                       std::span<const double> q) {
    if (q.size() != static_cast<std::size_t>(cavity.n_modes))
        throw domain_error("interaction_matrix: Q has wrong number of modes");
    double s = 0.0;
    for (int a = 0; a < cavity.n_modes; ++a)
        s += cavity.frequencies[a] * cavity.couplings[a] * q[a];
    std::vector<double> out(atom.dipole.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = s * atom.dipole[i];
    return out;
}

} // namespace cqed
