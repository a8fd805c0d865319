#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "cqed/errors.hpp"

namespace cqed {

// Physical constants in Hartree atomic units (hbar = 1 by definition).
struct Constants {
    double hbar = 1.0;
    double c = 137.035999;
    double eps0 = 1.0 / (4.0 * 3.14159265358979323846);

    void validate() const;
};

// m-level atomic system: energies and the (real symmetric) dipole matrix.
struct AtomModel {
    int levels = 0;
    std::vector<double> energies;  // hartree, strictly increasing
    std::vector<double> dipole;    // row-major m x m, symmetric, zero diagonal

    double mu(int k, int l) const { return dipole[static_cast<std::size_t>(k) * levels + l]; }
    void validate() const;
};

// 1D cavity with n_modes sine modes between mirrors at r = 0 and r = L.
// Mode frequencies follow omega_alpha = 2*pi*c*alpha/L (alpha = 1..n_modes);
// couplings are lambda_alpha = coupling_strength * sin(alpha*pi/2), which
// vanishes exactly for even alpha when the atom sits at L/2.
struct CavityModel {
    int n_modes = 0;
    double length = 0.0;         // bohr
    double atom_position = 0.0;  // bohr
    double coupling_strength = 0.0103;
    std::vector<double> frequencies;  // hartree
    std::vector<double> couplings;    // a.u.
    Constants constants;

    int coupled_mode_count() const;
    void validate() const;
};

// Paper defaults: 1D soft-Coulomb hydrogen, two or three levels.
AtomModel build_default_atom(int levels);

AtomModel build_atom(std::vector<double> energies, std::vector<double> dipole);

CavityModel build_cavity(int n_modes, double length, double atom_position,
                         const Constants& constants = Constants{},
                         double coupling_strength = 0.0103);

// zeta_alpha(r) = sqrt(omega_alpha / (eps0 * L)) * sin(alpha*pi*r/L); alpha is 1-based.
double mode_function(const CavityModel& cavity, int alpha, double r);

// Wigner transform of the atom-field coupling at field coordinates Q:
// sum_alpha omega_alpha * lambda_alpha * Q_alpha * mu  (m x m, symmetric).
std::vector<double> interaction_matrix(const AtomModel& atom, const CavityModel& cavity,
                                       std::span<const double> q);

} // namespace cqed
