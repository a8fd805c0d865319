#include <algorithm>
#include <cmath>

#include "cqed/exact.hpp"

namespace cqed {

void SparseHamiltonian::apply(const std::complex<double>* x, std::complex<double>* y) const {
    for (std::size_t i = 0; i < dim; ++i) {
        std::complex<double> acc{0.0, 0.0};
        const std::uint32_t end = row_offsets[i + 1];
        for (std::uint32_t k = row_offsets[i]; k < end; ++k) acc += values[k] * x[cols[k]];
        y[i] = acc;
    }
}

double SparseHamiltonian::expectation(const std::vector<std::complex<double>>& psi) const {
    double e = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
        std::complex<double> acc{0.0, 0.0};
        const std::uint32_t end = row_offsets[i + 1];
        for (std::uint32_t k = row_offsets[i]; k < end; ++k) acc += values[k] * psi[cols[k]];
        e += (std::conj(psi[i]) * acc).real();
    }
    return e;
}

SparseHamiltonian build_hamiltonian(const AtomModel& atom, const CavityModel& cavity,
                                    const CIBasis& basis) {
    const std::size_t n_occ = basis.occupation_count();
    const int n_slots = static_cast<int>(basis.mode_index.size());
    const int m = basis.atom_levels;

    SparseHamiltonian h;
    h.dim = basis.dimension();
    for (int s = 0; s < n_slots; ++s) h.zero_point_energy += 0.5 * basis.mode_omega[s];
    h.row_offsets.reserve(h.dim + 1);
    h.row_offsets.push_back(0);

    // Dipole transitions per atomic level.
    std::vector<std::vector<int>> partners(m);
    for (int k = 0; k < m; ++k)
        for (int l = 0; l < m; ++l)
            if (l != k && atom.mu(k, l) != 0.0) partners[k].push_back(l);

    std::vector<std::pair<std::uint32_t, double>> row;
    for (int k = 0; k < m; ++k) {
        for (std::size_t occ = 0; occ < n_occ; ++occ) {
            row.clear();
            double diag = atom.energies[k];
            const auto [entries, count] = basis.occupation(occ);
            for (std::size_t e = 0; e < count; ++e)
                diag += entries[e].second * basis.mode_omega[entries[e].first];
            row.emplace_back(static_cast<std::uint32_t>(basis.state_index(k, occ)), diag);

            for (int l : partners[k]) {
                const double mu_kl = atom.mu(k, l);
                // Lowering couplings touch only occupied slots.
                for (std::size_t e = 0; e < count; ++e) {
                    const int slot = entries[e].first;
                    std::size_t occ_out;
                    double amp;
                    basis.lower(occ, slot, occ_out, amp);
                    const double factor = std::sqrt(0.5 / basis.mode_omega[slot]);
                    const double val = mu_kl * basis.mode_omega[slot] *
                                       basis.mode_coupling[slot] * factor * amp;
                    row.emplace_back(static_cast<std::uint32_t>(basis.state_index(l, occ_out)),
                                     val);
                }
                // Raising couplings over all slots, capped by the truncation.
                for (int slot = 0; slot < n_slots; ++slot) {
                    std::size_t occ_out;
                    double amp;
                    if (!basis.raise(occ, slot, occ_out, amp)) continue;
                    const double factor = std::sqrt(0.5 / basis.mode_omega[slot]);
                    const double val = mu_kl * basis.mode_omega[slot] *
                                       basis.mode_coupling[slot] * factor * amp;
                    row.emplace_back(static_cast<std::uint32_t>(basis.state_index(l, occ_out)),
                                     val);
                }
            }
            std::sort(row.begin(), row.end());
            for (const auto& [col, val] : row) {
                h.cols.push_back(col);
                h.values.push_back(val);
            }
            h.row_offsets.push_back(static_cast<std::uint32_t>(h.cols.size()));
        }
    }

    // Zero-point subtraction keeps diagonal magnitudes small; recorded above.
    // Atomic energies stay absolute, photon quanta enter as n * omega.
    return h;
}

double CIState::norm() const {
    double n = 0.0;
    for (const auto& a : amplitudes) n += std::norm(a);
    return std::sqrt(n);
}

CIState initial_ci_state(const CIBasis& basis, int level) {
    const int target = level < 0 ? basis.atom_levels - 1 : level;
    if (target < 0 || target >= basis.atom_levels)
        throw config_error("initial state: level out of range");
    CIState state;
    state.amplitudes.assign(basis.dimension(), {0.0, 0.0});
    state.amplitudes[basis.state_index(target, 0)] = {1.0, 0.0};
    return state;
}

} // namespace cqed
