#pragma once

#include <complex>
#include <cstdint>
#include <unordered_map>
#include <utility>
#include <vector>

#include "cqed/model.hpp"

namespace cqed {

// Excitation-truncated Fock basis over the coupled cavity modes, tensored
// with the atomic levels. Occupations are graded by total quanta and, within
// a shell, ordered by descending lexicographic occupation vector. Decoupled
// (zero-lambda) modes stay in the vacuum and are excluded.
class CIBasis {
public:
    int atom_levels = 0;
    int per_mode_cap = 0;
    int total_cap = 0;
    std::vector<int> mode_index;      // global cavity mode (0-based) per slot
    std::vector<double> mode_omega;   // per slot
    std::vector<double> mode_coupling;  // lambda per slot

    std::size_t occupation_count() const { return occ_offsets_.size() - 1; }
    std::size_t dimension() const { return atom_levels * occupation_count(); }

    // First occupation index with total quanta == shell (sorted by grading).
    std::size_t shell_start(int shell) const { return sector_start_[shell]; }
    int total_quanta(std::size_t occ) const { return occ_total_[occ]; }

    std::size_t state_index(int level, std::size_t occ) const {
        return static_cast<std::size_t>(level) * occupation_count() + occ;
    }
    int level_of(std::size_t state) const {
        return static_cast<int>(state / occupation_count());
    }
    std::size_t occupation_of(std::size_t state) const { return state % occupation_count(); }

    // Non-zero occupation entries of an occupation index: (slot, count) pairs.
    std::pair<const std::pair<std::uint16_t, std::uint8_t>*, std::size_t> occupation(
        std::size_t occ) const {
        return {occ_entries_.data() + occ_offsets_[occ], occ_offsets_[occ + 1] - occ_offsets_[occ]};
    }

    // a_slot: amplitude sqrt(n); false when the slot is empty.
    bool lower(std::size_t occ, int slot, std::size_t& occ_out, double& amp) const;
    // a^dagger_slot: amplitude sqrt(n+1); false when a cap would be exceeded.
    bool raise(std::size_t occ, int slot, std::size_t& occ_out, double& amp) const;

    // Used by enumerate_basis.
    void push_occupation(const std::vector<std::uint8_t>& occ_vector);
    void finalize_index();

private:
    std::uint64_t occupation_key(const std::pair<std::uint16_t, std::uint8_t>* entries,
                                 std::size_t count) const;

    std::vector<std::uint32_t> occ_offsets_{0};
    std::vector<std::pair<std::uint16_t, std::uint8_t>> occ_entries_;
    std::vector<std::uint16_t> occ_total_;
    std::vector<std::uint32_t> sector_start_;
    std::unordered_map<std::uint64_t, std::uint32_t> occ_lookup_;
};

// Number of admissible occupations (exact count, saturating at overflow).
std::uint64_t count_occupations(int n_slots, int per_mode_cap, int total_cap);

// Full basis enumeration; refuses if the dimension exceeds max_states.
// Decoupled modes evolve trivially and are excluded unless requested.
CIBasis enumerate_basis(const AtomModel& atom, const CavityModel& cavity, int per_mode_cap,
                        int total_cap, std::uint64_t max_states = 1000000,
                        bool include_decoupled = false);

// CSR of the (real symmetric) Hamiltonian in the CI basis, with the photon
// zero-point energy subtracted from the diagonal (recorded below).
struct SparseHamiltonian {
    std::size_t dim = 0;
    std::vector<std::uint32_t> row_offsets;
    std::vector<std::uint32_t> cols;
    std::vector<double> values;
    double zero_point_energy = 0.0;

    std::size_t nonzeros() const { return values.size(); }
    void apply(const std::complex<double>* x, std::complex<double>* y) const;
    double expectation(const std::vector<std::complex<double>>& psi) const;
};

SparseHamiltonian build_hamiltonian(const AtomModel& atom, const CavityModel& cavity,
                                    const CIBasis& basis);

struct CIState {
    std::vector<std::complex<double>> amplitudes;
    double time = 0.0;

    double norm() const;
};

// Atom in `level` (default: highest), all modes in the vacuum.
CIState initial_ci_state(const CIBasis& basis, int level = -1);

struct PropagationOptions {
    double tolerance = 1e-9;  // per-step Krylov error estimate
    int krylov_dim = 30;
    double max_step = 10.0;
};

// Short-iterative Lanczos propagation to t_target (in place).
void propagate_to(CIState& state, const SparseHamiltonian& hamiltonian, double t_target,
                  const PropagationOptions& options = {});

// Light per-time observables.
struct ExactSeriesPoint {
    double time = 0.0;
    std::vector<double> populations;
    double photon_number = 0.0;
    double energy = 0.0;  // <H> with the zero-point shift of the stored H
    double norm = 0.0;
    double top_shell_population = 0.0;
};

ExactSeriesPoint exact_series_point(const CIState& state, const CIBasis& basis,
                                    const SparseHamiltonian& hamiltonian);

// Full field observables on the given grids, same estimator contracts as the
// trajectory ensemble (Fock-space correlators instead of Wigner polynomials).
struct ExactFieldRecord {
    double time = 0.0;
    std::vector<double> intensity;          // full double-mode sum, intensity grid
    std::vector<double> glauber_intensity;  // <E- E+>, g2 grid
    std::vector<double> intensity_g2grid;   // full intensity on the g2 grid
    std::vector<double> g2_numerator;       // packed pairs: <E-E-E+E+>
};

ExactFieldRecord exact_field_observables(const CIState& state, const CIBasis& basis,
                                         const CavityModel& cavity,
                                         const std::vector<double>& r_grid,
                                         const std::vector<double>& g2_grid);

} // namespace cqed
