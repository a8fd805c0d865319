#include <cmath>
#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "cqed/exact.hpp"
#include "cqed/observables.hpp"

namespace cqed {

namespace {

using Complex = std::complex<double>;

Eigen::MatrixXd slot_mode_functions(const CIBasis& basis, const CavityModel& cavity,
                                    const std::vector<double>& grid) {
    const int n_slots = static_cast<int>(basis.mode_index.size());
    Eigen::MatrixXd z(n_slots, grid.size());
    for (int s = 0; s < n_slots; ++s)
        for (std::size_t i = 0; i < grid.size(); ++i)
            z(s, static_cast<int>(i)) = mode_function(cavity, basis.mode_index[s] + 1, grid[i]);
    return z;
}

} // namespace

ExactSeriesPoint exact_series_point(const CIState& state, const CIBasis& basis,
                                    const SparseHamiltonian& hamiltonian) {
    ExactSeriesPoint point;
    point.time = state.time;
    point.populations.assign(basis.atom_levels, 0.0);
    const std::size_t n_occ = basis.occupation_count();
    double photon = 0.0, top = 0.0, nrm2 = 0.0;
    for (std::size_t i = 0; i < state.amplitudes.size(); ++i) {
        const double w = std::norm(state.amplitudes[i]);
        const std::size_t occ = i % n_occ;
        point.populations[i / n_occ] += w;
        photon += w * basis.total_quanta(occ);
        if (basis.total_quanta(occ) == basis.total_cap) top += w;
        nrm2 += w;
    }
    point.photon_number = photon;
    point.top_shell_population = top;
    point.norm = std::sqrt(nrm2);
    point.energy = hamiltonian.expectation(state.amplitudes);
    return point;
}

ExactFieldRecord exact_field_observables(const CIState& state, const CIBasis& basis,
                                         const CavityModel& cavity,
                                         const std::vector<double>& r_grid,
                                         const std::vector<double>& g2_grid) {
    const int n_slots = static_cast<int>(basis.mode_index.size());
    const int m = basis.atom_levels;
    const std::size_t n_occ = basis.occupation_count();
    const std::size_t p1 = basis.shell_start(basis.total_cap);  // occupations with total < cap

    ExactFieldRecord record;
    record.time = state.time;

    // Columns of V are a_slot |psi> restricted to the (total <= cap-1) prefix.
    Eigen::MatrixXcd v = Eigen::MatrixXcd::Zero(static_cast<long>(m * p1), n_slots);
    for (int k = 0; k < m; ++k) {
        for (std::size_t occ = basis.shell_start(1); occ < n_occ; ++occ) {
            const Complex amp_in = state.amplitudes[basis.state_index(k, occ)];
            if (amp_in == Complex{0.0, 0.0}) continue;
            const auto [entries, count] = basis.occupation(occ);
            for (std::size_t e = 0; e < count; ++e) {
                std::size_t occ_out;
                double amp;
                basis.lower(occ, entries[e].first, occ_out, amp);
                v(static_cast<long>(k * p1 + occ_out), entries[e].first) += amp * amp_in;
            }
        }
    }

    // One- and two-operator correlators: N_ab = <a+_a a_b>, S_ab = <a_a a_b>.
    const Eigen::MatrixXcd n_mat = v.adjoint() * v;
    Eigen::MatrixXcd s_mat = Eigen::MatrixXcd::Zero(n_slots, n_slots);
    for (int beta = 0; beta < n_slots; ++beta) {
        for (int k = 0; k < m; ++k) {
            for (std::size_t occ = std::min<std::size_t>(basis.shell_start(1), p1); occ < p1;
                 ++occ) {
                const Complex amp_in = v(static_cast<long>(k * p1 + occ), beta);
                if (amp_in == Complex{0.0, 0.0}) continue;
                const auto [entries, count] = basis.occupation(occ);
                for (std::size_t e = 0; e < count; ++e) {
                    std::size_t occ_out;
                    double amp;
                    basis.lower(occ, entries[e].first, occ_out, amp);
                    s_mat(entries[e].first, beta) +=
                        std::conj(state.amplitudes[basis.state_index(k, occ_out)]) * amp * amp_in;
                }
            }
        }
    }

    const Eigen::MatrixXd quad = 2.0 * (n_mat.real() + s_mat.real());

    if (!r_grid.empty()) {
        const Eigen::MatrixXd z = slot_mode_functions(basis, cavity, r_grid);
        const Eigen::MatrixXd w = quad * z;
        record.intensity.resize(r_grid.size());
        for (std::size_t i = 0; i < r_grid.size(); ++i)
            record.intensity[i] = z.col(static_cast<int>(i)).dot(w.col(static_cast<int>(i)));
    }

    if (!g2_grid.empty()) {
        const Eigen::MatrixXd zg = slot_mode_functions(basis, cavity, g2_grid);
        const std::size_t gg = g2_grid.size();
        record.glauber_intensity.resize(gg);
        record.intensity_g2grid.resize(gg);
        const Eigen::MatrixXd wn = n_mat.real() * zg;
        const Eigen::MatrixXd wq = quad * zg;
        for (std::size_t i = 0; i < gg; ++i) {
            record.glauber_intensity[i] =
                zg.col(static_cast<int>(i)).dot(wn.col(static_cast<int>(i)));
            record.intensity_g2grid[i] =
                zg.col(static_cast<int>(i)).dot(wq.col(static_cast<int>(i)));
        }

        // chi(r1) = E+(r1)|psi>, then Phi(r1, r2) = E+(r2) chi(r1); the packed
        // G2 numerator is |Phi|^2 summed over the (total <= cap-2) sector.
        const std::size_t p2 = basis.total_cap >= 2 ? basis.shell_start(basis.total_cap - 1) : 0;
        record.g2_numerator.assign(pair_count(gg), 0.0);
        const Eigen::MatrixXcd chi = v * zg;  // (m*p1) x gg
        Eigen::MatrixXcd u(static_cast<long>(m * p2), n_slots);
        for (std::size_t i = 0; i < gg; ++i) {
            if (p2 == 0) break;
            u.setZero();
            for (int k = 0; k < m; ++k) {
                for (std::size_t occ = std::min<std::size_t>(basis.shell_start(1), p1); occ < p1;
                     ++occ) {
                    const Complex amp_in = chi(static_cast<long>(k * p1 + occ),
                                               static_cast<int>(i));
                    if (amp_in == Complex{0.0, 0.0}) continue;
                    const auto [entries, count] = basis.occupation(occ);
                    for (std::size_t e = 0; e < count; ++e) {
                        std::size_t occ_out;
                        double amp;
                        basis.lower(occ, entries[e].first, occ_out, amp);
                        u(static_cast<long>(k * p2 + occ_out), entries[e].first) += amp * amp_in;
                    }
                }
            }
            const Eigen::MatrixXcd phi = u * zg;  // (m*p2) x gg
            for (std::size_t j = i; j < gg; ++j)
                record.g2_numerator[pair_index(i, j, gg)] =
                    phi.col(static_cast<int>(j)).squaredNorm();
        }
    }
    return record;
}

} // namespace cqed
