#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "cqed/exact.hpp"
#include "cqed/observables.hpp"
#include "support/fock_oracle.hpp"

using namespace cqed;

namespace {

// Reduced cavity whose 40 modes still bracket the atomic gap.
CavityModel reduced_cavity(int n_modes = 40, double coupling = 0.0103) {
    const double length = 2.362e4;
    return build_cavity(n_modes, length, 0.5 * length, Constants{}, coupling);
}

CavityModel resonant_single_mode_cavity() {
    const double omega = 0.3940;
    const double length = 2.0 * M_PI * Constants{}.c / omega;
    return build_cavity(1, length, 0.5 * length);
}

// A cavity with exactly two coupled slots (alpha = 1 and 3).
CavityModel two_slot_cavity() { return build_cavity(3, 2000.0, 1000.0); }

long fock_index(const CIBasis& basis, std::size_t occ, int per_mode_dim) {
    const auto [entries, count] = basis.occupation(occ);
    long idx = 0;
    std::vector<int> ns(basis.mode_index.size(), 0);
    for (std::size_t e = 0; e < count; ++e) ns[entries[e].first] = entries[e].second;
    for (std::size_t s = 0; s < ns.size(); ++s) idx = idx * per_mode_dim + ns[s];
    return idx;
}

} // namespace

TEST_CASE("basis enumeration counts match closed forms") {
    const AtomModel atom2 = build_default_atom(2);
    const AtomModel atom3 = build_default_atom(3);

    SUBCASE("two slots, both caps two: 2 x 6 states in the documented order") {
        const CIBasis basis = enumerate_basis(atom2, two_slot_cavity(), 2, 2);
        REQUIRE(basis.mode_index.size() == 2);
        CHECK(basis.dimension() == 12);
        // Graded then descending-lexicographic: 00, 10, 01, 20, 11, 02.
        const std::vector<std::vector<int>> expected{{0, 0}, {1, 0}, {0, 1},
                                                     {2, 0}, {1, 1}, {0, 2}};
        REQUIRE(basis.occupation_count() == expected.size());
        for (std::size_t occ = 0; occ < expected.size(); ++occ) {
            std::vector<int> got(2, 0);
            const auto [entries, count] = basis.occupation(occ);
            for (std::size_t e = 0; e < count; ++e) got[entries[e].first] = entries[e].second;
            CHECK(got == expected[occ]);
        }
    }

    SUBCASE("three levels, one mode, cap two: 9 states") {
        const CIBasis basis = enumerate_basis(atom3, resonant_single_mode_cavity(), 2, 2);
        CHECK(basis.dimension() == 9);
    }

    SUBCASE("paper-scale basis: 200 coupled modes, 40602 states") {
        const CavityModel cavity = build_cavity(400, 2.362e5, 1.181e5);
        CHECK(count_occupations(200, 2, 2) == 20301);
        const CIBasis basis = enumerate_basis(atom2, cavity, 2, 2, 100000);
        CHECK(basis.dimension() == 40602);
        CHECK(basis.shell_start(1) == 1);
        CHECK(basis.shell_start(2) == 201);
    }

    SUBCASE("budget refusal reports the computed dimension") {
        const CavityModel cavity = build_cavity(400, 2.362e5, 1.181e5);
        CHECK_THROWS_WITH_AS(enumerate_basis(atom2, cavity, 2, 2, 1000),
                             doctest::Contains("40602"), config_error);
    }
}

TEST_CASE("raise and lower are inverse ladder maps") {
    const AtomModel atom = build_default_atom(2);
    const CIBasis basis = enumerate_basis(atom, two_slot_cavity(), 2, 2);
    for (std::size_t occ = 0; occ < basis.occupation_count(); ++occ) {
        for (int slot = 0; slot < 2; ++slot) {
            std::size_t up;
            double amp_up;
            if (!basis.raise(occ, slot, up, amp_up)) continue;
            std::size_t down;
            double amp_down;
            REQUIRE(basis.lower(up, slot, down, amp_down));
            CHECK(down == occ);
            CHECK(amp_up == doctest::Approx(amp_down));
        }
    }
}

TEST_CASE("Hamiltonian matrix elements follow the ladder algebra") {
    const AtomModel atom = build_default_atom(2);
    const CavityModel cavity = resonant_single_mode_cavity();
    const CIBasis basis = enumerate_basis(atom, cavity, 3, 3);
    const SparseHamiltonian h = build_hamiltonian(atom, cavity, basis);
    const double omega = cavity.frequencies[0];
    const double lambda = cavity.couplings[0];

    auto entry = [&](std::size_t row, std::size_t col) {
        for (std::uint32_t k = h.row_offsets[row]; k < h.row_offsets[row + 1]; ++k)
            if (h.cols[k] == col) return h.values[k];
        return 0.0;
    };

    SUBCASE("<l, n+1| H |k, n> = mu w lambda sqrt((n+1)/(2w))") {
        for (int n = 0; n < 3; ++n) {
            const double expected =
                1.034 * omega * lambda * std::sqrt((n + 1) / (2.0 * omega));
            CHECK(entry(basis.state_index(1, n), basis.state_index(0, n + 1)) ==
                  doctest::Approx(expected).epsilon(1e-14));
        }
    }

    SUBCASE("diagonal carries atomic energy plus n omega, zero point subtracted") {
        CHECK(entry(basis.state_index(0, 2), basis.state_index(0, 2)) ==
              doctest::Approx(-0.6738 + 2.0 * omega).epsilon(1e-14));
        CHECK(h.zero_point_energy == doctest::Approx(0.5 * omega));
    }

    SUBCASE("Hermiticity holds entry by entry, exactly") {
        for (std::size_t i = 0; i < h.dim; ++i)
            for (std::uint32_t k = h.row_offsets[i]; k < h.row_offsets[i + 1]; ++k)
                CHECK(entry(h.cols[k], i) == h.values[k]);
    }
}

TEST_CASE("zero coupling leaves the Hamiltonian block diagonal in occupations") {
    const AtomModel atom = build_default_atom(2);
    const CavityModel cavity = build_cavity(3, 2000.0, 1000.0, Constants{}, 0.0);
    const CIBasis basis = enumerate_basis(atom, cavity, 2, 2, 1000000, /*include_decoupled=*/true);
    const SparseHamiltonian h = build_hamiltonian(atom, cavity, basis);
    for (std::size_t i = 0; i < h.dim; ++i)
        for (std::uint32_t k = h.row_offsets[i]; k < h.row_offsets[i + 1]; ++k)
            if (h.values[k] != 0.0) CHECK(basis.occupation_of(h.cols[k]) == basis.occupation_of(i));

    // Propagation from the excited state only rotates the global phase.
    CIState state = initial_ci_state(basis);
    propagate_to(state, h, 321.0);
    const ExactSeriesPoint point = exact_series_point(state, basis, h);
    CHECK(point.populations[1] == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(point.photon_number == doctest::Approx(0.0).scale(1.0).epsilon(1e-10));
    const std::complex<double> amp = state.amplitudes[basis.state_index(1, 0)];
    CHECK(std::abs(amp) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("resonant Jaynes-Cummings limit: vacuum Rabi oscillation at period pi/g") {
    const AtomModel atom = build_default_atom(2);
    const CavityModel cavity = resonant_single_mode_cavity();
    const CIBasis basis = enumerate_basis(atom, cavity, 2, 2);
    const SparseHamiltonian h = build_hamiltonian(atom, cavity, basis);
    const double g = cavity.couplings[0] * 1.034 * std::sqrt(0.5 * cavity.frequencies[0]);
    CHECK(g == doctest::Approx(4.73e-3).epsilon(2e-3));

    CIState state = initial_ci_state(basis);
    PropagationOptions opts;
    std::vector<double> pops;
    for (double t = 0.0; t <= 500.0; t += 2.0) {
        propagate_to(state, h, t, opts);
        pops.push_back(exact_series_point(state, basis, h).populations[1]);
    }
    double min_pop = 2.0, min_time = 0.0;
    for (std::size_t i = 1; i + 1 < pops.size(); ++i)
        if (pops[i] < 0.1 && pops[i] <= pops[i - 1] && pops[i] <= pops[i + 1]) {
            min_pop = pops[i];
            min_time = 2.0 * static_cast<double>(i);
            break;
        }
    const double period = 2.0 * min_time;
    CHECK(std::abs(period - M_PI / g) / (M_PI / g) < 0.02);
    CHECK(min_pop < 0.02);  // full transfer at resonance, small BS correction
}

TEST_CASE("Krylov propagation matches the dense matrix exponential") {
    const AtomModel atom2 = build_default_atom(2);
    const AtomModel atom3 = build_default_atom(3);
    const std::vector<double> times{50.0, 300.0, 900.0};

    auto check_instance = [&](const AtomModel& atom, const CavityModel& cavity, int per_cap,
                              int total_cap) {
        const CIBasis basis = enumerate_basis(atom, cavity, per_cap, total_cap);
        const SparseHamiltonian h = build_hamiltonian(atom, cavity, basis);
        REQUIRE(h.dim <= 200);
        const CIState initial = initial_ci_state(basis);
        Eigen::VectorXcd psi0(h.dim);
        for (std::size_t i = 0; i < h.dim; ++i) psi0(static_cast<long>(i)) = initial.amplitudes[i];
        const std::vector<Eigen::VectorXcd> reference = oracle::dense_propagate(h, psi0, times);

        CIState state = initial;
        for (std::size_t s = 0; s < times.size(); ++s) {
            propagate_to(state, h, times[s]);
            double diff2 = 0.0;
            for (std::size_t i = 0; i < h.dim; ++i)
                diff2 += std::norm(state.amplitudes[i] - reference[s](static_cast<long>(i)));
            CHECK(std::sqrt(diff2) < 1e-8);
            CHECK(std::abs(state.norm() - 1.0) < 1e-8);
        }
    };

    check_instance(atom2, resonant_single_mode_cavity(), 2, 2);            // dim 6
    check_instance(atom3, resonant_single_mode_cavity(), 2, 2);            // dim 9
    check_instance(atom2, build_cavity(6, 2.362e4, 1.181e4), 2, 2);        // dim 20
    check_instance(atom2, build_cavity(24, 2.362e4, 1.181e4), 2, 2);       // dim 182
    check_instance(atom3, build_cavity(8, 2.362e4, 1.181e4), 1, 2);        // mixed caps
}

TEST_CASE("exact energy is conserved through the propagation") {
    const AtomModel atom = build_default_atom(2);
    const CavityModel cavity = reduced_cavity();
    const CIBasis basis = enumerate_basis(atom, cavity, 2, 2);
    const SparseHamiltonian h = build_hamiltonian(atom, cavity, basis);
    CIState state = initial_ci_state(basis);
    const double e0 = h.expectation(state.amplitudes);
    for (double t : {100.0, 400.0, 800.0}) {
        propagate_to(state, h, t);
        CHECK(std::abs(h.expectation(state.amplitudes) - e0) <
              1e-8 * std::max(1.0, std::abs(e0)));
    }
}

TEST_CASE("truncation check: the cap-3 shell stays essentially empty") {
    const AtomModel atom = build_default_atom(2);
    const CavityModel cavity = reduced_cavity(20);
    const CIBasis basis = enumerate_basis(atom, cavity, 2, 3);
    const SparseHamiltonian h = build_hamiltonian(atom, cavity, basis);
    CIState state = initial_ci_state(basis);
    double top_max = 0.0;
    for (double t = 50.0; t <= 600.0; t += 50.0) {
        propagate_to(state, h, t);
        top_max = std::max(top_max, exact_series_point(state, basis, h).top_shell_population);
    }
    CHECK(top_max < 1e-3);
}

TEST_CASE("vacuum with a ground-state atom has exactly zero field observables") {
    const AtomModel atom = build_default_atom(2);
    const CavityModel cavity = two_slot_cavity();
    const CIBasis basis = enumerate_basis(atom, cavity, 2, 2);
    CIState state = initial_ci_state(basis, 0);
    const std::vector<double> grid = uniform_grid(cavity.length, 5);
    const ExactFieldRecord record = exact_field_observables(state, basis, cavity, grid, grid);
    for (double v : record.intensity) CHECK(v == 0.0);
    for (double v : record.glauber_intensity) CHECK(v == 0.0);
    for (double v : record.g2_numerator) CHECK(v == 0.0);
}

TEST_CASE("a single photon is perfectly anti-bunched") {
    const AtomModel atom = build_default_atom(2);
    const CavityModel cavity = resonant_single_mode_cavity();
    const CIBasis basis = enumerate_basis(atom, cavity, 2, 2);
    CIState state;
    state.amplitudes.assign(basis.dimension(), {0.0, 0.0});
    state.amplitudes[basis.state_index(0, 1)] = {1.0, 0.0};  // ground atom, one photon
    const std::vector<double> grid = uniform_grid(cavity.length, 5);
    const ExactFieldRecord record = exact_field_observables(state, basis, cavity, grid, grid);
    // Positive intensity away from the mirrors, identically zero pair counts.
    CHECK(record.glauber_intensity[2] > 0.0);
    for (double v : record.g2_numerator) CHECK(v == doctest::Approx(0.0).scale(1.0));

    const std::vector<double> zeros_p(record.g2_numerator.size(), 0.0);
    const std::vector<double> zeros_g(grid.size(), 0.0);
    const G2Grid g2 = assemble_g2(record.g2_numerator, zeros_p, record.glauber_intensity,
                                  zeros_g, 1e-3);
    CHECK(g2.value[2 * grid.size() + 2] == doctest::Approx(0.0).scale(1.0));
}

TEST_CASE("exact field correlators match the dense Fock oracle") {
    const AtomModel atom = build_default_atom(2);
    const CavityModel cavity = two_slot_cavity();
    const CIBasis basis = enumerate_basis(atom, cavity, 2, 2);
    const SparseHamiltonian h = build_hamiltonian(atom, cavity, basis);
    CIState state = initial_ci_state(basis);
    propagate_to(state, h, 700.0);

    const std::vector<double> grid{300.0, 650.0, 1411.5};
    const ExactFieldRecord record = exact_field_observables(state, basis, cavity, grid, grid);

    oracle::FockSpace space;
    space.omegas = {basis.mode_omega[0], basis.mode_omega[1]};
    space.per_mode_dim = 3;  // cap 2 per mode
    std::vector<std::vector<double>> zeta(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i)
        for (std::size_t s = 0; s < basis.mode_index.size(); ++s)
            zeta[i].push_back(mode_function(cavity, basis.mode_index[s] + 1, grid[i]));

    // Project per atomic level, evaluate with dense operators, and sum.
    auto block_state = [&](int level) {
        oracle::Vec psi = oracle::Vec::Zero(space.dim());
        for (std::size_t occ = 0; occ < basis.occupation_count(); ++occ)
            psi(fock_index(basis, occ, space.per_mode_dim)) =
                state.amplitudes[basis.state_index(level, occ)];
        return psi;
    };
    for (std::size_t i = 0; i < grid.size(); ++i) {
        double glauber = 0.0, full = 0.0;
        for (int level = 0; level < 2; ++level) {
            glauber += oracle::glauber_intensity(space, block_state(level), zeta[i]);
            full += oracle::full_intensity(space, block_state(level), zeta[i]);
        }
        CHECK(record.glauber_intensity[i] == doctest::Approx(glauber).epsilon(1e-10).scale(1.0));
        CHECK(record.intensity_g2grid[i] == doctest::Approx(full).epsilon(1e-10).scale(1.0));
        for (std::size_t j = i; j < grid.size(); ++j) {
            double g2num = 0.0;
            for (int level = 0; level < 2; ++level)
                g2num += oracle::glauber_g2_numerator(space, block_state(level), zeta[i], zeta[j]);
            CHECK(record.g2_numerator[pair_index(i, j, grid.size())] ==
                  doctest::Approx(g2num).epsilon(1e-9).scale(1.0));
        }
    }
}

TEST_CASE("propagation guards reject inconsistent inputs") {
    const AtomModel atom = build_default_atom(2);
    const CavityModel cavity = resonant_single_mode_cavity();
    const CIBasis basis = enumerate_basis(atom, cavity, 2, 2);
    const SparseHamiltonian h = build_hamiltonian(atom, cavity, basis);
    CIState state = initial_ci_state(basis);
    state.time = 10.0;
    CHECK_THROWS_AS(propagate_to(state, h, 5.0), domain_error);
    CIState wrong;
    wrong.amplitudes.assign(3, {0.0, 0.0});
    CHECK_THROWS_AS(propagate_to(wrong, h, 5.0), domain_error);
}
