#include <doctest.h>

#include <cmath>
#include <random>

#include "cqed/model.hpp"

using namespace cqed;

TEST_CASE("default two-level atom carries the soft-Coulomb hydrogen parameters") {
    const AtomModel atom = build_default_atom(2);
    CHECK(atom.levels == 2);
    CHECK(atom.energies[0] == doctest::Approx(-0.6738).epsilon(1e-12));
    CHECK(atom.energies[1] == doctest::Approx(-0.2798).epsilon(1e-12));
    CHECK(atom.mu(0, 1) == doctest::Approx(1.034));
    CHECK(atom.mu(1, 0) == doctest::Approx(1.034));
    CHECK(atom.mu(0, 0) == 0.0);
    CHECK(atom.energies[1] - atom.energies[0] == doctest::Approx(0.3940).epsilon(1e-12));
}

TEST_CASE("default three-level atom couples only adjacent levels") {
    const AtomModel atom = build_default_atom(3);
    CHECK(atom.energies[2] == doctest::Approx(-0.1547));
    CHECK(atom.mu(0, 1) == doctest::Approx(1.034));
    CHECK(atom.mu(1, 2) == doctest::Approx(-2.536));
    CHECK(atom.mu(0, 2) == 0.0);
    CHECK(atom.mu(2, 0) == 0.0);
}

TEST_CASE("unsupported level counts are configuration errors") {
    CHECK_THROWS_AS(build_default_atom(1), config_error);
    CHECK_THROWS_AS(build_default_atom(4), config_error);
}

TEST_CASE("atom validation rejects broken inputs") {
    CHECK_THROWS_AS(build_atom({-0.5, -0.5}, {0, 1, 1, 0}), config_error);
    CHECK_THROWS_AS(build_atom({-0.5, -0.2}, {0, 1, 2, 0}), config_error);
}

TEST_CASE("cavity dispersion and couplings follow the mirror geometry") {
    const CavityModel cavity = build_cavity(400, 2.362e5, 2.362e5 / 2);
    const double omega1 = 2.0 * M_PI * cavity.constants.c / cavity.length;

    SUBCASE("fundamental frequency") {
        CHECK(cavity.frequencies[0] == doctest::Approx(3.645e-3).epsilon(2e-4));
    }
    SUBCASE("frequencies are linear in the mode index to round-off") {
        for (int a = 1; a <= 400; ++a) {
            const double expected = omega1 * a;
            CHECK(std::abs(cavity.frequencies[a - 1] - expected) <= 1e-14 * expected);
            if (a > 1) CHECK(cavity.frequencies[a - 1] > cavity.frequencies[a - 2]);
        }
    }
    SUBCASE("mode 108 lies closest to the atomic gap") {
        int best = 0;
        double best_dist = 1e300;
        for (int a = 1; a <= 400; ++a) {
            const double d = std::abs(cavity.frequencies[a - 1] - 0.3940);
            if (d < best_dist) {
                best_dist = d;
                best = a;
            }
        }
        CHECK(best == 108);
        CHECK(cavity.frequencies[107] == doctest::Approx(0.3937).epsilon(2e-4));
    }
    SUBCASE("even modes decouple exactly, odd couplings alternate") {
        CHECK(cavity.couplings[1] == 0.0);  // alpha = 2
        int zeros = 0;
        for (int a = 1; a <= 400; ++a) {
            const double lam = cavity.couplings[a - 1];
            if (lam == 0.0) {
                ++zeros;
                CHECK(a % 2 == 0);
            } else {
                CHECK(std::abs(lam) == doctest::Approx(0.0103));
                CHECK(lam == doctest::Approx(0.0103 * ((a % 4 == 1) ? 1.0 : -1.0)));
            }
        }
        CHECK(zeros == 200);
    }
}

TEST_CASE("cavity construction rejects unphysical parameters") {
    CHECK_THROWS_AS(build_cavity(0, 100.0, 50.0), config_error);
    CHECK_THROWS_AS(build_cavity(4, -1.0, 0.5), config_error);
    CHECK_THROWS_AS(build_cavity(4, 100.0, 100.0), config_error);  // atom on the mirror
}

TEST_CASE("mode functions vanish on the mirrors and peak at the centre") {
    const CavityModel cavity = build_cavity(8, 1000.0, 500.0);
    for (int a = 1; a <= 8; ++a) {
        CHECK(mode_function(cavity, a, 0.0) == doctest::Approx(0.0).epsilon(1e-30));
        CHECK(std::abs(mode_function(cavity, a, cavity.length)) < 1e-12);
    }
    const double expected =
        std::sqrt(cavity.frequencies[0] / (cavity.constants.eps0 * cavity.length));
    CHECK(mode_function(cavity, 1, 500.0) == doctest::Approx(expected).epsilon(1e-12));
    CHECK_THROWS_AS(mode_function(cavity, 1, -1.0), domain_error);
    CHECK_THROWS_AS(mode_function(cavity, 1, 1000.1), domain_error);
    CHECK_THROWS_AS(mode_function(cavity, 9, 10.0), domain_error);
}

TEST_CASE("interaction matrix is the dipole scaled by the field projection") {
    const AtomModel atom = build_default_atom(2);

    SUBCASE("zero field coordinates give a zero matrix") {
        const CavityModel cavity = build_cavity(6, 2.362e5, 2.362e5 / 2);
        const std::vector<double> q(6, 0.0);
        for (double v : interaction_matrix(atom, cavity, q)) CHECK(v == 0.0);
    }

    SUBCASE("single mode with unit frequency, coupling and displacement") {
        // L = 2 pi c makes omega_1 = 1 exactly; coupling strength 1 puts
        // lambda_1 = 1.
        const CavityModel cavity =
            build_cavity(1, 2.0 * M_PI * Constants{}.c, M_PI * Constants{}.c, Constants{}, 1.0);
        CHECK(cavity.frequencies[0] == doctest::Approx(1.0).epsilon(1e-14));
        const std::vector<double> q{1.0};
        const auto mat = interaction_matrix(atom, cavity, q);
        CHECK(mat[0] == 0.0);
        CHECK(mat[1] == doctest::Approx(1.034).epsilon(1e-14));
        CHECK(mat[2] == doctest::Approx(1.034).epsilon(1e-14));
        CHECK(mat[3] == 0.0);
    }

    SUBCASE("symmetric and linear in Q") {
        const AtomModel atom3 = build_default_atom(3);
        const CavityModel cavity = build_cavity(10, 5.0e4, 2.5e4);
        std::mt19937_64 rng(7);
        std::normal_distribution<double> dist(0.0, 10.0);
        std::vector<double> q1(10), q2(10), qmix(10);
        for (int i = 0; i < 10; ++i) {
            q1[i] = dist(rng);
            q2[i] = dist(rng);
            qmix[i] = 0.7 * q1[i] - 1.9 * q2[i];
        }
        const auto m1 = interaction_matrix(atom3, cavity, q1);
        const auto m2 = interaction_matrix(atom3, cavity, q2);
        const auto mmix = interaction_matrix(atom3, cavity, qmix);
        for (int k = 0; k < 3; ++k)
            for (int l = 0; l < 3; ++l) {
                CHECK(m1[k * 3 + l] == m1[l * 3 + k]);
                CHECK(mmix[k * 3 + l] ==
                      doctest::Approx(0.7 * m1[k * 3 + l] - 1.9 * m2[k * 3 + l]).epsilon(1e-12));
            }
    }

    SUBCASE("dimension mismatch is a domain error") {
        const CavityModel cavity = build_cavity(6, 2.362e5, 2.362e5 / 2);
        const std::vector<double> q(5, 0.0);
        CHECK_THROWS_AS(interaction_matrix(atom, cavity, q), domain_error);
    }
}
