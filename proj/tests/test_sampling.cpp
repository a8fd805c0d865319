#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "cqed/sampling.hpp"

using namespace cqed;

namespace {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

} // namespace

TEST_CASE("identical (seed, trajectory, cavity) reproduce bit-identical phase points") {
    const CavityModel cavity = build_cavity(40, 2.362e4, 1.181e4);
    EnsembleSpec spec;
    spec.n_traj = 100;
    spec.seed = 991;
    const PhasePoint a = sample_vacuum(cavity, spec, 17);
    const PhasePoint b = sample_vacuum(cavity, spec, 17);
    CHECK(a.q == b.q);
    CHECK(a.p == b.p);

    const PhasePoint c = sample_vacuum(cavity, spec, 18);
    CHECK(a.q != c.q);
    EnsembleSpec other = spec;
    other.seed = 992;
    CHECK(sample_vacuum(cavity, other, 17).q != a.q);
}

TEST_CASE("vacuum marginals have the Wigner widths") {
    // L = 2 pi c puts the fundamental at omega = 1.
    const double length = 2.0 * M_PI * Constants{}.c;
    const CavityModel cavity = build_cavity(2, length, 0.5 * length);
    EnsembleSpec spec;
    spec.n_traj = 1000000;
    spec.seed = 4242;

    SUBCASE("sample mean of Q vanishes within four standard errors") {
        const int n = 10000;
        double sum = 0.0;
        for (int j = 0; j < n; ++j) sum += sample_vacuum(cavity, spec, j).q[0];
        const double sigma = std::sqrt(0.5 / cavity.frequencies[0]);
        CHECK(std::abs(sum / n) < 4.0 * sigma / std::sqrt(static_cast<double>(n)));
    }

    SUBCASE("sample variance of Q at omega = 1 is 0.5 within 0.3 percent") {
        const int n = 1000000;
        double sum = 0.0, sum2 = 0.0;
        for (int j = 0; j < n; ++j) {
            const double q = sample_vacuum(cavity, spec, j).q[0];
            sum += q;
            sum2 += q * q;
        }
        const double mean = sum / n;
        const double var = sum2 / n - mean * mean;
        CHECK(var == doctest::Approx(0.5).epsilon(0.003));
    }

    SUBCASE("per-mode energy estimator averages to the zero-point 0.5") {
        const int n = 200000;
        double sum = 0.0;
        for (int j = 0; j < n; ++j) {
            const PhasePoint point = sample_vacuum(cavity, spec, j);
            for (int a = 0; a < cavity.n_modes; ++a) {
                const double omega = cavity.frequencies[a];
                sum += 0.5 * (point.p[a] * point.p[a] / omega + omega * point.q[a] * point.q[a]);
            }
        }
        const double mean = sum / (static_cast<double>(n) * cavity.n_modes);
        // Var of the per-mode estimator is 1/4.
        const double se = 0.5 / std::sqrt(static_cast<double>(n) * cavity.n_modes);
        CHECK(std::abs(mean - 0.5) < 4.0 * se);
    }
}

TEST_CASE("modes are sampled independently") {
    const CavityModel cavity = build_cavity(6, 2.362e4, 1.181e4);
    EnsembleSpec spec;
    spec.n_traj = 100000;
    spec.seed = 7;
    const int n = 100000;
    double s01 = 0.0, s0 = 0.0, s1 = 0.0;
    for (int j = 0; j < n; ++j) {
        const PhasePoint point = sample_vacuum(cavity, spec, j);
        s01 += point.q[0] * point.q[3];
        s0 += point.q[0];
        s1 += point.q[3];
    }
    const double cov = s01 / n - (s0 / n) * (s1 / n);
    const double sigma0 = std::sqrt(0.5 / cavity.frequencies[0]);
    const double sigma3 = std::sqrt(0.5 / cavity.frequencies[3]);
    CHECK(std::abs(cov) < 4.0 * sigma0 * sigma3 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("per-mode Kolmogorov-Smirnov statistic passes at the 1 percent level") {
    const CavityModel cavity = build_cavity(4, 2.362e4, 1.181e4);
    EnsembleSpec spec;
    spec.n_traj = 100000;
    spec.seed = 20230;
    const int n = 100000;
    for (int mode : {0, 3}) {
        std::vector<double> draws(n);
        for (int j = 0; j < n; ++j) draws[j] = sample_vacuum(cavity, spec, j).q[mode];
        std::sort(draws.begin(), draws.end());
        const double sigma = std::sqrt(0.5 / cavity.frequencies[mode]);
        double d = 0.0;
        for (int i = 0; i < n; ++i) {
            const double f = normal_cdf(draws[i] / sigma);
            d = std::max(d, std::abs(f - (i + 1.0) / n));
            d = std::max(d, std::abs(f - static_cast<double>(i) / n));
        }
        CHECK(d < 1.63 / std::sqrt(static_cast<double>(n)));
    }
}

TEST_CASE("ensemble weights validate") {
    EnsembleSpec spec;
    spec.n_traj = 3;
    spec.weights = {0.5, 0.25, 0.25};
    CHECK_NOTHROW(spec.validate());
    CHECK(spec.weight(0) == 0.5);
    spec.weights = {0.5, 0.25};
    CHECK_THROWS_AS(spec.validate(), config_error);
    spec.weights = {0.5, 0.25, 0.5};
    CHECK_THROWS_AS(spec.validate(), config_error);
    spec.weights.clear();
    CHECK(spec.weight(1) == doctest::Approx(1.0 / 3.0));
    spec.n_traj = 0;
    CHECK_THROWS_AS(spec.validate(), config_error);
}
