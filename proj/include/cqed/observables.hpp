#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "cqed/model.hpp"
#include "cqed/sampling.hpp"

namespace cqed {

enum class G2Variant { full, paper };
enum class IntensityVariant { full, diagonal };
enum class G2Denominator { glauber, intensity };

// Uniform grid of n points on [0, L] including both endpoints.
std::vector<double> uniform_grid(double length, int n_points);

// Packed upper triangle (i <= j) of a g2-grid pair matrix.
inline std::size_t pair_index(std::size_t i, std::size_t j, std::size_t n) {
    return i * n - i * (i - 1) / 2 + (j - i);
}
inline std::size_t pair_count(std::size_t n) { return n * (n + 1) / 2; }

// Precomputed mode-function tables for a pair of spatial grids.
//   c_int[a][i]    = sqrt(2 w_a) zeta_a(r_i)          (intensity grid)
//   zeta_g2[a][i]  = zeta_a(r_i)                      (g2 grid)
//   f_*            = F(r,r) = sum_a zeta_a(r)^2
//   f_cross[i][j]  = F(r_i, r_j) on the g2 grid
struct ZetaTables {
    int n_modes = 0;
    std::vector<double> intensity_r;
    std::vector<double> g2_r;
    std::vector<double> c_int;
    std::vector<double> zeta2w_int;  // 2 w_a zeta_a(r)^2, for the diagonal intensity variant
    std::vector<double> zeta_g2;
    std::vector<double> f_int;
    std::vector<double> f_g2;
    std::vector<double> f_cross;
    std::vector<double> sqrt_half_omega;      // sqrt(w_a / 2)
    std::vector<double> inv_sqrt_two_omega;   // 1 / sqrt(2 w_a)

    ZetaTables() = default;
    ZetaTables(const CavityModel& cavity, std::vector<double> intensity_grid,
               std::vector<double> g2_grid);
};

// Weyl symbol of E+(r) = sum_a zeta_a(r) a_a evaluated at a phase point.
struct FieldAmplitude {
    std::vector<double> re;
    std::vector<double> im;
};

// Per-trajectory estimator bundle on the configured grids.
struct SnapshotEstimates {
    double photon_number = 0.0;
    std::vector<double> intensity;           // intensity grid
    std::vector<double> glauber_intensity;   // g2 grid
    std::vector<double> intensity_g2grid;    // normal-ordered intensity on the g2 grid
    std::vector<double> g2_numerator;        // packed pairs on g2 grid
};

// --- per-trajectory estimators (Wigner polynomial rule) ---

// 1/2 sum_a (P^2/w + w Q^2 - 1)
double photon_number(const PhasePoint& point, const CavityModel& cavity);

// Normal-ordered intensity at a single position (full double-mode sum).
double intensity(const PhasePoint& point, const CavityModel& cavity, double r);

// Normal-ordered G^2 numerator at one position pair, chosen variant.
double g2_numerator(const PhasePoint& point, const CavityModel& cavity, double r1, double r2,
                    G2Variant variant = G2Variant::full);

FieldAmplitude field_amplitude(const PhasePoint& point, const ZetaTables& tables);

// Fills all grid estimators for one trajectory.
void evaluate_snapshot(const PhasePoint& point, const ZetaTables& tables,
                       G2Variant g2_variant, IntensityVariant intensity_variant,
                       SnapshotEstimates& out);

// --- ensemble-level assembly ---

struct G2Grid {
    int n = 0;
    std::vector<double> value;  // n x n row-major; NaN marks masked cells
    std::vector<double> error;
};

// g2 = <G2 numerator> / (den(r1) den(r2)); cells with a denominator below
// threshold_rel * max(den) are masked. Errors combine by the delta method,
// trajectory correlations between numerator and denominator neglected.
G2Grid assemble_g2(std::span<const double> num_mean, std::span<const double> num_err,
                   std::span<const double> den_mean, std::span<const double> den_err,
                   double threshold_rel);

struct G2DiagonalCuts {
    std::vector<double> r_plus;   // (r1 + r2)/sqrt(2) along r1 = r2
    std::vector<double> g2_plus;
    std::vector<double> g2_plus_err;
    std::vector<double> r_minus;  // (r1 - r2)/sqrt(2) along r1 + r2 = L
    std::vector<double> g2_minus;
    std::vector<double> g2_minus_err;
};

G2DiagonalCuts g2_diagonal_cuts(const G2Grid& grid, std::span<const double> r_grid);

// Mean absolute difference between the r+ and r- cuts over cells where both
// are unmasked; the spatial asymmetry measure used for two-photon emission.
double g2_cut_asymmetry(const G2DiagonalCuts& cuts);

} // namespace cqed
