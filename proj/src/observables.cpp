#include "cqed/observables.hpp"

#include <cmath>
#include <limits>

namespace cqed {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

std::vector<double> uniform_grid(double length, int n_points) {
    if (n_points < 2) throw domain_error("grid: need at least 2 points");
    std::vector<double> r(n_points);
    for (int i = 0; i < n_points; ++i)
        r[i] = length * static_cast<double>(i) / static_cast<double>(n_points - 1);
    return r;
}

ZetaTables::ZetaTables(const CavityModel& cavity, std::vector<double> intensity_grid,
                       std::vector<double> g2_grid)
    : n_modes(cavity.n_modes),
      intensity_r(std::move(intensity_grid)),
      g2_r(std::move(g2_grid)) {
    const std::size_t gi = intensity_r.size();
    const std::size_t gg = g2_r.size();
    c_int.assign(static_cast<std::size_t>(n_modes) * gi, 0.0);
    zeta2w_int.assign(static_cast<std::size_t>(n_modes) * gi, 0.0);
    zeta_g2.assign(static_cast<std::size_t>(n_modes) * gg, 0.0);
    f_int.assign(gi, 0.0);
    f_g2.assign(gg, 0.0);
    sqrt_half_omega.resize(n_modes);
    inv_sqrt_two_omega.resize(n_modes);
    for (int a = 0; a < n_modes; ++a) {
        const double omega = cavity.frequencies[a];
        sqrt_half_omega[a] = std::sqrt(0.5 * omega);
        inv_sqrt_two_omega[a] = 1.0 / std::sqrt(2.0 * omega);
        const double c2w = std::sqrt(2.0 * omega);
        for (std::size_t i = 0; i < gi; ++i) {
            const double z = mode_function(cavity, a + 1, intensity_r[i]);
            c_int[a * gi + i] = c2w * z;
            zeta2w_int[a * gi + i] = 2.0 * omega * z * z;
            f_int[i] += z * z;
        }
        for (std::size_t i = 0; i < gg; ++i) {
            const double z = mode_function(cavity, a + 1, g2_r[i]);
            zeta_g2[a * gg + i] = z;
            f_g2[i] += z * z;
        }
    }
    f_cross.assign(gg * gg, 0.0);
    for (std::size_t i = 0; i < gg; ++i)
        for (std::size_t j = 0; j < gg; ++j) {
            double f = 0.0;
            for (int a = 0; a < n_modes; ++a)
                f += zeta_g2[static_cast<std::size_t>(a) * gg + i] *
                     zeta_g2[static_cast<std::size_t>(a) * gg + j];
            f_cross[i * gg + j] = f;
        }
}

double photon_number(const PhasePoint& point, const CavityModel& cavity) {
    double n = 0.0;
    for (int a = 0; a < cavity.n_modes; ++a) {
        const double omega = cavity.frequencies[a];
        n += point.p[a] * point.p[a] / omega + omega * point.q[a] * point.q[a] - 1.0;
    }
    return 0.5 * n;
}

double intensity(const PhasePoint& point, const CavityModel& cavity, double r) {
    double field = 0.0;
    double f = 0.0;
    for (int a = 0; a < cavity.n_modes; ++a) {
        const double z = mode_function(cavity, a + 1, r);
        field += std::sqrt(2.0 * cavity.frequencies[a]) * z * point.q[a];
        f += z * z;
    }
    return field * field - f;
}

namespace {

// Variant (b): Weyl symbol of the Glauber correlator E-(r1)E-(r2)E+(r2)E+(r1),
// written with B(r) = sum_a zeta_a(r) (w_a Q_a + i P_a)/sqrt(2 w_a) and the
// trajectory-independent overlaps F. Contractions between a creation and an
// annihilation slot of the same mode carry -1/2 each.
double g2_full_from_amplitudes(double b1re, double b1im, double b2re, double b2im,
                               double f11, double f22, double f12) {
    const double n1 = b1re * b1re + b1im * b1im;
    const double n2 = b2re * b2re + b2im * b2im;
    const double re12 = b1re * b2re + b1im * b2im;
    return n1 * n2 - 0.5 * (2.0 * f12 * re12 + f11 * n2 + f22 * n1) +
           0.25 * (f12 * f12 + f11 * f22);
}

} // namespace

double g2_numerator(const PhasePoint& point, const CavityModel& cavity, double r1, double r2,
                    G2Variant variant) {
    const int n = cavity.n_modes;
    if (variant == G2Variant::full) {
        double b1re = 0.0, b1im = 0.0, b2re = 0.0, b2im = 0.0, f11 = 0.0, f22 = 0.0, f12 = 0.0;
        for (int a = 0; a < n; ++a) {
            const double omega = cavity.frequencies[a];
            const double z1 = mode_function(cavity, a + 1, r1);
            const double z2 = mode_function(cavity, a + 1, r2);
            const double zr = std::sqrt(0.5 * omega) * point.q[a];
            const double zi = point.p[a] / std::sqrt(2.0 * omega);
            b1re += z1 * zr;
            b1im += z1 * zi;
            b2re += z2 * zr;
            b2im += z2 * zi;
            f11 += z1 * z1;
            f22 += z2 * z2;
            f12 += z1 * z2;
        }
        return g2_full_from_amplitudes(b1re, b1im, b2re, b2im, f11, f22, f12);
    }
    // Variant (a): the printed Q-only polynomial, diagonal quartic term plus
    // the printed pair corrections.
    double quartic = 0.0, g12 = 0.0, g11 = 0.0, g22 = 0.0, f11 = 0.0, f22 = 0.0, f12 = 0.0;
    for (int a = 0; a < n; ++a) {
        const double omega = cavity.frequencies[a];
        const double z1 = mode_function(cavity, a + 1, r1);
        const double z2 = mode_function(cavity, a + 1, r2);
        const double w2 = 2.0 * omega * point.q[a] * point.q[a];
        quartic += w2 * w2 * z1 * z1 * z2 * z2;
        g12 += w2 * z1 * z2;
        g11 += w2 * z1 * z1;
        g22 += w2 * z2 * z2;
        f11 += z1 * z1;
        f22 += z2 * z2;
        f12 += z1 * z2;
    }
    return quartic - (4.0 * f12 * g12 + f22 * g11 + f11 * g22);
}

FieldAmplitude field_amplitude(const PhasePoint& point, const ZetaTables& tables) {
    const std::size_t g = tables.g2_r.size();
    FieldAmplitude amp;
    amp.re.assign(g, 0.0);
    amp.im.assign(g, 0.0);
    for (int a = 0; a < tables.n_modes; ++a) {
        const double qa = tables.sqrt_half_omega[a] * point.q[a];
        const double pa = tables.inv_sqrt_two_omega[a] * point.p[a];
        const double* zeta = &tables.zeta_g2[static_cast<std::size_t>(a) * g];
        for (std::size_t i = 0; i < g; ++i) {
            amp.re[i] += zeta[i] * qa;
            amp.im[i] += zeta[i] * pa;
        }
    }
    return amp;
}

void evaluate_snapshot(const PhasePoint& point, const ZetaTables& tables,
                       G2Variant g2_variant, IntensityVariant intensity_variant,
                       SnapshotEstimates& out) {
    const std::size_t gi = tables.intensity_r.size();
    const std::size_t gg = tables.g2_r.size();
    out.intensity.assign(gi, 0.0);
    out.glauber_intensity.assign(gg, 0.0);
    out.g2_numerator.assign(pair_count(gg), 0.0);

    double n = 0.0;
    for (int a = 0; a < tables.n_modes; ++a) {
        const double sq = tables.sqrt_half_omega[a] * point.q[a];
        const double sp = tables.inv_sqrt_two_omega[a] * point.p[a];
        n += sq * sq + sp * sp;  // (w Q^2 + P^2/w)/2
    }
    out.photon_number = n - 0.5 * tables.n_modes;

    if (intensity_variant == IntensityVariant::full) {
        std::vector<double> field(gi, 0.0);
        for (int a = 0; a < tables.n_modes; ++a) {
            const double qa = point.q[a];
            const double* c = &tables.c_int[static_cast<std::size_t>(a) * gi];
            for (std::size_t i = 0; i < gi; ++i) field[i] += c[i] * qa;
        }
        for (std::size_t i = 0; i < gi; ++i)
            out.intensity[i] = field[i] * field[i] - tables.f_int[i];
    } else {
        for (int a = 0; a < tables.n_modes; ++a) {
            const double q2 = point.q[a] * point.q[a];
            const double* z2w = &tables.zeta2w_int[static_cast<std::size_t>(a) * gi];
            for (std::size_t i = 0; i < gi; ++i) out.intensity[i] += z2w[i] * q2;
        }
        for (std::size_t i = 0; i < gi; ++i) out.intensity[i] -= tables.f_int[i];
    }

    const FieldAmplitude amp = field_amplitude(point, tables);
    out.intensity_g2grid.assign(gg, 0.0);
    for (std::size_t i = 0; i < gg; ++i) {
        out.glauber_intensity[i] =
            amp.re[i] * amp.re[i] + amp.im[i] * amp.im[i] - 0.5 * tables.f_g2[i];
        // E_cl(r) = 2 Re B(r), so the full normal-ordered intensity reuses amp.
        const double field = 2.0 * amp.re[i];
        out.intensity_g2grid[i] = field * field - tables.f_g2[i];
    }

    if (g2_variant == G2Variant::full) {
        std::size_t idx = 0;
        for (std::size_t i = 0; i < gg; ++i) {
            const double bire = amp.re[i], biim = amp.im[i];
            const double ni = bire * bire + biim * biim;
            const double fi = tables.f_g2[i];
            const double* fc = &tables.f_cross[i * gg];
            for (std::size_t j = i; j < gg; ++j, ++idx) {
                const double nj = amp.re[j] * amp.re[j] + amp.im[j] * amp.im[j];
                const double re12 = bire * amp.re[j] + biim * amp.im[j];
                const double f12 = fc[j];
                out.g2_numerator[idx] = ni * nj -
                                        0.5 * (2.0 * f12 * re12 + fi * nj + tables.f_g2[j] * ni) +
                                        0.25 * (f12 * f12 + fi * tables.f_g2[j]);
            }
        }
    } else {
        // Printed-variant Gram matrices: quartic term sum_a u_a(i) u_a(j) with
        // u_a = 2 w_a zeta_a^2 Q_a^2, pair term from v_a = sqrt(2 w_a) zeta_a |Q_a|.
        std::vector<double> u(static_cast<std::size_t>(tables.n_modes) * gg);
        std::vector<double> v(static_cast<std::size_t>(tables.n_modes) * gg);
        std::vector<double> g11(gg, 0.0);
        for (int a = 0; a < tables.n_modes; ++a) {
            const double q2 = point.q[a] * point.q[a];
            const double omega = 2.0 * tables.sqrt_half_omega[a] * tables.sqrt_half_omega[a];
            const double w2q2 = 2.0 * omega * q2;
            const double sv = std::sqrt(w2q2);
            const double* zeta = &tables.zeta_g2[static_cast<std::size_t>(a) * gg];
            double* ua = &u[static_cast<std::size_t>(a) * gg];
            double* va = &v[static_cast<std::size_t>(a) * gg];
            for (std::size_t i = 0; i < gg; ++i) {
                ua[i] = w2q2 * zeta[i] * zeta[i];
                va[i] = sv * zeta[i];
                g11[i] += ua[i];
            }
        }
        std::size_t idx = 0;
        for (std::size_t i = 0; i < gg; ++i) {
            for (std::size_t j = i; j < gg; ++j, ++idx) {
                double quartic = 0.0, g12 = 0.0;
                for (int a = 0; a < tables.n_modes; ++a) {
                    quartic += u[static_cast<std::size_t>(a) * gg + i] *
                               u[static_cast<std::size_t>(a) * gg + j];
                    g12 += v[static_cast<std::size_t>(a) * gg + i] *
                           v[static_cast<std::size_t>(a) * gg + j];
                }
                out.g2_numerator[idx] =
                    quartic - (4.0 * tables.f_cross[i * gg + j] * g12 +
                               tables.f_g2[j] * g11[i] + tables.f_g2[i] * g11[j]);
            }
        }
    }
}

G2Grid assemble_g2(std::span<const double> num_mean, std::span<const double> num_err,
                   std::span<const double> den_mean, std::span<const double> den_err,
                   double threshold_rel) {
    const std::size_t g = den_mean.size();
    if (num_mean.size() != pair_count(g))
        throw domain_error("assemble_g2: numerator/denominator size mismatch");
    double peak = 0.0;
    for (double d : den_mean) peak = std::max(peak, d);
    const double threshold = threshold_rel * peak;

    G2Grid out;
    out.n = static_cast<int>(g);
    out.value.assign(g * g, kNaN);
    out.error.assign(g * g, kNaN);
    for (std::size_t i = 0; i < g; ++i) {
        for (std::size_t j = i; j < g; ++j) {
            if (!(den_mean[i] > threshold) || !(den_mean[j] > threshold)) continue;
            const std::size_t k = pair_index(i, j, g);
            const double den = den_mean[i] * den_mean[j];
            const double val = num_mean[k] / den;
            double rel2 = 0.0;
            if (!num_err.empty() && num_mean[k] != 0.0) {
                const double rn = num_err[k] / num_mean[k];
                const double r1 = den_err[i] / den_mean[i];
                const double r2 = den_err[j] / den_mean[j];
                rel2 = rn * rn + r1 * r1 + r2 * r2;
            }
            const double err = std::abs(val) * std::sqrt(rel2);
            out.value[i * g + j] = val;
            out.value[j * g + i] = val;
            out.error[i * g + j] = err;
            out.error[j * g + i] = err;
        }
    }
    return out;
}

G2DiagonalCuts g2_diagonal_cuts(const G2Grid& grid, std::span<const double> r_grid) {
    const std::size_t g = r_grid.size();
    if (grid.n != static_cast<int>(g)) throw domain_error("g2_diagonal_cuts: grid size mismatch");
    const double length = r_grid.back();
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    G2DiagonalCuts cuts;
    cuts.r_plus.resize(g);
    cuts.g2_plus.resize(g);
    cuts.g2_plus_err.resize(g);
    cuts.r_minus.resize(g);
    cuts.g2_minus.resize(g);
    cuts.g2_minus_err.resize(g);
    for (std::size_t i = 0; i < g; ++i) {
        cuts.r_plus[i] = 2.0 * r_grid[i] * inv_sqrt2;
        cuts.g2_plus[i] = grid.value[i * g + i];
        cuts.g2_plus_err[i] = grid.error[i * g + i];
        // r1 = r_i, r2 = L - r_i lies on the grid for a uniform inclusive grid.
        const std::size_t j = g - 1 - i;
        cuts.r_minus[i] = (r_grid[i] - (length - r_grid[i])) * inv_sqrt2;
        cuts.g2_minus[i] = grid.value[i * g + j];
        cuts.g2_minus_err[i] = grid.error[i * g + j];
    }
    return cuts;
}

double g2_cut_asymmetry(const G2DiagonalCuts& cuts) {
    // Matching offsets: r_plus recentred on the atom equals r_minus for the
    // same grid index, so compare elementwise where both cuts are unmasked.
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < cuts.g2_plus.size(); ++i) {
        const double a = cuts.g2_plus[i];
        const double b = cuts.g2_minus[i];
        if (std::isnan(a) || std::isnan(b)) continue;
        sum += std::abs(a - b);
        ++count;
    }
    return count == 0 ? 0.0 : sum / static_cast<double>(count);
}

} // namespace cqed
