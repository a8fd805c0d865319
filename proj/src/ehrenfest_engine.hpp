#pragma once

// Internal Ehrenfest propagation machinery shared by run_trajectory and
// run_ensemble. Not installed; include only from src/.
//
// The atomic degree of freedom is integrated in propagator form,
// dU/dt = -i (H_A + s mu) U with rho(t) = U rho(0) U^dagger, followed by a
// first-order polar correction U <- U (I - (U^+U - I)/2) each step. The
// commutator form of the same equations loses positivity of rho at the
// 1e-9 level over 1e5 steps; the corrected propagator keeps rho positive,
// Hermitian and trace-one to machine precision at identical RK4 order.

#include <array>
#include <cmath>
#include <complex>
#include <vector>

#include "cqed/mtef.hpp"

namespace cqed::detail {

// Single RK4 step matrix of a free harmonic mode: the degree-4 Taylor
// truncation of exp(h A) with A = [[0,1],[-w^2,0]].
inline std::array<double, 4> rk4_free_step_matrix(double omega, double h) {
    const double th2 = (omega * h) * (omega * h);
    const double a = 1.0 - 0.5 * th2 + th2 * th2 / 24.0;
    const double b = h * (1.0 - th2 / 6.0);
    return {a, b, -omega * omega * b, a};
}

inline std::array<double, 4> mat2_mul(const std::array<double, 4>& x,
                                      const std::array<double, 4>& y) {
    return {x[0] * y[0] + x[1] * y[2], x[0] * y[1] + x[1] * y[3],
            x[2] * y[0] + x[3] * y[2], x[2] * y[1] + x[3] * y[3]};
}

inline std::array<double, 4> mat2_pow(std::array<double, 4> base, long n) {
    std::array<double, 4> out{1.0, 0.0, 0.0, 1.0};
    while (n > 0) {
        if (n & 1) out = mat2_mul(out, base);
        base = mat2_mul(base, base);
        n >>= 1;
    }
    return out;
}

template <int M>
class Engine {
public:
    Engine(const AtomModel& atom, const CavityModel& cavity, bool treat_all_coupled) {
        for (int k = 0; k < M; ++k) energies_[k] = atom.energies[k];
        for (int i = 0; i < M * M; ++i) mu_[i] = atom.dipole[i];
        for (int a = 0; a < cavity.n_modes; ++a) {
            const double omega = cavity.frequencies[a];
            if (treat_all_coupled || cavity.couplings[a] != 0.0) {
                coupled_index_.push_back(a);
                wl_.push_back(omega * cavity.couplings[a]);
                omega2_.push_back(omega * omega);
            } else {
                free_index_.push_back(a);
                free_omega_.push_back(omega);
            }
        }
        nc_ = static_cast<int>(coupled_index_.size());
        const std::size_t dim = state_size();
        x_.resize(dim);
        k1_.resize(dim);
        k2_.resize(dim);
        k3_.resize(dim);
        k4_.resize(dim);
        xt_.resize(dim);
        qf_.resize(free_index_.size());
        pf_.resize(free_index_.size());
    }

    std::size_t state_size() const { return 2 * M * M + 2 * static_cast<std::size_t>(nc_); }
    int coupled_count() const { return nc_; }
    const std::vector<int>& free_indices() const { return free_index_; }
    const std::vector<double>& free_omegas() const { return free_omega_; }

    void load(const TrajectoryState& state) {
        for (int i = 0; i < M * M; ++i) {
            rho0_re_[i] = state.atom.rho[i].real();
            rho0_im_[i] = state.atom.rho[i].imag();
        }
        // U(0) = identity.
        for (int i = 0; i < M * M; ++i) {
            x_[i] = 0.0;
            x_[M * M + i] = 0.0;
        }
        for (int k = 0; k < M; ++k) x_[k * M + k] = 1.0;
        double* qc = x_.data() + 2 * M * M;
        double* pc = qc + nc_;
        for (int i = 0; i < nc_; ++i) {
            qc[i] = state.field.q[coupled_index_[i]];
            pc[i] = state.field.p[coupled_index_[i]];
        }
        for (std::size_t i = 0; i < free_index_.size(); ++i) {
            qf_[i] = state.field.q[free_index_[i]];
            pf_[i] = state.field.p[free_index_[i]];
        }
    }

    void store(TrajectoryState& state) const {
        state.atom.levels = M;
        // rho = U rho0 U^+.
        double are[M * M], aim[M * M];
        const double* ure = x_.data();
        const double* uim = x_.data() + M * M;
        // A = U rho0
        for (int i = 0; i < M; ++i) {
            for (int j = 0; j < M; ++j) {
                double re = 0.0, im = 0.0;
                for (int k = 0; k < M; ++k) {
                    const double urek = ure[i * M + k], uimk = uim[i * M + k];
                    const double rre = rho0_re_[k * M + j], rim = rho0_im_[k * M + j];
                    re += urek * rre - uimk * rim;
                    im += urek * rim + uimk * rre;
                }
                are[i * M + j] = re;
                aim[i * M + j] = im;
            }
        }
        // rho = A U^+
        for (int i = 0; i < M; ++i) {
            for (int j = 0; j < M; ++j) {
                double re = 0.0, im = 0.0;
                for (int k = 0; k < M; ++k) {
                    const double ubre = ure[j * M + k], ubim = -uim[j * M + k];
                    re += are[i * M + k] * ubre - aim[i * M + k] * ubim;
                    im += are[i * M + k] * ubim + aim[i * M + k] * ubre;
                }
                state.atom.rho[i * M + j] = {re, im};
            }
        }
        const double* qc = x_.data() + 2 * M * M;
        const double* pc = qc + nc_;
        for (int i = 0; i < nc_; ++i) {
            state.field.q[coupled_index_[i]] = qc[i];
            state.field.p[coupled_index_[i]] = pc[i];
        }
        for (std::size_t i = 0; i < free_index_.size(); ++i) {
            state.field.q[free_index_[i]] = qf_[i];
            state.field.p[free_index_[i]] = pf_[i];
        }
    }

    void rk4_steps(long n, double h) {
        for (long s = 0; s < n; ++s) {
            deriv(x_.data(), k1_.data());
            add_scaled(x_, k1_, 0.5 * h, xt_);
            deriv(xt_.data(), k2_.data());
            add_scaled(x_, k2_, 0.5 * h, xt_);
            deriv(xt_.data(), k3_.data());
            add_scaled(x_, k3_, h, xt_);
            deriv(xt_.data(), k4_.data());
            const double w = h / 6.0;
            double* x = x_.data();
            const double* k1 = k1_.data();
            const double* k2 = k2_.data();
            const double* k3 = k3_.data();
            const double* k4 = k4_.data();
            const std::size_t dim = x_.size();
            for (std::size_t i = 0; i < dim; ++i)
                x[i] += w * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i]);
            polar_correct();
        }
    }

    void advance_free(const std::array<double, 4>* mats) {
        for (std::size_t i = 0; i < qf_.size(); ++i) {
            const auto& m = mats[i];
            const double q = qf_[i], p = pf_[i];
            qf_[i] = m[0] * q + m[1] * p;
            pf_[i] = m[2] * q + m[3] * p;
        }
    }

    // With no coupled modes, U stays diagonal and is advanced by the shared
    // per-segment phase factors.
    void advance_atom_diag(const std::complex<double>* maps) {
        double* ure = x_.data();
        double* uim = x_.data() + M * M;
        for (int k = 0; k < M; ++k) {
            const std::complex<double> u{ure[k * M + k], uim[k * M + k]};
            const std::complex<double> next = u * maps[k];
            ure[k * M + k] = next.real();
            uim[k * M + k] = next.imag();
        }
    }

    bool finite() const {
        double sum = 0.0;
        for (double v : x_) sum += v;
        return std::isfinite(sum);
    }

private:
    static void add_scaled(const std::vector<double>& x, const std::vector<double>& k, double a,
                           std::vector<double>& out) {
        const double* xp = x.data();
        const double* kp = k.data();
        double* op = out.data();
        const std::size_t dim = x.size();
        for (std::size_t i = 0; i < dim; ++i) op[i] = xp[i] + a * kp[i];
    }

    // First-order polar projection onto the unitary group. The defect
    // E = U^+U - I is O(dt^5) per step, so the quadratic remainder is far
    // below round-off.
    void polar_correct() {
        double* ure = x_.data();
        double* uim = x_.data() + M * M;
        double ere[M * M], eim[M * M];
        for (int i = 0; i < M; ++i) {
            for (int j = 0; j < M; ++j) {
                double re = 0.0, im = 0.0;
                for (int k = 0; k < M; ++k) {
                    re += ure[k * M + i] * ure[k * M + j] + uim[k * M + i] * uim[k * M + j];
                    im += ure[k * M + i] * uim[k * M + j] - uim[k * M + i] * ure[k * M + j];
                }
                ere[i * M + j] = re;
                eim[i * M + j] = im;
            }
            ere[i * M + i] -= 1.0;
        }
        double cre[M * M], cim[M * M];
        for (int i = 0; i < M; ++i) {
            for (int j = 0; j < M; ++j) {
                double re = 0.0, im = 0.0;
                for (int k = 0; k < M; ++k) {
                    re += ure[i * M + k] * ere[k * M + j] - uim[i * M + k] * eim[k * M + j];
                    im += ure[i * M + k] * eim[k * M + j] + uim[i * M + k] * ere[k * M + j];
                }
                cre[i * M + j] = re;
                cim[i * M + j] = im;
            }
        }
        for (int i = 0; i < M * M; ++i) {
            ure[i] -= 0.5 * cre[i];
            uim[i] -= 0.5 * cim[i];
        }
    }

    void deriv(const double* x, double* dx) const {
        const double* ure = x;
        const double* uim = x + M * M;
        const double* qc = x + 2 * M * M;
        const double* pc = qc + nc_;
        double* dure = dx;
        double* duim = dx + M * M;
        double* dqc = dx + 2 * M * M;
        double* dpc = dqc + nc_;

        const double* wl = wl_.data();
        const double* om2 = omega2_.data();

        double s = 0.0;
        for (int i = 0; i < nc_; ++i) s += wl[i] * qc[i];

        double h[M * M];
        for (int i = 0; i < M * M; ++i) h[i] = s * mu_[i];
        for (int k = 0; k < M; ++k) h[k * M + k] += energies_[k];

        // dU/dt = -i H U with real symmetric H.
        for (int i = 0; i < M; ++i) {
            for (int j = 0; j < M; ++j) {
                double hre = 0.0, him = 0.0;
                for (int k = 0; k < M; ++k) {
                    hre += h[i * M + k] * ure[k * M + j];
                    him += h[i * M + k] * uim[k * M + j];
                }
                dure[i * M + j] = him;
                duim[i * M + j] = -hre;
            }
        }

        // mu(t) = Re Tr(rho0 U^+ mu U); with A = mu U this is
        // sum_{ij} rho0_{ij} (U^+ A)_{ji}.
        double are[M * M], aim[M * M];
        for (int i = 0; i < M; ++i) {
            for (int j = 0; j < M; ++j) {
                double re = 0.0, im = 0.0;
                for (int k = 0; k < M; ++k) {
                    re += mu_[i * M + k] * ure[k * M + j];
                    im += mu_[i * M + k] * uim[k * M + j];
                }
                are[i * M + j] = re;
                aim[i * M + j] = im;
            }
        }
        double mu_t = 0.0;
        for (int j = 0; j < M; ++j) {
            for (int i = 0; i < M; ++i) {
                // (U^+ A)_{ji} = sum_k conj(U_{kj}) A_{ki}
                double bre = 0.0, bim = 0.0;
                for (int k = 0; k < M; ++k) {
                    bre += ure[k * M + j] * are[k * M + i] + uim[k * M + j] * aim[k * M + i];
                    bim += ure[k * M + j] * aim[k * M + i] - uim[k * M + j] * are[k * M + i];
                }
                mu_t += rho0_re_[i * M + j] * bre - rho0_im_[i * M + j] * bim;
            }
        }

        for (int i = 0; i < nc_; ++i) {
            dqc[i] = pc[i];
            dpc[i] = -om2[i] * qc[i] - wl[i] * mu_t;
        }
    }

    double energies_[M];
    double mu_[M * M];
    double rho0_re_[M * M] = {};
    double rho0_im_[M * M] = {};
    int nc_ = 0;
    std::vector<int> coupled_index_, free_index_;
    std::vector<double> wl_, omega2_, free_omega_;
    std::vector<double> x_, k1_, k2_, k3_, k4_, xt_, qf_, pf_;
};

struct Segments {
    std::vector<double> times;                     // output times, starts at 0
    std::vector<long> steps;                       // RK4 steps for segment i -> i+1
    std::vector<std::array<double, 4>> free_maps;  // segments x free modes
    std::vector<std::complex<double>> atom_maps;   // segments x levels, zero-coupling only
};

template <int M>
Segments build_segments(const RunPlan& plan, const AtomModel& atom, const Engine<M>& engine) {
    Segments seg;
    seg.times = plan.output_times();
    if (seg.times.empty() || seg.times.front() > 1e-12)
        seg.times.insert(seg.times.begin(), 0.0);
    const std::size_t nf = engine.free_indices().size();
    seg.steps.resize(seg.times.size() - 1);
    seg.free_maps.resize((seg.times.size() - 1) * nf);
    for (std::size_t i = 0; i + 1 < seg.times.size(); ++i) {
        const double span = seg.times[i + 1] - seg.times[i];
        seg.steps[i] = std::lround(span / plan.dt);
        for (std::size_t f = 0; f < nf; ++f)
            seg.free_maps[i * nf + f] =
                mat2_pow(rk4_free_step_matrix(engine.free_omegas()[f], plan.dt), seg.steps[i]);
    }
    if (engine.coupled_count() == 0) {
        // s(t) = 0 on every trajectory, so the atomic propagator is the same
        // diagonal RK4-with-polar-correction sequence everywhere; composed
        // once per segment here and reused by all trajectories.
        seg.atom_maps.resize((seg.times.size() - 1) * M);
        for (std::size_t i = 0; i + 1 < seg.times.size(); ++i) {
            for (int k = 0; k < M; ++k) {
                const std::complex<double> z{0.0, -atom.energies[k] * plan.dt};
                const std::complex<double> r =
                    1.0 + z * (1.0 + z * (0.5 + z * (1.0 / 6.0 + z / 24.0)));
                std::complex<double> u{1.0, 0.0};
                for (long s = 0; s < seg.steps[i]; ++s) {
                    u *= r;
                    u *= 1.0 - 0.5 * (std::norm(u) - 1.0);
                }
                seg.atom_maps[i * M + k] = u;
            }
        }
    }
    return seg;
}

inline bool is_listed(double t, const std::vector<double>& times) {
    for (double v : times)
        if (std::abs(v - t) < 1e-9) return true;
    return false;
}

template <int M>
TrajectoryResult run_trajectory_impl(const TrajectoryState& initial, const RunPlan& plan,
                                     const AtomModel& atom, const CavityModel& cavity,
                                     Engine<M>& engine, const Segments& segments) {
    TrajectoryResult result;
    engine.load(initial);

    TrajectoryState current = initial;
    const std::size_t nf = engine.free_indices().size();
    double e0 = 0.0;
    bool have_e0 = false;

    auto record = [&](double t) -> bool {
        engine.store(current);
        current.time = t;
        if (!engine.finite() || current.atom.trace_defect() > 1e-6) {
            result.ok = false;
            return false;
        }
        const double energy = ehrenfest_energy(current, atom, cavity);
        if (!have_e0) {
            e0 = energy;
            have_e0 = true;
        } else {
            const double scale = std::max(std::abs(e0), 1e-300);
            result.max_energy_drift =
                std::max(result.max_energy_drift, std::abs(energy - e0) / scale);
        }
        if (is_listed(t, plan.series_times)) {
            result.series_times.push_back(t);
            for (int k = 0; k < current.atom.levels; ++k)
                result.populations.push_back(current.atom.population(k));
            result.photon_number.push_back(photon_number(current.field, cavity));
            result.energy.push_back(energy);
        }
        if (is_listed(t, plan.snapshot_times)) result.snapshots.push_back(current);
        return true;
    };

    if (!record(segments.times.front())) return result;
    const bool decoupled = !segments.atom_maps.empty();
    for (std::size_t i = 0; i + 1 < segments.times.size(); ++i) {
        if (decoupled)
            engine.advance_atom_diag(&segments.atom_maps[i * M]);
        else
            engine.rk4_steps(segments.steps[i], plan.dt);
        if (nf > 0) engine.advance_free(&segments.free_maps[i * nf]);
        if (!record(segments.times[i + 1])) return result;
    }
    return result;
}

} // namespace cqed::detail
