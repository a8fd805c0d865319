#include <algorithm>
#include <cmath>
#include <cstring>
#include <string>

#include "cqed/mtef.hpp"
#include "ehrenfest_engine.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace cqed {

std::vector<double> EnsembleResult::populations_at(double time) const {
    const int m = series_times.empty()
                      ? 0
                      : static_cast<int>(pop_mean.size() / series_times.size());
    for (std::size_t i = 0; i < series_times.size(); ++i)
        if (std::abs(series_times[i] - time) < 1e-9)
            return {pop_mean.begin() + static_cast<long>(i) * m,
                    pop_mean.begin() + static_cast<long>(i + 1) * m};
    throw domain_error("populations_at: time not in the series");
}

namespace {

struct SlotLayout {
    int m = 0;
    std::size_t n_series = 0;
    std::size_t n_snapshots = 0;
    std::size_t gi = 0, gg = 0, npairs = 0;

    std::size_t series_slots() const { return n_series * (m + 1); }
    std::size_t snapshot_slots() const { return gi + 2 * gg + npairs; }
    std::size_t total() const { return series_slots() + n_snapshots * snapshot_slots(); }
    std::size_t snapshot_offset(std::size_t s) const {
        return series_slots() + s * snapshot_slots();
    }
};

void fill_buffer(const TrajectoryResult& traj, const SlotLayout& layout,
                 const ZetaTables* tables, const EnsembleOptions& options,
                 SnapshotEstimates& scratch, double* buffer) {
    for (std::size_t t = 0; t < layout.n_series; ++t) {
        double* row = buffer + t * (layout.m + 1);
        for (int k = 0; k < layout.m; ++k) row[k] = traj.populations[t * layout.m + k];
        row[layout.m] = traj.photon_number[t];
    }
    for (std::size_t s = 0; s < layout.n_snapshots; ++s) {
        double* block = buffer + layout.snapshot_offset(s);
        if (tables == nullptr) continue;
        evaluate_snapshot(traj.snapshots[s].field, *tables, options.g2_variant,
                          options.intensity_variant, scratch);
        std::memcpy(block, scratch.intensity.data(), layout.gi * sizeof(double));
        std::memcpy(block + layout.gi, scratch.glauber_intensity.data(),
                    layout.gg * sizeof(double));
        std::memcpy(block + layout.gi + layout.gg, scratch.intensity_g2grid.data(),
                    layout.gg * sizeof(double));
        std::memcpy(block + layout.gi + 2 * layout.gg, scratch.g2_numerator.data(),
                    layout.npairs * sizeof(double));
    }
}

template <int M>
EnsembleResult ensemble_impl(const AtomModel& atom, const CavityModel& cavity,
                             const EnsembleSpec& spec, const RunPlan& plan,
                             const EnsembleOptions& options) {
    const int initial_level = options.initial_level < 0 ? M - 1 : options.initial_level;
    const AtomState initial_atom = AtomState::pure(M, initial_level);

    detail::Engine<M> prototype(atom, cavity, false);
    const detail::Segments segments = detail::build_segments(plan, atom, prototype);

    SlotLayout layout;
    layout.m = M;
    layout.n_series = plan.series_times.size();
    layout.n_snapshots = plan.snapshot_times.size();
    layout.gi = plan.r_grid.size();
    layout.gg = plan.g2_grid.size();
    layout.npairs = pair_count(layout.gg);

    ZetaTables tables;
    const bool field_obs = layout.n_snapshots > 0 && (layout.gi > 0 || layout.gg > 0);
    if (field_obs) tables = ZetaTables(cavity, plan.r_grid, plan.g2_grid);

    const std::size_t total = layout.total();
    std::vector<double> s1(total, 0.0), s2(total, 0.0), s3(total, 0.0);
    double s0 = 0.0, s4 = 0.0;

    EnsembleResult result;
    result.n_traj = spec.n_traj;
    result.series_times = plan.series_times;

    const int chunk = std::max(1, options.chunk_size);
    std::vector<std::vector<double>> buffers(chunk);
    std::vector<char> ok(chunk, 1);
    std::vector<double> drifts(chunk, 0.0);

#ifdef _OPENMP
    const int n_threads = options.threads > 0 ? options.threads : omp_get_max_threads();
#endif

    for (int base = 0; base < spec.n_traj; base += chunk) {
        const int count = std::min(chunk, spec.n_traj - base);
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(n_threads)
#endif
        for (int e = 0; e < count; ++e) {
            const int j = base + e;
            detail::Engine<M> engine(atom, cavity, false);
            SnapshotEstimates scratch;
            TrajectoryState initial;
            initial.atom = initial_atom;
            initial.field = sample_vacuum(cavity, spec, j);
            initial.time = 0.0;
            const TrajectoryResult traj =
                detail::run_trajectory_impl(initial, plan, atom, cavity, engine, segments);
            ok[e] = traj.ok ? 1 : 0;
            if (traj.ok) {
                drifts[e] = traj.max_energy_drift;
                if (buffers[e].size() != total) buffers[e].assign(total, 0.0);
                fill_buffer(traj, layout, field_obs ? &tables : nullptr, options, scratch,
                            buffers[e].data());
            }
        }
        // Fixed-order reduction: trajectory index order, independent of threads.
        for (int e = 0; e < count; ++e) {
            const int j = base + e;
            if (!ok[e]) {
                ++result.flagged_trajectories;
                continue;
            }
            const double w = spec.weight(j);
            s0 += w;
            s4 += w * w;
            result.max_energy_drift = std::max(result.max_energy_drift, drifts[e]);
            const double* x = buffers[e].data();
            double* p1 = s1.data();
            double* p2 = s2.data();
            double* p3 = s3.data();
            const double w2 = w * w;
            for (std::size_t i = 0; i < total; ++i) {
                p1[i] += w * x[i];
                p2[i] += w2 * x[i] * x[i];
                p3[i] += w2 * x[i];
            }
        }
    }

    if (result.flagged_trajectories > 0 &&
        result.flagged_trajectories * 100 > spec.n_traj)
        throw std::runtime_error("ensemble: " + std::to_string(result.flagged_trajectories) +
                                 " of " + std::to_string(spec.n_traj) +
                                 " trajectories diverged (over 1%)");
    if (s0 <= 0.0) throw std::runtime_error("ensemble: no valid trajectories");

    // Weighted mean and standard error with weights renormalized over the
    // valid trajectories: m = S1/S0, Var(m) = (S2 - 2 m S3 + m^2 S4) / S0^2.
    auto finalize = [&](std::size_t idx, double& mean, double& err) {
        mean = s1[idx] / s0;
        const double var = (s2[idx] - 2.0 * mean * s3[idx] + mean * mean * s4) / (s0 * s0);
        err = std::sqrt(std::max(0.0, var));
    };

    result.pop_mean.resize(layout.n_series * M);
    result.pop_err.resize(layout.n_series * M);
    result.photon_mean.resize(layout.n_series);
    result.photon_err.resize(layout.n_series);
    for (std::size_t t = 0; t < layout.n_series; ++t) {
        for (int k = 0; k < M; ++k)
            finalize(t * (M + 1) + k, result.pop_mean[t * M + k], result.pop_err[t * M + k]);
        finalize(t * (M + 1) + M, result.photon_mean[t], result.photon_err[t]);
    }

    for (std::size_t s = 0; s < layout.n_snapshots; ++s) {
        SnapshotEnsemble snap;
        snap.time = plan.snapshot_times[s];
        const std::size_t off = layout.snapshot_offset(s);
        snap.intensity_mean.resize(layout.gi);
        snap.intensity_err.resize(layout.gi);
        snap.glauber_mean.resize(layout.gg);
        snap.glauber_err.resize(layout.gg);
        snap.intensity_g2_mean.resize(layout.gg);
        snap.intensity_g2_err.resize(layout.gg);
        snap.g2num_mean.resize(layout.npairs);
        snap.g2num_err.resize(layout.npairs);
        for (std::size_t i = 0; i < layout.gi; ++i)
            finalize(off + i, snap.intensity_mean[i], snap.intensity_err[i]);
        for (std::size_t i = 0; i < layout.gg; ++i)
            finalize(off + layout.gi + i, snap.glauber_mean[i], snap.glauber_err[i]);
        for (std::size_t i = 0; i < layout.gg; ++i)
            finalize(off + layout.gi + layout.gg + i, snap.intensity_g2_mean[i],
                     snap.intensity_g2_err[i]);
        for (std::size_t i = 0; i < layout.npairs; ++i)
            finalize(off + layout.gi + 2 * layout.gg + i, snap.g2num_mean[i], snap.g2num_err[i]);
        if (layout.gg > 0) {
            const bool glauber = options.g2_denominator == G2Denominator::glauber;
            const auto& den_mean = glauber ? snap.glauber_mean : snap.intensity_g2_mean;
            const auto& den_err = glauber ? snap.glauber_err : snap.intensity_g2_err;
            snap.g2 = assemble_g2(snap.g2num_mean, snap.g2num_err, den_mean, den_err,
                                  options.g2_mask_rel);
            snap.cuts = g2_diagonal_cuts(snap.g2, plan.g2_grid);
        }
        result.snapshots.push_back(std::move(snap));
    }
    return result;
}

} // namespace

EnsembleResult run_ensemble(const AtomModel& atom, const CavityModel& cavity,
                            const EnsembleSpec& spec, const RunPlan& plan,
                            const EnsembleOptions& options) {
    atom.validate();
    cavity.validate();
    spec.validate();
    plan.validate(cavity.length);
    if (atom.levels == 2) return ensemble_impl<2>(atom, cavity, spec, plan, options);
    if (atom.levels == 3) return ensemble_impl<3>(atom, cavity, spec, plan, options);
    throw config_error("run_ensemble: unsupported level count");
}

} // namespace cqed
