#include "cqed/mtef.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ehrenfest_engine.hpp"

namespace cqed {

AtomState AtomState::pure(int levels, int level_index) {
    if (levels < 2 || levels > 3) throw config_error("atom state: levels must be 2 or 3");
    if (level_index < 0 || level_index >= levels)
        throw config_error("atom state: initial level out of range");
    AtomState state;
    state.levels = levels;
    state.rho.fill({0.0, 0.0});
    state.at(level_index, level_index) = {1.0, 0.0};
    return state;
}

double AtomState::trace_real() const {
    double t = 0.0;
    for (int k = 0; k < levels; ++k) t += at(k, k).real();
    return t;
}

double AtomState::trace_defect() const { return std::abs(trace_real() - 1.0); }

double AtomState::hermiticity_defect() const {
    double d = 0.0;
    for (int k = 0; k < levels; ++k)
        for (int l = 0; l < levels; ++l)
            d = std::max(d, std::abs(at(k, l) - std::conj(at(l, k))));
    return d;
}

namespace {

bool is_step_multiple(double t, double dt) {
    const double steps = t / dt;
    return std::abs(steps - std::round(steps)) < 1e-6;
}

} // namespace

void RunPlan::validate(double cavity_length) const {
    if (!(dt > 0.0)) throw config_error("plan: dt must be positive");
    if (!(t_final >= 0.0)) throw config_error("plan: t_final must be non-negative");
    auto check_times = [&](const std::vector<double>& times, const char* what) {
        for (double t : times) {
            if (t < 0.0 || t > t_final * (1.0 + 1e-12))
                throw config_error(std::string("plan: ") + what + " outside [0, t_final]");
            if (!is_step_multiple(t, dt))
                throw config_error(std::string("plan: ") + what + " " + std::to_string(t) +
                                   " is not an integer multiple of dt");
        }
    };
    check_times(snapshot_times, "snapshot time");
    check_times(series_times, "series time");
    for (double r : r_grid)
        if (r < 0.0 || r > cavity_length)
            throw config_error("plan: r_grid point outside [0, L]");
    for (double r : g2_grid)
        if (r < 0.0 || r > cavity_length)
            throw config_error("plan: g2 grid point outside [0, L]");
}

std::vector<double> RunPlan::output_times() const {
    std::vector<double> all = series_times;
    all.insert(all.end(), snapshot_times.begin(), snapshot_times.end());
    std::sort(all.begin(), all.end());
    std::vector<double> out;
    for (double t : all)
        if (out.empty() || t - out.back() > 1e-9) out.push_back(t);
    return out;
}

std::vector<double> make_series_times(double t_final, double interval) {
    if (!(interval > 0.0)) throw config_error("plan: series interval must be positive");
    std::vector<double> times;
    for (long k = 0;; ++k) {
        const double t = static_cast<double>(k) * interval;
        if (t > t_final * (1.0 + 1e-12)) break;
        times.push_back(t);
    }
    return times;
}

double mean_dipole(const AtomState& state, const AtomModel& atom) {
    double mu = 0.0;
    for (int k = 0; k < state.levels; ++k)
        for (int l = 0; l < state.levels; ++l)
            mu += state.at(k, l).real() * atom.mu(l, k);
    return mu;
}

double ehrenfest_energy(const TrajectoryState& state, const AtomModel& atom,
                        const CavityModel& cavity) {
    double e_atom = 0.0;
    for (int k = 0; k < state.atom.levels; ++k)
        e_atom += atom.energies[k] * state.atom.population(k);
    double e_field = 0.0, s = 0.0;
    for (int a = 0; a < cavity.n_modes; ++a) {
        const double omega = cavity.frequencies[a];
        e_field += 0.5 * (state.field.p[a] * state.field.p[a] +
                          omega * omega * state.field.q[a] * state.field.q[a]);
        s += omega * cavity.couplings[a] * state.field.q[a];
    }
    return e_atom + e_field + s * mean_dipole(state.atom, atom);
}

void step(TrajectoryState& state, const AtomModel& atom, const CavityModel& cavity, double dt) {
    if (!(dt > 0.0)) throw domain_error("step: dt must be positive");
    if (state.atom.levels == 2) {
        detail::Engine<2> engine(atom, cavity, /*treat_all_coupled=*/true);
        engine.load(state);
        engine.rk4_steps(1, dt);
        engine.store(state);
    } else if (state.atom.levels == 3) {
        detail::Engine<3> engine(atom, cavity, true);
        engine.load(state);
        engine.rk4_steps(1, dt);
        engine.store(state);
    } else {
        throw config_error("step: unsupported level count");
    }
    state.time += dt;
}

TrajectoryResult run_trajectory(const TrajectoryState& initial, const RunPlan& plan,
                                const AtomModel& atom, const CavityModel& cavity) {
    plan.validate(cavity.length);
    if (std::abs(initial.time) > 1e-12)
        throw domain_error("run_trajectory: initial state must start at t = 0");
    if (initial.atom.levels == 2) {
        detail::Engine<2> engine(atom, cavity, false);
        const detail::Segments segments = detail::build_segments(plan, atom, engine);
        return detail::run_trajectory_impl(initial, plan, atom, cavity, engine, segments);
    }
    if (initial.atom.levels == 3) {
        detail::Engine<3> engine(atom, cavity, false);
        const detail::Segments segments = detail::build_segments(plan, atom, engine);
        return detail::run_trajectory_impl(initial, plan, atom, cavity, engine, segments);
    }
    throw config_error("run_trajectory: unsupported level count");
}

} // namespace cqed
