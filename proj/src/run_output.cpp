#include "cqed/run_output.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include <json.hpp>

#include "cqed/exact.hpp"

namespace cqed {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string time_label(double t) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%g", t);
    return buf;
}

std::ofstream open_output(const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write output file '" + path.string() + "'");
    return out;
}

void write_populations(const fs::path& path, const std::string& solver, int m,
                       const std::vector<double>& times, const std::vector<double>& mean,
                       const std::vector<double>& err) {
    auto out = open_output(path);
    out << "# cqed " << kVersion << "; units: atomic; solver: " << solver << "\n";
    out << "t";
    for (int k = 1; k <= m; ++k) out << ",p" << k;
    for (int k = 1; k <= m; ++k) out << ",p" << k << "_err";
    out << "\n";
    for (std::size_t t = 0; t < times.size(); ++t) {
        out << g17(times[t]);
        for (int k = 0; k < m; ++k) out << "," << g17(mean[t * m + k]);
        for (int k = 0; k < m; ++k) out << "," << g17(err.empty() ? 0.0 : err[t * m + k]);
        out << "\n";
    }
}

void write_photon_number(const fs::path& path, const std::string& solver,
                         const std::vector<double>& times, const std::vector<double>& mean,
                         const std::vector<double>& err) {
    auto out = open_output(path);
    out << "# cqed " << kVersion << "; units: atomic; solver: " << solver
        << "; estimator: normal-ordered photon number\n";
    out << "t,photon_number,photon_number_err\n";
    for (std::size_t t = 0; t < times.size(); ++t)
        out << g17(times[t]) << "," << g17(mean[t]) << "," << g17(err.empty() ? 0.0 : err[t])
            << "\n";
}

void write_intensity(const fs::path& path, const std::string& solver,
                     const std::string& variant, const std::vector<double>& r,
                     const std::vector<double>& mean, const std::vector<double>& err) {
    auto out = open_output(path);
    out << "# cqed " << kVersion << "; units: atomic; solver: " << solver
        << "; estimator: intensity=" << variant << "\n";
    out << "r,intensity,intensity_err\n";
    for (std::size_t i = 0; i < r.size(); ++i)
        out << g17(r[i]) << "," << g17(mean[i]) << "," << g17(err.empty() ? 0.0 : err[i]) << "\n";
}

void write_g2(const fs::path& path, const std::string& solver, const std::string& estimator,
              const std::vector<double>& r, const G2Grid& grid) {
    auto out = open_output(path);
    out << "# cqed " << kVersion << "; units: atomic; solver: " << solver
        << "; estimator: " << estimator << "; masked cells are empty\n";
    out << "r1,r2,g2,g2_err\n";
    const std::size_t g = r.size();
    for (std::size_t i = 0; i < g; ++i) {
        for (std::size_t j = 0; j < g; ++j) {
            const double v = grid.value[i * g + j];
            out << g17(r[i]) << "," << g17(r[j]) << ",";
            if (std::isnan(v)) {
                out << ",";
            } else {
                out << g17(v) << "," << g17(grid.error[i * g + j]);
            }
            out << "\n";
        }
    }
}

void write_g2_diag(const fs::path& path, const std::string& solver, const std::string& estimator,
                   const G2DiagonalCuts& cuts) {
    auto out = open_output(path);
    out << "# cqed " << kVersion << "; units: atomic; solver: " << solver
        << "; estimator: " << estimator << "; masked cells are empty\n";
    out << "r_plus,g2_plus,g2_plus_err,r_minus,g2_minus,g2_minus_err\n";
    for (std::size_t i = 0; i < cuts.r_plus.size(); ++i) {
        out << g17(cuts.r_plus[i]) << ",";
        if (std::isnan(cuts.g2_plus[i])) out << ",";
        else out << g17(cuts.g2_plus[i]) << "," << g17(cuts.g2_plus_err[i]);
        out << "," << g17(cuts.r_minus[i]) << ",";
        if (std::isnan(cuts.g2_minus[i])) out << ",";
        else out << g17(cuts.g2_minus[i]) << "," << g17(cuts.g2_minus_err[i]);
        out << "\n";
    }
}

bool detail_is_listed(const std::vector<double>& times, double t) {
    for (double v : times)
        if (std::abs(v - t) < 1e-9) return true;
    return false;
}

struct ExactRunData {
    std::vector<ExactSeriesPoint> series;
    std::vector<ExactFieldRecord> snapshots;
    std::size_t dimension = 0;
    std::size_t nonzeros = 0;
    double zero_point_energy = 0.0;
    double max_energy_drift = 0.0;
    double final_norm = 1.0;
    double top_shell_max = 0.0;
};

ExactRunData run_exact_solver(const RunConfig& config, const AtomModel& atom,
                              const CavityModel& cavity, const RunPlan& plan) {
    const CIBasis basis =
        enumerate_basis(atom, cavity, config.per_mode_cap, config.total_cap, config.max_states);
    const SparseHamiltonian h = build_hamiltonian(atom, cavity, basis);

    ExactRunData data;
    data.dimension = h.dim;
    data.nonzeros = h.nonzeros();
    data.zero_point_energy = h.zero_point_energy;

    PropagationOptions opts;
    opts.tolerance = config.tolerance;
    opts.krylov_dim = config.krylov_dim;

    CIState state = initial_ci_state(basis, config.initial_level);
    double e0 = 0.0;
    bool have_e0 = false;
    for (double t : plan.output_times()) {
        propagate_to(state, h, t, opts);
        const bool series = detail_is_listed(plan.series_times, t);
        const bool snapshot = detail_is_listed(plan.snapshot_times, t);
        if (series || snapshot) {
            ExactSeriesPoint point = exact_series_point(state, basis, h);
            if (!have_e0) {
                e0 = point.energy;
                have_e0 = true;
            } else {
                data.max_energy_drift =
                    std::max(data.max_energy_drift,
                             std::abs(point.energy - e0) / std::max(std::abs(e0), 1e-300));
            }
            data.top_shell_max = std::max(data.top_shell_max, point.top_shell_population);
            data.final_norm = point.norm;
            if (series) data.series.push_back(std::move(point));
        }
        if (snapshot)
            data.snapshots.push_back(
                exact_field_observables(state, basis, cavity, plan.r_grid, plan.g2_grid));
    }
    return data;
}

void write_mtef_outputs(const fs::path& dir, const RunConfig& config, const RunPlan& plan,
                        const EnsembleResult& result) {
    fs::create_directories(dir);
    const int m = config.levels;
    write_populations(dir / "populations.csv", "mtef", m, result.series_times, result.pop_mean,
                      result.pop_err);
    write_photon_number(dir / "photon_number.csv", "mtef", result.series_times,
                        result.photon_mean, result.photon_err);
    const std::string g2_est = "g2=" + config.g2_variant +
                               ", denominator=" + config.g2_denominator +
                               ", mask_rel=" + time_label(config.g2_mask_rel);
    for (const auto& snap : result.snapshots) {
        const std::string label = time_label(snap.time);
        if (!plan.r_grid.empty())
            write_intensity(dir / ("intensity_t" + label + ".csv"), "mtef",
                            config.intensity_variant, plan.r_grid, snap.intensity_mean,
                            snap.intensity_err);
        if (!plan.g2_grid.empty()) {
            write_g2(dir / ("g2_t" + label + ".csv"), "mtef", g2_est, plan.g2_grid, snap.g2);
            write_g2_diag(dir / ("g2_diag_t" + label + ".csv"), "mtef", g2_est, snap.cuts);
        }
    }
}

void write_exact_outputs(const fs::path& dir, const RunConfig& config, const RunPlan& plan,
                         const ExactRunData& data, const EnsembleOptions& options) {
    fs::create_directories(dir);
    const int m = config.levels;
    std::vector<double> times, pops, photon;
    for (const auto& point : data.series) {
        times.push_back(point.time);
        for (int k = 0; k < m; ++k) pops.push_back(point.populations[k]);
        photon.push_back(point.photon_number);
    }
    write_populations(dir / "populations.csv", "exact", m, times, pops, {});
    write_photon_number(dir / "photon_number.csv", "exact", times, photon, {});
    const std::string g2_est = "g2=fock, denominator=" + config.g2_denominator +
                               ", mask_rel=" + time_label(config.g2_mask_rel);
    const std::vector<double> zero_pairs(pair_count(plan.g2_grid.size()), 0.0);
    const std::vector<double> zero_grid(plan.g2_grid.size(), 0.0);
    for (const auto& snap : data.snapshots) {
        const std::string label = time_label(snap.time);
        if (!plan.r_grid.empty())
            write_intensity(dir / ("intensity_t" + label + ".csv"), "exact", "full", plan.r_grid,
                            snap.intensity, {});
        if (!plan.g2_grid.empty()) {
            const bool glauber = options.g2_denominator == G2Denominator::glauber;
            const auto& den = glauber ? snap.glauber_intensity : snap.intensity_g2grid;
            const G2Grid grid =
                assemble_g2(snap.g2_numerator, zero_pairs, den, zero_grid, options.g2_mask_rel);
            write_g2(dir / ("g2_t" + label + ".csv"), "exact", g2_est, plan.g2_grid, grid);
            write_g2_diag(dir / ("g2_diag_t" + label + ".csv"), "exact", g2_est,
                          g2_diagonal_cuts(grid, plan.g2_grid));
        }
    }
}

} // namespace

RunMode parse_run_mode(const std::string& text) {
    if (text == "mtef") return RunMode::mtef;
    if (text == "exact") return RunMode::exact;
    if (text == "both") return RunMode::both;
    throw config_error("mode must be one of mtef, exact, both");
}

RunSummary run(const RunConfig& config, RunMode mode, const fs::path& out_dir, int threads) {
    config.validate();
    const AtomModel atom = config.resolved_atom();
    const CavityModel cavity = config.resolved_cavity();
    const RunPlan plan = config.resolved_plan();
    plan.validate(cavity.length);

    const auto start = std::chrono::steady_clock::now();
    fs::create_directories(out_dir);

    RunSummary summary;
    json meta;
    meta["version"] = kVersion;
    meta["seed"] = config.seed;
    meta["config_text"] = config.to_ini_text();
    meta["mode"] = mode == RunMode::both ? "both" : (mode == RunMode::mtef ? "mtef" : "exact");

    if (mode == RunMode::mtef || mode == RunMode::both) {
        EnsembleOptions options = config.resolved_options();
        options.threads = threads;
        const EnsembleResult result =
            run_ensemble(atom, cavity, config.resolved_spec(), plan, options);
        write_mtef_outputs(out_dir / "mtef", config, plan, result);
        summary.flagged_trajectories = result.flagged_trajectories;
        summary.flagged_fraction =
            static_cast<double>(result.flagged_trajectories) / config.n_traj;
        if (summary.flagged_fraction > 1e-3)
            summary.warnings.push_back("mtef: " + std::to_string(result.flagged_trajectories) +
                                       " trajectories flagged divergent (over 0.1%)");
        meta["mtef"] = {{"n_traj", config.n_traj},
                        {"flagged_trajectories", result.flagged_trajectories},
                        {"max_energy_drift", result.max_energy_drift}};
    }
    if (mode == RunMode::exact || mode == RunMode::both) {
        const ExactRunData data = run_exact_solver(config, atom, cavity, plan);
        write_exact_outputs(out_dir / "exact", config, plan, data, config.resolved_options());
        meta["exact"] = {{"dimension", data.dimension},
                         {"nonzeros", data.nonzeros},
                         {"zero_point_energy", data.zero_point_energy},
                         {"max_energy_drift", data.max_energy_drift},
                         {"final_norm", data.final_norm},
                         {"top_shell_max", data.top_shell_max}};
    }

    summary.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    meta["wall_time_s"] = summary.wall_seconds;
    meta["warnings"] = summary.warnings;
    auto out = open_output(out_dir / "run_meta.json");
    out << meta.dump(2) << "\n";
    return summary;
}

namespace {

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;  // NaN encodes a masked cell
};

CsvTable read_csv(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read '" + path.string() + "'");
    CsvTable table;
    std::string line;
    bool have_header = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> cells;
        std::string cell;
        std::stringstream ss(line);
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (!line.empty() && line.back() == ',') cells.push_back("");
        if (!have_header) {
            table.header = cells;
            have_header = true;
            continue;
        }
        std::vector<double> row;
        for (const auto& c : cells) row.push_back(c.empty() ? kNaN : std::strtod(c.c_str(), nullptr));
        while (row.size() < table.header.size()) row.push_back(kNaN);
        table.rows.push_back(std::move(row));
    }
    return table;
}

bool is_coordinate_column(const std::string& name) {
    return name == "t" || name == "r" || name == "r1" || name == "r2" || name == "r_plus" ||
           name == "r_minus";
}

} // namespace

CompareReport compare_runs(const fs::path& dir_a, const fs::path& dir_b) {
    if (!fs::is_directory(dir_a) || !fs::is_directory(dir_b))
        throw config_error("compare: both arguments must be run directories");
    std::vector<std::string> names;
    for (const auto& entry : fs::directory_iterator(dir_a))
        if (entry.path().extension() == ".csv") names.push_back(entry.path().filename().string());
    std::sort(names.begin(), names.end());
    if (names.empty()) throw config_error("compare: no CSV files in '" + dir_a.string() + "'");

    CompareReport report;
    for (const auto& name : names) {
        const fs::path pb = dir_b / name;
        if (!fs::exists(pb))
            throw config_error("compare: '" + name + "' missing from '" + dir_b.string() + "'");
        const CsvTable a = read_csv(dir_a / name);
        const CsvTable b = read_csv(pb);
        if (a.header != b.header)
            throw config_error("compare: column mismatch in '" + name + "'");
        if (a.rows.size() != b.rows.size())
            throw config_error("compare: row count mismatch in '" + name + "' (" +
                               std::to_string(a.rows.size()) + " vs " +
                               std::to_string(b.rows.size()) + ")");
        FileDeviation dev;
        dev.file = name;
        double sum = 0.0;
        for (std::size_t r = 0; r < a.rows.size(); ++r) {
            for (std::size_t c = 0; c < a.header.size(); ++c) {
                const double va = a.rows[r][c];
                const double vb = b.rows[r][c];
                if (is_coordinate_column(a.header[c])) {
                    if (va != vb)
                        throw config_error("compare: grid mismatch in '" + name + "' row " +
                                           std::to_string(r + 1));
                    continue;
                }
                const bool ma = std::isnan(va), mb = std::isnan(vb);
                if (ma != mb) {
                    ++dev.mask_mismatches;
                    continue;
                }
                if (ma) continue;
                const double d = std::abs(va - vb);
                dev.max_abs = std::max(dev.max_abs, d);
                sum += d;
                ++dev.cells;
            }
        }
        dev.mean_abs = dev.cells > 0 ? sum / static_cast<double>(dev.cells) : 0.0;
        report.max_abs = std::max(report.max_abs, dev.max_abs);
        report.mask_mismatches += dev.mask_mismatches;
        report.files.push_back(dev);
    }
    return report;
}

std::string CompareReport::to_json() const {
    json j;
    j["max_abs_deviation"] = max_abs;
    j["mask_mismatches"] = mask_mismatches;
    j["files"] = json::array();
    for (const auto& f : files)
        j["files"].push_back({{"file", f.file},
                              {"cells", f.cells},
                              {"mask_mismatches", f.mask_mismatches},
                              {"max_abs_deviation", f.max_abs},
                              {"mean_abs_deviation", f.mean_abs}});
    return j.dump(2);
}

std::string CompareReport::to_text() const {
    std::ostringstream out;
    out << "file                          cells      max|dev|      mean|dev|  mask_mismatch\n";
    for (const auto& f : files) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "%-28s %8ld  %12.5g  %12.5g  %8ld\n", f.file.c_str(),
                      f.cells, f.max_abs, f.mean_abs, f.mask_mismatches);
        out << buf;
    }
    char buf[120];
    std::snprintf(buf, sizeof buf, "overall max |deviation| = %.5g, mask mismatches = %ld\n",
                  max_abs, mask_mismatches);
    out << buf;
    return out.str();
}

std::string estimate_cost_text(const RunConfig& config) {
    config.validate();
    const CavityModel cavity = config.resolved_cavity();
    const int coupled = cavity.coupled_mode_count();
    std::ostringstream out;
    out << "cavity: " << config.n_modes << " modes, " << coupled << " coupled\n";

    const int per_cap = std::min(config.per_mode_cap, config.total_cap);
    const std::uint64_t occ = count_occupations(coupled, per_cap, config.total_cap);
    const std::uint64_t dim = occ * static_cast<std::uint64_t>(config.levels);
    out << "exact: CI dimension = " << dim << " (" << occ << " occupations x " << config.levels
        << " levels)";
    if (dim > config.max_states)
        out << "  -- EXCEEDS budget max_states = " << config.max_states << ", run would refuse";
    out << "\n";
    out << "exact: state vector = " << (dim * 16) / (1024 * 1024) << " MiB\n";

    const long steps = std::lround(config.t_final / config.dt);
    out << "mtef: " << config.n_traj << " trajectories x " << steps << " RK4 steps over "
        << coupled << " coupled modes\n";
    const double flops = static_cast<double>(config.n_traj) * static_cast<double>(steps) *
                         (40.0 * coupled + 200.0);
    out << "mtef: rough propagation cost = " << time_label(flops / 1e9) << " Gflop\n";
    return out.str();
}

} // namespace cqed
