#include "cqed/config.hpp"

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace cqed {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

[[noreturn]] void fail(int line, const std::string& msg) {
    throw config_error("config line " + std::to_string(line) + ": " + msg);
}

double parse_double(const std::string& value, const std::string& key, int line) {
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(value.c_str(), &end);
    if (end == value.c_str() || *end != '\0' || errno == ERANGE)
        fail(line, "key '" + key + "' expects a number, got '" + value + "'");
    return v;
}

long long parse_int(const std::string& value, const std::string& key, int line) {
    errno = 0;
    char* end = nullptr;
    const long long v = std::strtoll(value.c_str(), &end, 10);
    if (end == value.c_str() || *end != '\0' || errno == ERANGE)
        fail(line, "key '" + key + "' expects an integer, got '" + value + "'");
    return v;
}

std::uint64_t parse_u64(const std::string& value, const std::string& key, int line) {
    errno = 0;
    char* end = nullptr;
    const unsigned long long v = std::strtoull(value.c_str(), &end, 10);
    if (end == value.c_str() || *end != '\0' || errno == ERANGE)
        fail(line, "key '" + key + "' expects a non-negative integer, got '" + value + "'");
    return v;
}

std::vector<double> parse_double_list(const std::string& value, const std::string& key, int line) {
    std::vector<double> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) fail(line, "key '" + key + "' has an empty list entry");
        out.push_back(parse_double(item, key, line));
    }
    if (out.empty()) fail(line, "key '" + key + "' expects a comma-separated list");
    return out;
}

std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string format_list(const std::vector<double>& values) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out += ", ";
        out += format_g17(values[i]);
    }
    return out;
}

} // namespace

RunConfig parse_config(const std::string& text) {
    RunConfig cfg;
    bool dipole_touched = false;

    std::istringstream in(text);
    std::string raw;
    std::string section;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        std::string s = raw;
        const std::size_t hash = s.find_first_of("#;");
        if (hash != std::string::npos) s = s.substr(0, hash);
        s = trim(s);
        if (s.empty()) continue;
        if (s.front() == '[') {
            if (s.back() != ']') fail(line, "malformed section header '" + s + "'");
            section = trim(s.substr(1, s.size() - 2));
            if (section != "model" && section != "cavity" && section != "mtef" &&
                section != "exact" && section != "output" && section != "estimators")
                fail(line, "unknown section '" + section + "'");
            continue;
        }
        const std::size_t eq = s.find('=');
        if (eq == std::string::npos) fail(line, "expected 'key = value', got '" + s + "'");
        const std::string key = trim(s.substr(0, eq));
        const std::string value = trim(s.substr(eq + 1));
        if (key.empty() || value.empty()) fail(line, "empty key or value");
        if (section.empty()) fail(line, "key '" + key + "' appears before any [section]");

        auto unknown = [&]() { fail(line, "unknown key '" + key + "' in [" + section + "]"); };

        if (section == "model") {
            if (key == "levels") cfg.levels = static_cast<int>(parse_int(value, key, line));
            else if (key == "energies") cfg.energies = parse_double_list(value, key, line);
            else if (key == "initial_level")
                cfg.initial_level = static_cast<int>(parse_int(value, key, line));
            else if (key.rfind("dipole_", 0) == 0 && key.size() == 9 &&
                     std::isdigit(static_cast<unsigned char>(key[7])) &&
                     std::isdigit(static_cast<unsigned char>(key[8]))) {
                const int k = key[7] - '1';
                const int l = key[8] - '1';
                if (k < 0 || l < 0 || k > 2 || l > 2)
                    fail(line, "dipole indices in '" + key + "' must be 1..3");
                if (cfg.dipole.empty()) cfg.dipole.assign(9, 0.0);  // resized on resolve
                dipole_touched = true;
                const double v = parse_double(value, key, line);
                cfg.dipole[k * 3 + l] = v;
                cfg.dipole[l * 3 + k] = v;
            } else unknown();
        } else if (section == "cavity") {
            if (key == "n_modes") cfg.n_modes = static_cast<int>(parse_int(value, key, line));
            else if (key == "length") cfg.length = parse_double(value, key, line);
            else if (key == "atom_position") cfg.atom_position = parse_double(value, key, line);
            else if (key == "coupling") cfg.coupling = parse_double(value, key, line);
            else unknown();
        } else if (section == "mtef") {
            if (key == "n_traj") cfg.n_traj = static_cast<int>(parse_int(value, key, line));
            else if (key == "seed") cfg.seed = parse_u64(value, key, line);
            else if (key == "dt") cfg.dt = parse_double(value, key, line);
            else unknown();
        } else if (section == "exact") {
            if (key == "per_mode_cap")
                cfg.per_mode_cap = static_cast<int>(parse_int(value, key, line));
            else if (key == "total_cap") cfg.total_cap = static_cast<int>(parse_int(value, key, line));
            else if (key == "tolerance") cfg.tolerance = parse_double(value, key, line);
            else if (key == "krylov_dim")
                cfg.krylov_dim = static_cast<int>(parse_int(value, key, line));
            else if (key == "max_states") cfg.max_states = parse_u64(value, key, line);
            else unknown();
        } else if (section == "output") {
            if (key == "t_final") cfg.t_final = parse_double(value, key, line);
            else if (key == "snapshot_times") cfg.snapshot_times = parse_double_list(value, key, line);
            else if (key == "series_interval") cfg.series_interval = parse_double(value, key, line);
            else if (key == "r_points") cfg.r_points = static_cast<int>(parse_int(value, key, line));
            else if (key == "g2_points") cfg.g2_points = static_cast<int>(parse_int(value, key, line));
            else if (key == "dir") cfg.dir = value;
            else unknown();
        } else if (section == "estimators") {
            if (key == "g2_variant") cfg.g2_variant = value;
            else if (key == "intensity_variant") cfg.intensity_variant = value;
            else if (key == "g2_denominator") cfg.g2_denominator = value;
            else if (key == "g2_mask_rel") cfg.g2_mask_rel = parse_double(value, key, line);
            else unknown();
        }
    }
    (void)dipole_touched;
    cfg.validate();
    return cfg;
}

RunConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config file '" + path + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_config(buffer.str());
}

void RunConfig::validate() const {
    if (levels != 2 && levels != 3) throw config_error("model.levels must be 2 or 3");
    if (!energies.empty() && energies.size() != static_cast<std::size_t>(levels))
        throw config_error("model.energies must list one energy per level");
    if (initial_level < -1 || initial_level >= levels)
        throw config_error("model.initial_level out of range");
    if (!dipole.empty())
        for (int k = 0; k < 3; ++k)
            for (int l = 0; l < 3; ++l)
                if ((k >= levels || l >= levels) && dipole[k * 3 + l] != 0.0)
                    throw config_error("model.dipole_" + std::to_string(k + 1) +
                                       std::to_string(l + 1) + " references a missing level");
    if (n_modes < 1) throw config_error("cavity.n_modes must be positive");
    if (!(length > 0.0)) throw config_error("cavity.length must be positive");
    if (atom_position >= 0.0 && !(atom_position > 0.0 && atom_position < length))
        throw config_error("cavity.atom_position must lie inside (0, L)");
    if (n_traj < 1) throw config_error("mtef.n_traj must be positive");
    if (!(dt > 0.0)) throw config_error("mtef.dt must be positive");
    if (per_mode_cap < 1) throw config_error("exact.per_mode_cap must be at least 1");
    if (total_cap < 1) throw config_error("exact.total_cap must be at least 1");
    if (!(tolerance > 0.0)) throw config_error("exact.tolerance must be positive");
    if (krylov_dim < 2) throw config_error("exact.krylov_dim must be at least 2");
    if (!(t_final >= 0.0)) throw config_error("output.t_final must be non-negative");
    if (!(series_interval > 0.0)) throw config_error("output.series_interval must be positive");
    if (r_points != 0 && r_points < 2) throw config_error("output.r_points must be 0 or >= 2");
    if (g2_points != 0 && g2_points < 2) throw config_error("output.g2_points must be 0 or >= 2");
    for (double t : snapshot_times)
        if (t < 0.0 || t > t_final) throw config_error("output.snapshot_times outside [0, t_final]");
    if (g2_variant != "full" && g2_variant != "paper")
        throw config_error("estimators.g2_variant must be 'full' or 'paper'");
    if (intensity_variant != "full" && intensity_variant != "diagonal")
        throw config_error("estimators.intensity_variant must be 'full' or 'diagonal'");
    if (g2_denominator != "glauber" && g2_denominator != "intensity")
        throw config_error("estimators.g2_denominator must be 'glauber' or 'intensity'");
    if (!(g2_mask_rel > 0.0)) throw config_error("estimators.g2_mask_rel must be positive");
}

AtomModel RunConfig::resolved_atom() const {
    if (energies.empty() && dipole.empty()) return build_default_atom(levels);
    AtomModel base = build_default_atom(levels);
    std::vector<double> e = energies.empty() ? base.energies : energies;
    std::vector<double> d(static_cast<std::size_t>(levels) * levels, 0.0);
    if (dipole.empty()) {
        d = base.dipole;
    } else {
        for (int k = 0; k < levels; ++k)
            for (int l = 0; l < levels; ++l) d[k * levels + l] = dipole[k * 3 + l];
    }
    return build_atom(std::move(e), std::move(d));
}

CavityModel RunConfig::resolved_cavity() const {
    const double r_atom = atom_position < 0.0 ? 0.5 * length : atom_position;
    return build_cavity(n_modes, length, r_atom, Constants{}, coupling);
}

RunPlan RunConfig::resolved_plan() const {
    RunPlan plan;
    plan.dt = dt;
    plan.t_final = t_final;
    plan.snapshot_times = snapshot_times;
    std::sort(plan.snapshot_times.begin(), plan.snapshot_times.end());
    plan.series_times = make_series_times(t_final, series_interval);
    for (double t : snapshot_times)
        if (!std::binary_search(plan.series_times.begin(), plan.series_times.end(), t))
            plan.series_times.push_back(t);
    std::sort(plan.series_times.begin(), plan.series_times.end());
    if (r_points > 0) plan.r_grid = uniform_grid(length, r_points);
    if (g2_points > 0) plan.g2_grid = uniform_grid(length, g2_points);
    return plan;
}

EnsembleOptions RunConfig::resolved_options() const {
    EnsembleOptions opt;
    opt.g2_variant = g2_variant == "paper" ? G2Variant::paper : G2Variant::full;
    opt.intensity_variant =
        intensity_variant == "diagonal" ? IntensityVariant::diagonal : IntensityVariant::full;
    opt.g2_denominator =
        g2_denominator == "intensity" ? G2Denominator::intensity : G2Denominator::glauber;
    opt.g2_mask_rel = g2_mask_rel;
    opt.initial_level = initial_level;
    return opt;
}

EnsembleSpec RunConfig::resolved_spec() const {
    EnsembleSpec spec;
    spec.n_traj = n_traj;
    spec.seed = seed;
    return spec;
}

std::string RunConfig::to_ini_text() const {
    std::ostringstream out;
    out << "[model]\n";
    out << "levels = " << levels << "\n";
    const AtomModel atom = resolved_atom();
    out << "energies = " << format_list(atom.energies) << "\n";
    for (int k = 0; k < levels; ++k)
        for (int l = k + 1; l < levels; ++l)
            if (atom.mu(k, l) != 0.0)
                out << "dipole_" << (k + 1) << (l + 1) << " = " << format_g17(atom.mu(k, l))
                    << "\n";
    out << "initial_level = " << initial_level << "\n";
    out << "\n[cavity]\n";
    out << "n_modes = " << n_modes << "\n";
    out << "length = " << format_g17(length) << "\n";
    out << "atom_position = " << format_g17(atom_position < 0.0 ? 0.5 * length : atom_position)
        << "\n";
    out << "coupling = " << format_g17(coupling) << "\n";
    out << "\n[mtef]\n";
    out << "n_traj = " << n_traj << "\n";
    out << "seed = " << seed << "\n";
    out << "dt = " << format_g17(dt) << "\n";
    out << "\n[exact]\n";
    out << "per_mode_cap = " << per_mode_cap << "\n";
    out << "total_cap = " << total_cap << "\n";
    out << "tolerance = " << format_g17(tolerance) << "\n";
    out << "krylov_dim = " << krylov_dim << "\n";
    out << "max_states = " << max_states << "\n";
    out << "\n[output]\n";
    out << "t_final = " << format_g17(t_final) << "\n";
    out << "snapshot_times = " << format_list(snapshot_times) << "\n";
    out << "series_interval = " << format_g17(series_interval) << "\n";
    out << "r_points = " << r_points << "\n";
    out << "g2_points = " << g2_points << "\n";
    out << "dir = " << dir << "\n";
    out << "\n[estimators]\n";
    out << "g2_variant = " << g2_variant << "\n";
    out << "intensity_variant = " << intensity_variant << "\n";
    out << "g2_denominator = " << g2_denominator << "\n";
    out << "g2_mask_rel = " << format_g17(g2_mask_rel) << "\n";
    return out.str();
}

} // namespace cqed
