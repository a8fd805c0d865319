#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "cqed/config.hpp"
#include "cqed/run_output.hpp"

namespace {

// Exit codes: 0 success, 1 validation error, 2 runtime failure, 3 comparison
// mismatch (with --tolerance).
constexpr int kOk = 0;
constexpr int kValidationError = 1;
constexpr int kRuntimeError = 2;
constexpr int kComparisonMismatch = 3;

cqed::RunConfig load(const std::string& config_path) {
    if (config_path.empty()) return cqed::parse_config("");
    return cqed::load_config_file(config_path);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"1D cavity QED spontaneous emission: multi-trajectory Ehrenfest dynamics "
                 "and an excitation-truncated CI benchmark"};
    app.require_subcommand(1);

    std::string config_path;
    std::string mode_text = "both";
    std::string out_dir;
    std::optional<std::uint64_t> seed_override;
    int threads = 0;

    auto* run_cmd = app.add_subcommand("run", "run the configured simulation");
    run_cmd->add_option("--config", config_path, "configuration file");
    run_cmd->add_option("--mode", mode_text, "mtef | exact | both")->capture_default_str();
    run_cmd->add_option("--out", out_dir, "output directory (default: config output.dir)");
    run_cmd->add_option("--seed", seed_override, "override mtef.seed");
    run_cmd->add_option("--threads", threads, "worker threads (0 = hardware default)");

    auto* validate_cmd = app.add_subcommand("validate-config", "parse and echo the resolved config");
    validate_cmd->add_option("--config", config_path, "configuration file");

    auto* cost_cmd = app.add_subcommand("estimate-cost",
                                        "print basis dimension and trajectory step counts");
    cost_cmd->add_option("--config", config_path, "configuration file");

    std::string dir_a, dir_b, json_out;
    std::optional<double> tolerance;
    auto* compare_cmd = app.add_subcommand("compare", "compare two run directories");
    compare_cmd->add_option("dir_a", dir_a, "first run directory")->required();
    compare_cmd->add_option("dir_b", dir_b, "second run directory")->required();
    compare_cmd->add_option("--tolerance", tolerance,
                            "exit 3 if any absolute deviation exceeds this");
    compare_cmd->add_option("--json", json_out, "write the machine-readable report here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kOk : kValidationError;
    }

    try {
        if (run_cmd->parsed()) {
            cqed::RunConfig config = load(config_path);
            if (seed_override) config.seed = *seed_override;
            const auto mode = cqed::parse_run_mode(mode_text);
            const std::filesystem::path out = out_dir.empty() ? config.dir : out_dir;
            const cqed::RunSummary summary = cqed::run(config, mode, out, threads);
            for (const auto& w : summary.warnings) std::cerr << "warning: " << w << "\n";
            std::printf("run complete in %.1f s; outputs in %s\n", summary.wall_seconds,
                        out.string().c_str());
            return kOk;
        }
        if (validate_cmd->parsed()) {
            const cqed::RunConfig config = load(config_path);
            std::cout << config.to_ini_text();
            return kOk;
        }
        if (cost_cmd->parsed()) {
            const cqed::RunConfig config = load(config_path);
            std::cout << cqed::estimate_cost_text(config);
            return kOk;
        }
        if (compare_cmd->parsed()) {
            const cqed::CompareReport report = cqed::compare_runs(dir_a, dir_b);
            if (!json_out.empty()) {
                std::ofstream out(json_out);
                if (!out) throw std::runtime_error("cannot write '" + json_out + "'");
                out << report.to_json() << "\n";
            }
            std::cout << report.to_text();
            if (tolerance && report.max_abs > *tolerance) {
                std::cerr << "comparison mismatch: max deviation " << report.max_abs
                          << " exceeds tolerance " << *tolerance << "\n";
                return kComparisonMismatch;
            }
            return kOk;
        }
    } catch (const cqed::config_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kValidationError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kRuntimeError;
    }
    return kValidationError;
}
