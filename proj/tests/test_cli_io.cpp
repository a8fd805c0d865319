#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cqed/run_output.hpp"

using namespace cqed;
namespace fs = std::filesystem;

namespace {

const char* kSmallConfig =
    "[model]\nlevels = 2\n"
    "[cavity]\nn_modes = 20\nlength = 23620\n"
    "[mtef]\nn_traj = 12\nseed = 555\n"
    "[output]\nt_final = 40\nsnapshot_times = 20, 40\nseries_interval = 10\n"
    "r_points = 32\ng2_points = 16\n";

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path);
    REQUIRE(in);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

} // namespace

TEST_CASE("a both-mode run writes the full CSV set and metadata") {
    const RunConfig cfg = parse_config(kSmallConfig);
    const fs::path out = fresh_dir("cqed_test_run");
    const RunSummary summary = run(cfg, RunMode::both, out, 2);
    CHECK(summary.flagged_trajectories == 0);

    for (const char* solver : {"mtef", "exact"}) {
        for (const char* name :
             {"populations.csv", "photon_number.csv", "intensity_t20.csv", "intensity_t40.csv",
              "g2_t20.csv", "g2_t40.csv", "g2_diag_t20.csv", "g2_diag_t40.csv"})
            CHECK(fs::exists(out / solver / name));
    }
    CHECK(fs::exists(out / "run_meta.json"));

    SUBCASE("metadata round-trips the resolved config") {
        const auto meta = nlohmann::json::parse(slurp(out / "run_meta.json"));
        const RunConfig round = parse_config(meta["config_text"].get<std::string>());
        CHECK(round.to_ini_text() == cfg.to_ini_text());
        CHECK(meta["seed"].get<std::uint64_t>() == 555);
        CHECK(meta["exact"]["dimension"].get<std::size_t>() > 0);
    }

    SUBCASE("self-comparison reports zero deviation") {
        const CompareReport report = compare_runs(out / "mtef", out / "mtef");
        CHECK(report.max_abs == 0.0);
        CHECK(report.mask_mismatches == 0);
    }

    SUBCASE("mtef and exact compare structurally on the same grids") {
        const CompareReport report = compare_runs(out / "mtef", out / "exact");
        CHECK(report.files.size() == 8);
        CHECK(report.max_abs > 0.0);
    }
}

TEST_CASE("fixed seed reruns are byte-identical regardless of thread count") {
    const RunConfig cfg = parse_config(kSmallConfig);
    const fs::path out1 = fresh_dir("cqed_test_det1");
    const fs::path out2 = fresh_dir("cqed_test_det2");
    run(cfg, RunMode::mtef, out1, 1);
    run(cfg, RunMode::mtef, out2, 2);
    for (const auto& entry : fs::directory_iterator(out1 / "mtef")) {
        const fs::path other = out2 / "mtef" / entry.path().filename();
        REQUIRE(fs::exists(other));
        CHECK(slurp(entry.path()) == slurp(other));
    }
}

TEST_CASE("seed changes propagate to the outputs") {
    RunConfig cfg = parse_config(kSmallConfig);
    const fs::path out1 = fresh_dir("cqed_test_seed1");
    run(cfg, RunMode::mtef, out1, 0);
    cfg.seed = 556;
    const fs::path out2 = fresh_dir("cqed_test_seed2");
    run(cfg, RunMode::mtef, out2, 0);
    CHECK(slurp(out1 / "mtef" / "populations.csv") != slurp(out2 / "mtef" / "populations.csv"));
}

TEST_CASE("g2 CSVs carry masked cells as empty fields and compare handles them") {
    const RunConfig cfg = parse_config(kSmallConfig);
    const fs::path out = fresh_dir("cqed_test_mask");
    run(cfg, RunMode::mtef, out, 0);
    const std::string g2 = slurp(out / "mtef" / "g2_t20.csv");
    CHECK(g2.find(",,") != std::string::npos);  // at least one masked cell
    const CompareReport report = compare_runs(out / "mtef", out / "mtef");
    CHECK(report.max_abs == 0.0);
}

TEST_CASE("comparing different runs flags grid mismatches") {
    RunConfig cfg = parse_config(kSmallConfig);
    const fs::path out1 = fresh_dir("cqed_test_grid1");
    run(cfg, RunMode::mtef, out1, 0);
    cfg.r_points = 16;
    const fs::path out2 = fresh_dir("cqed_test_grid2");
    run(cfg, RunMode::mtef, out2, 0);
    CHECK_THROWS_AS(compare_runs(out1 / "mtef", out2 / "mtef"), config_error);
}

TEST_CASE("exact-mode refusal surfaces the computed dimension") {
    RunConfig cfg = parse_config(kSmallConfig);
    cfg.max_states = 5;
    const fs::path out = fresh_dir("cqed_test_refuse");
    CHECK_THROWS_WITH_AS(run(cfg, RunMode::exact, out, 0), doctest::Contains("exceeds"),
                         config_error);
}

TEST_CASE("estimate-cost reports dimensions without running") {
    const RunConfig cfg = parse_config("");
    const std::string text = estimate_cost_text(cfg);
    CHECK(text.find("40602") != std::string::npos);
    CHECK(text.find("200 coupled") != std::string::npos);

    RunConfig big = cfg;
    big.total_cap = 4;
    const std::string refusal = estimate_cost_text(big);
    CHECK(refusal.find("EXCEEDS") != std::string::npos);
}

TEST_CASE("estimator variant flags change the mtef outputs") {
    RunConfig cfg = parse_config(kSmallConfig);
    const fs::path out_full = fresh_dir("cqed_test_var_full");
    run(cfg, RunMode::mtef, out_full, 0);
    cfg.intensity_variant = "diagonal";
    cfg.g2_variant = "paper";
    const fs::path out_paper = fresh_dir("cqed_test_var_paper");
    run(cfg, RunMode::mtef, out_paper, 0);
    CHECK(slurp(out_full / "mtef" / "intensity_t20.csv") !=
          slurp(out_paper / "mtef" / "intensity_t20.csv"));
    CHECK(slurp(out_full / "mtef" / "g2_t20.csv") != slurp(out_paper / "mtef" / "g2_t20.csv"));
}
