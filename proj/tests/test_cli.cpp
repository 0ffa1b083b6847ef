#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "ggethermo/config.hpp"
#include "ggethermo/errors.hpp"
#include "ggethermo/report.hpp"
#include "ggethermo/runner.hpp"

using namespace ggethermo;
using nlohmann::json;

namespace {

json base_extract_doc() {
    return json{
        {"experiment", "extract"},
        {"charges", json::array({{{"diag", {0.0, 2.0}}}, {{"diag", {0.0, 1.0}}}})},
        {"betas", {0.6, 0.4}},
        {"bath",
         {{"a", {0.0, 1.0, 0.0}},
          {"b", {0.0, 0.0, 1.0}},
          {"beta_a", 1.0},
          {"beta_b", std::sqrt(2.0)}}},
        {"state",
         {{"matrix",
           {{{0.85, 0.0}, {0.1, 0.05}}, {{0.1, -0.05}, {0.15, 0.0}}}}}},
        {"delta_p", 0.01}};
}

json battery_doc(double width) {
    json state_rows = json::array();
    const std::vector<double> sys_diag{0.8, 0.2};
    const std::vector<double> bath_diag{0.5, 0.3, 0.2};
    for (int i = 0; i < 2; ++i) {
        for (int k = 0; k < 3; ++k) {
            json row = json::array();
            for (int j = 0; j < 2; ++j) {
                for (int l = 0; l < 3; ++l) {
                    const double v = (i == j && k == l) ? sys_diag[i] * bath_diag[k] : 0.0;
                    row.push_back({v, 0.0});
                }
            }
            state_rows.push_back(row);
        }
    }
    return json{{"experiment", "battery"},
                {"battery",
                 {{"sys_a", {0.0, 2.0}},
                  {"sys_b", {0.0, 1.0}},
                  {"bath_a", {0.0, 1.0, 3.0}},
                  {"bath_b", {0.0, 2.0, 3.0}},
                  {"theta", 0.3},
                  {"swap", {2, 3}},
                  {"ladder", {{"size", 256}, {"spacing", 1.0}}},
                  {"width", width}}},
                {"state", {{"matrix", state_rows}}}};
}

std::filesystem::path scratch_dir(const std::string& leaf) {
    const auto dir = std::filesystem::temp_directory_path() / "ggethermo_cli_tests" / leaf;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("configs parse into typed experiments") {
    const ExperimentConfig cfg = parse_config(base_extract_doc());
    CHECK(cfg.kind == "extract");
    REQUIRE(cfg.charges.has_value());
    CHECK(cfg.charges->count() == 2);
    CHECK(cfg.charges->dim() == 2);
    CHECK(cfg.betas == std::vector<double>{0.6, 0.4});
    REQUIRE(cfg.bath.has_value());
    CHECK(cfg.bath->beta_b == doctest::Approx(std::sqrt(2.0)));
    REQUIRE(cfg.state.has_value());
    CHECK(cfg.state->matrix()(0, 1) == Complex(0.1, 0.05));
    CHECK(cfg.delta_p == 0.01);
    CHECK(cfg.resolved == base_extract_doc());
}

TEST_CASE("charge presets and formats") {
    const HermitianOperator sx = parse_charge(json("sigma_x"));
    CHECK(sx.matrix()(0, 1) == Complex(1, 0));
    const HermitianOperator sy = parse_charge(json("sigma_y"));
    CHECK(sy.matrix()(1, 0) == Complex(0, 1));
    const HermitianOperator sz = parse_charge(json("sigma_z"));
    CHECK(sz.matrix()(1, 1) == Complex(-1, 0));

    const HermitianOperator d = parse_charge(json{{"diag", {1.0, -2.0, 0.5}}});
    CHECK(d.dim() == 3);
    CHECK(d.matrix()(1, 1) == Complex(-2, 0));
    CHECK(d.matrix()(0, 1) == Complex(0, 0));

    const json m{{"matrix", {{{0.0, 0.0}, {0.0, -1.0}}, {{0.0, 1.0}, {0.0, 0.0}}}}};
    CHECK(parse_charge(m).matrix() == parse_charge(json("sigma_y")).matrix());

    CHECK_THROWS_AS(parse_charge(json("sigma_w")), ConfigError);
    CHECK_THROWS_AS(parse_charge(json{{"diag", {1.0, "x"}}}), ConfigError);
    // non-hermitian matrix is a config error, not a module abort
    const json bad{{"matrix", {{{0.0, 0.0}, {1.0, 0.0}}, {{2.0, 0.0}, {0.0, 0.0}}}}};
    CHECK_THROWS_AS(parse_charge(bad), ConfigError);
}

TEST_CASE("states parse from populations or matrices") {
    const DensityMatrix diag = parse_state(json{{"populations", {0.5, 0.3, 0.2}}});
    CHECK(diag.dim() == 3);
    CHECK(diag.matrix()(0, 0) == Complex(0.5, 0));
    CHECK_THROWS_AS(parse_state(json{{"populations", {0.7, 0.7}}}), ConfigError);
    CHECK_THROWS_AS(parse_state(json{{"matrix", {{{0.9, 0.0}}}}}), ConfigError);
    CHECK_THROWS_AS(parse_state(json{{"levels", {0.5, 0.5}}}), ConfigError);
}

TEST_CASE("bath exact values parse as rationals") {
    json doc = base_extract_doc();
    doc["bath"]["beta_b"] = 1.5;
    doc["bath"]["a_exact"] = {"0", "1", "0"};
    doc["bath"]["b_exact"] = {"0", "0", "1"};
    doc["bath"]["beta_a_exact"] = "1";
    doc["bath"]["beta_b_exact"] = "1.5";
    const ExperimentConfig cfg = parse_config(doc);
    REQUIRE(cfg.bath->a_exact.size() == 3);
    CHECK(cfg.bath->a_exact[1] == Rational(1));
    CHECK(cfg.bath->beta_b_exact == Rational(BigInt(3), BigInt(2)));

    doc["bath"]["a_exact"] = {"0", "1"};
    CHECK_THROWS_AS(parse_config(doc), ConfigError);
}

TEST_CASE("schema violations are config errors") {
    CHECK_THROWS_AS(parse_config(json::array()), ConfigError);
    CHECK_THROWS_AS(parse_config(json{{"experiment", "fuse"}}), ConfigError);

    json doc = base_extract_doc();
    doc.erase("betas");
    CHECK_THROWS_AS(parse_config(doc), ConfigError);

    doc = base_extract_doc();
    doc["betas"] = {0.6};
    CHECK_THROWS_AS(parse_config(doc), ConfigError);

    doc = base_extract_doc();
    doc["delta_p"] = "small";
    CHECK_THROWS_AS(parse_config(doc), ConfigError);

    doc = base_extract_doc();
    doc["delta_p"] = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(parse_config(doc), ConfigError);

    doc = base_extract_doc();
    doc["seed"] = -3;
    CHECK_THROWS_AS(parse_config(doc), ConfigError);

    doc = base_extract_doc();
    doc["grid"] = json::array({{{"parameter", "delta_p"}, {"values", {0.01}}},
                               {{"parameter", "eta"}, {"values", {0.1}}},
                               {{"parameter", "epsilon"}, {"values", {0.1}}}});
    CHECK_THROWS_AS(parse_config(doc), ConfigError);

    // audit without a seed must not slip through to a nondeterministic run
    json audit{{"experiment", "audit"},
               {"charges", base_extract_doc()["charges"]},
               {"bath", base_extract_doc()["bath"]},
               {"state", base_extract_doc()["state"]},
               {"trials", 10}};
    CHECK_THROWS_AS(parse_config(audit), ConfigError);
    audit["seed"] = 7;
    CHECK(parse_config(audit).trials == 10);
}

TEST_CASE("load_config maps file problems to config errors") {
    CHECK_THROWS_AS(load_config("/definitely/not/here.json"), ConfigError);
    const auto dir = scratch_dir("load");
    const auto path = (dir / "broken.json").string();
    std::ofstream(path) << "{not json";
    CHECK_THROWS_AS(load_config(path), ConfigError);
}

TEST_CASE("values render with 17 significant digits and round-trip") {
    CHECK(format_value(0.0) == "0");
    CHECK(format_value(1.0) == "1");
    CHECK(format_value(0.1) == "0.10000000000000001");
    for (double v : {1.0 / 3.0, std::sqrt(2.0), 6.02214076e23, -1.25e-17}) {
        CHECK(std::stod(format_value(v)) == v);
    }
}

TEST_CASE("csv tables render deterministically with unit headers") {
    CsvTable t;
    t.columns = {"step[1]", "dF_b[nat]"};
    t.add_row({0, 0.25});
    t.add_row({1, 1.0 / 3.0});
    const std::string expect =
        "step[1],dF_b[nat]\n0,0.25\n1,0.33333333333333331\n";
    CHECK(t.render() == expect);
    CHECK(t.render() == t.render());
    CHECK_THROWS_AS(t.add_row({1.0}), InvariantError);
}

TEST_CASE("atomic writes leave no temporaries behind") {
    const auto dir = scratch_dir("atomic");
    const auto path = dir / "table.csv";
    write_atomic(path, "a,b\n1,2\n");
    std::ifstream in(path);
    std::string content((std::istreambuf_iterator<char>(in)),
                        std::istreambuf_iterator<char>());
    CHECK(content == "a,b\n1,2\n");
    int entries = 0;
    for ([[maybe_unused]] const auto& e : std::filesystem::directory_iterator(dir)) {
        ++entries;
    }
    CHECK(entries == 1);
}

TEST_CASE("report envelope carries config, totals, units and checks") {
    RunReport r;
    r.config = json{{"experiment", "thermal"}};
    r.add_total("free_entropy", -0.25, "nat");
    r.add_check("second_law", true);
    const json doc = r.to_json();
    CHECK(doc.at("config").at("experiment") == "thermal");
    CHECK(doc.at("totals").at("free_entropy") == -0.25);
    CHECK(doc.at("units").at("free_entropy") == "nat");
    CHECK(doc.at("checks").at("second_law") == true);
}

TEST_CASE("thermal run tabulates levels and ties totals together") {
    json doc{{"experiment", "thermal"},
             {"charges", base_extract_doc()["charges"]},
             {"betas", {0.7, 0.2}}};
    const RunArtifacts art = run_experiment(parse_config(doc));
    CHECK(art.steps.rows.size() == 2);
    CHECK(art.steps.columns.size() == 5);  // level, r, population, two charges
    const double f = art.report.totals.at("free_entropy").get<double>();
    const double logz = art.report.totals.at("log_partition").get<double>();
    CHECK(f == doctest::Approx(-logz).epsilon(1e-12));
    CHECK(art.report.checks.at("free_entropy_is_minus_log_partition") == true);
    double total_pop = 0;
    for (const auto& row : art.steps.rows) total_pop += row[2];
    CHECK(total_pop == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(art.report.config == doc);
}

TEST_CASE("solve run recovers the requested averages") {
    json doc{{"experiment", "solve-betas"},
             {"charges", json::array({"sigma_z", "sigma_x"})},
             {"solve", {{"targets", {0.3, -0.2}}}}};
    const RunArtifacts art = run_experiment(parse_config(doc));
    CHECK(art.report.checks.at("converged") == true);
    for (const auto& row : art.steps.rows) {
        CHECK(row[3] == doctest::Approx(row[1]).epsilon(1e-8));  // achieved vs target
    }
}

TEST_CASE("trade run mirrors the planner's totals") {
    json doc{{"experiment", "trade"},
             {"bath",
              {{"a", {0.0, 1.0, 0.0}},
               {"b", {0.0, 0.0, 1.0}},
               {"beta_a", 1.0},
               {"beta_b", 1.5}}},
             {"eta", 0.05},
             {"epsilon", 0.001}};
    const ExperimentConfig cfg = parse_config(doc);
    const RunArtifacts art = run_experiment(cfg);
    const TradePlan plan = plan_trade(*cfg.bath, cfg.eta, cfg.epsilon);
    CHECK(art.steps.rows.size() == static_cast<size_t>(plan.step_count));
    CHECK(art.report.totals.at("total_dA_b").get<double>() == plan.total_da);
    CHECK(art.report.totals.at("total_dF_b").get<double>() == plan.total_df);
    CHECK(art.report.checks.at("target_reached") == true);
    CHECK(art.report.checks.at("free_entropy_within_budget") == true);
    CHECK(art.report.checks.at("per_step_cost_bounded") == true);
}

TEST_CASE("extract run reports a vanishing-deficit protocol") {
    const RunArtifacts art = run_experiment(parse_config(base_extract_doc()));
    CHECK(art.report.checks.at("second_law") == true);
    CHECK(art.report.totals.at("deficit").get<double>() > 0);
    CHECK(art.report.totals.at("deficit").get<double>() < 0.01);
    CHECK(!art.steps.rows.empty());
    // per-macro bath costs in the table sum to the reported total
    double df_b = 0;
    for (const auto& row : art.steps.rows) df_b += row.back();
    CHECK(df_b == doctest::Approx(art.report.totals.at("dF_b_total").get<double>())
                      .epsilon(1e-9));
}

TEST_CASE("battery run wires the lifted step end to end") {
    const RunArtifacts art = run_experiment(parse_config(battery_doc(8.0)));
    CHECK(art.report.checks.at("conserving_lift") == true);
    CHECK(art.report.checks.at("first_law_A") == true);
    CHECK(art.report.checks.at("first_law_B") == true);
    CHECK(art.report.checks.at("entropy_nondecrease") == true);
    CHECK(art.report.checks.at("momentum_preserved") == true);
    CHECK(art.steps.rows.size() == 256);
    CHECK(art.report.totals.at("gap").get<double>() > 0);
    CHECK(art.report.totals.at("work_A").get<double>() ==
          doctest::Approx(-art.report.totals.at("dA_block").get<double>())
              .epsilon(1e-9));
}

TEST_CASE("audit run is deterministic for a fixed seed") {
    json doc{{"experiment", "audit"},
             {"charges", base_extract_doc()["charges"]},
             {"bath", base_extract_doc()["bath"]},
             {"state", base_extract_doc()["state"]},
             {"trials", 20},
             {"seed", 11}};
    const RunArtifacts a = run_experiment(parse_config(doc));
    const RunArtifacts b = run_experiment(parse_config(doc));
    CHECK(a.report.to_json() == b.report.to_json());
    CHECK(a.report.checks.at("no_violations") == true);
    CHECK(a.report.totals.at("violations").get<double>() == 0);
}

TEST_CASE("sweeps emit one row per grid point in declaration order") {
    json doc = base_extract_doc();
    doc["grid"] = json::array(
        {{{"parameter", "delta_p"}, {"values", {0.01, 0.005}}}});
    const CsvTable one = run_sweep(parse_config(doc));
    REQUIRE(one.rows.size() == 2);
    CHECK(one.columns == std::vector<std::string>{"delta_p[1]", "deficit[nat]"});
    CHECK(one.rows[0][0] == 0.01);
    CHECK(one.rows[1][0] == 0.005);
    CHECK(one.rows[1][1] < one.rows[0][1]);  // deficit shrinks with delta_p

    doc["grid"] = json::array(
        {{{"parameter", "delta_p"}, {"values", {0.01, 0.005}}},
         {{"parameter", "beta_a"}, {"values", {1.0, 1.1, 1.2}}}});
    const CsvTable two = run_sweep(parse_config(doc));
    REQUIRE(two.rows.size() == 6);
    CHECK(two.columns.size() == 3);
    CHECK(two.rows[0][0] == 0.01);
    CHECK(two.rows[0][1] == 1.0);
    CHECK(two.rows[1][1] == 1.1);  // inner axis varies fastest
    CHECK(two.rows[3][0] == 0.005);

    doc["grid"] = json::array({{{"parameter", "delta_p"}, {"values", json::array()}}});
    const CsvTable empty = run_sweep(parse_config(doc));
    CHECK(empty.rows.empty());
    CHECK(empty.columns.size() == 2);

    doc["grid"] = json::array({{{"parameter", "volume"}, {"values", {1.0}}}});
    CHECK_THROWS_AS(run_sweep(parse_config(doc)), ConfigError);
}

TEST_CASE("artifacts land atomically in the requested format") {
    json doc{{"experiment", "thermal"},
             {"charges", base_extract_doc()["charges"]},
             {"betas", {0.7, 0.2}}};
    RunArtifacts art = run_experiment(parse_config(doc));

    const auto dir = scratch_dir("artifacts");
    write_artifacts(art, dir, "csv");
    CHECK(std::filesystem::exists(dir / "report.json"));
    CHECK(std::filesystem::exists(dir / "steps.csv"));
    write_artifacts(art, dir, "json");
    CHECK(std::filesystem::exists(dir / "steps.json"));
    CHECK_THROWS_AS(write_artifacts(art, dir, "yaml"), ConfigError);

    std::ifstream in(dir / "report.json");
    const json parsed = json::parse(in);
    CHECK(parsed.at("config") == doc);
    CHECK(parsed.contains("totals"));
    CHECK(parsed.contains("units"));
}

TEST_CASE("failures map onto the documented exit codes") {
    CHECK(exit_code_for(ConfigError("config: nope")) == exit_code::config);
    CHECK(exit_code_for(ExcludedRatioError("excluded", 2, 3, 0.5)) ==
          exit_code::respecify);
    CHECK(exit_code_for(InvariantError("broken")) == exit_code::invariant);
    CHECK(exit_code_for(std::runtime_error("plain")) == exit_code::invariant);
    CHECK(exit_code_for(GuardBandError("band")) == exit_code::invariant);
}

}  // TEST_SUITE
