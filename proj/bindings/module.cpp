#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "ggethermo/bathtrade.hpp"
#include "ggethermo/config.hpp"
#include "ggethermo/errors.hpp"
#include "ggethermo/extract.hpp"
#include "ggethermo/gge.hpp"
#include "ggethermo/numtheory.hpp"
#include "ggethermo/qcore.hpp"
#include "ggethermo/runner.hpp"

namespace py = pybind11;
using namespace ggethermo;

namespace {

ChargeSet make_charges(const std::vector<Matrix>& mats) {
    std::vector<HermitianOperator> ops;
    ops.reserve(mats.size());
    for (const Matrix& m : mats) {
        ops.emplace_back(m);
    }
    return ChargeSet(std::move(ops));
}

nlohmann::json parse_text(const std::string& text) {
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config: parse error: ") + e.what());
    }
}

std::string run_config(const std::string& text) {
    const ExperimentConfig cfg = parse_config(parse_text(text));
    const RunArtifacts art = run_experiment(cfg);
    const nlohmann::json out{
        {"report", art.report.to_json()},
        {"steps", {{"columns", art.steps.columns}, {"rows", art.steps.rows}}}};
    return out.dump();
}

std::string sweep_config(const std::string& text) {
    const ExperimentConfig cfg = parse_config(parse_text(text));
    const CsvTable table = run_sweep(cfg);
    const nlohmann::json out{{"columns", table.columns}, {"rows", table.rows}};
    return out.dump();
}

py::dict gibbs(const std::vector<Matrix>& charge_mats, const std::vector<double>& betas) {
    const ChargeSet charges = make_charges(charge_mats);
    const GibbsState g = gibbs_state(charges, betas);
    py::dict d;
    d["state"] = Matrix(g.state.matrix());
    d["log_partition"] = g.log_partition;
    d["entropy"] = von_neumann_entropy(g.state);
    d["free_entropy"] = free_entropy(g.state, charges, betas);
    return d;
}

double free_entropy_of(const Matrix& rho, const std::vector<Matrix>& charge_mats,
                       const std::vector<double>& betas) {
    return free_entropy(DensityMatrix(rho), make_charges(charge_mats), betas);
}

double relative_entropy_of(const Matrix& rho, const Matrix& tau) {
    return relative_entropy(DensityMatrix(rho), DensityMatrix(tau));
}

py::dict solve(const std::vector<Matrix>& charge_mats, const std::vector<double>& targets,
               std::optional<std::vector<double>> initial, double tol,
               int max_iterations) {
    const ChargeSet charges = make_charges(charge_mats);
    SolveOptions options;
    options.tol = tol;
    options.max_iterations = max_iterations;
    const std::vector<double> start =
        initial ? *initial : std::vector<double>(targets.size(), 0.0);
    const SolveResult res = solve_betas(charges, targets, start, options);
    py::dict d;
    d["betas"] = res.betas;
    d["residual"] = res.residual;
    d["iterations"] = res.iterations;
    return d;
}

py::dict levels(const std::vector<Matrix>& charge_mats, const std::vector<double>& betas) {
    const EigenstateCharges table = eigenstate_charges(make_charges(charge_mats), betas);
    py::dict d;
    d["basis"] = Matrix(table.basis);
    d["r"] = RealVector(table.r);
    d["averages"] = Eigen::MatrixXd(table.averages);
    d["populations"] = RealVector(table.populations);
    d["log_partition"] = table.log_partition;
    return d;
}

double rate(const Matrix& rho, const Matrix& sigma, const std::vector<Matrix>& charge_mats,
            const std::vector<double>& betas) {
    return interconversion_rate(DensityMatrix(rho), DensityMatrix(sigma),
                                make_charges(charge_mats), betas);
}

py::dict outcome_dict(const TradeOutcome& s) {
    py::dict d;
    d["dn1"] = s.dn1;
    d["dn2"] = s.dn2;
    d["delta_q"] = s.delta_q;
    d["da_bath"] = s.da_bath;
    d["db_bath"] = s.db_bath;
    d["df_bath"] = s.df_bath;
    return d;
}

py::dict plan(const std::vector<double>& a, const std::vector<double>& b, double beta_a,
              double beta_b, double eta, double epsilon, const std::string& target) {
    if (target != "A" && target != "B") {
        throw ConfigError("config: target_charge must be \"A\" or \"B\"");
    }
    const BathSpec spec = make_bath(a, b, beta_a, beta_b);
    PlanOptions options;
    options.target_charge = target[0];
    const TradePlan p = plan_trade(spec, eta, epsilon, options);
    py::list steps;
    for (const TradeOutcome& s : p.steps) {
        steps.append(outcome_dict(s));
    }
    py::dict d;
    d["dn1"] = p.pair.dn1();
    d["dn2"] = p.pair.dn2();
    d["step_count"] = p.step_count;
    d["total_da"] = p.total_da;
    d["total_db"] = p.total_db;
    d["total_df"] = p.total_df;
    d["per_step_bound"] = p.per_step_bound;
    d["steps"] = steps;
    return d;
}

py::dict extract(const Matrix& rho, const std::vector<Matrix>& charge_mats,
                 const std::vector<double>& a, const std::vector<double>& b,
                 double beta_a, double beta_b, double delta_p,
                 std::optional<Matrix> target) {
    const ChargeSet charges = make_charges(charge_mats);
    const BathSpec spec = make_bath(a, b, beta_a, beta_b);
    const DensityMatrix goal = target ? DensityMatrix(*target)
                                      : gibbs_state(charges, {beta_a, beta_b}).state;
    const ExtractionReport rep =
        run_extraction(make_system(DensityMatrix(rho), charges), spec, delta_p, goal);
    py::list macros;
    for (const MacroRecord& m : rep.macros) {
        py::dict row;
        row["level_i"] = m.level_i;
        row["level_j"] = m.level_j;
        row["dn1"] = m.dn1;
        row["dn2"] = m.dn2;
        row["combo"] = m.combo;
        row["micro_count"] = m.micro_count;
        row["transfer"] = m.transfer;
        row["dw_a"] = m.dw_a;
        row["dw_b"] = m.dw_b;
        row["ds_s"] = m.ds_s;
        row["ds_b"] = m.ds_b;
        row["df_b"] = m.df_b;
        macros.append(row);
    }
    py::dict d;
    d["w_a"] = rep.w_a;
    d["w_b"] = rep.w_b;
    d["df_s"] = rep.df_s;
    d["deficit"] = rep.deficit;
    d["df_b_total"] = rep.df_b_total;
    d["step_count"] = rep.step_count;
    d["delta_p"] = rep.delta_p;
    d["macros"] = macros;
    return d;
}

py::dict audit(const Matrix& rho, const std::vector<Matrix>& charge_mats,
               const std::vector<double>& a, const std::vector<double>& b, double beta_a,
               double beta_b, int trials, std::uint64_t seed) {
    const AuditReport rep =
        second_law_audit(DensityMatrix(rho), make_charges(charge_mats),
                         make_bath(a, b, beta_a, beta_b), trials, seed);
    py::dict d;
    d["trials"] = rep.trials;
    d["violations"] = rep.violations;
    d["max_combined"] = rep.max_combined;
    d["min_subadditivity"] = rep.min_subadditivity;
    d["min_df_b"] = rep.min_df_b;
    d["worst_seed"] = rep.worst_seed;
    return d;
}

std::vector<std::string> farey_strings(int order) {
    std::vector<std::string> out;
    for (const Rational& f : farey_sequence(order)) {
        out.push_back(f.to_string());
    }
    return out;
}

py::tuple bezout_pair(long long u, long long v) {
    const BezoutPair p = bezout(u, v);
    return py::make_tuple(p.dn1, p.dn2);
}

py::dict select_pair(const std::string& measured, const std::string& delta,
                const std::string& eps, const std::string& y) {
    const RobustResult result =
        robust_select(Rational::from_string(measured), Rational::from_string(delta),
                      Rational::from_string(eps), Rational::from_string(y));
    py::dict d;
    if (const auto* sel = std::get_if<RobustSelection>(&result)) {
        d["ok"] = true;
        d["dn1"] = sel->dn1;
        d["dn2"] = sel->dn2;
        d["order"] = sel->order;
        d["nearest"] = sel->nearest.to_string();
        d["combo_bound"] = sel->combo_bound.to_string();
    } else {
        const auto& respec = std::get<RespecifyRequired>(result);
        d["ok"] = false;
        d["order"] = respec.order;
        d["message"] = respec.message();
    }
    return d;
}

py::dict coverage(int order, const std::string& eps, const std::string& y) {
    const CoverageReport rep =
        verify_coverage(order, Rational::from_string(eps), Rational::from_string(y));
    py::dict d;
    d["order"] = rep.order;
    d["checked_pairs"] = rep.checked_pairs;
    d["ok"] = rep.ok;
    d["min_margin"] = rep.min_margin.to_string();
    return d;
}

}  // namespace

PYBIND11_MODULE(_ggethermo, m) {
    m.doc() = "Thermodynamics of multiple conserved quantities: generalized Gibbs "
              "states, bath trades, extraction protocols and exact bath-pair "
              "selection.";

    py::register_exception<Error>(m, "Error");
    py::register_exception<ConfigError>(m, "ConfigError");
    py::register_exception<ExcludedRatioError>(m, "ExcludedRatioError");

    m.def("run_config", &run_config, py::arg("config_json"),
          "Run one experiment from a JSON document; returns report + steps as JSON.");
    m.def("sweep_config", &sweep_config, py::arg("config_json"),
          "Run a grid sweep from a JSON document; returns the table as JSON.");

    m.def("gibbs", &gibbs, py::arg("charges"), py::arg("betas"),
          "Generalized Gibbs state exp(-sum_i beta_i A_i) / Z.");
    m.def("free_entropy", &free_entropy_of, py::arg("rho"), py::arg("charges"),
          py::arg("betas"), "sum_i beta_i <A_i> - S(rho), in nats.");
    m.def("relative_entropy", &relative_entropy_of, py::arg("rho"), py::arg("tau"));
    m.def("solve_betas", &solve, py::arg("charges"), py::arg("targets"),
          py::arg("initial") = std::nullopt, py::arg("tol") = 1e-10,
          py::arg("max_iterations") = 60,
          "Invert charge averages to the Gibbs multipliers.");
    m.def("eigenstate_levels", &levels, py::arg("charges"), py::arg("betas"),
          "Joint eigenbasis with per-level weights, averages and populations.");
    m.def("interconversion_rate", &rate, py::arg("rho"), py::arg("sigma"),
          py::arg("charges"), py::arg("betas"));

    m.def("plan_trade", &plan, py::arg("a"), py::arg("b"), py::arg("beta_a"),
          py::arg("beta_b"), py::arg("eta"), py::arg("epsilon"),
          py::arg("target_charge") = "A",
          "Repeat one class swap until the target charge reaches eta within the "
          "free-entropy budget.");
    m.def("run_extraction", &extract, py::arg("rho"), py::arg("charges"),
          py::arg("a"), py::arg("b"), py::arg("beta_a"), py::arg("beta_b"),
          py::arg("delta_p"), py::arg("target") = std::nullopt,
          "Drive the system to the generalized Gibbs target (default: the bath "
          "multipliers) by two-level swaps against fresh baths.");
    m.def("second_law_audit", &audit, py::arg("rho"), py::arg("charges"), py::arg("a"),
          py::arg("b"), py::arg("beta_a"), py::arg("beta_b"), py::arg("trials"),
          py::arg("seed"), "Random-unitary audit of the combined second law.");

    m.def("farey_sequence", &farey_strings, py::arg("order"));
    m.def("bezout", &bezout_pair, py::arg("u"), py::arg("v"));
    m.def("robust_select", &select_pair, py::arg("measured"), py::arg("delta"),
          py::arg("eps"), py::arg("y") = "1",
          "Exact integer pair robust to the measurement window; decimal-string "
          "inputs.");
    m.def("verify_coverage", &coverage, py::arg("order"), py::arg("eps"),
          py::arg("y") = "1");
}
