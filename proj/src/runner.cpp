#include "ggethermo/runner.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "ggethermo/battery.hpp"
#include "ggethermo/bathtrade.hpp"
#include "ggethermo/errors.hpp"
#include "ggethermo/extract.hpp"
#include "ggethermo/gge.hpp"
#include "ggethermo/numtheory.hpp"

namespace ggethermo {

namespace {

RunArtifacts run_thermal(const ExperimentConfig& cfg) {
    const ChargeSet& charges = *cfg.charges;
    const GibbsState gibbs = gibbs_state(charges, cfg.betas);
    const EigenstateCharges table = eigenstate_charges(charges, cfg.betas);

    RunArtifacts art;
    art.steps.columns = {"level[1]", "r[nat]", "population[1]"};
    for (int k = 0; k < charges.count(); ++k) {
        art.steps.columns.push_back(charges.name(k) + "[charge]");
    }
    for (int i = 0; i < charges.dim(); ++i) {
        std::vector<double> row{static_cast<double>(i), table.r(i), table.populations(i)};
        for (int k = 0; k < charges.count(); ++k) {
            row.push_back(table.averages(i, k));
        }
        art.steps.add_row(std::move(row));
    }

    const double f_tau = free_entropy(gibbs.state, charges, cfg.betas);
    art.report.add_total("log_partition", gibbs.log_partition, "nat");
    art.report.add_total("free_entropy", f_tau, "nat");
    art.report.add_total("entropy", von_neumann_entropy(gibbs.state), "nat");
    art.report.add_check("free_entropy_is_minus_log_partition",
                         std::abs(f_tau + gibbs.log_partition) <= 1e-10);
    return art;
}

RunArtifacts run_solve(const ExperimentConfig& cfg) {
    const ChargeSet& charges = *cfg.charges;
    const SolveConfig& solve = *cfg.solve;
    const SolveResult result =
        solve_betas(charges, solve.targets, solve.initial_betas, solve.options);
    const GibbsState gibbs = gibbs_state(charges, result.betas);

    RunArtifacts art;
    art.steps.columns = {"charge[1]", "target[charge]", "beta[1/charge]",
                         "achieved[charge]"};
    for (int k = 0; k < charges.count(); ++k) {
        const double achieved =
            std::real((charges.charge(k).matrix() * gibbs.state.matrix()).trace());
        art.steps.add_row({static_cast<double>(k), solve.targets[k], result.betas[k],
                           achieved});
    }
    art.report.add_total("residual", result.residual, "charge");
    art.report.add_total("iterations", static_cast<double>(result.iterations), "1");
    art.report.add_total("log_partition", gibbs.log_partition, "nat");
    art.report.add_check("converged", result.residual <= solve.options.tol);
    return art;
}

RunArtifacts run_trade(const ExperimentConfig& cfg) {
    PlanOptions options;
    options.target_charge = cfg.target_charge;
    const TradePlan plan = plan_trade(*cfg.bath, cfg.eta, cfg.epsilon, options);
    const TradeCoefficients coeff = xy(*cfg.bath);

    RunArtifacts art;
    art.steps.columns = {"step[1]",        "dn1[copies]",      "dn2[copies]",
                         "delta_q[1]",     "dA_b[charge-A]",   "dB_b[charge-B]",
                         "dF_b[nat]"};
    for (size_t i = 0; i < plan.steps.size(); ++i) {
        const TradeOutcome& s = plan.steps[i];
        art.steps.add_row({static_cast<double>(i), static_cast<double>(s.dn1),
                           static_cast<double>(s.dn2), s.delta_q, s.da_bath,
                           s.db_bath, s.df_bath});
    }
    art.report.add_total("x", coeff.x, "1");
    art.report.add_total("y", coeff.y, "1");
    art.report.add_total("step_count", static_cast<double>(plan.step_count), "1");
    art.report.add_total("total_dA_b", plan.total_da, "charge-A");
    art.report.add_total("total_dB_b", plan.total_db, "charge-B");
    art.report.add_total("total_dF_b", plan.total_df, "nat");
    art.report.add_total("per_step_bound", plan.per_step_bound, "nat");

    const double gained = plan.target_charge == 'A' ? std::abs(plan.total_da)
                                                    : std::abs(plan.total_db);
    art.report.add_check("target_reached", gained >= cfg.eta);
    art.report.add_check("free_entropy_within_budget", plan.total_df <= cfg.epsilon);
    bool steps_positive = true;
    for (const TradeOutcome& s : plan.steps) {
        steps_positive = steps_positive && s.df_bath > 0 &&
                         s.df_bath <= plan.per_step_bound + 1e-15;
    }
    art.report.add_check("per_step_cost_bounded", steps_positive);
    return art;
}

RunArtifacts run_extract(const ExperimentConfig& cfg) {
    const ChargeSet& charges = *cfg.charges;
    const SystemSpec sys = make_system(*cfg.state, charges);
    const DensityMatrix target =
        cfg.target ? *cfg.target : gibbs_state(charges, cfg.betas).state;
    const ExtractionReport report =
        run_extraction(sys, *cfg.bath, cfg.delta_p, target);

    RunArtifacts art;
    art.steps.columns = {"macro[1]",       "level_i[1]",     "level_j[1]",
                         "dn1[copies]",    "dn2[copies]",    "combo[1]",
                         "lambda[1]",      "micro_count[1]", "transfer[1]",
                         "dW_A[charge-A]", "dW_B[charge-B]", "dS_s[nat]",
                         "dS_b[nat]",      "dF_b[nat]"};
    for (size_t i = 0; i < report.macros.size(); ++i) {
        const MacroRecord& m = report.macros[i];
        art.steps.add_row({static_cast<double>(i), static_cast<double>(m.level_i),
                           static_cast<double>(m.level_j), static_cast<double>(m.dn1),
                           static_cast<double>(m.dn2), m.combo, m.lambda,
                           static_cast<double>(m.micro_count), m.transfer, m.dw_a,
                           m.dw_b, m.ds_s, m.ds_b, m.df_b});
    }
    art.report.add_total("W_A", report.w_a, "charge-A");
    art.report.add_total("W_B", report.w_b, "charge-B");
    art.report.add_total("dF_s", report.df_s, "nat");
    art.report.add_total("deficit", report.deficit, "nat");
    art.report.add_total("dF_b_total", report.df_b_total, "nat");
    art.report.add_total("step_count", static_cast<double>(report.step_count), "1");
    art.report.add_total("delta_p", report.delta_p, "1");
    art.report.add_check("second_law", report.deficit >= -1e-9);
    art.report.add_check("bath_cost_nonnegative", report.df_b_total >= -1e-12);
    return art;
}

Matrix rotation_block(int dim, double theta) {
    Matrix c = Matrix::Identity(dim, dim);
    c(0, 0) = std::cos(theta);
    c(0, 1) = std::sin(theta);
    c(1, 0) = -std::sin(theta);
    c(1, 1) = std::cos(theta);
    return c;
}

RunArtifacts run_battery(const ExperimentConfig& cfg) {
    const BatteryConfig& bat = *cfg.battery;
    const int ns = static_cast<int>(bat.sys_a.size());
    const int nb = static_cast<int>(bat.bath_a.size());
    if (ns < 2) {
        throw ConfigError("config: battery system needs at least two levels");
    }
    const auto to_vec = [](const std::vector<double>& v) {
        RealVector out(v.size());
        for (size_t i = 0; i < v.size(); ++i) out(i) = v[i];
        return out;
    };
    RealVector av(ns * nb), bv(ns * nb);
    for (int i = 0; i < ns; ++i) {
        for (int k = 0; k < nb; ++k) {
            av(i * nb + k) = bat.sys_a[i] + bat.bath_a[k];
            bv(i * nb + k) = bat.sys_b[i] + bat.bath_b[k];
        }
    }
    const Ladder la = make_ladder(bat.ladder_size, bat.ladder_spacing);
    const Ladder lb = make_ladder(bat.ladder_size, bat.ladder_spacing);
    const LiftedUnitary u1 =
        build_U1(rotation_block(ns, bat.theta), to_vec(bat.sys_a), to_vec(bat.sys_b),
                 to_vec(bat.bath_a), to_vec(bat.bath_b), la, lb);
    const LiftedUnitary u2 = build_U2(av, bv, bat.swap_low, bat.swap_high, la, lb);
    const UnitaryOperator composed(u2.base.matrix() * u1.base.matrix());
    const LiftedUnitary lifted = lift_unitary(composed, av, bv, la, lb);

    const WeightState wa = gaussian_weight(la, bat.width);
    const WeightState wb = gaussian_weight(lb, bat.width);
    const DensityMatrix& rho = *cfg.state;

    const CommutatorNorms residual = conservation_residual(lifted);
    const EvolutionResult ev = evolve(lifted, rho, wa, wb);
    const double gap = implicit_explicit_gap(rho, wa, wb, composed, lifted);
    const double ds = entropy_nondecrease_check(lifted, rho, wa, wb);

    double drift = 0.0;
    for (int k = 0; k < la.size; ++k) {
        drift = std::max(drift, std::abs(ev.momentum_a_after(k) - ev.momentum_a_before(k)));
        drift = std::max(drift, std::abs(ev.momentum_b_after(k) - ev.momentum_b_before(k)));
    }

    RunArtifacts art;
    art.steps.columns = {"kappa[1]", "mu_A_before[1]", "mu_A_after[1]",
                         "mu_B_before[1]", "mu_B_after[1]"};
    for (int k = 0; k < la.size; ++k) {
        art.steps.add_row({static_cast<double>(k), ev.momentum_a_before(k),
                           ev.momentum_a_after(k), ev.momentum_b_before(k),
                           ev.momentum_b_after(k)});
    }
    art.report.add_total("work_A", ev.work_a, "charge-A");
    art.report.add_total("work_B", ev.work_b, "charge-B");
    art.report.add_total("dA_block", ev.da_block, "charge-A");
    art.report.add_total("dB_block", ev.db_block, "charge-B");
    art.report.add_total("dS_block", ds, "nat");
    art.report.add_total("gap", gap, "1");
    art.report.add_total("residual_A", residual.a, "charge-A");
    art.report.add_total("residual_B", residual.b, "charge-B");
    art.report.add_total("momentum_drift", drift, "1");
    art.report.add_total("max_shift_A", static_cast<double>(lifted.max_shift_a), "rungs");
    art.report.add_total("max_shift_B", static_cast<double>(lifted.max_shift_b), "rungs");
    art.report.add_check("conserving_lift", residual.a <= tol::conservation &&
                                                residual.b <= tol::conservation);
    art.report.add_check("first_law_A", std::abs(ev.work_a + ev.da_block) <= 1e-9);
    art.report.add_check("first_law_B", std::abs(ev.work_b + ev.db_block) <= 1e-9);
    art.report.add_check("entropy_nondecrease", ds >= -1e-10);
    art.report.add_check("momentum_preserved", drift <= 1e-8);
    return art;
}

RunArtifacts run_audit(const ExperimentConfig& cfg) {
    const AuditReport audit =
        second_law_audit(*cfg.state, *cfg.charges, *cfg.bath, cfg.trials, *cfg.seed);

    RunArtifacts art;
    art.steps.columns = {"trials[1]", "violations[1]", "max_combined[nat]",
                         "min_subadditivity[nat]", "min_dF_b[nat]"};
    art.steps.add_row({static_cast<double>(audit.trials),
                       static_cast<double>(audit.violations), audit.max_combined,
                       audit.min_subadditivity, audit.min_df_b});
    art.report.add_total("trials", static_cast<double>(audit.trials), "1");
    art.report.add_total("violations", static_cast<double>(audit.violations), "1");
    art.report.add_total("max_combined", audit.max_combined, "nat");
    art.report.add_total("min_subadditivity", audit.min_subadditivity, "nat");
    art.report.add_total("min_dF_b", audit.min_df_b, "nat");
    art.report.add_total("worst_seed", static_cast<double>(audit.worst_seed), "1");
    art.report.add_check("no_violations", audit.violations == 0);
    return art;
}

struct SweepMetric {
    std::string column;
    std::string total_key;
};

SweepMetric sweep_metric(const std::string& kind) {
    if (kind == "thermal") return {"free_entropy[nat]", "free_entropy"};
    if (kind == "solve-betas") return {"residual[charge]", "residual"};
    if (kind == "trade") return {"total_dF_b[nat]", "total_dF_b"};
    if (kind == "extract") return {"deficit[nat]", "deficit"};
    if (kind == "battery") return {"gap[1]", "gap"};
    return {"violations[1]", "violations"};
}

std::string axis_column(const std::string& parameter) {
    if (parameter == "delta_p") return "delta_p[1]";
    if (parameter == "eta") return "eta[charge]";
    if (parameter == "epsilon") return "epsilon[nat]";
    if (parameter == "width") return "width[rungs]";
    if (parameter == "theta") return "theta[rad]";
    if (parameter == "beta_a") return "beta_a[1/charge-A]";
    if (parameter == "beta_b") return "beta_b[1/charge-B]";
    throw ConfigError("config: unsupported sweep parameter '" + parameter + "'");
}

void apply_parameter(ExperimentConfig& cfg, const std::string& parameter, double value) {
    if (parameter == "delta_p") {
        cfg.delta_p = value;
    } else if (parameter == "eta") {
        cfg.eta = value;
    } else if (parameter == "epsilon") {
        cfg.epsilon = value;
    } else if (parameter == "width") {
        if (!cfg.battery) throw ConfigError("config: width sweep needs a battery block");
        cfg.battery->width = value;
    } else if (parameter == "theta") {
        if (!cfg.battery) throw ConfigError("config: theta sweep needs a battery block");
        cfg.battery->theta = value;
    } else if (parameter == "beta_a" || parameter == "beta_b") {
        if (!cfg.bath) throw ConfigError("config: beta sweep needs a bath");
        (parameter == "beta_a" ? cfg.bath->beta_a : cfg.bath->beta_b) = value;
    }
    if (parameter == "width" || parameter == "theta") {
        cfg.resolved["battery"][parameter] = value;
    } else if (parameter == "beta_a" || parameter == "beta_b") {
        cfg.resolved["bath"][parameter] = value;
    } else {
        cfg.resolved[parameter] = value;
    }
}

}  // namespace

RunArtifacts run_experiment(const ExperimentConfig& cfg) {
    RunArtifacts art;
    if (cfg.kind == "thermal") {
        art = run_thermal(cfg);
    } else if (cfg.kind == "solve-betas") {
        art = run_solve(cfg);
    } else if (cfg.kind == "trade") {
        art = run_trade(cfg);
    } else if (cfg.kind == "extract") {
        art = run_extract(cfg);
    } else if (cfg.kind == "battery") {
        art = run_battery(cfg);
    } else if (cfg.kind == "audit") {
        art = run_audit(cfg);
    } else {
        throw ConfigError("config: unknown experiment '" + cfg.kind + "'");
    }
    art.report.config = cfg.resolved;
    return art;
}

CsvTable run_sweep(const ExperimentConfig& cfg) {
    const SweepMetric metric = sweep_metric(cfg.kind);
    CsvTable table;
    for (const GridAxis& axis : cfg.grid) {
        table.columns.push_back(axis_column(axis.parameter));
    }
    table.columns.push_back(metric.column);

    if (cfg.grid.empty()) {
        return table;
    }
    const size_t n0 = cfg.grid[0].values.size();
    const size_t n1 = cfg.grid.size() > 1 ? cfg.grid[1].values.size() : 1;
    for (size_t i = 0; i < n0; ++i) {
        for (size_t j = 0; j < n1; ++j) {
            ExperimentConfig point = cfg;
            std::vector<double> row;
            row.push_back(cfg.grid[0].values[i]);
            apply_parameter(point, cfg.grid[0].parameter, cfg.grid[0].values[i]);
            if (cfg.grid.size() > 1) {
                row.push_back(cfg.grid[1].values[j]);
                apply_parameter(point, cfg.grid[1].parameter, cfg.grid[1].values[j]);
            }
            const RunArtifacts art = run_experiment(point);
            row.push_back(art.report.totals.at(metric.total_key).get<double>());
            table.add_row(std::move(row));
        }
    }
    return table;
}

void write_artifacts(const RunArtifacts& artifacts, const std::filesystem::path& out_dir,
                     const std::string& format) {
    if (format != "csv" && format != "json") {
        throw ConfigError("config: format must be csv or json");
    }
    std::filesystem::create_directories(out_dir);
    write_atomic(out_dir / "report.json", artifacts.report.to_json().dump(2) + "\n");
    if (format == "csv") {
        write_atomic(out_dir / (artifacts.steps_name + ".csv"), artifacts.steps.render());
    } else {
        nlohmann::json doc{{"columns", artifacts.steps.columns},
                           {"rows", artifacts.steps.rows}};
        write_atomic(out_dir / (artifacts.steps_name + ".json"), doc.dump(2) + "\n");
    }
}

int exit_code_for(const std::exception& error) {
    if (dynamic_cast<const ConfigError*>(&error)) return exit_code::config;
    if (dynamic_cast<const ExcludedRatioError*>(&error)) return exit_code::respecify;
    return exit_code::invariant;
}

}  // namespace ggethermo
