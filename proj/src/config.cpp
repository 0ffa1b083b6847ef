#include "ggethermo/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <utility>

#include "ggethermo/errors.hpp"

namespace ggethermo {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& message) {
    throw ConfigError("config: " + message);
}

const json& require_key(const json& node, const std::string& key) {
    const auto it = node.find(key);
    if (it == node.end()) {
        fail("missing required key '" + key + "'");
    }
    return *it;
}

double finite_number(const json& node, const std::string& what) {
    if (!node.is_number()) {
        fail(what + " must be a number");
    }
    const double v = node.get<double>();
    if (!std::isfinite(v)) {
        fail(what + " must be finite");
    }
    return v;
}

std::vector<double> number_list(const json& node, const std::string& what) {
    if (!node.is_array()) {
        fail(what + " must be an array of numbers");
    }
    std::vector<double> out;
    out.reserve(node.size());
    for (const auto& item : node) {
        out.push_back(finite_number(item, what + " entry"));
    }
    return out;
}

Matrix pauli(char which) {
    Matrix m(2, 2);
    switch (which) {
        case 'x': m << 0, 1, 1, 0; break;
        case 'y': m << 0, Complex(0, -1), Complex(0, 1), 0; break;
        default:  m << 1, 0, 0, -1; break;
    }
    return m;
}

std::vector<Rational> exact_list(const json& node, const std::string& what, size_t expected) {
    if (!node.is_array() || node.size() != expected) {
        fail(what + " must list one exact value per level");
    }
    std::vector<Rational> out;
    out.reserve(node.size());
    for (const auto& item : node) {
        if (!item.is_string()) {
            fail(what + " entries must be decimal strings");
        }
        try {
            out.push_back(Rational::from_string(item.get<std::string>()));
        } catch (const Error& e) {
            fail(what + ": " + e.what());
        }
    }
    return out;
}

BathSpec parse_bath(const json& node) {
    if (!node.is_object()) {
        fail("bath must be an object");
    }
    const std::vector<double> a = number_list(require_key(node, "a"), "bath.a");
    const std::vector<double> b = number_list(require_key(node, "b"), "bath.b");
    const double beta_a = finite_number(require_key(node, "beta_a"), "bath.beta_a");
    const double beta_b = finite_number(require_key(node, "beta_b"), "bath.beta_b");
    BathSpec spec;
    try {
        spec = make_bath(a, b, beta_a, beta_b);
    } catch (const Error& e) {
        fail(std::string("bath: ") + e.what());
    }
    if (node.contains("a_exact")) {
        spec.a_exact = exact_list(node["a_exact"], "bath.a_exact", a.size());
    }
    if (node.contains("b_exact")) {
        spec.b_exact = exact_list(node["b_exact"], "bath.b_exact", b.size());
    }
    if (node.contains("beta_a_exact")) {
        spec.beta_a_exact = exact_list(json::array({node["beta_a_exact"]}), "bath.beta_a_exact", 1)[0];
    }
    if (node.contains("beta_b_exact")) {
        spec.beta_b_exact = exact_list(json::array({node["beta_b_exact"]}), "bath.beta_b_exact", 1)[0];
    }
    return spec;
}

ChargeSet parse_charges(const json& doc) {
    const json& list = require_key(doc, "charges");
    if (!list.is_array() || list.empty()) {
        fail("charges must be a non-empty array");
    }
    std::vector<HermitianOperator> charges;
    for (const auto& node : list) {
        charges.push_back(parse_charge(node));
    }
    std::vector<std::string> names;
    if (doc.contains("charge_names")) {
        for (const auto& n : doc["charge_names"]) {
            if (!n.is_string()) {
                fail("charge_names entries must be strings");
            }
            names.push_back(n.get<std::string>());
        }
    }
    try {
        return ChargeSet(std::move(charges), std::move(names));
    } catch (const Error& e) {
        fail(std::string("charges: ") + e.what());
    }
}

BatteryConfig parse_battery(const json& node) {
    if (!node.is_object()) {
        fail("battery must be an object");
    }
    BatteryConfig cfg;
    cfg.sys_a = number_list(require_key(node, "sys_a"), "battery.sys_a");
    cfg.sys_b = number_list(require_key(node, "sys_b"), "battery.sys_b");
    cfg.bath_a = number_list(require_key(node, "bath_a"), "battery.bath_a");
    cfg.bath_b = number_list(require_key(node, "bath_b"), "battery.bath_b");
    if (cfg.sys_a.size() != cfg.sys_b.size() || cfg.bath_a.size() != cfg.bath_b.size()) {
        fail("battery charge tables disagree in length");
    }
    cfg.theta = finite_number(require_key(node, "theta"), "battery.theta");
    const json& swap = require_key(node, "swap");
    if (!swap.is_array() || swap.size() != 2) {
        fail("battery.swap must be [low, high]");
    }
    cfg.swap_low = swap[0].get<long long>();
    cfg.swap_high = swap[1].get<long long>();
    const json& ladder = require_key(node, "ladder");
    cfg.ladder_size = static_cast<int>(finite_number(require_key(ladder, "size"), "ladder.size"));
    cfg.ladder_spacing = ladder.contains("spacing")
                             ? finite_number(ladder["spacing"], "ladder.spacing")
                             : 1.0;
    cfg.width = finite_number(require_key(node, "width"), "battery.width");
    if (cfg.ladder_size < 3 || cfg.ladder_spacing <= 0 || cfg.width <= 0) {
        fail("battery ladder parameters out of range");
    }
    return cfg;
}

SolveConfig parse_solve(const json& node) {
    if (!node.is_object()) {
        fail("solve must be an object");
    }
    SolveConfig cfg;
    cfg.targets = number_list(require_key(node, "targets"), "solve.targets");
    if (node.contains("initial_betas")) {
        cfg.initial_betas = number_list(node["initial_betas"], "solve.initial_betas");
    } else {
        cfg.initial_betas.assign(cfg.targets.size(), 0.0);
    }
    if (node.contains("tol")) {
        cfg.options.tol = finite_number(node["tol"], "solve.tol");
    }
    if (node.contains("max_iterations")) {
        cfg.options.max_iterations = node["max_iterations"].get<int>();
    }
    return cfg;
}

std::vector<GridAxis> parse_grid(const json& node) {
    if (!node.is_array()) {
        fail("grid must be an array of axes");
    }
    if (node.size() > 2) {
        fail("grid supports at most two parameters");
    }
    std::vector<GridAxis> grid;
    for (const auto& axis : node) {
        GridAxis g;
        const json& name = require_key(axis, "parameter");
        if (!name.is_string()) {
            fail("grid parameter must be a string");
        }
        g.parameter = name.get<std::string>();
        g.values = number_list(require_key(axis, "values"), "grid values");
        grid.push_back(std::move(g));
    }
    return grid;
}

}  // namespace

Matrix parse_matrix(const json& node) {
    if (!node.is_array() || node.empty()) {
        fail("matrix must be a non-empty array of rows");
    }
    const size_t dim = node.size();
    Matrix m(dim, dim);
    for (size_t i = 0; i < dim; ++i) {
        const json& row = node[i];
        if (!row.is_array() || row.size() != dim) {
            fail("matrix rows must all have the same length as the row count");
        }
        for (size_t j = 0; j < dim; ++j) {
            const json& cell = row[j];
            if (!cell.is_array() || cell.size() != 2) {
                fail("matrix entries must be [re, im] pairs");
            }
            m(i, j) = Complex(finite_number(cell[0], "matrix entry"),
                              finite_number(cell[1], "matrix entry"));
        }
    }
    return m;
}

HermitianOperator parse_charge(const json& node) {
    try {
        if (node.is_string()) {
            const std::string name = node.get<std::string>();
            if (name == "sigma_x") return HermitianOperator(pauli('x'));
            if (name == "sigma_y") return HermitianOperator(pauli('y'));
            if (name == "sigma_z") return HermitianOperator(pauli('z'));
            fail("unknown charge preset '" + name + "'");
        }
        if (node.is_object() && node.contains("diag")) {
            const std::vector<double> d = number_list(node["diag"], "charge diag");
            Matrix m = Matrix::Zero(d.size(), d.size());
            for (size_t i = 0; i < d.size(); ++i) {
                m(i, i) = d[i];
            }
            return HermitianOperator(std::move(m));
        }
        if (node.is_object() && node.contains("matrix")) {
            return HermitianOperator(parse_matrix(node["matrix"]));
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        fail(std::string("charge: ") + e.what());
    }
    fail("charge must be a preset name or {diag}/{matrix} object");
}

DensityMatrix parse_state(const json& node) {
    try {
        if (node.is_object() && node.contains("populations")) {
            const std::vector<double> p = number_list(node["populations"], "state populations");
            RealVector v(p.size());
            for (size_t i = 0; i < p.size(); ++i) {
                v(i) = p[i];
            }
            return DensityMatrix::diagonal(v);
        }
        if (node.is_object() && node.contains("matrix")) {
            return DensityMatrix(parse_matrix(node["matrix"]));
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        fail(std::string("state: ") + e.what());
    }
    fail("state must be a {populations} or {matrix} object");
}

ExperimentConfig parse_config(const json& doc) {
    if (!doc.is_object()) {
        fail("document root must be an object");
    }
    static const std::set<std::string> kinds{"thermal", "solve-betas", "trade",
                                            "extract", "battery", "audit"};
    ExperimentConfig cfg;
    const json& kind = require_key(doc, "experiment");
    if (!kind.is_string() || kinds.count(kind.get<std::string>()) == 0) {
        fail("experiment must be one of thermal, solve-betas, trade, extract, battery, audit");
    }
    cfg.kind = kind.get<std::string>();
    cfg.resolved = doc;

    if (doc.contains("seed")) {
        const json& seed = doc["seed"];
        if (!seed.is_number_integer() ||
            (!seed.is_number_unsigned() && seed.get<long long>() < 0)) {
            fail("seed must be a non-negative integer");
        }
        cfg.seed = seed.get<std::uint64_t>();
    }
    if (doc.contains("charges")) {
        cfg.charges = parse_charges(doc);
    }
    if (doc.contains("betas")) {
        cfg.betas = number_list(doc["betas"], "betas");
    }
    if (doc.contains("bath")) {
        cfg.bath = parse_bath(doc["bath"]);
    }
    if (doc.contains("state")) {
        cfg.state = parse_state(doc["state"]);
    }
    if (doc.contains("target")) {
        cfg.target = parse_state(doc["target"]);
    }
    if (doc.contains("delta_p")) {
        cfg.delta_p = finite_number(doc["delta_p"], "delta_p");
    }
    if (doc.contains("eta")) {
        cfg.eta = finite_number(doc["eta"], "eta");
    }
    if (doc.contains("epsilon")) {
        cfg.epsilon = finite_number(doc["epsilon"], "epsilon");
    }
    if (doc.contains("target_charge")) {
        const std::string t = doc["target_charge"].is_string()
                                  ? doc["target_charge"].get<std::string>()
                                  : std::string();
        if (t != "A" && t != "B") {
            fail("target_charge must be \"A\" or \"B\"");
        }
        cfg.target_charge = t[0];
    }
    if (doc.contains("trials")) {
        if (!doc["trials"].is_number_integer() || doc["trials"].get<long long>() <= 0) {
            fail("trials must be a positive integer");
        }
        cfg.trials = doc["trials"].get<int>();
    }
    if (doc.contains("solve")) {
        cfg.solve = parse_solve(doc["solve"]);
    }
    if (doc.contains("battery")) {
        cfg.battery = parse_battery(doc["battery"]);
    }
    if (doc.contains("grid")) {
        cfg.grid = parse_grid(doc["grid"]);
    }

    // per-kind completeness, so dispatch never starts half-configured
    const auto need = [&](bool ok, const std::string& what) {
        if (!ok) {
            fail(cfg.kind + " requires " + what);
        }
    };
    if (cfg.kind == "thermal") {
        need(cfg.charges.has_value(), "charges");
        need(!cfg.betas.empty(), "betas");
        need(static_cast<int>(cfg.betas.size()) == cfg.charges->count(),
             "one beta per charge");
    } else if (cfg.kind == "solve-betas") {
        need(cfg.charges.has_value(), "charges");
        need(cfg.solve.has_value(), "a solve block");
        need(cfg.solve->targets.size() == static_cast<size_t>(cfg.charges->count()),
             "one target per charge");
        need(cfg.solve->initial_betas.size() == cfg.solve->targets.size(),
             "one initial beta per charge");
    } else if (cfg.kind == "trade") {
        need(cfg.bath.has_value(), "a bath");
        need(cfg.eta > 0, "eta > 0");
        need(cfg.epsilon > 0, "epsilon > 0");
    } else if (cfg.kind == "extract") {
        need(cfg.charges.has_value(), "charges");
        need(!cfg.betas.empty(), "betas");
        need(static_cast<int>(cfg.betas.size()) == cfg.charges->count(),
             "one beta per charge");
        need(cfg.state.has_value(), "a state");
        need(cfg.delta_p > 0, "delta_p > 0");
    } else if (cfg.kind == "battery") {
        need(cfg.battery.has_value(), "a battery block");
        need(cfg.state.has_value(), "a block state");
        if (cfg.battery) {
            const size_t block =
                cfg.battery->sys_a.size() * cfg.battery->bath_a.size();
            need(cfg.state->dim() == static_cast<int>(block),
                 "a state on the system-bath block");
        }
    } else if (cfg.kind == "audit") {
        need(cfg.charges.has_value(), "charges");
        need(cfg.bath.has_value(), "a bath");
        need(cfg.state.has_value(), "a system state");
        need(cfg.trials > 0, "trials > 0");
        need(cfg.seed.has_value(), "a seed (randomized run)");
    }
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        fail("cannot read '" + path + "'");
    }
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        fail(std::string("parse error: ") + e.what());
    }
    return parse_config(doc);
}

}  // namespace ggethermo
