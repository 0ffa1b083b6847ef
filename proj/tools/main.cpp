#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ggethermo/config.hpp"
#include "ggethermo/errors.hpp"
#include "ggethermo/numtheory.hpp"
#include "ggethermo/runner.hpp"

namespace {

using namespace ggethermo;

struct CommonArgs {
    std::string config_path;
    std::string out_dir;
    std::string format = "csv";
    std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* sub, CommonArgs& args) {
    sub->add_option("--config", args.config_path, "experiment description (JSON)")
        ->required();
    sub->add_option("--out", args.out_dir, "output directory");
    sub->add_option("--format", args.format, "step table format")
        ->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--seed", args.seed, "override the config seed");
}

std::filesystem::path resolve_out(const CommonArgs& args) {
    if (!args.out_dir.empty()) return args.out_dir;
    if (const char* env = std::getenv("GGETHERMO_OUT"); env && *env) return env;
    return "out";
}

ExperimentConfig load_for(const CommonArgs& args, const std::string& kind) {
    std::ifstream in(args.config_path);
    if (!in) {
        throw ConfigError("config: cannot read '" + args.config_path + "'");
    }
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config: parse error: ") + e.what());
    }
    if (args.seed) {
        doc["seed"] = *args.seed;
    }
    ExperimentConfig cfg = parse_config(doc);
    if (!kind.empty() && cfg.kind != kind) {
        throw ConfigError("config: experiment '" + cfg.kind +
                          "' does not match subcommand '" + kind + "'");
    }
    return cfg;
}

void run_one(const CommonArgs& args, const std::string& kind) {
    const auto start = std::chrono::steady_clock::now();
    const ExperimentConfig cfg = load_for(args, kind);
    RunArtifacts art = run_experiment(cfg);
    write_artifacts(art, resolve_out(args), args.format);
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
    std::fprintf(stderr, "%s: done in %.3f s\n", kind.c_str(), elapsed.count());
}

void run_sweep_cmd(const CommonArgs& args) {
    const auto start = std::chrono::steady_clock::now();
    const ExperimentConfig cfg = load_for(args, "");
    RunArtifacts art;
    art.steps = run_sweep(cfg);
    art.steps_name = "sweep";
    art.report.config = cfg.resolved;
    art.report.add_total("points", static_cast<double>(art.steps.rows.size()), "1");
    write_artifacts(art, resolve_out(args), args.format);
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
    std::fprintf(stderr, "sweep: %zu points in %.3f s\n", art.steps.rows.size(),
                 elapsed.count());
}

Rational parse_rational_arg(const std::string& text, const std::string& what) {
    try {
        return Rational::from_string(text);
    } catch (const Error& e) {
        throw ConfigError("config: " + what + ": " + e.what());
    }
}

long long parse_integer_arg(const std::string& text, const std::string& what) {
    try {
        size_t used = 0;
        const long long v = std::stoll(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config: " + what + " must be an integer, got '" + text + "'");
    }
}

int run_sequence(long long order) {
    for (const Rational& f : farey_sequence(static_cast<int>(order))) {
        std::printf("%s\n", f.to_string().c_str());
    }
    return exit_code::ok;
}

int run_bezout(long long u, long long v) {
    const BezoutPair p = bezout(u, v);
    std::printf("(%lld, %lld)\n", p.dn1, p.dn2);
    return exit_code::ok;
}

int run_coverage(long long order, const std::string& eps, const std::string& y) {
    const CoverageReport report =
        verify_coverage(static_cast<int>(order), parse_rational_arg(eps, "eps"),
                        parse_rational_arg(y, "y"));
    std::printf("order=%d pairs=%lld ok=%d min_margin=%s\n", report.order,
                static_cast<long long>(report.checked_pairs), report.ok ? 1 : 0,
                report.min_margin.to_string().c_str());
    return report.ok ? exit_code::ok : exit_code::invariant;
}

int run_select(const std::string& measured, const std::string& delta,
               const std::string& eps, const std::string& y) {
    const RobustResult result =
        robust_select(parse_rational_arg(measured, "measured"),
                      parse_rational_arg(delta, "delta"), parse_rational_arg(eps, "eps"),
                      parse_rational_arg(y, "y"));
    if (const auto* sel = std::get_if<RobustSelection>(&result)) {
        std::printf("(%lld, %lld)\n", sel->dn1, sel->dn2);
        std::fprintf(stderr, "order=%lld nearest=%s combo_bound=%s\n", sel->order,
                     sel->nearest.to_string().c_str(),
                     sel->combo_bound.to_string().c_str());
        return exit_code::ok;
    }
    const auto& respec = std::get<RespecifyRequired>(result);
    std::fprintf(stderr, "%s\n", respec.message().c_str());
    return exit_code::respecify;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Thermodynamics of multiple conserved quantities: generalized "
                 "Gibbs states, bath trades, extraction protocols and explicit "
                 "battery ladders."};
    app.require_subcommand(1);

    CommonArgs args;
    int rc = exit_code::ok;

    for (const std::string kind :
         {"thermal", "solve-betas", "trade", "extract", "battery", "audit"}) {
        CLI::App* sub = app.add_subcommand(kind, "run the '" + kind + "' experiment");
        add_common(sub, args);
        sub->callback([&args, kind] { run_one(args, kind); });
    }

    CLI::App* sweep = app.add_subcommand("sweep", "grid sweep of one experiment");
    add_common(sweep, args);
    sweep->callback([&args] { run_sweep_cmd(args); });

    CLI::App* farey = app.add_subcommand(
        "farey", "exact selection toolkit: farey | bezout | coverage | robust-select");
    farey->require_subcommand(1);

    long long seq_order = 0;
    CLI::App* seq = farey->add_subcommand("farey", "list the Farey sequence of an order");
    seq->add_option("order", seq_order)->required()->check(CLI::PositiveNumber);
    seq->callback([&] { rc = run_sequence(seq_order); });

    long long bez_u = 0, bez_v = 0;
    CLI::App* bez = farey->add_subcommand("bezout", "canonical pair with u*dn1 + v*dn2 = 1");
    bez->add_option("u", bez_u)->required();
    bez->add_option("v", bez_v)->required();
    bez->callback([&] { rc = run_bezout(bez_u, bez_v); });

    long long cov_order = 0;
    std::string cov_eps, cov_y = "1";
    CLI::App* cov = farey->add_subcommand("coverage",
                                          "verify punctured intervals cover each window");
    cov->add_option("order", cov_order)->required()->check(CLI::PositiveNumber);
    cov->add_option("--eps", cov_eps, "combination tolerance (decimal string)")->required();
    cov->add_option("--y", cov_y, "second trade coefficient (decimal string)");
    cov->callback([&] { rc = run_coverage(cov_order, cov_eps, cov_y); });

    std::string sel_measured, sel_delta, sel_eps, sel_y = "1";
    CLI::App* sel = farey->add_subcommand("robust-select",
                                          "integer pair robust to the measurement window");
    sel->add_option("measured", sel_measured, "measured ratio (decimal string)")->required();
    sel->add_option("--delta", sel_delta, "measurement half-width")->required();
    sel->add_option("--eps", sel_eps, "combination tolerance")->required();
    sel->add_option("--y", sel_y, "second trade coefficient");
    sel->callback([&] { rc = run_select(sel_measured, sel_delta, sel_eps, sel_y); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int cli_rc = app.exit(e);
        return cli_rc == 0 ? exit_code::ok : exit_code::config;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_code_for(e);
    }
    return rc;
}
