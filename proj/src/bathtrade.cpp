#include "ggethermo/bathtrade.hpp"

#include <algorithm>
#include <cmath>

namespace ggethermo {

namespace {

constexpr long long oracle_state_cap = 65536;

void check_shape(const BathSpec& s) {
    if (s.a.size() != s.b.size()) throw DimensionError("BathSpec: a and b lengths differ");
    if (s.levels() < 3) throw InvariantError("BathSpec: at least three levels required");
    if (!s.a_exact.empty() && static_cast<int>(s.a_exact.size()) != s.levels())
        throw DimensionError("BathSpec: a_exact length mismatch");
    if (!s.b_exact.empty() && static_cast<int>(s.b_exact.size()) != s.levels())
        throw DimensionError("BathSpec: b_exact length mismatch");
}

bool fully_exact(const BathSpec& s) {
    return !s.a_exact.empty() && !s.b_exact.empty() && s.beta_a_exact && s.beta_b_exact;
}

void check_pair(const BathSpec& spec, const OccupationPair& pair) {
    const int d = spec.levels();
    if (static_cast<int>(pair.n.size()) != d || static_cast<int>(pair.n_prime.size()) != d)
        throw DimensionError("OccupationPair: length does not match bath levels");
    long long sn = 0, sp = 0;
    for (int l = 0; l < d; ++l) {
        if (pair.n[l] < 0 || pair.n_prime[l] < 0)
            throw InvariantError("OccupationPair: negative occupation");
        if (l >= 3 && pair.n[l] != pair.n_prime[l])
            throw InvariantError("OccupationPair: levels beyond the first three must match");
        sn += pair.n[l];
        sp += pair.n_prime[l];
    }
    if (sn != sp) throw InvariantError("OccupationPair: copy counts differ");
}

double log_qn_of(const BathSpec& spec, const std::vector<long long>& n) {
    RealVector r = spec.level_log_weights();
    double log_z = spec.log_partition();
    double acc = 0.0;
    long long total = 0;
    for (size_t l = 0; l < n.size(); ++l) {
        acc -= static_cast<double>(n[l]) * r(static_cast<int>(l));
        total += n[l];
    }
    return acc - static_cast<double>(total) * log_z;
}

}  // namespace

RealVector BathSpec::level_log_weights() const {
    RealVector r(levels());
    for (int l = 0; l < levels(); ++l) r(l) = beta_a * a(l) + beta_b * b(l);
    return r;
}

double BathSpec::log_partition() const {
    RealVector r = level_log_weights();
    double lo = r.minCoeff();
    double acc = 0.0;
    for (int l = 0; l < levels(); ++l) acc += std::exp(-(r(l) - lo));
    return -lo + std::log(acc);
}

RealVector BathSpec::populations() const {
    RealVector r = level_log_weights();
    double log_z = log_partition();
    return (-(r.array()) - log_z).exp();
}

BathSpec make_bath(std::vector<double> a, std::vector<double> b, double beta_a,
                   double beta_b) {
    BathSpec spec;
    spec.a = Eigen::Map<const RealVector>(a.data(), static_cast<int>(a.size()));
    spec.b = Eigen::Map<const RealVector>(b.data(), static_cast<int>(b.size()));
    spec.beta_a = beta_a;
    spec.beta_b = beta_b;
    for (double v : a) spec.a_exact.push_back(Rational::from_double(v));
    for (double v : b) spec.b_exact.push_back(Rational::from_double(v));
    spec.beta_a_exact = Rational::from_double(beta_a);
    spec.beta_b_exact = Rational::from_double(beta_b);
    check_shape(spec);
    return spec;
}

BathValidation validate_bath(const BathSpec& spec) {
    check_shape(spec);
    BathValidation out;
    TradeCoefficients c = xy(spec);
    out.x = c.x;
    out.y = c.y;

    bool both_zero;
    if (fully_exact(spec)) {
        Rational xe = *spec.beta_a_exact * (spec.a_exact[1] - spec.a_exact[0]) +
                      *spec.beta_b_exact * (spec.b_exact[1] - spec.b_exact[0]);
        Rational ye = *spec.beta_a_exact * (spec.a_exact[2] - spec.a_exact[0]) +
                      *spec.beta_b_exact * (spec.b_exact[2] - spec.b_exact[0]);
        both_zero = xe.is_zero() && ye.is_zero();
    } else {
        both_zero = std::abs(c.x) <= 1e-12 && std::abs(c.y) <= 1e-12;
    }
    if (both_zero) {
        out.reason = "trade coefficients x and y both vanish";
        return out;
    }

    // Affine dependence b = alpha a + gamma over all levels, via 2x2 minors.
    bool affine = true;
    const int d = spec.levels();
    if (!spec.a_exact.empty() && !spec.b_exact.empty()) {
        for (int i = 1; i < d && affine; ++i)
            for (int j = i + 1; j < d && affine; ++j) {
                Rational minor = (spec.a_exact[i] - spec.a_exact[0]) *
                                     (spec.b_exact[j] - spec.b_exact[0]) -
                                 (spec.a_exact[j] - spec.a_exact[0]) *
                                     (spec.b_exact[i] - spec.b_exact[0]);
                if (!minor.is_zero()) affine = false;
            }
    } else {
        for (int i = 1; i < d && affine; ++i)
            for (int j = i + 1; j < d && affine; ++j) {
                double minor = (spec.a(i) - spec.a(0)) * (spec.b(j) - spec.b(0)) -
                               (spec.a(j) - spec.a(0)) * (spec.b(i) - spec.b(0));
                if (std::abs(minor) > 1e-12) affine = false;
            }
    }
    if (affine) {
        out.reason = "second charge is affine in the first; no independent trade direction";
        return out;
    }
    out.ok = true;
    return out;
}

void require_valid_bath(const BathSpec& spec) {
    BathValidation v = validate_bath(spec);
    if (!v.ok) throw InvariantError("bath rejected: " + v.reason);
}

TradeCoefficients xy(const BathSpec& spec) {
    check_shape(spec);
    TradeCoefficients c;
    c.x = spec.beta_a * (spec.a(1) - spec.a(0)) + spec.beta_b * (spec.b(1) - spec.b(0));
    c.y = spec.beta_a * (spec.a(2) - spec.a(0)) + spec.beta_b * (spec.b(2) - spec.b(0));
    return c;
}

long long choose_m(double x, double y, long long dn1, bool sign_flip) {
    if (dn1 < 1) throw InvariantError("choose_m: dn1 must be positive");
    if (y == 0.0) throw InvariantError("choose_m: y must be nonzero");
    double t = (x / y) * static_cast<double>(dn1);
    long long m;
    if (!sign_flip) {
        m = static_cast<long long>(std::ceil(t)) - 1;
        while (!(static_cast<double>(m) < t)) --m;
        while (static_cast<double>(m + 1) < t) ++m;
    } else {
        m = static_cast<long long>(std::floor(t)) + 1;
        while (!(t < static_cast<double>(m))) ++m;
        while (static_cast<double>(m - 1) > t) --m;
    }
    return m;
}

long long OccupationPair::copies() const {
    long long acc = 0;
    for (long long v : n) acc += v;
    return acc;
}

OccupationPair make_occupation_pair(std::vector<long long> n, long long dn1,
                                    long long dn2) {
    if (n.size() < 3) throw DimensionError("make_occupation_pair: need at least three levels");
    for (long long v : n)
        if (v < 0) throw InvariantError("make_occupation_pair: negative occupation");
    std::vector<long long> np = n;
    np[0] -= dn1 + dn2;
    np[1] += dn1;
    np[2] += dn2;
    if (np[0] < 0 || np[1] < 0 || np[2] < 0)
        throw InvariantError("make_occupation_pair: occupation change is infeasible");
    return OccupationPair{std::move(n), std::move(np)};
}

TradeOutcome trade_step(const BathSpec& spec, const OccupationPair& pair) {
    check_shape(spec);
    check_pair(spec, pair);
    TradeCoefficients c = xy(spec);
    const long long dn1 = pair.dn1(), dn2 = pair.dn2();
    double s = c.x * static_cast<double>(dn1) + c.y * static_cast<double>(dn2);
    double qn = std::exp(log_qn_of(spec, pair.n));

    TradeOutcome out;
    out.dn1 = dn1;
    out.dn2 = dn2;
    out.delta_q = -std::expm1(-s) * qn;
    double gap_a = (spec.a(1) - spec.a(0)) * dn1 + (spec.a(2) - spec.a(0)) * dn2;
    double gap_b = (spec.b(1) - spec.b(0)) * dn1 + (spec.b(2) - spec.b(0)) * dn2;
    out.da_bath = out.delta_q * gap_a;
    out.db_bath = out.delta_q * gap_b;
    out.ds_bath = 0.0;
    out.df_bath = out.delta_q * s;
    out.log_pair_count = 0.0;
    return out;
}

double log_multinomial(const std::vector<long long>& n) {
    long long total = 0;
    double acc = 0.0;
    for (long long v : n) {
        if (v < 0) throw InvariantError("log_multinomial: negative occupation");
        total += v;
        acc -= std::lgamma(static_cast<double>(v) + 1.0);
    }
    return acc + std::lgamma(static_cast<double>(total) + 1.0);
}

RealizedPair realize_class_pair(const BathSpec& spec, long long dn1, long long dn2,
                                long long max_copies) {
    check_shape(spec);
    const int d = spec.levels();
    TradeCoefficients c = xy(spec);
    double s = c.x * static_cast<double>(dn1) + c.y * static_cast<double>(dn2);

    if (dn1 == 0 && dn2 == 0) {
        std::vector<long long> zeros(d, 0);
        RealizedPair triv;
        triv.pair = OccupationPair{zeros, zeros};
        triv.combo = 0.0;
        return triv;
    }

    std::vector<long long> delta(d, 0);
    delta[0] = -(dn1 + dn2);
    delta[1] = dn1;
    delta[2] = dn2;
    std::vector<long long> lo(d, 0);
    long long n_min = 0;
    for (int l = 0; l < d; ++l) {
        lo[l] = std::max<long long>(0, -delta[l]);
        n_min += lo[l];
    }
    if (n_min > max_copies)
        throw ResourceError("realize_class_pair: copy budget below the feasible minimum");

    RealVector q = spec.populations();

    auto build = [&](long long total) {
        std::vector<long long> n(d);
        long long sum = 0;
        for (int l = 0; l < d; ++l) {
            double want = q(l) * static_cast<double>(total) - static_cast<double>(delta[l]) / 2.0;
            n[l] = std::max(lo[l], static_cast<long long>(std::llround(want)));
            sum += n[l];
        }
        while (sum != total) {
            int best = -1;
            if (sum < total) {
                for (int l = 0; l < d; ++l)
                    if (best < 0 || q(l) > q(best)) best = l;
                ++n[best];
                ++sum;
            } else {
                for (int l = 0; l < d; ++l)
                    if (n[l] > lo[l] && (best < 0 || q(l) > q(best))) best = l;
                if (best < 0) return std::vector<long long>();
                --n[best];
                --sum;
            }
        }
        return n;
    };

    auto score_of = [&](const std::vector<long long>& n) {
        std::vector<long long> np(n);
        for (int l = 0; l < d; ++l) np[l] += delta[l];
        double log_k = std::min(log_multinomial(n), log_multinomial(np));
        return log_k + log_qn_of(spec, n);
    };

    std::vector<long long> best_n;
    double best_score = -std::numeric_limits<double>::infinity();
    long long start = std::max<long long>(n_min, 1);
    std::vector<long long> grid;
    for (long long extra = 0; extra < 4; ++extra)
        if (start + extra <= max_copies) grid.push_back(start + extra);
    double cur = static_cast<double>(start);
    while (cur <= static_cast<double>(max_copies)) {
        grid.push_back(static_cast<long long>(cur));
        cur *= 1.12;
    }
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    for (long long total : grid) {
        std::vector<long long> n = build(total);
        if (n.empty()) continue;
        double sc = score_of(n);
        if (sc > best_score) {
            best_score = sc;
            best_n = n;
        }
    }
    if (best_n.empty())
        throw ResourceError("realize_class_pair: no feasible occupation within the copy budget");

    RealizedPair out;
    out.pair = make_occupation_pair(best_n, dn1, dn2);
    std::vector<long long> np = out.pair.n_prime;
    out.log_k = std::min(log_multinomial(best_n), log_multinomial(np));
    out.log_qn = log_qn_of(spec, best_n);
    out.log_qnp = log_qn_of(spec, np);
    out.combo = s;
    return out;
}

TradePlan plan_trade(const BathSpec& spec, double eta, double epsilon,
                     const PlanOptions& options) {
    require_valid_bath(spec);
    if (eta < 0.0) throw InvariantError("plan_trade: eta must be nonnegative");
    if (epsilon <= 0.0) throw InvariantError("plan_trade: epsilon must be positive");
    if (options.target_charge != 'A' && options.target_charge != 'B')
        throw InvariantError("plan_trade: target charge must be 'A' or 'B'");

    TradeCoefficients c = xy(spec);
    double a10 = spec.a(1) - spec.a(0), a20 = spec.a(2) - spec.a(0);
    double b10 = spec.b(1) - spec.b(0), b20 = spec.b(2) - spec.b(0);

    // The bracketing needs a nonzero y; if it vanishes, levels 1 and 2
    // exchange roles and the selected pair is mapped back at the end.
    bool swapped = false;
    double x_eff = c.x, y_eff = c.y;
    if (y_eff == 0.0) {
        swapped = true;
        std::swap(x_eff, y_eff);
    }

    double coef1, coef2;
    if (options.target_charge == 'A') {
        coef1 = swapped ? a20 : a10;
        coef2 = swapped ? a10 : a20;
    } else {
        coef1 = swapped ? b20 : b10;
        coef2 = swapped ? b10 : b20;
    }

    const double threshold = 2.0 * eta / epsilon;
    long long sel_t = 0, sel_m = 0;
    double best_ratio = 0.0;
    for (long long t = 1; t <= options.max_dn; ++t) {
        long long m = choose_m(x_eff, y_eff, t, options.sign_flip);
        if (std::llabs(m) > options.max_dn) continue;
        double s = x_eff * static_cast<double>(t) - y_eff * static_cast<double>(m);
        if (s == 0.0) continue;
        double num = coef1 * static_cast<double>(t) - coef2 * static_cast<double>(m);
        if (num == 0.0) continue;
        double ratio = std::abs(num) / std::abs(s);
        best_ratio = std::max(best_ratio, ratio);
        if (ratio >= threshold) {
            sel_t = t;
            sel_m = m;
            break;
        }
    }
    if (sel_t == 0)
        throw ResourceError("plan_trade: no pair within the dn cap reaches transfer ratio " +
                                std::to_string(threshold) + " (best " +
                                std::to_string(best_ratio) + ")",
                            0.0, 0.0, 0);

    long long dn1 = swapped ? -sel_m : sel_t;
    long long dn2 = swapped ? sel_t : -sel_m;
    RealizedPair real = realize_class_pair(spec, dn1, dn2, options.max_copies);
    double mass = std::exp(real.log_k + real.log_qn);
    double flow = -std::expm1(-real.combo) * mass;
    if (flow == 0.0)
        throw ResourceError("plan_trade: selected class swap carries no measurable flow");

    TradeOutcome step;
    step.dn1 = dn1;
    step.dn2 = dn2;
    step.delta_q = flow;
    step.da_bath = flow * (a10 * dn1 + a20 * dn2);
    step.db_bath = flow * (b10 * dn1 + b20 * dn2);
    step.ds_bath = 0.0;
    step.df_bath = flow * real.combo;
    step.log_pair_count = real.log_k;

    double per_step = options.target_charge == 'A' ? std::abs(step.da_bath)
                                                   : std::abs(step.db_bath);
    auto count = static_cast<long long>(std::ceil(eta / per_step));
    if (count > options.max_steps)
        throw ResourceError("plan_trade: step budget exhausted before reaching eta",
                            static_cast<double>(options.max_steps) * per_step,
                            static_cast<double>(options.max_steps) * step.df_bath,
                            options.max_steps);
    if (static_cast<double>(count) * step.df_bath > epsilon)
        throw ResourceError("plan_trade: free-entropy budget cannot cover the plan",
                            static_cast<double>(count) * per_step,
                            static_cast<double>(count) * step.df_bath, count);

    TradePlan plan;
    plan.pair = real.pair;
    plan.step = step;
    plan.step_count = count;
    plan.steps.assign(static_cast<size_t>(count), step);
    plan.total_da = static_cast<double>(count) * step.da_bath;
    plan.total_db = static_cast<double>(count) * step.db_bath;
    plan.total_df = static_cast<double>(count) * step.df_bath;
    plan.per_step_bound = std::abs(y_eff * step.delta_q);
    plan.target_charge = options.target_charge;
    return plan;
}

TradeOutcome dense_oracle_trade(const BathSpec& spec, const OccupationPair& pair) {
    check_shape(spec);
    check_pair(spec, pair);
    const int d = spec.levels();
    const long long copies = pair.copies();

    long long states = 1;
    for (long long i = 0; i < copies; ++i) {
        states *= d;
        if (states > oracle_state_cap)
            throw DimensionError("dense_oracle_trade: state count exceeds cap");
    }

    RealVector r = spec.level_log_weights();
    double log_z = spec.log_partition();
    RealVector logq = -(r.array()) - log_z;

    std::vector<double> pop(static_cast<size_t>(states));
    std::vector<long long> class_n, class_np;
    std::vector<int> occ(d);
    for (long long idx = 0; idx < states; ++idx) {
        std::fill(occ.begin(), occ.end(), 0);
        double lp = 0.0;
        long long rem = idx;
        for (long long pos = 0; pos < copies; ++pos) {
            int digit = static_cast<int>(rem % d);
            rem /= d;
            ++occ[digit];
            lp += logq(digit);
        }
        pop[static_cast<size_t>(idx)] = std::exp(lp);
        bool is_n = true, is_np = true;
        for (int l = 0; l < d; ++l) {
            if (occ[l] != pair.n[l]) is_n = false;
            if (occ[l] != pair.n_prime[l]) is_np = false;
        }
        if (is_n) class_n.push_back(idx);
        if (is_np) class_np.push_back(idx);
    }

    auto observe = [&](const std::vector<double>& p, const RealVector& vals) {
        double acc = 0.0;
        for (long long idx = 0; idx < states; ++idx) {
            double v = 0.0;
            long long rem = idx;
            for (long long pos = 0; pos < copies; ++pos) {
                v += vals(static_cast<int>(rem % d));
                rem /= d;
            }
            acc += p[static_cast<size_t>(idx)] * v;
        }
        return acc;
    };
    auto entropy = [&](const std::vector<double>& p) {
        double acc = 0.0;
        for (double v : p)
            if (v > tol::entropy_clip) acc -= v * std::log(v);
        return acc;
    };

    double ea0 = observe(pop, spec.a), eb0 = observe(pop, spec.b), s0 = entropy(pop);

    bool identity = pair.n == pair.n_prime;
    long long k = identity ? static_cast<long long>(class_n.size())
                           : std::min(class_n.size(), class_np.size());
    std::vector<double> after = pop;
    double delta_q = 0.0;
    if (!identity) {
        for (long long i = 0; i < k; ++i) {
            auto ia = static_cast<size_t>(class_n[static_cast<size_t>(i)]);
            auto ib = static_cast<size_t>(class_np[static_cast<size_t>(i)]);
            std::swap(after[ia], after[ib]);
            delta_q += pop[ia] - pop[ib];
        }
    }

    double ea1 = observe(after, spec.a), eb1 = observe(after, spec.b), s1 = entropy(after);

    TradeOutcome out;
    out.dn1 = pair.dn1();
    out.dn2 = pair.dn2();
    out.delta_q = delta_q;
    out.da_bath = ea1 - ea0;
    out.db_bath = eb1 - eb0;
    out.ds_bath = s1 - s0;
    out.df_bath = spec.beta_a * out.da_bath + spec.beta_b * out.db_bath - out.ds_bath;
    out.log_pair_count = k > 0 ? std::log(static_cast<double>(k)) : 0.0;
    return out;
}

}  // namespace ggethermo
