#include "ggethermo/extract.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <set>
#include <utility>

#include "ggethermo/numtheory.hpp"
#include "ggethermo/random.hpp"

namespace ggethermo {

namespace {

double eta_term(double z) { return z > 0.0 ? -z * std::log(z) : 0.0; }

// g(z) = (1+z) ln(1+z) - z, the per-swap entropy defect; nonnegative on
// [-1, inf) with g(0) = 0.
double entropy_defect(double z) {
    if (1.0 + z <= 0.0) return 1.0;
    if (std::abs(z) < 1e-4) {
        return z * z *
               (0.5 + z * (-1.0 / 6.0 + z * (1.0 / 12.0 + z * (-1.0 / 20.0))));
    }
    return (1.0 + z) * std::log1p(z) - z;
}

double safe_log(double z) { return std::log(std::max(z, 1e-300)); }

std::vector<long long> zero_occupation(int levels) {
    return std::vector<long long>(static_cast<std::size_t>(levels), 0);
}

void check_level_index(const DiagonalSystem& sigma, int i, int j) {
    if (i < 0 || j < 0 || i >= sigma.levels() || j >= sigma.levels() || i == j)
        throw InvariantError("swap_population_step: bad level pair");
}

void check_occupation_pair(const BathSpec& spec, const OccupationPair& pair) {
    const auto levels = static_cast<std::size_t>(spec.levels());
    if (pair.n.size() != levels || pair.n_prime.size() != levels)
        throw DimensionError("swap_population_step: occupation length mismatch");
    long long total_n = 0, total_np = 0;
    for (std::size_t l = 0; l < levels; ++l) {
        if (pair.n[l] < 0 || pair.n_prime[l] < 0)
            throw InvariantError("swap_population_step: negative occupation");
        if (l >= 3 && pair.n[l] != pair.n_prime[l])
            throw InvariantError("swap_population_step: levels above 2 must match");
        total_n += pair.n[l];
        total_np += pair.n_prime[l];
    }
    if (total_n != total_np)
        throw InvariantError("swap_population_step: copy counts differ");
}

double log_class_population(const BathSpec& spec, const std::vector<long long>& n) {
    const RealVector lw = spec.level_log_weights();
    const double lz = spec.log_partition();
    double out = 0.0;
    for (std::size_t l = 0; l < n.size(); ++l)
        out += static_cast<double>(n[l]) * (-lw(static_cast<int>(l)) - lz);
    return out;
}

struct Convergent {
    long long num = 0;
    long long den = 1;
    double theta = 0.0;  // den * r - num
};

constexpr long long kShiftCap = 10000;
constexpr double kRationalTol = 1e-13;

// Continued-fraction convergents of r with denominators up to kShiftCap.
// Sets u/v when r is resolved as an exact rational.
std::vector<Convergent> convergents_of(double r, bool& rational, long long& u,
                                       long long& v) {
    std::vector<Convergent> convs;
    long long num_prev = 1, den_prev = 0;
    long long a0 = static_cast<long long>(std::floor(r));
    long long num_cur = a0, den_cur = 1;
    double theta = r - static_cast<double>(a0);
    convs.push_back({num_cur, den_cur, theta});
    rational = std::abs(theta) <= kRationalTol * (1.0 + std::abs(r));
    double frac = theta;
    while (!rational && convs.size() < 64) {
        frac = 1.0 / frac;
        double af = std::floor(frac);
        if (!(af >= 1.0) || af > 9e15) break;
        frac -= af;
        long long ai = static_cast<long long>(af);
        long long num_next = ai * num_cur + num_prev;
        long long den_next = ai * den_cur + den_prev;
        if (den_next > kShiftCap || den_next <= 0) break;
        num_prev = num_cur;
        den_prev = den_cur;
        num_cur = num_next;
        den_cur = den_next;
        theta = static_cast<double>(den_cur) * r - static_cast<double>(num_cur);
        convs.push_back({num_cur, den_cur, theta});
        rational = std::abs(theta) <= kRationalTol * (1.0 + std::abs(r));
    }
    if (rational) {
        u = num_cur;
        v = den_cur;
    }
    return convs;
}

}  // namespace

SystemSpec make_system(DensityMatrix rho, ChargeSet charges) {
    if (charges.dim() != rho.dim())
        throw DimensionError("make_system: charge and state dimensions differ");
    Eigen::SelfAdjointEigenSolver<Matrix> solver(rho.matrix());
    if (solver.info() != Eigen::Success)
        throw SolverError("make_system: eigendecomposition failed", 0.0, false);
    const int d = rho.dim();
    RealVector values(d);
    Matrix vectors(d, d);
    for (int i = 0; i < d; ++i) {
        values(i) = solver.eigenvalues()(d - 1 - i);
        vectors.col(i) = solver.eigenvectors().col(d - 1 - i);
    }
    Matrix rebuilt = vectors * values.asDiagonal() * vectors.adjoint();
    if ((rebuilt - rho.matrix()).cwiseAbs().maxCoeff() > 1e-10)
        throw InvariantError("make_system: spectral reconstruction drifted");
    return SystemSpec{std::move(rho), std::move(charges), std::move(values),
                      std::move(vectors)};
}

std::pair<UnitaryOperator, DensityMatrix> diagonalize_to_charge_basis(
    const SystemSpec& sys, const EigenstateCharges& basis) {
    if (basis.basis.rows() != sys.rho.dim())
        throw DimensionError("diagonalize_to_charge_basis: dimension mismatch");
    UnitaryOperator u(basis.basis * sys.eigenvectors.adjoint());
    DensityMatrix rotated = apply_unitary(u, sys.rho);
    return {std::move(u), std::move(rotated)};
}

DiagonalSystem make_diagonal_system(RealVector p, RealVector a, RealVector b) {
    if (p.size() != a.size() || p.size() != b.size() || p.size() < 2)
        throw DimensionError("make_diagonal_system: length mismatch");
    double total = 0.0;
    for (int i = 0; i < p.size(); ++i) {
        if (p(i) < -1e-12)
            throw InvariantError("make_diagonal_system: negative population");
        p(i) = std::max(p(i), 0.0);
        total += p(i);
    }
    if (std::abs(total - 1.0) > 1e-8)
        throw InvariantError("make_diagonal_system: populations must sum to one");
    return DiagonalSystem{std::move(p), std::move(a), std::move(b)};
}

BathPairSelection select_bath_pair(double x, double y, double target_log_ratio,
                                   double tol, bool require_nonzero) {
    if (!(tol > 0.0))
        throw InvariantError("select_bath_pair: tolerance must be positive");
    if (x == 0.0 && y == 0.0)
        throw InvariantError("select_bath_pair: both coefficients vanish");

    // Orient so the denominator coefficient dominates; undone on return.
    const bool swapped = std::abs(x) > std::abs(y);
    const double gx = swapped ? y : x;
    const double gy = swapped ? x : y;
    const double r = gx / gy;
    const double t = target_log_ratio / gy;
    const double tol_units = tol / std::abs(gy);
    if (std::abs(t) > 1e15)
        throw ResourceError("select_bath_pair: target out of range");

    bool rational = false;
    long long u = 0, v = 1;
    const std::vector<Convergent> convs = convergents_of(r, rational, u, v);

    long long d1 = 0, d2 = 0;
    if (rational) {
        const double spacing = std::abs(gy) / static_cast<double>(v);
        if (spacing > tol)
            throw ExcludedRatioError(
                "select_bath_pair: rational coefficient ratio " + std::to_string(u) +
                    "/" + std::to_string(v) + " leaves grid spacing " +
                    std::to_string(spacing) + " above tolerance " +
                    std::to_string(tol),
                u, v, spacing);
        const long long g = std::llround(t * static_cast<double>(v));
        if (u == 0) {
            d1 = 0;
            d2 = g;
        } else {
            const long long au = std::llabs(u);
            const BezoutPair bz = bezout(au, v);
            const long long alpha = u < 0 ? -bz.dn1 : bz.dn1;
            long long res = static_cast<long long>(
                (static_cast<__int128>(alpha) * g) % v);
            if (res < 0) res += v;
            if (2 * res > v) res -= v;
            d1 = res;
            const __int128 rem = static_cast<__int128>(g) -
                                 static_cast<__int128>(u) * d1;
            d2 = static_cast<long long>(rem / v);
        }
        if (require_nonzero && d1 == 0 && d2 == 0) {
            d1 = v;
            d2 = -u;
        }
    } else {
        d2 = std::llround(t);
        double resid = t - static_cast<double>(d2);
        for (const Convergent& c : convs) {
            if (std::abs(resid) <= tol_units) break;
            if (c.theta == 0.0) continue;
            long long k = std::llround(resid / c.theta);
            if (k == 0) continue;
            const long long room1 = (kShiftCap - std::llabs(d1)) / c.den;
            const long long room2 =
                c.num == 0 ? kShiftCap : (kShiftCap - std::llabs(d2)) / std::llabs(c.num);
            const long long cap = std::max<long long>(std::min(room1, room2), 0);
            k = std::clamp(k, -cap, cap);
            if (k == 0) continue;
            d1 += k * c.den;
            d2 -= k * c.num;
            resid -= static_cast<double>(k) * c.theta;
        }
        if (require_nonzero && d1 == 0 && d2 == 0) {
            bool found = false;
            for (const Convergent& c : convs) {
                for (long long k : {1, -1}) {
                    const double value =
                        static_cast<double>(k) * gy * c.theta;
                    if (std::abs(target_log_ratio - value) <= tol) {
                        d1 = k * c.den;
                        d2 = -k * c.num;
                        found = true;
                        break;
                    }
                }
                if (found) break;
            }
            if (!found)
                throw ResourceError(
                    "select_bath_pair: no nonzero combination within tolerance");
        }
    }

    long long dn1 = swapped ? d2 : d1;
    long long dn2 = swapped ? d1 : d2;
    if (std::llabs(dn1) > kShiftCap || std::llabs(dn2) > kShiftCap)
        throw ResourceError("select_bath_pair: occupation shift exceeds cap");
    const double combo = x * static_cast<double>(dn1) + y * static_cast<double>(dn2);
    if (std::abs(target_log_ratio - combo) > tol * (1.0 + 1e-9) + 1e-14)
        throw ResourceError(
            "select_bath_pair: no combination within tolerance in the search window");
    return BathPairSelection{dn1, dn2, combo};
}

ExtractionStep swap_population_step(DiagonalSystem& sigma, const BathSpec& spec,
                                    const OccupationPair& pair, int i, int j,
                                    double lambda) {
    check_level_index(sigma, i, j);
    check_occupation_pair(spec, pair);
    if (!(lambda > 0.0) || lambda > 1.0)
        throw InvariantError("swap_population_step: lambda must lie in (0, 1]");

    const bool trivial = pair.n == pair.n_prime;
    const long long dn1 = pair.dn1();
    const long long dn2 = pair.dn2();
    const TradeCoefficients co = xy(spec);
    const double c =
        trivial ? 0.0
                : co.x * static_cast<double>(dn1) + co.y * static_cast<double>(dn2);
    double mass = 1.0;
    if (!trivial) {
        const double log_k =
            std::min(log_multinomial(pair.n), log_multinomial(pair.n_prime));
        mass = std::exp(log_k + log_class_population(spec, pair.n));
    }

    const double pi = sigma.p(i);
    const double pj = sigma.p(j);
    const double ecn = std::exp(-c);
    const double f0 = pi * ecn - pj;
    const double dp = lambda * mass * f0;
    if (pi - dp < -1e-15 || pj + dp < -1e-15)
        throw InvariantError("swap_population_step: population would go negative");

    ExtractionStep step;
    step.level_i = i;
    step.level_j = j;
    step.pair = pair;
    step.lambda = lambda;
    step.delta_p = dp;
    step.ds_s = eta_term(pi - dp) + eta_term(pj + dp) - eta_term(pi) - eta_term(pj);
    step.da_s = dp * (sigma.a(j) - sigma.a(i));
    step.db_s = dp * (sigma.b(j) - sigma.b(i));
    if (!trivial) {
        const double gap_a = (spec.a(1) - spec.a(0)) * static_cast<double>(dn1) +
                             (spec.a(2) - spec.a(0)) * static_cast<double>(dn2);
        const double gap_b = (spec.b(1) - spec.b(0)) * static_cast<double>(dn1) +
                             (spec.b(2) - spec.b(0)) * static_cast<double>(dn2);
        step.da_b = -dp * gap_a;
        step.db_b = -dp * gap_b;
        const double rho_n = lambda * f0;
        const double rho_np = lambda * (pi - pj * std::exp(c));
        step.df_b =
            mass * entropy_defect(rho_n) + mass * ecn * entropy_defect(-rho_np);
        step.ds_b = -dp * c - step.df_b;
    }
    step.dw_a = -(step.da_s + step.da_b);
    step.dw_b = -(step.db_s + step.db_b);

    sigma.p(i) = std::max(pi - dp, 0.0);
    sigma.p(j) = std::max(pj + dp, 0.0);
    return step;
}

namespace {

// (1 - gamma^{kJ}) / (1 - gamma^k) for gamma in [0, 1).
double geometric_factor(double gamma, int k, long long j_count) {
    if (gamma <= 0.0) return 1.0;
    const double lg = static_cast<double>(k) * std::log(gamma);
    const double num = -std::expm1(std::max(lg * static_cast<double>(j_count), -745.0));
    const double den = -std::expm1(lg);
    return num / den;
}

}  // namespace

ExtractionReport run_extraction(const SystemSpec& sys, const BathSpec& spec,
                                double delta_p, const DensityMatrix& target,
                                const ExtractOptions& options) {
    require_valid_bath(spec);
    if (!(delta_p > 0.0))
        throw InvariantError("run_extraction: delta_p must be positive");
    if (sys.charges.count() != 2)
        throw InvariantError("run_extraction: two charge species expected");
    if (target.dim() != sys.rho.dim())
        throw DimensionError("run_extraction: target dimension mismatch");
    const double tol = options.ratio_tol.value_or(delta_p);
    if (!(tol > 0.0))
        throw InvariantError("run_extraction: ratio tolerance must be positive");
    const double stop_ratio = options.stop_ratio.value_or(2.0 * tol);

    const std::vector<double> betas{spec.beta_a, spec.beta_b};
    const EigenstateCharges basis = eigenstate_charges(sys.charges, betas);
    const int d = sys.rho.dim();

    RealVector w(d);
    if (options.target_populations) {
        if (options.target_populations->size() != d)
            throw DimensionError("run_extraction: target population length mismatch");
        w = *options.target_populations;
    } else {
        const Matrix rotated =
            basis.basis.adjoint() * target.matrix() * basis.basis;
        double offdiag = 0.0;
        for (int a = 0; a < d; ++a)
            for (int b = 0; b < d; ++b)
                if (a != b) offdiag = std::max(offdiag, std::abs(rotated(a, b)));
        if (offdiag > 1e-8)
            throw InvariantError(
                "run_extraction: target is not diagonal in the charge basis");
        for (int a = 0; a < d; ++a) w(a) = rotated(a, a).real();
    }
    double wsum = 0.0;
    for (int a = 0; a < d; ++a) {
        if (w(a) <= 1e-12)
            throw InvariantError("run_extraction: target must be full rank");
        wsum += w(a);
    }
    if (std::abs(wsum - 1.0) > 1e-8)
        throw InvariantError("run_extraction: target populations must sum to one");
    w /= wsum;

    const double f_init = free_entropy(sys.rho, sys.charges, betas);
    auto diag = diagonalize_to_charge_basis(sys, basis);
    UnitaryOperator& rotation = diag.first;

    RealVector p = sys.eigenvalues;
    for (int a = 0; a < d; ++a) p(a) = std::max(p(a), 0.0);
    const RealVector level_a = basis.averages.col(0);
    const RealVector level_b = basis.averages.col(1);

    double w_a = 0.0, w_b = 0.0, df_b_total = 0.0;
    long long micro_total = 0;
    std::vector<MacroRecord> macros;

    {
        const double ea0 = expectation(sys.charges.charge(0), sys.rho);
        const double eb0 = expectation(sys.charges.charge(1), sys.rho);
        w_a += ea0 - p.dot(level_a);
        w_b += eb0 - p.dot(level_b);
    }

    const TradeCoefficients co = xy(spec);
    const double a10 = spec.a(1) - spec.a(0), a20 = spec.a(2) - spec.a(0);
    const double b10 = spec.b(1) - spec.b(0), b20 = spec.b(2) - spec.b(0);
    std::set<std::pair<int, int>> blocked;

    long long macro_index = 0;
    for (; macro_index < options.max_macros; ++macro_index) {
        int bi = -1, bj = -1;
        double worst = stop_ratio;
        for (int a = 0; a < d; ++a) {
            for (int b = a + 1; b < d; ++b) {
                const double gap = safe_log(p(a)) - safe_log(p(b)) -
                                   (std::log(w(a)) - std::log(w(b)));
                const int oi = gap > 0.0 ? a : b;
                const int oj = gap > 0.0 ? b : a;
                if (std::abs(gap) > worst && !blocked.count({oi, oj})) {
                    worst = std::abs(gap);
                    bi = oi;
                    bj = oj;
                }
            }
        }
        if (bi < 0) break;

        const double pi = p(bi), pj = p(bj);
        const double h_star = (pi * w(bj) - pj * w(bi)) / (w(bi) + w(bj));
        const double h = std::min(h_star, delta_p);
        if (!(h > 0.0)) {
            blocked.insert({bi, bj});
            continue;
        }
        const double target_ratio = std::log((pi - h) / (pj + h));
        const BathPairSelection sel =
            select_bath_pair(co.x, co.y, target_ratio, tol);

        const bool trivial = sel.dn1 == 0 && sel.dn2 == 0;
        double mass = 1.0, c = 0.0;
        OccupationPair pair{zero_occupation(spec.levels()),
                            zero_occupation(spec.levels())};
        if (!trivial) {
            const RealizedPair realized =
                realize_class_pair(spec, sel.dn1, sel.dn2, options.max_copies);
            mass = std::exp(realized.log_k + realized.log_qn);
            c = realized.combo;
            pair = realized.pair;
        }
        const double ecn = std::exp(-c);
        const double f0 = pi * ecn - pj;
        if (!(f0 > 0.0) || !(mass > 0.0)) {
            blocked.insert({bi, bj});
            continue;
        }

        const double lambda =
            std::min({1.0, delta_p / (mass * f0), 1.0 / (mass * (1.0 + ecn))});
        const double gamma = std::max(1.0 - lambda * mass * (1.0 + ecn), 0.0);
        long long j_count = 1;
        if (gamma > 0.0) {
            const double jf =
                std::ceil(std::log(options.macro_tail) / std::log(gamma));
            j_count = jf > 4e15 ? static_cast<long long>(4e15)
                                : std::max<long long>(1, static_cast<long long>(jf));
        }
        const double tail =
            gamma > 0.0
                ? std::exp(std::max(static_cast<double>(j_count) * std::log(gamma),
                                    -745.0))
                : 0.0;
        const double transfer = f0 / (1.0 + ecn) * (1.0 - tail);

        double df_b = 0.0, ds_b = 0.0;
        if (!trivial) {
            const double rho0 = lambda * f0;
            const double rhp0 = lambda * (pi - pj * std::exp(c));
            if (j_count <= 64) {
                double fj = f0;
                for (long long s = 0; s < j_count; ++s) {
                    const double rn = lambda * fj;
                    df_b += mass * entropy_defect(rn) +
                            mass * ecn * entropy_defect(-rn * std::exp(c));
                    fj *= gamma;
                }
            } else {
                double pow_n = rho0 * rho0;
                double pow_np = rhp0 * rhp0;
                for (int k = 2; k <= 20000; ++k) {
                    const double geo = geometric_factor(gamma, k, j_count);
                    const double term =
                        ((k % 2 == 0 ? pow_n : -pow_n) + ecn * pow_np) /
                        (static_cast<double>(k) * (k - 1));
                    const double contrib = mass * term * geo;
                    df_b += contrib;
                    if (k > 8 && std::abs(contrib) <= 1e-18 * std::abs(df_b)) break;
                    pow_n *= rho0;
                    pow_np *= rhp0;
                }
            }
            ds_b = -transfer * c - df_b;
        }

        const double gap_a = a10 * static_cast<double>(sel.dn1) +
                             a20 * static_cast<double>(sel.dn2);
        const double gap_b = b10 * static_cast<double>(sel.dn1) +
                             b20 * static_cast<double>(sel.dn2);
        const double da_b = -transfer * gap_a;
        const double db_b = -transfer * gap_b;
        const double da_s = transfer * (level_a(bj) - level_a(bi));
        const double db_s = transfer * (level_b(bj) - level_b(bi));
        const double ds_s = eta_term(pi - transfer) + eta_term(pj + transfer) -
                            eta_term(pi) - eta_term(pj);

        MacroRecord rec;
        rec.level_i = bi;
        rec.level_j = bj;
        rec.dn1 = sel.dn1;
        rec.dn2 = sel.dn2;
        rec.combo = c;
        rec.lambda = lambda;
        rec.micro_count = j_count;
        rec.transfer = transfer;
        rec.dw_a = -(da_s + da_b);
        rec.dw_b = -(db_s + db_b);
        rec.ds_s = ds_s;
        rec.ds_b = ds_b;
        rec.df_b = df_b;
        macros.push_back(rec);

        p(bi) = pi - transfer;
        p(bj) = pj + transfer;
        w_a += rec.dw_a;
        w_b += rec.dw_b;
        df_b_total += df_b;
        micro_total += j_count;
        blocked.clear();
    }
    if (macro_index >= options.max_macros)
        throw ResourceError("run_extraction: macro budget exhausted", 0.0, 0.0,
                            static_cast<long long>(options.max_macros));

    const double f_final =
        spec.beta_a * p.dot(level_a) + spec.beta_b * p.dot(level_b) -
        shannon_entropy(p);
    const double df_s = f_final - f_init;
    const double deficit = -df_s - (spec.beta_a * w_a + spec.beta_b * w_b);

    return ExtractionReport{w_a,
                            w_b,
                            df_s,
                            deficit,
                            micro_total,
                            delta_p,
                            df_b_total,
                            std::move(macros),
                            DiagonalSystem{std::move(p), level_a, level_b},
                            std::move(rotation)};
}

double interconversion_rate(const DensityMatrix& rho, const DensityMatrix& sigma,
                            const ChargeSet& charges,
                            const std::vector<double>& betas) {
    const GibbsState tau = gibbs_state(charges, betas);
    const double f_tau = free_entropy(tau.state, charges, betas);
    const double num = free_entropy(rho, charges, betas) - f_tau;
    const double den = free_entropy(sigma, charges, betas) - f_tau;
    if (std::abs(den) <= 1e-12)
        throw UndefinedRateError(
            "interconversion_rate: reference state sits at the Gibbs point");
    return num / den;
}

namespace {

struct BathOperators {
    DensityMatrix tau;
    HermitianOperator charge_a;
    HermitianOperator charge_b;
};

BathOperators bath_operators(const BathSpec& spec) {
    const int d = spec.levels();
    Matrix ma = Matrix::Zero(d, d), mb = Matrix::Zero(d, d);
    for (int l = 0; l < d; ++l) {
        ma(l, l) = spec.a(l);
        mb(l, l) = spec.b(l);
    }
    return BathOperators{DensityMatrix::diagonal(spec.populations()),
                         HermitianOperator(std::move(ma)),
                         HermitianOperator(std::move(mb))};
}

}  // namespace

AuditReport second_law_audit(const DensityMatrix& rho_s, const ChargeSet& sys_charges,
                             const BathSpec& spec, int trials, std::uint64_t seed) {
    if (trials < 1) throw InvariantError("second_law_audit: need at least one trial");
    if (sys_charges.count() != 2)
        throw InvariantError("second_law_audit: two charge species expected");
    if (sys_charges.dim() != rho_s.dim())
        throw DimensionError("second_law_audit: charge and state dimensions differ");
    const BathOperators bath = bath_operators(spec);
    const int ds = rho_s.dim();
    const int db = spec.levels();
    if (static_cast<long long>(ds) * db > 4096)
        throw DimensionError("second_law_audit: joint dimension too large");
    const ProductSpace space({ds, db});
    const std::vector<double> betas{spec.beta_a, spec.beta_b};

    const DensityMatrix joint0(tensor({rho_s.matrix(), bath.tau.matrix()}));
    const double ea_s0 = expectation(sys_charges.charge(0), rho_s);
    const double eb_s0 = expectation(sys_charges.charge(1), rho_s);
    const double s_s0 = von_neumann_entropy(rho_s);
    const double ea_b0 = expectation(bath.charge_a, bath.tau);
    const double eb_b0 = expectation(bath.charge_b, bath.tau);
    const double s_b0 = von_neumann_entropy(bath.tau);

    AuditReport report;
    report.trials = trials;
    report.max_combined = -std::numeric_limits<double>::infinity();
    report.min_subadditivity = std::numeric_limits<double>::infinity();
    report.min_df_b = std::numeric_limits<double>::infinity();
    double worst_metric = -std::numeric_limits<double>::infinity();

    for (int t = 0; t < trials; ++t) {
        const std::uint64_t trial_seed = seed + static_cast<std::uint64_t>(t);
        Rng rng(trial_seed);
        const UnitaryOperator u = random_unitary(ds * db, rng);
        const DensityMatrix joint1 = apply_unitary(u, joint0);
        const DensityMatrix rho_s1 = partial_trace(joint1, space, {0});
        const DensityMatrix rho_b1 = partial_trace(joint1, space, {1});

        const double da_s = expectation(sys_charges.charge(0), rho_s1) - ea_s0;
        const double db_s = expectation(sys_charges.charge(1), rho_s1) - eb_s0;
        const double ds_s = von_neumann_entropy(rho_s1) - s_s0;
        const double da_b = expectation(bath.charge_a, rho_b1) - ea_b0;
        const double db_b = expectation(bath.charge_b, rho_b1) - eb_b0;
        const double ds_b = von_neumann_entropy(rho_b1) - s_b0;

        const double dw_a = -(da_s + da_b);
        const double dw_b = -(db_s + db_b);
        const double df_s = spec.beta_a * da_s + spec.beta_b * db_s - ds_s;
        const double combined = spec.beta_a * dw_a + spec.beta_b * dw_b + df_s;
        const double subadd = ds_s + ds_b;
        const double df_b = spec.beta_a * da_b + spec.beta_b * db_b - ds_b;

        report.max_combined = std::max(report.max_combined, combined);
        report.min_subadditivity = std::min(report.min_subadditivity, subadd);
        report.min_df_b = std::min(report.min_df_b, df_b);
        if (combined > 1e-10 || subadd < -1e-10 || df_b < -1e-10)
            ++report.violations;
        const double metric = std::max({combined, -subadd, -df_b});
        if (metric > worst_metric) {
            worst_metric = metric;
            report.worst_seed = trial_seed;
        }
    }
    return report;
}

AuditReport second_law_audit_bath_only(const BathSpec& spec, int trials,
                                       std::uint64_t seed) {
    if (trials < 1)
        throw InvariantError("second_law_audit_bath_only: need at least one trial");
    const BathOperators bath = bath_operators(spec);
    const int db = spec.levels();
    if (db > 4096)
        throw DimensionError("second_law_audit_bath_only: bath dimension too large");

    const double ea0 = expectation(bath.charge_a, bath.tau);
    const double eb0 = expectation(bath.charge_b, bath.tau);
    const double s0 = von_neumann_entropy(bath.tau);

    AuditReport report;
    report.trials = trials;
    report.bath_only = true;
    report.max_combined = -std::numeric_limits<double>::infinity();
    report.min_subadditivity = std::numeric_limits<double>::infinity();
    report.min_df_b = std::numeric_limits<double>::infinity();
    double worst_metric = -std::numeric_limits<double>::infinity();

    for (int t = 0; t < trials; ++t) {
        const std::uint64_t trial_seed = seed + static_cast<std::uint64_t>(t);
        Rng rng(trial_seed);
        const UnitaryOperator u = random_unitary(db, rng);
        const DensityMatrix rho1 = apply_unitary(u, bath.tau);

        const double da_b = expectation(bath.charge_a, rho1) - ea0;
        const double db_b = expectation(bath.charge_b, rho1) - eb0;
        const double ds_b = von_neumann_entropy(rho1) - s0;

        const double combined = -(spec.beta_a * da_b + spec.beta_b * db_b);
        const double df_b = spec.beta_a * da_b + spec.beta_b * db_b - ds_b;

        report.max_combined = std::max(report.max_combined, combined);
        report.min_subadditivity = std::min(report.min_subadditivity, ds_b);
        report.min_df_b = std::min(report.min_df_b, df_b);
        if (combined > 1e-10 || ds_b < -1e-10 || df_b < -1e-10)
            ++report.violations;
        const double metric = std::max({combined, -ds_b, -df_b});
        if (metric > worst_metric) {
            worst_metric = metric;
            report.worst_seed = trial_seed;
        }
    }
    return report;
}

}  // namespace ggethermo
