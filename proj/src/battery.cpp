#include "ggethermo/battery.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <map>
#include <numbers>
#include <utility>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "ggethermo/gge.hpp"

namespace ggethermo {

namespace {

constexpr double kEngaged = 1e-12;  // matrix entries below this carry no shift

void check_ladder(const Ladder& ladder) {
    if (ladder.size < 3) {
        throw DimensionError("ladder needs at least 3 rungs");
    }
    if (!(ladder.spacing > 0.0)) {
        throw InvariantError("ladder spacing must be positive");
    }
}

bool same_ladder(const Ladder& lhs, const Ladder& rhs) {
    return lhs.size == rhs.size && lhs.spacing == rhs.spacing && lhs.offset == rhs.offset;
}

long long mod_rung(long long n, long long size) {
    long long r = n % size;
    return r < 0 ? r + size : r;
}

// One engaged matrix entry of a lifted base, with its two ladder shifts.
struct Engaged {
    int row;
    int col;
    Complex amp;
    long long sa;
    long long sb;
};

std::vector<Engaged> engaged_entries(const LiftedUnitary& lifted) {
    const Matrix& u = lifted.base.matrix();
    std::vector<Engaged> entries;
    for (int i = 0; i < u.rows(); ++i) {
        for (int j = 0; j < u.cols(); ++j) {
            if (std::abs(u(i, j)) > kEngaged) {
                entries.push_back({i, j, u(i, j), lifted.shifts_a[i][j], lifted.shifts_b[i][j]});
            }
        }
    }
    return entries;
}

void check_lifted_shape(const LiftedUnitary& lifted) {
    const int n = lifted.base.dim();
    if (lifted.a_values.size() != n || lifted.b_values.size() != n) {
        throw DimensionError("charge table length does not match the lifted base");
    }
    if (static_cast<int>(lifted.shifts_a.size()) != n ||
        static_cast<int>(lifted.shifts_b.size()) != n) {
        throw DimensionError("shift table shape does not match the lifted base");
    }
    for (int i = 0; i < n; ++i) {
        if (static_cast<int>(lifted.shifts_a[i].size()) != n ||
            static_cast<int>(lifted.shifts_b[i].size()) != n) {
            throw DimensionError("shift table shape does not match the lifted base");
        }
    }
    check_ladder(lifted.ladder_a);
    check_ladder(lifted.ladder_b);
}

// Engaged shifts must reproduce the charge gaps rung for rung; anything else
// is not a translation-covariant lift and the momentum decomposition fails.
void check_translation_covariance(const LiftedUnitary& lifted) {
    for (const Engaged& e : engaged_entries(lifted)) {
        const long long sa =
            std::llround((lifted.a_values(e.col) - lifted.a_values(e.row)) / lifted.ladder_a.spacing);
        const long long sb =
            std::llround((lifted.b_values(e.col) - lifted.b_values(e.row)) / lifted.ladder_b.spacing);
        if (e.sa != sa || e.sb != sb) {
            throw InvariantError("lifted unitary is not translation covariant");
        }
    }
}

void check_guard_band(const WeightState& weight, long long max_shift, GuardPolicy policy) {
    if (policy == GuardPolicy::allow_wrap || max_shift == 0) {
        return;
    }
    const long long n = weight.ladder.size;
    const long long band = 4 * max_shift;
    if (2 * band >= n) {
        throw GuardBandError("ladder too small for the guard band");
    }
    for (long long k = 0; k < band; ++k) {
        if (std::abs(weight.amplitudes(k)) > tol::guard_amp ||
            std::abs(weight.amplitudes(n - 1 - k)) > tol::guard_amp) {
            throw GuardBandError("weight has support inside the guard band");
        }
    }
}

// Lazily cached generating data of one weight: autocorrelations
// <psi|Gamma^lag|psi> and first moments of shifted copies.
class WeightContraction {
public:
    explicit WeightContraction(const WeightState& weight)
        : amp_(weight.amplitudes), x_(ladder_positions(weight.ladder)) {}

    Complex autocorrelation(long long lag) {
        const long long key = mod_rung(lag, amp_.size());
        auto it = auto_.find(key);
        if (it != auto_.end()) {
            return it->second;
        }
        Complex sum = 0;
        for (long long n = 0; n < amp_.size(); ++n) {
            sum += std::conj(amp_(n)) * amp_(mod_rung(n - key, amp_.size()));
        }
        auto_.emplace(key, sum);
        return sum;
    }

    // <psi|Gamma^t^dag x Gamma^s|psi>
    Complex moment(long long s, long long t) {
        const long long n = amp_.size();
        const auto key = std::make_pair(mod_rung(s, n), mod_rung(t, n));
        auto it = moment_.find(key);
        if (it != moment_.end()) {
            return it->second;
        }
        Complex sum = 0;
        for (long long k = 0; k < n; ++k) {
            sum += x_(k) * amp_(mod_rung(k - key.first, n)) * std::conj(amp_(mod_rung(k - key.second, n)));
        }
        moment_.emplace(key, sum);
        return sum;
    }

private:
    Vector amp_;
    RealVector x_;
    std::map<long long, Complex> auto_;
    std::map<std::pair<long long, long long>, Complex> moment_;
};

RealVector dft_distribution(const Vector& amp) {
    Eigen::FFT<double> fft;
    const std::vector<Complex> in(amp.data(), amp.data() + amp.size());
    std::vector<Complex> out(in.size());
    fft.fwd(out, in);
    RealVector mu(amp.size());
    for (long long kappa = 0; kappa < amp.size(); ++kappa) {
        mu(kappa) = std::norm(out[kappa]) / static_cast<double>(amp.size());
    }
    return mu;
}

}  // namespace

Ladder make_ladder(int size, double spacing, double offset) {
    Ladder ladder{size, spacing, offset};
    check_ladder(ladder);
    return ladder;
}

RealVector ladder_positions(const Ladder& ladder) {
    check_ladder(ladder);
    RealVector x(ladder.size);
    for (int k = 0; k < ladder.size; ++k) {
        x(k) = ladder.offset + k * ladder.spacing;
    }
    return x;
}

Matrix shift_matrix(const Ladder& ladder, long long rungs) {
    check_ladder(ladder);
    Matrix gamma = Matrix::Zero(ladder.size, ladder.size);
    for (long long n = 0; n < ladder.size; ++n) {
        gamma(mod_rung(n + rungs, ladder.size), n) = 1.0;
    }
    return gamma;
}

WeightState make_weight(const Ladder& ladder, Vector amplitudes) {
    check_ladder(ladder);
    if (amplitudes.size() != ladder.size) {
        throw DimensionError("weight amplitude count does not match the ladder");
    }
    if (std::abs(amplitudes.squaredNorm() - 1.0) > tol::weight_norm) {
        throw InvariantError("weight state is not normalized");
    }
    return WeightState{ladder, std::move(amplitudes)};
}

WeightState gaussian_weight(const Ladder& ladder, double width_rungs,
                            std::optional<int> center_rung) {
    check_ladder(ladder);
    if (!(width_rungs > 0.0)) {
        throw InvariantError("gaussian weight width must be positive");
    }
    const int center = center_rung.value_or(ladder.size / 2);
    if (center < 0 || center >= ladder.size) {
        throw DimensionError("gaussian weight center is off the ladder");
    }
    Vector amp(ladder.size);
    for (int n = 0; n < ladder.size; ++n) {
        const double d = n - center;
        amp(n) = std::exp(-d * d / (4.0 * width_rungs * width_rungs));
    }
    amp /= amp.norm();
    return WeightState{ladder, std::move(amp)};
}

WeightState momentum_weight(const Ladder& ladder, int wavenumber) {
    check_ladder(ladder);
    const long long n = ladder.size;
    const long long k = mod_rung(wavenumber, n);
    Vector amp(n);
    for (long long m = 0; m < n; ++m) {
        const double phase = 2.0 * std::numbers::pi * static_cast<double>(k) *
                             static_cast<double>(m) / static_cast<double>(n);
        amp(m) = std::polar(1.0 / std::sqrt(static_cast<double>(n)), phase);
    }
    return WeightState{ladder, std::move(amp)};
}

double mean_position(const WeightState& weight) {
    const RealVector x = ladder_positions(weight.ladder);
    double mean = 0;
    for (int n = 0; n < weight.ladder.size; ++n) {
        mean += std::norm(weight.amplitudes(n)) * x(n);
    }
    return mean;
}

RealVector momentum_distribution(const WeightState& weight) {
    check_ladder(weight.ladder);
    if (weight.amplitudes.size() != weight.ladder.size) {
        throw DimensionError("weight amplitude count does not match the ladder");
    }
    return dft_distribution(weight.amplitudes);
}

LiftedUnitary lift_unitary(const UnitaryOperator& u, const RealVector& a_values,
                           const RealVector& b_values, const Ladder& ladder_a,
                           const Ladder& ladder_b, ConservationMode mode) {
    check_ladder(ladder_a);
    check_ladder(ladder_b);
    const int n = u.dim();
    if (a_values.size() != n || b_values.size() != n) {
        throw DimensionError("charge table length does not match the unitary");
    }
    const Matrix& m = u.matrix();
    std::vector<std::vector<long long>> sa(n, std::vector<long long>(n, 0));
    std::vector<std::vector<long long>> sb(n, std::vector<long long>(n, 0));
    long long max_a = 0;
    long long max_b = 0;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (std::abs(m(i, j)) <= kEngaged) {
                continue;
            }
            const double ga = (a_values(j) - a_values(i)) / ladder_a.spacing;
            const double gb = (b_values(j) - b_values(i)) / ladder_b.spacing;
            const long long ra = std::llround(ga);
            const long long rb = std::llround(gb);
            if (mode == ConservationMode::strict) {
                if (std::abs(ga - ra) > tol::commensurate * std::max(1.0, std::abs(ga)) ||
                    std::abs(gb - rb) > tol::commensurate * std::max(1.0, std::abs(gb))) {
                    throw CommensurabilityError(
                        "charge gap is not an integer multiple of the ladder spacing");
                }
            }
            sa[i][j] = ra;
            sb[i][j] = rb;
            max_a = std::max(max_a, std::abs(ra));
            max_b = std::max(max_b, std::abs(rb));
        }
    }
    LiftedUnitary lifted{u,        a_values, b_values, ladder_a, ladder_b,
                         std::move(sa), std::move(sb), max_a, max_b, mode};
    if (mode == ConservationMode::strict) {
        const CommutatorNorms res = conservation_residual(lifted);
        if (res.a > tol::conservation || res.b > tol::conservation) {
            throw InvariantError("lifted unitary fails strict charge conservation");
        }
    }
    return lifted;
}

CommutatorNorms conservation_residual(const LiftedUnitary& lifted) {
    check_lifted_shape(lifted);
    double sq_a = 0;
    double sq_b = 0;
    for (const Engaged& e : engaged_entries(lifted)) {
        const double w = std::norm(e.amp);
        const double ra =
            lifted.a_values(e.row) - lifted.a_values(e.col) + e.sa * lifted.ladder_a.spacing;
        const double rb =
            lifted.b_values(e.row) - lifted.b_values(e.col) + e.sb * lifted.ladder_b.spacing;
        sq_a += w * ra * ra;
        sq_b += w * rb * rb;
    }
    return {std::sqrt(sq_a), std::sqrt(sq_b)};
}

UnitaryOperator assemble_joint(const LiftedUnitary& lifted) {
    check_lifted_shape(lifted);
    const long long n = lifted.base.dim();
    const long long na = lifted.ladder_a.size;
    const long long nb = lifted.ladder_b.size;
    const long long dim = n * na * nb;
    if (dim > tol::dense_dim_cap) {
        throw DimensionError("joint battery space exceeds the dense dimension cap");
    }
    Matrix joint = Matrix::Zero(dim, dim);
    for (const Engaged& e : engaged_entries(lifted)) {
        for (long long ka = 0; ka < na; ++ka) {
            const long long ra = mod_rung(ka + e.sa, na);
            for (long long kb = 0; kb < nb; ++kb) {
                const long long rb = mod_rung(kb + e.sb, nb);
                joint((e.row * na + ra) * nb + rb, (e.col * na + ka) * nb + kb) = e.amp;
            }
        }
    }
    return UnitaryOperator(std::move(joint));
}

LiftedUnitary build_U1(const Matrix& coefficients, const RealVector& sys_a,
                       const RealVector& sys_b, const RealVector& bath_a,
                       const RealVector& bath_b, const Ladder& ladder_a,
                       const Ladder& ladder_b, ConservationMode mode) {
    const int ns = static_cast<int>(coefficients.rows());
    if (coefficients.cols() != ns || sys_a.size() != ns || sys_b.size() != ns) {
        throw DimensionError("system coefficient matrix and charge tables disagree");
    }
    const int nb = static_cast<int>(bath_a.size());
    if (bath_b.size() != nb || nb < 1) {
        throw DimensionError("bath charge tables disagree");
    }
    if ((coefficients.adjoint() * coefficients - Matrix::Identity(ns, ns)).cwiseAbs().maxCoeff() >
        tol::unitary) {
        throw InvariantError("eigenstate coefficient matrix is not unitary");
    }
    const Matrix base_sys = coefficients.conjugate();
    Matrix base = Matrix::Zero(ns * nb, ns * nb);
    RealVector a_values(ns * nb);
    RealVector b_values(ns * nb);
    for (int i = 0; i < ns; ++i) {
        for (int k = 0; k < nb; ++k) {
            a_values(i * nb + k) = sys_a(i) + bath_a(k);
            b_values(i * nb + k) = sys_b(i) + bath_b(k);
            for (int j = 0; j < ns; ++j) {
                base(i * nb + k, j * nb + k) = base_sys(i, j);
            }
        }
    }
    return lift_unitary(UnitaryOperator(std::move(base)), a_values, b_values, ladder_a, ladder_b,
                        mode);
}

LiftedUnitary build_U2(const RealVector& a_values, const RealVector& b_values,
                       long long index_low, long long index_high, const Ladder& ladder_a,
                       const Ladder& ladder_b, ConservationMode mode) {
    const long long n = a_values.size();
    if (b_values.size() != n) {
        throw DimensionError("charge tables disagree");
    }
    if (index_low < 0 || index_high >= n || index_low >= index_high) {
        throw DimensionError("swap indices are out of range or not ordered");
    }
    Matrix base = Matrix::Identity(n, n);
    base(index_low, index_low) = 0.0;
    base(index_high, index_high) = 0.0;
    base(index_low, index_high) = 1.0;
    base(index_high, index_low) = 1.0;
    return lift_unitary(UnitaryOperator(std::move(base)), a_values, b_values, ladder_a, ladder_b,
                        mode);
}

EvolutionResult evolve(const LiftedUnitary& lifted, const DensityMatrix& rho,
                       const WeightState& weight_a, const WeightState& weight_b,
                       GuardPolicy policy) {
    check_lifted_shape(lifted);
    const int n = lifted.base.dim();
    if (rho.dim() != n) {
        throw DimensionError("block state dimension does not match the lifted base");
    }
    if (!same_ladder(weight_a.ladder, lifted.ladder_a) ||
        !same_ladder(weight_b.ladder, lifted.ladder_b)) {
        throw DimensionError("weight ladders do not match the lifted unitary");
    }
    check_guard_band(weight_a, lifted.max_shift_a, policy);
    check_guard_band(weight_b, lifted.max_shift_b, policy);

    const std::vector<Engaged> entries = engaged_entries(lifted);
    WeightContraction ca(weight_a);
    WeightContraction cb(weight_b);
    const Matrix& r = rho.matrix();

    Matrix after = Matrix::Zero(n, n);
    Complex mean_a_after = 0;
    Complex mean_b_after = 0;
    for (const Engaged& e1 : entries) {
        for (const Engaged& e2 : entries) {
            const Complex w = e1.amp * std::conj(e2.amp) * r(e1.col, e2.col);
            if (std::abs(w) == 0.0) {
                continue;
            }
            after(e1.row, e2.row) +=
                w * ca.autocorrelation(e1.sa - e2.sa) * cb.autocorrelation(e1.sb - e2.sb);
            if (e1.row == e2.row) {
                mean_a_after += w * ca.moment(e1.sa, e2.sa) * cb.autocorrelation(e1.sb - e2.sb);
                mean_b_after += w * cb.moment(e1.sb, e2.sb) * ca.autocorrelation(e1.sa - e2.sa);
            }
        }
    }
    after = ((after + after.adjoint()) / 2.0).eval();

    EvolutionResult out{DensityMatrix(std::move(after)),
                        mean_position(weight_a),
                        mean_a_after.real(),
                        mean_position(weight_b),
                        mean_b_after.real(),
                        0, 0, 0, 0, 0,
                        momentum_distribution(weight_a),
                        RealVector(),
                        momentum_distribution(weight_b),
                        RealVector()};
    out.work_a = out.mean_a_after - out.mean_a_before;
    out.work_b = out.mean_b_after - out.mean_b_before;

    const Matrix& ra = out.rho_after.matrix();
    for (int i = 0; i < n; ++i) {
        out.da_block += lifted.a_values(i) * (ra(i, i).real() - r(i, i).real());
        out.db_block += lifted.b_values(i) * (ra(i, i).real() - r(i, i).real());
    }
    out.ds_block = von_neumann_entropy(out.rho_after) - von_neumann_entropy(rho);

    // Diagonal momentum transfer function: |<kappa|psi'>|^2 = mu(kappa) M(kappa).
    const auto transfer = [&](const Ladder& ladder, bool on_a) {
        const long long size = ladder.size;
        RealVector factor(size);
        for (long long kappa = 0; kappa < size; ++kappa) {
            Complex m = 0;
            for (const Engaged& e1 : entries) {
                for (const Engaged& e2 : entries) {
                    if (e1.row != e2.row) {
                        continue;
                    }
                    const Complex w = e1.amp * std::conj(e2.amp) * r(e1.col, e2.col);
                    const long long lag = on_a ? e1.sa - e2.sa : e1.sb - e2.sb;
                    const Complex other = on_a ? cb.autocorrelation(e1.sb - e2.sb)
                                               : ca.autocorrelation(e1.sa - e2.sa);
                    const double phase = -2.0 * std::numbers::pi * static_cast<double>(kappa) *
                                         static_cast<double>(lag) / static_cast<double>(size);
                    m += w * other * std::polar(1.0, phase);
                }
            }
            factor(kappa) = m.real();
        }
        return factor;
    };
    out.momentum_a_after = out.momentum_a_before.cwiseProduct(transfer(lifted.ladder_a, true));
    out.momentum_b_after = out.momentum_b_before.cwiseProduct(transfer(lifted.ladder_b, false));
    return out;
}

double implicit_explicit_gap(const DensityMatrix& rho, const WeightState& weight_a,
                             const WeightState& weight_b, const UnitaryOperator& u,
                             const LiftedUnitary& lifted, GuardPolicy policy) {
    if (u.dim() != rho.dim()) {
        throw DimensionError("implicit unitary dimension does not match the state");
    }
    const EvolutionResult res = evolve(lifted, rho, weight_a, weight_b, policy);
    return trace_distance(res.rho_after, apply_unitary(u, rho));
}

double entropy_nondecrease_check(const LiftedUnitary& lifted, const DensityMatrix& rho,
                                 const WeightState& weight_a, const WeightState& weight_b,
                                 GuardPolicy policy) {
    check_lifted_shape(lifted);
    check_translation_covariance(lifted);
    const EvolutionResult res = evolve(lifted, rho, weight_a, weight_b, policy);

    // Momentum-resolved mixture of conserving unitaries V(kappa_a, kappa_b).
    const int n = lifted.base.dim();
    const std::vector<Engaged> entries = engaged_entries(lifted);
    const RealVector mu_a = res.momentum_a_before;
    const RealVector mu_b = res.momentum_b_before;
    Matrix mix = Matrix::Zero(n, n);
    for (long long kappa_a = 0; kappa_a < mu_a.size(); ++kappa_a) {
        if (mu_a(kappa_a) < 1e-14) {
            continue;
        }
        for (long long kappa_b = 0; kappa_b < mu_b.size(); ++kappa_b) {
            const double weight = mu_a(kappa_a) * mu_b(kappa_b);
            if (weight < 1e-16) {
                continue;
            }
            Matrix v = Matrix::Zero(n, n);
            for (const Engaged& e : entries) {
                const double phase =
                    -2.0 * std::numbers::pi *
                    (static_cast<double>(kappa_a) * static_cast<double>(e.sa) / mu_a.size() +
                     static_cast<double>(kappa_b) * static_cast<double>(e.sb) / mu_b.size());
                v(e.row, e.col) = e.amp * std::polar(1.0, phase);
            }
            mix += weight * v * rho.matrix() * v.adjoint();
        }
    }
    if ((mix - res.rho_after.matrix()).cwiseAbs().maxCoeff() > 1e-8) {
        throw InvariantError("momentum mixture does not reproduce the reduced channel");
    }
    if (res.ds_block < -1e-10) {
        throw InvariantError("block entropy decreased under the lifted evolution");
    }
    return res.ds_block;
}

JointChargeBasis joint_charge_basis(const ChargeSet& charges) {
    if (charges.count() != 2) {
        throw DimensionError("battery lifting uses exactly two charges");
    }
    const Matrix& a = charges.charge(0).matrix();
    const Matrix& b = charges.charge(1).matrix();
    if ((a * b - b * a).cwiseAbs().maxCoeff() > 1e-10) {
        throw UnsupportedModeError(
            "strict conservation needs commuting charges with sharp transition gaps");
    }
    const EigenstateCharges joint = eigenstate_charges(charges, {1.0, 1.0});
    return {joint.basis, joint.averages.col(0), joint.averages.col(1)};
}

}  // namespace ggethermo
