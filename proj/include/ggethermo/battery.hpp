#pragma once

// Explicit work batteries: weight ladders, translation operators, and lifted
// joint unitaries that account for every unit of charge moved between the
// system-bath block and the two weights.
//
// A ladder is a finite cyclic register of equally spaced rungs.  Shifts act
// periodically, so every shift operator is exactly unitary; protocols keep
// weight wavepackets away from the seam with a guard band and abort instead
// of wrapping.  A lifted unitary attaches a ladder translation to every
// transition of a base unitary on the system-bath block, with the shift fixed
// by the charge gap of the transition.  That gradient structure makes the
// lift unitary and, away from the seam, an exact conserver of each total
// charge.

#include <optional>
#include <vector>

#include "ggethermo/qcore.hpp"

namespace ggethermo {

class ChargeSet;

namespace tol {
inline constexpr double weight_norm = 1e-12;      // |<psi|psi> - 1| for weight states
inline constexpr double guard_amp = 1e-12;        // max amplitude allowed inside the guard band
inline constexpr double conservation = 1e-10;     // residual of [U, total charge] on the interior
inline constexpr double commensurate = 1e-9;      // relative gap/spacing mismatch tolerated
}  // namespace tol

struct Ladder {
    int size = 0;        // number of rungs, >= 3
    double spacing = 0;  // charge units per rung, > 0
    double offset = 0;   // charge value of rung 0
};

Ladder make_ladder(int size, double spacing, double offset = 0.0);

// Charge value carried by each rung, offset + k * spacing.
RealVector ladder_positions(const Ladder& ladder);

// Cyclic translation by `rungs` (negative moves down); exactly unitary.
Matrix shift_matrix(const Ladder& ladder, long long rungs);

// Pure wavepacket on a ladder.  Amplitudes are stored in the rung basis and
// must be normalized to tol::weight_norm.
struct WeightState {
    Ladder ladder;
    Vector amplitudes;
};

WeightState make_weight(const Ladder& ladder, Vector amplitudes);

// Gaussian wavepacket exp(-(n - center)^2 / (4 width^2)), centered on the
// middle rung when center is not given.
WeightState gaussian_weight(const Ladder& ladder, double width_rungs,
                            std::optional<int> center_rung = std::nullopt);

// Plane wave exp(2 pi i k n / N) / sqrt(N): an exact eigenstate of every
// shift, delta-localized in momentum and uniform in position.
WeightState momentum_weight(const Ladder& ladder, int wavenumber);

double mean_position(const WeightState& weight);

// |<kappa|psi>|^2 over the N discrete momenta, <kappa|n> = exp(-2 pi i kappa
// n / N) / sqrt(N).
RealVector momentum_distribution(const WeightState& weight);

// Whether to abort when a weight has support inside the guard band (4x the
// largest engaged shift, measured from both ends of the ladder).  Plane-wave
// weights are shift eigenstates, so wrapping is exact for them and may be
// allowed explicitly.
enum class GuardPolicy { enforce, allow_wrap };

// strict: every engaged charge gap must be an integer multiple of the ladder
// spacing and the lifted unitary must conserve both totals on the interior.
// average: gaps are rounded to the nearest rung and only the expectation-level
// work accounting holds.
enum class ConservationMode { strict, average };

// Base unitary on the system-bath block together with the ladder translation
// attached to each transition.  shifts_a[i][j] is the number of rungs weight A
// moves when amplitude flows from basis state j to basis state i.
struct LiftedUnitary {
    UnitaryOperator base;
    RealVector a_values;  // charge A of each basis state of the block
    RealVector b_values;
    Ladder ladder_a;
    Ladder ladder_b;
    std::vector<std::vector<long long>> shifts_a;
    std::vector<std::vector<long long>> shifts_b;
    long long max_shift_a = 0;  // largest |shift| over engaged transitions
    long long max_shift_b = 0;
    ConservationMode mode = ConservationMode::strict;
};

// Attach ladder translations to every engaged transition of `u`: amplitude
// flowing j -> i moves weight A by (a_j - a_i) / spacing rungs and weight B
// likewise, so each total charge is left unchanged.  Throws
// CommensurabilityError in strict mode when an engaged gap is not a rung
// multiple.
LiftedUnitary lift_unitary(const UnitaryOperator& u, const RealVector& a_values,
                           const RealVector& b_values, const Ladder& ladder_a,
                           const Ladder& ladder_b,
                           ConservationMode mode = ConservationMode::strict);

// Residual of [lifted, total charge] restricted to columns whose weight rungs
// sit at least max_shift away from the seam: the root-mean-square column norm
// over that interior, evaluated in closed form (no joint-space assembly).
struct CommutatorNorms {
    double a = 0;
    double b = 0;
};

CommutatorNorms conservation_residual(const LiftedUnitary& lifted);

// Dense joint unitary on block (x) ladder A (x) ladder B, for inspection and
// small-dimension cross-checks.  Throws DimensionError above
// tol::dense_dim_cap.
UnitaryOperator assemble_joint(const LiftedUnitary& lifted);

// Lift of the diagonalizing rotation: coefficients(i, j) = <j|psi_i> expands
// eigenstate i of the system state in the system charge eigenbasis, and the
// lifted base maps psi_i to charge state i while acting as the identity on
// the bath.  The block basis is system-major: flat = i_sys * bath_dim + k.
LiftedUnitary build_U1(const Matrix& coefficients, const RealVector& sys_a,
                       const RealVector& sys_b, const RealVector& bath_a,
                       const RealVector& bath_b, const Ladder& ladder_a,
                       const Ladder& ladder_b,
                       ConservationMode mode = ConservationMode::strict);

// Lift of a two-level population swap between block basis states `index_low`
// and `index_high`: identity elsewhere, with the weights absorbing the charge
// gaps of the swapped pair.
LiftedUnitary build_U2(const RealVector& a_values, const RealVector& b_values,
                       long long index_low, long long index_high,
                       const Ladder& ladder_a, const Ladder& ladder_b,
                       ConservationMode mode = ConservationMode::strict);

// Exact reduced dynamics of lifted(rho (x) wa (x) wb) computed by contracting
// the weights through their shift autocorrelations; the joint space is never
// materialized.
struct EvolutionResult {
    DensityMatrix rho_after;     // reduced block state
    double mean_a_before = 0;    // ladder positions in charge units
    double mean_a_after = 0;
    double mean_b_before = 0;
    double mean_b_after = 0;
    double work_a = 0;           // mean_a_after - mean_a_before
    double work_b = 0;
    double da_block = 0;         // change of charge A on the block
    double db_block = 0;
    double ds_block = 0;         // entropy change of the block
    RealVector momentum_a_before;
    RealVector momentum_a_after;
    RealVector momentum_b_before;
    RealVector momentum_b_after;
};

EvolutionResult evolve(const LiftedUnitary& lifted, const DensityMatrix& rho,
                       const WeightState& weight_a, const WeightState& weight_b,
                       GuardPolicy policy = GuardPolicy::enforce);

// Trace distance between the explicit-battery reduced block state and the
// implicit evolution u rho u^dag.
double implicit_explicit_gap(const DensityMatrix& rho, const WeightState& weight_a,
                             const WeightState& weight_b, const UnitaryOperator& u,
                             const LiftedUnitary& lifted,
                             GuardPolicy policy = GuardPolicy::enforce);

// Entropy change of the block under the lifted evolution.  Also verifies that
// the reduced channel equals the momentum-resolved mixture of conserving
// unitaries V(p, phi) weighted by the weight momentum distributions, and
// throws InvariantError if the block entropy decreases beyond tolerance or
// the mixture reconstruction fails.
double entropy_nondecrease_check(const LiftedUnitary& lifted, const DensityMatrix& rho,
                                 const WeightState& weight_a, const WeightState& weight_b,
                                 GuardPolicy policy = GuardPolicy::enforce);

// Joint eigenbasis and per-state charge values of a commuting charge set.
// Throws UnsupportedModeError when the charges do not commute: transitions
// then lack sharp charge gaps and no strictly conserving lift exists.
struct JointChargeBasis {
    Matrix basis;
    RealVector a_values;
    RealVector b_values;
};

JointChargeBasis joint_charge_basis(const ChargeSet& charges);

}  // namespace ggethermo
