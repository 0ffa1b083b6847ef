#pragma once

// Diagonal two-charge baths and the explicit trade protocol: occupation-class
// swap formulas, planning a target charge transfer at bounded free-entropy
// cost, and a dense many-copy simulation oracle.

#include <optional>
#include <string>
#include <vector>

#include "ggethermo/numtheory.hpp"
#include "ggethermo/qcore.hpp"

namespace ggethermo {

// Bath family: per-level values of two conserved quantities plus their
// multipliers. Optional exact values back the rational consistency checks;
// when absent the checks fall back to 1e-12 floating tolerances.
struct BathSpec {
    RealVector a;
    RealVector b;
    double beta_a = 0.0;
    double beta_b = 0.0;
    std::vector<Rational> a_exact;
    std::vector<Rational> b_exact;
    std::optional<Rational> beta_a_exact;
    std::optional<Rational> beta_b_exact;

    int levels() const { return static_cast<int>(a.size()); }
    RealVector level_log_weights() const;  // r_l = beta_a a_l + beta_b b_l
    double log_partition() const;
    RealVector populations() const;        // q_l = exp(-r_l) / Z
};

BathSpec make_bath(std::vector<double> a, std::vector<double> b, double beta_a,
                   double beta_b);

struct BathValidation {
    bool ok = false;
    std::string reason;
    double x = 0.0, y = 0.0;
};

// Rejects baths with fewer than three levels, with x = y = 0, or whose
// second charge is affine in the first (no independent trade direction).
BathValidation validate_bath(const BathSpec& spec);
void require_valid_bath(const BathSpec& spec);

struct TradeCoefficients {
    double x = 0.0, y = 0.0;
};

// x = beta_a (a1 - a0) + beta_b (b1 - b0), y the same with level 2.
TradeCoefficients xy(const BathSpec& spec);

// Bracketing integer: m/dn1 < x/y <= (m+1)/dn1, or with sign_flip the
// mirrored bracketing (m-1)/dn1 <= x/y < m/dn1. dn1 must be positive.
long long choose_m(double x, double y, long long dn1, bool sign_flip = false);

// Occupation pair (n, n'): n' moves dn1 copies to level 1 and dn2 to level 2,
// balanced by level 0; all other levels match.
struct OccupationPair {
    std::vector<long long> n;
    std::vector<long long> n_prime;
    long long dn1() const { return n_prime[1] - n[1]; }
    long long dn2() const { return n_prime[2] - n[2]; }
    long long copies() const;
};

OccupationPair make_occupation_pair(std::vector<long long> n, long long dn1,
                                    long long dn2);

// One swap episode between occupation classes; quantities are totals over
// the exp(log_pair_count) basis-state pairs actually swapped.
struct TradeOutcome {
    long long dn1 = 0;
    long long dn2 = 0;
    double delta_q = 0.0;        // probability flow out of class n
    double da_bath = 0.0;        // change of the bath's first charge
    double db_bath = 0.0;        // change of the bath's second charge
    double df_bath = 0.0;        // change of the bath's free entropy
    double ds_bath = 0.0;        // bath entropy change (zero for pure swaps)
    double log_pair_count = 0.0;
};

// Analytic single-pair swap (pair count 1): the closed-form flow formulas.
TradeOutcome trade_step(const BathSpec& spec, const OccupationPair& pair);

// ln(N! / prod_l n_l!) of one occupation vector.
double log_multinomial(const std::vector<long long>& n);

// Occupation pair plus precomputed logs of the matched pair count and the
// two basis-state probabilities; chooses the copy number that maximizes the
// swap mass min(M(n), M(n')) q_n.
struct RealizedPair {
    OccupationPair pair;
    double log_k = 0.0;    // ln of the matched pair count
    double log_qn = 0.0;   // ln q_n of one class-n basis state
    double log_qnp = 0.0;  // ln q_{n'}
    double combo = 0.0;    // x dn1 + y dn2
};

RealizedPair realize_class_pair(const BathSpec& spec, long long dn1, long long dn2,
                                long long max_copies = 200000000);

struct PlanOptions {
    char target_charge = 'A';
    long long max_dn = 10000;
    long long max_steps = 2000000;
    long long max_copies = 200000000;
    bool sign_flip = false;
};

struct TradePlan {
    OccupationPair pair;
    TradeOutcome step;
    long long step_count = 0;
    std::vector<TradeOutcome> steps;
    double total_da = 0.0;
    double total_db = 0.0;
    double total_df = 0.0;
    double per_step_bound = 0.0;  // y * delta_q of one step
    char target_charge = 'A';
};

// Repeats one multiplicity-matched class swap until the accumulated target
// charge reaches eta while the total bath free-entropy cost stays below
// epsilon; per step 0 < df_bath <= y * delta_q.
TradePlan plan_trade(const BathSpec& spec, double eta, double epsilon,
                     const PlanOptions& options = {});

// Explicit simulation on all levels^copies basis states of the product bath:
// builds the diagonal of tau^(x)copies, applies the class swap as an index
// permutation, and measures every delta by direct summation.
TradeOutcome dense_oracle_trade(const BathSpec& spec, const OccupationPair& pair);

}  // namespace ggethermo
