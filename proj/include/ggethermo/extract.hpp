#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ggethermo/bathtrade.hpp"
#include "ggethermo/errors.hpp"
#include "ggethermo/gge.hpp"
#include "ggethermo/qcore.hpp"

namespace ggethermo {

// A system state with its spectral data: eigenvalues sorted descending,
// eigenvector i in column i. Reconstruction is checked to 1e-10.
struct SystemSpec {
    DensityMatrix rho;
    ChargeSet charges;
    RealVector eigenvalues;
    Matrix eigenvectors;
};

SystemSpec make_system(DensityMatrix rho, ChargeSet charges);

// Rotates the system onto the joint charge eigenbasis: U maps the i-th
// eigenvector (descending population) to the i-th basis state (ascending
// level weight). Returns U and the rotated, diagonal state. The rotation
// leaves the entropy unchanged, so the work it yields saturates the
// second-law bound exactly.
std::pair<UnitaryOperator, DensityMatrix> diagonalize_to_charge_basis(
    const SystemSpec& sys, const EigenstateCharges& basis);

// Population vector in the charge basis together with the per-level
// charge averages the bookkeeping needs.
struct DiagonalSystem {
    RealVector p;
    RealVector a;
    RealVector b;
    int levels() const { return static_cast<int>(p.size()); }
};

DiagonalSystem make_diagonal_system(RealVector p, RealVector a, RealVector b);

// Integer pair with x*dn1 + y*dn2 within tol of the requested log ratio,
// found over continued-fraction convergents of x/y plus exact Bezout
// scaling when the ratio is rational. A rational ratio u/v whose grid
// spacing |y|/v exceeds tol is excluded wholesale (ExcludedRatioError).
// With require_nonzero the trivial (0, 0) answer is rejected and the
// smallest usable nonzero combination is returned instead.
struct BathPairSelection {
    long long dn1 = 0;
    long long dn2 = 0;
    double combo = 0.0;  // x*dn1 + y*dn2
};

BathPairSelection select_bath_pair(double x, double y, double target_log_ratio,
                                   double tol, bool require_nonzero = false);

// One two-level swap between system levels (i, j) and the matched bath
// class pair, scaled by lambda in (0, 1]. Mutates sigma's populations.
struct ExtractionStep {
    int level_i = 0;
    int level_j = 0;
    OccupationPair pair;
    double lambda = 1.0;
    double delta_p = 0.0;
    double dw_a = 0.0, dw_b = 0.0;
    double da_s = 0.0, db_s = 0.0;
    double da_b = 0.0, db_b = 0.0;
    double ds_s = 0.0, ds_b = 0.0;
    double df_b = 0.0;
};

ExtractionStep swap_population_step(DiagonalSystem& sigma, const BathSpec& spec,
                                    const OccupationPair& pair, int i, int j,
                                    double lambda = 1.0);

// A run of identical fresh-bath swaps against one selected class pair,
// bookkept in closed form (geometric population recursion; entropy series
// summed exactly). micro_count is the number of elementary swaps composed.
struct MacroRecord {
    int level_i = 0;
    int level_j = 0;
    long long dn1 = 0, dn2 = 0;
    double combo = 0.0;
    double lambda = 1.0;
    long long micro_count = 0;
    double transfer = 0.0;
    double dw_a = 0.0, dw_b = 0.0;
    double ds_s = 0.0, ds_b = 0.0;
    double df_b = 0.0;
};

struct ExtractOptions {
    std::optional<double> ratio_tol;      // bath-combination tolerance; default delta_p
    std::optional<double> stop_ratio;     // log-ratio mismatch to stop at; default 2*tol
    double macro_tail = 0.01;             // residual fraction left per macro run
    long long max_macros = 100000;
    long long max_copies = 200000000;     // bath realization budget
    std::optional<RealVector> target_populations;  // override the Gibbs target
};

struct ExtractionReport {
    double w_a = 0.0, w_b = 0.0;
    double df_s = 0.0;
    double deficit = 0.0;
    long long step_count = 0;   // elementary two-level swaps composed
    double delta_p = 0.0;
    double df_b_total = 0.0;
    std::vector<MacroRecord> macros;
    DiagonalSystem final_state;
    UnitaryOperator rotation;
};

// Drives the system to the target populations by two-level swaps each
// moving at most delta_p of population, with bath pairs chosen so the
// second-law deficit vanishes linearly in delta_p.
ExtractionReport run_extraction(const SystemSpec& sys, const BathSpec& spec,
                                double delta_p, const DensityMatrix& target,
                                const ExtractOptions& options = {});

// Ratio of free-entropy gaps (F(rho) - F(tau)) / (F(sigma) - F(tau)).
double interconversion_rate(const DensityMatrix& rho, const DensityMatrix& sigma,
                            const ChargeSet& charges,
                            const std::vector<double>& betas);

// Random-unitary audit of the second law and its ingredient inequalities.
struct AuditReport {
    int trials = 0;
    int violations = 0;
    double max_combined = 0.0;  // max over trials of beta.dW + dF_s
    double min_subadditivity = 0.0;
    double min_df_b = 0.0;
    std::uint64_t worst_seed = 0;
    bool bath_only = false;
};

AuditReport second_law_audit(const DensityMatrix& rho_s, const ChargeSet& sys_charges,
                             const BathSpec& spec, int trials, std::uint64_t seed);

AuditReport second_law_audit_bath_only(const BathSpec& spec, int trials,
                                       std::uint64_t seed);

}  // namespace ggethermo
