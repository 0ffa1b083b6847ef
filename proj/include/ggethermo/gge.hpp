#pragma once

// Generalized Gibbs states for several (possibly non-commuting) conserved
// quantities: construction, free entropy, inversion of averages to
// multipliers, eigenstate charge tables and minimality verification.

#include <cstdint>
#include <string>
#include <vector>

#include "ggethermo/qcore.hpp"

namespace ggethermo {

// Fixed ordered collection of charges acting on one space.
class ChargeSet {
public:
    explicit ChargeSet(std::vector<HermitianOperator> charges,
                       std::vector<std::string> names = {});
    int dim() const { return charges_[0].dim(); }
    int count() const { return static_cast<int>(charges_.size()); }
    const HermitianOperator& charge(int i) const { return charges_.at(i); }
    const std::string& name(int i) const { return names_.at(i); }
    const std::vector<HermitianOperator>& charges() const { return charges_; }

private:
    std::vector<HermitianOperator> charges_;
    std::vector<std::string> names_;
};

struct GibbsState {
    DensityMatrix state;
    std::vector<double> betas;
    double log_partition = 0.0;
};

// exp(-sum_i beta_i A_i) / Z, with ln Z computed stably.
GibbsState gibbs_state(const ChargeSet& charges, const std::vector<double>& betas);

// F(rho) = sum_i beta_i <A_i> - S(rho), in nats. Minimized by the Gibbs
// state, where it equals -ln Z.
double free_entropy(const DensityMatrix& rho, const ChargeSet& charges,
                    const std::vector<double>& betas);

// S(rho || tau) = tr rho (ln rho - ln tau); tau must be full rank.
double relative_entropy(const DensityMatrix& rho, const DensityMatrix& tau);

// Joint eigenbasis data of R = sum_i beta_i A_i, with degenerate blocks
// refined by simultaneously diagonalizing the charges in listed order.
// Rows are sorted by ascending r_i (descending population).
struct EigenstateCharges {
    Matrix basis;              // column i is the i-th eigenstate
    RealVector r;              // r_i = sum_k beta_k <A_k>_i
    Eigen::MatrixXd averages;  // dim x count, <A_k>_i
    RealVector populations;    // exp(-r_i) / Z
    double log_partition = 0.0;
};

EigenstateCharges eigenstate_charges(const ChargeSet& charges,
                                     const std::vector<double>& betas);

struct SolveOptions {
    double tol = 1e-10;        // infinity norm of the average residual
    int max_iterations = 60;
    double fd_step = 1e-5;     // central-difference Jacobian step
    double beta_cap = 1e6;     // outside this range the target is declared unreachable
};

struct SolveResult {
    std::vector<double> betas;
    double residual = 0.0;
    int iterations = 0;
};

// Damped Newton inversion of target averages to multipliers.
SolveResult solve_betas(const ChargeSet& charges,
                        const std::vector<double>& target_averages,
                        const std::vector<double>& initial_betas,
                        const SolveOptions& options = {});

// Randomized check that the Gibbs state minimizes free entropy, and
// maximizes entropy among states with the same charge averages.
struct MinimalityReport {
    int trials = 0;
    int free_entropy_violations = 0;
    int entropy_violations = 0;
    double min_free_entropy_gap = 0.0;  // min over trials of F(rho) - F(tau)
    double max_entropy_excess = 0.0;    // max over matched trials of S(rho) - S(tau)
    bool ok = false;
};

MinimalityReport verify_minimality(const ChargeSet& charges,
                                   const std::vector<double>& betas, int trials,
                                   std::uint64_t seed);

}  // namespace ggethermo
