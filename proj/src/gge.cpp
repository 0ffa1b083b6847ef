#include "ggethermo/gge.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "ggethermo/random.hpp"

namespace ggethermo {

namespace {

void check_betas(const ChargeSet& charges, const std::vector<double>& betas) {
    if (static_cast<int>(betas.size()) != charges.count())
        throw DimensionError("betas length does not match charge count");
    for (double b : betas)
        if (!std::isfinite(b)) throw InvariantError("non-finite beta");
}

Matrix weighted_sum(const ChargeSet& charges, const std::vector<double>& betas) {
    Matrix r = Matrix::Zero(charges.dim(), charges.dim());
    for (int i = 0; i < charges.count(); ++i) r += betas[i] * charges.charge(i).matrix();
    return r;
}

double log_sum_exp_neg(const RealVector& r) {
    double lo = r.minCoeff();
    double acc = 0.0;
    for (int i = 0; i < r.size(); ++i) acc += std::exp(-(r(i) - lo));
    return -lo + std::log(acc);
}

}  // namespace

ChargeSet::ChargeSet(std::vector<HermitianOperator> charges, std::vector<std::string> names)
    : charges_(std::move(charges)), names_(std::move(names)) {
    if (charges_.empty()) throw DimensionError("ChargeSet: needs at least one charge");
    for (const auto& c : charges_)
        if (c.dim() != charges_[0].dim())
            throw DimensionError("ChargeSet: charges act on different spaces");
    if (names_.empty())
        for (size_t i = 0; i < charges_.size(); ++i) names_.push_back("A" + std::to_string(i + 1));
    if (names_.size() != charges_.size())
        throw DimensionError("ChargeSet: names length does not match charges");
}

GibbsState gibbs_state(const ChargeSet& charges, const std::vector<double>& betas) {
    check_betas(charges, betas);
    HermitianOperator r(weighted_sum(charges, betas));
    Eigen::SelfAdjointEigenSolver<Matrix> es(r.matrix());
    double log_z = log_sum_exp_neg(es.eigenvalues());
    RealVector pops = (-(es.eigenvalues().array()) - log_z).exp();
    Matrix state = es.eigenvectors() * pops.asDiagonal() * es.eigenvectors().adjoint();
    return GibbsState{DensityMatrix(std::move(state)), betas, log_z};
}

double free_entropy(const DensityMatrix& rho, const ChargeSet& charges,
                    const std::vector<double>& betas) {
    check_betas(charges, betas);
    if (rho.dim() != charges.dim()) throw DimensionError("free_entropy: dimension mismatch");
    double acc = 0.0;
    for (int i = 0; i < charges.count(); ++i)
        acc += betas[i] * expectation(charges.charge(i), rho);
    return acc - von_neumann_entropy(rho);
}

double relative_entropy(const DensityMatrix& rho, const DensityMatrix& tau) {
    if (rho.dim() != tau.dim()) throw DimensionError("relative_entropy: dimension mismatch");
    Eigen::SelfAdjointEigenSolver<Matrix> et(tau.matrix());
    if (et.eigenvalues().minCoeff() < 1e-300)
        throw InvariantError("relative_entropy: reference state is not full rank");
    RealVector logs = et.eigenvalues().array().log();
    Matrix log_tau = et.eigenvectors() * logs.asDiagonal() * et.eigenvectors().adjoint();
    double cross = (rho.matrix() * log_tau).trace().real();
    return -von_neumann_entropy(rho) - cross;
}

EigenstateCharges eigenstate_charges(const ChargeSet& charges,
                                     const std::vector<double>& betas) {
    check_betas(charges, betas);
    const int dim = charges.dim();
    Eigen::SelfAdjointEigenSolver<Matrix> es(weighted_sum(charges, betas));
    RealVector r = es.eigenvalues();
    Matrix basis = es.eigenvectors();

    // Refine each degenerate block by the charges in listed order so the
    // basis (and hence the averages table) is deterministic.
    double scale = std::max(1.0, r.cwiseAbs().maxCoeff());
    const double deg_tol = 1e-9 * scale;
    std::function<void(int, int, int)> refine = [&](int lo, int hi, int charge_idx) {
        if (hi - lo < 2 || charge_idx >= charges.count()) return;
        Matrix block = basis.middleCols(lo, hi - lo);
        Matrix sub = block.adjoint() * charges.charge(charge_idx).matrix() * block;
        Eigen::SelfAdjointEigenSolver<Matrix> eb((sub + sub.adjoint()) / 2.0);
        basis.middleCols(lo, hi - lo) = block * eb.eigenvectors();
        RealVector vals = eb.eigenvalues();
        double bscale = std::max(1.0, vals.cwiseAbs().maxCoeff());
        int start = 0;
        for (int i = 1; i <= vals.size(); ++i) {
            if (i == vals.size() || vals(i) - vals(start) > 1e-9 * bscale) {
                refine(lo + start, lo + i, charge_idx + 1);
                start = i;
            }
        }
    };
    int start = 0;
    for (int i = 1; i <= dim; ++i) {
        if (i == dim || r(i) - r(start) > deg_tol) {
            refine(start, i, 0);
            start = i;
        }
    }

    EigenstateCharges out;
    out.basis = basis;
    out.r = r;
    out.log_partition = log_sum_exp_neg(r);
    out.populations = (-(r.array()) - out.log_partition).exp();
    out.averages.resize(dim, charges.count());
    for (int c = 0; c < charges.count(); ++c) {
        Matrix ac = basis.adjoint() * charges.charge(c).matrix() * basis;
        for (int i = 0; i < dim; ++i) out.averages(i, c) = ac(i, i).real();
    }
    return out;
}

SolveResult solve_betas(const ChargeSet& charges,
                        const std::vector<double>& target_averages,
                        const std::vector<double>& initial_betas,
                        const SolveOptions& options) {
    const int k = charges.count();
    if (static_cast<int>(target_averages.size()) != k)
        throw DimensionError("solve_betas: target length does not match charge count");
    check_betas(charges, initial_betas);

    auto averages_at = [&](const Eigen::VectorXd& beta) {
        std::vector<double> bv(beta.data(), beta.data() + k);
        GibbsState tau = gibbs_state(charges, bv);
        Eigen::VectorXd avg(k);
        for (int c = 0; c < k; ++c) avg(c) = expectation(charges.charge(c), tau.state);
        return avg;
    };

    Eigen::VectorXd beta = Eigen::Map<const Eigen::VectorXd>(initial_betas.data(), k);
    Eigen::VectorXd target = Eigen::Map<const Eigen::VectorXd>(target_averages.data(), k);

    Eigen::VectorXd res = averages_at(beta) - target;
    double rnorm = res.cwiseAbs().maxCoeff();
    for (int it = 0; it < options.max_iterations; ++it) {
        if (rnorm <= options.tol)
            return SolveResult{{beta.data(), beta.data() + k}, rnorm, it};
        if (beta.cwiseAbs().maxCoeff() > 0.01 * options.beta_cap)
            throw SolverError("solve_betas: multipliers diverging; target averages "
                              "may be unreachable",
                              rnorm, true);
        Eigen::MatrixXd jac(k, k);
        for (int j = 0; j < k; ++j) {
            Eigen::VectorXd bp = beta, bm = beta;
            bp(j) += options.fd_step;
            bm(j) -= options.fd_step;
            jac.col(j) = (averages_at(bp) - averages_at(bm)) / (2.0 * options.fd_step);
        }
        // Far outside the physical range the averages saturate and the
        // Jacobian underflows; report that as an unreachable target.
        bool saturated = beta.cwiseAbs().maxCoeff() > 100.0;
        Eigen::VectorXd step = jac.partialPivLu().solve(-res);
        if (!step.allFinite())
            throw SolverError(saturated ? "solve_betas: averages saturated before the "
                                          "target was met; it may be unreachable"
                                        : "solve_betas: singular Jacobian",
                              rnorm, saturated);

        bool accepted = false;
        for (double t = 1.0; t >= 1.0 / 1024.0; t /= 2.0) {
            Eigen::VectorXd cand = beta + t * step;
            if (cand.cwiseAbs().maxCoeff() > options.beta_cap) continue;
            Eigen::VectorXd cres = averages_at(cand) - target;
            double cnorm = cres.cwiseAbs().maxCoeff();
            if (cnorm < rnorm) {
                beta = cand;
                res = cres;
                rnorm = cnorm;
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            bool range = saturated || (beta + step).cwiseAbs().maxCoeff() > options.beta_cap;
            throw SolverError(range ? "solve_betas: multipliers left the admissible range; "
                                      "target averages may be unreachable"
                                    : "solve_betas: no descent direction",
                              rnorm, range);
        }
    }
    throw SolverError("solve_betas: max iterations exceeded", rnorm, false);
}

MinimalityReport verify_minimality(const ChargeSet& charges,
                                   const std::vector<double>& betas, int trials,
                                   std::uint64_t seed) {
    check_betas(charges, betas);
    const int dim = charges.dim();
    GibbsState tau = gibbs_state(charges, betas);
    double f_tau = free_entropy(tau.state, charges, betas);
    double s_tau = von_neumann_entropy(tau.state);

    Rng rng(seed);
    MinimalityReport rep;
    rep.trials = trials;
    rep.min_free_entropy_gap = std::numeric_limits<double>::infinity();
    rep.max_entropy_excess = -std::numeric_limits<double>::infinity();

    // Orthonormal basis of the span {I, A_1, ..., A_k} under the
    // Hilbert-Schmidt inner product, for projecting perturbations.
    std::vector<Matrix> span;
    span.push_back(Matrix::Identity(dim, dim));
    for (int c = 0; c < charges.count(); ++c) span.push_back(charges.charge(c).matrix());
    std::vector<Matrix> ortho;
    for (Matrix m : span) {
        for (const Matrix& o : ortho) {
            Complex coeff = (o.adjoint() * m).trace();
            m -= coeff * o;
        }
        double nrm = std::sqrt(std::abs((m.adjoint() * m).trace().real()));
        if (nrm > 1e-12) ortho.push_back(m / nrm);
    }

    Eigen::SelfAdjointEigenSolver<Matrix> es_tau(tau.state.matrix());
    RealVector inv_sqrt = es_tau.eigenvalues().array().rsqrt();
    Matrix tau_inv_sqrt =
        es_tau.eigenvectors() * inv_sqrt.asDiagonal() * es_tau.eigenvectors().adjoint();

    for (int t = 0; t < trials; ++t) {
        DensityMatrix rho = random_density_matrix(dim, rng);
        double gap = free_entropy(rho, charges, betas) - f_tau;
        rep.min_free_entropy_gap = std::min(rep.min_free_entropy_gap, gap);
        if (gap < -1e-12) ++rep.free_entropy_violations;

        // Average-preserving perturbation of tau.
        Matrix delta = random_hermitian(dim, rng).matrix();
        for (const Matrix& o : ortho) {
            Complex coeff = (o.adjoint() * delta).trace();
            delta -= coeff * o;
        }
        delta = (delta + delta.adjoint()) / 2.0;
        double dnorm = std::sqrt(std::abs((delta.adjoint() * delta).trace().real()));
        if (dnorm < 1e-12) continue;
        delta /= dnorm;
        Eigen::SelfAdjointEigenSolver<Matrix> em(tau_inv_sqrt * delta * tau_inv_sqrt,
                                                 Eigen::EigenvaluesOnly);
        double lam_min = em.eigenvalues().minCoeff();
        if (lam_min >= -1e-14) continue;
        double step = 0.9 / (-lam_min);
        DensityMatrix matched(tau.state.matrix() + step * delta);
        double excess = von_neumann_entropy(matched) - s_tau;
        rep.max_entropy_excess = std::max(rep.max_entropy_excess, excess);
        if (excess > 1e-10) ++rep.entropy_violations;
    }
    rep.ok = rep.free_entropy_violations == 0 && rep.entropy_violations == 0;
    return rep;
}

}  // namespace ggethermo
