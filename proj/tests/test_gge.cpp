#include <doctest.h>

#include <cmath>

#include "ggethermo/gge.hpp"
#include "ggethermo/random.hpp"

using namespace ggethermo;

namespace {

HermitianOperator diag_op(std::initializer_list<double> vals) {
    RealVector v(static_cast<int>(vals.size()));
    int i = 0;
    for (double x : vals) v(i++) = x;
    Matrix m = Matrix::Zero(v.size(), v.size());
    for (int j = 0; j < v.size(); ++j) m(j, j) = v(j);
    return HermitianOperator(std::move(m));
}

HermitianOperator pauli_x() {
    Matrix m(2, 2);
    m << 0, 1, 1, 0;
    return HermitianOperator(std::move(m));
}

HermitianOperator pauli_y() {
    Matrix m(2, 2);
    m << Complex(0, 0), Complex(0, -1), Complex(0, 1), Complex(0, 0);
    return HermitianOperator(std::move(m));
}

HermitianOperator spin1_jx() {
    double s = 1.0 / std::sqrt(2.0);
    Matrix m(3, 3);
    m << 0, s, 0, s, 0, s, 0, s, 0;
    return HermitianOperator(std::move(m));
}

HermitianOperator spin1_jy() {
    double s = 1.0 / std::sqrt(2.0);
    Matrix m(3, 3);
    m << Complex(0, 0), Complex(0, -s), Complex(0, 0), Complex(0, s), Complex(0, 0),
        Complex(0, -s), Complex(0, 0), Complex(0, s), Complex(0, 0);
    return HermitianOperator(std::move(m));
}

}  // namespace

TEST_SUITE("gge") {

TEST_CASE("qubit number charge at beta = ln 2 gives populations 2/3, 1/3") {
    ChargeSet charges({diag_op({0.0, 1.0})});
    GibbsState tau = gibbs_state(charges, {std::log(2.0)});
    CHECK(tau.state.matrix()(0, 0).real() == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
    CHECK(tau.state.matrix()(1, 1).real() == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
    CHECK(std::abs(tau.state.matrix()(0, 1)) < 1e-15);
    CHECK(tau.log_partition == doctest::Approx(std::log(1.5)).epsilon(1e-14));
}

TEST_CASE("gibbs state reconstructs from the defining exponential") {
    std::vector<std::vector<double>> beta_sets = {{0.9, -0.4}, {2.0, 1.0}};
    ChargeSet nc({pauli_x(), pauli_y()});
    for (const auto& betas : beta_sets) {
        GibbsState tau = gibbs_state(nc, betas);
        Matrix r = betas[0] * pauli_x().matrix() + betas[1] * pauli_y().matrix();
        Matrix direct = hermitian_exp(HermitianOperator(r), -1.0);
        direct /= direct.trace().real();
        CHECK((tau.state.matrix() - direct).cwiseAbs().maxCoeff() < 1e-10);
    }
    // sum of pauli x and y at beta (1, 1): eigenvalues +-sqrt(2)
    GibbsState tau = gibbs_state(nc, {1.0, 1.0});
    double z = std::exp(std::sqrt(2.0)) + std::exp(-std::sqrt(2.0));
    CHECK(tau.log_partition == doctest::Approx(std::log(z)).epsilon(1e-13));
}

TEST_CASE("free entropy: thermal value, pure-state value, relative-entropy identity") {
    ChargeSet charges({diag_op({0.0, 1.0})});
    std::vector<double> betas = {std::log(2.0)};
    GibbsState tau = gibbs_state(charges, betas);
    CHECK(free_entropy(tau.state, charges, betas) ==
          doctest::Approx(-tau.log_partition).epsilon(1e-13));

    RealVector excited(2);
    excited << 0.0, 1.0;
    CHECK(free_entropy(DensityMatrix::diagonal(excited), charges, betas) ==
          doctest::Approx(std::log(2.0)).epsilon(1e-13));

    // F(rho) - F(tau) = S(rho || tau), checked on random states
    Rng rng(5);
    for (int t = 0; t < 20; ++t) {
        DensityMatrix rho = random_density_matrix(2, rng);
        double lhs = free_entropy(rho, charges, betas) - free_entropy(tau.state, charges, betas);
        double rhs = relative_entropy(rho, tau.state);
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
    }
}

TEST_CASE("relative entropy identity holds for non-commuting charges") {
    ChargeSet nc({pauli_x(), pauli_y()});
    std::vector<double> betas = {0.7, -0.3};
    GibbsState tau = gibbs_state(nc, betas);
    Rng rng(6);
    for (int t = 0; t < 20; ++t) {
        DensityMatrix rho = random_density_matrix(2, rng);
        double lhs = free_entropy(rho, nc, betas) - free_entropy(tau.state, nc, betas);
        CHECK(lhs == doctest::Approx(relative_entropy(rho, tau.state)).epsilon(1e-10));
        CHECK(lhs >= -1e-12);
    }
}

TEST_CASE("eigenstate charges of spin-1 transverse components match the closed form") {
    ChargeSet charges({spin1_jx(), spin1_jy()});
    double b1 = 0.8, b2 = -0.6;  // |beta| = 1
    EigenstateCharges ec = eigenstate_charges(charges, {b1, b2});
    double norm = std::hypot(b1, b2);
    // r_i = m * |beta| for m = -1, 0, 1, and <J>_i = m * beta_hat
    for (int i = 0; i < 3; ++i) {
        double m = static_cast<double>(i - 1);
        CHECK(ec.r(i) == doctest::Approx(m * norm).epsilon(1e-12));
        CHECK(ec.averages(i, 0) == doctest::Approx(m * b1 / norm).epsilon(1e-11));
        CHECK(ec.averages(i, 1) == doctest::Approx(m * b2 / norm).epsilon(1e-11));
        double recon = b1 * ec.averages(i, 0) + b2 * ec.averages(i, 1);
        CHECK(recon == doctest::Approx(ec.r(i)).epsilon(1e-11));
    }
    // populations descending, consistent with ln Z
    CHECK(ec.populations(0) > ec.populations(1));
    CHECK(ec.populations(1) > ec.populations(2));
    CHECK(ec.populations.sum() == doctest::Approx(1.0).epsilon(1e-12));
    double z = std::exp(norm) + 1.0 + std::exp(-norm);
    CHECK(ec.log_partition == doctest::Approx(std::log(z)).epsilon(1e-12));
}

TEST_CASE("degenerate blocks refine deterministically by later charges") {
    ChargeSet charges({diag_op({1.0, 1.0, 0.0}), diag_op({2.0, 0.0, 0.0})});
    EigenstateCharges ec = eigenstate_charges(charges, {1.0, 0.0});
    // ascending r: the (0,0) state first, then the r = 1 block ordered by <A2>
    CHECK(ec.r(0) == doctest::Approx(0.0));
    CHECK(ec.r(1) == doctest::Approx(1.0));
    CHECK(ec.r(2) == doctest::Approx(1.0));
    CHECK(ec.averages(0, 0) == doctest::Approx(0.0));
    CHECK(ec.averages(0, 1) == doctest::Approx(0.0));
    CHECK(ec.averages(1, 0) == doctest::Approx(1.0));
    CHECK(ec.averages(1, 1) == doctest::Approx(0.0));
    CHECK(ec.averages(2, 0) == doctest::Approx(1.0));
    CHECK(ec.averages(2, 1) == doctest::Approx(2.0));
}

TEST_CASE("solve_betas round-trips commuting charges") {
    ChargeSet charges({diag_op({0.0, 1.0, 2.0}), diag_op({0.0, 1.0, -1.0})});
    std::vector<double> truth = {0.3, -0.2};
    GibbsState tau = gibbs_state(charges, truth);
    std::vector<double> targets;
    for (int c = 0; c < 2; ++c) targets.push_back(expectation(charges.charge(c), tau.state));
    SolveResult res = solve_betas(charges, targets, {0.0, 0.0});
    CHECK(std::abs(res.betas[0] - truth[0]) < 1e-8);
    CHECK(std::abs(res.betas[1] - truth[1]) < 1e-8);
    CHECK(res.residual <= 1e-10);
}

TEST_CASE("solve_betas round-trips non-commuting charges") {
    ChargeSet charges({pauli_x(), pauli_y()});
    std::vector<double> truth = {0.5, 0.25};
    GibbsState tau = gibbs_state(charges, truth);
    std::vector<double> targets = {expectation(charges.charge(0), tau.state),
                                   expectation(charges.charge(1), tau.state)};
    SolveResult res = solve_betas(charges, targets, {0.0, 0.0});
    CHECK(std::abs(res.betas[0] - truth[0]) < 1e-8);
    CHECK(std::abs(res.betas[1] - truth[1]) < 1e-8);
}

TEST_CASE("solve_betas flags unreachable averages as a range failure") {
    ChargeSet charges({diag_op({0.0, 1.0})});
    try {
        solve_betas(charges, {1.2}, {0.0});
        CHECK(false);
    } catch (const SolverError& e) {
        CHECK(e.out_of_range);
    }
}

TEST_CASE("random seeded round trips across dimensions and charge counts") {
    Rng rng(314);
    for (int trial = 0; trial < 25; ++trial) {
        int dim = 2 + static_cast<int>(rng.engine()() % 7);  // 2..8
        int k = 1 + static_cast<int>(rng.engine()() % 3);    // 1..3
        std::vector<HermitianOperator> ops;
        for (int c = 0; c < k; ++c) ops.push_back(random_hermitian(dim, rng));
        ChargeSet charges(std::move(ops));
        std::vector<double> truth;
        for (int c = 0; c < k; ++c) truth.push_back(2.0 * rng.uniform() - 1.0);
        GibbsState tau = gibbs_state(charges, truth);
        std::vector<double> targets;
        for (int c = 0; c < k; ++c) targets.push_back(expectation(charges.charge(c), tau.state));
        SolveResult res = solve_betas(charges, targets, std::vector<double>(k, 0.0));
        for (int c = 0; c < k; ++c) CHECK(std::abs(res.betas[c] - truth[c]) < 1e-8);
    }
}

TEST_CASE("minimality holds over random qutrit states with non-commuting charges") {
    Rng seed_rng(99);
    ChargeSet charges({random_hermitian(3, seed_rng), random_hermitian(3, seed_rng)});
    // make sure the fixture really is non-commuting
    Matrix comm = charges.charge(0).matrix() * charges.charge(1).matrix() -
                  charges.charge(1).matrix() * charges.charge(0).matrix();
    REQUIRE(comm.cwiseAbs().maxCoeff() > 0.1);

    MinimalityReport rep = verify_minimality(charges, {0.6, -0.4}, 1000, 2718);
    CHECK(rep.ok);
    CHECK(rep.trials == 1000);
    CHECK(rep.free_entropy_violations == 0);
    CHECK(rep.entropy_violations == 0);
    CHECK(rep.min_free_entropy_gap >= -1e-12);
    CHECK(rep.max_entropy_excess <= 1e-10);
}

TEST_CASE("charge sets validate their shapes") {
    CHECK_THROWS_AS(ChargeSet({}), DimensionError);
    CHECK_THROWS_AS(ChargeSet({diag_op({0.0, 1.0}), diag_op({0.0, 1.0, 2.0})}),
                    DimensionError);
    ChargeSet ok({diag_op({0.0, 1.0})}, {"number"});
    CHECK(ok.name(0) == "number");
    CHECK_THROWS_AS(gibbs_state(ok, {1.0, 2.0}), DimensionError);
}

}  // TEST_SUITE
