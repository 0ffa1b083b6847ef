#include <doctest.h>

#include <cmath>
#include <unsupported/Eigen/MatrixFunctions>

#include "ggethermo/qcore.hpp"
#include "ggethermo/random.hpp"

using namespace ggethermo;

namespace {

// Independent contraction: explicit double loop over a 2x3 product basis,
// with its own index arithmetic. Used as the oracle for partial_trace.
Matrix brute_marginal_2x3(const Matrix& rho, bool keep_first) {
    const int da = 2, db = 3;
    auto at = [&](int a, int b) { return a * db + b; };
    if (keep_first) {
        Matrix out = Matrix::Zero(da, da);
        for (int a = 0; a < da; ++a)
            for (int ap = 0; ap < da; ++ap)
                for (int b = 0; b < db; ++b) out(a, ap) += rho(at(a, b), at(ap, b));
        return out;
    }
    Matrix out = Matrix::Zero(db, db);
    for (int b = 0; b < db; ++b)
        for (int bp = 0; bp < db; ++bp)
            for (int a = 0; a < da; ++a) out(b, bp) += rho(at(a, b), at(a, bp));
    return out;
}

}  // namespace

TEST_SUITE("qcore") {

TEST_CASE("product space packing round-trips and matches kron ordering") {
    ProductSpace sp({2, 3, 2});
    CHECK(sp.total_dim() == 12);
    for (long long f = 0; f < sp.total_dim(); ++f) CHECK(sp.pack(sp.unpack(f)) == f);
    CHECK(sp.pack({1, 2, 0}) == 1 * 6 + 2 * 2 + 0);

    Matrix a(2, 2), b(3, 3);
    a.setZero();
    b.setZero();
    a(1, 0) = 1.0;
    b(2, 1) = 1.0;
    Matrix k = tensor({a, b});
    ProductSpace sp2({2, 3});
    CHECK(std::abs(k(sp2.pack({1, 2}), sp2.pack({0, 1})) - Complex(1.0, 0.0)) < 1e-15);
}

TEST_CASE("validated constructors reject broken inputs") {
    Matrix m(2, 2);
    m << Complex(1.0, 0.0), Complex(0.0, 0.5), Complex(0.0, 0.5), Complex(0.0, 0.0);
    CHECK_THROWS_AS(HermitianOperator{m}, InvariantError);

    Matrix t(2, 2);
    t << Complex(0.7, 0.0), Complex(0.0, 0.0), Complex(0.0, 0.0), Complex(0.7, 0.0);
    CHECK_THROWS_AS(DensityMatrix{t}, InvariantError);

    Matrix neg(2, 2);
    neg << Complex(1.5, 0.0), Complex(0.0, 0.0), Complex(0.0, 0.0), Complex(-0.5, 0.0);
    CHECK_THROWS_AS(DensityMatrix{neg}, InvariantError);

    Matrix nu(2, 2);
    nu << Complex(1.0, 0.0), Complex(0.0, 0.0), Complex(0.0, 0.0), Complex(0.5, 0.0);
    CHECK_THROWS_AS(UnitaryOperator{nu}, InvariantError);
}

TEST_CASE("entropy of diag(2/3, 1/3)") {
    RealVector p(2);
    p << 2.0 / 3.0, 1.0 / 3.0;
    double s = von_neumann_entropy(DensityMatrix::diagonal(p));
    double direct = -(2.0 / 3.0) * std::log(2.0 / 3.0) - (1.0 / 3.0) * std::log(1.0 / 3.0);
    CHECK(s == doctest::Approx(direct).epsilon(1e-14));
    CHECK(s == doctest::Approx(0.6365141682948128).epsilon(1e-14));
    CHECK(shannon_entropy(p) == doctest::Approx(s).epsilon(1e-14));
}

TEST_CASE("entropy is unitarily invariant and clips tiny eigenvalues") {
    Rng rng(11);
    DensityMatrix rho = random_density_matrix(5, rng);
    UnitaryOperator u = random_unitary(5, rng);
    double s0 = von_neumann_entropy(rho);
    double s1 = von_neumann_entropy(apply_unitary(u, rho));
    CHECK(std::abs(s0 - s1) < 1e-10);

    RealVector p(3);
    p << 1.0 - 1e-16, 1e-16, 0.0;
    CHECK(shannon_entropy(p) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("partial trace against an independently coded contraction") {
    Rng rng(7);
    ProductSpace sp({2, 3});
    for (int rep = 0; rep < 5; ++rep) {
        DensityMatrix rho = random_density_matrix(6, rng);
        DensityMatrix ma = partial_trace(rho, sp, {0});
        DensityMatrix mb = partial_trace(rho, sp, {1});
        CHECK((ma.matrix() - brute_marginal_2x3(rho.matrix(), true)).cwiseAbs().maxCoeff() <
              1e-12);
        CHECK((mb.matrix() - brute_marginal_2x3(rho.matrix(), false)).cwiseAbs().maxCoeff() <
              1e-12);
    }
}

TEST_CASE("partial trace of a product state returns the factors") {
    Rng rng(13);
    DensityMatrix a = random_density_matrix(2, rng);
    DensityMatrix b = random_density_matrix(3, rng);
    DensityMatrix ab(tensor({a.matrix(), b.matrix()}));
    ProductSpace sp({2, 3});
    CHECK((partial_trace(ab, sp, {0}).matrix() - a.matrix()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((partial_trace(ab, sp, {1}).matrix() - b.matrix()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("three-factor partial trace keeps original ordering") {
    Rng rng(17);
    DensityMatrix a = random_density_matrix(2, rng);
    DensityMatrix b = random_density_matrix(2, rng);
    DensityMatrix c = random_density_matrix(3, rng);
    DensityMatrix abc(tensor({a.matrix(), b.matrix(), c.matrix()}));
    ProductSpace sp({2, 2, 3});
    Matrix ac = tensor({a.matrix(), c.matrix()});
    CHECK((partial_trace(abc, sp, {0, 2}).matrix() - ac).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("trace distance of diag(1,0) and diag(2/3,1/3) is 1/3") {
    RealVector p(2), q(2);
    p << 1.0, 0.0;
    q << 2.0 / 3.0, 1.0 / 3.0;
    double d = trace_distance(DensityMatrix::diagonal(p), DensityMatrix::diagonal(q));
    CHECK(d == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
    CHECK(trace_distance(DensityMatrix::diagonal(q), DensityMatrix::diagonal(q)) ==
          doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("hermitian_exp matches the Pade-based matrix exponential") {
    Rng rng(23);
    HermitianOperator h = random_hermitian(4, rng);
    Matrix ours = hermitian_exp(h, -0.7);
    Matrix pade = (-0.7 * h.matrix()).exp();
    CHECK((ours - pade).cwiseAbs().maxCoeff() < 1e-10);
    Matrix id_check = hermitian_exp(h, 0.3) * hermitian_exp(h, -0.3);
    CHECK((id_check - Matrix::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("expectation values are real and basis independent") {
    Rng rng(29);
    HermitianOperator obs = random_hermitian(3, rng);
    DensityMatrix rho = random_density_matrix(3, rng);
    UnitaryOperator u = random_unitary(3, rng);
    double direct = expectation(obs, rho);
    HermitianOperator rotated(u.matrix() * obs.matrix() * u.matrix().adjoint());
    double moved = expectation(rotated, apply_unitary(u, rho));
    CHECK(direct == doctest::Approx(moved).epsilon(1e-11));
}

TEST_CASE("haar sampling is reproducible and actually unitary") {
    Rng rng1(42), rng2(42), rng3(43);
    UnitaryOperator a = random_unitary(4, rng1);
    UnitaryOperator b = random_unitary(4, rng2);
    UnitaryOperator c = random_unitary(4, rng3);
    CHECK((a.matrix() - b.matrix()).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a.matrix() - c.matrix()).cwiseAbs().maxCoeff() > 1e-3);
    CHECK((a.matrix() * a.matrix().adjoint() - Matrix::Identity(4, 4)).cwiseAbs().maxCoeff() <
          1e-12);
}

TEST_CASE("state spectrum is sorted descending and sums to one") {
    Rng rng(31);
    DensityMatrix rho = random_density_matrix(6, rng);
    RealVector sp = state_spectrum(rho);
    for (int i = 0; i + 1 < sp.size(); ++i) CHECK(sp(i) >= sp(i + 1));
    CHECK(sp.sum() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("dimension caps and mismatches raise dimension errors") {
    CHECK_THROWS_AS(ProductSpace({64, 64, 2}), DimensionError);
    Rng rng(37);
    DensityMatrix r2 = random_density_matrix(2, rng);
    DensityMatrix r3 = random_density_matrix(3, rng);
    CHECK_THROWS_AS(trace_distance(r2, r3), DimensionError);
    ProductSpace sp({2, 3});
    CHECK_THROWS_AS(partial_trace(r2, sp, {0}), DimensionError);
    CHECK_THROWS_AS(partial_trace(r3, sp, {0, 0}), DimensionError);
}

}  // TEST_SUITE
