#include "ggethermo/random.hpp"

#include <cmath>

namespace ggethermo {

Matrix ginibre(int dim, Rng& rng) {
    Matrix g(dim, dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j)
            g(i, j) = Complex(rng.normal(), rng.normal()) / std::sqrt(2.0);
    return g;
}

UnitaryOperator random_unitary(int dim, Rng& rng) {
    Matrix g = ginibre(dim, rng);
    Eigen::HouseholderQR<Matrix> qr(g);
    Matrix q = qr.householderQ();
    Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int i = 0; i < dim; ++i) {
        Complex d = r(i, i);
        double a = std::abs(d);
        q.col(i) *= (a > 0.0) ? d / a : Complex(1.0, 0.0);
    }
    return UnitaryOperator(std::move(q));
}

DensityMatrix random_density_matrix(int dim, Rng& rng) {
    Matrix g = ginibre(dim, rng);
    Matrix w = g * g.adjoint();
    w /= w.trace().real();
    return DensityMatrix(std::move(w));
}

HermitianOperator random_hermitian(int dim, Rng& rng) {
    Matrix g = ginibre(dim, rng);
    return HermitianOperator((g + g.adjoint()) / 2.0);
}

}  // namespace ggethermo
