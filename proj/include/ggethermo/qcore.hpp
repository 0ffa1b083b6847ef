#pragma once

// Dense finite-dimensional quantum primitives: validated operator types,
// tensor products, partial traces, Hermitian exponentials, entropies.
// All states live on explicit product spaces of small dimension.

#include <complex>
#include <initializer_list>
#include <vector>

#include <Eigen/Dense>

#include "ggethermo/errors.hpp"

namespace ggethermo {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

namespace tol {
inline constexpr double hermitian = 1e-12;       // max-abs deviation of M - M^dag
inline constexpr double trace_one = 1e-12;       // |tr(rho) - 1|
inline constexpr double psd = -1e-12;            // eigenvalue floor for states
inline constexpr double unitary = 1e-10;         // max-abs deviation of U U^dag - I
inline constexpr double entropy_clip = 1e-14;    // eigenvalues below this give no entropy term
inline constexpr int dense_dim_cap = 4096;       // largest dense joint dimension
}  // namespace tol

// Ordered list of tensor factor dimensions; index packing is row-major with
// the first factor slowest, matching Kronecker product conventions.
class ProductSpace {
public:
    ProductSpace() = default;
    explicit ProductSpace(std::vector<int> dims);
    ProductSpace(std::initializer_list<int> dims) : ProductSpace(std::vector<int>(dims)) {}

    int factors() const { return static_cast<int>(dims_.size()); }
    int dim(int factor) const { return dims_.at(factor); }
    const std::vector<int>& dims() const { return dims_; }
    long long total_dim() const { return total_; }

    // Flat index of a multi-index, and its inverse.
    long long pack(const std::vector<int>& idx) const;
    std::vector<int> unpack(long long flat) const;

private:
    std::vector<int> dims_;
    long long total_ = 1;
};

class HermitianOperator {
public:
    explicit HermitianOperator(Matrix m);
    const Matrix& matrix() const { return m_; }
    int dim() const { return static_cast<int>(m_.rows()); }

private:
    Matrix m_;
};

class UnitaryOperator {
public:
    explicit UnitaryOperator(Matrix m);
    const Matrix& matrix() const { return m_; }
    int dim() const { return static_cast<int>(m_.rows()); }

private:
    Matrix m_;
};

class DensityMatrix {
public:
    explicit DensityMatrix(Matrix m);
    const Matrix& matrix() const { return m_; }
    int dim() const { return static_cast<int>(m_.rows()); }

    static DensityMatrix pure(const Vector& psi);
    static DensityMatrix diagonal(const RealVector& populations);

private:
    Matrix m_;
};

// exp(scale * H) via eigendecomposition.
Matrix hermitian_exp(const HermitianOperator& h, double scale);

// -sum_i lambda_i ln lambda_i over eigenvalues above the clip, in nats.
double von_neumann_entropy(const DensityMatrix& rho);
double shannon_entropy(const RealVector& populations);

// Reduced state keeping the listed factors (in their original order).
DensityMatrix partial_trace(const DensityMatrix& rho, const ProductSpace& space,
                            const std::vector<int>& keep);

// tr(obs * rho); fails if the imaginary part is not round-off.
double expectation(const HermitianOperator& obs, const DensityMatrix& rho);

DensityMatrix apply_unitary(const UnitaryOperator& u, const DensityMatrix& rho);

// (1/2) * trace norm of the difference.
double trace_distance(const DensityMatrix& a, const DensityMatrix& b);

Matrix tensor(const std::vector<Matrix>& factors);
HermitianOperator tensor_observable(const std::vector<Matrix>& factors);

// Sorted-descending eigenvalues of a state (convenience for tests/reports).
RealVector state_spectrum(const DensityMatrix& rho);

}  // namespace ggethermo
