#include "ggethermo/qcore.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <unsupported/Eigen/KroneckerProduct>

namespace ggethermo {

namespace {

void check_dense_cap(long long dim, const char* what) {
    if (dim > tol::dense_dim_cap) {
        throw DimensionError(std::string(what) + ": dimension " + std::to_string(dim) +
                             " exceeds dense cap " + std::to_string(tol::dense_dim_cap));
    }
}

double hermiticity_defect(const Matrix& m) {
    return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

}  // namespace

ProductSpace::ProductSpace(std::vector<int> dims) : dims_(std::move(dims)) {
    if (dims_.empty()) throw DimensionError("ProductSpace: no factors");
    for (int d : dims_) {
        if (d < 1) throw DimensionError("ProductSpace: factor dimension < 1");
        total_ *= d;
    }
    check_dense_cap(total_, "ProductSpace");
}

long long ProductSpace::pack(const std::vector<int>& idx) const {
    if (static_cast<int>(idx.size()) != factors())
        throw DimensionError("ProductSpace::pack: wrong multi-index length");
    long long flat = 0;
    for (int f = 0; f < factors(); ++f) {
        if (idx[f] < 0 || idx[f] >= dims_[f])
            throw DimensionError("ProductSpace::pack: index out of range");
        flat = flat * dims_[f] + idx[f];
    }
    return flat;
}

std::vector<int> ProductSpace::unpack(long long flat) const {
    if (flat < 0 || flat >= total_)
        throw DimensionError("ProductSpace::unpack: flat index out of range");
    std::vector<int> idx(factors());
    for (int f = factors() - 1; f >= 0; --f) {
        idx[f] = static_cast<int>(flat % dims_[f]);
        flat /= dims_[f];
    }
    return idx;
}

HermitianOperator::HermitianOperator(Matrix m) : m_(std::move(m)) {
    if (m_.rows() != m_.cols()) throw DimensionError("HermitianOperator: non-square");
    check_dense_cap(m_.rows(), "HermitianOperator");
    double defect = hermiticity_defect(m_);
    if (defect > tol::hermitian)
        throw InvariantError("HermitianOperator: hermiticity defect " + std::to_string(defect));
    m_ = (m_ + m_.adjoint()) / 2.0;
}

UnitaryOperator::UnitaryOperator(Matrix m) : m_(std::move(m)) {
    if (m_.rows() != m_.cols()) throw DimensionError("UnitaryOperator: non-square");
    check_dense_cap(m_.rows(), "UnitaryOperator");
    Matrix defect = m_ * m_.adjoint() - Matrix::Identity(m_.rows(), m_.cols());
    double worst = defect.cwiseAbs().maxCoeff();
    if (worst > tol::unitary)
        throw InvariantError("UnitaryOperator: unitarity defect " + std::to_string(worst));
}

DensityMatrix::DensityMatrix(Matrix m) : m_(std::move(m)) {
    if (m_.rows() != m_.cols()) throw DimensionError("DensityMatrix: non-square");
    check_dense_cap(m_.rows(), "DensityMatrix");
    double defect = hermiticity_defect(m_);
    if (defect > tol::hermitian)
        throw InvariantError("DensityMatrix: hermiticity defect " + std::to_string(defect));
    m_ = (m_ + m_.adjoint()) / 2.0;
    double tr_err = std::abs(m_.trace() - Complex(1.0, 0.0));
    if (tr_err > tol::trace_one)
        throw InvariantError("DensityMatrix: trace defect " + std::to_string(tr_err));
    Eigen::SelfAdjointEigenSolver<Matrix> es(m_, Eigen::EigenvaluesOnly);
    double lo = es.eigenvalues().minCoeff();
    if (lo < tol::psd)
        throw InvariantError("DensityMatrix: negative eigenvalue " + std::to_string(lo));
}

DensityMatrix DensityMatrix::pure(const Vector& psi) {
    double n = psi.norm();
    if (n <= 0.0) throw InvariantError("DensityMatrix::pure: zero vector");
    Vector v = psi / n;
    return DensityMatrix(v * v.adjoint());
}

DensityMatrix DensityMatrix::diagonal(const RealVector& populations) {
    Matrix m = Matrix::Zero(populations.size(), populations.size());
    for (int i = 0; i < populations.size(); ++i) m(i, i) = populations(i);
    return DensityMatrix(m);
}

Matrix hermitian_exp(const HermitianOperator& h, double scale) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(h.matrix());
    RealVector ev = (scale * es.eigenvalues()).array().exp();
    return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
}

double shannon_entropy(const RealVector& populations) {
    double s = 0.0;
    for (int i = 0; i < populations.size(); ++i) {
        double p = populations(i);
        if (p > tol::entropy_clip) s -= p * std::log(p);
    }
    return s;
}

double von_neumann_entropy(const DensityMatrix& rho) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(rho.matrix(), Eigen::EigenvaluesOnly);
    return shannon_entropy(es.eigenvalues());
}

DensityMatrix partial_trace(const DensityMatrix& rho, const ProductSpace& space,
                            const std::vector<int>& keep) {
    if (space.total_dim() != rho.dim())
        throw DimensionError("partial_trace: space does not match state dimension");
    std::vector<bool> kept(space.factors(), false);
    for (int f : keep) {
        if (f < 0 || f >= space.factors())
            throw DimensionError("partial_trace: keep index out of range");
        if (kept[f]) throw DimensionError("partial_trace: duplicate keep index");
        kept[f] = true;
    }
    std::vector<int> keep_sorted, traced;
    for (int f = 0; f < space.factors(); ++f) (kept[f] ? keep_sorted : traced).push_back(f);

    long long dk = 1, dt = 1;
    for (int f : keep_sorted) dk *= space.dim(f);
    for (int f : traced) dt *= space.dim(f);

    Matrix out = Matrix::Zero(dk, dk);
    std::vector<int> full_r(space.factors()), full_c(space.factors());
    // Enumerate kept row/col multi-indices and sum over traced diagonal indices.
    std::vector<int> kr(keep_sorted.size()), kc(keep_sorted.size()), tr(traced.size());
    for (long long r = 0; r < dk; ++r) {
        long long tmp = r;
        for (int f = static_cast<int>(keep_sorted.size()) - 1; f >= 0; --f) {
            kr[f] = static_cast<int>(tmp % space.dim(keep_sorted[f]));
            tmp /= space.dim(keep_sorted[f]);
        }
        for (long long c = 0; c < dk; ++c) {
            tmp = c;
            for (int f = static_cast<int>(keep_sorted.size()) - 1; f >= 0; --f) {
                kc[f] = static_cast<int>(tmp % space.dim(keep_sorted[f]));
                tmp /= space.dim(keep_sorted[f]);
            }
            Complex acc(0.0, 0.0);
            for (long long t = 0; t < dt; ++t) {
                tmp = t;
                for (int f = static_cast<int>(traced.size()) - 1; f >= 0; --f) {
                    tr[f] = static_cast<int>(tmp % space.dim(traced[f]));
                    tmp /= space.dim(traced[f]);
                }
                for (size_t f = 0; f < keep_sorted.size(); ++f) {
                    full_r[keep_sorted[f]] = kr[f];
                    full_c[keep_sorted[f]] = kc[f];
                }
                for (size_t f = 0; f < traced.size(); ++f) {
                    full_r[traced[f]] = tr[f];
                    full_c[traced[f]] = tr[f];
                }
                acc += rho.matrix()(space.pack(full_r), space.pack(full_c));
            }
            out(r, c) = acc;
        }
    }
    return DensityMatrix(std::move(out));
}

double expectation(const HermitianOperator& obs, const DensityMatrix& rho) {
    if (obs.dim() != rho.dim()) throw DimensionError("expectation: dimension mismatch");
    Complex v = (obs.matrix() * rho.matrix()).trace();
    double scale = std::max(1.0, obs.matrix().cwiseAbs().maxCoeff());
    if (std::abs(v.imag()) > 1e-10 * scale)
        throw InvariantError("expectation: non-real value " + std::to_string(v.imag()));
    return v.real();
}

DensityMatrix apply_unitary(const UnitaryOperator& u, const DensityMatrix& rho) {
    if (u.dim() != rho.dim()) throw DimensionError("apply_unitary: dimension mismatch");
    return DensityMatrix(u.matrix() * rho.matrix() * u.matrix().adjoint());
}

double trace_distance(const DensityMatrix& a, const DensityMatrix& b) {
    if (a.dim() != b.dim()) throw DimensionError("trace_distance: dimension mismatch");
    Eigen::SelfAdjointEigenSolver<Matrix> es(a.matrix() - b.matrix(), Eigen::EigenvaluesOnly);
    return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

Matrix tensor(const std::vector<Matrix>& factors) {
    if (factors.empty()) throw DimensionError("tensor: no factors");
    Matrix acc = factors[0];
    for (size_t i = 1; i < factors.size(); ++i) {
        check_dense_cap(acc.rows() * factors[i].rows(), "tensor");
        acc = Eigen::kroneckerProduct(acc, factors[i]).eval();
    }
    return acc;
}

HermitianOperator tensor_observable(const std::vector<Matrix>& factors) {
    return HermitianOperator(tensor(factors));
}

RealVector state_spectrum(const DensityMatrix& rho) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(rho.matrix(), Eigen::EigenvaluesOnly);
    RealVector ev = es.eigenvalues();
    std::sort(ev.data(), ev.data() + ev.size(), std::greater<double>());
    return ev;
}

}  // namespace ggethermo
