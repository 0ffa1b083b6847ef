#pragma once

// Seeded sampling of Haar unitaries, Hilbert-Schmidt random states and
// Gaussian Hermitian operators. Every sampler takes an explicit engine so
// runs are reproducible from a single seed.

#include <cstdint>
#include <random>

#include "ggethermo/qcore.hpp"

namespace ggethermo {

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}
    std::mt19937_64& engine() { return engine_; }
    double normal() { return normal_(engine_); }
    double uniform() { return uniform_(engine_); }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
    std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

// Complex Ginibre matrix: i.i.d. standard complex normal entries.
Matrix ginibre(int dim, Rng& rng);

// Haar-distributed unitary: QR of a Ginibre matrix with the R-diagonal
// phase ambiguity fixed.
UnitaryOperator random_unitary(int dim, Rng& rng);

// Hilbert-Schmidt random state: G G^dag / tr(G G^dag).
DensityMatrix random_density_matrix(int dim, Rng& rng);

// GUE-style Hermitian operator (entries O(1)).
HermitianOperator random_hermitian(int dim, Rng& rng);

}  // namespace ggethermo
