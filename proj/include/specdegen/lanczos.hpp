#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/SparseCore>

namespace specdegen {

using SparseMatrix = Eigen::SparseMatrix<double>;

struct LanczosResult {
    std::vector<double> values;  // ascending
    int steps = 0;
    double max_residual = 0.0;  // relative residual estimate of the returned pairs
};

// Lowest n eigenvalues of K x = lambda M x (K, M symmetric, M positive definite) by Lanczos on
// (K - shift M)^{-1} M with full reorthogonalization. shift must lie below the spectrum.
LanczosResult shift_invert_lanczos(const SparseMatrix& K, const SparseMatrix& M, int n, double shift,
                                   double tol = 1e-11, std::uint64_t seed = 1);

}  // namespace specdegen
