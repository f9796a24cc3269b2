#pragma once

#include <vector>

namespace specdegen {

// Number of eigenvalues below x of the symmetric tridiagonal matrix (diag, off).
int sturm_count(const std::vector<double>& diag, const std::vector<double>& off, double x);

// Lowest k eigenvalues by Sturm bisection, ascending.
std::vector<double> tridiag_lowest(const std::vector<double>& diag, const std::vector<double>& off, int k,
                                   double rel_tol = 1e-14);

// Eigenvalues in [lo, hi).
std::vector<double> tridiag_in_range(const std::vector<double>& diag, const std::vector<double>& off, double lo,
                                     double hi, double rel_tol = 1e-14);

}  // namespace specdegen
