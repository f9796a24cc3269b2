#pragma once

#include <vector>

#include "specdegen/common.hpp"

namespace specdegen {

// Zeros of J_nu (Dirichlet) or J_nu' (Neumann, positive zeros only), found by
// integrating the Pruefer angle of (x v')' + (x - nu^2/x) v = 0 outward from the
// regular series start.
double bessel_zero(double nu, int k, Boundary kind);
std::vector<double> bessel_zeros(double nu, int n, Boundary kind);

// Zeros of the requested kind below xmax.
std::vector<double> bessel_zeros_below(double nu, double xmax, Boundary kind);

}  // namespace specdegen
