#pragma once

#include <vector>

#include "specdegen/common.hpp"

namespace specdegen {

// A- = sqrt(pi) Ai and A+ = sqrt(pi) Bi, so that A+ A-' - A+' A- = -1.
struct AiryValues {
    double am;   // A-
    double dam;  // A-'
    double ap;   // A+
    double dap;  // A+'
};

inline constexpr double airy_switch = 9.0;
inline constexpr double airy_wronskian = -1.0;

// |u| <= 200. Throws OverflowError when A+ leaves the double range.
AiryValues airy_eval(double u);

// Maclaurin and asymptotic branches evaluated separately; used to check the overlap.
AiryValues airy_series(double u);
AiryValues airy_asymptotic(double u);

// Decaying solution only; never overflows, valid for any finite u.
void airy_minus(double u, double& am, double& dam);

// First n zeros of A- (Dirichlet) or A-' (Neumann), negative and decreasing.
std::vector<double> airy_zeros(int n, Boundary kind);

// Eigenvalues of -d^2/du^2 + u on [z, inf) with the given condition at u = z.
std::vector<double> model_operator_eigs(double z, Boundary kind, int n);

// Green's kernel of d^2/du^2 - u built from A+ and A-, divided by the Wronskian.
double airy_kernel(double u, double v);

struct KernelSolution {
    std::vector<double> y;
    std::vector<double> W;
    double residual;  // sup |t^2 W'' - y W - g| over interior nodes
};

// W(y) = int_a^b t^{-4/3} K(t^{-2/3} y, t^{-2/3} z) g(z) dz on a uniform grid containing 0.
KernelSolution kernel_solve(const std::vector<double>& y, const std::vector<double>& g, double t,
                            double tol = 1e-3);

// Double integral of the rescaled kernel squared over [-alpha, alpha]^2.
double kernel_hs_norm2(double t, double alpha);

// int_alpha^beta (c+ A+ + c- A-)^2 du.
double airy_mass(double c_plus, double c_minus, double alpha, double beta);

// int_{s a}^0 A^2 / int_{s b}^{s a} A^2 for a > b, both negative.
double transition_ratio(double c_plus, double c_minus, double s, double a = -1.0, double b = -2.0);

}  // namespace specdegen
