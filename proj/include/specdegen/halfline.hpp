#pragma once

#include <string>
#include <vector>

#include "specdegen/common.hpp"
#include "specdegen/profile.hpp"

namespace specdegen {

// -t^2 w'' + (mu - lambda sigma) w = 0 on [0, X_max] with a condition at 0.
struct HalfLineProblem {
    double t = 0.1;
    double mu = 1.0;
    WeightProfile profile;
    Boundary bc = Boundary::Dirichlet;
    double X_max = 0.0;  // 0: chosen from the profile and the requested eigenvalues
    double h = 0.0;      // 0: min(t/25, 0.01)
};

struct Eigenpair {
    int k = 0;  // 1-based
    double lambda = 0.0;
    double t = 0.0, mu = 0.0;
    Boundary bc = Boundary::Dirichlet;
    WeightProfile profile;
    std::vector<double> x, w, dw;  // ||w||_sigma = 1
    double residual = 0.0;         // sup |t^2 w'' - f w| / sup |w|
    double bc_value = 0.0;         // |w(0)| or |w'(0)|
};

struct HalfLineSpectrum {
    HalfLineProblem problem;  // with X_max and h filled in
    std::vector<double> eigenvalues;
    std::vector<double> residuals;
    std::vector<Eigenpair> pairs;  // empty unless eigenfunctions were requested
    int requested = 0;
    int resolved_count = 0;
    std::vector<std::string> warnings;
};

// Finite-difference eigenvalues of the pencil (t^2 D2 + mu, diag sigma), lowest n.
std::vector<double> fd_eigenvalues(const HalfLineProblem& p, int n);

HalfLineSpectrum solve(const HalfLineProblem& p, int k_max, bool eigenfunctions = true);

// Eigenvalues not exceeding lambda_max.
HalfLineSpectrum solve_below(const HalfLineProblem& p, double lambda_max, bool eigenfunctions = false);

std::vector<HalfLineSpectrum> sweep(const HalfLineProblem& base, const std::vector<double>& t_grid, int k_max);

struct DecayFit {
    double slope = 0.0;
    double bound = 0.0;  // -sqrt(2 s)/t
    double lo = 0.0, hi = 0.0;
    bool shrunk = false;
};
DecayFit decay_rate(const Eigenpair& e, double s);

double mass_beyond(const Eigenpair& e, double x0);
// int_{x0} w^2 (1 + x^nu) / int_{x_ref} w^2
double weighted_mass_beyond(const Eigenpair& e, double x0, double nu, double x_ref);
double nonconcentration_kappa(const Eigenpair& e, double E);

struct LcResidual {
    double value = 0.0;
    bool undersampled = false;
    int ny = 0;
};
LcResidual lc_residual(const Eigenpair& e, double E);

struct AiryCheck {
    double lambda = 0.0;
    double phi_at_zero = 0.0;
    double airy_pred = 0.0;
    double defect = 0.0;
    int nearest_index = 0;
    double nearest_distance = 0.0;
};
AiryCheck airy_eigenvalue_check(const HalfLineProblem& p, int k);

// E solving phi_E(0) = t^{2/3} a_k.
double airy_predicted_eigenvalue(const HalfLineProblem& p, int k);

struct SeparationRow {
    double t = 0.0;
    double lambda_k = 0.0, lambda_k1 = 0.0;
    double gap = 0.0, gap_over_t = 0.0;
    double predicted_gap = 0.0;
};
struct SeparationReport {
    std::vector<SeparationRow> rows;
    double slope_fit = 0.0;    // least squares of log gap against log t
    double slope_local = 0.0;  // between the two smallest t
    std::vector<std::string> warnings;
};
SeparationReport superseparation(const HalfLineProblem& base, const std::vector<double>& t_grid, int k);

// Least-squares slope of log y against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace specdegen
