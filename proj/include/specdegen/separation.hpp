#pragma once

#include <string>
#include <vector>

#include "specdegen/common.hpp"
#include "specdegen/profile.hpp"

namespace specdegen {

struct TransverseSpectrum {
    std::vector<double> eigenvalues;  // strictly increasing, positive
    std::string label;
};

// "dirichlet-interval:L=<len>" gives (l pi / L)^2; "list:<m1>,<m2>,..." is taken verbatim.
// Enough leading eigenvalues are produced to exceed mu_max (interval) or all of the list.
TransverseSpectrum parse_transverse(const std::string& spec, double mu_max);
TransverseSpectrum dirichlet_interval(double L, double mu_max);
void validate(const TransverseSpectrum& b);

struct LabeledEntry {
    double lambda = 0.0;
    int ell = 0;  // 1-based transverse index; negative for the second copy of a doubled cylinder mode
    int k = 0;    // 1-based radial index
};

struct LabeledSpectrum {
    double t = 0.0;
    double lambda_max = 0.0;
    std::vector<LabeledEntry> entries;  // sorted by (lambda, ell, k)
    std::vector<std::string> warnings;
};

std::vector<double> thresholds(const TransverseSpectrum& b, const WeightProfile& profile);

LabeledSpectrum product_spectrum(double t, const WeightProfile& profile, const TransverseSpectrum& b,
                                 double lambda_max, Boundary bc = Boundary::Dirichlet);

struct Suspect {
    double t = 0.0;
    LabeledEntry a, b;
    double gap = 0.0;
};

struct CrossingInterval {
    double t_lo = 0.0, t_hi = 0.0;
    int ell_a = 0, k_a = 0, ell_b = 0, k_b = 0;
};

struct SimplicityReport {
    std::vector<double> t;
    std::vector<double> min_gap;  // per t, absolute; +inf with fewer than two entries
    std::vector<Suspect> suspects;
    std::vector<CrossingInterval> crossings;
};

// Pairs with |l_i - l_j| <= tol * max(l_i, l_j) are suspects. Spectra must be in increasing t order.
SimplicityReport simplicity_scan(const std::vector<LabeledSpectrum>& spectra, double tol = 1e-8);

struct CylinderLevel {
    double lambda = 0.0;
    int multiplicity = 0;
    std::vector<std::pair<int, int>> modes;  // (k, l)
};

struct CylinderSpectrum {
    double t = 0.0;
    bool exact = false;  // grouping done in integer arithmetic on a rational t^2
    std::vector<CylinderLevel> levels;
    int count_with_multiplicity() const;
    LabeledSpectrum labeled() const;  // l >= 1 modes appear as (l, k) and (-l, k)
};

// The n smallest distinct values of pi^2 (k^2 + l^2 / t^2), k >= 1, l >= 0.
CylinderSpectrum cylinder_spectrum(double t, int n);

// Whether the first n eigenvalues, counted with multiplicity, are all simple.
bool cylinder_first_simple(double t, int n);

struct CylinderThreshold {
    int n = 0;
    double enumerated = 0.0;    // sup of t with the first n eigenvalues simple, by bisection
    double inverse_sqrt = 0.0;  // (n^2 - 1)^(-1/2)
    double inverse = 0.0;       // (n^2 - 1)^(-1)
    bool matches_inverse_sqrt = false;
    bool matches_inverse = false;
};
CylinderThreshold cylinder_simplicity_threshold(int n);

}  // namespace specdegen
