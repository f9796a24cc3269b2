#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "specdegen/profile.hpp"
#include "specdegen/separation.hpp"

namespace specdegen {

struct StretchSpec {
    std::string name;
    std::function<double(double)> rho, drho, d2rho;
    double c = 1.0;
};

// rho given as an expression in x, derivatives taken symbolically.
StretchSpec stretch_from_expression(const std::string& rho, double c);

// psi(x) = int_x^c dr / rho(r), by quadrature.
double stretch_psi(const StretchSpec& s, double x);

// sigma = rho^2 o psi^{-1}, tabulated by integrating d(ln x)/ds = -rho(x)/x from x(0) = c.
WeightProfile stretch_sigma(const StretchSpec& s, double s_max = 200.0);

// Structured P1 mesh of the triangle (0,0), (1,0), (1,t): nodes (i/N, t j/N), 0 <= j <= i <= N.
struct TriangleMesh {
    double t = 0.0;
    int N = 0;
    std::vector<double> x, y;
    std::vector<std::array<int, 3>> elements;
    std::vector<char> boundary;
    double h() const { return 1.0 / N; }
    double min_area() const;
    double quality_ratio() const;  // largest over smallest element diameter
};

TriangleMesh triangle_mesh(double t, int N);
void write_mesh(const TriangleMesh& m, const std::string& vertex_csv, const std::string& element_csv);

// Lowest n Dirichlet eigenvalues of the P1 stiffness/mass pencil on the mesh.
std::vector<double> triangle_fem_eigenvalues(const TriangleMesh& m, int n);

struct TriangleSpectrum {
    double t = 0.0;
    int n = 0;
    double h = 0.0;
    std::vector<double> lambda_h, lambda_h2, lambda_h4;  // meshes h, h/2, h/4
    std::vector<double> lambda_extrap;                   // two Richardson levels
    std::vector<double> error_estimate;
    std::vector<double> renormalized;  // t^2 lambda_extrap
    int nodes_finest = 0;
};

// Refuses (ResolutionError) if the coarsest mesh has fewer than 8 elements across the height.
TriangleSpectrum triangle_spectrum(double t, int n, double h);

struct SectorSpectrum {
    double t = 0.0;
    double angle = 0.0;
    LabeledSpectrum spectrum;          // lambda = j_{nu_l,k}^2, nu_l = l pi / angle
    std::vector<double> renormalized;  // t^2 lambda, same order
    std::vector<std::string> notices;
};
SectorSpectrum sector_spectrum(double t, int n);

struct CompareResult {
    double hausdorff = 0.0;
    std::vector<double> matched_diffs;
};
CompareResult compare_spectra(const std::vector<double>& s1, const std::vector<double>& s2, int n);

// The l = 1 sector spectrum against the half-line problem for sigma = stretch_sigma(rho = x, c = 1).
struct KeystoneCheck {
    double t = 0.0;
    double calibration = 0.0;            // sqrt(mu)/pi that matches the lowest eigenvalue, found by root finding
    double calibration_predicted = 0.0;  // t / arctan t
    std::vector<double> sector_renormalized;
    std::vector<double> halfline;  // at mu = (pi calibration_predicted)^2
    double max_rel_diff = 0.0;
};
KeystoneCheck keystone_check(double t, int k_max);

}  // namespace specdegen
