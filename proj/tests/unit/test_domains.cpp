#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <string>

#include <boost/math/special_functions/bessel.hpp>

#include "specdegen/domains.hpp"
#include "specdegen/errors.hpp"

using namespace specdegen;

namespace {
constexpr double pi = std::numbers::pi;
}

TEST_CASE("stretch of rho = x is the exponential weight") {
    WeightProfile p = stretch_sigma(stretch_from_expression("x", 1.0));
    CHECK(p.sigma0 == doctest::Approx(1.0).epsilon(1e-15));
    for (int i = 0; i <= 2000; ++i) {
        double s = 0.01 * i;
        double ref = std::exp(-2 * s);
        CHECK(std::abs(p.sigma(s) - ref) <= 1e-12 * ref);
        CHECK(std::abs(p.dsigma(s) + 2 * ref) <= 2e-12 * ref);
        CHECK(std::abs(p.d2sigma(s) - 4 * ref) <= 4e-12 * ref);
    }
    WeightProfile p2 = stretch_sigma(stretch_from_expression("x", 2.0));
    CHECK(p2.sigma0 == doctest::Approx(4.0).epsilon(1e-14));
    for (double s : {0.0, 0.5, 3.0, 11.0}) CHECK(p2.sigma(s) == doctest::Approx(4 * std::exp(-2 * s)).epsilon(1e-12));
}

TEST_CASE("stretch of rho = sin x against the closed-form inverse") {
    const double c = 1.2;
    StretchSpec sp = stretch_from_expression("log(1 + x) + x^3", c);  // smoke for a generic rho
    CHECK(stretch_sigma(sp).sigma0 == doctest::Approx(std::pow(std::log(1 + c) + c * c * c, 2)).epsilon(1e-14));

    // Closed form oracle: psi(x) = ln tan(c/2) - ln tan(x/2), x(s) = 2 atan(tan(c/2) e^{-s}).
    StretchSpec sn;
    sn.name = "sin";
    sn.rho = [](double x) { return std::sin(x); };
    sn.drho = [](double x) { return std::cos(x); };
    sn.d2rho = [](double x) { return -std::sin(x); };
    sn.c = c;
    WeightProfile p = stretch_sigma(sn);
    CHECK(p.sigma0 == doctest::Approx(std::pow(std::sin(c), 2)).epsilon(1e-15));
    for (double ss : {0.0, 0.1, 0.7, 2.0, 5.0, 12.0, 25.0}) {
        double x = 2 * std::atan(std::tan(c / 2) * std::exp(-ss));
        double ref = std::sin(x) * std::sin(x);
        CHECK(std::abs(p.sigma(ss) - ref) <= 1e-11 * ref);
        CHECK(std::abs(p.dsigma(ss) + 2 * ref * std::cos(x)) <= 1e-11 * ref);
    }
    for (double x : {1e-6, 0.01, 0.3, 1.0, c}) {
        double ref = std::log(std::tan(c / 2)) - std::log(std::tan(x / 2));
        CHECK(stretch_psi(sn, x) == doctest::Approx(ref).epsilon(1e-11));
    }
}

TEST_CASE("psi is decreasing, vanishes at c and diverges at 0") {
    StretchSpec s = stretch_from_expression("x + x^2", 1.0);
    double prev = INFINITY;
    for (double x : {1e-12, 1e-8, 1e-4, 0.01, 0.1, 0.5, 0.9, 1.0}) {
        double v = stretch_psi(s, x);
        CHECK(v < prev);
        prev = v;
    }
    CHECK(stretch_psi(s, 1.0) == 0.0);
    CHECK(stretch_psi(s, 1e-12) > 25.0);
}

TEST_CASE("stretch construction errors") {
    CHECK_THROWS_AS(stretch_from_expression("1 + x", 1.0), ValidationError);
    CHECK_THROWS_AS(stretch_from_expression("x - x^2", 1.0), ValidationError);
    CHECK_THROWS_AS(stretch_from_expression("x", -1.0), ValidationError);
}

TEST_CASE("structured triangle mesh") {
    TriangleMesh m = triangle_mesh(0.1, 20);
    CHECK(m.x.size() == 21u * 22u / 2u);
    CHECK(m.elements.size() == 400u);
    CHECK(m.min_area() > 0);
    CHECK(m.quality_ratio() <= 4.0);
    double area = 0;
    for (auto& e : m.elements)
        area += 0.5 * std::abs((m.x[e[1]] - m.x[e[0]]) * (m.y[e[2]] - m.y[e[0]]) -
                               (m.x[e[2]] - m.x[e[0]]) * (m.y[e[1]] - m.y[e[0]]));
    CHECK(area == doctest::Approx(0.05).epsilon(1e-13));
    int bnd = 0;
    for (char b : m.boundary) bnd += b;
    CHECK(bnd == 3 * 20);
    CHECK_THROWS_AS(triangle_mesh(0.0, 10), ValidationError);
    CHECK_THROWS_AS(triangle_mesh(1.5, 10), ValidationError);
}

TEST_CASE("mesh dump writes vertex and element CSV") {
    TriangleMesh m = triangle_mesh(0.5, 4);
    std::string v = "/tmp/specdegen_test_vertices.csv", e = "/tmp/specdegen_test_elements.csv";
    write_mesh(m, v, e);
    std::ifstream fv(v), fe(e);
    std::string line;
    int nv = -1, ne = -1;
    while (std::getline(fv, line)) ++nv;
    while (std::getline(fe, line)) ++ne;
    CHECK(nv == static_cast<int>(m.x.size()));
    CHECK(ne == static_cast<int>(m.elements.size()));
    std::remove(v.c_str());
    std::remove(e.c_str());
}

TEST_CASE("right isoceles triangle: lowest eigenvalue 5 pi^2 and a degenerate pair at 65 pi^2") {
    TriangleSpectrum r = triangle_spectrum(1.0, 20, 1.0 / 24);
    CHECK(r.lambda_extrap[0] == doctest::Approx(5 * pi * pi).epsilon(1e-6));
    // j^2 + k^2 with j > k >= 1: 5, 10, 13, 17, 20, 25, 26, 29, 34, 37, 40, 41, 45, 50, 52, 53, 58, 61, 65, 65.
    const int sums[20] = {5, 10, 13, 17, 20, 25, 26, 29, 34, 37, 40, 41, 45, 50, 52, 53, 58, 61, 65, 65};
    for (int k = 0; k < 20; ++k) CHECK(r.lambda_extrap[k] == doctest::Approx(sums[k] * pi * pi).epsilon(2e-4));
    double pair_gap = (r.lambda_extrap[19] - r.lambda_extrap[18]) / r.lambda_extrap[18];
    CHECK(pair_gap < 1e-4);
    for (int k = 0; k < 18; ++k) CHECK((r.lambda_extrap[k + 1] - r.lambda_extrap[k]) / r.lambda_extrap[k] > 1e-2);
}

TEST_CASE("FEM eigenvalues decrease under refinement and bracket the extrapolation") {
    TriangleSpectrum r = triangle_spectrum(0.2, 6, 1.0 / 25);
    for (int k = 0; k < 6; ++k) {
        CHECK(r.lambda_h[k] > r.lambda_h2[k]);
        CHECK(r.lambda_h2[k] > r.lambda_h4[k]);
        CHECK(r.lambda_h4[k] > r.lambda_extrap[k]);
        CHECK(r.lambda_h4[k] - r.lambda_extrap[k] < 0.34 * (r.lambda_h2[k] - r.lambda_h4[k]));
        CHECK(r.renormalized[k] == doctest::Approx(0.04 * r.lambda_extrap[k]));
    }
}

TEST_CASE("triangle eigenvalues grow as t decreases and stay simple") {
    std::vector<double> prev;
    for (double t : {0.3, 0.2, 0.1}) {
        TriangleSpectrum r = triangle_spectrum(t, 8, 1.0 / 25);
        CHECK(r.lambda_extrap[0] > 0);
        for (int k = 0; k + 1 < 8; ++k) CHECK((r.lambda_extrap[k + 1] - r.lambda_extrap[k]) / r.lambda_extrap[k] > 1e-6);
        if (!prev.empty())
            for (int k = 0; k < 8; ++k) CHECK(r.lambda_extrap[k] > prev[k]);
        prev = r.lambda_extrap;
    }
}

TEST_CASE("triangle refuses meshes too coarse for the thin direction") {
    CHECK_THROWS_AS(triangle_spectrum(0.1, 5, 0.2), ResolutionError);
    CHECK_THROWS_AS(triangle_spectrum(0.1, 5, 0.0), ValidationError);
}

TEST_CASE("sector spectrum: orders, Bessel zeros and renormalized thresholds") {
    SectorSpectrum s = sector_spectrum(0.5, 8);
    double nu1 = pi / std::atan(0.5);
    REQUIRE(s.spectrum.entries.size() == 8u);
    for (auto& e : s.spectrum.entries) {
        double nu = e.ell * nu1;
        double j = boost::math::cyl_bessel_j_zero(nu, e.k);
        CHECK(e.lambda == doctest::Approx(j * j).epsilon(1e-10));
    }
    for (size_t i = 1; i < s.renormalized.size(); ++i) CHECK(s.renormalized[i] >= s.renormalized[i - 1]);

    for (double t : {0.1, 0.01, 0.001}) CHECK(std::atan(t) / t == doctest::Approx(1.0).epsilon(t * t));

    // Renormalized l = 1, k = 1 value approaches pi^2 at rate t^(2/3).
    double prev = INFINITY, ratio = 0;
    for (double t : {0.08, 0.04, 0.02, 0.01}) {
        double ex = sector_spectrum(t, 1).renormalized[0] - pi * pi;
        CHECK(ex > 0);
        ratio = ex / prev;
        prev = ex;
    }
    CHECK(ratio == doctest::Approx(std::pow(0.5, 2.0 / 3.0)).epsilon(0.05));
}

TEST_CASE("sector l = 1 spectrum equals the stretched half-line problem") {
    for (double t : {0.5, 0.2, 0.1}) {
        KeystoneCheck k = keystone_check(t, 3);
        CHECK(k.max_rel_diff < 1e-5);
        CHECK(k.calibration == doctest::Approx(k.calibration_predicted).epsilon(1e-7));
    }
}

TEST_CASE("compare_spectra") {
    std::vector<double> a{1, 2, 3, 4}, b{1.5, 2.5, 3.5, 4.5};
    CHECK(compare_spectra(a, a, 4).hausdorff == 0.0);
    auto c = compare_spectra(a, b, 4);
    CHECK(c.hausdorff == doctest::Approx(0.5));
    for (double d : c.matched_diffs) CHECK(d == doctest::Approx(0.5));
    // Sets can be close while matched differences are not.
    auto d = compare_spectra({1, 1, 2}, {1, 2, 2}, 3);
    CHECK(d.hausdorff == 0.0);
    CHECK(d.matched_diffs[1] == 1.0);
    CHECK_THROWS_AS(compare_spectra(a, {1, 2}, 3), ValidationError);
}

TEST_CASE("triangle lies below the inscribed sector, and the gap shrinks with t") {
    double prev = INFINITY;
    for (double t : {0.2, 0.1}) {
        TriangleSpectrum tr = triangle_spectrum(t, 6, 1.0 / 25);
        SectorSpectrum se = sector_spectrum(t, 6);
        for (int k = 0; k < 6; ++k) CHECK(tr.renormalized[k] < se.renormalized[k]);
        double H = compare_spectra(tr.renormalized, se.renormalized, 6).hausdorff;
        CHECK(H / t < prev);
        prev = H / t;
    }
}
