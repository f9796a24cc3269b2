#include <doctest.h>

#include <cmath>
#include <numbers>

#include "specdegen/airy.hpp"
#include "specdegen/bessel.hpp"
#include "specdegen/errors.hpp"
#include "specdegen/halfline.hpp"

using namespace specdegen;

static const double pi2 = std::numbers::pi * std::numbers::pi;

static HalfLineProblem exp2_problem(double t, Boundary bc = Boundary::Dirichlet) {
    HalfLineProblem p;
    p.t = t;
    p.mu = pi2;
    p.profile = make_profile("exp2");
    p.bc = bc;
    return p;
}

TEST_CASE("eigenvalues match the Bessel oracle") {
    for (double t : {0.5, 0.2, 0.1, 0.05}) {
        for (Boundary bc : {Boundary::Dirichlet, Boundary::Neumann}) {
            auto s = solve(exp2_problem(t, bc), 5);
            REQUIRE(s.resolved_count == 5);
            auto z = bessel_zeros(std::sqrt(pi2) / t, 5, bc);
            for (int k = 0; k < 5; ++k) {
                double ref = t * t * z[k] * z[k];
                CHECK(std::abs(s.eigenvalues[k] - ref) / ref < 1e-6);
            }
        }
    }
}

TEST_CASE("spectral invariants") {
    double prev1 = INFINITY;
    for (double t : {0.4, 0.2, 0.1, 0.05}) {
        auto s = solve(exp2_problem(t), 4);
        CHECK(s.eigenvalues[0] > pi2);
        for (size_t k = 1; k < s.eigenvalues.size(); ++k) CHECK(s.eigenvalues[k] > s.eigenvalues[k - 1]);
        CHECK(s.eigenvalues[0] < prev1);
        prev1 = s.eigenvalues[0];
        for (auto& e : s.pairs) {
            CHECK(e.residual <= 1e-6);
            CHECK(e.bc_value <= 1e-10);
        }
    }
    auto n = solve(exp2_problem(0.1, Boundary::Neumann), 3);
    for (auto& e : n.pairs) CHECK(e.bc_value <= 1e-8);
    // Neumann lies below Dirichlet
    auto d = solve(exp2_problem(0.1), 3);
    for (int k = 0; k < 3; ++k) CHECK(n.eigenvalues[k] < d.eigenvalues[k]);
}

TEST_CASE("eigenvalue branches increase with t") {
    std::vector<double> ts = {0.05, 0.07, 0.1, 0.14, 0.2};
    auto sw = sweep(exp2_problem(0.1), ts, 3);
    for (int k = 0; k < 3; ++k)
        for (size_t i = 1; i < ts.size(); ++i) CHECK(sw[i].eigenvalues[k] > sw[i - 1].eigenvalues[k]);
}

TEST_CASE("other profiles") {
    auto p = exp2_problem(0.1);
    p.profile = make_profile("rational");
    auto s = solve(p, 3);
    CHECK(s.resolved_count == 3);
    CHECK(s.eigenvalues[0] > pi2);
    for (auto& e : s.pairs) CHECK(e.residual <= 1e-6);
    p.profile = make_profile("exp");
    auto s2 = solve(p, 3);
    for (auto& e : s2.pairs) CHECK(e.residual <= 1e-6);
}

TEST_CASE("partial result when the grid cannot resolve") {
    auto s = solve(exp2_problem(0.5), 400, false);
    CHECK(s.resolved_count < 400);
    CHECK(s.resolved_count > 5);
    CHECK(s.eigenvalues.size() == (size_t)s.resolved_count);
    CHECK_FALSE(s.warnings.empty());
    auto p = exp2_problem(0.1);
    p.h = 0.01;
    CHECK_THROWS_AS(solve(p, 1), ValidationError);
}

TEST_CASE("exponential decay rate") {
    auto e = solve(exp2_problem(0.2), 1).pairs[0];
    auto fit = decay_rate(e, pi2 / 2);
    CHECK(fit.slope <= -std::sqrt(pi2) / 0.2 * 0.9);
    auto e2 = solve(exp2_problem(0.4), 1).pairs[0];
    auto fit2 = decay_rate(e2, pi2 / 2);
    CHECK(fit2.bound == doctest::Approx(fit.bound / 2));
    CHECK(fit2.slope <= fit2.bound * 0.9);
    auto fit0 = decay_rate(e, 1e-6);
    CHECK(fit0.slope <= 0.0);
}

TEST_CASE("mass beyond the level point") {
    std::vector<double> C;
    for (double t : {0.4, 0.2, 0.1}) {
        auto e = solve(exp2_problem(t), 1).pairs[0];
        CHECK(mass_beyond(e, 0.0) == doctest::Approx(1.0).epsilon(1e-12));
        double xs = level_point(e.profile, pi2, e.lambda, pi2 / 2);
        C.push_back(mass_beyond(e, xs) / (t * t));
        double beta = weighted_mass_beyond(e, 3 * xs, 2.0, xs) / t;
        CHECK(beta < 1.0);
    }
    for (double c : C) CHECK(c < 0.05);
    CHECK(C[2] <= C[0]);
}

TEST_CASE("non-concentration constant") {
    for (double t : {0.2, 0.1, 0.05}) {
        auto s = solve(exp2_problem(t), 6);
        size_t b = 0;
        for (size_t k = 0; k < s.eigenvalues.size(); ++k)
            if (std::abs(s.eigenvalues[k] - 2 * pi2) < std::abs(s.eigenvalues[b] - 2 * pi2)) b = k;
        double kap = nonconcentration_kappa(s.pairs[b], 2 * pi2);
        CHECK(kap > 1.0);
        // crude cap: integrand bounded by (E sigma(0) - mu) w^2 and w^2 <= sigma w^2 / sigma(x_max)
        CHECK(kap < 2 * pi2 * 1.0 / 1e-8);
    }
    auto e = solve(exp2_problem(0.1), 1).pairs[0];
    CHECK(nonconcentration_kappa(e, pi2) <= 0.0);
}

TEST_CASE("Langer-Cherry residual scales like t^4") {
    std::vector<double> r;
    for (double t : {0.4, 0.2, 0.1}) {
        auto e = solve(exp2_problem(t), 1).pairs[0];
        auto res = lc_residual(e, e.lambda);
        CHECK_FALSE(res.undersampled);
        r.push_back(res.value / std::pow(t, 4));
        auto off = lc_residual(e, e.lambda + t);
        CHECK(off.value / (t * t) < 0.2);
    }
    for (double c : r) CHECK(c < 2e-4);
    CHECK(r[2] / r[0] < 2.0);
    auto e = solve(exp2_problem(0.2), 1).pairs[0];
    std::fill(e.w.begin(), e.w.end(), 0.0);
    CHECK_THROWS_AS(lc_residual(e, 20.0), ValidationError);
}

TEST_CASE("Airy eigenvalue approximation") {
    std::vector<double> ts = {0.2, 0.1, 0.05, 0.025}, defects;
    for (double t : ts) {
        auto c = airy_eigenvalue_check(exp2_problem(t), 1);
        CHECK(c.nearest_index == 1);
        CHECK(c.defect / (t * t) < 0.005);
        defects.push_back(c.defect);
    }
    CHECK(loglog_slope(ts, defects) >= 1.8);
    auto c2 = airy_eigenvalue_check(exp2_problem(0.1), 2);
    auto c1 = airy_eigenvalue_check(exp2_problem(0.1), 1);
    CHECK(c2.airy_pred < c1.airy_pred);
    CHECK(c2.lambda > c1.lambda);
}

TEST_CASE("super-separation of the first gap") {
    auto rep = superseparation(exp2_problem(0.2), {0.2, 0.1, 0.05, 0.025}, 1);
    REQUIRE(rep.rows.size() == 4);
    for (size_t i = 1; i < rep.rows.size(); ++i) CHECK(rep.rows[i].gap_over_t > rep.rows[i - 1].gap_over_t);
    for (auto& r : rep.rows) CHECK(std::abs(r.gap / r.predicted_gap - 1) < 0.2);
    // the leading t^{2/3} law against the Airy zero gap at fixed t
    auto z = airy_zeros(2, Boundary::Dirichlet);
    const auto& r = rep.rows.back();
    // near threshold lambda - mu ~ -(2 mu)^{2/3} phi_lambda(0) for sigma = exp(-2x)
    double lead = std::pow(2 * pi2, 2.0 / 3.0) * std::pow(r.t, 2.0 / 3.0) * (z[0] - z[1]);
    CHECK(std::abs(r.gap / lead - 1) < 0.2);
    CHECK(rep.slope_local > 0.55);
    CHECK(rep.slope_local < 0.8);
    CHECK_THROWS_AS(superseparation(exp2_problem(0.2), {0.1, 0.2}, 1), ValidationError);
}
