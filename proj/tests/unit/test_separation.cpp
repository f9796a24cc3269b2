#include <doctest.h>

#include <cmath>
#include <map>
#include <numbers>
#include <set>

#include "specdegen/errors.hpp"
#include "specdegen/halfline.hpp"
#include "specdegen/separation.hpp"

using namespace specdegen;

namespace {
constexpr double pi = std::numbers::pi;
}

TEST_CASE("thresholds divide by sigma(0)") {
    TransverseSpectrum b = dirichlet_interval(1.0, 100.0);
    auto thr = thresholds(b, make_profile("exp2"));
    for (size_t l = 0; l < thr.size(); ++l) CHECK(thr[l] == doctest::Approx(std::pow((l + 1) * pi, 2)).epsilon(1e-15));
    auto thr4 = thresholds(b, make_profile("expr:4*exp(-2*x)"));
    for (size_t l = 0; l < thr.size(); ++l) CHECK(thr4[l] == doctest::Approx(thr[l] / 4).epsilon(1e-14));
}

TEST_CASE("transverse spectrum parsing and validation") {
    auto b = parse_transverse("dirichlet-interval:L=2", 50.0);
    CHECK(b.eigenvalues[0] == doctest::Approx(pi * pi / 4));
    CHECK(b.eigenvalues.back() > 50.0);
    auto c = parse_transverse("list:1,4,9.5", 0);
    CHECK(c.eigenvalues.size() == 3);
    CHECK_THROWS_AS(parse_transverse("list:1,1", 0), ValidationError);
    CHECK_THROWS_AS(parse_transverse("list:0,1", 0), ValidationError);
    CHECK_THROWS_AS(parse_transverse("neumann-interval", 10), ValidationError);
    CHECK_THROWS_AS(parse_transverse("dirichlet-interval:L=-1", 10), ValidationError);
}

TEST_CASE("product spectrum below the first threshold is empty") {
    auto b = dirichlet_interval(1.0, 20.0);
    auto s = product_spectrum(0.1, make_profile("exp2"), b, pi * pi - 1e-9);
    CHECK(s.entries.empty());
}

TEST_CASE("product spectrum is the labeled union of the half-line spectra") {
    const double t = 0.1, lmax = 60.0;
    WeightProfile prof = make_profile("exp2");
    auto b = dirichlet_interval(1.0, lmax);
    auto s = product_spectrum(t, prof, b, lmax);
    REQUIRE_FALSE(s.entries.empty());
    std::set<std::pair<int, int>> labels;
    std::map<int, std::vector<double>> by_ell;
    for (size_t i = 0; i < s.entries.size(); ++i) {
        const auto& e = s.entries[i];
        CHECK(labels.insert({e.ell, e.k}).second);
        if (i > 0) CHECK(s.entries[i - 1].lambda <= e.lambda);
        CHECK(e.lambda >= b.eigenvalues[e.ell - 1] / prof.sigma0);
        CHECK(e.lambda <= lmax);
        by_ell[e.ell].push_back(e.lambda);
    }
    size_t total = 0;
    for (size_t l = 0; l < b.eigenvalues.size(); ++l) {
        HalfLineProblem p;
        p.t = t;
        p.mu = b.eigenvalues[l];
        p.profile = prof;
        auto ref = solve_below(p, lmax, false);
        auto& got = by_ell[static_cast<int>(l + 1)];
        REQUIRE(got.size() == ref.eigenvalues.size());
        for (size_t k = 0; k < got.size(); ++k) CHECK(got[k] == ref.eigenvalues[k]);
        total += ref.eigenvalues.size();
    }
    CHECK(total == s.entries.size());
}

TEST_CASE("near-threshold clusters belong to the first transverse mode and grow as t shrinks") {
    WeightProfile prof = make_profile("exp2");
    auto b = dirichlet_interval(1.0, 30.0);
    size_t prev = 0;
    for (double t : {0.01, 0.005, 0.0025}) {
        auto s = product_spectrum(t, prof, b, pi * pi + 1);
        for (auto& e : s.entries) CHECK(e.ell == 1);
        CHECK(s.entries.size() > prev);
        prev = s.entries.size();
    }
    CHECK(prev >= 3);
    CHECK(product_spectrum(0.05, prof, b, pi * pi + 1).entries.empty());
}

TEST_CASE("labeled branches decrease with t and approach the thresholds") {
    WeightProfile prof = make_profile("exp2");
    auto b = dirichlet_interval(1.0, 80.0);
    std::vector<double> ts{0.2, 0.1, 0.05, 0.025};
    std::vector<std::map<std::pair<int, int>, double>> vals;
    for (double t : ts) {
        auto s = product_spectrum(t, prof, b, 80.0);
        std::map<std::pair<int, int>, double> m;
        for (auto& e : s.entries) m[{e.ell, e.k}] = e.lambda;
        vals.push_back(m);
    }
    for (size_t i = 0; i + 1 < ts.size(); ++i)
        for (auto& [lab, v] : vals[i]) {
            auto it = vals[i + 1].find(lab);
            REQUIRE(it != vals[i + 1].end());
            CHECK(it->second < v);
        }
    // Lowest branch per mode: the excess over the threshold shrinks toward zero.
    for (int l = 1; l <= 2; ++l) {
        double thr = std::pow(l * pi, 2);
        double prev = INFINITY, ratio = 0;
        for (auto& m : vals) {
            double ex = m.at({l, 1}) - thr;
            CHECK(ex > 0);
            CHECK(ex < prev);
            ratio = ex / prev;
            prev = ex;
        }
        // Halving t shrinks the excess by about 2^(-2/3).
        CHECK(ratio > 0.55);
        CHECK(ratio < 0.72);
    }
}

TEST_CASE("generic product spectra are simple; crossings are found between labeled branches") {
    WeightProfile prof = make_profile("exp2");
    auto b = dirichlet_interval(1.0, 120.0);
    std::vector<LabeledSpectrum> spectra;
    for (double t : {0.06, 0.07, 0.08, 0.09, 0.1}) spectra.push_back(product_spectrum(t, prof, b, 120.0));
    auto rep = simplicity_scan(spectra, 1e-8);
    CHECK(rep.suspects.empty());
    for (double g : rep.min_gap) CHECK(g > 1e-6);
    CHECK_FALSE(rep.crossings.empty());
    for (auto& c : rep.crossings) CHECK(c.ell_a != c.ell_b);
}

TEST_CASE("simplicity scan with zero tolerance flags only exact equality") {
    LabeledSpectrum s;
    s.t = 1;
    s.entries = {{1.0, 1, 1}, {1.0 + 1e-15, 2, 1}, {2.0, 1, 2}, {2.0, 3, 1}};
    auto rep = simplicity_scan({s}, 0.0);
    REQUIRE(rep.suspects.size() == 1);
    CHECK(rep.suspects[0].a.lambda == 2.0);
    auto loose = simplicity_scan({s}, 1e-8);
    CHECK(loose.suspects.size() == 2);
}

TEST_CASE("cylinder spectrum at t = 1") {
    auto cs = cylinder_spectrum(1.0, 3);
    CHECK(cs.exact);
    REQUIRE(cs.levels.size() == 3);
    CHECK(cs.levels[0].lambda == doctest::Approx(pi * pi));
    CHECK(cs.levels[0].multiplicity == 1);
    CHECK(cs.levels[1].lambda == doctest::Approx(2 * pi * pi));
    CHECK(cs.levels[1].multiplicity == 2);
    CHECK(cs.levels[2].lambda == doctest::Approx(4 * pi * pi));
    CHECK(cs.levels[2].multiplicity == 1);
}

TEST_CASE("cylinder spectrum agrees with a two-loop integer enumeration") {
    // t^2 = a / c exactly: pi^2 (k^2 + l^2 c / a) grouped by the integer a k^2 + c l^2.
    struct Case {
        double t;
        long long a, c;
    };
    for (Case cs : {Case{0.3, 9, 100}, Case{0.5, 1, 4}, Case{1.0, 1, 1}, Case{2.0, 4, 1}, Case{1.5, 9, 4}}) {
        const int n = 25;
        std::map<long long, std::pair<int, std::set<std::pair<int, int>>>> oracle;
        for (int k = 1; k <= 60; ++k)
            for (int l = 0; l <= 200; ++l) {
                auto& slot = oracle[cs.a * k * k + cs.c * l * l];
                slot.first += l == 0 ? 1 : 2;
                slot.second.insert({k, l});
            }
        auto got = cylinder_spectrum(cs.t, n);
        CHECK(got.exact);
        REQUIRE(got.levels.size() == static_cast<size_t>(n));
        auto it = oracle.begin();
        for (int i = 0; i < n; ++i, ++it) {
            const auto& lev = got.levels[i];
            CHECK(lev.lambda == doctest::Approx(pi * pi * double(it->first) / double(cs.a)).epsilon(1e-14));
            CHECK(lev.multiplicity == it->second.first);
            std::set<std::pair<int, int>> modes(lev.modes.begin(), lev.modes.end());
            CHECK(modes == it->second.second);
        }
    }
}

TEST_CASE("simplicity scan recovers exact cylinder multiplicities") {
    auto cs = cylinder_spectrum(0.5, 30);
    auto rep = simplicity_scan({cs.labeled()}, 1e-10);
    size_t expected = 0;
    for (auto& lev : cs.levels) expected += size_t(lev.multiplicity) * (lev.multiplicity - 1) / 2;
    CHECK(rep.suspects.size() == expected);
}

TEST_CASE("cylinder: small t gives simple pi^2 k^2") {
    auto cs = cylinder_spectrum(1e-3, 10);
    for (int k = 1; k <= 10; ++k) {
        CHECK(cs.levels[k - 1].lambda == doctest::Approx(pi * pi * k * k).epsilon(1e-15));
        CHECK(cs.levels[k - 1].multiplicity == 1);
    }
    CHECK(cylinder_first_simple(1e-3, 10));
}

TEST_CASE("cylinder simplicity threshold follows the inverse square root law") {
    for (int n = 2; n <= 12; ++n) {
        auto r = cylinder_simplicity_threshold(n);
        CHECK(r.matches_inverse_sqrt);
        CHECK_FALSE(r.matches_inverse);
        CHECK(cylinder_first_simple(0.999 * r.enumerated, n));
        CHECK_FALSE(cylinder_first_simple(1.001 * r.enumerated, n));
        // The reciprocal law is violated: just below (n^2-1)^(-1/2) but far above (n^2-1)^(-1), still simple.
        CHECK(cylinder_first_simple(0.99 * r.inverse_sqrt, n));
    }
    CHECK_THROWS_AS(cylinder_simplicity_threshold(1), ValidationError);
}
