#include <doctest.h>

#include <chrono>
#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

#include "specdegen/errors.hpp"
#include "specdegen/forms.hpp"

using namespace specdegen;

namespace {

MatrixXd random_spd(int n, std::mt19937_64& rng, double shift) {
    std::normal_distribution<double> g;
    MatrixXd B(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) B(i, j) = g(rng);
    MatrixXd S = B.transpose() * B / n + shift * MatrixXd::Identity(n, n);
    return 0.5 * (S + S.transpose());
}

MatrixXd random_sym(int n, std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    MatrixXd B(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) B(i, j) = g(rng);
    return 0.5 * (B + B.transpose());
}

}  // namespace

TEST_CASE("closeness: trivial cases") {
    std::mt19937_64 rng(1);
    MatrixXd A = random_spd(5, rng, 0.3), M = random_spd(5, rng, 0.5);
    FormPencil p{5, A, M, A};
    CHECK(epsilon_closeness(p) < 1e-13);
    p.Q = MatrixXd(1.37 * A);
    CHECK(epsilon_closeness(p) == doctest::Approx(0.37).epsilon(1e-12));
    p.Q = MatrixXd(0.8 * A);
    CHECK(epsilon_closeness(p) == doctest::Approx(0.2).epsilon(1e-12));
}

TEST_CASE("closeness matches a dense generalized eigensolver") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        int n = 3 + trial % 6;
        MatrixXd A = random_spd(n, rng, 0.2), M = random_spd(n, rng, 0.5);
        MatrixXd P = 0.1 * random_sym(n, rng);
        FormPencil p{n, A, M, MatrixXd(A + P)};
        Eigen::GeneralizedSelfAdjointEigenSolver<MatrixXd> ges(P, A, Eigen::EigenvaluesOnly);
        double ref = ges.eigenvalues().cwiseAbs().maxCoeff();
        CHECK(std::abs(epsilon_closeness(p) - ref) < 1e-10 * std::max(1.0, ref));
    }
}

TEST_CASE("closeness of diagonal pencils shifts as predicted under scaling") {
    VectorXd a(4), q(4);
    a << 1.0, 2.0, 5.0, 9.0;
    q << 1.1, 1.9, 5.2, 9.0;
    for (double c : {0.0, 0.05, -0.07, 0.3}) {
        FormPencil p{4, a.asDiagonal(), MatrixXd::Identity(4, 4), MatrixXd((1 + c) * q.asDiagonal().toDenseMatrix())};
        double pred = ((1 + c) * q.array() / a.array() - 1.0).abs().maxCoeff();
        CHECK(epsilon_closeness(p) == doctest::Approx(pred).epsilon(1e-12));
    }
}

TEST_CASE("closeness rejects singular A") {
    MatrixXd A = MatrixXd::Zero(2, 2);
    A(0, 0) = 1;
    FormPencil p{2, A, MatrixXd::Identity(2, 2), MatrixXd::Identity(2, 2)};
    CHECK_THROWS_AS(epsilon_closeness(p), DomainError);
}

TEST_CASE("pencil validation") {
    MatrixXd A = MatrixXd::Identity(3, 3);
    A(0, 1) = 1.0;
    CHECK_THROWS_AS(validate(FormPencil{3, A, MatrixXd::Identity(3, 3), std::nullopt}), ValidationError);
    MatrixXd M = -MatrixXd::Identity(3, 3);
    CHECK_THROWS_AS(validate(FormPencil{3, MatrixXd::Identity(3, 3), M, std::nullopt}), DomainError);
    CHECK_THROWS_AS(validate(FormPencil{2, MatrixXd::Identity(3, 3), MatrixXd::Identity(3, 3), std::nullopt}),
                    ValidationError);
}

TEST_CASE("generalized eigenvectors are M-orthonormal") {
    std::mt19937_64 rng(3);
    MatrixXd A = random_spd(8, rng, 0.1), M = random_spd(8, rng, 0.5);
    GeneralizedEigen e = generalized_eigen(A, M);
    MatrixXd G = e.vectors.transpose() * M * e.vectors;
    CHECK((G - MatrixXd::Identity(8, 8)).cwiseAbs().maxCoeff() < 1e-12);
    MatrixXd R = A * e.vectors - M * e.vectors * e.values.asDiagonal();
    CHECK(R.cwiseAbs().maxCoeff() < 1e-11);
}

TEST_CASE("spectral projector: full, empty and single eigenvalue") {
    std::mt19937_64 rng(11);
    const int n = 8;
    MatrixXd A = random_spd(n, rng, 0.1), M = random_spd(n, rng, 0.5);
    FormPencil p{n, A, M, std::nullopt};
    Eigen::GeneralizedSelfAdjointEigenSolver<MatrixXd> ges(A, M);
    VectorXd lam = ges.eigenvalues();

    MatrixXd P = spectral_projector(p, lam[0] - 1, lam[n - 1] + 1);
    CHECK((P - MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff() < 1e-12);
    P = spectral_projector(p, lam[n - 1] + 1, lam[n - 1] + 2);
    CHECK(P.cwiseAbs().maxCoeff() == 0.0);

    double lo = 0.5 * (lam[1] + lam[2]), hi = 0.5 * (lam[2] + lam[3]);
    P = spectral_projector(p, lo, hi);
    Eigen::FullPivLU<MatrixXd> lu(P);
    lu.setThreshold(1e-10);
    CHECK(lu.rank() == 1);
    VectorXd psi = ges.eigenvectors().col(2);
    CHECK((P * psi - psi).cwiseAbs().maxCoeff() < 1e-12 * psi.cwiseAbs().maxCoeff());
}

TEST_CASE("spectral projector properties on random pencils") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 3.0);
    for (int trial = 0; trial < 30; ++trial) {
        int n = 4 + trial % 7;
        MatrixXd A = random_spd(n, rng, 0.1), M = random_spd(n, rng, 0.5);
        FormPencil p{n, A, M, std::nullopt};
        double lo = u(rng), hi = lo + u(rng);
        MatrixXd P = spectral_projector(p, lo, hi);
        CHECK((P * P - P).cwiseAbs().maxCoeff() < 1e-10);
        CHECK((M * P - P.transpose() * M).cwiseAbs().maxCoeff() < 1e-10);
        Eigen::GeneralizedSelfAdjointEigenSolver<MatrixXd> ges(A, M, Eigen::EigenvaluesOnly);
        int inside = 0;
        for (int k = 0; k < n; ++k) inside += ges.eigenvalues()[k] >= lo && ges.eigenvalues()[k] <= hi;
        CHECK(std::abs(P.trace() - inside) < 1e-10);
    }
}

TEST_CASE("quasimode checks with q = a are sharp") {
    std::mt19937_64 rng(13);
    MatrixXd A = random_spd(6, rng, 0.3), M = random_spd(6, rng, 0.5);
    FormPencil p{6, A, M, A};
    GeneralizedEigen e = generalized_eigen(A, M);
    double lo = 0.5 * (e.values[1] + e.values[2]), hi = 0.5 * (e.values[2] + e.values[3]);
    QuasimodeReport r = quasimode_suite(p, 2, lo, hi);
    CHECK(r.eps < 1e-13);
    CHECK(r.violations() == 0);
    for (auto& c : r.checks) {
        if (c.name == "quasi_estimate" || c.name == "orthogonality" || c.name == "closeness") CHECK(c.lhs < 1e-12);
    }
}

TEST_CASE("quasimode checks reject E on the boundary") {
    std::mt19937_64 rng(17);
    MatrixXd A = random_spd(4, rng, 0.3);
    FormPencil p{4, A, MatrixXd::Identity(4, 4), A};
    GeneralizedEigen e = generalized_eigen(A, p.M);
    CHECK_THROWS_AS(quasimode_suite(p, 1, e.values[1], e.values[1] + 1), ValidationError);
}

TEST_CASE("resolvent estimate for random vectors and its equality case") {
    std::mt19937_64 rng(19);
    std::normal_distribution<double> g;
    const int n = 7;
    MatrixXd A = random_spd(n, rng, 0.2), M = random_spd(n, rng, 0.5);
    GeneralizedEigen e = generalized_eigen(A, M);
    for (int trial = 0; trial < 200; ++trial) {
        VectorXd w(n);
        for (int i = 0; i < n; ++i) w[i] = g(rng);
        double E = e.values[0] - 0.5 + (e.values[n - 1] - e.values[0] + 1) * (trial + 0.5) / 200.0;
        double delta = (e.values.array() - E).abs().minCoeff();
        if (delta < 1e-6) continue;
        double res = dual_norm(A * w - E * (M * w), M);
        CHECK(std::sqrt(w.dot(M * w)) <= res / delta * (1 + 1e-10));
    }
    // An eigenvector with E shifted off its eigenvalue by less than half the gap attains equality.
    VectorXd psi = e.vectors.col(3);
    double d = 0.25 * std::min(e.values[3] - e.values[2], e.values[4] - e.values[3]);
    double E = e.values[3] + d;
    double res = dual_norm(A * psi - E * (M * psi), M);
    CHECK(res / d == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("seeded quasimode campaign has no violations") {
    auto start = std::chrono::steady_clock::now();
    CampaignReport r = quasimode_campaign(8, 1000, 42);
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    CHECK(r.applicable == 1000);
    CHECK(r.violations == 0);
    CHECK(r.worst_ratio <= 1.0 + 1e-9);
    CHECK(r.worst_ratio > 0.05);
    CHECK(secs < 10.0);
    CampaignReport again = quasimode_campaign(8, 50, 42);
    CampaignReport first50 = quasimode_campaign(8, 50, 42);
    CHECK(again.worst_ratio == first50.worst_ratio);
}

TEST_CASE("tracking a 2x2 family without crossing") {
    PencilFamily fam = [](double t) {
        MatrixXd A(2, 2);
        A << 1, t, t, 2;
        return FormPencil{2, A, MatrixXd::Identity(2, 2), std::nullopt};
    };
    std::vector<double> grid;
    for (int i = 0; i <= 20; ++i) grid.push_back(i / 20.0);
    auto br = track_branches(fam, grid);
    REQUIRE(br.size() == 2);
    for (size_t i = 0; i < br[0].t_grid.size(); ++i) {
        double t = br[0].t_grid[i];
        CHECK(br[0].values[i] == doctest::Approx((3 - std::sqrt(1 + 4 * t * t)) / 2).epsilon(1e-13));
        CHECK(br[1].values[i] == doctest::Approx((3 + std::sqrt(1 + 4 * t * t)) / 2).epsilon(1e-13));
    }
    CHECK(br[0].crossings.empty());
    CHECK(br[1].crossings.empty());
}

TEST_CASE("tracking through an exact crossing follows the analytic branches") {
    PencilFamily fam = [](double t) {
        MatrixXd A = MatrixXd::Zero(2, 2);
        A(0, 0) = 1 + t;
        A(1, 1) = 2 - t;
        return FormPencil{2, A, MatrixXd::Identity(2, 2), std::nullopt};
    };
    std::vector<double> grid;
    for (int i = 0; i <= 20; ++i) grid.push_back(i / 20.0);
    auto br = track_branches(fam, grid);
    for (size_t i = 0; i < br[0].t_grid.size(); ++i) {
        double t = br[0].t_grid[i];
        CHECK(br[0].values[i] == doctest::Approx(1 + t).epsilon(1e-14));
        CHECK(br[1].values[i] == doctest::Approx(2 - t).epsilon(1e-14));
    }
    REQUIRE(br[0].crossings.size() == 1);
    int c = br[0].crossings[0];
    CHECK(br[0].t_grid[c] <= 0.5 + 1e-12);
    CHECK(br[0].t_grid[c + 1] >= 0.5 - 1e-12);
    for (auto& b : br)
        for (double o : b.overlaps) CHECK(o >= 0.9);
}

TEST_CASE("tracking a rotating degenerate pair uses the block rotation") {
    PencilFamily fam = [](double t) {
        Eigen::Matrix3d R;
        double c = std::cos(t), s = std::sin(t);
        R << c, -s, 0, s, c, 0, 0, 0, 1;
        Eigen::Vector3d d(1.0, 1.0, 3.0 + t);
        MatrixXd A = R * d.asDiagonal() * R.transpose();
        A = (0.5 * (A + A.transpose())).eval();
        return FormPencil{3, A, MatrixXd::Identity(3, 3), std::nullopt};
    };
    std::vector<double> grid;
    for (int i = 0; i <= 10; ++i) grid.push_back(0.1 * i);
    auto br = track_branches(fam, grid);
    for (auto& b : br) {
        CHECK(b.uncertain.empty());
        for (size_t i = 0; i + 1 < b.vectors.size(); ++i) CHECK(b.vectors[i].dot(b.vectors[i + 1]) >= 0.9);
    }
}

TEST_CASE("avoided crossings are resolved by grid refinement") {
    const double gap = 1e-3;
    PencilFamily fam = [gap](double t) {
        MatrixXd A(2, 2);
        A << 1 + t, gap, gap, 2 - t;
        return FormPencil{2, A, MatrixXd::Identity(2, 2), std::nullopt};
    };
    std::vector<double> grid;
    for (int i = 0; i <= 500; ++i) grid.push_back(i / 500.0);
    auto br = track_branches(fam, grid);
    CHECK(br[0].t_grid.size() > grid.size());
    CHECK(br[0].uncertain.empty());
    for (size_t i = 0; i + 1 < br[0].vectors.size(); ++i) CHECK(br[0].vectors[i].dot(br[0].vectors[i + 1]) >= 0.9);
    // The lower branch stays the lower eigenvalue: it never swaps labels across the narrow gap.
    CHECK(br[0].crossings.empty());
    CHECK(br[0].values.back() == doctest::Approx(1.0).epsilon(1e-5));
}

TEST_CASE("variational formula: finite differences converge at second order") {
    std::mt19937_64 rng(23);
    MatrixXd A0 = random_spd(5, rng, 0.5), A1 = random_sym(5, rng), A2 = random_sym(5, rng);
    MatrixXd M0 = random_spd(5, rng, 1.0), M1 = 0.1 * random_sym(5, rng);
    PencilFamily fixedM = [=](double t) {
        return FormPencil{5, MatrixXd(A0 + t * A1 + t * t * A2), M0, std::nullopt};
    };
    PencilFamily movingM = [=](double t) {
        return FormPencil{5, MatrixXd(A0 + t * A1 + t * t * A2), MatrixXd(M0 + t * M1), std::nullopt};
    };
    for (auto* fam : {&fixedM, &movingM}) {
        for (int k = 0; k < 5; ++k) {
            auto c1 = variational_check(*fam, 0.3, k, 0.02);
            auto c2 = variational_check(*fam, 0.3, k, 0.01);
            CHECK(c1.difference < 0.05 * std::max(1.0, std::abs(c1.form_derivative)));
            double ratio = c1.difference / c2.difference;
            CHECK(ratio > 3.5);
            CHECK(ratio < 4.5);
        }
    }
}

TEST_CASE("integrability diagnostic telescopes when q = a") {
    PencilFamily fam = [](double t) {
        MatrixXd A(3, 3);
        A << 1 + t, 0.3 * t, 0, 0.3 * t, 3 + t, 0, 0, 0, 6 + 2 * t;
        return FormPencil{3, A, MatrixXd::Identity(3, 3), A};
    };
    std::vector<double> grid;
    for (int i = 1; i <= 400; ++i) grid.push_back(i / 400.0);
    IntegrabilityReport r = integrability_diagnostic(fam, 0.5, 2.5, grid);
    CHECK(r.failures.empty());
    CHECK(r.C == doctest::Approx(1.0).epsilon(1e-12));
    for (size_t i = 0; i < r.t.size(); ++i) {
        double telescoped = r.E.back() - r.E[i];
        CHECK(std::abs(r.partial_integrals[i] - telescoped) < 1e-5);
    }
}

TEST_CASE("integrability diagnostic on a family with a crossing") {
    // a_t increases with a_dot <= a/t; q_t = a_t plus a coupling of size t between modes 1 and 3.
    auto make = [](double t) {
        MatrixXd A = MatrixXd::Zero(3, 3);
        A(0, 0) = 1 + 2 * t;
        A(1, 1) = 1.2 + t;
        A(2, 2) = 2.5 + t;
        MatrixXd Q = A;
        Q(0, 2) = Q(2, 0) = 0.4 * t;
        return FormPencil{3, A, MatrixXd::Identity(3, 3), Q};
    };
    double prev_total = NAN;
    std::vector<double> gaps;
    for (double t0 : {0.1, 0.05, 0.025, 0.0125, 0.00625}) {
        std::vector<double> grid;
        const int N = 200;
        for (int i = 0; i <= N; ++i) grid.push_back(t0 * std::pow(0.3 / t0, double(i) / N));
        IntegrabilityReport r = integrability_diagnostic(make, 0.7, 1.75, grid);
        CHECK(r.failures.empty());
        CHECK(r.max_eps_over_t < 1.0);
        CHECK(std::isfinite(r.C));
        CHECK(r.C < 2.0);
        double total = r.partial_integrals.front();
        if (!std::isnan(prev_total)) gaps.push_back(std::abs(total - prev_total));
        prev_total = total;
    }
    // Cauchy: successive increments shrink as the grid reaches toward 0.
    for (size_t i = 1; i < gaps.size(); ++i) CHECK(gaps[i] < 0.6 * gaps[i - 1]);
}

TEST_CASE("integrability diagnostic reports violated hypotheses") {
    PencilFamily fam = [](double t) {
        MatrixXd A = MatrixXd::Zero(2, 2);
        A(0, 0) = 2 - t;  // decreasing
        A(1, 1) = 4;
        return FormPencil{2, A, MatrixXd::Identity(2, 2), A};
    };
    IntegrabilityReport r = integrability_diagnostic(fam, 1.0, 3.0, {0.1, 0.2, 0.3});
    CHECK_FALSE(r.monotone_ok);
    CHECK_FALSE(r.failures.empty());
}

TEST_CASE("family files interpolate linearly between blocks") {
    std::string text =
        "# two samples\n"
        "dim=2 t=0\n1,0\n0,2\n1,0\n0,1\n"
        "dim=2 t=1\n2,0\n0,1\n1,0\n0,1\n";
    PencilFamily fam = parse_family(text);
    FormPencil p = fam(0.25);
    CHECK(p.A(0, 0) == doctest::Approx(1.25));
    CHECK(p.A(1, 1) == doctest::Approx(1.75));
    CHECK_FALSE(p.Q.has_value());
    auto br = track_branches(fam, {0.0, 0.25, 0.5, 0.75, 1.0});
    CHECK(br[0].values.back() == doctest::Approx(2.0));
    REQUIRE(br[0].crossings.size() == 1);

    CHECK_THROWS_AS(parse_family("dim=2 t=0\n1,0\n0,1\n"), ValidationError);
    CHECK_THROWS_AS(parse_family("1,2\n"), ValidationError);
    CHECK_THROWS_AS(parse_family("dim=2 t=0\n1,x\n0,1\n1,0\n0,1\n"), ValidationError);
}
