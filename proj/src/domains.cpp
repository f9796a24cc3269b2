#include "specdegen/domains.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <memory>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>
#include <boost/numeric/odeint.hpp>
#include <Eigen/SparseCore>

#include "specdegen/bessel.hpp"
#include "specdegen/errors.hpp"
#include "specdegen/expr.hpp"
#include "specdegen/halfline.hpp"
#include "specdegen/lanczos.hpp"
#include "specdegen/parallel.hpp"

namespace specdegen {

namespace {

constexpr double pi = std::numbers::pi;
namespace ode = boost::numeric::odeint;

void check_stretch(const StretchSpec& s) {
    if (!s.rho || !s.drho || !s.d2rho) fail_validation("stretch: rho and its derivatives are required");
    if (!(s.c > 0) || !std::isfinite(s.c)) fail_validation("stretch: c must be positive");
    if (std::abs(s.rho(0.0)) > 1e-14) fail_validation("stretch: rho(0) must vanish");
    const int n = 400;
    for (int k = 0; k <= n; ++k) {
        double x = s.c * k / n;
        double d = s.drho(x);
        if (!(d > 0) || !std::isfinite(d)) fail_validation("stretch: rho' must be positive on [0, c] (x = " + std::to_string(x) + ")");
        if (k > 0 && !(s.rho(x) > 0)) fail_validation("stretch: rho must be positive on (0, c]");
    }
}

// ln x(s) on a uniform s-grid with first and second derivatives, evaluated by quintic Hermite.
struct StretchTable {
    StretchSpec spec;
    double ds = 0.02;
    std::vector<double> y, dy, d2y;

    void derivs(double yv, double& d1, double& d2) const {
        double x = std::exp(yv);
        double r = spec.rho(x), rp = spec.drho(x);
        d1 = -r / x;
        d2 = (rp * x - r) * r / (x * x);
    }

    double ln_x(double s) const {
        double last = ds * (y.size() - 1);
        if (s >= last) return y.back() + dy.back() * (s - last);
        if (s <= 0) return y[0];
        size_t i = std::min<size_t>(static_cast<size_t>(s / ds), y.size() - 2);
        double h = ds, u = (s - i * ds) / h;
        double u2 = u * u, u3 = u2 * u, u4 = u3 * u, u5 = u4 * u;
        double h00 = 1 - 10 * u3 + 15 * u4 - 6 * u5, h01 = 10 * u3 - 15 * u4 + 6 * u5;
        double h10 = u - 6 * u3 + 8 * u4 - 3 * u5, h11 = -4 * u3 + 7 * u4 - 3 * u5;
        double h20 = 0.5 * (u2 - 3 * u3 + 3 * u4 - u5), h21 = 0.5 * (u3 - 2 * u4 + u5);
        return h00 * y[i] + h01 * y[i + 1] + h * (h10 * dy[i] + h11 * dy[i + 1]) +
               h * h * (h20 * d2y[i] + h21 * d2y[i + 1]);
    }
};

}  // namespace

StretchSpec stretch_from_expression(const std::string& rho, double c) {
    Expr e = Expr::parse(rho);
    Expr d = e.derivative();
    Expr d2 = d.derivative();
    StretchSpec s;
    s.name = rho;
    s.rho = [e](double x) { return e(x); };
    s.drho = [d](double x) { return d(x); };
    s.d2rho = [d2](double x) { return d2(x); };
    s.c = c;
    check_stretch(s);
    return s;
}

double stretch_psi(const StretchSpec& s, double x) {
    if (!(x > 0) || x > s.c) fail_validation("stretch: psi needs 0 < x <= c");
    if (x == s.c) return 0.0;
    // Split at geometric points so the 1/rho singularity near 0 stays resolved.
    double total = 0.0, a = x;
    while (a < s.c) {
        double b = std::min(s.c, std::max(2 * a, a + 1e-300));
        total += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
            [&](double r) { return 1.0 / s.rho(r); }, a, b, 10, 1e-14);
        a = b;
    }
    return total;
}

WeightProfile stretch_sigma(const StretchSpec& spec, double s_max) {
    check_stretch(spec);
    if (!(s_max > 0)) fail_validation("stretch: s_max must be positive");
    auto tab = std::make_shared<StretchTable>();
    tab->spec = spec;
    const int n = static_cast<int>(std::ceil(s_max / tab->ds));
    std::vector<double> times(n + 1);
    for (int i = 0; i <= n; ++i) times[i] = i * tab->ds;
    using State = std::array<double, 1>;
    // ln x = ln c - a s + z(s) with a = rho'(0); z stays bounded, so rounding does not pile up in ln x.
    const double a = spec.drho(0.0), lc = std::log(spec.c);
    State st{0.0};
    auto rhs = [&](const State& v, State& dv, double s) {
        double d1, d2;
        tab->derivs(lc - a * s + v[0], d1, d2);
        dv[0] = d1 + a;
    };
    auto stepper = ode::make_controlled<ode::runge_kutta_fehlberg78<State>>(1e-15, 1e-15);
    tab->y.reserve(n + 1);
    ode::integrate_times(stepper, rhs, st, times.begin(), times.end(), tab->ds / 4,
                         [&](const State& v, double s) { tab->y.push_back(lc - a * s + v[0]); });
    for (double yv : tab->y) {
        double d1, d2;
        tab->derivs(yv, d1, d2);
        tab->dy.push_back(d1);
        tab->d2y.push_back(d2);
    }

    WeightProfile p;
    p.name = "stretch:" + spec.name;
    p.sigma = [tab](double s) {
        double r = tab->spec.rho(std::exp(tab->ln_x(s)));
        return r * r;
    };
    p.dsigma = [tab](double s) {
        double x = std::exp(tab->ln_x(s));
        double r = tab->spec.rho(x);
        return -2 * r * r * tab->spec.drho(x);
    };
    p.d2sigma = [tab](double s) {
        double x = std::exp(tab->ln_x(s));
        double r = tab->spec.rho(x), rp = tab->spec.drho(x), rpp = tab->spec.d2rho(x);
        return 4 * r * r * rp * rp + 2 * r * r * r * rpp;
    };
    p.tail_rate = 2 * spec.drho(0.0);
    return finalize_profile(std::move(p));
}

double TriangleMesh::min_area() const {
    double m = INFINITY;
    for (auto& e : elements) {
        double a = 0.5 * std::abs((x[e[1]] - x[e[0]]) * (y[e[2]] - y[e[0]]) - (x[e[2]] - x[e[0]]) * (y[e[1]] - y[e[0]]));
        m = std::min(m, a);
    }
    return m;
}

double TriangleMesh::quality_ratio() const {
    double lo = INFINITY, hi = 0;
    for (auto& e : elements) {
        double d = 0;
        for (int a = 0; a < 3; ++a) {
            int p = e[a], q = e[(a + 1) % 3];
            d = std::max(d, std::hypot(x[p] - x[q], y[p] - y[q]));
        }
        lo = std::min(lo, d);
        hi = std::max(hi, d);
    }
    return hi / lo;
}

TriangleMesh triangle_mesh(double t, int N) {
    if (!(t > 0) || !(t <= 1)) fail_validation("triangle: t must lie in (0, 1]");
    if (N < 1 || N > 20000) fail_validation("triangle: N out of range");
    TriangleMesh m;
    m.t = t;
    m.N = N;
    // Node (i, j) with 0 <= j <= i sits at row offset i (i + 1) / 2.
    auto id = [](int i, int j) { return i * (i + 1) / 2 + j; };
    for (int i = 0; i <= N; ++i)
        for (int j = 0; j <= i; ++j) {
            m.x.push_back(double(i) / N);
            m.y.push_back(t * double(j) / N);
            m.boundary.push_back(j == 0 || j == i || i == N);
        }
    for (int i = 0; i < N; ++i)
        for (int j = 0; j <= i; ++j) {
            m.elements.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
            if (j < i) m.elements.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
        }
    return m;
}

void write_mesh(const TriangleMesh& m, const std::string& vertex_csv, const std::string& element_csv) {
    std::ofstream v(vertex_csv), e(element_csv);
    if (!v || !e) fail_validation("cannot open mesh output files");
    v << std::setprecision(17) << "id,x,y,boundary\n";
    for (size_t i = 0; i < m.x.size(); ++i) v << i << ',' << m.x[i] << ',' << m.y[i] << ',' << int(m.boundary[i]) << '\n';
    e << "id,v0,v1,v2\n";
    for (size_t i = 0; i < m.elements.size(); ++i)
        e << i << ',' << m.elements[i][0] << ',' << m.elements[i][1] << ',' << m.elements[i][2] << '\n';
}

std::vector<double> triangle_fem_eigenvalues(const TriangleMesh& m, int n) {
    std::vector<int> dof(m.x.size(), -1);
    int nd = 0;
    for (size_t i = 0; i < m.x.size(); ++i)
        if (!m.boundary[i]) dof[i] = nd++;
    if (nd < n) throw ResolutionError("triangle: mesh has fewer interior nodes than requested eigenvalues");
    std::vector<Eigen::Triplet<double>> kt, mt;
    kt.reserve(m.elements.size() * 9);
    mt.reserve(m.elements.size() * 9);
    for (auto& e : m.elements) {
        double x0 = m.x[e[0]], y0 = m.y[e[0]];
        double x1 = m.x[e[1]], y1 = m.y[e[1]];
        double x2 = m.x[e[2]], y2 = m.y[e[2]];
        double det = (x1 - x0) * (y2 - y0) - (x2 - x0) * (y1 - y0);
        double area = 0.5 * std::abs(det);
        // Barycentric gradients.
        double gx[3] = {(y1 - y2) / det, (y2 - y0) / det, (y0 - y1) / det};
        double gy[3] = {(x2 - x1) / det, (x0 - x2) / det, (x1 - x0) / det};
        for (int a = 0; a < 3; ++a) {
            int ra = dof[e[a]];
            if (ra < 0) continue;
            for (int b = 0; b < 3; ++b) {
                int rb = dof[e[b]];
                if (rb < 0) continue;
                kt.emplace_back(ra, rb, area * (gx[a] * gx[b] + gy[a] * gy[b]));
                mt.emplace_back(ra, rb, area / 12.0 * (a == b ? 2.0 : 1.0));
            }
        }
    }
    SparseMatrix K(nd, nd), M(nd, nd);
    K.setFromTriplets(kt.begin(), kt.end());
    M.setFromTriplets(mt.begin(), mt.end());
    // Every vertical section has height at most t, so pi^2 / t^2 lies below the spectrum.
    double shift = pi * pi / (m.t * m.t);
    return shift_invert_lanczos(K, M, n, shift).values;
}

TriangleSpectrum triangle_spectrum(double t, int n, double h) {
    if (!(t > 0) || !(t <= 1)) fail_validation("triangle: t must lie in (0, 1]");
    if (n < 1) fail_validation("triangle: n must be positive");
    if (!(h > 0)) fail_validation("triangle: h must be positive");
    int N = static_cast<int>(std::ceil(1.0 / h - 1e-9));
    if (N < 8)
        throw ResolutionError("triangle: need at least 8 elements across the height; use h <= 0.125");
    if (4 * N > 4000) fail_validation("triangle: h too small (finest mesh would exceed 4000 divisions)");
    TriangleSpectrum r;
    r.t = t;
    r.n = n;
    r.h = 1.0 / N;
    std::vector<int> levels{N, 2 * N, 4 * N};
    auto vals = parallel_map<std::vector<double>>(3, [&](size_t i) {
        return triangle_fem_eigenvalues(triangle_mesh(t, levels[i]), n);
    });
    r.lambda_h = vals[0];
    r.lambda_h2 = vals[1];
    r.lambda_h4 = vals[2];
    r.nodes_finest = (4 * N + 1) * (4 * N + 2) / 2;
    for (int k = 0; k < n; ++k) {
        double r1 = (4 * vals[1][k] - vals[0][k]) / 3;
        double r2 = (4 * vals[2][k] - vals[1][k]) / 3;
        double ex = (16 * r2 - r1) / 15;
        r.lambda_extrap.push_back(ex);
        r.error_estimate.push_back(std::abs(r2 - r1) / 15);
        r.renormalized.push_back(t * t * ex);
    }
    return r;
}

SectorSpectrum sector_spectrum(double t, int n) {
    if (!(t > 0) || !(t <= 1)) fail_validation("sector: t must lie in (0, 1]");
    if (n < 1 || n > 10000) fail_validation("sector: n out of range");
    SectorSpectrum r;
    r.t = t;
    r.angle = std::atan(t);
    std::vector<LabeledEntry> all;
    double nth = INFINITY;
    for (int l = 1;; ++l) {
        double nu = l * pi / r.angle;
        if (nu * nu >= nth) break;
        if (nu > 1e5) {
            r.notices.push_back("truncated at l = " + std::to_string(l) + ": Bessel order beyond 1e5");
            break;
        }
        auto z = bessel_zeros(nu, n, Boundary::Dirichlet);
        for (int k = 0; k < n; ++k) all.push_back({z[k] * z[k], l, k + 1});
        std::sort(all.begin(), all.end(), [](auto& a, auto& b) { return a.lambda < b.lambda; });
        if (static_cast<int>(all.size()) >= n) {
            all.resize(n);
            nth = all.back().lambda;
        }
    }
    r.spectrum.t = t;
    r.spectrum.entries = all;
    r.spectrum.lambda_max = all.empty() ? 0.0 : all.back().lambda;
    for (auto& e : all) r.renormalized.push_back(t * t * e.lambda);
    return r;
}

CompareResult compare_spectra(const std::vector<double>& s1, const std::vector<double>& s2, int n) {
    if (n < 1) fail_validation("compare: n must be positive");
    if (static_cast<int>(s1.size()) < n || static_cast<int>(s2.size()) < n)
        fail_validation("compare: both spectra need at least n values");
    CompareResult r;
    for (int k = 0; k < n; ++k) r.matched_diffs.push_back(std::abs(s1[k] - s2[k]));
    auto one_sided = [n](const std::vector<double>& a, const std::vector<double>& b) {
        double worst = 0;
        for (int i = 0; i < n; ++i) {
            double best = INFINITY;
            for (int j = 0; j < n; ++j) best = std::min(best, std::abs(a[i] - b[j]));
            worst = std::max(worst, best);
        }
        return worst;
    };
    r.hausdorff = std::max(one_sided(s1, s2), one_sided(s2, s1));
    return r;
}

KeystoneCheck keystone_check(double t, int k_max) {
    if (!(t > 0) || !(t <= 1)) fail_validation("keystone: t must lie in (0, 1]");
    if (k_max < 1) fail_validation("keystone: k_max must be positive");
    KeystoneCheck r;
    r.t = t;
    r.calibration_predicted = t / std::atan(t);
    double nu = pi / std::atan(t);
    auto z = bessel_zeros(nu, k_max, Boundary::Dirichlet);
    for (double j : z) r.sector_renormalized.push_back(t * t * j * j);

    HalfLineProblem p;
    p.t = t;
    p.profile = stretch_sigma(stretch_from_expression("x", 1.0));
    p.mu = std::pow(pi * r.calibration_predicted, 2);
    auto s = solve(p, k_max, false);
    r.halfline = s.eigenvalues;
    for (int k = 0; k < k_max && k < static_cast<int>(r.halfline.size()); ++k)
        r.max_rel_diff = std::max(r.max_rel_diff, std::abs(r.halfline[k] - r.sector_renormalized[k]) / r.sector_renormalized[k]);

    auto lowest = [&](double c) {
        HalfLineProblem q = p;
        q.mu = std::pow(pi * c, 2);
        return solve(q, 1, false).eigenvalues.at(0) - r.sector_renormalized[0];
    };
    double lo = 0.9 * r.calibration_predicted, hi = 1.1 * r.calibration_predicted;
    std::uintmax_t iters = 40;
    auto tol = [](double a, double b) { return std::abs(b - a) <= 1e-11 * std::abs(a); };
    auto [a, b] = boost::math::tools::toms748_solve(lowest, lo, hi, tol, iters);
    r.calibration = 0.5 * (a + b);
    return r;
}

}  // namespace specdegen
