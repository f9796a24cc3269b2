#include "specdegen/halfline.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include <boost/math/tools/roots.hpp>
#include <boost/numeric/odeint.hpp>

#include "specdegen/airy.hpp"
#include "specdegen/errors.hpp"
#include "specdegen/parallel.hpp"
#include "specdegen/quadrature.hpp"
#include "specdegen/tridiag.hpp"

namespace specdegen {

namespace {

namespace ode = boost::numeric::odeint;
using State = std::array<double, 2>;  // (w, t w')

void check_problem(const HalfLineProblem& p) {
    if (!(p.t > 0) || !std::isfinite(p.t)) throw ValidationError("halfline: t must be positive");
    if (!(p.mu > 0) || !std::isfinite(p.mu)) throw ValidationError("halfline: mu must be positive");
    if (!p.profile.sigma) throw ValidationError("halfline: profile missing");
    if (p.h > 0 && p.t / p.h < 20) throw ValidationError("halfline: grid too coarse, need t/h >= 20");
}

struct Grid {
    double h;
    int N;  // intervals, even
    double X;
};

Grid make_grid(double X, double h0) {
    int N = (int)std::ceil(X / h0);
    if (N % 2) ++N;
    return {X / N, N, X};
}

double threshold(const HalfLineProblem& p) { return p.mu / p.profile.sigma0; }

std::vector<double> fd_on_grid(const HalfLineProblem& p, const Grid& g, int n) {
    const double t2 = p.t * p.t, h = g.h;
    int first = p.bc == Boundary::Dirichlet ? 1 : 0;
    int m = g.N - first;  // unknowns first..N-1
    std::vector<double> diag(m), off(std::max(0, m - 1)), D(m);
    for (int r = 0; r < m; ++r) {
        int i = first + r;
        double x = i * h;
        double kd = 2 * t2 / h + p.mu * h, md = p.profile.sigma(x) * h;
        if (i == 0) {
            kd = t2 / h + p.mu * h / 2;
            md = p.profile.sigma(0.0) * h / 2;
        }
        D[r] = md;
        diag[r] = kd / md;
    }
    for (int r = 0; r + 1 < m; ++r) off[r] = -t2 / h / std::sqrt(D[r] * D[r + 1]);
    return tridiag_lowest(diag, off, n, 1e-13);
}

struct Shooter {
    const HalfLineProblem& p;
    double lambda;
    double X;

    void operator()(const State& s, State& d, double x) const {
        double f = p.mu - lambda * p.profile.sigma(x);
        d[0] = s[1] / p.t;
        d[1] = f * s[0] / p.t;
    }

    State seed() const {
        double f = p.mu - lambda * p.profile.sigma(X);
        double df = -lambda * p.profile.dsigma(X);
        if (f <= 0) throw NumericalError("halfline: truncation radius inside the allowed region");
        return {1.0, -std::sqrt(f) - p.t * df / (4 * f)};
    }

    double chunk() const { return 40.0 * p.t / std::sqrt(p.mu); }

    // Normalized boundary mismatch at x = 0.
    double mismatch() const {
        auto stepper = ode::make_controlled<ode::runge_kutta_fehlberg78<State>>(1e-14, 1e-13);
        State s = seed();
        double x = X, L = chunk();
        while (x > 0) {
            double xn = std::max(0.0, x - L);
            ode::integrate_adaptive(stepper, *this, s, x, xn, -std::min(L, x) / 8);
            x = xn;
            double nrm = std::hypot(s[0], s[1]);
            s[0] /= nrm;
            s[1] /= nrm;
        }
        return p.bc == Boundary::Dirichlet ? s[0] : s[1];
    }

    // Samples on a uniform grid of M intervals over [0, X].
    void sample(int M, std::vector<double>& w, std::vector<double>& pw) const {
        auto stepper = ode::make_controlled<ode::runge_kutta_fehlberg78<State>>(1e-14, 1e-13);
        w.assign(M + 1, 0.0);
        pw.assign(M + 1, 0.0);
        State s = seed();
        double d = X / M;
        w[M] = s[0];
        pw[M] = s[1];
        for (int j = M; j > 0; --j) {
            double x = j * d;
            ode::integrate_adaptive(stepper, *this, s, x, (j - 1) * d, -d);
            w[j - 1] = s[0];
            pw[j - 1] = s[1];
            double nrm = std::hypot(s[0], s[1]);
            if (nrm > 1e100) {
                s[0] /= nrm;
                s[1] /= nrm;
                for (int i = j - 1; i <= M; ++i) {
                    w[i] /= nrm;
                    pw[i] /= nrm;
                }
            }
        }
    }
};

double refine(const HalfLineProblem& p, double X, double lo, double hi) {
    auto f = [&](double lam) { return Shooter{p, lam, X}.mismatch(); };
    double flo = f(lo), fhi = f(hi);
    if (flo == 0) return lo;
    if (fhi == 0) return hi;
    if ((flo > 0) == (fhi > 0)) throw NumericalError("halfline: shooting bracket lost its sign change");
    boost::uintmax_t iters = 200;
    auto r = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi,
                                               [](double a, double b) { return std::abs(b - a) <= 4e-15 * std::abs(a); },
                                               iters);
    return 0.5 * (r.first + r.second);
}

Eigenpair eigenfunction(const HalfLineProblem& p, const Grid& g, int k, double lambda) {
    double sig0 = p.profile.sigma0;
    double k2 = std::max(lambda * sig0 - p.mu, p.mu);  // squared local wavenumber times t^2
    double wave = std::sqrt(k2) / p.t;
    double dmax = std::pow(4.8e-6 / k2, 0.25) / wave;
    int m = std::max(2, (int)std::ceil(g.h / dmax));
    int M = g.N * m;
    Shooter sh{p, lambda, g.X};
    std::vector<double> ws, ps;
    sh.sample(M, ws, ps);

    Eigenpair e;
    e.k = k;
    e.lambda = lambda;
    e.t = p.t;
    e.mu = p.mu;
    e.bc = p.bc;
    e.profile = p.profile;
    e.x.resize(g.N + 1);
    e.w.resize(g.N + 1);
    e.dw.resize(g.N + 1);
    std::vector<double> sw2(g.N + 1);
    for (int i = 0; i <= g.N; ++i) {
        e.x[i] = i * g.h;
        e.w[i] = ws[i * m];
        e.dw[i] = ps[i * m] / p.t;
        sw2[i] = p.profile.sigma(e.x[i]) * e.w[i] * e.w[i];
    }
    double nrm = std::sqrt(simpson(sw2, g.h));
    double supw = 0.0;
    for (int i = 0; i <= g.N; ++i) {
        e.w[i] /= nrm;
        e.dw[i] /= nrm;
        supw = std::max(supw, std::abs(e.w[i]));
    }
    // fourth-order Numerov residual on the refined samples around each interior node
    double d = g.X / M, t2 = p.t * p.t, res = 0.0;
    auto f = [&](int j) { return p.mu - lambda * p.profile.sigma(j * d); };
    for (int i = 1; i < g.N; ++i) {
        int j = i * m;
        double a = ws[j - 1] / nrm, b = ws[j] / nrm, c = ws[j + 1] / nrm;
        double r = t2 * (c - 2 * b + a) / (d * d) - (f(j + 1) * c + 10 * f(j) * b + f(j - 1) * a) / 12;
        res = std::max(res, std::abs(r));
    }
    e.residual = res / supw;
    e.bc_value = p.bc == Boundary::Dirichlet ? std::abs(e.w[0]) : std::abs(e.dw[0]);
    return e;
}

}  // namespace

std::vector<double> fd_eigenvalues(const HalfLineProblem& p, int n) {
    check_problem(p);
    double h0 = p.h > 0 ? p.h : std::min(p.t / 25, 0.01);
    double X = p.X_max > 0 ? p.X_max : p.profile.x_max;
    return fd_on_grid(p, make_grid(X, h0), n);
}

HalfLineSpectrum solve(const HalfLineProblem& prob, int k_max, bool eigenfunctions) {
    check_problem(prob);
    if (k_max < 1) throw ValidationError("halfline: k_max must be at least 1");
    HalfLineSpectrum out;
    out.requested = k_max;
    HalfLineProblem p = prob;
    double h0 = p.h > 0 ? p.h : std::min(p.t / 25, 0.01);
    double X = p.X_max > 0 ? p.X_max : p.profile.x_max;
    Grid g{};
    std::vector<double> fd;
    for (int pass = 0; pass < 8; ++pass) {
        g = make_grid(X, h0);
        fd = fd_on_grid(p, g, k_max + 1);
        if (p.X_max > 0) break;
        double Etop = fd[std::min<size_t>(k_max, fd.size()) - 1];
        double need = 3 * level_point(p.profile, p.mu, Etop, p.mu / 2) + 10 * p.t;
        if (X >= need || X >= 200.0) break;
        X = std::min(200.0, 1.1 * need);
    }
    p.X_max = g.X;
    p.h = g.h;
    out.problem = p;

    // resolvable: at least ~12 grid points per local wavelength and bracketable
    int resolved = 0;
    for (int k = 1; k <= k_max && k < (int)fd.size(); ++k) {
        double wave = std::sqrt(std::max(fd[k - 1] * p.profile.sigma0 - p.mu, 0.0)) / p.t;
        if (g.h * wave > 0.5) break;
        resolved = k;
    }
    if (resolved < k_max)
        out.warnings.push_back("only " + std::to_string(resolved) + " of " + std::to_string(k_max) +
                               " eigenvalues resolvable at this grid");
    out.resolved_count = resolved;

    const double thr = threshold(p);
    for (int k = 1; k <= resolved; ++k) {
        double lo = k == 1 ? std::max(thr, fd[0] - 0.5 * (fd[1] - fd[0])) : 0.5 * (fd[k - 2] + fd[k - 1]);
        double hi = 0.5 * (fd[k - 1] + fd[k]);
        double lam = refine(p, g.X, lo, hi);
        out.eigenvalues.push_back(lam);
        if (eigenfunctions) {
            out.pairs.push_back(eigenfunction(p, g, k, lam));
            out.residuals.push_back(out.pairs.back().residual);
        }
    }
    if (!eigenfunctions) out.residuals.assign(out.eigenvalues.size(), NAN);
    return out;
}

HalfLineSpectrum solve_below(const HalfLineProblem& prob, double lambda_max, bool eigenfunctions) {
    check_problem(prob);
    HalfLineSpectrum s;
    if (lambda_max <= threshold(prob)) {
        s.problem = prob;
        return s;
    }
    int n = 4;
    for (;;) {
        auto fd = fd_eigenvalues(prob, n);
        if (fd.back() > lambda_max * 1.05 || (int)fd.size() < n) break;
        n *= 2;
        if (n > 4096) throw ResolutionError("halfline: too many eigenvalues below lambda_max");
    }
    s = solve(prob, n, eigenfunctions);
    size_t keep = 0;
    while (keep < s.eigenvalues.size() && s.eigenvalues[keep] <= lambda_max) ++keep;
    if (keep == s.eigenvalues.size() && s.resolved_count < s.requested)
        s.warnings.push_back("eigenvalues below lambda_max may be missing (resolution limit)");
    s.eigenvalues.resize(keep);
    s.residuals.resize(keep);
    if (s.pairs.size() > keep) s.pairs.resize(keep);
    return s;
}

std::vector<HalfLineSpectrum> sweep(const HalfLineProblem& base, const std::vector<double>& t_grid, int k_max) {
    return parallel_map<HalfLineSpectrum>(t_grid.size(), [&](size_t i) {
        HalfLineProblem p = base;
        p.t = t_grid[i];
        p.h = 0;
        p.X_max = base.X_max;
        return solve(p, k_max, false);
    });
}

DecayFit decay_rate(const Eigenpair& e, double s) {
    if (!(s > 0 && s < e.mu)) throw ValidationError("decay_rate requires 0 < s < mu");
    DecayFit fit;
    fit.bound = -std::sqrt(2 * s) / e.t;
    fit.lo = level_point(e.profile, e.mu, e.lambda, s);
    fit.hi = fit.lo + 5 * e.t / std::sqrt(2 * s);
    double xend = e.x.back() - 2 * (e.x[1] - e.x[0]);
    if (fit.hi > xend) {
        fit.hi = xend;
        fit.shrunk = true;
    }
    if (fit.hi <= fit.lo) throw DomainError("decay_rate: window lies beyond the truncation radius");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (size_t i = 0; i < e.x.size(); ++i) {
        if (e.x[i] < fit.lo || e.x[i] > fit.hi) continue;
        double w2 = e.w[i] * e.w[i];
        if (!(w2 > 1e-280)) continue;
        double y = std::log(w2);
        sx += e.x[i];
        sy += y;
        sxx += e.x[i] * e.x[i];
        sxy += e.x[i] * y;
        ++n;
    }
    if (n < 3) throw DomainError("decay_rate: too few samples in the window");
    fit.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    return fit;
}

double mass_beyond(const Eigenpair& e, double x0) {
    if (x0 < 0) throw ValidationError("mass_beyond requires x0 >= 0");
    std::vector<double> w2(e.w.size());
    for (size_t i = 0; i < w2.size(); ++i) w2[i] = e.w[i] * e.w[i];
    return tail_integral(e.x, w2, x0) / simpson(w2, e.x[1] - e.x[0]);
}

double weighted_mass_beyond(const Eigenpair& e, double x0, double nu, double x_ref) {
    std::vector<double> w2(e.w.size()), ww(e.w.size());
    for (size_t i = 0; i < w2.size(); ++i) {
        w2[i] = e.w[i] * e.w[i];
        ww[i] = w2[i] * (1 + std::pow(e.x[i], nu));
    }
    return tail_integral(e.x, ww, x0) / tail_integral(e.x, w2, x_ref);
}

double nonconcentration_kappa(const Eigenpair& e, double E) {
    std::vector<double> num(e.w.size()), den(e.w.size());
    for (size_t i = 0; i < num.size(); ++i) {
        double s = e.profile.sigma(e.x[i]), w2 = e.w[i] * e.w[i];
        num[i] = (E * s - e.mu) * w2;
        den[i] = s * w2;
    }
    double h = e.x[1] - e.x[0];
    return simpson(num, h) / simpson(den, h);
}

LcResidual lc_residual(const Eigenpair& e, double E) {
    double wmax = 0.0;
    for (double v : e.w) wmax = std::max(wmax, std::abs(v));
    if (wmax == 0.0) throw ValidationError("lc_residual: empty eigenfunction");
    LangerCherryMap map(e.profile, e.mu, E);
    std::vector<double> d2(e.w.size());
    for (size_t i = 0; i < d2.size(); ++i)
        d2[i] = (e.mu - e.lambda * e.profile.sigma(e.x[i])) * e.w[i] / (e.t * e.t);
    double y0 = map.phi(e.x.front()), y1 = map.phi(e.x.back());
    double hy = std::min(e.x[1] - e.x[0], std::pow(e.t, 4.0 / 3.0) / 40);
    int ny = (int)std::ceil((y1 - y0) / hy) + 1;
    Transformed T = transform(map, e.x, e.w, e.dw, d2, ny);
    hy = T.y[1] - T.y[0];
    double acc = 0.0, t2 = e.t * e.t;
    for (int j = 1; j + 1 < ny; ++j) {
        double g = t2 * (T.W[j + 1] - 2 * T.W[j] + T.W[j - 1]) / (hy * hy) - T.y[j] * T.W[j];
        acc += g * g * hy;
    }
    std::vector<double> w2(e.w.size());
    for (size_t i = 0; i < w2.size(); ++i) w2[i] = e.w[i] * e.w[i];
    return {acc / simpson(w2, e.x[1] - e.x[0]), T.undersampled, ny};
}

double airy_predicted_eigenvalue(const HalfLineProblem& p, int k) {
    check_problem(p);
    double a = airy_zeros(k, p.bc).back();
    double target = std::pow(p.t, 2.0 / 3.0) * a;
    double thr = threshold(p);
    auto g = [&](double E) { return LangerCherryMap(p.profile, p.mu, E).phi(0.0) - target; };
    double lo = thr, hi = thr * 1.01, ghi = g(hi);
    while (ghi > 0) {
        lo = hi;
        hi = thr + 2 * (hi - thr);
        ghi = g(hi);
        if (hi > 1e6 * thr) throw DomainError("airy prediction: no energy reaches the Airy zero");
    }
    double glo = g(lo);
    boost::uintmax_t iters = 200;
    auto r = boost::math::tools::toms748_solve(g, lo, hi, glo, ghi,
                                               [](double x, double y) { return std::abs(y - x) <= 1e-14 * std::abs(x); },
                                               iters);
    return 0.5 * (r.first + r.second);
}

AiryCheck airy_eigenvalue_check(const HalfLineProblem& p, int k) {
    auto s = solve(p, k, false);
    if ((int)s.eigenvalues.size() < k) throw ResolutionError("airy check: eigenvalue not resolved");
    AiryCheck c;
    c.lambda = s.eigenvalues[k - 1];
    c.phi_at_zero = LangerCherryMap(p.profile, p.mu, c.lambda).phi(0.0);
    double scale = std::pow(p.t, 2.0 / 3.0);
    auto zeros = airy_zeros(k + 5, p.bc);
    c.airy_pred = scale * zeros[k - 1];
    c.defect = std::abs(c.phi_at_zero - c.airy_pred);
    c.nearest_distance = INFINITY;
    for (int j = 0; j < (int)zeros.size(); ++j) {
        double d = std::abs(c.phi_at_zero - scale * zeros[j]);
        if (d < c.nearest_distance) {
            c.nearest_distance = d;
            c.nearest_index = j + 1;
        }
    }
    return c;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    size_t n = x.size();
    if (n < 2 || y.size() != n) throw ValidationError("loglog_slope needs at least two points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < n; ++i) {
        double a = std::log(x[i]), b = std::log(y[i]);
        sx += a;
        sy += b;
        sxx += a * a;
        sxy += a * b;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

SeparationReport superseparation(const HalfLineProblem& base, const std::vector<double>& t_grid, int k) {
    if (k < 1) throw ValidationError("superseparation: k must be at least 1");
    for (size_t i = 1; i < t_grid.size(); ++i)
        if (!(t_grid[i] < t_grid[i - 1])) throw ValidationError("superseparation: t_grid must be decreasing");
    SeparationReport rep;
    auto rows = parallel_map<SeparationRow>(t_grid.size(), [&](size_t i) {
        HalfLineProblem p = base;
        p.t = t_grid[i];
        p.h = 0;
        SeparationRow r;
        r.t = p.t;
        auto s = solve(p, k + 1, false);
        if ((int)s.eigenvalues.size() < k + 1) {
            r.gap = NAN;
            return r;
        }
        r.lambda_k = s.eigenvalues[k - 1];
        r.lambda_k1 = s.eigenvalues[k];
        r.gap = r.lambda_k1 - r.lambda_k;
        r.gap_over_t = r.gap / r.t;
        r.predicted_gap = airy_predicted_eigenvalue(p, k + 1) - airy_predicted_eigenvalue(p, k);
        return r;
    });
    for (auto& r : rows) {
        if (std::isnan(r.gap)) {
            rep.warnings.push_back("t = " + std::to_string(r.t) + " dropped: eigenvalues unresolved");
            continue;
        }
        rep.rows.push_back(r);
    }
    if (rep.rows.size() >= 2) {
        std::vector<double> ts, gs;
        for (auto& r : rep.rows) {
            ts.push_back(r.t);
            gs.push_back(r.gap);
        }
        rep.slope_fit = loglog_slope(ts, gs);
        size_t n = ts.size();
        rep.slope_local = loglog_slope({ts[n - 2], ts[n - 1]}, {gs[n - 2], gs[n - 1]});
    }
    return rep;
}

}  // namespace specdegen
