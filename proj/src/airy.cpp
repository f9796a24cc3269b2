#include "specdegen/airy.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <mutex>
#include <numbers>
#include <shared_mutex>
#include <string>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "specdegen/errors.hpp"

namespace specdegen {

namespace {

using wide = __float128;

// Ai(0), -Ai'(0), sqrt(3), sqrt(pi) to quad precision.
const wide c1 = 0.355028053887817239260063186004183176397979174199177Q;
const wide c2 = 0.258819403792806798405183560189203963479091138354934Q;
const wide sqrt3 = 1.732050807568877293527446341505872366942805253810381Q;
const wide sqrtpi = 1.772453850905516027298167483341145182797549456122387Q;

wide wabs(wide x) { return x < 0 ? -x : x; }

constexpr double pi = std::numbers::pi;

constexpr int n_asym = 40;

struct AsymCoeffs {
    std::array<double, n_asym> u{}, v{};
    AsymCoeffs() {
        u[0] = 1.0;
        v[0] = 1.0;
        for (int k = 1; k < n_asym; ++k) {
            u[k] = u[k - 1] * (6.0 * k - 5) * (6.0 * k - 3) * (6.0 * k - 1) / ((2.0 * k - 1) * 216.0 * k);
            v[k] = -(6.0 * k + 1) / (6.0 * k - 1) * u[k];
        }
    }
};

const AsymCoeffs& coeffs() {
    static const AsymCoeffs c;
    return c;
}

// Terms c_k / zeta^k up to (not including) the first one that stops decreasing.
int asym_terms(const std::array<double, n_asym>& c, double zeta, std::array<double, n_asym>& out) {
    double p = 1.0, prev = INFINITY;
    int m = 0;
    for (int k = 0; k < n_asym; ++k) {
        double term = c[k] * p;
        if (k > 1 && std::abs(term) >= prev) break;
        out[m++] = term;
        prev = std::abs(term);
        if (prev < 1e-18) break;
        p /= zeta;
    }
    return m;
}

// sum (s)^k t_k
double alt_sum(const std::array<double, n_asym>& t, int m, double s) {
    double sum = 0.0, sg = 1.0;
    for (int k = 0; k < m; ++k, sg *= s) sum += sg * t[k];
    return sum;
}

// Even and odd parts with alternating signs: P = t0 - t2 + t4 ..., Q = t1 - t3 + ...
void pq_sums(const std::array<double, n_asym>& t, int m, double& P, double& Q) {
    P = Q = 0.0;
    for (int k = 0; k < m; ++k) {
        double sg = ((k / 2) % 2 == 0) ? 1.0 : -1.0;
        if (k % 2 == 0)
            P += sg * t[k];
        else
            Q += sg * t[k];
    }
}

AiryValues series_impl(double ud) {
    wide u = ud, u3 = u * u * u;
    wide f = 1, fk = 1, g = u, gk = u;
    wide fpk = u * u / 2, fp = fpk, gpk = 1, gp = 1;
    for (int k = 1; k < 400; ++k) {
        fk *= u3 / ((3 * k - 1) * (3 * k));
        gk *= u3 / ((3 * k) * (3 * k + 1));
        f += fk;
        g += gk;
        if (k >= 2) {
            fpk *= u3 / ((3 * k - 3) * (3 * k - 1));
            fp += fpk;
        }
        gpk *= u3 / ((3 * k - 2) * (3 * k));
        gp += gpk;
        wide scale = wabs(f) + wabs(g) + wabs(fp) + wabs(gp);
        wide last = wabs(fk) + wabs(gk) + wabs(fpk) + wabs(gpk);
        if (k > 3 && last < 1e-36Q * scale) break;
    }
    AiryValues r;
    r.am = (double)(sqrtpi * (c1 * f - c2 * g));
    r.dam = (double)(sqrtpi * (c1 * fp - c2 * gp));
    r.ap = (double)(sqrtpi * sqrt3 * (c1 * f + c2 * g));
    r.dap = (double)(sqrtpi * sqrt3 * (c1 * fp + c2 * gp));
    return r;
}

AiryValues asymptotic_impl(double u) {
    const auto& c = coeffs();
    std::array<double, n_asym> tu{}, tv{};
    AiryValues r;
    if (u > 0) {
        double q = std::sqrt(std::sqrt(u));
        double zeta = 2.0 / 3.0 * u * std::sqrt(u);
        int mu = asym_terms(c.u, zeta, tu), mv = asym_terms(c.v, zeta, tv);
        double em = std::exp(-zeta);
        r.am = em / (2 * q) * alt_sum(tu, mu, -1.0);
        r.dam = -q * em / 2 * alt_sum(tv, mv, -1.0);
        if (zeta > 700.0) {
            r.ap = r.dap = INFINITY;
        } else {
            double ep = std::exp(zeta);
            r.ap = ep / q * alt_sum(tu, mu, 1.0);
            r.dap = q * ep * alt_sum(tv, mv, 1.0);
        }
        return r;
    }
    double z = -u;
    double q = std::sqrt(std::sqrt(z));
    double zeta = 2.0 / 3.0 * z * std::sqrt(z);
    int mu = asym_terms(c.u, zeta, tu), mv = asym_terms(c.v, zeta, tv);
    double pu, qu, pv, qv;
    pq_sums(tu, mu, pu, qu);
    pq_sums(tv, mv, pv, qv);
    // cos and sin of zeta - pi/4 without losing the reduction for large zeta
    double cz = std::cos(zeta), sz = std::sin(zeta);
    double cs = (cz + sz) / std::numbers::sqrt2, sn = (sz - cz) / std::numbers::sqrt2;
    r.am = (cs * pu + sn * qu) / q;
    r.dam = q * (sn * pv - cs * qv);
    r.ap = (-sn * pu + cs * qu) / q;
    r.dap = q * (cs * pv + sn * qv);
    return r;
}

AiryValues eval_unchecked(double u) {
    return std::abs(u) <= airy_switch ? series_impl(u) : asymptotic_impl(u);
}

// ---- zeros ----

double zero_seed(int k, Boundary kind) {
    if (kind == Boundary::Dirichlet) {
        double t = 3.0 * pi / 8.0 * (4.0 * k - 1);
        double t2 = 1.0 / (t * t);
        return -std::cbrt(t * t) * (1 + t2 * (5.0 / 48 + t2 * (-5.0 / 36 + t2 * 77125.0 / 82944)));
    }
    double t = 3.0 * pi / 8.0 * (4.0 * k - 3);
    double t2 = 1.0 / (t * t);
    return -std::cbrt(t * t) * (1 + t2 * (-7.0 / 48 + t2 * (35.0 / 288 - t2 * 181223.0 / 207360)));
}

double zero_target(double u, Boundary kind) {
    double a, da;
    airy_minus(u, a, da);
    return kind == Boundary::Dirichlet ? a : da;
}

double find_zero(int k, Boundary kind) {
    double s = zero_seed(k, kind);
    double spacing = pi / std::sqrt(std::max(1.0, std::abs(s)));
    double lo = s - 0.3 * spacing, hi = std::min(s + 0.3 * spacing, 0.0);
    double flo = zero_target(lo, kind), fhi = zero_target(hi, kind);
    for (int i = 0; i < 20 && flo * fhi > 0; ++i) {
        lo -= 0.1 * spacing;
        hi = std::min(hi + 0.1 * spacing, 0.0);
        flo = zero_target(lo, kind);
        fhi = zero_target(hi, kind);
    }
    if (flo * fhi > 0) throw NumericalError("airy zero bracket failed at index " + std::to_string(k));
    double tol = 1e-13 * std::max(1.0, std::abs(s));
    while (hi - lo > tol) {
        double mid = 0.5 * (lo + hi);
        double fm = zero_target(mid, kind);
        if (fm == 0) return mid;
        if ((fm < 0) == (flo < 0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

struct ZeroCache {
    std::shared_mutex mu;
    std::vector<double> table[2];
};

ZeroCache& zero_cache() {
    static ZeroCache c;
    return c;
}

// ---- kernel ----

// Piecewise kernel value from precomputed A+-; v_neg selects the v < 0 branch at v == 0.
inline double kernel_case(double u, double v, bool v_neg, double amu, double apu, double amv, double apv) {
    double val;
    if (!v_neg) {
        val = (u <= v) ? apu * amv : amu * apv;
    } else {
        val = (u <= v) ? apu * amv - amu * apv : 0.0;
    }
    return val / airy_wronskian;
}

double gauss_interp(const std::vector<double>& y, const std::vector<double>& g, double x) {
    // cubic Lagrange through the four nodes nearest x
    int n = (int)y.size();
    double h = y[1] - y[0];
    int i = (int)std::floor((x - y[0]) / h) - 1;
    i = std::clamp(i, 0, std::max(0, n - 4));
    int m = std::min(4, n);
    double s = 0.0;
    for (int a = 0; a < m; ++a) {
        double l = 1.0;
        for (int b = 0; b < m; ++b)
            if (b != a) l *= (x - y[i + b]) / (y[i + a] - y[i + b]);
        s += l * g[i + a];
    }
    return s;
}

}  // namespace

AiryValues airy_series(double u) { return series_impl(u); }
AiryValues airy_asymptotic(double u) {
    if (u == 0) throw ValidationError("asymptotic branch undefined at u = 0");
    return asymptotic_impl(u);
}

AiryValues airy_eval(double u) {
    if (!std::isfinite(u) || std::abs(u) > 200.0)
        throw ValidationError("airy_eval requires |u| <= 200, got " + std::to_string(u));
    AiryValues r = eval_unchecked(u);
    if (!std::isfinite(r.ap) || !std::isfinite(r.dap))
        throw OverflowError("A+ exceeds the double range at u = " + std::to_string(u));
    return r;
}

void airy_minus(double u, double& am, double& dam) {
    if (std::abs(u) <= airy_switch) {
        AiryValues r = series_impl(u);
        am = r.am;
        dam = r.dam;
        return;
    }
    AiryValues r = asymptotic_impl(u);
    am = r.am;
    dam = r.dam;
}

std::vector<double> airy_zeros(int n, Boundary kind) {
    if (n < 1) throw ValidationError("airy_zeros requires n >= 1");
    if (n > 10000) throw ValidationError("airy_zeros supports n <= 10000");
    auto& cache = zero_cache();
    auto& tab = cache.table[kind == Boundary::Dirichlet ? 0 : 1];
    {
        std::shared_lock lock(cache.mu);
        if ((int)tab.size() >= n) return {tab.begin(), tab.begin() + n};
    }
    std::vector<double> fresh;
    {
        std::shared_lock lock(cache.mu);
        fresh = tab;
    }
    for (int k = (int)fresh.size() + 1; k <= n; ++k) fresh.push_back(find_zero(k, kind));
    std::unique_lock lock(cache.mu);
    if (fresh.size() > tab.size()) tab = fresh;
    return {tab.begin(), tab.begin() + n};
}

std::vector<double> model_operator_eigs(double z, Boundary kind, int n) {
    auto zeros = airy_zeros(n, kind);
    std::vector<double> out(n);
    for (int k = 0; k < n; ++k) out[k] = z - zeros[k];
    return out;
}

double airy_kernel(double u, double v) {
    AiryValues a = eval_unchecked(u), b = eval_unchecked(v);
    return kernel_case(u, v, v < 0, a.am, a.ap, b.am, b.ap);
}

KernelSolution kernel_solve(const std::vector<double>& y, const std::vector<double>& g, double t, double tol) {
    const int n = (int)y.size();
    if (n < 5 || (int)g.size() != n) throw ValidationError("kernel_solve needs matching grids of at least 5 nodes");
    if (!(t > 0)) throw ValidationError("kernel_solve requires t > 0");
    if (!(y.front() < 0 && y.back() > 0)) throw ValidationError("kernel_solve requires a < 0 < b");
    const double h = (y.back() - y.front()) / (n - 1);
    for (int i = 1; i < n; ++i)
        if (std::abs(y[i] - y[i - 1] - h) > 1e-9 * h) throw ValidationError("kernel_solve requires a uniform grid");
    int i0 = (int)std::lround(-y.front() / h);
    if (std::abs(y[i0]) > 1e-9 * h) throw ValidationError("kernel_solve requires 0 to be a grid node");

    const double s = std::pow(t, -2.0 / 3.0);
    const double pref = std::pow(t, -4.0 / 3.0);
    std::vector<double> u(n), am(n), ap(n);
    for (int i = 0; i < n; ++i) {
        u[i] = s * y[i];
        AiryValues a = eval_unchecked(u[i]);
        if (!std::isfinite(a.ap)) throw OverflowError("kernel_solve: A+ overflows on the grid");
        am[i] = a.am;
        ap[i] = a.ap;
    }

    const double gx = 1.0 / std::sqrt(3.0);
    std::vector<double> W(n, 0.0), wts;
    for (int i = 0; i < n; ++i) {
        int b1 = std::min(i, i0), b2 = std::max(i, i0);
        int cuts[4] = {0, b1, b2, n - 1};
        double acc = 0.0;
        for (int seg = 0; seg < 3; ++seg) {
            int p = cuts[seg], q = cuts[seg + 1];
            if (q <= p) continue;
            // v on the segment is negative except at its right end when q == i0
            bool neg = q <= i0;
            auto K = [&](int j) { return kernel_case(u[i], u[j], neg && y[j] <= 0, am[i], ap[i], am[j], ap[j]); };
            int m = q - p;
            if (m == 1) {
                for (double xi : {-gx, gx}) {
                    double z = 0.5 * (y[p] + y[q]) + 0.5 * h * xi;
                    AiryValues b = eval_unchecked(s * z);
                    double kv = kernel_case(u[i], s * z, neg, am[i], ap[i], b.am, b.ap);
                    acc += 0.5 * h * kv * gauss_interp(y, g, z);
                }
                continue;
            }
            int even_end = (m % 2 == 0) ? q : q - 3;
            for (int j = p; j < even_end; j += 2)
                acc += h / 3.0 * (K(j) * g[j] + 4.0 * K(j + 1) * g[j + 1] + K(j + 2) * g[j + 2]);
            if (even_end != q) {
                int j = even_end;
                acc += 3.0 * h / 8.0 *
                       (K(j) * g[j] + 3.0 * K(j + 1) * g[j + 1] + 3.0 * K(j + 2) * g[j + 2] + K(j + 3) * g[j + 3]);
            }
        }
        W[i] = pref * acc;
    }

    double res = 0.0;
    for (int i = 1; i + 1 < n; ++i) {
        double r = t * t * (W[i + 1] - 2 * W[i] + W[i - 1]) / (h * h) - y[i] * W[i] - g[i];
        res = std::max(res, std::abs(r));
    }
    if (!(res <= tol))
        throw ResolutionError("kernel_solve residual " + std::to_string(res) + " exceeds tolerance " +
                              std::to_string(tol) + "; refine the grid");
    return {y, std::move(W), res};
}

double kernel_hs_norm2(double t, double alpha) {
    if (!(t > 0 && alpha > 0)) throw ValidationError("kernel_hs_norm2 requires t > 0 and alpha > 0");
    const double A = alpha * std::pow(t, -2.0 / 3.0);
    if (A > 60) throw ValidationError("kernel_hs_norm2: rescaled half-width exceeds 60");
    // panels aligned with 0 and shared by both axes, so the diagonal crosses only diagonal panels
    double width = 0.25 * pi / std::sqrt(std::max(1.0, A));
    int m = (int)std::ceil(A / width);
    std::vector<double> edges;
    for (int i = -m; i <= m; ++i) edges.push_back(A * i / m);
    using GL = boost::math::quadrature::gauss<double, 20>;
    const auto& ab = GL::abscissa();
    const auto& wt = GL::weights();
    std::vector<double> nodes, weights;
    std::vector<int> panel;
    auto push_rule = [&](double a, double b, std::vector<double>& xs, std::vector<double>& ws) {
        double c = 0.5 * (a + b), r = 0.5 * (b - a);
        for (size_t k = 0; k < ab.size(); ++k) {
            if (ab[k] == 0) {
                xs.push_back(c);
                ws.push_back(r * wt[k]);
                continue;
            }
            xs.push_back(c - r * ab[k]);
            ws.push_back(r * wt[k]);
            xs.push_back(c + r * ab[k]);
            ws.push_back(r * wt[k]);
        }
    };
    for (size_t p = 0; p + 1 < edges.size(); ++p) {
        size_t before = nodes.size();
        push_rule(edges[p], edges[p + 1], nodes, weights);
        for (size_t k = before; k < nodes.size(); ++k) panel.push_back((int)p);
    }
    const size_t N = nodes.size();
    std::vector<double> am(N), ap(N);
    for (size_t k = 0; k < N; ++k) {
        AiryValues a = eval_unchecked(nodes[k]);
        am[k] = a.am;
        ap[k] = a.ap;
    }
    double total = 0.0;
    for (size_t i = 0; i < N; ++i) {
        double row = 0.0;
        for (size_t j = 0; j < N; ++j) {
            if (panel[i] == panel[j]) continue;
            double kv = kernel_case(nodes[i], nodes[j], nodes[j] < 0, am[i], ap[i], am[j], ap[j]);
            row += weights[j] * kv * kv;
        }
        // diagonal panel: split at v = u
        double a = edges[panel[i]], b = edges[panel[i] + 1];
        std::vector<double> xs, ws;
        push_rule(a, nodes[i], xs, ws);
        push_rule(nodes[i], b, xs, ws);
        for (size_t k = 0; k < xs.size(); ++k) {
            AiryValues bv = eval_unchecked(xs[k]);
            double kv = kernel_case(nodes[i], xs[k], xs[k] < 0, am[i], ap[i], bv.am, bv.ap);
            row += ws[k] * kv * kv;
        }
        total += weights[i] * row;
    }
    return std::pow(t, -4.0 / 3.0) * total;
}

double airy_mass(double c_plus, double c_minus, double alpha, double beta) {
    if (!(std::isfinite(alpha) && std::isfinite(beta))) throw ValidationError("airy_mass requires a finite interval");
    if (alpha == beta) return 0.0;
    double sign = 1.0;
    if (alpha > beta) {
        std::swap(alpha, beta);
        sign = -1.0;
    }
    if (c_plus != 0.0 && beta > 100.0) throw OverflowError("airy_mass: A+ overflows on the interval");
    auto f = [&](double u) {
        AiryValues a = eval_unchecked(u);
        double v = c_minus * a.am + (c_plus != 0.0 ? c_plus * a.ap : 0.0);
        return v * v;
    };
    double total = 0.0, x = alpha;
    while (x < beta) {
        double w = x < -1.0 ? 0.5 * pi / std::sqrt(-x) : 0.5;
        double nx = std::min(beta, x + w);
        double err = 0.0;
        total += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, x, nx, 10, 1e-12, &err);
        x = nx;
    }
    return sign * total;
}

double transition_ratio(double c_plus, double c_minus, double s, double a, double b) {
    if (!(b < a && a < 0 && s > 0)) throw ValidationError("transition_ratio requires b < a < 0 and s > 0");
    return airy_mass(c_plus, c_minus, s * a, 0.0) / airy_mass(c_plus, c_minus, s * b, s * a);
}

}  // namespace specdegen
