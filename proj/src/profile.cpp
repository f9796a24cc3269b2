#include "specdegen/profile.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "specdegen/errors.hpp"
#include "specdegen/expr.hpp"

namespace specdegen {

double truncation_radius(const std::function<double(double)>& sigma, double sigma0, bool* reached) {
    const double target = 1e-8 * sigma0, cap = 200.0;
    if (reached) *reached = true;
    if (sigma(cap) >= target) {
        if (reached) *reached = false;
        return cap;
    }
    double lo = 0.0, hi = 1.0;
    while (sigma(hi) >= target) {
        lo = hi;
        hi = std::min(cap, 2 * hi);
    }
    for (int i = 0; i < 200 && hi - lo > 1e-12 * hi; ++i) {
        double mid = 0.5 * (lo + hi);
        (sigma(mid) < target ? hi : lo) = mid;
    }
    return hi;
}

WeightProfile finalize_profile(WeightProfile p) {
    if (!p.sigma || !p.dsigma || !p.d2sigma) throw ValidationError("profile '" + p.name + "' lacks an evaluator");
    p.sigma0 = p.sigma(0.0);
    if (!(p.sigma0 > 0) || !std::isfinite(p.sigma0)) throw ValidationError("profile '" + p.name + "': sigma(0) must be positive");
    p.x_max = truncation_radius(p.sigma, p.sigma0, &p.truncation_ok);
    const int n = 400;
    for (int k = 0; k <= n; ++k) {
        double x = k == 0 ? 0.0 : 1e-6 * std::pow(p.x_max / 1e-6, double(k) / n);
        double s = p.sigma(x), ds = p.dsigma(x), d2 = p.d2sigma(x);
        if (!(s > 0) || !std::isfinite(s))
            throw ValidationError("profile '" + p.name + "': sigma not positive at x = " + std::to_string(x));
        if (!(ds < 0) || !std::isfinite(ds))
            throw ValidationError("profile '" + p.name + "': sigma' not negative at x = " + std::to_string(x));
        if (!std::isfinite(d2))
            throw ValidationError("profile '" + p.name + "': sigma'' not finite at x = " + std::to_string(x));
    }
    return p;
}

WeightProfile expression_profile(std::string_view expression) {
    Expr e = Expr::parse(expression);
    Expr d = e.derivative();
    Expr d2 = d.derivative();
    WeightProfile p;
    p.name = "expr:" + std::string(expression);
    p.sigma = [e](double x) { return e(x); };
    p.dsigma = [d](double x) { return d(x); };
    p.d2sigma = [d2](double x) { return d2(x); };
    return finalize_profile(std::move(p));
}

WeightProfile make_profile(std::string_view spec) {
    WeightProfile p;
    p.name = std::string(spec);
    if (spec == "exp2") {
        p.sigma = [](double x) { return std::exp(-2 * x); };
        p.dsigma = [](double x) { return -2 * std::exp(-2 * x); };
        p.d2sigma = [](double x) { return 4 * std::exp(-2 * x); };
        p.tail_rate = 2.0;
    } else if (spec == "exp") {
        p.sigma = [](double x) { return std::exp(-x); };
        p.dsigma = [](double x) { return -std::exp(-x); };
        p.d2sigma = [](double x) { return std::exp(-x); };
        p.tail_rate = 1.0;
    } else if (spec == "rational") {
        p.sigma = [](double x) { return 1.0 / ((1 + x) * (1 + x)); };
        p.dsigma = [](double x) { return -2.0 / std::pow(1 + x, 3); };
        p.d2sigma = [](double x) { return 6.0 / std::pow(1 + x, 4); };
    } else if (spec.starts_with("expr:")) {
        return expression_profile(spec.substr(5));
    } else {
        throw ValidationError("unknown profile '" + std::string(spec) + "' (exp2|exp|rational|expr:<expression>)");
    }
    return finalize_profile(std::move(p));
}

namespace {

// Root of sigma(x) = target for 0 < target <= sigma(0); Newton with bisection fallback.
double solve_sigma(const WeightProfile& p, double target) {
    if (target >= p.sigma0) return 0.0;
    double lo = 0.0, hi = 1.0;
    while (p.sigma(hi) > target) {
        lo = hi;
        hi *= 2;
        if (hi > 1e8) throw DomainError("level unreachable: sigma does not fall to the requested value");
    }
    double x = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
        double g = p.sigma(x) - target;
        if (g == 0) return x;
        if (g > 0)
            lo = x;
        else
            hi = x;
        double xn = x - g / p.dsigma(x);
        if (!(xn > lo && xn < hi)) xn = 0.5 * (lo + hi);
        if (std::abs(xn - x) <= 1e-15 * std::max(1.0, x)) return xn;
        x = xn;
        if (hi - lo <= 1e-15 * std::max(1.0, hi)) break;
    }
    return x;
}

using GL32 = boost::math::quadrature::gauss<double, 32>;

template <class F>
double gauss01(F&& f) {
    const auto& a = GL32::abscissa();
    const auto& w = GL32::weights();
    double s = 0.0;
    for (size_t k = 0; k < a.size(); ++k) {
        s += w[k] * (f(0.5 + 0.5 * a[k]) + f(0.5 - 0.5 * a[k]));
    }
    return 0.5 * s;
}

}  // namespace

double turning_point(const WeightProfile& p, double mu, double E) {
    if (!(mu > 0)) throw ValidationError("turning_point requires mu > 0");
    double thr = mu / p.sigma0;
    if (E < thr * (1 - 1e-14)) throw DomainError("below threshold: E < mu/sigma(0)");
    return solve_sigma(p, std::min(mu / E, p.sigma0));
}

double level_point(const WeightProfile& p, double mu, double E, double s) {
    if (!(s >= 0)) throw ValidationError("level_point requires s >= 0");
    if (s >= mu) throw DomainError("level unreachable: f_E < mu");
    double thr = mu / p.sigma0;
    if (E < thr * (1 - 1e-14)) throw DomainError("below threshold: E < mu/sigma(0)");
    return solve_sigma(p, std::min((mu - s) / E, p.sigma0));
}

LangerCherryMap::LangerCherryMap(const WeightProfile& p, double mu, double E) : p_(p), mu_(mu), E_(E) {
    xE_ = turning_point(p, mu, E);
    hsw_ = 0.05 * (1 + xE_);
    using GK = boost::math::quadrature::gauss_kronrod<double, 21>;
    auto sq = [this](double x) { return std::sqrt(std::abs(f(x))); };

    double a = xE_ + hsw_;
    near_right_ = std::pow(hsw_, 1.5) * pi_integral(a);
    double end = std::max({p_.x_max, 3 * xE_ + 1, a + 1});
    nodes_.push_back(a);
    cum_.push_back(near_right_);
    while (nodes_.back() < end) {
        double x0 = nodes_.back(), x1 = std::min(end, x0 + 0.05 * (1 + x0));
        double err = 0.0;
        double v = GK::integrate(sq, x0, x1, 8, 1e-13, &err);
        if (!std::isfinite(v))
            throw NumericalError("quadrature failed on [" + std::to_string(x0) + ", " + std::to_string(x1) + "]");
        nodes_.push_back(x1);
        cum_.push_back(cum_.back() + v);
    }
    if (xE_ - hsw_ > 0) {
        double b = xE_ - hsw_;
        near_left_ = std::pow(hsw_, 1.5) * pi_integral(b);
        lnodes_.push_back(b);
        lcum_.push_back(near_left_);
        while (lnodes_.back() > 0) {
            double x0 = lnodes_.back(), x1 = std::max(0.0, x0 - 0.05);
            double err = 0.0;
            double v = GK::integrate(sq, x1, x0, 8, 1e-13, &err);
            if (!std::isfinite(v))
                throw NumericalError("quadrature failed on [" + std::to_string(x1) + ", " + std::to_string(x0) + "]");
            lnodes_.push_back(x1);
            lcum_.push_back(lcum_.back() + v);
        }
    }
}

double LangerCherryMap::f(double x) const { return mu_ - E_ * p_.sigma(x); }

double LangerCherryMap::slope_integral(double x) const {
    double d = x - xE_;
    return gauss01([&](double r) { return -E_ * p_.dsigma(xE_ + r * d); });
}

double LangerCherryMap::pi_integral(double x) const {
    double d = x - xE_;
    // s = v^2 removes the square-root endpoint behaviour
    return gauss01([&](double v) { return 2 * v * v * std::sqrt(slope_integral(xE_ + v * v * d)); });
}

double LangerCherryMap::far_integral(double x) const {
    using GK = boost::math::quadrature::gauss_kronrod<double, 21>;
    auto sq = [this](double u) { return std::sqrt(std::abs(f(u))); };
    double err = 0.0;
    if (x > xE_) {
        auto it = std::upper_bound(nodes_.begin(), nodes_.end(), x);
        size_t i = (it == nodes_.begin()) ? 0 : size_t(it - nodes_.begin()) - 1;
        double base = cum_[i], x0 = nodes_[i];
        // beyond the table: march in panels of the same width rule
        while (x - x0 > 0.05 * (1 + x0)) {
            double x1 = x0 + 0.05 * (1 + x0);
            base += GK::integrate(sq, x0, x1, 8, 1e-13, &err);
            x0 = x1;
        }
        return base + (x > x0 ? GK::integrate(sq, x0, x, 8, 1e-13, &err) : 0.0);
    }
    auto it = std::upper_bound(lnodes_.begin(), lnodes_.end(), x, std::greater<double>());
    size_t i = (it == lnodes_.begin()) ? 0 : size_t(it - lnodes_.begin()) - 1;
    double x0 = lnodes_[i];
    return lcum_[i] + (x < x0 ? GK::integrate(sq, x, x0, 8, 1e-13, &err) : 0.0);
}

double LangerCherryMap::phi(double x) const {
    double d = x - xE_;
    if (d == 0) return 0.0;
    if (std::abs(d) < hsw_) return d * std::cbrt(std::pow(1.5 * pi_integral(x), 2));
    double F = far_integral(x);
    double v = std::cbrt(std::pow(1.5 * F, 2));
    return d > 0 ? v : -v;
}

double LangerCherryMap::dphi(double x) const {
    double d = x - xE_;
    if (std::abs(d) < hsw_) {
        double P = std::cbrt(std::pow(1.5 * pi_integral(x), 2));
        return std::sqrt(slope_integral(x) / P);
    }
    return std::sqrt(std::abs(f(x)) / std::abs(phi(x)));
}

double LangerCherryMap::rho(double x) const { return 1.0 / std::sqrt(dphi(x)); }

double LangerCherryMap::phi_inv(double y, double guess) const {
    double lo = 0.0, plo = phi(0.0);
    if (y < plo - 1e-14 * std::max(1.0, std::abs(plo)))
        throw DomainError("phi_inv: value below phi(0)");
    if (y <= plo) return 0.0;
    double hi = std::max(1.0, 2 * xE_ + 1);
    while (phi(hi) < y) {
        lo = hi;
        hi *= 2;
        if (hi > 1e7) throw DomainError("phi_inv: value out of range");
    }
    double x = (guess > lo && guess < hi) ? guess : 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
        double g = phi(x) - y;
        if (g == 0) return x;
        (g > 0 ? hi : lo) = x;
        double xn = x - g / dphi(x);
        if (!(xn > lo && xn < hi)) xn = 0.5 * (lo + hi);
        if (std::abs(xn - x) <= 2e-16 * std::max(1.0, std::abs(x))) return xn;
        x = xn;
    }
    return x;
}

double cubic_interp(const std::vector<double>& x, const std::vector<double>& v, double at) {
    const int n = (int)x.size();
    if (n < 4) throw ValidationError("cubic_interp needs at least 4 samples");
    double h = (x.back() - x.front()) / (n - 1);
    int i = (int)std::floor((at - x.front()) / h) - 1;
    i = std::clamp(i, 0, n - 4);
    double s = 0.0;
    for (int a = 0; a < 4; ++a) {
        double l = 1.0;
        for (int b = 0; b < 4; ++b)
            if (b != a) l *= (at - x[i + b]) / (x[i + a] - x[i + b]);
        s += l * v[i + a];
    }
    return s;
}

double hermite5(const std::vector<double>& x, const std::vector<double>& v, const std::vector<double>& dv,
                const std::vector<double>& d2v, double at) {
    const int n = (int)x.size();
    double h = (x.back() - x.front()) / (n - 1);
    int i = std::clamp((int)std::floor((at - x.front()) / h), 0, n - 2);
    double s = (at - x[i]) / h, s2 = s * s, s3 = s2 * s, s4 = s3 * s, s5 = s4 * s;
    double h0 = 1 - 10 * s3 + 15 * s4 - 6 * s5, h1 = s - 6 * s3 + 8 * s4 - 3 * s5,
           h2 = 0.5 * (s2 - 3 * s3 + 3 * s4 - s5);
    double g0 = 10 * s3 - 15 * s4 + 6 * s5, g1 = -4 * s3 + 7 * s4 - 3 * s5, g2 = 0.5 * (s3 - 2 * s4 + s5);
    return h0 * v[i] + h * h1 * dv[i] + h * h * h2 * d2v[i] + g0 * v[i + 1] + h * g1 * dv[i + 1] +
           h * h * g2 * d2v[i + 1];
}

namespace {

template <class Interp>
Transformed transform_impl(const LangerCherryMap& map, const std::vector<double>& x, const std::vector<double>& w,
                           int ny, Interp&& interp) {
    if (x.size() != w.size() || x.size() < 4) throw ValidationError("transform: sample arrays mismatch");
    if (ny < 2) throw ValidationError("transform: ny must be at least 2");
    Transformed out;
    double wmax = 0.0, d4 = 0.0;
    for (double v : w) wmax = std::max(wmax, std::abs(v));
    for (size_t i = 2; i + 2 < w.size(); ++i)
        d4 = std::max(d4, std::abs(w[i - 2] - 4 * w[i - 1] + 6 * w[i] - 4 * w[i + 1] + w[i + 2]));
    out.undersampled = wmax > 0 && d4 > 1e-3 * wmax;

    double y0 = map.phi(x.front()), y1 = map.phi(x.back());
    out.y.resize(ny);
    out.W.resize(ny);
    double guess = x.front();
    for (int j = 0; j < ny; ++j) {
        double y = y0 + (y1 - y0) * j / (ny - 1);
        double xj = j == 0 ? x.front() : j == ny - 1 ? x.back() : map.phi_inv(y, guess);
        guess = xj;
        out.y[j] = y;
        out.W[j] = wmax == 0 ? 0.0 : std::sqrt(map.dphi(xj)) * interp(xj);
    }
    return out;
}

}  // namespace

Transformed transform(const LangerCherryMap& map, const std::vector<double>& x, const std::vector<double>& w,
                      const std::vector<double>& dw, const std::vector<double>& d2w, int ny) {
    if (dw.size() != x.size() || d2w.size() != x.size()) throw ValidationError("transform: derivative arrays mismatch");
    return transform_impl(map, x, w, ny, [&](double at) { return hermite5(x, w, dw, d2w, at); });
}

Transformed transform(const LangerCherryMap& map, const std::vector<double>& x, const std::vector<double>& w,
                      int ny) {
    return transform_impl(map, x, w, ny, [&](double at) { return cubic_interp(x, w, at); });
}

}  // namespace specdegen
