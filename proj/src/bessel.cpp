#include "specdegen/bessel.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include <boost/numeric/odeint.hpp>

#include "specdegen/errors.hpp"

namespace specdegen {

namespace {

namespace ode = boost::numeric::odeint;
using State = std::array<double, 1>;
constexpr double pi = std::numbers::pi;

struct Pruefer {
    double nu2;
    void operator()(const State& th, State& d, double x) const {
        double s = std::sin(th[0]), c = std::cos(th[0]);
        d[0] = c * c / x + (x - nu2 / x) * s * s;
    }
};

// Start angle from the normalized power series: tan theta = J / (x J').
void start(double nu, double& x0, double& th0) {
    x0 = std::sqrt(nu + 1.0);
    double q = -x0 * x0 / 4, c = 1.0, S = 1.0, dS = 0.0;
    for (int m = 1; m < 200; ++m) {
        c *= q / (m * (nu + m));
        S += c;
        dS += 2.0 * m * c;
        if (std::abs(c) < 1e-18 * std::abs(S)) break;
    }
    th0 = std::atan2(1.0, nu + dS / S);
}

class Walker {
public:
    explicit Walker(double nu) : sys_{nu * nu} { start(nu, x_, th_[0]); }

    double theta0() const { return th0(); }

    // Advance until theta reaches target, then refine the crossing.
    double crossing(double target) {
        auto stepper = ode::make_controlled<ode::runge_kutta_fehlberg78<State>>(1e-14, 1e-14);
        for (int guard = 0; guard < 10000000; ++guard) {
            double dx = std::min(0.25, 0.5 * x_ / std::max(1.0, std::sqrt(sys_.nu2)));
            if (x_ > std::sqrt(sys_.nu2)) dx = 0.25;
            State next = th_;
            double xn = x_;
            ode::integrate_adaptive(stepper, sys_, next, xn, x_ + dx, dx / 4);
            if (next[0] >= target) return refine(target, x_, th_, x_ + dx);
            x_ += dx;
            th_ = next;
        }
        throw NumericalError("bessel zero search did not terminate");
    }

private:
    Pruefer sys_;
    double x_;
    State th_;
    double th0() const { return th_[0]; }

    double refine(double target, double xa, State tha, double xb) {
        auto stepper = ode::make_controlled<ode::runge_kutta_fehlberg78<State>>(1e-15, 1e-15);
        for (int it = 0; it < 200 && xb - xa > 1e-15 * xb; ++it) {
            // secant-like step guarded by bisection: the angle rises at rate ~ x
            double xm = 0.5 * (xa + xb);
            State s = tha;
            ode::integrate_adaptive(stepper, sys_, s, xa, xm, (xm - xa) / 4);
            if (s[0] >= target) {
                xb = xm;
            } else {
                xa = xm;
                tha = s;
            }
        }
        // leave the walker at the crossing for the next zero
        x_ = xa;
        th_ = tha;
        return 0.5 * (xa + xb);
    }
};

}  // namespace

std::vector<double> bessel_zeros(double nu, int n, Boundary kind) {
    if (!(nu >= 0) || !std::isfinite(nu)) throw ValidationError("bessel_zeros requires nu >= 0");
    if (n < 1) throw ValidationError("bessel_zeros requires n >= 1");
    if (nu > 1e5) throw ValidationError("bessel_zeros: order too large");
    Walker w(nu);
    double offset = kind == Boundary::Dirichlet ? 0.0 : 0.5;
    // first lattice level strictly above the start angle
    int m = (int)std::floor(w.theta0() / pi + offset) + 1;
    std::vector<double> out;
    for (int k = 0; k < n; ++k, ++m) out.push_back(w.crossing((m - offset) * pi));
    return out;
}

double bessel_zero(double nu, int k, Boundary kind) { return bessel_zeros(nu, k, kind).back(); }

std::vector<double> bessel_zeros_below(double nu, double xmax, Boundary kind) {
    std::vector<double> out;
    if (xmax <= nu) return out;
    int n = 4;
    for (;;) {
        out = bessel_zeros(nu, n, kind);
        if (out.back() >= xmax) break;
        n *= 2;
    }
    while (!out.empty() && out.back() >= xmax) out.pop_back();
    return out;
}

}  // namespace specdegen
