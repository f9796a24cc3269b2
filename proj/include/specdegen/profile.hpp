#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace specdegen {

struct WeightProfile {
    std::string name;
    std::function<double(double)> sigma, dsigma, d2sigma;
    double sigma0 = 1.0;
    double tail_rate = 0.0;  // known exponential decay rate, 0 if none
    double x_max = 200.0;    // truncation radius
    bool truncation_ok = true;
};

// Smallest X with sigma(X) < 1e-8 sigma(0), capped at 200.
double truncation_radius(const std::function<double(double)>& sigma, double sigma0, bool* reached = nullptr);

// Fills sigma0 and the truncation radius, then checks positivity and monotone decay.
WeightProfile finalize_profile(WeightProfile p);

// "exp2", "exp", "rational", or "expr:<expression in x>".
WeightProfile make_profile(std::string_view spec);
WeightProfile expression_profile(std::string_view expression);

double turning_point(const WeightProfile& p, double mu, double E);
double level_point(const WeightProfile& p, double mu, double E, double s);

// Langer-Cherry phase phi_E with sign(x - x_E) |3/2 int_{x_E}^x |f_E|^{1/2}|^{2/3}.
// Immutable once built; safe to share between threads.
class LangerCherryMap {
public:
    LangerCherryMap(const WeightProfile& p, double mu, double E);

    double E() const { return E_; }
    double mu() const { return mu_; }
    double x_E() const { return xE_; }
    double h_switch() const { return hsw_; }

    double f(double x) const;
    double phi(double x) const;
    double dphi(double x) const;
    double rho(double x) const;
    double phi_inv(double y, double guess = -1.0) const;

    // pi(E, x) and I(E, x) of the smooth representation near x_E.
    double pi_integral(double x) const;
    double slope_integral(double x) const;

private:
    WeightProfile p_;
    double mu_, E_, xE_, hsw_;
    std::vector<double> nodes_, cum_;  // cumulative int |f|^{1/2} from x_E + h outward
    std::vector<double> lnodes_, lcum_;  // toward 0 from x_E - h
    double near_right_ = 0.0, near_left_ = 0.0;

    double far_integral(double x) const;
};

struct Transformed {
    std::vector<double> y, W;
    bool undersampled = false;
};

// W = ((phi')^{1/2} w) o phi^{-1} on a uniform y-grid of ny points over [phi(x0), phi(x_end)].
Transformed transform(const LangerCherryMap& map, const std::vector<double>& x, const std::vector<double>& w,
                      int ny);

// Same map with quintic Hermite interpolation from w, w', w''; the result is C^2 in y,
// which keeps centered second differences of W meaningful.
Transformed transform(const LangerCherryMap& map, const std::vector<double>& x, const std::vector<double>& w,
                      const std::vector<double>& dw, const std::vector<double>& d2w, int ny);

double hermite5(const std::vector<double>& x, const std::vector<double>& v, const std::vector<double>& dv,
                const std::vector<double>& d2v, double at);

// Cubic Lagrange interpolation on a uniform grid.
double cubic_interp(const std::vector<double>& x, const std::vector<double>& v, double at);

}  // namespace specdegen
