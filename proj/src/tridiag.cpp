#include "specdegen/tridiag.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "specdegen/errors.hpp"

namespace specdegen {

int sturm_count(const std::vector<double>& diag, const std::vector<double>& off, double x) {
    const double tiny = std::numeric_limits<double>::min() * 1e10;
    int count = 0;
    double q = 1.0;
    for (size_t i = 0; i < diag.size(); ++i) {
        double b2 = i == 0 ? 0.0 : off[i - 1] * off[i - 1];
        q = diag[i] - x - (i == 0 ? 0.0 : b2 / q);
        if (q == 0.0) q = -tiny;
        if (q < 0) ++count;
    }
    return count;
}

namespace {

void gershgorin(const std::vector<double>& d, const std::vector<double>& e, double& lo, double& hi) {
    lo = INFINITY;
    hi = -INFINITY;
    for (size_t i = 0; i < d.size(); ++i) {
        double r = (i > 0 ? std::abs(e[i - 1]) : 0.0) + (i + 1 < d.size() ? std::abs(e[i]) : 0.0);
        lo = std::min(lo, d[i] - r);
        hi = std::max(hi, d[i] + r);
    }
}

// j-th eigenvalue (0-based) inside [lo, hi] where counts bracket it.
double bisect_index(const std::vector<double>& d, const std::vector<double>& e, int j, double lo, double hi,
                    double rel_tol) {
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        if (hi - lo <= rel_tol * std::max(std::abs(lo), std::abs(hi)) + 1e-300) break;
        if (mid <= lo || mid >= hi) break;
        if (sturm_count(d, e, mid) > j)
            hi = mid;
        else
            lo = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

std::vector<double> tridiag_lowest(const std::vector<double>& diag, const std::vector<double>& off, int k,
                                   double rel_tol) {
    if (diag.empty() || off.size() + 1 != diag.size()) throw ValidationError("tridiag: inconsistent sizes");
    k = std::min<int>(k, (int)diag.size());
    double lo, hi;
    gershgorin(diag, off, lo, hi);
    std::vector<double> out(k);
    double prev = lo;
    for (int j = 0; j < k; ++j) {
        out[j] = bisect_index(diag, off, j, prev, hi, rel_tol);
        prev = std::max(lo, out[j] - 1e-12 * std::abs(out[j]));
    }
    return out;
}

std::vector<double> tridiag_in_range(const std::vector<double>& diag, const std::vector<double>& off, double lo,
                                     double hi, double rel_tol) {
    int c0 = sturm_count(diag, off, lo), c1 = sturm_count(diag, off, hi);
    std::vector<double> out;
    for (int j = c0; j < c1; ++j) out.push_back(bisect_index(diag, off, j, lo, hi, rel_tol));
    return out;
}

}  // namespace specdegen
