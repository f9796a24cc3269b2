#include "specdegen/quadrature.hpp"

#include <algorithm>
#include <cmath>

#include "specdegen/profile.hpp"

namespace specdegen {

double simpson(const std::vector<double>& v, double h, size_t first, size_t last) {
    if (last == size_t(-1)) last = v.size() - 1;
    if (last <= first) return 0.0;
    size_t m = last - first;
    if (m == 1) return 0.5 * h * (v[first] + v[last]);
    if (m == 2) return h / 3 * (v[first] + 4 * v[first + 1] + v[last]);
    size_t even_end = (m % 2 == 0) ? last : last - 3;
    double s = 0.0;
    for (size_t j = first; j < even_end; j += 2) s += v[j] + 4 * v[j + 1] + v[j + 2];
    s *= h / 3;
    if (even_end != last) {
        size_t j = even_end;
        s += 3 * h / 8 * (v[j] + 3 * v[j + 1] + 3 * v[j + 2] + v[j + 3]);
    }
    return s;
}

double tail_integral(const std::vector<double>& x, const std::vector<double>& v, double x0) {
    const size_t n = x.size();
    double h = x[1] - x[0];
    if (x0 <= x.front()) return simpson(v, h);
    if (x0 >= x.back()) return 0.0;
    size_t i0 = (size_t)std::ceil((x0 - x.front()) / h - 1e-12);
    i0 = std::min(i0, n - 1);
    double head = 0.0;
    if (x[i0] > x0) {
        // Gauss-Legendre on the partial cell with cubic interpolation
        const double g = 1.0 / std::sqrt(3.0);
        double a = x0, b = x[i0], c = 0.5 * (a + b), r = 0.5 * (b - a);
        head = r * (cubic_interp(x, v, c - r * g) + cubic_interp(x, v, c + r * g));
    }
    return head + simpson(v, h, i0, n - 1);
}

}  // namespace specdegen
