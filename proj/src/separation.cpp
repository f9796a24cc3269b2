#include "specdegen/separation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>

#include "specdegen/errors.hpp"
#include "specdegen/halfline.hpp"
#include "specdegen/parallel.hpp"

namespace specdegen {

namespace {

constexpr double pi = std::numbers::pi;

bool entry_less(const LabeledEntry& a, const LabeledEntry& b) {
    if (a.lambda != b.lambda) return a.lambda < b.lambda;
    if (a.ell != b.ell) return a.ell < b.ell;
    return a.k < b.k;
}

}  // namespace

void validate(const TransverseSpectrum& b) {
    if (b.eigenvalues.empty()) fail_validation("transverse spectrum is empty");
    for (size_t i = 0; i < b.eigenvalues.size(); ++i) {
        if (!(b.eigenvalues[i] > 0) || !std::isfinite(b.eigenvalues[i]))
            fail_validation("transverse eigenvalues must be positive and finite");
        if (i > 0 && !(b.eigenvalues[i] > b.eigenvalues[i - 1]))
            fail_validation("transverse eigenvalues must be strictly increasing (simple)");
    }
}

TransverseSpectrum dirichlet_interval(double L, double mu_max) {
    if (!(L > 0) || !std::isfinite(L)) fail_validation("interval length must be positive");
    TransverseSpectrum b;
    std::ostringstream os;
    os << "Dirichlet interval length " << L;
    b.label = os.str();
    for (int l = 1;; ++l) {
        double mu = std::pow(l * pi / L, 2);
        b.eigenvalues.push_back(mu);
        if (mu > mu_max || l > 100000) break;
    }
    return b;
}

TransverseSpectrum parse_transverse(const std::string& spec, double mu_max) {
    if (spec.rfind("dirichlet-interval", 0) == 0) {
        double L = 1.0;
        auto colon = spec.find(':');
        if (colon != std::string::npos) {
            std::string arg = spec.substr(colon + 1);
            if (arg.rfind("L=", 0) != 0) fail_validation("expected dirichlet-interval:L=<length>");
            try {
                L = std::stod(arg.substr(2));
            } catch (const std::exception&) {
                fail_validation("bad interval length in '" + spec + "'");
            }
        }
        return dirichlet_interval(L, mu_max);
    }
    if (spec.rfind("list:", 0) == 0) {
        TransverseSpectrum b;
        b.label = spec;
        std::istringstream in(spec.substr(5));
        std::string cell;
        while (std::getline(in, cell, ',')) {
            try {
                b.eigenvalues.push_back(std::stod(cell));
            } catch (const std::exception&) {
                fail_validation("bad transverse eigenvalue '" + cell + "'");
            }
        }
        validate(b);
        return b;
    }
    fail_validation("unknown transverse spectrum '" + spec + "' (dirichlet-interval:L=<len>|list:<values>)");
}

std::vector<double> thresholds(const TransverseSpectrum& b, const WeightProfile& profile) {
    validate(b);
    std::vector<double> out;
    out.reserve(b.eigenvalues.size());
    for (double mu : b.eigenvalues) out.push_back(mu / profile.sigma0);
    return out;
}

LabeledSpectrum product_spectrum(double t, const WeightProfile& profile, const TransverseSpectrum& b,
                                 double lambda_max, Boundary bc) {
    if (!(t > 0) || !std::isfinite(t)) fail_validation("t must be positive");
    if (!std::isfinite(lambda_max)) fail_validation("lambda_max must be finite");
    validate(b);
    std::vector<double> thr = thresholds(b, profile);
    size_t modes = 0;
    while (modes < thr.size() && thr[modes] <= lambda_max) ++modes;

    auto per_mode = parallel_map<HalfLineSpectrum>(modes, [&](size_t l) {
        HalfLineProblem p;
        p.t = t;
        p.mu = b.eigenvalues[l];
        p.profile = profile;
        p.bc = bc;
        return solve_below(p, lambda_max, false);
    });

    LabeledSpectrum out;
    out.t = t;
    out.lambda_max = lambda_max;
    for (size_t l = 0; l < modes; ++l) {
        const auto& s = per_mode[l];
        for (size_t k = 0; k < s.eigenvalues.size(); ++k)
            out.entries.push_back({s.eigenvalues[k], static_cast<int>(l + 1), static_cast<int>(k + 1)});
        for (auto& w : s.warnings) out.warnings.push_back("ell=" + std::to_string(l + 1) + ": " + w);
    }
    std::sort(out.entries.begin(), out.entries.end(), entry_less);
    return out;
}

SimplicityReport simplicity_scan(const std::vector<LabeledSpectrum>& spectra, double tol) {
    if (tol < 0) fail_validation("tolerance must be nonnegative");
    SimplicityReport rep;
    for (const auto& s : spectra) {
        rep.t.push_back(s.t);
        double mg = INFINITY;
        const auto& e = s.entries;
        for (size_t i = 0; i + 1 < e.size(); ++i) mg = std::min(mg, e[i + 1].lambda - e[i].lambda);
        rep.min_gap.push_back(mg);
        for (size_t i = 0; i < e.size(); ++i)
            for (size_t j = i + 1; j < e.size(); ++j) {
                double gap = e[j].lambda - e[i].lambda;
                if (gap > tol * std::max(std::abs(e[i].lambda), std::abs(e[j].lambda))) break;
                rep.suspects.push_back({s.t, e[i], e[j], gap});
            }
    }
    for (size_t s = 0; s + 1 < spectra.size(); ++s) {
        if (!(spectra[s + 1].t > spectra[s].t)) fail_validation("spectra must be ordered by increasing t");
        // Order of the labels present at both ends; a swapped pair is a crossing inside the interval.
        std::map<std::pair<int, int>, double> next;
        for (auto& e : spectra[s + 1].entries) next[{e.ell, e.k}] = e.lambda;
        std::vector<std::pair<LabeledEntry, double>> common;
        for (auto& e : spectra[s].entries) {
            auto it = next.find({e.ell, e.k});
            if (it != next.end()) common.push_back({e, it->second});
        }
        for (size_t i = 0; i < common.size(); ++i)
            for (size_t j = i + 1; j < common.size(); ++j) {
                const auto& [a, a1] = common[i];
                const auto& [b, b1] = common[j];
                if (a.lambda < b.lambda && a1 > b1) {
                    rep.crossings.push_back({spectra[s].t, spectra[s + 1].t, a.ell, a.k, b.ell, b.k});
                }
            }
    }
    return rep;
}

int CylinderSpectrum::count_with_multiplicity() const {
    int c = 0;
    for (auto& l : levels) c += l.multiplicity;
    return c;
}

LabeledSpectrum CylinderSpectrum::labeled() const {
    LabeledSpectrum s;
    s.t = t;
    for (auto& lev : levels) {
        for (auto [k, l] : lev.modes) {
            s.entries.push_back({lev.lambda, l, k});
            if (l > 0) s.entries.push_back({lev.lambda, -l, k});
        }
    }
    std::sort(s.entries.begin(), s.entries.end(), entry_less);
    if (!levels.empty()) s.lambda_max = levels.back().lambda;
    return s;
}

namespace {

// p/q with q <= qmax and |x - p/q| <= rel * x, from the continued fraction of x.
bool rational_approx(double x, long long qmax, double rel, long long& p, long long& q) {
    long long h0 = 0, h1 = 1, k0 = 1, k1 = 0;
    double r = x;
    for (int it = 0; it < 64; ++it) {
        double a = std::floor(r);
        if (a > 9e15) return false;
        long long ai = static_cast<long long>(a);
        long long h2 = ai * h1 + h0, k2 = ai * k1 + k0;
        if (k2 > qmax) return false;
        h0 = h1;
        h1 = h2;
        k0 = k1;
        k1 = k2;
        if (std::abs(x - static_cast<double>(h1) / static_cast<double>(k1)) <= rel * x) {
            p = h1;
            q = k1;
            return true;
        }
        double frac = r - a;
        if (frac <= 0) return false;
        r = 1.0 / frac;
    }
    return false;
}

}  // namespace

CylinderSpectrum cylinder_spectrum(double t, int n) {
    if (!(t > 0) || !std::isfinite(t)) fail_validation("t must be positive");
    if (n < 1 || n > 100000) fail_validation("n must lie in [1, 100000]");
    CylinderSpectrum cs;
    cs.t = t;
    // k = 1..n with l = 0 already gives n distinct values, so nothing beyond n^2 (in units of pi^2) is needed.
    const double cap = double(n) * n;
    long long pairs = 0;
    for (int k = 1; k <= n; ++k) pairs += 1 + static_cast<long long>(t * std::sqrt(cap - double(k) * k));
    if (pairs > 20000000) fail_validation("cylinder enumeration too large for this t and n");

    long long p = 0, q = 0;
    cs.exact = rational_approx(t * t, 1000000, 1e-14, p, q);
    struct Mode {
        double value;
        long long key;
        int k, l;
    };
    std::vector<Mode> modes;
    for (int k = 1; k <= n; ++k) {
        for (int l = 0;; ++l) {
            double v = double(k) * k + double(l) * l / (t * t);
            if (v > cap * (1 + 1e-12)) break;
            long long key = cs.exact ? p * (long long)k * k + q * (long long)l * l : 0;
            modes.push_back({v, key, k, l});
        }
    }
    std::sort(modes.begin(), modes.end(), [&](const Mode& a, const Mode& b) {
        if (cs.exact && a.key != b.key) return a.key < b.key;
        if (a.value != b.value) return a.value < b.value;
        return std::pair(a.k, a.l) < std::pair(b.k, b.l);
    });
    for (const Mode& m : modes) {
        bool same = false;
        if (!cs.levels.empty()) {
            const Mode* prev = &m - 1;
            same = cs.exact ? prev->key == m.key : m.value - prev->value <= 1e-12 * m.value;
        }
        if (!same) {
            if (static_cast<int>(cs.levels.size()) == n) break;
            cs.levels.push_back({pi * pi * m.value, 0, {}});
        }
        cs.levels.back().modes.push_back({m.k, m.l});
        cs.levels.back().multiplicity += m.l == 0 ? 1 : 2;
    }
    return cs;
}

bool cylinder_first_simple(double t, int n) {
    CylinderSpectrum cs = cylinder_spectrum(t, n);
    int counted = 0;
    for (auto& lev : cs.levels) {
        if (counted >= n) break;
        if (lev.multiplicity > 1) return false;
        counted += lev.multiplicity;
    }
    return true;
}

CylinderThreshold cylinder_simplicity_threshold(int n) {
    if (n < 2) fail_validation("threshold needs n >= 2 (the first eigenvalue is always simple)");
    CylinderThreshold r;
    r.n = n;
    r.inverse_sqrt = 1.0 / std::sqrt(double(n) * n - 1);
    r.inverse = 1.0 / (double(n) * n - 1);
    double lo = 1e-6, hi = 1.0;
    if (!cylinder_first_simple(lo, n)) throw NumericalError("cylinder spectrum not simple at tiny t");
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
        double mid = 0.5 * (lo + hi);
        (cylinder_first_simple(mid, n) ? lo : hi) = mid;
    }
    r.enumerated = 0.5 * (lo + hi);
    r.matches_inverse_sqrt = std::abs(r.enumerated - r.inverse_sqrt) <= 1e-9 * r.inverse_sqrt;
    r.matches_inverse = std::abs(r.enumerated - r.inverse) <= 1e-9 * r.inverse;
    return r;
}

}  // namespace specdegen
