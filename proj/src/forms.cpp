#include "specdegen/forms.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <random>
#include <sstream>

#include "specdegen/errors.hpp"
#include "specdegen/parallel.hpp"

namespace specdegen {

namespace {

double sym_defect(const MatrixXd& X) {
    double scale = std::max(1.0, X.cwiseAbs().maxCoeff());
    return (X - X.transpose()).cwiseAbs().maxCoeff() / scale;
}

void check_square(const MatrixXd& X, int n, const char* name) {
    if (X.rows() != n || X.cols() != n) fail_validation(std::string(name) + " has the wrong shape");
    if (!X.allFinite()) fail_validation(std::string(name) + " has non-finite entries");
    if (sym_defect(X) > 1e-12) fail_validation(std::string(name) + " is not symmetric");
}

double quad(const MatrixXd& X, const VectorXd& v) { return v.dot(X * v); }

// e-maxx style Hungarian algorithm, minimising sum cost(i, p(i)) over permutations.
std::vector<int> hungarian(const MatrixXd& cost) {
    const int n = static_cast<int>(cost.rows());
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<int> p(n + 1, 0), way(n + 1, 0);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(n + 1, inf);
        std::vector<char> used(n + 1, 0);
        do {
            used[j0] = 1;
            int i0 = p[j0], j1 = 0;
            double delta = inf;
            for (int j = 1; j <= n; ++j) {
                if (used[j]) continue;
                double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0);
    }
    std::vector<int> assign(n);
    for (int j = 1; j <= n; ++j) assign[p[j] - 1] = j - 1;
    return assign;
}

}  // namespace

void validate(const FormPencil& p) {
    if (p.dim <= 0) fail_validation("pencil dimension must be positive");
    check_square(p.A, p.dim, "A");
    check_square(p.M, p.dim, "M");
    if (p.Q) check_square(*p.Q, p.dim, "Q");
    Eigen::LLT<MatrixXd> llt(p.M);
    if (llt.info() != Eigen::Success) throw DomainError("M is not positive definite");
}

GeneralizedEigen generalized_eigen(const MatrixXd& A, const MatrixXd& M) {
    Eigen::LLT<MatrixXd> llt(M);
    if (llt.info() != Eigen::Success) throw DomainError("M is not positive definite");
    MatrixXd L = llt.matrixL();
    MatrixXd C = L.triangularView<Eigen::Lower>().solve(A);
    C = L.triangularView<Eigen::Lower>().solve(C.transpose()).eval();
    C = (0.5 * (C + C.transpose())).eval();
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(C);
    if (es.info() != Eigen::Success) throw NumericalError("symmetric eigensolver failed");
    GeneralizedEigen out;
    out.values = es.eigenvalues();
    out.vectors = L.transpose().triangularView<Eigen::Upper>().solve(es.eigenvectors());
    return out;
}

double epsilon_closeness(const FormPencil& p) {
    validate(p);
    if (!p.Q) fail_validation("closeness needs a compared form Q");
    Eigen::LLT<MatrixXd> llt(p.A);
    if (llt.info() != Eigen::Success) throw DomainError("A is not positive definite");
    MatrixXd L = llt.matrixL();
    MatrixXd D = *p.Q - p.A;
    MatrixXd C = L.triangularView<Eigen::Lower>().solve(D);
    C = L.triangularView<Eigen::Lower>().solve(C.transpose()).eval();
    C = (0.5 * (C + C.transpose())).eval();
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(C, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

MatrixXd spectral_projector(const GeneralizedEigen& eig, const MatrixXd& M, double lo, double hi) {
    const int n = static_cast<int>(M.rows());
    MatrixXd P = MatrixXd::Zero(n, n);
    for (int k = 0; k < eig.values.size(); ++k) {
        if (eig.values[k] < lo || eig.values[k] > hi) continue;
        const VectorXd& psi = eig.vectors.col(k);
        P += psi * (M * psi).transpose();
    }
    return P;
}

MatrixXd spectral_projector(const FormPencil& p, double lo, double hi) {
    validate(p);
    return spectral_projector(generalized_eigen(p.A, p.M), p.M, lo, hi);
}

double dual_norm(const VectorXd& r, const MatrixXd& M) {
    Eigen::LLT<MatrixXd> llt(M);
    if (llt.info() != Eigen::Success) throw DomainError("M is not positive definite");
    return std::sqrt(std::max(0.0, r.dot(llt.solve(r))));
}

int QuasimodeReport::violations() const {
    int v = 0;
    for (auto& c : checks)
        if (c.applicable && !c.satisfied) ++v;
    return v;
}

QuasimodeReport quasimode_suite(const FormPencil& p, double E, double lo, double hi, const VectorXd& u_in) {
    validate(p);
    if (!p.Q) fail_validation("quasimode checks need a compared form Q");
    if (u_in.size() != p.dim) fail_validation("u has the wrong length");
    QuasimodeReport rep;
    rep.E = E;
    rep.lo = lo;
    rep.hi = hi;
    rep.delta = std::min(E - lo, hi - E);
    if (!(rep.delta > 0)) fail_validation("E must lie in the interior of I");

    double un = std::sqrt(quad(p.M, u_in));
    if (!(un > 0)) fail_validation("u must be nonzero");
    VectorXd u = u_in / un;

    GeneralizedEigen eig = generalized_eigen(p.A, p.M);
    rep.spec_dist = (eig.values.array() - E).abs().minCoeff();
    rep.eps = epsilon_closeness(p);
    MatrixXd P = spectral_projector(eig, p.M, lo, hi);
    VectorXd pu = P * u;
    VectorXd rest = u - pu;

    const double au = quad(p.A, u);
    const double g = 1.0 + E / rep.delta;
    const double tol = 1e-10 * std::max({1.0, std::abs(au), std::abs(E), std::abs(hi)});
    auto add = [&](const char* name, double lhs, double rhs, bool applicable) {
        LemmaCheck c;
        c.name = name;
        c.lhs = lhs;
        c.rhs = rhs;
        c.applicable = applicable;
        c.satisfied = lhs <= rhs + tol;
        rep.checks.push_back(c);
    };

    double resid = dual_norm(p.A * u - E * (p.M * u), p.M);
    bool sep = rep.spec_dist > 1e-12 * std::max(1.0, std::abs(E));
    add("resolvent", 1.0, sep ? resid / rep.spec_dist : INFINITY, sep);

    add("quasi_estimate", quad(p.A, rest), rep.eps * rep.eps * au * g * g, true);

    // Stated as bound <= ||Pu||^2 so every check reads lhs <= rhs.
    double pu2 = quad(p.M, pu);
    add("norm_pu", (1.0 - rep.eps * rep.eps * g * g) * au / hi, pu2, hi > 0);

    add("orthogonality", std::abs(rest.dot(p.A * pu)), 0.0, true);

    double hyp = rep.eps * g;
    bool closeness = hyp < 1.0;
    double lhs = dual_norm(p.A * pu - E * (p.M * pu), p.M);
    double rhs = closeness ? rep.eps * hi / std::sqrt(1.0 - hyp * hyp) * std::sqrt(pu2) : INFINITY;
    add("closeness", lhs, rhs, closeness);
    return rep;
}

QuasimodeReport quasimode_suite(const FormPencil& p, int index, double lo, double hi) {
    validate(p);
    if (!p.Q) fail_validation("quasimode checks need a compared form Q");
    if (index < 0 || index >= p.dim) fail_validation("eigenvector index out of range");
    GeneralizedEigen q = generalized_eigen(*p.Q, p.M);
    return quasimode_suite(p, q.values[index], lo, hi, q.vectors.col(index));
}

CampaignReport quasimode_campaign(int n, int trials, std::uint64_t seed) {
    if (n < 2 || n > 200) fail_validation("campaign dimension must lie in [2, 200]");
    if (trials < 1) fail_validation("trials must be positive");
    CampaignReport rep;
    rep.n = n;
    rep.trials = trials;
    rep.seed = seed;
    rep.lemma_names = {"resolvent", "quasi_estimate", "norm_pu", "orthogonality", "closeness"};
    rep.lemma_violations.assign(rep.lemma_names.size(), 0);

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    auto gauss = [&](int r, int c) {
        MatrixXd X(r, c);
        for (int j = 0; j < c; ++j)
            for (int i = 0; i < r; ++i) X(i, j) = normal(rng);
        return X;
    };

    for (int trial = 0; trial < trials; ++trial) {
        MatrixXd B = gauss(n, n);
        MatrixXd M = B.transpose() * B / n + 0.5 * MatrixXd::Identity(n, n);
        MatrixXd G = gauss(n, n);
        MatrixXd A = G.transpose() * G / n + 0.1 * MatrixXd::Identity(n, n);
        A = (0.5 * (A + A.transpose())).eval();
        M = (0.5 * (M + M.transpose())).eval();

        // Q = A + s L R L^T with ||R|| = 1 gives closeness exactly s.
        MatrixXd L = Eigen::LLT<MatrixXd>(A).matrixL();
        MatrixXd R = gauss(n, n);
        R = (0.5 * (R + R.transpose())).eval();
        R /= Eigen::SelfAdjointEigenSolver<MatrixXd>(R, Eigen::EigenvaluesOnly).eigenvalues().cwiseAbs().maxCoeff();
        MatrixXd S = L * R * L.transpose();
        S = (0.5 * (S + S.transpose())).eval();

        GeneralizedEigen ea = generalized_eigen(A, M);
        int j = static_cast<int>(unif(rng) * n) % n;
        double spread = (ea.values[n - 1] - ea.values[0]) / n;
        double d1 = (0.1 + 2.9 * unif(rng)) * spread;
        double d2 = (0.1 + 2.9 * unif(rng)) * spread;
        double frac = 0.05 + 0.94 * unif(rng);

        double Ea = ea.values[j];
        double lo_a = std::max(0.0, Ea - d1);
        double s = frac / (1.0 + Ea / std::min(Ea - lo_a, d2));
        FormPencil p{n, A, M, std::nullopt};
        double E = 0, lo = 0, hi = 0;
        bool ok = false;
        for (int attempt = 0; attempt < 60 && !ok; ++attempt, s *= 0.5) {
            p.Q = A + s * S;
            E = generalized_eigen(*p.Q, M).values[j];
            lo = std::max(0.0, E - d1);
            hi = E + d2;
            double delta = std::min(E - lo, hi - E);
            ok = delta > 0 && s * (1.0 + E / delta) < 1.0;
        }
        if (!ok) continue;
        ++rep.applicable;
        QuasimodeReport qr = quasimode_suite(p, j, lo, hi);
        for (size_t c = 0; c < qr.checks.size(); ++c) {
            auto& ch = qr.checks[c];
            if (!ch.applicable) continue;
            if (!ch.satisfied) {
                ++rep.violations;
                ++rep.lemma_violations[c];
            }
            if (ch.rhs > 0 && std::isfinite(ch.rhs)) rep.worst_ratio = std::max(rep.worst_ratio, ch.lhs / ch.rhs);
        }
    }
    return rep;
}

MatrixXd family_dot_A(const PencilFamily& family, double t, double h) {
    return (family(t + h).A - family(t - h).A) / (2 * h);
}

MatrixXd family_dot_M(const PencilFamily& family, double t, double h) {
    return (family(t + h).M - family(t - h).M) / (2 * h);
}

namespace {

struct Sample {
    double t = 0;
    int depth = 0;
    MatrixXd M;
    GeneralizedEigen eig;
};

Sample sample_at(const PencilFamily& family, double t, int depth) {
    FormPencil p = family(t);
    validate(p);
    return Sample{t, depth, p.M, generalized_eigen(p.A, p.M)};
}

struct Match {
    std::vector<int> col;  // branch -> column at the new point
    std::vector<VectorXd> vecs;
    std::vector<double> overlap;
    double worst = 1.0;
};

Match match_step(const std::vector<VectorXd>& cur, const Sample& next, double cluster_gap) {
    const int n = static_cast<int>(cur.size());
    const MatrixXd& V = next.eig.vectors;
    MatrixXd O(n, n);
    for (int b = 0; b < n; ++b) {
        VectorXd mb = next.M * cur[b];
        for (int j = 0; j < n; ++j) O(b, j) = std::abs(mb.dot(V.col(j)));
    }
    // Clusters of numerically equal eigenvalues: overlaps measured against the whole block.
    std::vector<int> cluster(n);
    int nc = 0;
    for (int j = 0; j < n; ++j) {
        double lam = next.eig.values[j];
        if (j > 0 && lam - next.eig.values[j - 1] < cluster_gap * std::max(1.0, std::abs(lam)))
            cluster[j] = cluster[j - 1];
        else
            cluster[j] = nc++;
    }
    MatrixXd cost(n, n);
    for (int b = 0; b < n; ++b)
        for (int j = 0; j < n; ++j) {
            double block = 0;
            for (int k = 0; k < n; ++k)
                if (cluster[k] == cluster[j]) block += O(b, k) * O(b, k);
            cost(b, j) = -std::sqrt(block) - 1e-6 * O(b, j);
        }
    Match m;
    m.col = hungarian(cost);
    m.vecs.resize(n);
    m.overlap.assign(n, 0.0);
    for (int c = 0; c < nc; ++c) {
        std::vector<int> cols, brs;
        for (int b = 0; b < n; ++b)
            if (cluster[m.col[b]] == c) {
                brs.push_back(b);
                cols.push_back(m.col[b]);
            }
        const int k = static_cast<int>(cols.size());
        if (k == 1) {
            VectorXd v = V.col(cols[0]);
            double o = (next.M * cur[brs[0]]).dot(v);
            if (o < 0) v = -v;
            m.vecs[brs[0]] = v;
            m.overlap[brs[0]] = std::abs(o);
            continue;
        }
        // Orthogonal Procrustes: rotate the block onto the incoming vectors.
        MatrixXd U(next.M.rows(), k), W(next.M.rows(), k);
        for (int i = 0; i < k; ++i) {
            U.col(i) = cur[brs[i]];
            W.col(i) = V.col(cols[i]);
        }
        MatrixXd C = U.transpose() * next.M * W;
        Eigen::JacobiSVD<MatrixXd> svd(C, Eigen::ComputeFullU | Eigen::ComputeFullV);
        MatrixXd Rot = svd.matrixV() * svd.matrixU().transpose();
        MatrixXd WR = W * Rot;
        for (int i = 0; i < k; ++i) {
            m.vecs[brs[i]] = WR.col(i);
            m.overlap[brs[i]] = (next.M * cur[brs[i]]).dot(WR.col(i));
        }
    }
    for (int b = 0; b < n; ++b) m.worst = std::min(m.worst, m.overlap[b]);
    return m;
}

}  // namespace

std::vector<EigenBranch> track_branches(const PencilFamily& family, const std::vector<double>& t_grid,
                                        const TrackOptions& opt) {
    if (t_grid.size() < 2) fail_validation("branch tracking needs at least two grid points");
    for (size_t i = 1; i < t_grid.size(); ++i)
        if (!(t_grid[i] > t_grid[i - 1])) fail_validation("t grid must be increasing");

    auto first = parallel_map<Sample>(t_grid.size(), [&](size_t i) { return sample_at(family, t_grid[i], 0); });
    std::vector<Sample> pts(first.begin(), first.end());
    const int n = static_cast<int>(pts[0].eig.values.size());
    int nb = opt.n_branches < 0 ? n : std::min(opt.n_branches, n);

    std::vector<VectorXd> cur(n);
    std::vector<int> rank(n);
    for (int b = 0; b < n; ++b) {
        cur[b] = pts[0].eig.vectors.col(b);
        rank[b] = b;
    }
    std::vector<EigenBranch> all(n);
    for (int b = 0; b < n; ++b) {
        all[b].t_grid.push_back(pts[0].t);
        all[b].values.push_back(pts[0].eig.values[b]);
        all[b].vectors.push_back(cur[b]);
    }

    size_t i = 0;
    while (i + 1 < pts.size()) {
        Match m = match_step(cur, pts[i + 1], opt.cluster_gap);
        int depth = std::max(pts[i].depth, pts[i + 1].depth) + 1;
        if (m.worst < opt.overlap_threshold && depth <= opt.max_refine) {
            double mid = 0.5 * (pts[i].t + pts[i + 1].t);
            pts.insert(pts.begin() + i + 1, sample_at(family, mid, depth));
            continue;
        }
        const int interval = static_cast<int>(i);
        for (int b = 0; b < n; ++b) {
            cur[b] = m.vecs[b];
            EigenBranch& br = all[b];
            br.t_grid.push_back(pts[i + 1].t);
            br.values.push_back(pts[i + 1].eig.values[m.col[b]]);
            br.vectors.push_back(cur[b]);
            br.overlaps.push_back(m.overlap[b]);
            if (m.overlap[b] < opt.overlap_threshold) br.uncertain.push_back(interval);
            if (m.col[b] != rank[b]) br.crossings.push_back(interval);
            rank[b] = m.col[b];
        }
        ++i;
    }
    all.resize(nb);
    return all;
}

VariationalCheck variational_check(const PencilFamily& family, double t, int index, double dt) {
    FormPencil p = family(t);
    validate(p);
    if (index < 0 || index >= p.dim) fail_validation("eigenvalue index out of range");
    GeneralizedEigen e = generalized_eigen(p.A, p.M);
    GeneralizedEigen ep = generalized_eigen(family(t + dt).A, family(t + dt).M);
    GeneralizedEigen em = generalized_eigen(family(t - dt).A, family(t - dt).M);
    VariationalCheck out;
    out.fd_derivative = (ep.values[index] - em.values[index]) / (2 * dt);
    VectorXd u = e.vectors.col(index);
    double h = std::min(1e-5, 0.25 * dt);
    MatrixXd Ad = family_dot_A(family, t, h), Md = family_dot_M(family, t, h);
    out.form_derivative = (quad(Ad, u) - e.values[index] * quad(Md, u)) / quad(p.M, u);
    out.difference = std::abs(out.fd_derivative - out.form_derivative);
    return out;
}

IntegrabilityReport integrability_diagnostic(const PencilFamily& family, double lo, double hi,
                                             const std::vector<double>& t_grid, double eps_over_t_bound) {
    if (!(hi > lo)) fail_validation("interval must have lo < hi");
    for (double t : t_grid)
        if (!(t > 0)) fail_validation("t grid must be positive");
    PencilFamily qfam = [&](double t) {
        FormPencil p = family(t);
        if (!p.Q) fail_validation("family lacks the compared form Q");
        FormPencil q{p.dim, *p.Q, p.M, std::nullopt};
        return q;
    };
    auto branches = track_branches(qfam, t_grid);
    double centre = 0.5 * (lo + hi);
    size_t pick = 0;
    for (size_t b = 1; b < branches.size(); ++b)
        if (std::abs(branches[b].values.front() - centre) < std::abs(branches[pick].values.front() - centre)) pick = b;
    const EigenBranch& br = branches[pick];

    IntegrabilityReport rep;
    rep.t = br.t_grid;
    rep.E = br.values;
    const size_t N = rep.t.size();
    rep.f.resize(N);
    rep.projection_ratio.resize(N);
    for (size_t i = 0; i < N; ++i) {
        double t = rep.t[i];
        FormPencil p = family(t);
        MatrixXd P = spectral_projector(p, lo, hi);
        const VectorXd& u = br.vectors[i];
        VectorXd pu = P * u;
        double h = std::min(1e-5, 0.25 * t);
        MatrixXd Ad = family_dot_A(family, t, h);
        double pn2 = quad(p.M, pu);
        double un = std::sqrt(quad(p.M, u));
        if (!(pn2 > 0)) {
            rep.f[i] = NAN;
            rep.projection_ratio[i] = INFINITY;
            rep.failures.push_back("projection vanishes at t = " + std::to_string(t));
            continue;
        }
        rep.f[i] = quad(Ad, pu) / pn2;
        rep.projection_ratio[i] = un / std::sqrt(pn2);

        double eot = epsilon_closeness(p) / t;
        rep.max_eps_over_t = std::max(rep.max_eps_over_t, eot);

        GeneralizedEigen d = generalized_eigen(Ad, p.A);
        double tol = 1e-7 * std::max(1.0, 1.0 / t);
        if (d.values.minCoeff() < -tol) rep.monotone_ok = false;
        if (d.values.maxCoeff() > 1.0 / t + tol) rep.log_bound_ok = false;
    }
    rep.C = *std::max_element(rep.projection_ratio.begin(), rep.projection_ratio.end());
    rep.closeness_ok = rep.max_eps_over_t <= eps_over_t_bound;
    if (!rep.closeness_ok) rep.failures.push_back("closeness/t exceeds bound");
    if (!rep.monotone_ok) rep.failures.push_back("a_dot is not nonnegative");
    if (!rep.log_bound_ok) rep.failures.push_back("a_dot exceeds a/t");

    rep.partial_integrals.assign(N, 0.0);
    for (size_t k = N - 1; k-- > 0;)
        rep.partial_integrals[k] =
            rep.partial_integrals[k + 1] + 0.5 * (rep.t[k + 1] - rep.t[k]) * (rep.f[k] + rep.f[k + 1]);
    return rep;
}

PencilFamily parse_family(const std::string& text) {
    struct Block {
        int n = 0;
        MatrixXd A, M;
        std::optional<MatrixXd> Q;
    };
    std::map<double, Block> blocks;
    std::istringstream in(text);
    std::string line;
    std::vector<std::vector<double>> rows;
    int cur_n = 0;
    double cur_t = 0;
    bool open = false;
    auto flush = [&] {
        if (!open) return;
        int n = cur_n;
        if (rows.size() != static_cast<size_t>(2 * n) && rows.size() != static_cast<size_t>(3 * n))
            fail_validation("family block at t = " + std::to_string(cur_t) + " needs 2n or 3n rows");
        auto take = [&](int off) {
            MatrixXd X(n, n);
            for (int i = 0; i < n; ++i) {
                if (rows[off + i].size() != static_cast<size_t>(n)) fail_validation("family row has wrong length");
                for (int j = 0; j < n; ++j) X(i, j) = rows[off + i][j];
            }
            return X;
        };
        Block b;
        b.n = n;
        b.A = take(0);
        b.M = take(n);
        if (rows.size() == static_cast<size_t>(3 * n)) b.Q = take(2 * n);
        if (blocks.count(cur_t)) fail_validation("duplicate t in family file");
        blocks[cur_t] = b;
        rows.clear();
        open = false;
    };
    while (std::getline(in, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        if (line.find("dim=") != std::string::npos) {
            flush();
            std::istringstream hs(line);
            std::string tok;
            bool got_n = false, got_t = false;
            while (hs >> tok) {
                if (tok.rfind("dim=", 0) == 0) {
                    cur_n = std::stoi(tok.substr(4));
                    got_n = true;
                } else if (tok.rfind("t=", 0) == 0) {
                    cur_t = std::stod(tok.substr(2));
                    got_t = true;
                }
            }
            if (!got_n || !got_t || cur_n <= 0) fail_validation("bad family header: " + line);
            open = true;
            continue;
        }
        if (!open) fail_validation("family data before the first header");
        std::vector<double> row;
        std::istringstream rs(line);
        std::string cell;
        while (std::getline(rs, cell, ',')) {
            try {
                row.push_back(std::stod(cell));
            } catch (const std::exception&) {
                fail_validation("bad number in family file: " + cell);
            }
        }
        rows.push_back(row);
    }
    flush();
    if (blocks.empty()) fail_validation("family file has no blocks");
    int n = blocks.begin()->second.n;
    bool hasQ = blocks.begin()->second.Q.has_value();
    for (auto& [t, b] : blocks) {
        if (b.n != n) fail_validation("family blocks disagree in dimension");
        if (b.Q.has_value() != hasQ) fail_validation("family blocks disagree on Q");
    }
    std::vector<double> ts;
    std::vector<Block> bs;
    for (auto& [t, b] : blocks) {
        ts.push_back(t);
        bs.push_back(b);
    }
    return [ts, bs, n](double t) {
        FormPencil p;
        p.dim = n;
        if (ts.size() == 1) {
            p.A = bs[0].A;
            p.M = bs[0].M;
            p.Q = bs[0].Q;
            return p;
        }
        // Linear in t between blocks, extended linearly past the ends.
        size_t k = std::upper_bound(ts.begin(), ts.end(), t) - ts.begin();
        k = std::clamp<size_t>(k, 1, ts.size() - 1);
        double w = (t - ts[k - 1]) / (ts[k] - ts[k - 1]);
        p.A = (1 - w) * bs[k - 1].A + w * bs[k].A;
        p.M = (1 - w) * bs[k - 1].M + w * bs[k].M;
        if (bs[0].Q) p.Q = MatrixXd((1 - w) * *bs[k - 1].Q + w * *bs[k].Q);
        return p;
    };
}

PencilFamily read_family(const std::string& path) {
    std::ifstream f(path);
    if (!f) fail_validation("cannot open family file " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_family(ss.str());
}

}  // namespace specdegen
