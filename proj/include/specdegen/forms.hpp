#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace specdegen {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// a(v, w) = v^T A w, <v, w> = v^T M w, q(v, w) = v^T Q w.
struct FormPencil {
    int dim = 0;
    MatrixXd A, M;
    std::optional<MatrixXd> Q;
};

// Throws ValidationError on shape/symmetry problems, DomainError if M is not positive definite.
void validate(const FormPencil& p);

struct GeneralizedEigen {
    VectorXd values;   // ascending
    MatrixXd vectors;  // columns, V^T M V = I
};
GeneralizedEigen generalized_eigen(const MatrixXd& A, const MatrixXd& M);

// Spectral radius of A^{-1/2} (Q - A) A^{-1/2}.
double epsilon_closeness(const FormPencil& p);

// M-orthogonal projector onto eigenvectors of (A, M) with eigenvalue in [lo, hi].
MatrixXd spectral_projector(const FormPencil& p, double lo, double hi);
MatrixXd spectral_projector(const GeneralizedEigen& eig, const MatrixXd& M, double lo, double hi);

// sqrt(r^T M^{-1} r): the dual norm of v -> r^T v against ||v||_M.
double dual_norm(const VectorXd& r, const MatrixXd& M);

struct LemmaCheck {
    std::string name;
    double lhs = 0.0, rhs = 0.0;
    bool applicable = true;
    bool satisfied = true;
};

struct QuasimodeReport {
    double E = 0.0;
    double lo = 0.0, hi = 0.0;
    double delta = 0.0;       // distance from E to the complement of (lo, hi)
    double spec_dist = 0.0;   // distance from E to spec(A, M)
    double eps = 0.0;
    std::vector<LemmaCheck> checks;  // resolvent, quasi_estimate, norm_pu, orthogonality, closeness
    int violations() const;
};

// u must satisfy Q u = E M u; E strictly inside (lo, hi).
QuasimodeReport quasimode_suite(const FormPencil& p, double E, double lo, double hi, const VectorXd& u);
// Same, with u the index-th eigenvector of (Q, M) (0-based).
QuasimodeReport quasimode_suite(const FormPencil& p, int index, double lo, double hi);

struct CampaignReport {
    int n = 0, trials = 0;
    std::uint64_t seed = 0;
    int applicable = 0;
    int violations = 0;
    std::vector<std::string> lemma_names;
    std::vector<int> lemma_violations;
    double worst_ratio = 0.0;  // max lhs/rhs over applicable checks
};

// Seeded random SPD pencils with controlled closeness.
CampaignReport quasimode_campaign(int n, int trials, std::uint64_t seed);

using PencilFamily = std::function<FormPencil(double)>;

struct EigenBranch {
    std::vector<double> t_grid;
    std::vector<double> values;
    std::vector<VectorXd> vectors;  // unit M-norm, sign-aligned
    std::vector<int> crossings;     // interval i: (t_i, t_{i+1}) changes sorted rank
    std::vector<int> uncertain;     // intervals where matching stayed below the overlap threshold
    std::vector<double> overlaps;   // per interval
};

struct TrackOptions {
    double overlap_threshold = 0.9;
    int max_refine = 12;
    double cluster_gap = 1e-10;
    int n_branches = -1;  // -1: all
};

// Branches are tracked on a refined grid containing t_grid; each branch reports that grid.
std::vector<EigenBranch> track_branches(const PencilFamily& family, const std::vector<double>& t_grid,
                                        const TrackOptions& opt = {});

// dA/dt and dM/dt by central differences.
MatrixXd family_dot_A(const PencilFamily& family, double t, double h = 1e-5);
MatrixXd family_dot_M(const PencilFamily& family, double t, double h = 1e-5);

struct VariationalCheck {
    double fd_derivative = 0.0;     // (lambda(t+dt) - lambda(t-dt)) / (2 dt)
    double form_derivative = 0.0;   // (a_dot(u) - lambda m_dot(u)) / ||u||^2
    double difference = 0.0;
};
// The index-th eigenvalue in sorted order; callers keep t away from crossings.
VariationalCheck variational_check(const PencilFamily& family, double t, int index, double dt);

struct IntegrabilityReport {
    std::vector<double> t;
    std::vector<double> E;
    std::vector<double> f;                  // a_dot(P u)/||P u||^2
    std::vector<double> partial_integrals;  // int_{t_i}^{t_last} f
    std::vector<double> projection_ratio;   // ||u|| / ||P u||
    double max_eps_over_t = 0.0;
    double C = 0.0;  // max projection_ratio
    bool closeness_ok = true;
    bool monotone_ok = true;
    bool log_bound_ok = true;
    std::vector<std::string> failures;
};

// Family pencils carry Q(t) for the q-form. The q-branch followed is the one whose value
// at the smallest t is nearest the centre of [lo, hi].
IntegrabilityReport integrability_diagnostic(const PencilFamily& family, double lo, double hi,
                                             const std::vector<double>& t_grid, double eps_over_t_bound = 1e3);

// Piecewise-linear family from blocks "dim=<n> t=<value>" followed by n rows of A, n of M
// and optionally n of Q (comma separated).
PencilFamily read_family(const std::string& path);
PencilFamily parse_family(const std::string& text);

}  // namespace specdegen
