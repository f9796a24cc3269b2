#include "specdegen/lanczos.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>

#include "specdegen/errors.hpp"

namespace specdegen {

LanczosResult shift_invert_lanczos(const SparseMatrix& K, const SparseMatrix& M, int n, double shift, double tol,
                                   std::uint64_t seed) {
    const int N = static_cast<int>(K.rows());
    if (K.cols() != N || M.rows() != N || M.cols() != N) fail_validation("Lanczos: matrix shapes differ");
    if (n < 1 || n > N) fail_validation("Lanczos: requested count out of range");

    SparseMatrix S = K - shift * M;
    Eigen::SimplicialLLT<SparseMatrix> llt(S);
    if (llt.info() != Eigen::Success) throw NumericalError("Lanczos: shift is not below the spectrum");

    const int max_steps = std::min(N, std::max(4 * n + 40, 160));
    Eigen::MatrixXd Q(N, max_steps + 1);
    Eigen::MatrixXd MQ(N, max_steps + 1);
    std::vector<double> alpha, beta;

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    Eigen::VectorXd q(N);
    for (int i = 0; i < N; ++i) q[i] = unif(rng);
    Eigen::VectorXd mq = M * q;
    double nrm = std::sqrt(q.dot(mq));
    Q.col(0) = q / nrm;
    MQ.col(0) = mq / nrm;

    LanczosResult res;
    for (int j = 0; j < max_steps; ++j) {
        Eigen::VectorXd w = llt.solve(MQ.col(j));
        double a = w.dot(MQ.col(j));
        alpha.push_back(a);
        // Two passes of classical Gram-Schmidt in the M inner product.
        for (int pass = 0; pass < 2; ++pass) {
            Eigen::VectorXd c = MQ.leftCols(j + 1).transpose() * w;
            w -= Q.leftCols(j + 1) * c;
        }
        Eigen::VectorXd mw = M * w;
        double b = std::sqrt(std::max(0.0, w.dot(mw)));
        const int m = j + 1;

        bool check = m >= n && (m % 5 == 0 || m == max_steps || b < 1e-14 * std::abs(a));
        if (check) {
            Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);
            for (int i = 0; i < m; ++i) {
                T(i, i) = alpha[i];
                if (i + 1 < m) T(i, i + 1) = T(i + 1, i) = beta[i];
            }
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
            // Largest theta belong to the eigenvalues nearest the shift.
            double worst = 0.0;
            std::vector<double> vals;
            for (int i = 0; i < n; ++i) {
                int idx = m - 1 - i;
                double theta = es.eigenvalues()[idx];
                double r = std::abs(b * es.eigenvectors()(m - 1, idx)) / std::abs(theta);
                worst = std::max(worst, r);
                vals.push_back(shift + 1.0 / theta);
            }
            if (worst <= tol || b < 1e-14 * std::abs(a) || m == max_steps) {
                if (worst > tol && m == max_steps)
                    throw NumericalError("Lanczos: no convergence in " + std::to_string(m) + " steps");
                std::sort(vals.begin(), vals.end());
                res.values = vals;
                res.steps = m;
                res.max_residual = worst;
                return res;
            }
        }
        beta.push_back(b);
        Q.col(j + 1) = w / b;
        MQ.col(j + 1) = mw / b;
    }
    throw NumericalError("Lanczos: no convergence");
}

}  // namespace specdegen
