#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "ipd/errors.hpp"
#include "ipd/types.hpp"

namespace ipd {

template <class Scalar>
struct NnlsResultT {
    VectorX<Scalar> x;
    Scalar residual_norm = 0;
    int iterations = 0;
};

using NnlsResult = NnlsResultT<double>;

/// Lawson-Hanson active-set solver for min ||A x - b||_2 subject to x >= 0.
///
/// dual_tol is the stationarity tolerance on the dual w = A^T (b - A x),
/// scaled by max(1, ||A^T b||_inf). The iteration cap is
/// max_iter_factor * cols; exceeding it raises SolverError with a residual
/// report.
template <class Scalar>
NnlsResultT<Scalar> nnls_solve(const MatrixX<Scalar>& A, const VectorX<Scalar>& b,
                               Scalar dual_tol = Scalar(1e-10), int max_iter_factor = 10)
{
    const Index m = A.rows();
    const Index n = A.cols();
    if (m == 0 || n == 0 || b.size() != m)
        throw InvalidInput("nnls_solve: empty system or size mismatch");

    VectorX<Scalar> x = VectorX<Scalar>::Zero(n);
    std::vector<bool> passive(size_t(n), false);
    Index n_passive = 0;

    const Scalar tol = dual_tol * std::max(Scalar(1), (A.transpose() * b).template lpNorm<Eigen::Infinity>());
    const long cap = long(max_iter_factor) * long(n);
    long iter = 0;

    VectorX<Scalar> w = A.transpose() * (b - A * x);

    auto solve_passive = [&](VectorX<Scalar>& z) {
        MatrixX<Scalar> Ap(m, n_passive);
        Index k = 0;
        for (Index j = 0; j < n; ++j)
            if (passive[size_t(j)])
                Ap.col(k++) = A.col(j);
        const VectorX<Scalar> zp = Ap.colPivHouseholderQr().solve(b);
        z.setZero(n);
        k = 0;
        for (Index j = 0; j < n; ++j)
            if (passive[size_t(j)])
                z[j] = zp[k++];
    };

    while (n_passive < n) {
        // Select the most violated dual coordinate among the active set.
        Index t = -1;
        Scalar wmax = tol;
        for (Index j = 0; j < n; ++j)
            if (!passive[size_t(j)] && w[j] > wmax) {
                wmax = w[j];
                t = j;
            }
        if (t < 0)
            break; // KKT satisfied
        passive[size_t(t)] = true;
        ++n_passive;

        VectorX<Scalar> z(n);
        for (;;) {
            if (++iter > cap) {
                const Scalar res = (b - A * x).norm();
                throw SolverError("nnls_solve: iteration cap " + std::to_string(cap) +
                                  " exceeded, residual " + std::to_string(double(res)));
            }
            solve_passive(z);

            bool feasible = true;
            for (Index j = 0; j < n; ++j)
                if (passive[size_t(j)] && !(z[j] > Scalar(0))) {
                    feasible = false;
                    break;
                }
            if (feasible) {
                x = z;
                break;
            }

            // Step toward z until the first passive coordinate hits zero.
            Scalar alpha = std::numeric_limits<Scalar>::max();
            for (Index j = 0; j < n; ++j)
                if (passive[size_t(j)] && z[j] <= Scalar(0)) {
                    const Scalar a = x[j] / (x[j] - z[j]);
                    alpha = std::min(alpha, a);
                }
            x += alpha * (z - x);
            for (Index j = 0; j < n; ++j)
                if (passive[size_t(j)] && x[j] <= Scalar(0)) {
                    x[j] = Scalar(0);
                    passive[size_t(j)] = false;
                    --n_passive;
                }
        }
        w = A.transpose() * (b - A * x);
    }

    NnlsResultT<Scalar> out;
    out.x = std::move(x);
    out.residual_norm = (b - A * out.x).norm();
    out.iterations = int(iter);
    return out;
}

} // namespace ipd
