#pragma once

// Test-side reference implementations, kept independent of the library's
// compute paths: a cyclic-Jacobi eigensolver (the library uses a
// tridiagonalization-based solver) and central-difference helpers.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <vector>

#include "meib/matrix.hpp"
#include "meib/rng.hpp"

namespace meib::testing {

struct JacobiResult {
    std::vector<double> eigenvalues;  // ascending
    DenseMatrix eigenvectors;         // columns
};

/// Cyclic Jacobi rotations on a symmetric matrix.
inline JacobiResult jacobi_eig(const DenseMatrix& input) {
    const int n = input.rows();
    DenseMatrix a = input;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            const double v = 0.5 * (a(i, j) + a(j, i));
            a(i, j) = v;
            a(j, i) = v;
        }
    DenseMatrix v = DenseMatrix::identity(n);

    for (int sweep = 0; sweep < 200; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
        if (off < 1e-24) break;

        for (int p = 0; p < n; ++p) {
            for (int q = p + 1; q < n; ++q) {
                if (std::abs(a(p, q)) < 1e-300) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;

                for (int k = 0; k < n; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                for (int k = 0; k < n; ++k) {
                    const double vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int i, int j) { return a(i, i) < a(j, j); });

    JacobiResult result;
    result.eigenvalues.resize(n);
    result.eigenvectors = DenseMatrix(n, n);
    for (int c = 0; c < n; ++c) {
        result.eigenvalues[c] = a(order[c], order[c]);
        for (int r = 0; r < n; ++r) result.eigenvectors(r, c) = v(r, order[c]);
    }
    return result;
}

/// Central finite differences of a scalar function w.r.t. every entry of x.
inline DenseMatrix central_differences(const std::function<double(const DenseMatrix&)>& f,
                                       DenseMatrix x, double step = 1e-5) {
    DenseMatrix grad(x.rows(), x.cols());
    for (int r = 0; r < x.rows(); ++r)
        for (int c = 0; c < x.cols(); ++c) {
            const double saved = x(r, c);
            x(r, c) = saved + step;
            const double hi = f(x);
            x(r, c) = saved - step;
            const double lo = f(x);
            x(r, c) = saved;
            grad(r, c) = (hi - lo) / (2.0 * step);
        }
    return grad;
}

/// Largest relative error between analytic and numeric gradients over
/// entries whose magnitude exceeds the floor.
inline double max_relative_error(const DenseMatrix& analytic, const DenseMatrix& numeric,
                                 double magnitude_floor = 1e-6) {
    double worst = 0.0;
    for (int r = 0; r < analytic.rows(); ++r)
        for (int c = 0; c < analytic.cols(); ++c) {
            const double a = analytic(r, c);
            const double b = numeric(r, c);
            const double scale = std::max(std::abs(a), std::abs(b));
            if (scale <= magnitude_floor) continue;
            worst = std::max(worst, std::abs(a - b) / scale);
        }
    return worst;
}

inline DenseMatrix random_batch(Rng& rng, int n, int d, double scale = 1.0) {
    DenseMatrix m(n, d);
    for (double& v : m.data()) v = scale * rng.gaussian();
    return m;
}

} // namespace meib::testing
