#pragma once

// Test-only oracles, independent of the library's solver paths.

#include <algorithm>
#include <cmath>
#include <vector>

#include "upr/numerics.hpp"

namespace upr::test {

/// Full eigendecomposition of a small symmetric matrix by cyclic Jacobi
/// rotations. Returns eigenvalues descending with matching unit eigenvectors.
inline void jacobi_eigen(const Matrix& M, std::vector<double>& values,
                         std::vector<Vector>& vectors) {
    const std::size_t n = M.rows;
    Matrix A = M;
    Matrix V = Matrix::identity(n);
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off += A(p, q) * A(p, q);
        if (off < 1e-24) break;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                if (std::abs(A(p, q)) < 1e-300) continue;
                double theta = 0.5 * std::atan2(2.0 * A(p, q), A(q, q) - A(p, p));
                double c = std::cos(theta), s = std::sin(theta);
                for (std::size_t i = 0; i < n; ++i) {
                    double aip = A(i, p), aiq = A(i, q);
                    A(i, p) = c * aip - s * aiq;
                    A(i, q) = s * aip + c * aiq;
                }
                for (std::size_t j = 0; j < n; ++j) {
                    double apj = A(p, j), aqj = A(q, j);
                    A(p, j) = c * apj - s * aqj;
                    A(q, j) = s * apj + c * aqj;
                }
                for (std::size_t i = 0; i < n; ++i) {
                    double vip = V(i, p), viq = V(i, q);
                    V(i, p) = c * vip - s * viq;
                    V(i, q) = s * vip + c * viq;
                }
            }
        }
    }
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return A(a, a) > A(b, b); });
    values.clear();
    vectors.clear();
    for (std::size_t idx : order) {
        values.push_back(A(idx, idx));
        Vector v(n);
        for (std::size_t i = 0; i < n; ++i) v[i] = V(i, idx);
        vectors.push_back(std::move(v));
    }
}

inline Matrix random_spd(std::size_t n, Rng& rng) {
    Matrix B = gaussian_matrix(n, n, rng);
    Matrix M(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            double acc = 0.0;
            for (std::size_t k = 0; k < n; ++k) acc += B(k, i) * B(k, j);
            M(i, j) = acc;
        }
    return M;
}

inline Vector random_sparse_signal(std::size_t n, std::size_t k, Rng& rng) {
    Vector x(n, 0.0);
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    for (std::size_t j = 0; j < k; ++j) {
        std::size_t r = j + static_cast<std::size_t>(rng.next_u64() % (n - j));
        std::swap(idx[j], idx[r]);
    }
    for (std::size_t j = 0; j < k; ++j) x[idx[j]] = rng.next_gaussian();
    return x;
}

}  // namespace upr::test
