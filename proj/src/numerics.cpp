#include "upr/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace upr {

Matrix Matrix::identity(std::size_t n) {
    Matrix I(n, n);
    for (std::size_t i = 0; i < n; ++i) I(i, i) = 1.0;
    return I;
}

std::uint64_t Rng::mix_(std::uint64_t z) {
    z += kGolden;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t Rng::next_u64() {
    state_ += kGolden;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

double Rng::next_uniform() {
    // (0, 1]: take 53 high bits, shift away from zero
    return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
}

double Rng::next_gaussian() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u1 = next_uniform();
    double u2 = next_uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double theta = 2.0 * M_PI * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
}

Rng Rng::substream(std::uint64_t a, std::uint64_t b, std::uint64_t c) const {
    std::uint64_t s = state_;
    s = mix_(s ^ mix_(a));
    s = mix_(s ^ mix_(b));
    s = mix_(s ^ mix_(c));
    Rng out(0);
    out.state_ = s;
    return out;
}

Rng Rng::substream(std::string_view label, std::uint64_t a, std::uint64_t b) const {
    // FNV-1a over the label, then mixed with this stream's seed
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char ch : label) {
        h ^= static_cast<unsigned char>(ch);
        h *= 0x100000001b3ULL;
    }
    return substream(h, a, b);
}

namespace serial {

void matvec(const Matrix& A, const Vector& x, Vector& out) {
    if (x.size() != A.cols) throw DimensionError("matvec: x length != cols");
    out.assign(A.rows, 0.0);
    for (std::size_t i = 0; i < A.rows; ++i) {
        const double* row = A.data.data() + i * A.cols;
        double acc = 0.0;
        for (std::size_t j = 0; j < A.cols; ++j) acc += row[j] * x[j];
        out[i] = acc;
    }
}

void matvec_t(const Matrix& A, const Vector& r, Vector& out) {
    if (r.size() != A.rows) throw DimensionError("matvec_t: r length != rows");
    out.assign(A.cols, 0.0);
    for (std::size_t j = 0; j < A.cols; ++j) {
        double acc = 0.0;
        for (std::size_t i = 0; i < A.rows; ++i) acc += A.data[i * A.cols + j] * r[i];
        out[j] = acc;
    }
}

}  // namespace serial

// Parallel versions partition over independent outputs, so per-entry sums run
// in a fixed order and results are bit-identical to the serial reference.

void matvec(const Matrix& A, const Vector& x, Vector& out) {
    if (x.size() != A.cols) throw DimensionError("matvec: x length != cols");
    out.assign(A.rows, 0.0);
    const std::int64_t rows = static_cast<std::int64_t>(A.rows);
#pragma omp parallel for schedule(static) if (A.rows * A.cols > 16384)
    for (std::int64_t i = 0; i < rows; ++i) {
        const double* row = A.data.data() + i * A.cols;
        double acc = 0.0;
        for (std::size_t j = 0; j < A.cols; ++j) acc += row[j] * x[j];
        out[i] = acc;
    }
}

void matvec_t(const Matrix& A, const Vector& r, Vector& out) {
    if (r.size() != A.rows) throw DimensionError("matvec_t: r length != rows");
    out.assign(A.cols, 0.0);
    const std::int64_t cols = static_cast<std::int64_t>(A.cols);
#pragma omp parallel for schedule(static) if (A.rows * A.cols > 16384)
    for (std::int64_t j = 0; j < cols; ++j) {
        double acc = 0.0;
        for (std::size_t i = 0; i < A.rows; ++i) acc += A.data[i * A.cols + j] * r[i];
        out[j] = acc;
    }
}

Vector matvec(const Matrix& A, const Vector& x) {
    Vector out;
    matvec(A, x, out);
    return out;
}

Vector matvec_t(const Matrix& A, const Vector& r) {
    Vector out;
    matvec_t(A, r, out);
    return out;
}

double dot(const Vector& a, const Vector& b) {
    if (a.size() != b.size()) throw DimensionError("dot: length mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

double norm2_sq(const Vector& v) { return dot(v, v); }
double norm2(const Vector& v) { return std::sqrt(norm2_sq(v)); }

void axpy(double a, const Vector& x, Vector& y) {
    if (x.size() != y.size()) throw DimensionError("axpy: length mismatch");
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

Matrix gaussian_matrix(std::size_t rows, std::size_t cols, Rng& rng) {
    if (rows == 0 || cols == 0) throw DimensionError("gaussian_matrix: zero dimension");
    Matrix M(rows, cols);
    for (double& v : M.data) v = rng.next_gaussian();
    return M;
}

Vector gaussian_vector(std::size_t n, Rng& rng) {
    Vector v(n);
    for (double& x : v) x = rng.next_gaussian();
    return v;
}

std::vector<std::size_t> top_k_indices(const Vector& v, std::size_t k) {
    if (k > v.size()) throw ArgumentError("top_k_indices: k > len(v)");
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    // |v[a]| desc, ties by lowest index
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        return std::abs(v[a]) > std::abs(v[b]);
    });
    idx.resize(k);
    std::sort(idx.begin(), idx.end());
    return idx;
}

std::pair<Vector, double> power_iteration(const Matrix& M, int max_iters, double tol,
                                          Rng& rng) {
    if (M.rows != M.cols) throw DimensionError("power_iteration: non-square matrix");
    const std::size_t n = M.rows;
    Vector v = gaussian_vector(n, rng);
    double nv = norm2(v);
    if (nv == 0.0) {
        v.assign(n, 0.0);
        v[0] = 1.0;
    } else {
        for (double& x : v) x /= nv;
    }

    Vector w(n);
    for (int it = 0; it < max_iters; ++it) {
        matvec(M, v, w);
        double nw = norm2(w);
        if (nw == 0.0) {
            // zero matrix (or v in the null space): deterministic unit vector
            Vector e(n, 0.0);
            e[0] = 1.0;
            return {e, 0.0};
        }
        for (double& x : w) x /= nw;
        Vector diff = w;
        axpy(-1.0, v, diff);
        v = w;
        if (norm2(diff) < tol) break;
    }

    // sign convention: first nonzero coordinate nonnegative
    for (double x : v) {
        if (x != 0.0) {
            if (x < 0.0)
                for (double& y : v) y = -y;
            break;
        }
    }
    double lambda = dot(v, matvec(M, v));
    return {v, lambda};
}

Vector finite_diff_grad(const std::function<double(const Vector&)>& f, const Vector& x,
                        double h) {
    Vector g(x.size());
    Vector xp = x;
    for (std::size_t j = 0; j < x.size(); ++j) {
        double orig = xp[j];
        xp[j] = orig + h;
        double fp = f(xp);
        xp[j] = orig - h;
        double fm = f(xp);
        xp[j] = orig;
        g[j] = (fp - fm) / (2.0 * h);
    }
    return g;
}

}  // namespace upr
