#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string_view>
#include <utility>
#include <vector>

namespace upr {

using Vector = std::vector<double>;

/// Dense row-major real matrix.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;  // rows * cols, row-major

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

    double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

    static Matrix identity(std::size_t n);
};

/// Counter-based seeded generator (splitmix64 core). Labeled substreams are
/// derived by mixing the label into the seed, so parallel trials can each own
/// an independent, reproducible stream.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(mix_(seed ^ kGolden)) {}

    std::uint64_t next_u64();

    /// Uniform in (0, 1].
    double next_uniform();

    /// Standard normal via Box-Muller (second draw cached).
    double next_gaussian();

    /// Independent substream keyed by (this stream's seed, label words).
    Rng substream(std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0) const;
    Rng substream(std::string_view label, std::uint64_t a = 0, std::uint64_t b = 0) const;

private:
    static constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;
    static std::uint64_t mix_(std::uint64_t z);

    std::uint64_t state_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

struct DimensionError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct ArgumentError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// ---- kernels -------------------------------------------------------------
// Serial reference versions live in upr::serial; the unqualified entry points
// are OpenMP-parallel over independent rows/columns and bit-identical to the
// serial path (no cross-thread reductions).

namespace serial {
void matvec(const Matrix& A, const Vector& x, Vector& out);        // out = A x
void matvec_t(const Matrix& A, const Vector& r, Vector& out);      // out = A^T r
}  // namespace serial

void matvec(const Matrix& A, const Vector& x, Vector& out);
void matvec_t(const Matrix& A, const Vector& r, Vector& out);
Vector matvec(const Matrix& A, const Vector& x);
Vector matvec_t(const Matrix& A, const Vector& r);

double dot(const Vector& a, const Vector& b);
double norm2(const Vector& v);          // Euclidean norm
double norm2_sq(const Vector& v);
void axpy(double a, const Vector& x, Vector& y);  // y += a*x

// ---- operations ----------------------------------------------------------

/// i.i.d. N(0,1) entries, deterministic per rng state.
Matrix gaussian_matrix(std::size_t rows, std::size_t cols, Rng& rng);

Vector gaussian_vector(std::size_t n, Rng& rng);

/// Indices of the k largest-magnitude entries, ties broken by lowest index.
/// Returned sorted ascending.
std::vector<std::size_t> top_k_indices(const Vector& v, std::size_t k);

/// Leading eigenpair of a symmetric PSD matrix by power iteration.
/// Sign convention: first nonzero entry of the eigenvector is nonnegative.
/// Returns (unit eigenvector, Rayleigh quotient); (e0, 0) for the zero matrix.
std::pair<Vector, double> power_iteration(const Matrix& M, int max_iters, double tol,
                                          Rng& rng);

/// Central-difference gradient of f at x with step h.
Vector finite_diff_grad(const std::function<double(const Vector&)>& f, const Vector& x,
                        double h);

}  // namespace upr
