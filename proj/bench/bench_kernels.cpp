// Compares the serial reference kernels against the OpenMP entry points:
// throughput side by side, plus a bitwise-equality check on every output.
//
//   bench_kernels [size ...]
//
// Sizes are square-ish matvec dimensions (default 256 1024 4096). Also times
// a batch backward pass, which is where the solver actually spends its time.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "upr/training.hpp"

using namespace upr;

namespace {

double now() {
    return std::chrono::duration<double>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

template <typename F>
double time_loop(F&& f, int reps) {
    f();  // warm up
    double t0 = now();
    for (int i = 0; i < reps; ++i) f();
    return (now() - t0) / reps;
}

void bench_matvec(std::size_t n) {
    Rng rng(7);
    std::size_t m = 2 * n;
    Matrix A = gaussian_matrix(m, n, rng);
    Vector x = gaussian_vector(n, rng);
    Vector r = gaussian_vector(m, rng);
    Vector out_s(m), out_p(m), outt_s(n), outt_p(n);
    int reps = static_cast<int>(std::max<std::size_t>(3, 50000000 / (m * n)));

    double ts = time_loop([&] { serial::matvec(A, x, out_s); }, reps);
    double tp = time_loop([&] { matvec(A, x, out_p); }, reps);
    double tst = time_loop([&] { serial::matvec_t(A, r, outt_s); }, reps);
    double tpt = time_loop([&] { matvec_t(A, r, outt_p); }, reps);
    bool same = out_s == out_p && outt_s == outt_p;

    std::printf("matvec   %5zux%-5zu serial %8.1f us  omp %8.1f us  speedup %4.2fx  %s\n",
                m, n, ts * 1e6, tp * 1e6, ts / tp, same ? "bitwise-equal" : "MISMATCH");
    std::printf("matvec_t %5zux%-5zu serial %8.1f us  omp %8.1f us  speedup %4.2fx\n", m, n,
                tst * 1e6, tpt * 1e6, tst / tpt);
    if (!same) std::exit(1);
}

void bench_backward() {
    // One minibatch of UPR-IRWF backward passes; parallelism is over samples.
    Rng rng(7);
    std::size_t n = 100, m = 300, L = 50, batch = 64;
    SensingMatrix A{gaussian_matrix(m, n, rng)};
    NetworkParams params = make_identity_params(L, 1.0, SolverKind::Irwf, A, {}, {});
    Dataset data = generate_dataset(n, n, batch, 7);
    TrainableMask mask{true, true};
    GradBundle grads = GradBundle::zeros_like(params);
    double t = time_loop(
        [&] {
            Rng r = rng.substream("bench");
            backward(params, std::span<const Vector>(data.samples), r, mask, grads);
        },
        3);
    std::printf("backward  batch=%zu n=%zu m=%zu L=%zu: %8.1f ms per batch\n", batch, n, m,
                L, t * 1e3);
}

}  // namespace

int main(int argc, char** argv) {
#ifdef _OPENMP
    std::printf("openmp: %d thread(s)\n", omp_get_max_threads());
#else
    std::printf("openmp: compiled out (serial build)\n");
#endif
    std::vector<std::size_t> sizes;
    for (int i = 1; i < argc; ++i) sizes.push_back(std::strtoul(argv[i], nullptr, 10));
    if (sizes.empty()) sizes = {256, 1024, 4096};
    for (std::size_t n : sizes) bench_matvec(n);
    bench_backward();
    return 0;
}
