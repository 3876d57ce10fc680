#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "upr/solvers.hpp"

using namespace upr;

namespace {

SensingMatrix random_sensing(std::size_t m, std::size_t n, Rng& rng) {
    return SensingMatrix{gaussian_matrix(m, n, rng)};
}

}  // namespace

TEST_CASE("hard_threshold keeps the s largest magnitudes") {
    CHECK(hard_threshold({3, -5, 1}, 2) == Vector{3, -5, 0});
    CHECK(hard_threshold({1, 2, 3}, 3) == Vector{1, 2, 3});
    CHECK(hard_threshold({1, 2, 3}, 0) == Vector{0, 0, 0});
    // idempotent, and identity on already-sparse input
    Vector v{0, 7, 0, -2};
    CHECK(hard_threshold(hard_threshold(v, 2), 2) == hard_threshold(v, 2));
    CHECK(hard_threshold(v, 3) == v);
}

TEST_CASE("sparta_support_estimate recovers the support under identity sensing") {
    std::size_t n = 6;
    Vector x{0, 2.5, 0, -1.5, 0, 0};
    SensingMatrix A{Matrix::identity(n)};
    Measurements y = encode(A, x);
    CHECK(sparta_support_estimate(A, y, 2) == std::vector<std::size_t>{1, 3});
}

TEST_CASE("sparta_support_estimate edge cases") {
    Rng rng(2);
    SensingMatrix A = random_sensing(5, 4, rng);
    Measurements zero(5, 0.0);
    CHECK(sparta_support_estimate(A, zero, 2) == std::vector<std::size_t>{0, 1});
    Measurements y = encode(A, {1, 2, 3, 4});
    CHECK(sparta_support_estimate(A, y, 4) == std::vector<std::size_t>{0, 1, 2, 3});
    CHECK_THROWS_AS(sparta_support_estimate(A, y, 5), ArgumentError);
}

TEST_CASE("sparta_init norm, support, and the identity example") {
    SpartaConfig cfg;
    cfg.s = 1;
    Rng rng(10);

    SUBCASE("hand example: A = I(4), x = 5 e0") {
        SensingMatrix A{Matrix::identity(4)};
        Measurements y = encode(A, {5, 0, 0, 0});
        Vector z0 = sparta_init(A, y, cfg, rng);
        CHECK(z0[0] == doctest::Approx(2.5).epsilon(1e-12));
        CHECK(z0[1] == 0.0);
        CHECK(z0[2] == 0.0);
        CHECK(z0[3] == 0.0);
    }

    SUBCASE("norm equals sqrt(sum y^2 / m); zeros off support") {
        cfg.s = 3;
        for (int rep = 0; rep < 20; ++rep) {
            SensingMatrix A = random_sensing(24, 8, rng);
            Vector x = test::random_sparse_signal(8, 3, rng);
            Measurements y = encode(A, x);
            Vector z0 = sparta_init(A, y, cfg, rng);
            double sum_y2 = 0.0;
            for (double v : y) sum_y2 += v * v;
            CHECK(norm2(z0) == doctest::Approx(std::sqrt(sum_y2 / 24.0)).epsilon(1e-12));
            std::size_t nonzeros = 0;
            for (double v : z0) nonzeros += v != 0.0;
            CHECK(nonzeros <= 3);
        }
    }

    SUBCASE("all-zero y degenerates to the zero vector") {
        SensingMatrix A = random_sensing(4, 3, rng);
        CHECK(sparta_init(A, Measurements(4, 0.0), cfg, rng) == Vector(3, 0.0));
    }
}

TEST_CASE("sparta_truncation_set") {
    Rng rng(20);
    SensingMatrix A = random_sensing(12, 5, rng);
    Vector x = test::random_sparse_signal(5, 2, rng);
    Measurements y = encode(A, x);

    SUBCASE("truth keeps the full set") {
        CHECK(sparta_truncation_set(A, y, x, 0.7).size() == 12);
    }
    SUBCASE("huge tau keeps the full set") {
        Vector z = gaussian_vector(5, rng);
        CHECK(sparta_truncation_set(A, y, z, 1e12).size() == 12);
    }
    SUBCASE("hand example excludes everything") {
        SensingMatrix A1{Matrix(2, 1)};
        A1.A(0, 0) = 1;
        A1.A(1, 0) = 1;
        CHECK(sparta_truncation_set(A1, {4, 4}, {1}, 1.0).empty());
    }
    SUBCASE("monotone in tau") {
        Vector z = gaussian_vector(5, rng);
        auto s1 = sparta_truncation_set(A, y, z, 0.3);
        auto s2 = sparta_truncation_set(A, y, z, 0.9);
        for (std::size_t i : s1)
            CHECK(std::find(s2.begin(), s2.end(), i) != s2.end());
    }
}

TEST_CASE("sparta_gradient") {
    SUBCASE("vanishes at the truth over the full set") {
        Rng rng(30);
        SensingMatrix A = random_sensing(10, 4, rng);
        Vector x = test::random_sparse_signal(4, 2, rng);
        Measurements y = encode(A, x);
        std::vector<std::size_t> full(10);
        for (std::size_t i = 0; i < 10; ++i) full[i] = i;
        for (double v : sparta_gradient(A, y, x, full, true)) CHECK(v == 0.0);
    }
    SUBCASE("empty set gives the zero vector") {
        Rng rng(31);
        SensingMatrix A = random_sensing(6, 3, rng);
        Measurements y = encode(A, {1, 0, 0});
        for (double v : sparta_gradient(A, y, {0.5, 1, 2}, {}, true)) CHECK(v == 0.0);
    }
    SUBCASE("single-term hand evaluation") {
        SensingMatrix A{Matrix(1, 2)};
        A.A(0, 0) = 2;
        Vector g = sparta_gradient(A, {2}, {2, 0}, {0}, true);
        CHECK(g[0] == doctest::Approx(4.0));
        CHECK(g[1] == 0.0);
    }
}

TEST_CASE("sparta_step") {
    Rng rng(40);
    SpartaConfig cfg;
    cfg.s = 2;
    SensingMatrix A = random_sensing(14, 6, rng);
    Vector x = test::random_sparse_signal(6, 2, rng);
    Measurements y = encode(A, x);

    SUBCASE("truth is a fixed point") {
        Vector next = sparta_step(A, y, x, cfg);
        for (std::size_t j = 0; j < 6; ++j) CHECK(next[j] == doctest::Approx(x[j]).epsilon(1e-14));
    }
    SUBCASE("alpha = 0 reduces to hard thresholding") {
        cfg.alpha = 0.0;
        Vector z = gaussian_vector(6, rng);
        CHECK(sparta_step(A, y, z, cfg) == hard_threshold(z, 2));
    }
}

TEST_CASE("irwf_init") {
    Rng rng(50);
    SUBCASE("hand example: A = I(2), x = e0") {
        SensingMatrix A{Matrix::identity(2)};
        Measurements y = encode(A, {1, 0});
        Vector z0 = irwf_init(A, y, 100, rng);
        CHECK(z0[0] == doctest::Approx(std::sqrt(M_PI / 2.0) * 0.5).epsilon(1e-10));
        CHECK(std::abs(z0[1]) < 1e-10);
    }
    SUBCASE("norm and collinearity with the leading eigenvector of Y") {
        SensingMatrix A = random_sensing(40, 5, rng);
        Vector x = gaussian_vector(5, rng);
        Measurements y = encode(A, x);
        Vector z0 = irwf_init(A, y, 200, rng);
        double mean_y = 0.0;
        for (double v : y) mean_y += v;
        mean_y /= 40.0;
        CHECK(norm2(z0) == doctest::Approx(std::sqrt(M_PI / 2.0) * mean_y).epsilon(1e-12));

        Matrix Y(5, 5);
        for (std::size_t i = 0; i < 40; ++i)
            for (std::size_t r = 0; r < 5; ++r)
                for (std::size_t c = 0; c < 5; ++c)
                    Y(r, c) += y[i] * A.A(i, r) * A.A(i, c) / 40.0;
        std::vector<double> evals;
        std::vector<Vector> evecs;
        test::jacobi_eigen(Y, evals, evecs);
        double cosang = std::abs(dot(z0, evecs[0])) / norm2(z0);
        CHECK(cosang >= 1.0 - 1e-8);
    }
    SUBCASE("zero measurements degenerate to zero") {
        SensingMatrix A = random_sensing(4, 3, rng);
        CHECK(irwf_init(A, Measurements(4, 0.0), 50, rng) == Vector(3, 0.0));
    }
}

TEST_CASE("irwf_gradient") {
    Rng rng(60);
    SUBCASE("vanishes at +-x") {
        SensingMatrix A = random_sensing(12, 4, rng);
        Vector x = gaussian_vector(4, rng);
        Measurements y = encode(A, x);
        Vector nx = x;
        for (double& v : nx) v = -v;
        for (double v : irwf_gradient(A, y, x, true)) CHECK(v == doctest::Approx(0.0));
        for (double v : irwf_gradient(A, y, nx, true)) CHECK(v == doctest::Approx(0.0));
    }
    SUBCASE("hand example") {
        SensingMatrix A{Matrix(2, 2)};
        A.A(0, 0) = 1;
        A.A(1, 1) = 2;
        Measurements y = encode(A, {1, 1});  // (1, 2)
        Vector g = irwf_gradient(A, y, {2, 0}, true);
        CHECK(g[0] == doctest::Approx(0.5));
        CHECK(g[1] == doctest::Approx(0.0));
    }
    SUBCASE("odd symmetry") {
        SensingMatrix A = random_sensing(10, 4, rng);
        Measurements y = encode(A, gaussian_vector(4, rng));
        for (int rep = 0; rep < 20; ++rep) {
            Vector z = gaussian_vector(4, rng);
            Vector nz = z;
            for (double& v : nz) v = -v;
            Vector g = irwf_gradient(A, y, z, true);
            Vector gn = irwf_gradient(A, y, nz, true);
            for (std::size_t j = 0; j < 4; ++j) CHECK(gn[j] == doctest::Approx(-g[j]));
        }
    }
}

TEST_CASE("gradients match finite differences of their losses at generic points") {
    Rng rng(70);
    const std::size_t m = 12, n = 5;
    SensingMatrix A = random_sensing(m, n, rng);
    Vector x = gaussian_vector(n, rng);
    Measurements y = encode(A, x);

    Vector z;
    double margin = 0.0;
    while (margin < 1e-2) {  // stay away from sign flips
        z = gaussian_vector(n, rng);
        margin = 1e300;
        for (double p : matvec(A.A, z)) margin = std::min(margin, std::abs(p));
    }

    SUBCASE("irwf: loss (1/2m) || y - |Az| ||^2") {
        auto loss = [&](const Vector& v) {
            Measurements yz = encode(A, v);
            double acc = 0.0;
            for (std::size_t i = 0; i < m; ++i) acc += (y[i] - yz[i]) * (y[i] - yz[i]);
            return acc / (2.0 * m);
        };
        Vector g = irwf_gradient(A, y, z, true);
        Vector fd = finite_diff_grad(loss, z, 1e-6);
        for (std::size_t j = 0; j < n; ++j)
            CHECK(std::abs(g[j] - fd[j]) <= 1e-6 * std::max(1.0, std::abs(fd[j])));
    }

    SUBCASE("sparta: truncated loss on a frozen index set") {
        auto iset = sparta_truncation_set(A, y, z, 0.7);
        auto loss = [&](const Vector& v) {
            Vector p = matvec(A.A, v);
            double acc = 0.0;
            for (std::size_t i : iset) acc += (std::abs(p[i]) - y[i]) * (std::abs(p[i]) - y[i]);
            return acc / (2.0 * m);
        };
        Vector g = sparta_gradient(A, y, z, iset, true);
        Vector fd = finite_diff_grad(loss, z, 1e-6);
        for (std::size_t j = 0; j < n; ++j)
            CHECK(std::abs(g[j] - fd[j]) <= 1e-6 * std::max(1.0, std::abs(fd[j])));
    }
}

TEST_CASE("run_baseline traces") {
    Rng rng(80);
    BaselineConfig cfg;
    cfg.kind = SolverKind::Irwf;
    SensingMatrix A = random_sensing(20, 5, rng);
    Vector x = gaussian_vector(5, rng);
    Measurements y = encode(A, x);

    SUBCASE("L = 0 contains only the initialization") {
        Rng r1(1);
        SolverTrace tr = run_baseline(cfg, A, y, 0, x, r1);
        CHECK(tr.iterates.size() == 1);
        CHECK(tr.rel_mse_per_iter.size() == 1);
    }
    SUBCASE("composition law: trace[t+1] = step(trace[t])") {
        Rng r1(1);
        SolverTrace tr = run_baseline(cfg, A, y, 5, std::nullopt, r1);
        CHECK(tr.iterates.size() == 6);
        for (std::size_t t = 0; t + 1 < tr.iterates.size(); ++t)
            CHECK(tr.iterates[t + 1] == irwf_step(A, y, tr.iterates[t], cfg.irwf));
    }
    SUBCASE("sparta composition law") {
        cfg.kind = SolverKind::Sparta;
        cfg.sparta.s = 2;
        Vector xs = test::random_sparse_signal(5, 2, rng);
        Measurements ys = encode(A, xs);
        Rng r1(1);
        SolverTrace tr = run_baseline(cfg, A, ys, 4, std::nullopt, r1);
        for (std::size_t t = 0; t + 1 < tr.iterates.size(); ++t)
            CHECK(tr.iterates[t + 1] == sparta_step(A, ys, tr.iterates[t], cfg.sparta));
    }
}
