#include <doctest.h>

#include <cmath>

#include "upr/phase_model.hpp"

using namespace upr;

TEST_CASE("encode takes absolute values") {
    SensingMatrix A{Matrix::identity(2)};
    CHECK(encode(A, {3, -4}) == Measurements{3, 4});
    CHECK(encode(A, {0, 0}) == Measurements{0, 0});
}

TEST_CASE("encode hand example") {
    SensingMatrix A{Matrix(2, 2)};
    A.A(0, 0) = 1; A.A(0, 1) = 1;
    A.A(1, 0) = 1; A.A(1, 1) = -1;
    CHECK(encode(A, {2, 1}) == Measurements{3, 1});
}

TEST_CASE("encode rejects dimension mismatch") {
    SensingMatrix A{Matrix::identity(2)};
    CHECK_THROWS_AS(encode(A, {1, 2, 3}), DimensionError);
}

TEST_CASE("phase_distance basics") {
    Vector x{1.5, -2.0, 0.5};
    CHECK(phase_distance(x, x) == 0.0);
    Vector neg = x;
    for (double& v : neg) v = -v;
    CHECK(phase_distance(x, neg) == 0.0);
    CHECK(phase_distance({1, 0}, {0, 1}) == doctest::Approx(2.0));
    CHECK_THROWS_AS(phase_distance({1}, {1, 2}), DimensionError);
}

TEST_CASE("phase_distance properties on random pairs") {
    Rng rng(3);
    for (int rep = 0; rep < 200; ++rep) {
        Vector a = gaussian_vector(6, rng);
        Vector b = gaussian_vector(6, rng);
        Vector na = a, nb = b;
        for (double& v : na) v = -v;
        for (double& v : nb) v = -v;
        double d = phase_distance(a, b);
        CHECK(d >= 0.0);
        CHECK(d == phase_distance(b, a));
        CHECK(d == phase_distance(na, b));
        CHECK(d == phase_distance(a, nb));
        CHECK(d > 0.0);  // random pairs are a.s. not sign-equal
    }
}

TEST_CASE("encode is invariant to a global sign flip") {
    Rng rng(4);
    SensingMatrix A{gaussian_matrix(8, 5, rng)};
    for (int rep = 0; rep < 50; ++rep) {
        Vector x = gaussian_vector(5, rng);
        Vector nx = x;
        for (double& v : nx) v = -v;
        CHECK(encode(A, x) == encode(A, nx));
        for (double v : encode(A, x)) CHECK(v >= 0.0);
    }
}

TEST_CASE("relative_mse definition and sign invariance") {
    Vector x{3, 4};
    CHECK(relative_mse(x, x) == 0.0);
    Vector nx{-3, -4};
    CHECK(relative_mse(nx, x) == 0.0);
    // D(0, x) / ||x|| = ||x||^2 / ||x|| = ||x||
    CHECK(relative_mse({0, 0}, x) == doctest::Approx(5.0));
    CHECK_THROWS_AS(relative_mse({1, 1}, {0, 0}), ArgumentError);
}

TEST_CASE("is_success is strict at 1e-5") {
    CHECK(is_success(1e-6));
    CHECK(!is_success(1e-5));
    CHECK(is_success(0.0));
    CHECK(!is_success(1.0));
}
