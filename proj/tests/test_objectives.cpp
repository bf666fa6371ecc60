#include <catch2/catch.hpp>

#include <cmath>
#include <numbers>

#include "cbo/objectives.hpp"
#include "cbo/rng.hpp"

using namespace cbo;

TEST_CASE("builtin objectives evaluate to their defining formulas") {
    SECTION("quadratic at the minimizer") {
        const auto spec = builtin("quadratic", 2, {0.0, 0.0});
        CHECK(spec.eval(Vec{0.0, 0.0}) == 0.0);
    }
    SECTION("rastrigin 1d") {
        const auto spec = builtin("rastrigin", 1, {0.0});
        // 0.25 + 10 - 10 cos(pi)
        const double expected = 0.25 + 10.0 - 10.0 * std::cos(std::numbers::pi);
        CHECK(expected == Approx(20.25).epsilon(1e-14));
        CHECK(spec.eval(Vec{0.5}) == Approx(expected).epsilon(1e-14));
    }
    SECTION("quartic perturbation 1d") {
        const auto spec = builtin("quartic_quad", 1, {0.0});
        CHECK(spec.eval(Vec{1.0}) == Approx(0.6).epsilon(1e-14));
    }
    SECTION("ackley is zero at the shift and bounded") {
        const auto spec = builtin("ackley", 2, {1.0, -2.0});
        CHECK(spec.eval(Vec{1.0, -2.0}) == Approx(0.0).margin(1e-12));
        CHECK(spec.eval(Vec{900.0, 900.0}) < 22.72);
    }
    SECTION("unknown name and bad shift are rejected") {
        CHECK_THROWS_AS(builtin("sphere", 2, {0.0, 0.0}), std::invalid_argument);
        CHECK_THROWS_AS(builtin("quadratic", 2, {0.0}), std::invalid_argument);
        CHECK_THROWS_AS(builtin("quadratic", 0, {}), std::invalid_argument);
    }
}

TEST_CASE("evaluate_batch preserves order and validates input") {
    const auto spec = builtin("quadratic", 1, {0.0});
    Matrix rows(2, 1);
    rows(0, 0) = 0.0;
    rows(1, 0) = 2.0;
    const Vec values = evaluate_batch(spec, rows);
    CHECK(values == Vec{0.0, 2.0});

    CHECK(evaluate_batch(spec, Matrix(0, 1)).empty());

    const auto r2 = builtin("rastrigin", 2, {0.0, 0.0});
    Matrix one(1, 2);
    one(0, 0) = 0.5;
    one(0, 1) = 0.5;
    const double expected = 0.5 + 20.0 - 20.0 * std::cos(std::numbers::pi);
    CHECK(expected == Approx(40.5).epsilon(1e-14));
    CHECK(evaluate_batch(r2, one)[0] == Approx(expected).epsilon(1e-14));

    Matrix bad(1, 1);
    bad(0, 0) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(evaluate_batch(spec, bad), std::invalid_argument);
}

TEST_CASE("evaluate_batch of a permuted matrix is the permuted value vector") {
    const auto spec = builtin("quartic_quad", 3, {0.1, -0.2, 0.3});
    const std::size_t n = 17;
    Matrix a(n, 3), b(n, 3);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < 3; ++j)
            a(i, j) = gaussian_at(5, Stream::scratch, static_cast<std::uint32_t>(i),
                                  static_cast<std::uint32_t>(j), 0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < 3; ++j) b(i, j) = a(n - 1 - i, j);
    const Vec va = evaluate_batch(spec, a);
    const Vec vb = evaluate_batch(spec, b);
    for (std::size_t i = 0; i < n; ++i) CHECK(vb[i] == va[n - 1 - i]);
}

TEST_CASE("growth bound holds for the declared constants") {
    SECTION("quadratic: equality everywhere") {
        const auto spec = builtin("quadratic", 2, {0.0, 0.0});
        for (const double radius : {1.0, 10.0, 100.0})
            CHECK(check_growth(spec, radius, 500, 13).pass);
    }
    SECTION("rastrigin: cosine deficit is nonnegative") {
        const auto spec = builtin("rastrigin", 2, {0.3, -0.3});
        for (const double radius : {1.0, 10.0, 100.0})
            CHECK(check_growth(spec, radius, 500, 13).pass);
    }
    SECTION("quartic") {
        const auto spec = builtin("quartic_quad", 3, {0.0, 0.0, 0.0});
        for (const double radius : {1.0, 10.0, 100.0})
            CHECK(check_growth(spec, radius, 500, 13).pass);
    }
    SECTION("ackley fails at large radius: bounded value vs quadratic demand") {
        const auto spec = builtin("ackley", 2, {0.0, 0.0});
        const auto report = check_growth(spec, 100.0, 500, 13);
        CHECK_FALSE(report.pass);
        CHECK(report.worst_violation < -400.0);
    }
    SECTION("input validation") {
        const auto spec = builtin("quadratic", 1, {0.0});
        CHECK_THROWS_AS(check_growth(spec, 0.0, 10, 1), std::invalid_argument);
        CHECK_THROWS_AS(check_growth(spec, 1.0, 0, 1), std::invalid_argument);
    }
}

TEST_CASE("the shift is the unique sampled minimizer") {
    for (const std::string name : {"quadratic", "quartic_quad", "rastrigin", "ackley"}) {
        const auto spec = builtin(name, 2, {0.4, -0.1});
        CHECK(spec.eval(spec.x_star) == Approx(spec.f_star).margin(1e-12));
        for (int i = 0; i < 500; ++i) {
            const Vec x = sample_in_ball(spec.x_star, 3.0, 71,
                                         static_cast<std::uint32_t>(i));
            if (std::sqrt(sq_dist(x, spec.x_star)) < 1e-6) continue;
            REQUIRE(spec.eval(x) > spec.f_star);
        }
    }
}

TEST_CASE("finite-difference gradient obeys the declared growth bound") {
    for (const std::string name : {"quadratic", "quartic_quad", "rastrigin", "ackley"}) {
        const auto spec = builtin(name, 2, {0.3, -0.2});
        for (int i = 0; i < 1000; ++i) {
            const Vec x = sample_in_ball(Vec{0.0, 0.0}, 10.0, 99,
                                         static_cast<std::uint32_t>(i));
            const double bound =
                spec.lip_L * (1.0 + std::pow(norm(x), spec.growth_a)) * (1.0 + 1e-3);
            REQUIRE(norm(fd_gradient(spec, x)) <= bound);
        }
    }
}

TEST_CASE("local strong convexity holds on the declared ball") {
    const auto check_pairs = [](const ObjectiveSpec& spec, double radius, double tol) {
        for (int i = 0; i < 300; ++i) {
            const Vec x = sample_in_ball(spec.x_star, radius, 31, 2 * i);
            const Vec y = sample_in_ball(spec.x_star, radius, 31, 2 * i + 1);
            const Vec g = fd_gradient(spec, x);
            Vec diff(x.size());
            for (std::size_t j = 0; j < x.size(); ++j) diff[j] = y[j] - x[j];
            const double lhs = spec.eval(y);
            const double rhs = spec.eval(x) + dot(g, diff) +
                               0.5 * spec.lambda * sq_norm(diff);
            REQUIRE(lhs >= rhs - tol);
        }
    };
    check_pairs(builtin("quadratic", 2, {0.5, 0.5}), 5.0, 1e-7);
    check_pairs(builtin("quartic_quad", 2, {0.0, 0.0}), 5.0, 1e-6);
    check_pairs(builtin("rastrigin", 2, {0.0, 0.0}), 0.05, 1e-9);
}
