#include <doctest.h>

#include "matmech/errors.hpp"
#include "matmech/fourier_algebra.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace matmech;

namespace {

const FourierSeries kCos{1.0, {{1, 0.5}, {-1, 0.5}}};

FourierSeries random_series(std::mt19937_64& rng, double omega, int max_harmonic, int terms) {
    std::uniform_int_distribution<int> idx(-max_harmonic, max_harmonic);
    std::normal_distribution<double> val(0.0, 1.0);
    FourierSeries::Coefficients c;
    for (int i = 0; i < terms; ++i) c[idx(rng)] = {val(rng), val(rng)};
    return {omega, c};
}

// Brute-force pointwise sum, independent of evaluate().
complex direct_sum(const FourierSeries::Coefficients& c, double omega, double t) {
    double re = 0.0, im = 0.0;
    for (const auto& [n, v] : c) {
        re += v.real() * std::cos(n * omega * t) - v.imag() * std::sin(n * omega * t);
        im += v.real() * std::sin(n * omega * t) + v.imag() * std::cos(n * omega * t);
    }
    return {re, im};
}

}  // namespace

TEST_CASE("evaluate: constant and cosine series") {
    const FourierSeries one{2.5, {{0, 1.0}}};
    for (double t : {0.0, 0.3, -7.0, 100.0}) CHECK(std::abs(evaluate(one, t) - 1.0) == 0.0);
    CHECK(std::abs(evaluate(kCos, 0.0) - 1.0) < 1e-15);
    CHECK(std::abs(evaluate(kCos, std::numbers::pi / 3) - std::cos(std::numbers::pi / 3)) < 1e-15);
    CHECK(std::abs(evaluate(kCos, std::numbers::pi / 3) - 0.5) < 1e-15);
}

TEST_CASE("evaluate matches a direct trigonometric sum") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        const auto f = random_series(rng, 0.7, 9, 6);
        for (double t : {0.0, 0.41, 3.3, -12.5}) {
            const complex want = direct_sum(f.coeffs(), f.omega(), t);
            CHECK(std::abs(evaluate(f, t) - want) <= 1e-12 * (1.0 + std::abs(want)));
        }
    }
}

TEST_CASE("multiply: worked products") {
    const FourierSeries one{1.0, {{0, 1.0}}};
    std::mt19937_64 rng(3);
    const auto g = random_series(rng, 1.0, 5, 4);
    CHECK(max_coefficient_distance(multiply(one, g), g) == 0.0);

    const auto sq = multiply(kCos, kCos);
    CHECK(sq.coeffs().size() == 3);
    CHECK(std::abs(sq.coefficient(2) - 0.25) < 1e-16);
    CHECK(std::abs(sq.coefficient(0) - 0.5) < 1e-16);
    CHECK(std::abs(sq.coefficient(-2) - 0.25) < 1e-16);
    for (int s = 0; s < 16; ++s) {
        const double t = 2.0 * std::numbers::pi * s / 16.0 + 0.1;
        const complex lhs = evaluate(sq, t);
        const complex rhs = evaluate(kCos, t) * evaluate(kCos, t);
        CHECK(std::abs(lhs - rhs) < 1e-14);
    }

    const FourierSeries e1{1.0, {{1, 1.0}}};
    const auto e2 = multiply(e1, e1);
    CHECK(e2.coeffs().size() == 1);
    CHECK(e2.coefficient(2) == complex(1.0, 0.0));
}

TEST_CASE("multiply rejects mismatched frequencies") {
    const FourierSeries a{1.0, {{1, 1.0}}};
    const FourierSeries b{std::nextafter(1.0, 2.0), {{1, 1.0}}};
    CHECK_THROWS_AS(multiply(a, b), FrequencyMismatchError);
    CHECK_THROWS_AS(add(a, b), FrequencyMismatchError);
    CHECK_THROWS_AS(FourierSeries(0.0, {}), DomainError);
    CHECK_THROWS_AS(FourierSeries(-1.0, {}), DomainError);
}

TEST_CASE("involution examples") {
    const auto a = involution(FourierSeries{1.0, {{0, {2.0, 3.0}}}});
    CHECK(a.coefficient(0) == complex(2.0, -3.0));
    CHECK(max_coefficient_distance(involution(kCos), kCos) == 0.0);
    const auto c = involution(FourierSeries{1.0, {{1, {0.0, 1.0}}}});
    CHECK(c.coeffs().size() == 1);
    CHECK(c.coefficient(-1) == complex(0.0, -1.0));
}

TEST_CASE("real flag") {
    CHECK(kCos.is_real());
    CHECK_FALSE(FourierSeries(1.0, {{1, {0.0, 1.0}}}).is_real());
    CHECK(FourierSeries(1.0, {{1, {0.3, 0.2}}, {-1, {0.3, -0.2}}}).is_real());
}

TEST_CASE("algebra properties on random series") {
    std::mt19937_64 rng(20240917);
    for (int trial = 0; trial < 100; ++trial) {
        const auto f = random_series(rng, 1.3, 6, 5);
        const auto g = random_series(rng, 1.3, 6, 5);
        const auto h = random_series(rng, 1.3, 6, 5);

        // (fg)* = g* f*, and the algebra is commutative.
        CHECK(max_coefficient_distance(involution(multiply(f, g)),
                                       multiply(involution(g), involution(f))) < 1e-13);
        CHECK(max_coefficient_distance(multiply(f, g), multiply(g, f)) < 1e-13);
        CHECK(max_coefficient_distance(involution(involution(f)), f) == 0.0);
        CHECK(max_coefficient_distance(multiply(multiply(f, g), h), multiply(f, multiply(g, h))) <
              1e-12);
        CHECK(max_coefficient_distance(multiply(f, add(g, h)), add(multiply(f, g), multiply(f, h))) <
              1e-12);
        CHECK(multiply(f, involution(f)).is_real());

        for (double t : {0.0, 0.77, 5.1}) {
            CHECK(std::abs(evaluate(involution(f), t) - std::conj(evaluate(f, t))) < 1e-12);
            const complex fg = evaluate(multiply(f, g), t);
            const complex prod = evaluate(f, t) * evaluate(g, t);
            CHECK(std::abs(fg - prod) <= 1e-12 * std::max(1.0, std::abs(prod)));
        }
    }
}

TEST_CASE("json round trip is exact") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        const auto f = random_series(rng, 0.123456789, 12, 7);
        const auto back = fourier_series_from_json(to_json(f));
        CHECK(back.omega() == f.omega());
        CHECK(max_coefficient_distance(back, f) == 0.0);
        CHECK(back.coeffs().size() == f.coeffs().size());
    }
    CHECK_THROWS_AS(fourier_series_from_json("{\"omega\": 1}"), FormatError);
    CHECK_THROWS_AS(fourier_series_from_json("not json"), FormatError);
}
