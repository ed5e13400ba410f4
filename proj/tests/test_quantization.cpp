#include <doctest.h>

#include "matmech/errors.hpp"
#include "matmech/quantization.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace matmech;

namespace {

const HamiltonianSystem& oscillator() {
    static const auto sys = HamiltonianSystem::harmonic();
    return sys;
}

const ActionGrid& oscillator_grid() {
    static const auto grid = ActionGrid::build(oscillator(), 1.0, 16);
    return grid;
}

const HamiltonianSystem& quartic() {
    static const auto sys = HamiltonianSystem::quartic(0.25);
    return sys;
}

const ActionGrid& quartic_grid() {
    static const auto grid = ActionGrid::build(quartic(), 0.01, 40);
    return grid;
}

// Hand ladder algebra for the oscillator: <m|q|m-1> = sqrt(m hbar / (2 M w)).
double ladder(int m, double hbar = 1.0, double mass = 1.0, double w = 1.0) {
    return std::sqrt(m * hbar / (2.0 * mass * w));
}

HeisenbergMatrix random_matrix(std::mt19937_64& rng, const std::vector<double>& energies) {
    const int n = static_cast<int>(energies.size());
    std::normal_distribution<double> g(0.0, 1.0);
    Eigen::MatrixXcd a(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) a(i, j) = {g(rng), g(rng)};
    return HeisenbergMatrix(a, 1.0, energies, "random", Convention::upper, n - 1);
}

}  // namespace

TEST_CASE("oscillator action grid") {
    const auto& grid = oscillator_grid();
    CHECK(grid.size() == 16);
    for (int m = 0; m < 5; ++m) CHECK(std::abs(grid.energies()[m] - m) <= 1e-6);
    const auto w = grid.frequencies();
    for (int m = 0; m < 16; ++m)
        for (int n = 0; n < 16; ++n) CHECK(std::abs(w(m, n) - (m - n)) <= 1e-6);
    CHECK(grid.restricted_action(3) == doctest::Approx(6.0 * std::numbers::pi));
    CHECK(grid.orbit(0).is_degenerate());
    CHECK(grid.orbit(4).action() == doctest::Approx(4.0).epsilon(1e-12));
    CHECK_THROWS_AS(ActionGrid::build(oscillator(), 0.0, 4), InvalidArgumentError);
    CHECK_THROWS_AS(ActionGrid::build(HamiltonianSystem::pendulum(1.0, 1.0), 0.5, 10),
                    NonOscillatoryError);
}

TEST_CASE("quartic grid follows the E ~ I^(4/3) scaling law") {
    const auto& grid = quartic_grid();
    const double e1 = grid.energies()[1];
    for (int m = 2; m < grid.size(); ++m)
        CHECK(grid.energies()[m] == doctest::Approx(e1 * std::pow(m, 4.0 / 3.0)).epsilon(1e-9));
}

TEST_CASE("injected hydrogen-like term values reproduce the balmer table") {
    const RydbergModel model;
    const double hbar = 1.054571817e-34;
    std::vector<double> e;
    for (int level = 1; level <= 10; ++level) e.push_back(hbar * model.term(level));
    const auto grid = ActionGrid::from_energies(hbar, e);
    const auto w = grid.frequencies();
    const auto b = balmer_table(model, 10);
    for (int m = 0; m < 10; ++m)
        for (int n = 0; n < 10; ++n) CHECK(std::abs(w(m, n) - b(m, n)) <= 1e-6 * b.max_abs());
    CHECK_FALSE(grid.has_orbits());
}

TEST_CASE("oscillator position and momentum ladders") {
    const auto& grid = oscillator_grid();
    const auto q = quantize(oscillator(), grid, "q", Convention::upper, 2);
    const auto p = quantize(oscillator(), grid, "p", Convention::upper, 2);
    for (int m = 1; m < 16; ++m) {
        CHECK(std::abs(q(m, m - 1) - ladder(m)) <= 1e-6);
        CHECK(std::abs(q(m - 1, m) - ladder(m)) <= 1e-6);
        // p(t) = -sin t gives the i/2 pattern scaled by sqrt(2 m hbar M w).
        CHECK(std::abs(p(m, m - 1) - complex(0.0, ladder(m))) <= 1e-6);
        CHECK(std::abs(p(m - 1, m) - complex(0.0, -ladder(m))) <= 1e-6);
    }
    for (int m = 0; m < 16; ++m) {
        CHECK(std::abs(q(m, m)) <= 1e-8);
        if (m >= 2) CHECK(std::abs(q(m, m - 2)) <= 1e-8);
        if (m >= 3) CHECK(q(m, m - 3) == complex(0.0, 0.0));
    }
    CHECK(q.is_hermitian());
    CHECK(p.is_hermitian());
}

TEST_CASE("H is diagonal with the level energies") {
    const auto& grid = oscillator_grid();
    const auto h = quantize(oscillator(), grid, make_observable("H", &oscillator()), Convention::upper, 3);
    for (int m = 0; m < 16; ++m)
        for (int n = 0; n < 16; ++n)
            CHECK(std::abs(h(m, n) - (m == n ? complex(grid.energies()[m]) : complex(0.0))) <= 1e-8);
}

TEST_CASE("conventions and hermiticity") {
    const auto& grid = quartic_grid();
    const auto row = quantize(quartic(), grid, "q", Convention::row, 4);
    const auto up = quantize(quartic(), grid, "q", Convention::upper, 4);
    const auto mid = quantize(quartic(), grid, "q", Convention::midpoint, 4);
    CHECK(up.is_hermitian());
    CHECK(mid.is_hermitian());
    CHECK(quantize(quartic(), grid, "p", Convention::upper, 4).is_hermitian());
    CHECK_FALSE(row.is_hermitian());
    // Entries below the diagonal agree between row and upper (both sample m hbar).
    for (int m = 4; m < 20; ++m) {
        CHECK(std::abs(row(m, m - 1) - up(m, m - 1)) <= 1e-15);
        CHECK(std::abs(row(m - 1, m) - up(m - 1, m)) > 1e-6);
    }
    // Midpoint samples the half-integer action, so lies between the neighbours.
    const double lo = std::abs(up(9, 8)), hi = std::abs(up(10, 9)), mid_v = std::abs(mid(10, 9));
    CHECK(lo < mid_v);
    CHECK(mid_v < hi);
    CHECK(parse_convention("midpoint") == Convention::midpoint);
    CHECK(to_string(Convention::row) == "row");
    CHECK_THROWS_AS(parse_convention("lower"), InvalidArgumentError);
}

TEST_CASE("band handling") {
    const auto& grid = oscillator_grid();
    const auto q0 = quantize(oscillator(), grid, "q", Convention::upper, 0);
    CHECK(q0.amp().isDiagonal(1e-8));
    CHECK_THROWS_AS(quantize(oscillator(), grid, "q", Convention::upper, 16), BandError);
    CHECK_THROWS_AS(quantize(oscillator(), grid, "q", Convention::upper, -1), BandError);
    CHECK_THROWS_AS(quantize(oscillator(), ActionGrid::from_energies(1.0, {0.0, 1.0}), "q",
                             Convention::upper, 1),
                    InvalidArgumentError);
}

TEST_CASE("evaluate_at_time") {
    const auto& grid = oscillator_grid();
    const auto q = quantize(oscillator(), grid, "q", Convention::upper, 2);
    CHECK(evaluate_at_time(q, 0.0) == q.amp());
    const auto h = quantize(oscillator(), grid, make_observable("H", &oscillator()), Convention::upper, 0);
    CHECK((evaluate_at_time(h, 3.7) - h.amp()).cwiseAbs().maxCoeff() == 0.0);
    const auto qt = evaluate_at_time(q, 0.9);
    CHECK(std::abs(qt(5, 4) - q(5, 4) * std::exp(complex(0.0, grid.frequencies()(5, 4) * 0.9))) < 1e-15);
}

TEST_CASE("Ritz product identity at eight times") {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    std::vector<double> e(7);
    for (auto& x : e) x = u(rng);
    const auto a = random_matrix(rng, e), b = random_matrix(rng, e);
    const auto ab = a.with_amp(a.amp() * b.amp(), "ab");
    for (int i = 0; i < 8; ++i) {
        const double t = u(rng);
        const Eigen::MatrixXcd lhs = evaluate_at_time(ab, t);
        const Eigen::MatrixXcd rhs = evaluate_at_time(a, t) * evaluate_at_time(b, t);
        CHECK((lhs - rhs).cwiseAbs().maxCoeff() <= 1e-12 * rhs.cwiseAbs().maxCoeff());
    }
}

TEST_CASE("matrix difference operator") {
    Eigen::MatrixXcd a(5, 5);
    for (int m = 0; m < 5; ++m)
        for (int n = 0; n < 5; ++n) a(m, n) = m;
    const auto zero = matrix_difference(a, 0);
    CHECK(zero.values.cwiseAbs().maxCoeff() == 0.0);
    CHECK(zero.valid.all());
    const auto d1 = matrix_difference(a, 1);
    for (int m = 0; m < 5; ++m)
        for (int n = 0; n < 5; ++n) {
            CHECK(d1.valid(m, n) == (m >= 1 && n >= 1));
            CHECK(d1.values(m, n) == (d1.valid(m, n) ? complex(1.0) : complex(0.0)));
        }
    const auto dm = matrix_difference(a, -2);
    CHECK(dm.valid(0, 0));
    CHECK_FALSE(dm.valid(3, 0));
    CHECK(dm.values(1, 2) == complex(-2.0));
}

TEST_CASE("difference quotient approaches the action derivative") {
    // a_1(I) = sqrt(I/2) for the unit oscillator; a_1'(I) = 1/(2 sqrt(2 I)).
    const auto& grid = oscillator_grid();
    const auto q = quantize(oscillator(), grid, "q", Convention::upper, 2);
    const auto d = matrix_difference(q, 1);
    for (int m = 4; m < 16; ++m) {
        const double want = 1.0 / (2.0 * std::sqrt(2.0 * m));
        const double got = d.values(m, m - 1).real();
        CHECK(std::abs(got - (std::sqrt(m / 2.0) - std::sqrt((m - 1) / 2.0))) <= 2e-6);
        CHECK(std::abs(got - want) <= 0.5 / m * want);
    }
}

TEST_CASE("commutators") {
    const auto& grid = oscillator_grid();
    const auto q = quantize(oscillator(), grid, "q", Convention::upper, 2);
    CHECK(commutator(q, q).cwiseAbs().maxCoeff() == 0.0);

    // [H, Q](m, m-1) = (E_m - E_{m-1}) Q(m, m-1) = hbar w0 sqrt(m hbar / 2M w0).
    const auto h = quantize(oscillator(), grid, make_observable("H", &oscillator()), Convention::upper, 2);
    const auto hq = commutator(h, q);
    for (int m = 1; m < 15; ++m) CHECK(std::abs(hq(m, m - 1) - ladder(m)) <= 1e-6);

    const auto other = ActionGrid::build(oscillator(), 0.5, 16);
    const auto q2 = quantize(oscillator(), other, "q", Convention::upper, 2);
    CHECK_THROWS_AS(commutator(q, q2), GridMismatchError);
}

TEST_CASE("oscillator CCR holds in the interior for every size") {
    for (int n : {8, 16, 64, 256}) {
        const auto grid = n == 16 ? oscillator_grid() : ActionGrid::build(oscillator(), 1.0, n);
        const auto r = ccr_residual(oscillator(), grid, 2);
        CHECK(r.max_diag_dev <= 1e-8);
        CHECK(r.max_offdiag <= 1e-8);
        CHECK(r.interior_begin == 2);
        CHECK(r.interior_end == n - 2);
        CHECK(static_cast<int>(r.rows.size()) == n - 4);

        // The last row feels the truncation and is correctly excluded.
        const complex last = r.commutator(n - 1, n - 1) - complex(0.0, -1.0);
        CHECK(std::abs(last) > 1.0);
    }
    CHECK_THROWS_AS(ccr_residual(oscillator(), ActionGrid::build(oscillator(), 1.0, 3), 2), SizeError);
}

TEST_CASE("quartic CCR deviation is small in the interior") {
    const auto& grid = quartic_grid();
    for (auto c : {Convention::upper, Convention::row, Convention::midpoint}) {
        const auto r = ccr_residual(quartic(), grid, 8, c);
        CHECK(r.max_diag_dev / grid.hbar() <= 0.05);
    }
}

TEST_CASE("CCR csv has one line per interior row") {
    const auto r = ccr_residual(oscillator(), oscillator_grid(), 2);
    const auto csv = ccr_report_to_csv(r);
    CHECK(csv.rfind("m,re_dev,im_dev,max_offdiag_row\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 16 - 4);
}

TEST_CASE("correspondence on the oscillator") {
    const auto& grid = oscillator_grid();
    const auto p = make_observable("p"), q = make_observable("q");
    const auto r0 = correspondence_check(oscillator(), grid, p, q, 0, 8, 4);
    CHECK(std::abs(r0.matrix_value - complex(0.0, -1.0)) <= 1e-8);
    CHECK(std::abs(r0.bracket_value - complex(0.0, -1.0)) <= 1e-8);
    CHECK(r0.rel_error <= 1e-8);
    const auto r1 = correspondence_check(oscillator(), grid, p, q, 1, 8, 4);
    CHECK(std::abs(r1.matrix_value) <= 1e-8);
    CHECK(std::abs(r1.bracket_value) <= 1e-8);
    CHECK_THROWS_AS(correspondence_check(oscillator(), grid, p, q, 3, 8, 4), BandError);
    CHECK_THROWS_AS(correspondence_check(oscillator(), grid, p, q, 0, 13, 4), SizeError);
}

TEST_CASE("correspondence error shrinks with the quantum number") {
    const auto grid = ActionGrid::build(quartic(), 0.01, 84);
    const auto q = make_observable("q"), q2 = make_observable("q2");
    double prev = 1.0;
    for (int m : {10, 20, 40, 80}) {
        const auto r = correspondence_check(quartic(), grid, q, q2, 1, m, 3);
        CHECK(r.rel_error < prev);
        CHECK(r.route_discrepancy < 1e-4);
        prev = r.rel_error;
    }
}

TEST_CASE("matrix json round trip") {
    const auto q = quantize(quartic(), quartic_grid(), "p", Convention::row, 3);
    const auto back = matrix_from_json(matrix_to_json(q));
    CHECK(back.amp() == q.amp());
    CHECK(back.energies() == q.energies());
    CHECK(back.hbar() == q.hbar());
    CHECK(back.label() == q.label());
    CHECK(back.convention() == q.convention());
    CHECK(back.band() == q.band());
    CHECK_THROWS_AS(matrix_from_json("{}"), FormatError);
}
