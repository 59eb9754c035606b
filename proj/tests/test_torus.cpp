#include <cmath>

#include "doctest.h"
#include "leafscope/torus.hpp"

using namespace leafscope;

namespace {

CurveSpec make_spec(int n, Complex tau = {0.0, 1.0}) {
    CurveSpec s;
    s.n = n;
    s.tau = tau;
    return s;
}

// Independent oracle: plain ascending summation of the defining series.
Complex theta_oracle_ascending(double a, double b, Complex z, Complex tau, int terms) {
    Complex sum = 0;
    for (int k = -terms; k <= terms; ++k) {
        const double ka = k + a;
        sum += std::exp(kPi * kI * ka * ka * tau + 2.0 * kPi * kI * ka * (z + b));
    }
    return sum;
}

// Second oracle with a different accumulation order (magnitude-descending
// pairs), to rule out order-dependent rounding artifacts.
Complex theta_oracle_paired(double a, double b, Complex z, Complex tau, int terms) {
    Complex sum = std::exp(kPi * kI * a * a * tau + 2.0 * kPi * kI * a * (z + b));
    for (int k = terms; k >= 1; --k) {
        for (int s : {+1, -1}) {
            const double ka = s * k + a;
            sum += std::exp(kPi * kI * ka * ka * tau + 2.0 * kPi * kI * ka * (z + b));
        }
    }
    return sum;
}

}  // namespace

TEST_CASE("reduce maps into the fundamental parallelogram") {
    const CurveSpec spec = make_spec(5);
    CHECK(std::abs(reduce(Complex{0, 0}, spec).z) == 0.0);
    CHECK(std::abs(reduce(Complex{1, 0} + spec.tau, spec).z) < 1e-12);
    const EPoint p = reduce(Complex{2.3, 0} + 1.7 * spec.tau, spec);
    CHECK(std::abs(p.z - Complex{0.3, 0.7}) < 1e-12);  // tau = i
    // idempotent
    const EPoint q = reduce(Complex{-3.71, 0} + 2.63 * spec.tau, spec);
    CHECK(std::abs(reduce(q.z, spec).z - q.z) < 1e-12);
}

TEST_CASE("group law identities") {
    const CurveSpec spec = make_spec(5, Complex{0.31, 1.27});
    Rng rng(42);
    for (int trial = 0; trial < 50; ++trial) {
        const EPoint p = random_point(rng, spec);
        const EPoint q = random_point(rng, spec);
        const EPoint r = random_point(rng, spec);
        CHECK(points_equal(add_points(p, EPoint{}, spec), p, spec));
        CHECK(points_equal(add_points(p, negate(p, spec), spec), EPoint{}, spec));
        const EPoint lhs = add_points(add_points(p, q, spec), r, spec);
        const EPoint rhs = add_points(p, add_points(q, r, spec), spec);
        CHECK(points_equal(lhs, rhs, spec));
        CHECK(points_equal(add_points(p, q, spec), add_points(q, p, spec), spec));
    }
}

TEST_CASE("two-torsion points satisfy 2x = 0") {
    const CurveSpec spec = make_spec(4, Complex{-0.2, 0.9});
    const std::vector<Complex> tors{{0, 0}, {0.5, 0}, 0.5 * spec.tau, 0.5 + 0.5 * spec.tau};
    for (const Complex t : tors) {
        const EPoint p = reduce(t, spec);
        CHECK(points_equal(add_points(p, p, spec), EPoint{}, spec));
    }
}

TEST_CASE("sum_divisor and lin_equiv") {
    const CurveSpec spec = make_spec(5);
    Rng rng(3);
    const EPoint x = random_point(rng, spec);
    const Divisor single = make_divisor({{x, 1}}, spec);
    CHECK(points_equal(sum_divisor(single, spec), x, spec));

    const Divisor origin_n = make_divisor({{EPoint{}, 5}}, spec);
    CHECK(points_equal(sum_divisor(origin_n, spec), EPoint{}, spec));
    CHECK(origin_n.degree() == 5);

    // (x) + (l_sum - x) sums to l_sum
    CurveSpec spec2 = spec;
    spec2.l_sum = reduce(Complex{0.21, 0.4}, spec);
    const EPoint mirror = sub_points(spec2.l_sum, x, spec2);
    const Divisor pair = make_divisor({{x, 1}, {mirror, 1}}, spec2);
    CHECK(points_equal(sum_divisor(pair, spec2), spec2.l_sum, spec2));

    const EPoint y = random_point(rng, spec);
    const Divisor d1 = make_divisor({{x, 1}, {y, 1}}, spec);
    const Divisor d2 = make_divisor({{add_points(x, y, spec), 1}, {EPoint{}, 1}}, spec);
    CHECK(lin_equiv(d1, d2, spec));
    CHECK_FALSE(lin_equiv(single, make_divisor({{y, 1}}, spec), spec));

    // random equal-degree divisors with different sums are inequivalent
    int mismatches = 0;
    for (int trial = 0; trial < 20; ++trial) {
        const Divisor a = random_divisor_with_sum(3, random_point(rng, spec), rng, spec);
        const Divisor b = random_divisor_with_sum(3, random_point(rng, spec), rng, spec);
        if (!points_equal(sum_divisor(a, spec), sum_divisor(b, spec), spec)) {
            ++mismatches;
            CHECK_FALSE(lin_equiv(a, b, spec));
        }
    }
    CHECK(mismatches > 0);
}

TEST_CASE("gcd and lcm of divisors") {
    const CurveSpec spec = make_spec(6);
    Rng rng(9);
    const EPoint x = random_point(rng, spec);
    const EPoint y = random_point(rng, spec);
    const EPoint z = random_point(rng, spec);

    const Divisor a = make_divisor({{x, 2}, {y, 1}}, spec);
    const Divisor b = make_divisor({{x, 1}, {z, 1}}, spec);
    const Divisor g = gcd_divisor(a, b, spec);
    const Divisor l = lcm_divisor(a, b, spec);
    CHECK(divisors_equal(g, make_divisor({{x, 1}}, spec), spec));
    CHECK(divisors_equal(l, make_divisor({{x, 2}, {y, 1}, {z, 1}}, spec), spec));
    CHECK(g.degree() + l.degree() == a.degree() + b.degree());

    CHECK(divisors_equal(gcd_divisor(a, a, spec), a, spec));
    CHECK(divisors_equal(lcm_divisor(a, a, spec), a, spec));

    const Divisor disj1 = make_divisor({{x, 1}}, spec);
    const Divisor disj2 = make_divisor({{y, 1}}, spec);
    CHECK(gcd_divisor(disj1, disj2, spec).degree() == 0);
    CHECK(divisors_equal(lcm_divisor(disj1, disj2, spec), divisor_add(disj1, disj2, spec), spec));
}

TEST_CASE("omega coset") {
    CurveSpec spec = make_spec(4, Complex{0.1, 1.3});
    SUBCASE("trivial l_sum gives the 2-torsion") {
        const auto coset = omega_coset(spec);
        REQUIRE(coset.size() == 4);
        for (const auto& w : coset) CHECK(points_equal(add_points(w, w, spec), EPoint{}, spec));
    }
    SUBCASE("generic l_sum") {
        spec.l_sum = reduce(Complex{0.37, 0.22}, spec);
        const auto coset = omega_coset(spec);
        REQUIRE(coset.size() == 4);
        for (const auto& w : coset)
            CHECK(points_equal(add_points(w, w, spec), spec.l_sum, spec));
        // pairwise differences are 2-torsion
        for (const auto& w1 : coset)
            for (const auto& w2 : coset) {
                const EPoint d = sub_points(w1, w2, spec);
                CHECK(points_equal(add_points(d, d, spec), EPoint{}, spec));
            }
        // closed under adding 2-torsion
        const EPoint half = reduce(0.5 + 0.5 * spec.tau, spec);
        for (const auto& w : coset)
            CHECK(in_omega_coset(add_points(w, half, spec), spec, spec.tol.lattice_tol));
    }
}

TEST_CASE("theta value against independent summation oracles") {
    const Complex tau{0, 1};
    const Complex v1 = theta_oracle_ascending(0, 0, 0, tau, 30);
    const Complex v2 = theta_oracle_paired(0, 0, 0, tau, 30);
    CHECK(std::abs(v1 - v2) < 1e-14);
    CHECK(v1.real() == doctest::Approx(1.0864348112).epsilon(1e-9));
    CHECK(std::abs(v1.imag()) < 1e-14);
    CHECK(std::abs(theta_char(0, 0, 0, tau, 30) - v1) < 1e-13);

    // generic arguments, generic tau
    const Complex tau2{0.21, 0.83};
    for (const Complex z : {Complex{0.3, 0.4}, Complex{-1.7, 2.2}, Complex{0.05, -0.6}}) {
        const Complex want = theta_oracle_ascending(0.5, 0.5, z, tau2, 40);
        const Complex got = theta_char(0.5, 0.5, z, tau2, 40);
        CHECK(std::abs(got - want) <= 1e-10 * std::max(1.0, std::abs(want)));
    }
}

TEST_CASE("odd theta vanishes at the origin and on the lattice") {
    const Complex tau{0.3, 1.1};
    CHECK(std::abs(theta_char(0.5, 0.5, 0, tau, 40)) < 1e-13);
    CHECK(std::abs(theta_char(0.5, 0.5, Complex{3, 0} + 2.0 * tau, tau, 40)) < 1e-10);
}

TEST_CASE("quasi-periodicity") {
    const Complex tau{0.17, 0.9};
    for (double a : {0.0, 0.5, 0.25}) {
        for (const Complex z : {Complex{0.2, 0.1}, Complex{-0.4, 0.7}}) {
            const Complex lhs = theta_char(a, 0.5, z + 1.0, tau, 40);
            const Complex rhs = std::exp(2.0 * kPi * kI * a) * theta_char(a, 0.5, z, tau, 40);
            CHECK(std::abs(lhs - rhs) <= 1e-14 * std::abs(rhs) * 10 + 1e-15);
            // full lattice shift z + 1 + tau
            const Complex lhs2 = theta_char(a, 0.5, z + 1.0 + tau, tau, 40);
            const Complex factor =
                std::exp(2.0 * kPi * kI * (a - 0.5) - kPi * kI * tau - 2.0 * kPi * kI * z);
            CHECK(std::abs(lhs2 - factor * theta_char(a, 0.5, z, tau, 40)) <=
                  1e-12 * std::abs(lhs2) + 1e-15);
        }
    }
}

TEST_CASE("truncation accuracy improves geometrically with terms") {
    const Complex tau{0.0, 0.18};
    const Complex z{0.41, 0.13};
    const Complex ref = theta_oracle_ascending(0.5, 0.0, z, tau, 80);
    double prev_err = 1e300;
    int geometric_steps = 0;
    for (int terms : {4, 5, 6, 7, 8}) {
        const double err = std::abs(theta_oracle_ascending(0.5, 0.0, z, tau, terms) - ref);
        if (prev_err > 1e-12 && err < 0.1 * prev_err) ++geometric_steps;
        prev_err = err;
    }
    CHECK(geometric_steps >= 3);
    CHECK(prev_err < 1e-10);
}

TEST_CASE("theta jets match finite differences") {
    const Complex tau{0.11, 1.05};
    const Complex z{0.23, 0.54};
    const auto jet = theta_jet(0.5, 0.5, z, tau, 3, 40);
    const double h = 1e-5;
    const Complex fp = theta_char(0.5, 0.5, z + h, tau, 40);
    const Complex fm = theta_char(0.5, 0.5, z - h, tau, 40);
    const Complex d1 = (fp - fm) / (2 * h);
    CHECK(std::abs(jet[1] - d1) < 1e-8);
    const Complex d2 = (fp - 2.0 * jet[0] + fm) / (h * h);
    CHECK(std::abs(2.0 * jet[2] - d2) < 1e-4);
    // jets through a lattice reduction branch
    const auto jet_far = theta_jet(0.5, 0.5, z + 3.0 + 2.0 * tau, tau, 1, 40);
    const Complex dfar = (theta_char(0.5, 0.5, z + 3.0 + 2.0 * tau + h, tau, 40) -
                          theta_char(0.5, 0.5, z + 3.0 + 2.0 * tau - h, tau, 40)) /
                         (2 * h);
    CHECK(std::abs(jet_far[1] - dfar) <= 1e-7 * std::max(1.0, std::abs(dfar)));
}

TEST_CASE("random_divisor_with_sum") {
    const CurveSpec spec = make_spec(5);
    Rng rng(77);
    const EPoint x = reduce(Complex{0.4, 0.25}, spec);
    const Divisor d1 = random_divisor_with_sum(1, x, rng, spec);
    CHECK(divisors_equal(d1, make_divisor({{x, 1}}, spec), spec));
    for (int deg : {2, 3, 4}) {
        const Divisor d = random_divisor_with_sum(deg, x, rng, spec);
        CHECK(d.degree() == deg);
        CHECK(static_cast<int>(d.parts.size()) == deg);  // distinct points
        CHECK(points_equal(sum_divisor(d, spec), x, spec));
    }
    Rng rng_a(101), rng_b(202);
    const Divisor da = random_divisor_with_sum(3, x, rng_a, spec);
    const Divisor db = random_divisor_with_sum(3, x, rng_b, spec);
    CHECK(lin_equiv(da, db, spec));
    CHECK_FALSE(divisors_equal(da, db, spec));
}

TEST_CASE("sigma is a homomorphism") {
    const CurveSpec spec = make_spec(6, Complex{0.4, 1.4});
    Rng rng(5);
    for (int trial = 0; trial < 10; ++trial) {
        const Divisor a = random_divisor_with_sum(2 + static_cast<int>(rng.below(3)),
                                                  random_point(rng, spec), rng, spec);
        const Divisor b = random_divisor_with_sum(1 + static_cast<int>(rng.below(3)),
                                                  random_point(rng, spec), rng, spec);
        const EPoint want = add_points(sum_divisor(a, spec), sum_divisor(b, spec), spec);
        CHECK(points_equal(sum_divisor(divisor_add(a, b, spec), spec), want, spec));
    }
}

TEST_CASE("spec validation") {
    CurveSpec bad_tau = make_spec(5, Complex{0.2, -1.0});
    CHECK_THROWS_AS(bad_tau.validate(), BadInput);
    CurveSpec bad_n = make_spec(2);
    CHECK_THROWS_AS(bad_n.validate(), BadInput);
    CurveSpec ok = make_spec(3);
    CHECK_NOTHROW(ok.validate());
    ok.tol.theta_terms = 5;
    CHECK_THROWS_AS(ok.validate(), BadInput);
}

TEST_CASE("theta_char reports truncation that cannot meet tolerance") {
    // |q| close to 1: ten terms cannot reach the tolerance floor
    const Complex tau{0.0, 0.05};
    CHECK_THROWS_AS(theta_char(0.5, 0.5, Complex{0.3, 0.01}, tau, 10), TruncationError);
    CHECK_NOTHROW(theta_char(0.5, 0.5, Complex{0.3, 0.01}, tau, 40));
}
