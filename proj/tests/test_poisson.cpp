#include "doctest.h"
#include "leafscope/poisson.hpp"

using namespace leafscope;

namespace {

CurveSpec make_spec(int n, Complex tau = {0.0, 1.0}) {
    CurveSpec s;
    s.n = n;
    s.tau = tau;
    return s;
}

struct Workbench {
    Frame frame;
    SecantEngine engine;
    PoissonCache cache;
    Workbench(int n, Complex tau)
        : frame(make_spec(n, tau)), engine(frame), cache(build_poisson_cache(frame, engine)) {}
};

Workbench& bench5() {
    static Workbench w(5, Complex{0.0, 1.0});
    return w;
}

Workbench& bench4() {
    static Workbench w(4, Complex{0.1, 1.15});
    return w;
}

Workbench& bench3() {
    static Workbench w(3, Complex{0.21, 0.9});
    return w;
}

}  // namespace

TEST_CASE("quintic interpolation at n = 5") {
    auto& [frame, engine, cache] = bench5();
    REQUIRE(cache.forms.size() == 1);
    const auto& f = cache.forms[0];
    CHECK(f.degree() == 5);
    CHECK(cache.interpolation.null_gap > 1e6);

    Rng rng(100);
    SUBCASE("vanishes on the curve") {
        for (int trial = 0; trial < 20; ++trial) {
            const auto p = frame.embed(random_point(rng, frame.spec()));
            CHECK(std::abs(f.eval(p)) < 1e-8 * f.coeff_norm());
        }
    }
    SUBCASE("vanishes on fresh secant samples") {
        for (int trial = 0; trial < 40; ++trial) {
            const auto p = engine.sample_partial_secant(2, random_point(rng, frame.spec()), false, rng);
            CHECK(std::abs(f.eval(p)) < 1e-8 * f.coeff_norm());
        }
    }
    SUBCASE("bounded away from zero at generic points") {
        for (int trial = 0; trial < 10; ++trial)
            CHECK(std::abs(f.eval(normalized(rng.normal_vector(5)))) > 1e-5 * f.coeff_norm());
    }
}

TEST_CASE("syzygy solution is one-dimensional with a large gap") {
    CHECK(bench5().cache.syzygy.null_gap > 1e6);
    CHECK(bench4().cache.syzygy.null_gap > 1e6);
}

TEST_CASE("defining residual of the syzygy") {
    Rng rng(200);
    for (Workbench* w : {&bench4(), &bench5()}) {
        for (int trial = 0; trial < 15; ++trial) {
            const auto p = normalized(rng.normal_vector(w->frame.n()));
            CHECK(casimir_residual(w->cache.omega, w->cache.forms, p) < 1e-8);
        }
    }
}

TEST_CASE("bracket evaluation basics") {
    auto& [frame, engine, cache] = bench4();
    Rng rng(300);
    const auto p = rng.normal_vector(4);

    SUBCASE("exact skewness") {
        const Matrix m = bracket_eval(cache.omega, p);
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) CHECK(m(i, j) == -m(j, i));
    }
    SUBCASE("degree-two homogeneity") {
        const Complex c{1.3, -0.4};
        auto cp = p;
        for (auto& z : cp) z *= c;
        const Matrix m1 = bracket_eval(cache.omega, p);
        const Matrix m2 = bracket_eval(cache.omega, cp);
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j)
                CHECK(std::abs(m2(i, j) - c * c * m1(i, j)) <
                      1e-10 * std::max(1.0, std::abs(m1(i, j))));
    }
}

TEST_CASE("jacobi identity holds and is sensitive to corruption") {
    Rng rng(400);
    for (Workbench* w : {&bench4(), &bench5()}) {
        double worst = 0;
        for (int trial = 0; trial < 25; ++trial) {
            const auto p = normalized(rng.normal_vector(w->frame.n()));
            worst = std::max(worst, jacobi_residual(w->cache.omega, p));
        }
        CHECK(worst < 1e-6);

        // negative control: a perturbed matrix violates Jacobi measurably
        PoissonMatrix corrupted = w->cache.omega;
        const auto quad_basis = monomials_of_degree(w->frame.n(), 2);
        auto& q = corrupted.upper()[1];
        q.add_term(quad_basis[2], Complex{1e-2, -7e-3} * corrupted.coeff_max());
        double corrupted_worst = 0;
        for (int trial = 0; trial < 10; ++trial) {
            const auto p = normalized(rng.normal_vector(w->frame.n()));
            corrupted_worst = std::max(corrupted_worst, jacobi_residual(corrupted, p));
        }
        CHECK(corrupted_worst > 1e-4);
    }
}

TEST_CASE("jacobi residual is scale invariant") {
    auto& [frame, engine, cache] = bench5();
    Rng rng(500);
    const auto p = rng.normal_vector(5);
    auto cp = p;
    for (auto& z : cp) z *= Complex{0.2, 1.7};
    CHECK(jacobi_residual(cache.omega, p) ==
          doctest::Approx(jacobi_residual(cache.omega, cp)).epsilon(1e-6));
}

TEST_CASE("poisson rank across strata") {
    Rng rng(600);

    SUBCASE("points of the curve have rank zero") {
        for (Workbench* w : {&bench3(), &bench4(), &bench5()}) {
            const auto p = w->frame.embed(random_point(rng, w->frame.spec()));
            const auto res = poisson_rank(w->cache.omega, p, w->frame.spec());
            CHECK(res.rank == 0);
            CHECK_FALSE(res.ambiguous);
        }
    }
    SUBCASE("generic rank is n - 1 for odd n") {
        auto& w5 = bench5();
        const auto res = poisson_rank(w5.cache.omega, normalized(rng.normal_vector(5)), w5.frame.spec());
        CHECK(res.rank == 4);
        auto& w3 = bench3();
        const auto res3 = poisson_rank(w3.cache.omega, normalized(rng.normal_vector(3)), w3.frame.spec());
        CHECK(res3.rank == 2);
    }
    SUBCASE("generic rank on a smooth quadric at n = 4 is 2") {
        auto& w4 = bench4();
        const EPoint x = random_point(rng, w4.frame.spec());
        if (!in_omega_coset(x, w4.frame.spec(), 1e-3)) {
            const auto p = w4.engine.sample_partial_secant(2, x, false, rng);
            const auto res = poisson_rank(w4.cache.omega, p, w4.frame.spec());
            CHECK(res.rank == 2);
        }
    }
    SUBCASE("chord points at n = 5 have rank 2") {
        auto& w5 = bench5();
        const auto p =
            w5.engine.sample_partial_secant(2, random_point(rng, w5.frame.spec()), false, rng);
        const auto res = poisson_rank(w5.cache.omega, p, w5.frame.spec());
        CHECK(res.rank == 2);
    }
}

TEST_CASE("projective uniqueness: independent runs agree up to scale") {
    auto& [frame, engine, cache] = bench5();
    Rng rng_b(0xb0b);
    SolveDiagnostics diag;
    const PolynomialForm f2 = top_secant_equation(engine, rng_b, 0, &diag);
    const PoissonMatrix omega2 = syzygy_poisson_matrix(frame, {f2});
    // both normalized to largest coefficient 1, so they agree directly
    const auto quad_basis = monomials_of_degree(5, 2);
    double worst = 0;
    for (std::size_t e = 0; e < cache.omega.upper().size(); ++e) {
        const auto d1 = to_dense(cache.omega.upper()[e], quad_basis);
        const auto d2 = to_dense(omega2.upper()[e], quad_basis);
        for (std::size_t j = 0; j < quad_basis.size(); ++j)
            worst = std::max(worst, std::abs(d1[j] - d2[j]));
    }
    CHECK(worst < 1e-6);
}

TEST_CASE("even-n pencil choice does not change the bracket (up to scale)") {
    auto& [frame, engine, cache] = bench4();
    // rebuild from the pencil in the reverse order: the syzygy conditions are
    // the same module, so the normalized matrix must agree
    const PoissonMatrix omega2 =
        syzygy_poisson_matrix(frame, {cache.forms[1], cache.forms[0]});
    const auto quad_basis = monomials_of_degree(4, 2);
    double worst = 0;
    for (std::size_t e = 0; e < cache.omega.upper().size(); ++e) {
        const auto d1 = to_dense(cache.omega.upper()[e], quad_basis);
        const auto d2 = to_dense(omega2.upper()[e], quad_basis);
        for (std::size_t j = 0; j < quad_basis.size(); ++j)
            worst = std::max(worst, std::abs(d1[j] - d2[j]));
    }
    CHECK(worst < 1e-6);
}

TEST_CASE("n = 3: the cubic and the rank-2 open leaf") {
    auto& [frame, engine, cache] = bench3();
    REQUIRE(cache.forms.size() == 1);
    CHECK(cache.forms[0].degree() == 3);
    Rng rng(700);
    for (int trial = 0; trial < 10; ++trial) {
        const auto p = frame.embed(random_point(rng, frame.spec()));
        CHECK(std::abs(cache.forms[0].eval(p)) < 1e-8 * cache.forms[0].coeff_norm());
    }
    const auto res = poisson_rank(cache.omega, normalized(rng.normal_vector(3)), frame.spec());
    CHECK(res.rank == 2);
}

TEST_CASE("leaf flow stays on the pencil member at n = 4") {
    auto& [frame, engine, cache] = bench4();
    Rng rng(800);
    const EPoint x = random_point(rng, frame.spec());
    const auto p0 = engine.sample_partial_secant(2, x, false, rng);
    const Complex lambda = cache.forms[1].eval(p0), mu = -cache.forms[0].eval(p0);
    const double member_scale = std::hypot(std::abs(lambda), std::abs(mu));
    REQUIRE(std::abs(lambda * cache.forms[0].eval(p0) + mu * cache.forms[1].eval(p0)) <
            1e-10 * member_scale);
    const auto traj = leaf_flow(cache.omega, p0, 40, 0.05, rng);
    REQUIRE(traj.size() == 41);
    double drift = 0;
    for (const auto& p : traj)
        drift = std::max(drift,
                         std::abs(lambda * cache.forms[0].eval(p) + mu * cache.forms[1].eval(p)) /
                             member_scale);
    CHECK(drift < 1e-6);
    // the trajectory genuinely moves
    CHECK(projective_distance(traj.front(), traj.back()) > 1e-4);
}

TEST_CASE("flow from a curve point stays put (rank zero)") {
    auto& [frame, engine, cache] = bench5();
    Rng rng(900);
    const auto p0 = frame.embed(random_point(rng, frame.spec()));
    const auto traj = leaf_flow(cache.omega, p0, 20, 0.05, rng);
    for (const auto& p : traj) CHECK(projective_distance(p0, p) < 1e-7);
}

TEST_CASE("cache probes reproduce") {
    auto& [frame, engine, cache] = bench4();
    CHECK(cache.probe_deviation(frame) < 1e-12);
    PoissonCache corrupted = cache;
    corrupted.probe_values[3][1] += Complex{1e-3, 0};
    CHECK(corrupted.probe_deviation(frame) > 1e-6);
}
