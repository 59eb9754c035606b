#include <array>
#include <cmath>

#include "doctest.h"
#include "leafscope/sections.hpp"

using namespace leafscope;

namespace {

CurveSpec make_spec(int n, Complex tau = {0.0, 1.0}, Complex l = {0.0, 0.0}) {
    CurveSpec s;
    s.n = n;
    s.tau = tau;
    s.l_sum.z = l;
    return s;
}

const Frame& frame5() {
    static Frame f(make_spec(5));
    return f;
}

const Frame& frame4() {
    static Frame f(make_spec(4, Complex{0.13, 1.08}));
    return f;
}

}  // namespace

TEST_CASE("basis_of_sections basic shape") {
    const Frame& f = frame5();
    Rng rng(1);
    const EPoint x = random_point(rng, f.spec());

    SUBCASE("degree one has its zero at x") {
        const SectionBasis b = basis_of_sections(1, x, f);
        REQUIRE(b.degree == 1);
        CHECK(std::abs(b.eval(0, x.z, f.spec())) < 1e-12);
        CHECK(std::abs(b.eval(0, x.z + 0.37, f.spec())) > 1e-6);
    }

    SUBCASE("embedding class gives n independent sections") {
        const SectionBasis b = basis_of_sections(f.n(), f.spec().l_sum, f);
        REQUIRE(b.degree == f.n());
        const int m = 3 * f.n();
        Matrix samples(m, f.n());
        Rng check(99);
        for (int s = 0; s < m; ++s) {
            const Complex z = check.uniform() + check.uniform() * f.tau();
            const auto vals = b.eval_all(z, f.spec());
            for (int j = 0; j < f.n(); ++j) samples(s, j) = vals[j];
        }
        CHECK(decide_rank(singular_values(samples), f.spec().tol.rank_tol).rank ==
              static_cast<std::size_t>(f.n()));
    }

    SUBCASE("every section's zeros sum to x (Abel condition by construction)") {
        for (int d : {2, 3}) {
            const SectionBasis b = basis_of_sections(d, x, f);
            for (int i = 0; i < d; ++i) {
                Complex sum = 0;
                for (const Complex& pt : b.points[i]) sum += pt;
                CHECK(std::abs(sum - b.literal_sum) < 1e-12);
            }
        }
    }
}

TEST_CASE("embed of a plane cubic satisfies one cubic relation") {
    // Interpolation oracle: degree-3 monomials in 3 variables evaluated at 30
    // samples of embed(E) leave exactly a 1-dimensional null space.
    const Frame f(make_spec(3, Complex{0.21, 0.9}));
    std::vector<std::array<int, 3>> monos;
    for (int a = 0; a <= 3; ++a)
        for (int b = 0; a + b <= 3; ++b) monos.push_back({a, b, 3 - a - b});
    REQUIRE(monos.size() == 10);
    Rng rng(5);
    Matrix vand(30, 10);
    for (int s = 0; s < 30; ++s) {
        const auto p = f.embed(random_point(rng, f.spec()));
        for (std::size_t j = 0; j < monos.size(); ++j) {
            Complex v = 1.0;
            for (int k = 0; k < monos[j][0]; ++k) v *= p[0];
            for (int k = 0; k < monos[j][1]; ++k) v *= p[1];
            for (int k = 0; k < monos[j][2]; ++k) v *= p[2];
            vand(s, j) = v;
        }
    }
    const auto decision = decide_rank(singular_values(vand), 1e-7);
    CHECK(decision.rank == 9);
    CHECK_FALSE(decision.ambiguous);
}

TEST_CASE("hyperplane sections have n zeros summing to sigma(L)") {
    const Frame& f = frame5();
    Rng rng(11);
    for (int trial = 0; trial < 3; ++trial) {
        const auto coeffs = rng.normal_vector(f.n());
        const Divisor zeros = section_zeros(f.embedding_basis(), coeffs, f);
        CHECK(zeros.degree() == f.n());
        CHECK(points_equal(sum_divisor(zeros, f.spec()), f.spec().l_sum, f.spec()));
    }
}

TEST_CASE("embed lies on its own chords") {
    const Frame& f = frame5();
    Rng rng(21);
    const EPoint x = random_point(rng, f.spec());
    const EPoint y = random_point(rng, f.spec());
    const Divisor chord = make_divisor({{x, 1}, {y, 1}}, f.spec());
    const Subspace sp = span_of_divisor(chord, f);
    CHECK(sp.dim() == 2);
    CHECK(sp.contains(f.embed(x), 1e-8));
    CHECK(sp.contains(f.embed(y), 1e-8));
    CHECK_FALSE(sp.contains(f.embed(random_point(rng, f.spec())), 1e-4));
}

TEST_CASE("span dimensions follow the Fisher table") {
    const Frame& f = frame5();
    Rng rng(31);
    const int n = f.n();

    for (int d = 1; d <= n - 1; ++d) {
        const Divisor dv = random_divisor_with_sum(d, random_point(rng, f.spec()), rng, f.spec());
        CHECK(span_of_divisor(dv, f).dim() == static_cast<std::size_t>(d));
    }
    // degree n, sum = l_sum: one hyperplane worth of forms vanish
    const Divisor hyp = random_divisor_with_sum(n, f.spec().l_sum, rng, f.spec());
    CHECK(span_of_divisor(hyp, f).dim() == static_cast<std::size_t>(n - 1));
    // degree n, generic sum: full space
    const Divisor full = random_divisor_with_sum(n, random_point(rng, f.spec()), rng, f.spec());
    CHECK(span_of_divisor(full, f).dim() == static_cast<std::size_t>(n));
}

TEST_CASE("span honors multiplicity (scheme-theoretic span)") {
    const Frame& f = frame5();
    Rng rng(41);
    const EPoint x = random_point(rng, f.spec());
    const EPoint y = random_point(rng, f.spec());
    const Divisor dv = make_divisor({{x, 2}, {y, 1}}, f.spec());
    const Subspace sp = span_of_divisor(dv, f);
    REQUIRE(sp.dim() == 3);
    CHECK(sp.contains(f.embed(x), 1e-8));
    // tangent vector at x lies in the span as well
    std::vector<Complex> tangent(f.n());
    for (int i = 0; i < f.n(); ++i)
        tangent[i] = f.embedding_basis().eval_jet(i, x.z, f.spec(), 1)[1];
    CHECK(sp.contains(tangent, 1e-7));
    // but not for a simple-point divisor with the same support
    const Divisor simple = make_divisor({{x, 1}, {y, 1}}, f.spec());
    CHECK_FALSE(span_of_divisor(simple, f).contains(tangent, 1e-4));
}

TEST_CASE("multiplication matrix") {
    const Frame& f = frame5();
    Rng rng(51);
    const EPoint x1 = random_point(rng, f.spec());
    const EPoint x2 = sub_points(f.spec().l_sum, x1, f.spec());

    SUBCASE("d1 = 1 row vanishes on E exactly at x1") {
        const SectionBasis b1 = basis_of_sections(1, x1, f);
        const SectionBasis b2 = basis_with_literal_sum(f.n() - 1, f.l_rep() - b1.literal_sum, f, 7);
        const RoomMatrix room = multiplication_matrix(b1, b2, f);
        REQUIRE(room.rows == 1);
        REQUIRE(room.cols == f.n() - 1);
        const Matrix at_x1 = room.evaluate_at(f.embed(x1));
        double all = 0;
        for (int j = 0; j < room.cols; ++j) all = std::max(all, std::abs(at_x1(0, j)));
        CHECK(all < 1e-8);
        const Matrix at_other = room.evaluate_at(f.embed(random_point(rng, f.spec())));
        double other = 0;
        for (int j = 0; j < room.cols; ++j) other = std::max(other, std::abs(at_other(0, j)));
        CHECK(other > 1e-6);
    }

    SUBCASE("entries are the coordinates of the product sections") {
        const SectionBasis b1 = basis_of_sections(2, x1, f);
        const SectionBasis b2 = basis_with_literal_sum(f.n() - 2, f.l_rep() - b1.literal_sum, f, 3);
        const RoomMatrix room = multiplication_matrix(b1, b2, f);
        for (int trial = 0; trial < 8; ++trial) {
            const Complex y = rng.uniform() + rng.uniform() * f.tau();
            const auto ev = f.embedding_basis().eval_all(y, f.spec());
            const auto v1 = b1.eval_all(y, f.spec());
            const auto v2 = b2.eval_all(y, f.spec());
            for (int i = 0; i < room.rows; ++i)
                for (int j = 0; j < room.cols; ++j) {
                    const Complex got = room.at(i, j).eval(ev);
                    const Complex want = v1[i] * v2[j];
                    CHECK(std::abs(got - want) < 1e-8 * std::max(1.0, std::abs(want)));
                }
        }
        // determinism: rebuilding gives identical coefficients
        const RoomMatrix again = multiplication_matrix(b1, b2, f);
        for (std::size_t e = 0; e < room.entries.size(); ++e)
            for (int i = 0; i < f.n(); ++i)
                CHECK(std::abs(room.entries[e].coeffs[i] - again.entries[e].coeffs[i]) < 1e-12);
    }

    SUBCASE("pair condition violations are rejected") {
        const SectionBasis b1 = basis_of_sections(2, x1, f);
        const SectionBasis bad =
            basis_of_sections(f.n() - 2, random_point(rng, f.spec()), f);
        CHECK_THROWS_AS(multiplication_matrix(b1, bad, f), NotDivisorPair);
        const SectionBasis wrong_degree = basis_of_sections(2, x2, f);
        CHECK_THROWS_AS(multiplication_matrix(b1, wrong_degree, f), NotDivisorPair);
    }

    SUBCASE("rank drops at points of divisors through x1") {
        const SectionBasis b1 = basis_of_sections(2, x1, f);
        const SectionBasis b2 = basis_with_literal_sum(f.n() - 2, f.l_rep() - b1.literal_sum, f, 9);
        const RoomMatrix room = multiplication_matrix(b1, b2, f);
        // row i of Phi evaluated at embed of a zero of e_i vanishes... the
        // invariant: at embed(y) for y in supp((e_i)_0) the matrix has rank < 2.
        const Complex zero_pt = b1.points[0][0];
        const Matrix at_c = room.evaluate_at(f.embed_raw(zero_pt));
        const auto sv = singular_values(at_c);
        CHECK(sv[1] / sv[0] < 1e-8);
    }
}

TEST_CASE("n=4 determinant of the 2x2 Room matrix vanishes on E") {
    const Frame& f = frame4();
    Rng rng(61);
    const EPoint x1 = random_point(rng, f.spec());
    const SectionBasis b1 = basis_of_sections(2, x1, f);
    const SectionBasis b2 = basis_with_literal_sum(2, f.l_rep() - b1.literal_sum, f, 17);
    const RoomMatrix room = multiplication_matrix(b1, b2, f);
    for (int trial = 0; trial < 20; ++trial) {
        const Matrix m = room.evaluate_at(f.embed(random_point(rng, f.spec())));
        const Complex det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
        double scale = 0;
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) scale = std::max(scale, std::abs(m(i, j)));
        CHECK(std::abs(det) < 1e-7 * scale * scale);
    }
}

TEST_CASE("section_zeros") {
    const Frame& f = frame5();
    Rng rng(71);
    const EPoint x = random_point(rng, f.spec());

    SUBCASE("product basis element returns its construction points") {
        const SectionBasis b = basis_of_sections(3, x, f);
        std::vector<Complex> coeffs{1.0, 0.0, 0.0};
        const Divisor zeros = section_zeros(b, coeffs, f);
        REQUIRE(zeros.degree() == 3);
        for (const Complex& pt : b.points[0]) {
            bool found = false;
            for (const auto& part : zeros.parts)
                if (points_equal(part.point, reduce(pt, f.spec()), f.spec())) found = true;
            CHECK(found);
        }
    }

    SUBCASE("Abel sweep: zero sums equal the basis sum for random sections") {
        const SectionBasis b = basis_of_sections(2, x, f);
        for (int trial = 0; trial < 12; ++trial) {
            const auto coeffs = rng.normal_vector(2);
            const Divisor zeros = section_zeros(b, coeffs, f);
            CHECK(zeros.degree() == 2);
            CHECK(points_equal(sum_divisor(zeros, f.spec()), b.sum, f.spec()));
        }
    }

    SUBCASE("double zeros are certified with multiplicity two") {
        const Complex a = 0.31 + 0.42 * f.tau();
        const SectionBasis b = basis_from_offsets(2, 2.0 * a, {{a}, {a + 0.25}}, f);
        const Divisor zeros = section_zeros(b, {1.0, 0.0}, f);
        REQUIRE(zeros.parts.size() == 1);
        CHECK(zeros.parts[0].multiplicity == 2);
        CHECK(lattice_distance(zeros.parts[0].point, reduce(a, f.spec()), f.spec()) < 1e-8);
    }

    SUBCASE("zero coefficients are rejected") {
        const SectionBasis b = basis_of_sections(2, x, f);
        CHECK_THROWS_AS(section_zeros(b, {0.0, 0.0}, f), BadInput);
    }
}

TEST_CASE("xi_perp is the annihilator hyperplane") {
    const Frame& f = frame5();
    Rng rng(81);
    const auto p = normalized(rng.normal_vector(f.n()));
    const Subspace perp = xi_perp(p, f);
    REQUIRE(perp.dim() == static_cast<std::size_t>(f.n() - 1));
    for (std::size_t j = 0; j < perp.dim(); ++j)
        CHECK(std::abs(dot_u(perp.basis.column(j), p)) < 1e-10);

    // membership equivalence: p in span(D) iff forms vanishing on D all kill p
    for (int trial = 0; trial < 12; ++trial) {
        const Divisor dv =
            random_divisor_with_sum(2 + static_cast<int>(rng.below(2)), random_point(rng, f.spec()), rng, f.spec());
        const Subspace sp = span_of_divisor(dv, f);
        const Subspace w = forms_vanishing_on(dv, f);
        // a point on the span
        std::vector<Complex> q(f.n(), 0.0);
        for (std::size_t j = 0; j < sp.dim(); ++j) {
            const Complex c = rng.normal();
            const auto col = sp.basis.column(j);
            for (int i = 0; i < f.n(); ++i) q[i] += c * col[i];
        }
        double viol = 0;
        for (std::size_t j = 0; j < w.dim(); ++j)
            viol = std::max(viol, std::abs(dot_u(w.basis.column(j), q)) / norm2(q));
        CHECK(viol < 1e-8);
        // a random point off the span
        const auto r = normalized(rng.normal_vector(f.n()));
        double viol_r = 0;
        for (std::size_t j = 0; j < w.dim(); ++j)
            viol_r = std::max(viol_r, std::abs(dot_u(w.basis.column(j), r)));
        CHECK(viol_r > 1e-5);
    }
}

TEST_CASE("span lattice identities (join and meet)") {
    const Frame& f = frame5();
    Rng rng(91);
    int tested = 0;
    for (int trial = 0; trial < 30 && tested < 10; ++trial) {
        const EPoint shared = random_point(rng, f.spec());
        const EPoint xa = random_point(rng, f.spec());
        const EPoint xb = random_point(rng, f.spec());
        const Divisor da = make_divisor({{shared, 1}, {xa, 1}}, f.spec());
        const Divisor db = make_divisor({{shared, 1}, {xb, 1}}, f.spec());
        const Divisor l = lcm_divisor(da, db, f.spec());
        const bool lcm_is_hyperplane_class =
            l.degree() == f.n() && points_equal(sum_divisor(l, f.spec()), f.spec().l_sum, f.spec());
        if (l.degree() > f.n() || lcm_is_hyperplane_class) continue;
        ++tested;
        const Subspace join = subspace_join(span_of_divisor(da, f), span_of_divisor(db, f), 1e-10);
        CHECK(subspace_distance(join, span_of_divisor(l, f)) < 1e-7);
        const Subspace meet = subspace_meet(span_of_divisor(da, f), span_of_divisor(db, f), 1e-8);
        const Divisor g = gcd_divisor(da, db, f.spec());
        CHECK(subspace_distance(meet, span_of_divisor(g, f)) < 1e-7);
    }
    CHECK(tested >= 8);
}

TEST_CASE("disjoint supports with low total degree give disjoint spans") {
    const Frame& f = frame5();
    Rng rng(101);
    for (int trial = 0; trial < 6; ++trial) {
        const Divisor da = random_divisor_with_sum(2, random_point(rng, f.spec()), rng, f.spec());
        const Divisor db = random_divisor_with_sum(2, random_point(rng, f.spec()), rng, f.spec());
        if (!supports_disjoint(da, db, f.spec())) continue;
        const Subspace meet = subspace_meet(span_of_divisor(da, f), span_of_divisor(db, f), 1e-8);
        CHECK(meet.dim() == 0);
    }
}

TEST_CASE("curve distance separates on-curve from generic points") {
    const Frame& f = frame4();
    Rng rng(111);
    for (int trial = 0; trial < 4; ++trial) {
        const EPoint x = random_point(rng, f.spec());
        const auto [dist, found] = f.curve_distance(f.embed(x));
        CHECK(dist < 1e-9);
        // the argmin parameter of a quadratic maximum resolves to ~sqrt(eps)
        CHECK(lattice_distance(found, x, f.spec()) < 1e-5);
    }
    const auto [dist_r, found_r] = f.curve_distance(normalized(rng.normal_vector(f.n())));
    CHECK(dist_r > 1e-3);
}

TEST_CASE("frame determinism") {
    const Frame a(make_spec(4, Complex{0.13, 1.08}));
    const Frame b(make_spec(4, Complex{0.13, 1.08}));
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            CHECK(a.embedding_basis().points[i][j] == b.embedding_basis().points[i][j]);
}

TEST_CASE("embed is injective on sample grids") {
    const Frame& f = frame5();
    std::vector<std::vector<Complex>> points;
    const int side = 7;
    for (int i = 0; i < side; ++i)
        for (int j = 0; j < side; ++j)
            points.push_back(f.embed(reduce((i + 0.31) / side + ((j + 0.47) / side) * f.tau(),
                                            f.spec())));
    for (std::size_t a = 0; a < points.size(); ++a)
        for (std::size_t b = a + 1; b < points.size(); ++b)
            CHECK(projective_distance(points[a], points[b]) > 1e-6);
}

TEST_CASE("spans of low-degree divisors meet the curve exactly in the divisor") {
    const Frame& f = frame5();
    Rng rng(131);
    const Divisor dv = random_divisor_with_sum(3, random_point(rng, f.spec()), rng, f.spec());
    const Subspace sp = span_of_divisor(dv, f);
    for (const auto& part : dv.parts) CHECK(sp.contains(f.embed(part.point), 1e-8));
    // a sweep of other curve points stays off the span
    for (int i = 0; i < 40; ++i) {
        const EPoint y = random_point(rng, f.spec());
        bool in_support = false;
        for (const auto& part : dv.parts)
            if (lattice_distance(part.point, y, f.spec()) < 1e-2) in_support = true;
        if (!in_support) CHECK(sp.distance_to(f.embed(y)) > 1e-4);
    }
}
