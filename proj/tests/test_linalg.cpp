#include "doctest.h"
#include "leafscope/linalg.hpp"
#include "leafscope/rng.hpp"

using namespace leafscope;

namespace {

Matrix random_matrix(Rng& rng, std::size_t m, std::size_t n) {
    Matrix a(m, n);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) a(i, j) = rng.normal();
    return a;
}

}  // namespace

TEST_CASE("svd reconstructs the matrix and orders singular values") {
    Rng rng(7);
    for (auto [m, n] : {std::pair<std::size_t, std::size_t>{9, 5}, {5, 9}, {6, 6}, {1, 4}, {4, 1}}) {
        Matrix a = random_matrix(rng, m, n);
        SvdResult fac = svd(a);
        const std::size_t k = std::min(m, n);
        REQUIRE(fac.s.size() == k);
        for (std::size_t j = 0; j + 1 < k; ++j) CHECK(fac.s[j] >= fac.s[j + 1]);
        // A == U S V^H
        Matrix us(m, k);
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < k; ++j) us(i, j) = fac.u(i, j) * fac.s[j];
        Matrix recon = us * fac.v.adjoint();
        double err = 0;
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < n; ++j) err = std::max(err, std::abs(recon(i, j) - a(i, j)));
        CHECK(err < 1e-12);
        // V orthonormal
        Matrix vhv = fac.v.adjoint() * fac.v;
        for (std::size_t i = 0; i < k; ++i)
            for (std::size_t j = 0; j < k; ++j)
                CHECK(std::abs(vhv(i, j) - (i == j ? 1.0 : 0.0)) < 1e-12);
    }
}

TEST_CASE("null space of a rank-deficient matrix") {
    Rng rng(11);
    // 6x4 matrix of rank 2: outer products
    Matrix a(6, 4);
    auto u1 = rng.normal_vector(6), u2 = rng.normal_vector(6);
    auto v1 = rng.normal_vector(4), v2 = rng.normal_vector(4);
    for (std::size_t i = 0; i < 6; ++i)
        for (std::size_t j = 0; j < 4; ++j) a(i, j) = u1[i] * v1[j] + u2[i] * v2[j];
    Matrix ns = null_space(a, 1e-10);
    REQUIRE(ns.cols() == 2);
    for (std::size_t j = 0; j < 2; ++j) {
        auto x = ns.column(j);
        auto ax = a * x;
        CHECK(norm2(ax) < 1e-10);
    }
    auto decision = decide_rank(singular_values(a), 1e-10);
    CHECK(decision.rank == 2);
    CHECK_FALSE(decision.ambiguous);
}

TEST_CASE("least squares against brute-force normal equations") {
    Rng rng(13);
    Matrix a = random_matrix(rng, 10, 4);
    auto x_true = rng.normal_vector(4);
    auto b = a * x_true;
    auto x = least_squares(svd(a), b, 1e-12);
    for (std::size_t i = 0; i < 4; ++i) CHECK(std::abs(x[i] - x_true[i]) < 1e-11);
}

TEST_CASE("gap rule flags ambiguous spectra") {
    std::vector<double> clean{1.0, 0.5, 1e-12};
    auto d1 = decide_rank(clean, 1e-8);
    CHECK(d1.rank == 2);
    CHECK_FALSE(d1.ambiguous);

    std::vector<double> murky{1.0, 3e-7, 8e-8};  // kept/dropped ratio well under the gap rule
    auto d2 = decide_rank(murky, 1e-7);
    CHECK(d2.rank == 2);
    CHECK(d2.ambiguous);
}

TEST_CASE("determinant and square solve") {
    Matrix a(2, 2);
    a(0, 0) = {1, 1};
    a(0, 1) = {2, 0};
    a(1, 0) = {0, 1};
    a(1, 1) = {1, -1};
    // det = (1+i)(1-i) - 2i = 2 - 2i
    CHECK(std::abs(determinant(a) - Complex{2, -2}) < 1e-14);
    std::vector<Complex> b{{1, 0}, {0, 0}};
    auto x = solve_square(a, b);
    auto ax = a * x;
    CHECK(std::abs(ax[0] - b[0]) < 1e-14);
    CHECK(std::abs(ax[1] - b[1]) < 1e-14);
}

TEST_CASE("polynomial_roots recovers constructed roots") {
    // (z - 1)(z - 2i)(z + 3)(z - (1+i)) expanded via convolution
    std::vector<Complex> roots{{1, 0}, {0, 2}, {-3, 0}, {1, 1}};
    std::vector<Complex> c{1.0};
    for (auto r : roots) {
        std::vector<Complex> next(c.size() + 1);
        for (std::size_t i = 0; i < c.size(); ++i) {
            next[i] += -r * c[i];
            next[i + 1] += c[i];
        }
        c = next;
    }
    auto found = polynomial_roots(c);
    REQUIRE(found.size() == 4);
    for (auto r : roots) {
        double best = 1e300;
        for (auto f : found) best = std::min(best, std::abs(f - r));
        CHECK(best < 1e-9);
    }
}

TEST_CASE("subspace join meet and distance") {
    Rng rng(17);
    auto e = [&](int i) {
        std::vector<Complex> v(5, 0.0);
        v[i] = 1.0;
        return v;
    };
    Subspace a = subspace_from_span(5, {e(0), e(1)}, 1e-10);
    Subspace b = subspace_from_span(5, {e(1), e(2)}, 1e-10);
    Subspace meet = subspace_meet(a, b, 1e-8);
    REQUIRE(meet.dim() == 1);
    CHECK(meet.contains(e(1), 1e-9));
    Subspace join = subspace_join(a, b, 1e-10);
    CHECK(join.dim() == 3);
    CHECK(subspace_distance(a, a) < 1e-12);
    CHECK(subspace_distance(a, b) > 0.9);

    // rotated copy of the same span
    Subspace c = subspace_from_span(
        5, {e(0), e(1),
            [&] {
                auto v = e(0);
                for (std::size_t i = 0; i < 5; ++i) v[i] += Complex{0.3, -0.2} * e(1)[i];
                return v;
            }()},
        1e-10);
    CHECK(c.dim() == 2);
    // sqrt(1 - cos^2) resolves equality only to sqrt(machine eps)
    CHECK(subspace_distance(a, c) < 1e-7);
}
