#include <cstdio>

#include "doctest.h"
#include "leafscope/io.hpp"
#include "leafscope/verify.hpp"

using namespace leafscope;

namespace {
CurveSpec make_spec(int n, Complex tau = {0.0, 1.0}) {
    CurveSpec s;
    s.n = n;
    s.tau = tau;
    return s;
}
}  // namespace

TEST_CASE("curve spec round trip") {
    CurveSpec spec = make_spec(4, Complex{0.1, 1.15});
    spec.l_sum = reduce(Complex{0.21, 0.37}, spec);
    spec.tol.rank_tol = 3e-9;
    spec.tol.seed = 99;
    const Json j = spec_to_json(spec);
    const CurveSpec back = spec_from_json(j);
    CHECK(back.n == spec.n);
    CHECK(std::abs(back.tau - spec.tau) < 1e-15);
    CHECK(std::abs(back.l_sum.z - spec.l_sum.z) < 1e-15);
    CHECK(back.tol.rank_tol == spec.tol.rank_tol);
    CHECK(back.tol.seed == spec.tol.seed);
    CHECK(back.theta_convention == spec.theta_convention);

    Json bad = j;
    bad["tau"] = Json::array({0.3, -1.0});
    CHECK_THROWS_AS(spec_from_json(bad), BadInput);
}

TEST_CASE("bundle and label round trip") {
    const CurveSpec spec = make_spec(4);
    const EPoint w = omega_coset(spec)[1];
    for (const BundleDescriptor& b :
         {BundleDescriptor::decomposable(2, reduce(Complex{0.3, 0.4}, spec)),
          BundleDescriptor::indecomposable_omega(w)}) {
        const BundleDescriptor back = bundle_from_json(bundle_to_json(b));
        CHECK(back.variant == b.variant);
        CHECK(bundles_equal(back, b, spec, 1e-12));
    }
    const BundleDescriptor odd = BundleDescriptor::indecomposable_odd();
    CHECK(bundle_from_json(bundle_to_json(odd)).variant == BundleVariant::IndecomposableOdd);

    LeafLabel label;
    label.bundle = BundleDescriptor::decomposable(2, reduce(Complex{0.25, 0.5}, spec));
    label.witness = make_divisor({{reduce(Complex{0.1, 0.2}, spec), 1},
                                  {reduce(Complex{0.15, 0.3}, spec), 2}},
                                 spec);
    label.secant_count = SecantCount::Pencil;
    const Json j = label_to_json(label);
    CHECK(j.at("secant_count") == "pencil");
    const Divisor back = divisor_from_json(j.at("witness_divisor"), spec);
    CHECK(divisors_equal(back, *label.witness, spec));
}

TEST_CASE("polynomial form round trip preserves evaluation") {
    Rng rng(5);
    PolynomialForm f(4, 3);
    const auto basis = monomials_of_degree(4, 3);
    for (int k = 0; k < 8; ++k) f.set(basis[rng.below(basis.size())], rng.normal());
    const PolynomialForm back = form_from_json(form_to_json(f));
    CHECK(back.degree() == 3);
    const auto p = rng.normal_vector(4);
    CHECK(std::abs(back.eval(p) - f.eval(p)) < 1e-13 * std::max(1.0, std::abs(f.eval(p))));
}

TEST_CASE("poisson cache file round trip reproduces probes") {
    const CurveSpec spec = make_spec(4, Complex{0.1, 1.15});
    static Frame frame(spec);
    static SecantEngine engine(frame);
    const PoissonCache cache = build_poisson_cache(frame, engine);

    const std::string path = "/tmp/leafscope_cache_test.json";
    write_json_file(path, cache_to_json(cache));
    const PoissonCache loaded = cache_from_json(read_json_file(path));
    std::remove(path.c_str());

    CHECK(loaded.spec.n == 4);
    CHECK(loaded.forms.size() == 2);
    CHECK(loaded.convention_tag == cache.convention_tag);
    REQUIRE(loaded.probe_points.size() == cache.probe_points.size());
    // reloading and re-evaluating at the stored probes reproduces the values
    CHECK(loaded.probe_deviation(frame) < 1e-10);
    CHECK(loaded.syzygy.null_gap == cache.syzygy.null_gap);

    // corruption is detected
    PoissonCache corrupt = loaded;
    corrupt.omega.upper()[0].add_term(monomials_of_degree(4, 2)[0], Complex{1e-4, 0});
    CHECK(corrupt.probe_deviation(frame) > 1e-8);
}

TEST_CASE("report schema round trips") {
    VerificationReport report;
    report.n = 4;
    report.level = "quick";
    report.checks.push_back({"alpha", "pass", 1e-9, 1e-6, 42, 0.5, "fine"});
    report.checks.push_back({"beta", "fail", 2e-3, 1e-6, 7, 0.1, "broke"});
    const Json j = report_to_json(report);
    CHECK(j.at("passed") == false);
    CHECK(j.at("checks").size() == 2);
    CHECK(j.at("checks").at(0).at("name") == "alpha");
    CHECK(j.at("checks").at(0).at("status") == "pass");
    CHECK(j.at("checks").at(1).at("residual").get<double>() == 2e-3);
    CHECK(j.at("checks").at(1).at("samples").get<long>() == 7);
}
