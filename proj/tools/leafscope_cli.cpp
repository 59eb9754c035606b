// leafscope: build elliptic-curve Poisson data, classify points of P^{n-1}
// into symplectic leaves, and run the verification battery.

#include <cstdio>
#include <iostream>
#include <memory>
#include <sstream>

#include "CLI11.hpp"
#include "leafscope/io.hpp"
#include "leafscope/verify.hpp"

using namespace leafscope;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitBadInput = 2;
constexpr int kExitSolverFailure = 3;
constexpr int kExitAmbiguous = 4;
constexpr int kExitVerifyFailure = 5;

std::vector<Complex> parse_point(const std::string& text, int n) {
    std::vector<Complex> out;
    std::stringstream stream(text);
    std::string chunk;
    while (std::getline(stream, chunk, ';')) {
        const auto comma = chunk.find(',');
        if (comma == std::string::npos) throw BadInput("point: expected re,im pairs separated by ;");
        out.emplace_back(std::stod(chunk.substr(0, comma)), std::stod(chunk.substr(comma + 1)));
    }
    if (static_cast<int>(out.size()) != n)
        throw BadInput("point: expected " + std::to_string(n) + " coordinates");
    return out;
}

BundleDescriptor parse_leaf_descriptor(const std::string& text, const CurveSpec& spec, Rng& rng) {
    std::vector<std::string> parts;
    std::stringstream stream(text);
    std::string chunk;
    while (std::getline(stream, chunk, ':')) parts.push_back(chunk);
    if (parts.empty()) throw BadInput("empty leaf descriptor");
    const auto coset = omega_coset(spec);
    if (parts[0] == "e_o") return BundleDescriptor::indecomposable_odd();
    if (parts[0] == "e_omega") {
        const int k = parts.size() > 1 ? std::stoi(parts[1]) : 0;
        if (k < 0 || k > 3) throw BadInput("e_omega index must be 0..3");
        return BundleDescriptor::indecomposable_omega(coset[k]);
    }
    if (parts[0] == "vertex") {
        const int k = parts.size() > 1 ? std::stoi(parts[1]) : 0;
        if (k < 0 || k > 3) throw BadInput("vertex index must be 0..3");
        return BundleDescriptor::decomposable(spec.half(), coset[k]);
    }
    if (parts[0] == "dec") {
        if (parts.size() < 2) throw BadInput("dec descriptor needs a degree: dec:d[:re,im]");
        const int d = std::stoi(parts[1]);
        EPoint x = random_point(rng, spec);
        if (parts.size() > 2) {
            const auto comma = parts[2].find(',');
            if (comma == std::string::npos) throw BadInput("dec point must be re,im");
            x = reduce(Complex(std::stod(parts[2].substr(0, comma)),
                               std::stod(parts[2].substr(comma + 1))),
                       spec);
        }
        return BundleDescriptor::decomposable(d, x);
    }
    throw BadInput("unknown leaf descriptor '" + parts[0] +
                   "' (expected e_o | e_omega:K | vertex:K | dec:d[:re,im])");
}

void print_family_table(const CurveSpec& spec) {
    std::printf("leaf families:\n");
    for (const auto& family : enumerate_leaf_families(spec)) {
        std::printf("  %-28s dim %d", family.name.c_str(), family.dim);
        if (family.param_dim == 1)
            std::printf("  (one leaf per x in E)\n");
        else if (family.representative.variant == BundleVariant::IndecomposableOdd)
            std::printf("  (single open leaf)\n");
        else
            std::printf("  (omega = %.6g%+.6gi)\n", family.representative.x.z.real(),
                        family.representative.x.z.imag());
    }
}

int cmd_curve_new(const CurveSpec& spec, const std::string& out_path) {
    spec.validate();
    write_json_file(out_path, spec_to_json(spec));
    std::printf("wrote %s (n=%d, tau=%.6g%+.6gi)\n", out_path.c_str(), spec.n, spec.tau.real(),
                spec.tau.imag());
    std::printf("omega coset:\n");
    for (const auto& w : omega_coset(spec))
        std::printf("  (%.9g, %.9g)\n", w.z.real(), w.z.imag());
    return kExitOk;
}

int cmd_curve_show(const std::string& spec_path) {
    const CurveSpec spec = spec_from_json(read_json_file(spec_path));
    std::printf("n = %d\n", spec.n);
    std::printf("tau = %.12g%+.12gi\n", spec.tau.real(), spec.tau.imag());
    std::printf("sigma(L) = %.12g%+.12gi\n", spec.l_sum.z.real(), spec.l_sum.z.imag());
    std::printf("theta convention: %s\n", spec.theta_convention.c_str());
    std::printf("omega coset (2w = sigma(L)):\n");
    for (const auto& w : omega_coset(spec))
        std::printf("  (%.9g, %.9g)\n", w.z.real(), w.z.imag());
    print_family_table(spec);
    return kExitOk;
}

int cmd_poisson_build(const std::string& spec_path, const std::string& out_path,
                      std::size_t samples, std::uint64_t seed) {
    const CurveSpec spec = spec_from_json(read_json_file(spec_path));
    const Frame frame(spec);
    const SecantEngine engine(frame);
    const PoissonCache cache = build_poisson_cache(frame, engine, samples, seed);
    write_json_file(out_path, cache_to_json(cache));
    std::printf("wrote %s\n", out_path.c_str());
    std::printf("syzygy system %zu x %zu, null gap %.4g, solve %.2f s\n", cache.syzygy.rows,
                cache.syzygy.cols, cache.syzygy.null_gap, cache.syzygy.seconds);
    std::printf("null spectrum tail:");
    for (double s : cache.syzygy.tail_spectrum) std::printf(" %.4g", s);
    std::printf("\n");
    if (!spec.is_even())
        std::printf("interpolation system %zu x %zu, null gap %.4g\n", cache.interpolation.rows,
                    cache.interpolation.cols, cache.interpolation.null_gap);
    return kExitOk;
}

int cmd_classify(const std::string& spec_path, const std::string& cache_path,
                 const std::string& point_text, const std::string& leaf_text, std::uint64_t seed,
                 bool as_json) {
    const CurveSpec spec = spec_from_json(read_json_file(spec_path));
    const Frame frame(spec);
    const SecantEngine engine(frame);
    const LeafClassifier classifier(frame, engine);

    std::unique_ptr<PoissonCache> cache;
    if (!cache_path.empty())
        cache = std::make_unique<PoissonCache>(cache_from_json(read_json_file(cache_path)));

    std::vector<Complex> point;
    if (!point_text.empty()) {
        point = parse_point(point_text, spec.n);
    } else if (!leaf_text.empty()) {
        Rng rng(seed ? seed : spec.tol.seed);
        const BundleDescriptor want = parse_leaf_descriptor(leaf_text, spec, rng);
        point = classifier.sample_leaf(want, rng);
        std::printf("sampled point:");
        for (const auto& z : point) std::printf(" %.12g,%.12g;", z.real(), z.imag());
        std::printf("\n");
    } else {
        throw BadInput("classify: provide --point or --sample-leaf");
    }

    Classification result = classifier.classify(point);
    if (!result.ambiguous && cache) {
        const auto rank = poisson_rank(cache->omega, point, spec);
        result.label.poisson_rank = rank.rank;
    }
    const Json j = classification_to_json(result);
    if (as_json) {
        std::printf("%s\n", j.dump(2).c_str());
    } else if (result.ambiguous) {
        std::printf("ambiguous classification: %s\n", result.note.c_str());
        std::printf("%s\n", j.dump(2).c_str());
    } else {
        std::printf("leaf: %s\n", bundle_display(result.label.bundle, spec).c_str());
        std::printf("leaf dimension: %d\n", leaf_dim(result.label.bundle, spec));
        if (result.label.poisson_rank >= 0)
            std::printf("rank Pi: %d\n", result.label.poisson_rank);
        if (result.label.secant_count)
            std::printf("secant count: %s\n",
                        *result.label.secant_count == SecantCount::Unique ? "unique" : "pencil");
        if (result.label.witness) {
            std::printf("witness divisor:");
            for (const auto& part : result.label.witness->parts)
                std::printf(" (%.9g,%.9g)x%d", part.point.z.real(), part.point.z.imag(),
                            part.multiplicity);
            std::printf("\n");
        }
    }
    return result.ambiguous ? kExitAmbiguous : kExitOk;
}

int cmd_verify(const std::string& spec_path, const std::string& cache_path,
               const std::string& level, const std::string& report_path) {
    const CurveSpec spec = spec_from_json(read_json_file(spec_path));
    const Frame frame(spec);
    const SecantEngine engine(frame);
    const LeafClassifier classifier(frame, engine);
    PoissonCache cache;
    if (!cache_path.empty())
        cache = cache_from_json(read_json_file(cache_path));
    else
        cache = build_poisson_cache(frame, engine);

    const VerifyParams params = level == "full" ? VerifyParams::full() : VerifyParams::quick();
    const VerificationReport report =
        run_verification(frame, engine, classifier, cache, params, level);
    for (const auto& check : report.checks)
        std::printf("[%s] %-26s residual=%-11.4g tol=%-9.3g samples=%-5ld %s(%.2f s)\n",
                    check.passed() ? "PASS" : "FAIL", check.name.c_str(), check.residual,
                    check.tolerance, check.samples,
                    check.detail.empty() ? "" : (check.detail + " ").c_str(), check.seconds);
    if (!report_path.empty()) {
        write_json_file(report_path, report_to_json(report));
        std::printf("report written to %s\n", report_path.c_str());
    }
    return report.all_passed() ? kExitOk : kExitVerifyFailure;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"symplectic-leaf toolkit for elliptic Poisson structures on P^{n-1}"};
    app.require_subcommand(1);

    // curve new | show
    auto* curve = app.add_subcommand("curve", "create or inspect curve specifications");
    curve->require_subcommand(1);
    auto* curve_new = curve->add_subcommand("new", "write a curve specification file");
    double tau_re = 0.0, tau_im = 1.0, l_re = 0.0, l_im = 0.0;
    int n = 5;
    std::string out_path = "spec.json";
    std::uint64_t seed = 0;
    double lattice_tol = 0, rank_tol = 0, root_tol = 0;
    int theta_terms = 0;
    curve_new->add_option("--tau-re", tau_re, "Re(tau)");
    curve_new->add_option("--tau-im", tau_im, "Im(tau) > 0");
    curve_new->add_option("--n", n, "degree of the embedding bundle (>= 3)");
    curve_new->add_option("--l-sum-re", l_re, "Re of sigma(L)");
    curve_new->add_option("--l-sum-im", l_im, "Im of sigma(L)");
    curve_new->add_option("--out", out_path, "output path");
    curve_new->add_option("--seed", seed, "deterministic RNG seed");
    curve_new->add_option("--lattice-tol", lattice_tol, "torus point tolerance");
    curve_new->add_option("--rank-tol", rank_tol, "relative SVD threshold");
    curve_new->add_option("--root-tol", root_tol, "Newton tolerance for section zeros");
    curve_new->add_option("--theta-terms", theta_terms, "q-series truncation bound");

    auto* curve_show = curve->add_subcommand("show", "print a curve specification");
    std::string show_spec;
    curve_show->add_option("--spec", show_spec, "spec file")->required();

    // poisson build
    auto* poisson = app.add_subcommand("poisson", "Poisson bracket computations");
    poisson->require_subcommand(1);
    auto* poisson_build = poisson->add_subcommand("build", "interpolate forms and solve syzygies");
    std::string pb_spec, pb_out = "cache.json";
    std::size_t pb_samples = 0;
    std::uint64_t pb_seed = 0;
    poisson_build->add_option("--spec", pb_spec, "spec file")->required();
    poisson_build->add_option("--out", pb_out, "cache output path");
    poisson_build->add_option("--samples", pb_samples, "interpolation sample count (0 = default)");
    poisson_build->add_option("--seed", pb_seed, "sampling seed");

    // classify
    auto* classify = app.add_subcommand("classify", "map a point to its symplectic leaf");
    std::string cl_spec, cl_cache, cl_point, cl_leaf;
    std::uint64_t cl_seed = 0;
    bool cl_json = false;
    classify->add_option("--spec", cl_spec, "spec file")->required();
    classify->add_option("--cache", cl_cache, "poisson cache (enables rank output)");
    classify->add_option("--point", cl_point, "homogeneous coordinates re,im;re,im;...");
    classify->add_option("--sample-leaf", cl_leaf,
                         "sample from a leaf: e_o | e_omega:K | vertex:K | dec:d[:re,im]");
    classify->add_option("--seed", cl_seed, "sampling seed");
    classify->add_flag("--json", cl_json, "print the full JSON label");

    // verify
    auto* verify = app.add_subcommand("verify", "run the verification battery");
    std::string vf_spec, vf_cache, vf_level = "quick", vf_report;
    verify->add_option("--spec", vf_spec, "spec file")->required();
    verify->add_option("--cache", vf_cache, "poisson cache (built in memory when omitted)");
    verify->add_option("--level", vf_level, "quick | full")
        ->check(CLI::IsMember({"quick", "full"}));
    verify->add_option("--report", vf_report, "write the JSON report here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitBadInput;
    }

    try {
        if (curve_new->parsed()) {
            CurveSpec spec;
            spec.tau = {tau_re, tau_im};
            spec.n = n;
            spec.l_sum.z = {l_re, l_im};
            if (seed) spec.tol.seed = seed;
            if (lattice_tol > 0) spec.tol.lattice_tol = lattice_tol;
            if (rank_tol > 0) spec.tol.rank_tol = rank_tol;
            if (root_tol > 0) spec.tol.root_tol = root_tol;
            if (theta_terms > 0) spec.tol.theta_terms = theta_terms;
            spec.validate();
            spec.l_sum = reduce(spec.l_sum.z, spec);
            return cmd_curve_new(spec, out_path);
        }
        if (curve_show->parsed()) return cmd_curve_show(show_spec);
        if (poisson_build->parsed()) return cmd_poisson_build(pb_spec, pb_out, pb_samples, pb_seed);
        if (classify->parsed())
            return cmd_classify(cl_spec, cl_cache, cl_point, cl_leaf, cl_seed, cl_json);
        if (verify->parsed()) return cmd_verify(vf_spec, vf_cache, vf_level, vf_report);
    } catch (const BadInput& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitBadInput;
    } catch (const NumericFailure& e) {
        std::fprintf(stderr, "solver failure: %s\n", e.what());
        return kExitSolverFailure;
    } catch (const RejectionBudgetExhausted& e) {
        std::fprintf(stderr, "solver failure: %s\n", e.what());
        return kExitSolverFailure;
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitSolverFailure;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitBadInput;
    }
    return kExitBadInput;
}
