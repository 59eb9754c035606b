#include "leafscope/io.hpp"

#include <fstream>

namespace leafscope {

namespace {

Json complex_to_json(Complex z) { return Json::array({z.real(), z.imag()}); }

Complex complex_from_json(const Json& j) {
    return {j.at(0).get<double>(), j.at(1).get<double>()};
}

Json point_list_to_json(const std::vector<Complex>& v) {
    Json out = Json::array();
    for (const auto& z : v) out.push_back(complex_to_json(z));
    return out;
}

std::vector<Complex> point_list_from_json(const Json& j) {
    std::vector<Complex> out;
    for (const auto& e : j) out.push_back(complex_from_json(e));
    return out;
}

}  // namespace

Json spec_to_json(const CurveSpec& spec) {
    return Json{{"tau", complex_to_json(spec.tau)},
                {"n", spec.n},
                {"l_sum", complex_to_json(spec.l_sum.z)},
                {"tolerances",
                 Json{{"lattice_tol", spec.tol.lattice_tol},
                      {"rank_tol", spec.tol.rank_tol},
                      {"theta_terms", spec.tol.theta_terms},
                      {"root_tol", spec.tol.root_tol},
                      {"seed", spec.tol.seed}}},
                {"theta_convention", spec.theta_convention}};
}

CurveSpec spec_from_json(const Json& j) {
    CurveSpec spec;
    spec.tau = complex_from_json(j.at("tau"));
    spec.n = j.at("n").get<int>();
    if (j.contains("l_sum")) spec.l_sum.z = complex_from_json(j.at("l_sum"));
    if (j.contains("tolerances")) {
        const Json& t = j.at("tolerances");
        if (t.contains("lattice_tol")) spec.tol.lattice_tol = t.at("lattice_tol").get<double>();
        if (t.contains("rank_tol")) spec.tol.rank_tol = t.at("rank_tol").get<double>();
        if (t.contains("theta_terms")) spec.tol.theta_terms = t.at("theta_terms").get<int>();
        if (t.contains("root_tol")) spec.tol.root_tol = t.at("root_tol").get<double>();
        if (t.contains("seed")) spec.tol.seed = t.at("seed").get<std::uint64_t>();
    }
    if (j.contains("theta_convention"))
        spec.theta_convention = j.at("theta_convention").get<std::string>();
    spec.validate();
    spec.l_sum = reduce(spec.l_sum.z, spec);
    return spec;
}

Json bundle_to_json(const BundleDescriptor& b) {
    switch (b.variant) {
        case BundleVariant::DecomposableSum:
            return Json{{"variant", "decomposable_sum"}, {"d", b.d}, {"x", complex_to_json(b.x.z)}};
        case BundleVariant::IndecomposableOdd:
            return Json{{"variant", "indecomposable_odd"}};
        case BundleVariant::IndecomposableOmega:
            return Json{{"variant", "indecomposable_omega"}, {"x", complex_to_json(b.x.z)}};
    }
    throw BadInput("bundle_to_json: unknown variant");
}

BundleDescriptor bundle_from_json(const Json& j) {
    const std::string variant = j.at("variant").get<std::string>();
    if (variant == "decomposable_sum")
        return BundleDescriptor::decomposable(j.at("d").get<int>(),
                                              EPoint{complex_from_json(j.at("x"))});
    if (variant == "indecomposable_odd") return BundleDescriptor::indecomposable_odd();
    if (variant == "indecomposable_omega")
        return BundleDescriptor::indecomposable_omega(EPoint{complex_from_json(j.at("x"))});
    throw BadInput("bundle_from_json: unknown variant " + variant);
}

Json divisor_to_json(const Divisor& d) {
    Json out = Json::array();
    for (const auto& part : d.parts)
        out.push_back(Json::array({complex_to_json(part.point.z), part.multiplicity}));
    return out;
}

Divisor divisor_from_json(const Json& j, const CurveSpec& spec) {
    std::vector<Divisor::Part> parts;
    for (const auto& e : j)
        parts.push_back({EPoint{complex_from_json(e.at(0))}, e.at(1).get<int>()});
    return make_divisor(std::move(parts), spec);
}

Json label_to_json(const LeafLabel& label) {
    Json out = bundle_to_json(label.bundle);
    if (label.witness) out["witness_divisor"] = divisor_to_json(*label.witness);
    if (label.secant_count)
        out["secant_count"] = *label.secant_count == SecantCount::Unique ? "unique" : "pencil";
    if (label.poisson_rank >= 0) out["rank"] = label.poisson_rank;
    return out;
}

Json classification_to_json(const Classification& c) {
    if (!c.ambiguous) {
        Json out = label_to_json(c.label);
        out["ambiguous"] = false;
        out["residual"] = c.residual;
        return out;
    }
    Json candidates = Json::array();
    for (const auto& cand : c.candidates) candidates.push_back(label_to_json(cand));
    return Json{{"ambiguous", true}, {"note", c.note}, {"residual", c.residual},
                {"candidates", candidates}};
}

Json form_to_json(const PolynomialForm& f) {
    Json coeffs = Json::array();
    for (const auto& [key, c] : f.coeffs()) {
        Json exps = Json::array();
        for (int v = 0; v < f.num_vars(); ++v) exps.push_back(mono_exponent(key, v));
        coeffs.push_back(Json::array({exps, complex_to_json(c)}));
    }
    return Json{{"num_vars", f.num_vars()}, {"degree", f.degree()}, {"coeffs", coeffs}};
}

PolynomialForm form_from_json(const Json& j) {
    PolynomialForm f(j.at("num_vars").get<int>(), j.at("degree").get<int>());
    for (const auto& term : j.at("coeffs")) {
        std::array<int, kMaxPolyVars> exps{};
        const Json& e = term.at(0);
        for (std::size_t v = 0; v < e.size(); ++v) exps[v] = e.at(v).get<int>();
        f.set(mono_pack(exps), complex_from_json(term.at(1)));
    }
    return f;
}

namespace {

Json diagnostics_to_json(const SolveDiagnostics& d) {
    return Json{{"null_spectrum", d.tail_spectrum},
                {"null_gap", d.null_gap},
                {"seconds", d.seconds},
                {"rows", d.rows},
                {"cols", d.cols}};
}

SolveDiagnostics diagnostics_from_json(const Json& j) {
    SolveDiagnostics d;
    if (j.contains("null_spectrum")) d.tail_spectrum = j.at("null_spectrum").get<std::vector<double>>();
    if (j.contains("null_gap")) d.null_gap = j.at("null_gap").get<double>();
    if (j.contains("seconds")) d.seconds = j.at("seconds").get<double>();
    if (j.contains("rows")) d.rows = j.at("rows").get<std::size_t>();
    if (j.contains("cols")) d.cols = j.at("cols").get<std::size_t>();
    return d;
}

}  // namespace

Json cache_to_json(const PoissonCache& cache) {
    Json forms = Json::array();
    for (const auto& f : cache.forms) forms.push_back(form_to_json(f));
    Json entries = Json::array();
    const int n = cache.omega.n();
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            entries.push_back(
                Json{{"i", i}, {"j", j}, {"form", form_to_json(cache.omega.upper_entry(i, j))}});
    Json probes = Json::array();
    for (std::size_t k = 0; k < cache.probe_points.size(); ++k)
        probes.push_back(Json{{"point", point_list_to_json(cache.probe_points[k])},
                              {"values", point_list_to_json(cache.probe_values[k])}});
    return Json{{"spec", spec_to_json(cache.spec)},
                {"forms", forms},
                {"omega_matrix", Json{{"n", n}, {"entries", entries}}},
                {"diagnostics", Json{{"syzygy", diagnostics_to_json(cache.syzygy)},
                                     {"interpolation", diagnostics_to_json(cache.interpolation)},
                                     {"null_spectrum", cache.syzygy.tail_spectrum}}},
                {"probes", probes},
                {"convention_tag", cache.convention_tag}};
}

PoissonCache cache_from_json(const Json& j) {
    PoissonCache cache;
    cache.spec = spec_from_json(j.at("spec"));
    for (const auto& f : j.at("forms")) cache.forms.push_back(form_from_json(f));
    const Json& om = j.at("omega_matrix");
    const int n = om.at("n").get<int>();
    std::vector<PolynomialForm> upper(static_cast<std::size_t>(n) * (n - 1) / 2,
                                      PolynomialForm(n, 2));
    for (const auto& e : om.at("entries")) {
        const int i = e.at("i").get<int>();
        const int jj = e.at("j").get<int>();
        upper[PoissonMatrix::upper_index(i, jj, n)] = form_from_json(e.at("form"));
    }
    cache.omega = PoissonMatrix(n, std::move(upper));
    if (j.contains("diagnostics")) {
        const Json& d = j.at("diagnostics");
        if (d.contains("syzygy")) cache.syzygy = diagnostics_from_json(d.at("syzygy"));
        if (d.contains("interpolation"))
            cache.interpolation = diagnostics_from_json(d.at("interpolation"));
    }
    if (j.contains("probes")) {
        for (const auto& probe : j.at("probes")) {
            cache.probe_points.push_back(point_list_from_json(probe.at("point")));
            cache.probe_values.push_back(point_list_from_json(probe.at("values")));
        }
    }
    if (j.contains("convention_tag")) cache.convention_tag = j.at("convention_tag").get<std::string>();
    return cache;
}

void write_json_file(const std::string& path, const Json& j) {
    std::ofstream out(path);
    if (!out) throw BadInput("cannot open for writing: " + path);
    out << j.dump(2) << "\n";
}

Json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw BadInput("cannot open for reading: " + path);
    Json j;
    in >> j;
    return j;
}

}  // namespace leafscope
