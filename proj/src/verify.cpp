#include "leafscope/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

namespace leafscope {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

CheckResult finish(CheckResult check, Clock::time_point start) {
    check.seconds = elapsed(start);
    return check;
}

std::string fmt(double v) {
    std::ostringstream out;
    out.precision(3);
    out << v;
    return out.str();
}

// Jacobian rank of the parametrization theta -> sum_j c_j E(z_j) by central
// differences; columns are scale-normalized before the rank decision.
int parametrization_rank(const Frame& frame, const std::vector<Complex>& params,
                         const std::function<std::vector<Complex>(const std::vector<Complex>&)>& psi) {
    const double h = 1e-5;
    const std::size_t n = frame.n();
    Matrix jac(n, params.size());
    for (std::size_t k = 0; k < params.size(); ++k) {
        auto plus = params, minus = params;
        plus[k] += h;
        minus[k] -= h;
        const auto fp = psi(plus);
        const auto fm = psi(minus);
        double scale = 0;
        std::vector<Complex> col(n);
        for (std::size_t i = 0; i < n; ++i) {
            col[i] = (fp[i] - fm[i]) / (2 * h);
            scale = std::max(scale, std::abs(col[i]));
        }
        if (scale == 0) scale = 1;
        for (std::size_t i = 0; i < n; ++i) jac(i, k) = col[i] / scale;
    }
    return static_cast<int>(decide_rank(singular_values(jac), 1e-6).rank);
}

}  // namespace

Json report_to_json(const VerificationReport& report) {
    Json checks = Json::array();
    for (const auto& c : report.checks)
        checks.push_back(Json{{"name", c.name},
                              {"status", c.status},
                              {"residual", c.residual},
                              {"tolerance", c.tolerance},
                              {"samples", c.samples},
                              {"seconds", c.seconds},
                              {"detail", c.detail}});
    return Json{{"n", report.n},
                {"level", report.level},
                {"passed", report.all_passed()},
                {"checks", checks}};
}

CheckResult check_syzygy_uniqueness(const PoissonCache& cache) {
    const auto start = Clock::now();
    CheckResult check;
    check.name = "syzygy_uniqueness";
    check.tolerance = 1e6;  // required spectral gap
    check.residual = cache.syzygy.null_gap;
    check.samples = static_cast<long>(cache.syzygy.rows);
    const bool gap_ok = cache.syzygy.null_gap >= 1e6;
    const bool time_ok = cache.syzygy.seconds <= 60.0;
    check.status = gap_ok && time_ok ? "pass" : "fail";
    check.detail = "gap " + fmt(cache.syzygy.null_gap) + ", solve " + fmt(cache.syzygy.seconds) + " s";
    return finish(check, start);
}

CheckResult check_jacobi(const Frame& frame, const PoissonCache& cache, long points) {
    const auto start = Clock::now();
    CheckResult check;
    check.name = "jacobi_identity";
    check.tolerance = 1e-6;
    check.samples = points;
    Rng rng = frame.rng_for(0x1ac0b1);
    double worst = 0;
    for (long i = 0; i < points; ++i)
        worst = std::max(worst, jacobi_residual(cache.omega, rng.normal_vector(frame.n())));
    check.residual = worst;
    check.status = worst < check.tolerance ? "pass" : "fail";
    return finish(check, start);
}

CheckResult check_jacobi_negative_control(const Frame& frame, const PoissonCache& cache) {
    const auto start = Clock::now();
    CheckResult check;
    check.name = "jacobi_negative_control";
    check.tolerance = 1e-4;  // perturbed bracket must exceed this
    check.samples = 10;
    PoissonMatrix corrupted = cache.omega;
    const auto quad_basis = monomials_of_degree(frame.n(), 2);
    corrupted.upper()[1].add_term(quad_basis[2], Complex{1e-2, -5e-3} * cache.omega.coeff_max());
    Rng rng = frame.rng_for(0x1ac0b2);
    double worst = 0;
    for (long i = 0; i < check.samples; ++i)
        worst = std::max(worst, jacobi_residual(corrupted, rng.normal_vector(frame.n())));
    check.residual = worst;
    check.status = worst > check.tolerance ? "pass" : "fail";
    check.detail = "perturbed residual " + fmt(worst);
    return finish(check, start);
}

CheckResult check_casimir(const Frame& frame, const PoissonCache& cache, long points) {
    const auto start = Clock::now();
    CheckResult check;
    check.name = "casimir_identity";
    check.tolerance = 1e-8;
    check.samples = points;
    Rng rng = frame.rng_for(0xca51);
    double worst = 0;
    for (long i = 0; i < points; ++i)
        worst = std::max(worst,
                         casimir_residual(cache.omega, cache.forms, rng.normal_vector(frame.n())));
    check.residual = worst;
    check.status = worst < check.tolerance ? "pass" : "fail";
    return finish(check, start);
}

namespace {

// Rotates through the leaf families, producing (bundle, point) samples.
struct FamilySampler {
    const LeafClassifier& classifier;
    std::vector<LeafFamily> families;
    Rng rng;
    std::size_t cursor = 0;

    FamilySampler(const LeafClassifier& c, std::uint64_t salt)
        : classifier(c),
          families(enumerate_leaf_families(c.frame().spec())),
          rng(c.frame().rng_for(salt)) {}

    std::pair<BundleDescriptor, std::vector<Complex>> next() {
        const CurveSpec& spec = classifier.frame().spec();
        for (int attempt = 0; attempt < 16; ++attempt) {
            const LeafFamily& family = families[cursor];
            cursor = (cursor + 1) % families.size();
            BundleDescriptor b = family.representative;
            if (family.param_dim == 1) {
                b.x = random_point(rng, spec);
                if (spec.is_even() && b.variant == BundleVariant::DecomposableSum &&
                    2 * b.d == spec.n && in_omega_coset(b.x, spec, 1e-4))
                    b.x = reduce(b.x.z + 0.137, spec);
            }
            try {
                return {b, classifier.sample_leaf(b, rng)};
            } catch (const Error&) {
                continue;  // rare sampling failure: move to the next family
            }
        }
        throw NumericFailure("family sampler: repeated sampling failures");
    }
};

}  // namespace

CheckResult check_rank_identity(const LeafClassifier& classifier, const PoissonCache& cache,
                                long total_points) {
    const auto start = Clock::now();
    CheckResult check;
    check.name = "rank_identity";
    check.tolerance = 0.98;
    check.samples = total_points;
    FamilySampler sampler(classifier, 0x4a4a);
    long match = 0, ambiguous = 0, mismatch = 0;
    for (long i = 0; i < total_points; ++i) {
        const auto [bundle, p] = sampler.next();
        const auto record = classifier.consistency_check(p, cache.omega);
        if (record.ambiguous)
            ++ambiguous;
        else if (record.match)
            ++match;
        else
            ++mismatch;
    }
    check.residual = total_points > 0 ? static_cast<double>(match) / total_points : 0.0;
    check.status = (mismatch == 0 && check.residual >= check.tolerance) ? "pass" : "fail";
    std::ostringstream detail;
    detail << match << " match / " << ambiguous << " ambiguous / " << mismatch << " mismatch";
    check.detail = detail.str();
    return finish(check, start);
}

namespace {

// Divisor parameters whose d points stay pairwise separated: collisions are
// the branch locus of the ordered-points chart, not smooth samples of the
// variety.
std::pair<Complex, std::vector<Complex>> separated_divisor_params(int d, Rng& rng,
                                                                  const CurveSpec& spec) {
    for (int attempt = 0; attempt < 200; ++attempt) {
        const Complex x = rng.uniform() + rng.uniform() * spec.tau;
        std::vector<Complex> a;
        std::vector<Complex> pts;
        Complex acc = 0;
        for (int j = 0; j + 1 < d; ++j) {
            a.push_back(rng.uniform() + rng.uniform() * spec.tau);
            pts.push_back(a.back());
            acc += a.back();
        }
        pts.push_back(x - acc);
        bool separated = true;
        for (std::size_t i = 0; i < pts.size() && separated; ++i)
            for (std::size_t j = i + 1; j < pts.size(); ++j)
                if (lattice_distance(EPoint{pts[i]}, EPoint{pts[j]}, spec) < 0.08) {
                    separated = false;
                    break;
                }
        if (separated) return {x, std::move(a)};
    }
    throw NumericFailure("separated_divisor_params: could not separate points");
}

}  // namespace

CheckResult check_partial_secant_dimensions(const Frame& frame, long samples_per_level) {
    const auto start = Clock::now();
    CheckResult check;
    check.name = "dimension_partial_secant";
    check.tolerance = 0;  // exact integer match
    const CurveSpec& spec = frame.spec();
    const int r = spec.half();
    Rng rng = frame.rng_for(0xd191);
    long tested = 0, wrong = 0;
    for (int d = 1; d <= r; ++d) {
        for (long s = 0; s < samples_per_level; ++s) {
            const auto [x, a_params] = separated_divisor_params(d, rng, spec);
            std::vector<Complex> params = a_params;  // a_1..a_{d-1}, c_1..c_d
            // Quasi-periodicity factors make |E(z_j)| span many orders of
            // magnitude; normalizing each coefficient keeps the three
            // contributions comparable (a reparametrization, rank unchanged).
            std::vector<double> term_scale(d, 1.0);
            {
                Complex acc = 0;
                for (int j = 0; j < d; ++j) {
                    const Complex z = j + 1 < d ? a_params[j] : x - acc;
                    if (j + 1 < d) acc += z;
                    const double nrm = norm2(frame.embedding_basis().eval_all(z, spec));
                    term_scale[j] = nrm > 0 ? 1.0 / nrm : 1.0;
                }
            }
            for (int j = 0; j < d; ++j) params.push_back(rng.normal());
            auto psi = [&](const std::vector<Complex>& th) {
                std::vector<Complex> point(frame.n(), Complex{});
                Complex acc = 0;
                for (int j = 0; j < d; ++j) {
                    const Complex z = j + 1 < d ? th[j] : x - acc;
                    if (j + 1 < d) acc += z;
                    const auto vals = frame.embedding_basis().eval_all(z, spec);
                    const Complex c = th[static_cast<std::size_t>(d - 1 + j)] * term_scale[j];
                    for (int i = 0; i < frame.n(); ++i) point[i] += c * vals[i];
                }
                return point;
            };
            const int rank = parametrization_rank(frame, params, psi);
            ++tested;
            if (rank != 2 * d - 1) ++wrong;  // cone dim 2d-1 <-> dim Sec_{d,x} = 2d-2
        }
    }
    check.samples = tested;
    check.residual = wrong;
    check.status = wrong == 0 ? "pass" : "fail";
    return finish(check, start);
}

CheckResult check_full_secant_dimensions(const Frame& frame, long samples_per_level) {
    const auto start = Clock::now();
    CheckResult check;
    check.name = "dimension_full_secant";
    check.tolerance = 0;
    const CurveSpec& spec = frame.spec();
    Rng rng = frame.rng_for(0xd192);
    long tested = 0, wrong = 0;
    for (int d = 1; 2 * d < spec.n; ++d) {
        for (long s = 0; s < samples_per_level; ++s) {
            const auto [x, a_params] = separated_divisor_params(d, rng, spec);
            std::vector<Complex> params;  // x, a_1..a_{d-1}, c_1..c_d
            params.push_back(x);
            params.insert(params.end(), a_params.begin(), a_params.end());
            std::vector<double> term_scale(d, 1.0);
            {
                Complex acc = 0;
                for (int j = 0; j < d; ++j) {
                    const Complex z = j + 1 < d ? a_params[j] : x - acc;
                    if (j + 1 < d) acc += z;
                    const double nrm = norm2(frame.embedding_basis().eval_all(z, spec));
                    term_scale[j] = nrm > 0 ? 1.0 / nrm : 1.0;
                }
            }
            for (int j = 0; j < d; ++j) params.push_back(rng.normal());
            auto psi = [&](const std::vector<Complex>& th) {
                std::vector<Complex> point(frame.n(), Complex{});
                Complex acc = 0;
                for (int j = 0; j < d; ++j) {
                    const Complex z = j + 1 < d ? th[1 + j] : th[0] - acc;
                    if (j + 1 < d) acc += z;
                    const auto vals = frame.embedding_basis().eval_all(z, spec);
                    const Complex c = th[static_cast<std::size_t>(d + j)] * term_scale[j];
                    for (int i = 0; i < frame.n(); ++i) point[i] += c * vals[i];
                }
                return point;
            };
            const int rank = parametrization_rank(frame, params, psi);
            ++tested;
            if (rank != 2 * d) ++wrong;  // cone dim 2d <-> dim Sec_d = 2d-1 (< n-1)
        }
    }
    check.samples = tested;
    check.residual = wrong;
    check.status = wrong == 0 ? "pass" : "fail";
    return finish(check, start);
}

CheckResult check_quadric_pencil(const LeafClassifier& classifier, const PoissonCache& cache) {
    const auto start = Clock::now();
    CheckResult check;
    check.name = "quadric_pencil_n4";
    check.tolerance = 4;  // exactly four singular members
    const Frame& frame = classifier.frame();
    const CurveSpec& spec = frame.spec();
    if (spec.n != 4) {
        check.status = "fail";
        check.detail = "only defined for n = 4";
        return finish(check, start);
    }
    const auto [f1, f2] = classifier.engine().secant_pencil();
    auto sym_matrix = [&](const PolynomialForm& f) {
        Matrix q(4, 4);
        std::array<int, kMaxPolyVars> e{};
        for (const auto& [key, c] : f.coeffs()) {
            e = mono_unpack(key);
            int vars[2], cnt = 0;
            for (int v = 0; v < 4; ++v)
                for (int k = 0; k < e[v]; ++k) vars[cnt++] = v;
            if (vars[0] == vars[1])
                q(vars[0], vars[0]) = c;
            else {
                q(vars[0], vars[1]) = c / 2.0;
                q(vars[1], vars[0]) = c / 2.0;
            }
        }
        return q;
    };
    const Matrix q1 = sym_matrix(f1), q2 = sym_matrix(f2);

    // quartic det(Q1 + t Q2) via interpolation at 5 nodes
    const std::vector<Complex> nodes{{0, 0}, {1, 0}, {-1, 0}, {2, 0}, {0, 1}};
    Matrix vand(5, 5);
    std::vector<Complex> values(5);
    for (int k = 0; k < 5; ++k) {
        Matrix q(4, 4);
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) q(i, j) = q1(i, j) + nodes[k] * q2(i, j);
        values[k] = determinant(q);
        Complex pw = 1.0;
        for (int j = 0; j < 5; ++j) {
            vand(k, j) = pw;
            pw *= nodes[k];
        }
    }
    const auto quartic = solve_square(vand, values);
    const auto roots = polynomial_roots(quartic);

    std::ostringstream detail;
    long singular_members = 0;
    bool vertices_ok = true;
    Rng rng = frame.rng_for(0x4e47);
    for (const Complex& t : roots) {
        Matrix q(4, 4);
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) q(i, j) = q1(i, j) + t * q2(i, j);
        const auto decision = decide_rank(singular_values(q), 1e-6);
        if (decision.rank != 3 || decision.ambiguous) continue;
        ++singular_members;
        const Matrix kernel = null_space(q, 1e-6);
        if (kernel.cols() != 1) {
            vertices_ok = false;
            continue;
        }
        const auto vertex = kernel.column(0);
        const Classification c = classifier.classify(vertex);
        const bool is_vertex_leaf = !c.ambiguous &&
                                    c.label.bundle.variant == BundleVariant::DecomposableSum &&
                                    c.label.bundle.d == 2 &&
                                    in_omega_coset(c.label.bundle.x, spec, 1e-4) &&
                                    c.label.secant_count == SecantCount::Pencil;
        const auto rank = poisson_rank(cache.omega, vertex, spec);
        bool perturb_ok = false;
        if (is_vertex_leaf && c.label.witness) {
            const Subspace ruling = span_of_divisor(*c.label.witness, frame);
            int good = 0;
            for (int trial = 0; trial < 3; ++trial) {
                std::vector<Complex> dir(4, Complex{});
                for (std::size_t j = 0; j < ruling.dim(); ++j) {
                    const Complex cc = rng.normal();
                    const auto col = ruling.basis.column(j);
                    for (int i = 0; i < 4; ++i) dir[i] += cc * col[i];
                }
                dir = normalized(std::move(dir));
                std::vector<Complex> p(4);
                for (int i = 0; i < 4; ++i) p[i] = vertex[i] + 1e-3 * dir[i];
                const Classification cp = classifier.classify(normalized(p));
                if (!cp.ambiguous && cp.label.bundle.variant == BundleVariant::IndecomposableOmega)
                    ++good;
            }
            perturb_ok = good >= 2;
        }
        if (!is_vertex_leaf || rank.rank != 0 || !perturb_ok) {
            vertices_ok = false;
            detail << "[member t=" << t << ": leaf=" << is_vertex_leaf << " rank=" << rank.rank
                   << " perturb=" << perturb_ok << "]";
        }
    }
    check.samples = static_cast<long>(roots.size());
    check.residual = static_cast<double>(singular_members);
    check.status = (singular_members == 4 && vertices_ok) ? "pass" : "fail";
    if (detail.str().empty()) detail << singular_members << " singular members, vertices verified";
    check.detail = detail.str();
    return finish(check, start);
}

CheckResult check_top_equation(const LeafClassifier& classifier, const PoissonCache& cache,
                               long fresh_samples) {
    const auto start = Clock::now();
    CheckResult check;
    check.name = "top_secant_equation";
    check.tolerance = 1e-8;
    const Frame& frame = classifier.frame();
    const CurveSpec& spec = frame.spec();
    const int n = spec.n;
    const int r = spec.half();
    const PolynomialForm& f = cache.forms.at(0);
    if (f.degree() != n) {
        check.status = "fail";
        check.detail = "interpolated degree != n";
        return finish(check, start);
    }
    Rng rng = frame.rng_for(0xf4e5b);
    double worst = 0;
    for (long i = 0; i < fresh_samples; ++i) {
        const auto p =
            classifier.engine().sample_partial_secant(r, random_point(rng, spec), false, rng);
        worst = std::max(worst, std::abs(f.eval(p)) / f.coeff_norm());
    }
    check.samples = fresh_samples;
    check.residual = worst;
    bool classify_ok = true;
    for (int i = 0; i < 5; ++i) {
        const auto p = normalized(rng.normal_vector(n));
        const Classification c = classifier.classify(p);
        const auto rank = poisson_rank(cache.omega, p, spec);
        if (c.ambiguous || c.label.bundle.variant != BundleVariant::IndecomposableOdd ||
            rank.rank != n - 1)
            classify_ok = false;
    }
    check.status = (worst < check.tolerance && classify_ok) ? "pass" : "fail";
    check.detail = "max relative residual " + fmt(worst) +
                   (classify_ok ? ", generic points are E_o" : ", generic classification failed");
    return finish(check, start);
}

CheckResult check_unique_vs_pencil(const LeafClassifier& classifier, long trials) {
    const auto start = Clock::now();
    CheckResult check;
    check.name = "unique_vs_pencil";
    check.tolerance = 0;
    const Frame& frame = classifier.frame();
    const CurveSpec& spec = frame.spec();
    const int r = spec.half();
    const auto coset = omega_coset(spec);
    Rng rng = frame.rng_for(0x0451);
    long unique_good = 0, pencil_good = 0;
    for (long i = 0; i < trials; ++i) {
        const EPoint omega = coset[i % 4];
        const auto p = classifier.sample_leaf(BundleDescriptor::indecomposable_omega(omega), rng);
        if (classifier.engine().count_r_secants(p, omega) == SecantCount::Unique) ++unique_good;
    }
    long pencil_tried = 0;
    for (long i = 0; i < trials && pencil_tried < trials; ++i) {
        const EPoint omega = coset[i % 4];
        for (int attempt = 0; attempt < 20; ++attempt) {
            const Divisor d1 = random_divisor_with_sum(r, omega, rng, spec);
            const Divisor d2 = random_divisor_with_sum(r, omega, rng, spec);
            if (!supports_disjoint(d1, d2, spec)) continue;
            const Subspace meet = classifier.engine().intersect_spans(d1, d2);
            if (meet.dim() != 1) continue;
            ++pencil_tried;
            if (classifier.engine().count_r_secants(meet.basis.column(0), omega) ==
                SecantCount::Pencil)
                ++pencil_good;
            break;
        }
    }
    check.samples = trials + pencil_tried;
    check.residual = static_cast<double>(trials - unique_good + pencil_tried - pencil_good);
    check.status = (unique_good == trials && pencil_good == pencil_tried && pencil_tried == trials)
                       ? "pass"
                       : "fail";
    std::ostringstream detail;
    detail << unique_good << "/" << trials << " unique, " << pencil_good << "/" << pencil_tried
           << " pencil";
    check.detail = detail.str();
    return finish(check, start);
}

CheckResult check_span_lattice(const Frame& frame, long pairs) {
    const auto start = Clock::now();
    CheckResult check;
    check.name = "span_lattice";
    check.tolerance = 1e-7;
    const CurveSpec& spec = frame.spec();
    const int n = spec.n;
    Rng rng = frame.rng_for(0x5fa9);
    double worst = 0;
    long tested = 0, dim_wrong = 0;
    while (tested < pairs) {
        const int da = 2 + static_cast<int>(rng.below(std::max(1, std::min(n - 2, 3) - 1)));
        const int db = 2 + static_cast<int>(rng.below(std::max(1, std::min(n - 2, 3) - 1)));
        const int shared = static_cast<int>(rng.below(std::min(da, db)));
        std::vector<Divisor::Part> pa, pb;
        for (int k = 0; k < shared; ++k) {
            const EPoint s = random_point(rng, spec);
            const int mult = (rng.below(4) == 0) ? 2 : 1;  // occasional double point
            pa.push_back({s, mult});
            pb.push_back({s, 1});
        }
        auto fill = [&](std::vector<Divisor::Part>& parts, int target) {
            int deg = 0;
            for (const auto& part : parts) deg += part.multiplicity;
            while (deg < target) {
                parts.push_back({random_point(rng, spec), 1});
                ++deg;
            }
        };
        fill(pa, da);
        fill(pb, db);
        const Divisor a = make_divisor(pa, spec);
        const Divisor b = make_divisor(pb, spec);
        if (a.degree() != da || b.degree() != db) continue;  // merge collision, resample
        const Divisor l = lcm_divisor(a, b, spec);
        if (l.degree() > n) continue;
        if (l.degree() == n && points_equal(sum_divisor(l, spec), spec.l_sum, spec)) continue;
        ++tested;
        const Subspace sa = span_of_divisor(a, frame);
        const Subspace sb = span_of_divisor(b, frame);
        if (sa.dim() != static_cast<std::size_t>(da) || sb.dim() != static_cast<std::size_t>(db))
            ++dim_wrong;
        const Subspace join = subspace_join(sa, sb, 1e-10);
        worst = std::max(worst, subspace_distance(join, span_of_divisor(l, frame)));
        const Subspace meet = subspace_meet(sa, sb, 1e-8);
        const Divisor g = gcd_divisor(a, b, spec);
        worst = std::max(worst, subspace_distance(meet, span_of_divisor(g, frame)));
    }
    check.samples = tested;
    check.residual = worst;
    check.status = (worst < check.tolerance && dim_wrong == 0) ? "pass" : "fail";
    if (dim_wrong) check.detail = std::to_string(dim_wrong) + " dimension mismatches";
    return finish(check, start);
}

CheckResult check_flow_invariance(const LeafClassifier& classifier, const PoissonCache& cache,
                                  long flows, long steps, long checkpoints) {
    const auto start = Clock::now();
    CheckResult check;
    check.name = "flow_invariance";
    check.tolerance = 1e-6;  // pencil-member drift bound (even n)
    const Frame& frame = classifier.frame();
    const CurveSpec& spec = frame.spec();
    FamilySampler sampler(classifier, 0xf10e5);
    Rng rng = frame.rng_for(0xf10e6);
    double worst_member = 0;
    long label_breaks = 0, done = 0;
    for (long f = 0; f < flows; ++f) {
        const auto [bundle, p0] = sampler.next();
        const auto trajectory = leaf_flow(cache.omega, p0, static_cast<int>(steps), 0.03, rng);
        ++done;
        if (spec.is_even()) {
            const Complex lambda = cache.forms[1].eval(trajectory.front());
            const Complex mu = -cache.forms[0].eval(trajectory.front());
            const double scale = std::hypot(std::abs(lambda), std::abs(mu));
            if (scale > 0) {
                for (const auto& p : trajectory) {
                    const double member = std::abs(lambda * cache.forms[0].eval(p) +
                                                   mu * cache.forms[1].eval(p)) /
                                          scale;
                    worst_member = std::max(worst_member, member);
                }
            }
        }
        for (long c = 0; c < checkpoints; ++c) {
            const std::size_t idx =
                (c * (trajectory.size() - 1)) / std::max<std::size_t>(1, checkpoints - 1);
            const Classification cls = classifier.classify(trajectory[idx]);
            if (cls.ambiguous || !bundles_equal(cls.label.bundle, bundle, spec, 1e-3))
                ++label_breaks;
        }
    }
    check.samples = done * checkpoints;
    check.residual = spec.is_even() ? worst_member : static_cast<double>(label_breaks);
    const bool member_ok = !spec.is_even() || worst_member < check.tolerance;
    check.status = (label_breaks == 0 && member_ok) ? "pass" : "fail";
    std::ostringstream detail;
    detail << label_breaks << " label breaks";
    if (spec.is_even()) detail << ", member drift " << fmt(worst_member);
    check.detail = detail.str();
    return finish(check, start);
}

CheckResult check_round_trip(const LeafClassifier& classifier, long per_family) {
    const auto start = Clock::now();
    CheckResult check;
    check.name = "round_trip";
    check.tolerance = 0.02;  // ambiguous resample budget
    const CurveSpec& spec = classifier.frame().spec();
    Rng rng = classifier.frame().rng_for(0x0707);
    const auto families = enumerate_leaf_families(spec);
    long total = 0, mismatches = 0, ambiguous_resamples = 0;
    const long resample_budget = std::max<long>(1, per_family * families.size() / 50);
    for (const auto& family : families) {
        for (long i = 0; i < per_family; ++i) {
            BundleDescriptor want = family.representative;
            if (family.param_dim == 1) {
                want.x = random_point(rng, spec);
                if (spec.is_even() && want.variant == BundleVariant::DecomposableSum &&
                    2 * want.d == spec.n && in_omega_coset(want.x, spec, 1e-4))
                    want.x = reduce(want.x.z + 0.137, spec);
            }
            Classification c;
            bool resolved = false;
            for (int attempt = 0; attempt < 3; ++attempt) {
                const auto p = classifier.sample_leaf(want, rng);
                c = classifier.classify(p);
                if (!c.ambiguous) {
                    resolved = true;
                    break;
                }
                ++ambiguous_resamples;
                if (ambiguous_resamples > resample_budget) break;
            }
            ++total;
            if (!resolved || !bundles_equal(c.label.bundle, want, spec, 1e-4)) ++mismatches;
        }
    }
    check.samples = total;
    check.residual = static_cast<double>(mismatches);
    check.status =
        (mismatches == 0 && ambiguous_resamples <= resample_budget) ? "pass" : "fail";
    std::ostringstream detail;
    detail << mismatches << " mismatches, " << ambiguous_resamples << " ambiguous resamples";
    check.detail = detail.str();
    return finish(check, start);
}

CheckResult check_cache_probes(const Frame& frame, const PoissonCache& cache) {
    const auto start = Clock::now();
    CheckResult check;
    check.name = "cache_probes";
    check.tolerance = 1e-10;
    check.samples = static_cast<long>(cache.probe_points.size());
    check.residual = cache.probe_deviation(frame);
    check.status = check.residual < check.tolerance ? "pass" : "fail";
    return finish(check, start);
}

VerificationReport run_verification(const Frame& frame, const SecantEngine& engine,
                                    const LeafClassifier& classifier, const PoissonCache& cache,
                                    const VerifyParams& params, const std::string& level_name) {
    (void)engine;
    VerificationReport report;
    report.n = frame.n();
    report.level = level_name;
    report.checks.push_back(check_syzygy_uniqueness(cache));
    report.checks.push_back(check_jacobi(frame, cache, params.jacobi_points));
    report.checks.push_back(check_jacobi_negative_control(frame, cache));
    report.checks.push_back(check_casimir(frame, cache, params.casimir_points));
    report.checks.push_back(check_rank_identity(classifier, cache, params.rank_battery));
    report.checks.push_back(check_partial_secant_dimensions(frame, params.dim_probe_samples));
    report.checks.push_back(check_full_secant_dimensions(frame, params.dim_probe_samples));
    if (frame.spec().is_even()) {
        if (frame.n() == 4) report.checks.push_back(check_quadric_pencil(classifier, cache));
        report.checks.push_back(check_unique_vs_pencil(classifier, params.count_trials));
    } else {
        report.checks.push_back(
            check_top_equation(classifier, cache, params.fresh_vanish_samples));
    }
    report.checks.push_back(check_span_lattice(frame, params.span_pairs));
    report.checks.push_back(check_flow_invariance(classifier, cache, params.flows,
                                                  params.flow_steps, params.flow_checkpoints));
    report.checks.push_back(check_round_trip(classifier, params.round_trip_per_family));
    report.checks.push_back(check_cache_probes(frame, cache));
    return report;
}

}  // namespace leafscope
