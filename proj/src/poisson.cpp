#include "leafscope/poisson.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

namespace leafscope {

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// Null vector of an m x c matrix after column equilibration; asserts the
// null space is exactly one-dimensional with a clean gap and reports the
// tail of the spectrum.
std::vector<Complex> one_dim_null_vector(Matrix m, double rel_tol, SolveDiagnostics* diag,
                                         const char* what) {
    const std::size_t rows = m.rows(), cols = m.cols();
    std::vector<double> col_scale(cols, 0.0);
    for (std::size_t j = 0; j < cols; ++j) {
        for (std::size_t i = 0; i < rows; ++i)
            col_scale[j] = std::max(col_scale[j], std::abs(m(i, j)));
        if (col_scale[j] == 0) col_scale[j] = 1.0;
        for (std::size_t i = 0; i < rows; ++i) m(i, j) /= col_scale[j];
    }
    const SvdResult fac = svd(m);
    const std::size_t k = fac.s.size();
    if (diag) {
        diag->rows = rows;
        diag->cols = cols;
        diag->tail_spectrum.assign(fac.s.end() - std::min<std::size_t>(k, 6), fac.s.end());
        diag->null_gap = (k >= 2 && fac.s[k - 1] > 0) ? fac.s[k - 2] / fac.s[k - 1]
                                                      : std::numeric_limits<double>::infinity();
    }
    if (k < 2) throw NumericFailure(std::string(what) + ": system too small");
    const double defect1 = fac.s[k - 1] / fac.s[0];
    const double defect2 = fac.s[k - 2] / fac.s[0];
    if (defect1 > rel_tol) {
        std::ostringstream msg;
        msg << what << ": null space dimension 0 (smallest defects " << defect2 << ", " << defect1
            << ")";
        throw NumericFailure(msg.str());
    }
    // One-dimensionality is a gap statement: the second-smallest singular
    // value must sit far above the smallest, otherwise the null space is
    // multi-dimensional or too ill-separated to trust.
    const double gap =
        fac.s[k - 1] > 0 ? fac.s[k - 2] / fac.s[k - 1] : std::numeric_limits<double>::infinity();
    if (gap < 1e6) {
        std::ostringstream msg;
        msg << what << ": null space not cleanly one-dimensional (defects " << defect2 << ", "
            << defect1 << ", gap " << gap << ")";
        throw NumericFailure(msg.str());
    }
    std::vector<Complex> v(cols);
    for (std::size_t j = 0; j < cols; ++j) v[j] = fac.v(j, k - 1) / col_scale[j];
    return v;
}

}  // namespace

PolynomialForm PoissonMatrix::entry(int i, int j) const {
    if (i == j) return PolynomialForm(n_, 2);
    if (i < j) return upper_[upper_index(i, j, n_)];
    return upper_[upper_index(j, i, n_)].scaled(-1.0);
}

const PolynomialForm& PoissonMatrix::upper_entry(int i, int j) const {
    return upper_[upper_index(i, j, n_)];
}

Complex PoissonMatrix::entry_value(int i, int j, const std::vector<Complex>& p) const {
    if (i == j) return 0.0;
    if (i < j) return upper_[upper_index(i, j, n_)].eval(p);
    return -upper_[upper_index(j, i, n_)].eval(p);
}

Matrix PoissonMatrix::eval(const std::vector<Complex>& p) const {
    Matrix m(n_, n_);
    for (int i = 0; i < n_; ++i) {
        for (int j = i + 1; j < n_; ++j) {
            const Complex v = upper_[upper_index(i, j, n_)].eval(p);
            m(i, j) = v;
            m(j, i) = -v;
        }
    }
    return m;
}

double PoissonMatrix::coeff_norm() const {
    double s = 0;
    for (const auto& q : upper_) {
        const double x = q.coeff_norm();
        s += x * x;
    }
    return std::sqrt(s);
}

double PoissonMatrix::coeff_max() const {
    double m = 0;
    for (const auto& q : upper_) m = std::max(m, q.coeff_max());
    return m;
}

void PoissonMatrix::scale_all(Complex c) {
    for (auto& q : upper_) q = q.scaled(c);
}

PolynomialForm top_secant_equation(const SecantEngine& engine, Rng& rng,
                                   std::size_t sample_count, SolveDiagnostics* diag) {
    const auto start = std::chrono::steady_clock::now();
    const Frame& frame = engine.frame();
    const CurveSpec& spec = frame.spec();
    const int n = frame.n();
    if (n % 2 == 0) throw BadInput("top_secant_equation: n must be odd");
    const int r = n / 2;

    const auto basis = monomials_of_degree(n, n);
    const std::size_t monos = basis.size();
    if (sample_count == 0) sample_count = 2 * monos;
    if (sample_count < monos + 1)
        throw BadInput("top_secant_equation: not enough samples for the monomial count");

    Matrix vand(sample_count, monos);
    for (std::size_t s = 0; s < sample_count; ++s) {
        const EPoint x = random_point(rng, spec);
        const auto p = engine.sample_partial_secant(r, x, false, rng);
        const auto row = monomial_values(normalized(p), n, basis);
        for (std::size_t j = 0; j < monos; ++j) vand(s, j) = row[j];
    }
    const auto coeffs =
        one_dim_null_vector(std::move(vand), 1e-6, diag, "top_secant_equation");
    PolynomialForm f = from_dense(coeffs, basis, n, n, 0.0);
    f.normalize_largest();
    f.prune(1e-14 * f.coeff_max());
    if (diag) diag->seconds = seconds_since(start);
    return f;
}

PoissonMatrix syzygy_poisson_matrix(const Frame& frame, const std::vector<PolynomialForm>& forms,
                                    SolveDiagnostics* diag) {
    const auto start = std::chrono::steady_clock::now();
    const int n = frame.n();
    if (forms.empty() || forms.size() > 2)
        throw BadInput("syzygy_poisson_matrix: expected one form (odd n) or two (even n)");
    for (const auto& f : forms)
        if (f.num_vars() != n) throw BadInput("syzygy_poisson_matrix: form variable count != n");

    const auto quad_basis = monomials_of_degree(n, 2);
    const std::size_t q_count = quad_basis.size();
    const std::size_t pairs = static_cast<std::size_t>(n) * (n - 1) / 2;
    const std::size_t unknowns = pairs * q_count;

    // precompute the partial derivatives of every form
    std::vector<std::vector<PolynomialForm>> grads;
    for (const auto& f : forms) {
        std::vector<PolynomialForm> g;
        for (int v = 0; v < n; ++v) g.push_back(f.derivative(v));
        grads.push_back(std::move(g));
    }

    const int out_degree = forms[0].degree() + 1;
    const auto out_basis = monomials_of_degree(n, out_degree);
    std::map<MonoKey, std::size_t> out_index;
    for (std::size_t i = 0; i < out_basis.size(); ++i) out_index[out_basis[i]] = i;

    const std::size_t block = out_basis.size();
    const std::size_t rows = forms.size() * static_cast<std::size_t>(n) * block;
    Matrix system(rows, unknowns);

    for (std::size_t a = 0; a < forms.size(); ++a) {
        for (int k = 0; k < n; ++k) {
            for (int l = k + 1; l < n; ++l) {
                const std::size_t pair_idx = PoissonMatrix::upper_index(k, l, n);
                for (std::size_t mu = 0; mu < q_count; ++mu) {
                    const std::size_t col = pair_idx * q_count + mu;
                    // Omega_kl contributes +dF/dx_k to constraint j = l and
                    // -dF/dx_l to constraint j = k.
                    for (int which = 0; which < 2; ++which) {
                        const int j = which == 0 ? l : k;
                        const int i = which == 0 ? k : l;
                        const double sign = which == 0 ? 1.0 : -1.0;
                        const std::size_t row0 =
                            (a * static_cast<std::size_t>(n) + static_cast<std::size_t>(j)) * block;
                        for (const auto& [key, c] : grads[a][i].coeffs()) {
                            const MonoKey target = key + quad_basis[mu];
                            system(row0 + out_index.at(target), col) += sign * c;
                        }
                    }
                }
            }
        }
    }

    const auto solution = one_dim_null_vector(std::move(system), 1e-6, diag, "syzygy_poisson_matrix");

    std::vector<PolynomialForm> upper;
    upper.reserve(pairs);
    for (std::size_t pair_idx = 0; pair_idx < pairs; ++pair_idx) {
        std::vector<Complex> dense(solution.begin() + pair_idx * q_count,
                                   solution.begin() + (pair_idx + 1) * q_count);
        upper.push_back(from_dense(dense, quad_basis, n, 2, 0.0));
    }
    PoissonMatrix omega(n, std::move(upper));
    // one global scale: the matrix is projectively unique
    double best = 0;
    Complex best_c = 1.0;
    for (const auto& q : omega.upper())
        for (const auto& [key, c] : q.coeffs())
            if (std::abs(c) > best) {
                best = std::abs(c);
                best_c = c;
            }
    if (best > 0) omega.scale_all(1.0 / best_c);
    for (auto& q : omega.upper()) q.prune(1e-14);
    if (diag) diag->seconds = seconds_since(start);
    return omega;
}

PoissonRank poisson_rank(const PoissonMatrix& omega, const std::vector<Complex>& p,
                         const CurveSpec& spec) {
    const int n = omega.n();
    const auto pn = normalized(p);
    const Matrix m = omega.eval(pn);

    // covectors annihilating p (unconjugated pairing)
    Matrix row_p(1, n);
    for (int j = 0; j < n; ++j) row_p(0, j) = pn[j];
    const Matrix ann = null_space(row_p, 1e-12);  // n x (n-1)
    // representatives of C^n / C p: the Hermitian complement of p
    Matrix row_pc(1, n);
    for (int j = 0; j < n; ++j) row_pc(0, j) = std::conj(pn[j]);
    const Matrix quot = null_space(row_pc, 1e-12);  // n x (n-1)

    const Matrix induced = quot.adjoint() * (m * ann);
    const auto sig = singular_values(induced);
    const auto sig_m = singular_values(m);
    // Absolute floor: at 0-dimensional leaves the whole homogeneous matrix
    // vanishes, so relative-only thresholds would rank pure roundoff.  The
    // entries are quadratics evaluated at a unit vector, making the
    // coefficient magnitude the right scale reference.
    const double scale = std::max({sig.empty() ? 0.0 : sig[0], sig_m.empty() ? 0.0 : sig_m[0],
                                   omega.coeff_max()});
    PoissonRank out;
    if (scale == 0) return out;  // the zero bracket
    std::size_t rank = 0;
    while (rank < sig.size() && sig[rank] > spec.tol.rank_tol * scale) ++rank;
    out.rank = static_cast<int>(rank);
    if (rank > 0 && rank < sig.size() && sig[rank] > 0 &&
        sig[rank - 1] / sig[rank] < kRankGapRule)
        out.ambiguous = true;
    if (out.rank % 2 != 0) out.ambiguous = true;  // skew ranks must be even
    return out;
}

double jacobi_residual(const PoissonMatrix& omega, const std::vector<Complex>& p) {
    const int n = omega.n();
    const auto pn = normalized(p);
    const double cmax = omega.coeff_max();
    if (cmax == 0) return 0.0;

    // values and gradients of every entry at p
    std::vector<std::vector<Complex>> value(n, std::vector<Complex>(n, Complex{}));
    std::vector<std::vector<std::vector<Complex>>> grad(
        n, std::vector<std::vector<Complex>>(n, std::vector<Complex>(n, Complex{})));
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const PolynomialForm& q = omega.upper_entry(i, j);
            const Complex v = q.eval(pn);
            value[i][j] = v;
            value[j][i] = -v;
            for (int l = 0; l < n; ++l) {
                const Complex g = q.derivative(l).eval(pn);
                grad[i][j][l] = g;
                grad[j][i][l] = -g;
            }
        }
    }
    double worst = 0;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            for (int k = j + 1; k < n; ++k) {
                Complex acc = 0;
                for (int l = 0; l < n; ++l)
                    acc += value[i][l] * grad[j][k][l] + value[j][l] * grad[k][i][l] +
                           value[k][l] * grad[i][j][l];
                worst = std::max(worst, std::abs(acc));
            }
    // two factors of Omega and three powers of |p| = 1
    return worst / (cmax * cmax);
}

double casimir_residual(const PoissonMatrix& omega, const std::vector<PolynomialForm>& forms,
                        const std::vector<Complex>& p) {
    const int n = omega.n();
    const auto pn = normalized(p);
    const Matrix m = omega.eval(pn);
    double worst = 0;
    for (const auto& f : forms) {
        std::vector<Complex> gradient(n);
        for (int v = 0; v < n; ++v) gradient[v] = f.derivative(v).eval(pn);
        const double gnorm = norm2(gradient);
        double mnorm = 0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) mnorm += std::norm(m(i, j));
        mnorm = std::sqrt(mnorm);
        if (gnorm == 0 || mnorm == 0) continue;
        std::vector<Complex> contracted(n, Complex{});
        for (int j = 0; j < n; ++j) {
            Complex acc = 0;
            for (int i = 0; i < n; ++i) acc += gradient[i] * m(i, j);
            contracted[j] = acc;
        }
        worst = std::max(worst, norm2(contracted) / (gnorm * mnorm));
    }
    return worst;
}

std::vector<std::vector<Complex>> leaf_flow(const PoissonMatrix& omega,
                                            const std::vector<Complex>& p0, int steps, double dt,
                                            Rng& rng) {
    const int n = omega.n();
    const auto alpha0 = rng.normal_vector(n);
    auto velocity = [&](const std::vector<Complex>& p) {
        // project the covector onto Ann(p): alpha - (alpha.p / |p|^2) conj(p)
        std::vector<Complex> alpha = alpha0;
        const Complex overlap = dot_u(alpha, p);
        const double nrm2 = norm2(p) * norm2(p);
        for (int i = 0; i < n; ++i) alpha[i] -= overlap / nrm2 * std::conj(p[i]);
        const Matrix m = omega.eval(p);
        return m * alpha;
    };

    std::vector<std::vector<Complex>> trajectory;
    trajectory.reserve(steps + 1);
    std::vector<Complex> p = normalized(p0);
    trajectory.push_back(p);
    for (int step = 0; step < steps; ++step) {
        double local_dt = dt;
        bool accepted = false;
        for (int attempt = 0; attempt < 24; ++attempt) {
            const auto k1 = velocity(p);
            if (norm2(k1) * local_dt > 0.25) {
                local_dt *= 0.5;
                continue;
            }
            auto advance = [&](const std::vector<Complex>& base, const std::vector<Complex>& dir,
                               double factor) {
                std::vector<Complex> out(base.size());
                for (std::size_t i = 0; i < base.size(); ++i)
                    out[i] = base[i] + factor * dir[i];
                return out;
            };
            const auto k2 = velocity(advance(p, k1, local_dt / 2));
            const auto k3 = velocity(advance(p, k2, local_dt / 2));
            const auto k4 = velocity(advance(p, k3, local_dt));
            std::vector<Complex> next(p.size());
            for (std::size_t i = 0; i < p.size(); ++i)
                next[i] = p[i] + local_dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            next = normalized(std::move(next));
            p = std::move(next);
            accepted = true;
            break;
        }
        if (!accepted) throw NumericFailure("leaf_flow: step rejection (velocity blow-up)");
        trajectory.push_back(p);
    }
    return trajectory;
}

double PoissonCache::probe_deviation(const Frame& frame) const {
    (void)frame;
    double worst = 0;
    const double scale = omega.coeff_max();
    for (std::size_t k = 0; k < probe_points.size(); ++k) {
        const auto& p = probe_points[k];
        const auto& stored = probe_values[k];
        std::size_t idx = 0;
        for (int i = 0; i < omega.n(); ++i)
            for (int j = i + 1; j < omega.n(); ++j, ++idx) {
                const Complex fresh = omega.upper_entry(i, j).eval(p);
                worst = std::max(worst, std::abs(fresh - stored[idx]) / std::max(1.0, scale));
            }
    }
    return worst;
}

PoissonCache build_poisson_cache(const Frame& frame, const SecantEngine& engine,
                                 std::size_t sample_count, std::uint64_t sample_seed) {
    PoissonCache cache;
    cache.spec = frame.spec();
    cache.convention_tag = frame.spec().theta_convention;
    Rng rng = frame.rng_for(0xca54e ^ sample_seed);
    if (frame.spec().is_even()) {
        const auto [f1, f2] = engine.secant_pencil();
        cache.forms = {f1, f2};
    } else {
        cache.forms = {top_secant_equation(engine, rng, sample_count, &cache.interpolation)};
    }
    cache.omega = syzygy_poisson_matrix(frame, cache.forms, &cache.syzygy);

    Rng probe_rng = frame.rng_for(0x9e0be5);
    for (int k = 0; k < 20; ++k) {
        const auto p = normalized(probe_rng.normal_vector(frame.n()));
        std::vector<Complex> values;
        for (int i = 0; i < frame.n(); ++i)
            for (int j = i + 1; j < frame.n(); ++j)
                values.push_back(cache.omega.upper_entry(i, j).eval(p));
        cache.probe_points.push_back(p);
        cache.probe_values.push_back(std::move(values));
    }
    return cache;
}

}  // namespace leafscope
