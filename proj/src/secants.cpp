#include "leafscope/secants.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace leafscope {

namespace {

std::uint64_t level_salt(int d) { return 0x5eca9 + 0x101ULL * static_cast<std::uint64_t>(d); }

std::vector<std::vector<Complex>> draw_offsets(int sections, int count, Rng& rng,
                                               const CurveSpec& spec) {
    std::vector<std::vector<Complex>> out(sections);
    for (auto& row : out)
        for (int j = 0; j < count; ++j) row.push_back(rng.uniform() + rng.uniform() * spec.tau);
    return out;
}

}  // namespace

namespace {

// Rank check of the section-value rows at the frame's samples; product bases
// degenerate on a measure-zero set of parameters (two sections acquiring the
// same zero divisor), which must not silently corrupt rank tests.
bool rows_independent(const SectionBasis& b, const Frame& frame) {
    const auto& samples = frame.sample_points();
    Matrix rows(b.degree, samples.size());
    for (int i = 0; i < b.degree; ++i) {
        double scale = 0;
        for (std::size_t s = 0; s < samples.size(); ++s) {
            rows(i, s) = b.eval(i, samples[s], frame.spec());
            scale = std::max(scale, std::abs(rows(i, s)));
        }
        if (scale == 0) return false;
        for (std::size_t s = 0; s < samples.size(); ++s) rows(i, s) /= scale;
    }
    const auto sig = singular_values(rows);
    return sig.back() > 1e-6 * sig.front();
}

}  // namespace

std::pair<SectionBasis, SectionBasis> divisor_pair_bases(int d, const EPoint& x,
                                                         const Frame& frame, std::uint64_t salt) {
    const Complex x_rep = reduce(x.z, frame.spec()).z;
    const int n = frame.n();
    for (std::uint64_t attempt = 0; attempt < 8; ++attempt) {
        Rng rng = frame.rng_for(0xd117 ^ salt ^ (attempt << 32));
        auto off1 = draw_offsets(d, d - 1, rng, frame.spec());
        auto off2 = draw_offsets(n - d, n - d - 1, rng, frame.spec());
        SectionBasis b1 = basis_from_offsets(d, x_rep, std::move(off1), frame);
        SectionBasis b2 = basis_from_offsets(n - d, frame.l_rep() - x_rep, std::move(off2), frame);
        if (rows_independent(b1, frame) && rows_independent(b2, frame))
            return {std::move(b1), std::move(b2)};
    }
    throw NumericFailure("divisor_pair_bases: could not build independent pair bases");
}

SecantEngine::SecantEngine(const Frame& frame, int grid_side)
    : frame_(frame), grid_side_(grid_side) {
    Rng rng = frame_.rng_for(0x12ef);
    ref_point_ = normalized(rng.normal_vector(frame_.n()));
}

const SecantEngine::LevelTable& SecantEngine::table(int d, int variant) const {
    std::lock_guard<std::mutex> lock(mutex_);
    const int key = d + 1000 * variant;
    auto it = tables_.find(key);
    if (it != tables_.end()) return *it->second;

    const CurveSpec& spec = frame_.spec();
    const int n = frame_.n();
    const auto& samples = frame_.sample_points();
    const std::size_t s_count = samples.size();

    auto t = std::make_unique<LevelTable>();
    t->d = d;
    Rng rng = frame_.rng_for(level_salt(d) ^ (static_cast<std::uint64_t>(variant) << 40));
    t->off1 = draw_offsets(d, d - 1, rng, spec);
    t->off2 = draw_offsets(n - d, n - d - 1, rng, spec);
    t->c1.resize(d);
    t->c2.resize(n - d);
    for (int i = 0; i < d; ++i) {
        Complex acc = 0;
        for (const Complex& o : t->off1[i]) acc += o;
        t->c1[i] = acc;
    }
    for (int j = 0; j < n - d; ++j) {
        Complex acc = 0;
        for (const Complex& o : t->off2[j]) acc += o;
        t->c2[j] = acc;
    }

    const int terms = spec.tol.theta_terms;
    t->prefix1 = Matrix(d, s_count);
    t->prefix2 = Matrix(n - d, s_count);
    for (int i = 0; i < d; ++i)
        for (std::size_t s = 0; s < s_count; ++s) {
            Complex acc = 1.0;
            for (const Complex& o : t->off1[i]) acc *= theta_h_value(samples[s] - o, spec.tau, terms);
            t->prefix1(i, s) = acc;
        }
    for (int j = 0; j < n - d; ++j)
        for (std::size_t s = 0; s < s_count; ++s) {
            Complex acc = 1.0;
            for (const Complex& o : t->off2[j]) acc *= theta_h_value(samples[s] - o, spec.tau, terms);
            t->prefix2(j, s) = acc;
        }

    const std::size_t cells = static_cast<std::size_t>(grid_side_) * grid_side_;
    t->grid_x.resize(cells);
    t->cell_a.resize(cells);
    t->cell_b.resize(cells);
    const Complex l_rep = frame_.l_rep();
    LevelTable* table_ptr = t.get();
    const int side = grid_side_;
    parallel_for(cells, [&, table_ptr, side](std::size_t cell) {
        const int gi = static_cast<int>(cell) / side;
        const int gj = static_cast<int>(cell) % side;
        const Complex x = (gi + 0.5) / side + ((gj + 0.5) / side) * spec.tau;
        table_ptr->grid_x[cell] = x;
        Matrix a(d, s_count), b(n - d, s_count);
        for (int i = 0; i < d; ++i) {
            const Complex last = x - table_ptr->c1[i];
            double scale = 0;
            for (std::size_t s = 0; s < s_count; ++s) {
                a(i, s) = table_ptr->prefix1(i, s) * theta_h_value(samples[s] - last, spec.tau, terms);
                scale = std::max(scale, std::abs(a(i, s)));
            }
            if (scale > 0)
                for (std::size_t s = 0; s < s_count; ++s) a(i, s) /= scale;
        }
        for (int j = 0; j < n - d; ++j) {
            const Complex last = (l_rep - x) - table_ptr->c2[j];
            double scale = 0;
            for (std::size_t s = 0; s < s_count; ++s) {
                b(j, s) = table_ptr->prefix2(j, s) * theta_h_value(samples[s] - last, spec.tau, terms);
                scale = std::max(scale, std::abs(b(j, s)));
            }
            if (scale > 0)
                for (std::size_t s = 0; s < s_count; ++s) b(j, s) /= scale;
        }
        table_ptr->cell_a[cell] = std::move(a);
        table_ptr->cell_b[cell] = std::move(b);
    });

    auto [pos, inserted] = tables_.emplace(key, std::move(t));
    (void)inserted;
    return *pos->second;
}

std::vector<Complex> SecantEngine::weight_vector(const std::vector<Complex>& p) const {
    const auto pn = normalized(p);
    const Matrix& pinv = frame_.sample_pinv();  // n x S
    std::vector<Complex> w(pinv.cols());
    for (std::size_t s = 0; s < pinv.cols(); ++s) {
        Complex acc = 0;
        for (std::size_t k = 0; k < pinv.rows(); ++k) acc += pinv(k, s) * pn[k];
        w[s] = acc;
    }
    return w;
}

Matrix SecantEngine::phi_from_tables(const LevelTable& t, std::size_t cell,
                                     const std::vector<Complex>& w) const {
    const Matrix& a = t.cell_a[cell];
    const Matrix& b = t.cell_b[cell];
    const std::size_t s_count = w.size();
    Matrix phi(a.rows(), b.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < b.rows(); ++j) {
            Complex acc = 0;
            for (std::size_t s = 0; s < s_count; ++s) acc += w[s] * a(i, s) * b(j, s);
            phi(i, j) = acc;
        }
    return phi;
}

SecantEngine::Evaluator SecantEngine::make_evaluator(const LevelTable& t,
                                                     const std::vector<Complex>& p,
                                                     Complex seed_x) const {
    Evaluator ev;
    ev.engine = this;
    ev.t = &t;
    ev.w = weight_vector(p);
    const CurveSpec& spec = frame_.spec();
    const auto& samples = frame_.sample_points();
    const int terms = spec.tol.theta_terms;
    const Complex l_rep = frame_.l_rep();
    ev.scale1.resize(t.c1.size());
    ev.scale2.resize(t.c2.size());
    for (std::size_t i = 0; i < t.c1.size(); ++i) {
        double scale = 0;
        for (std::size_t s = 0; s < samples.size(); ++s) {
            const Complex v =
                t.prefix1(i, s) * theta_h_value(samples[s] - (seed_x - t.c1[i]), spec.tau, terms);
            scale = std::max(scale, std::abs(v));
        }
        ev.scale1[i] = scale > 0 ? scale : 1.0;
    }
    for (std::size_t j = 0; j < t.c2.size(); ++j) {
        double scale = 0;
        for (std::size_t s = 0; s < samples.size(); ++s) {
            const Complex v = t.prefix2(j, s) *
                              theta_h_value(samples[s] - ((l_rep - seed_x) - t.c2[j]), spec.tau, terms);
            scale = std::max(scale, std::abs(v));
        }
        ev.scale2[j] = scale > 0 ? scale : 1.0;
    }
    const auto ref_sig = singular_values(ev.phi_at_weights(seed_x, weight_vector(ref_point_)));
    ev.ref_sigma = ref_sig.empty() ? 0.0 : ref_sig[0];
    return ev;
}

Matrix SecantEngine::Evaluator::phi_at(Complex x_literal) const {
    return phi_at_weights(x_literal, w);
}

Matrix SecantEngine::Evaluator::phi_at_weights(Complex x_literal,
                                               const std::vector<Complex>& weights) const {
    const Frame& frame = engine->frame_;
    const CurveSpec& spec = frame.spec();
    const auto& samples = frame.sample_points();
    const int terms = spec.tol.theta_terms;
    const std::size_t s_count = samples.size();
    const std::size_t d1 = t->c1.size(), d2 = t->c2.size();
    const Complex l_rep = frame.l_rep();
    Matrix a(d1, s_count), b(d2, s_count);
    for (std::size_t i = 0; i < d1; ++i) {
        const Complex last = x_literal - t->c1[i];
        for (std::size_t s = 0; s < s_count; ++s)
            a(i, s) = t->prefix1(i, s) * theta_h_value(samples[s] - last, spec.tau, terms) / scale1[i];
    }
    for (std::size_t j = 0; j < d2; ++j) {
        const Complex last = (l_rep - x_literal) - t->c2[j];
        for (std::size_t s = 0; s < s_count; ++s)
            b(j, s) = t->prefix2(j, s) * theta_h_value(samples[s] - last, spec.tau, terms) / scale2[j];
    }
    Matrix phi(d1, d2);
    for (std::size_t i = 0; i < d1; ++i)
        for (std::size_t j = 0; j < d2; ++j) {
            Complex acc = 0;
            for (std::size_t s = 0; s < s_count; ++s) acc += weights[s] * a(i, s) * b(j, s);
            phi(i, j) = acc;
        }
    return phi;
}

double SecantEngine::Evaluator::defect_at(Complex x_literal) const {
    const auto sig = singular_values(phi_at(x_literal));
    if (sig.empty()) return 1.0;
    const double scale = std::max(sig[0], ref_sigma);
    if (scale == 0) return 1.0;
    return sig.back() / scale;
}

Complex SecantEngine::Evaluator::det_at(Complex x_literal) const {
    return determinant(phi_at(x_literal));
}

// Independent verification of a candidate rank drop: fresh pair bases (with
// the degeneracy guard) evaluated directly against the weight vector.
double SecantEngine::direct_defect(const std::vector<Complex>& p, int d, const EPoint& x,
                                   std::uint64_t salt) const {
    auto [b1, b2] = divisor_pair_bases(d, x, frame_, 0xfeed ^ salt);
    const auto w = weight_vector(p);
    const auto w_ref = weight_vector(ref_point_);
    const auto& samples = frame_.sample_points();
    const CurveSpec& spec = frame_.spec();
    const std::size_t s_count = samples.size();
    const int d2 = frame_.n() - d;
    Matrix a(d, s_count), b(d2, s_count);
    for (int i = 0; i < d; ++i) {
        double scale = 0;
        for (std::size_t s = 0; s < s_count; ++s) {
            a(i, s) = b1.eval(i, samples[s], spec);
            scale = std::max(scale, std::abs(a(i, s)));
        }
        for (std::size_t s = 0; s < s_count; ++s) a(i, s) /= scale;
    }
    for (int j = 0; j < d2; ++j) {
        double scale = 0;
        for (std::size_t s = 0; s < s_count; ++s) {
            b(j, s) = b2.eval(j, samples[s], spec);
            scale = std::max(scale, std::abs(b(j, s)));
        }
        for (std::size_t s = 0; s < s_count; ++s) b(j, s) /= scale;
    }
    Matrix phi(d, d2), phi_ref(d, d2);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d2; ++j) {
            Complex acc = 0, acc_ref = 0;
            for (std::size_t s = 0; s < s_count; ++s) {
                const Complex ab = a(i, s) * b(j, s);
                acc += w[s] * ab;
                acc_ref += w_ref[s] * ab;
            }
            phi(i, j) = acc;
            phi_ref(i, j) = acc_ref;
        }
    const auto sig = singular_values(phi);
    const auto sig_ref = singular_values(phi_ref);
    const double scale = std::max(sig.empty() ? 0.0 : sig[0], sig_ref.empty() ? 0.0 : sig_ref[0]);
    if (sig.empty() || scale == 0) return 1.0;
    return sig.back() / scale;
}

namespace {

struct RefineResult {
    double defect = 1.0;
    double s = 0, t = 0;
};

// Shrinking quadratic fits on the smooth surrogate defect^2 over torus
// coordinates, starting from one grid cell.  Bails out after a few rounds
// when the minimum stagnates above bail_defect (generic points, no drop).
template <typename DefectFn>
RefineResult refine_minimum(DefectFn&& defect_at, double s, double tt, double h,
                            double bail_defect = 0.0) {
    auto g = [&](double ss, double ttt) {
        const double v = defect_at(ss, ttt);
        return v * v;
    };
    double gbest = g(s, tt);
    for (int round = 0; round < 16 && gbest > 1e-26; ++round) {
        if (round == 5 && bail_defect > 0 && gbest > bail_defect * bail_defect) break;
        const double g0 = gbest;
        const double gp = g(s + h, tt), gm = g(s - h, tt);
        const double hp = g(s, tt + h), hm = g(s, tt - h);
        const double gpp = g(s + h, tt + h), gmm = g(s - h, tt - h), gpm = g(s + h, tt - h),
                     gmp = g(s - h, tt + h);
        const double ds = (gp - gm) / (2 * h), dt = (hp - hm) / (2 * h);
        const double dss = (gp - 2 * g0 + gm) / (h * h), dtt = (hp - 2 * g0 + hm) / (h * h);
        const double dst = (gpp + gmm - gpm - gmp) / (4 * h * h);
        const double det = dss * dtt - dst * dst;
        double move_s = 0, move_t = 0;
        if (std::abs(det) > 1e-300 && dss + dtt > 0) {
            move_s = -(dtt * ds - dst * dt) / det;
            move_t = -(dss * dt - dst * ds) / det;
        }
        bool moved = false;
        if (std::isfinite(move_s) && std::isfinite(move_t) && std::abs(move_s) < 3 * h &&
            std::abs(move_t) < 3 * h && (move_s != 0 || move_t != 0)) {
            const double cand = g(s + move_s, tt + move_t);
            if (cand < gbest) {
                s += move_s;
                tt += move_t;
                gbest = cand;
                moved = true;
                h = std::clamp(std::max(std::abs(move_s), std::abs(move_t)), h / 8, h);
            }
        }
        if (!moved) {
            const double vals[8] = {gp, gm, hp, hm, gpp, gmm, gpm, gmp};
            const double offs[8][2] = {{h, 0}, {-h, 0}, {0, h},  {0, -h},
                                       {h, h}, {-h, -h}, {h, -h}, {-h, h}};
            int pick = -1;
            double v = gbest;
            for (int i = 0; i < 8; ++i)
                if (vals[i] < v) {
                    v = vals[i];
                    pick = i;
                }
            if (pick >= 0) {
                s += offs[pick][0];
                tt += offs[pick][1];
                gbest = v;
            }
            h /= 3;
        }
        if (h < 1e-13) break;
    }
    return {std::sqrt(gbest), s, tt};
}

}  // namespace

// Candidate cells for a rank drop: local minima of the grid defect surface,
// most promising first.
std::vector<std::size_t> SecantEngine::candidate_cells(const LevelTable& t,
                                                       const std::vector<Complex>& w,
                                                       std::vector<double>* defects) const {
    const std::size_t cells = t.grid_x.size();
    std::vector<double> defect(cells);
    parallel_for(cells, [&](std::size_t cell) {
        const Matrix phi = phi_from_tables(t, cell, w);
        const auto sig = singular_values(phi);
        defect[cell] = (sig.empty() || sig[0] == 0) ? 1.0 : sig.back() / sig[0];
    });
    std::vector<std::size_t> minima;
    const int side = grid_side_;
    for (int gi = 0; gi < side; ++gi) {
        for (int gj = 0; gj < side; ++gj) {
            const std::size_t cell = static_cast<std::size_t>(gi) * side + gj;
            bool is_min = true;
            for (int di = -1; di <= 1 && is_min; ++di)
                for (int dj = -1; dj <= 1; ++dj) {
                    if (di == 0 && dj == 0) continue;
                    const std::size_t nb = static_cast<std::size_t>((gi + di + side) % side) * side +
                                           static_cast<std::size_t>((gj + dj + side) % side);
                    if (defect[nb] < defect[cell]) {
                        is_min = false;
                        break;
                    }
                }
            if (is_min && defect[cell] < 0.5) minima.push_back(cell);
        }
    }
    std::sort(minima.begin(), minima.end(),
              [&](std::size_t a, std::size_t b) { return defect[a] < defect[b]; });
    // A true rank drop is nearly always the deepest minimum; spurious
    // basis-degeneracy drops are comparably deep, everything else shallow.
    if (!minima.empty()) {
        const double floor_val = defect[minima[0]];
        std::size_t keep = minima.size();
        for (std::size_t i = 1; i < minima.size(); ++i)
            if (defect[minima[i]] > std::max(12.0 * floor_val, 1e-4)) {
                keep = i;
                break;
            }
        minima.resize(std::min<std::size_t>(keep, 8));
    }
    if (defects) *defects = std::move(defect);
    return minima;
}

SecantEngine::LevelProbe SecantEngine::probe_with_table(const LevelTable& t,
                                                        const std::vector<Complex>& p,
                                                        bool* deep_unverified) const {
    const CurveSpec& spec = frame_.spec();
    LevelProbe probe;
    const int d = t.d;
    const auto w = weight_vector(p);
    const auto candidates = candidate_cells(t, w, nullptr);
    double best_seen = 1.0;
    for (const std::size_t cell : candidates) {
        Evaluator ev = make_evaluator(t, p, t.grid_x[cell]);
        auto [s0, t0] = torus_coords(t.grid_x[cell], spec.tau);
        const RefineResult res = refine_minimum(
            [&](double ss, double ttt) { return ev.defect_at(ss + ttt * spec.tau); }, s0, t0,
            1.0 / grid_side_, 1e-3);
        best_seen = std::min(best_seen, res.defect);
        if (res.defect < spec.tol.rank_tol) {
            const EPoint x = reduce(res.s + res.t * spec.tau, spec);
            // Cross-check with independently drawn bases: spurious drops from a
            // degenerate scan basis do not survive a fresh construction.
            const double check = direct_defect(p, d, x, 0xa17 + d);
            if (check < spec.tol.rank_tol) {
                probe.defect = std::max(res.defect, check);
                probe.x = x;
                probe.accepted = true;
                const auto sig = singular_values(ev.phi_at(res.s + res.t * spec.tau));
                probe.ambiguous = decide_rank(sig, spec.tol.rank_tol).ambiguous;
                return probe;
            }
            if (deep_unverified) *deep_unverified = true;
        } else if (res.defect < 1e2 * spec.tol.rank_tol && deep_unverified) {
            *deep_unverified = true;
        }
    }
    probe.defect = best_seen;
    probe.accepted = false;
    return probe;
}

SecantEngine::LevelProbe SecantEngine::probe_level(const std::vector<Complex>& p, int d) const {

    if (d == 1) {
        LevelProbe probe;
        const auto [dist, x] = frame_.curve_distance(p);
        probe.defect = dist;
        probe.x = x;
        probe.accepted = dist < curve_tol_;
        return probe;
    }
    bool deep_unverified = false;
    LevelProbe probe = probe_with_table(table(d), p, &deep_unverified);
    if (probe.accepted) return probe;
    // A deep dip that failed the cross-check means the scan basis degenerates
    // near the candidate; a second independently drawn table settles it.
    if (deep_unverified) {
        LevelProbe retry = probe_with_table(table(d, 1), p, nullptr);
        if (retry.accepted) return retry;
        probe.defect = std::min(probe.defect, retry.defect);
    }
    return probe;
}

bool SecantEngine::in_partial_secant(const std::vector<Complex>& p, int d, const EPoint& x) const {
    return partial_secant_defect(p, d, x) < (d == 1 ? curve_tol_ : frame_.spec().tol.rank_tol);
}

double SecantEngine::partial_secant_defect(const std::vector<Complex>& p, int d,
                                           const EPoint& x) const {
    const int n = frame_.n();
    if (d < 1) throw BadInput("in_partial_secant: d must be >= 1");
    if (2 * d > n) return 0.0;  // Sec_d(E) is all of P^{n-1}
    if (d == 1) return projective_distance(p, frame_.embed(x));
    return direct_defect(p, d, x, 0);
}

Divisor SecantEngine::find_secant_divisor(const std::vector<Complex>& p, int d,
                                          const EPoint& x) const {
    const CurveSpec& spec = frame_.spec();
    if (d == 1) {
        if (projective_distance(p, frame_.embed(x)) > curve_tol_)
            throw NumericFailure("find_secant_divisor: point is not on the curve at x");
        return make_divisor({{reduce(x.z, spec), 1}}, spec);
    }
    auto [b1, b2] = divisor_pair_bases(d, x, frame_, 0);
    const RoomMatrix room = multiplication_matrix(b1, b2, frame_);
    const Matrix phi = room.evaluate_at(normalized(p));
    const SvdResult fac = svd(phi);
    const auto sig_ref = singular_values(room.evaluate_at(ref_point_));
    const double scale =
        std::max(fac.s.empty() ? 0.0 : fac.s[0], sig_ref.empty() ? 0.0 : sig_ref[0]);
    if (scale == 0 || fac.s.back() > spec.tol.rank_tol * scale) {
        std::ostringstream msg;
        msg << "find_secant_divisor: not on this partial secant (defect "
            << (scale > 0 ? fac.s.back() / scale : 1.0) << ")";
        throw NumericFailure(msg.str());
    }
    // left kernel vector: conj of the trailing left singular vector
    std::vector<Complex> coeffs(d);
    for (int i = 0; i < d; ++i) coeffs[i] = std::conj(fac.u(i, fac.s.size() - 1));
    const Divisor divisor = section_zeros(b1, coeffs, frame_);
    const Subspace sp = span_of_divisor(divisor, frame_);
    const double off_span = sp.distance_to(normalized(p));
    if (off_span > 1e-6) {
        std::ostringstream msg;
        msg << "find_secant_divisor: recovered divisor span misses the point by " << off_span;
        throw NumericFailure(msg.str());
    }
    if (!points_equal(sum_divisor(divisor, spec), reduce(x.z, spec), spec))
        throw NumericFailure("find_secant_divisor: recovered divisor has the wrong sum");
    return divisor;
}

SecantCount SecantEngine::count_r_secants(const std::vector<Complex>& p,
                                          const EPoint& omega) const {
    const CurveSpec& spec = frame_.spec();
    const int n = frame_.n();
    if (n % 2 != 0) throw BadInput("count_r_secants: n must be even");
    const int r = n / 2;
    auto [b1, b2] = divisor_pair_bases(r, omega, frame_, 0);
    const RoomMatrix room = multiplication_matrix(b1, b2, frame_);
    const Matrix phi = room.evaluate_at(normalized(p));
    const auto sig = singular_values(phi);
    // Absolute scale floor: at pencil points the whole matrix vanishes, so
    // a purely relative threshold would "see" full rank.
    const auto sig_ref = singular_values(room.evaluate_at(ref_point_));
    const double scale = std::max(sig.empty() ? 0.0 : sig[0], sig_ref.empty() ? 0.0 : sig_ref[0]);
    if (scale == 0) throw NumericFailure("count_r_secants: zero matrix scale");
    std::size_t rank = 0;
    while (rank < sig.size() && sig[rank] > spec.tol.rank_tol * scale) ++rank;
    if (rank > 0 && rank < sig.size() && sig[rank] > 0 && sig[rank - 1] / sig[rank] < kRankGapRule)
        throw NumericFailure("count_r_secants: ambiguous kernel dimension (gap rule)");
    const std::size_t kernel = static_cast<std::size_t>(r) - rank;
    if (kernel == 0)
        throw Error("count_r_secants: point is not on Sec_{r,omega} (kernel dimension 0)");
    if (kernel == 1) return SecantCount::Unique;
    if (kernel == 2) return SecantCount::Pencil;
    throw NumericFailure("count_r_secants: kernel dimension >= 3 (numeric failure)");
}

std::pair<PolynomialForm, PolynomialForm> SecantEngine::secant_pencil() const {
    {
        std::lock_guard<std::mutex> lock(mutex_);
        if (pencil_) return *pencil_;
    }
    const CurveSpec& spec = frame_.spec();
    const int n = frame_.n();
    if (n % 2 != 0) throw BadInput("secant_pencil: n must be even");
    const int r = n / 2;
    Rng rng = frame_.rng_for(0x9e4c11);

    auto det_of_pair = [&](const EPoint& x1, std::uint64_t salt) {
        auto [b1, b2] = divisor_pair_bases(r, x1, frame_, salt);
        const RoomMatrix room = multiplication_matrix(b1, b2, frame_);
        // symbolic determinant by Leibniz expansion over r <= 4 rows
        std::vector<int> perm(r);
        for (int i = 0; i < r; ++i) perm[i] = i;
        PolynomialForm det(n, r);
        do {
            int sign = 1;
            for (int i = 0; i < r; ++i)
                for (int j = i + 1; j < r; ++j)
                    if (perm[i] > perm[j]) sign = -sign;
            PolynomialForm term = PolynomialForm::linear(room.at(0, perm[0]).coeffs);
            for (int i = 1; i < r; ++i)
                term = term * PolynomialForm::linear(room.at(i, perm[i]).coeffs);
            det = det + term.scaled(static_cast<double>(sign));
        } while (std::next_permutation(perm.begin(), perm.end()));
        det.normalize_largest();
        det.prune(1e-13);
        return det;
    };

    const EPoint x1 = random_point(rng, spec);
    PolynomialForm f1 = det_of_pair(x1, 1);
    PolynomialForm f2(n, r);
    for (int attempt = 0; attempt < 16; ++attempt) {
        const EPoint x2 = random_point(rng, spec);
        // inequivalent pair: x2 not in {x1, l_sum - x1}
        if (points_equal(x2, x1, spec) ||
            points_equal(x2, sub_points(spec.l_sum, x1, spec), spec))
            continue;
        f2 = det_of_pair(x2, 2 + attempt);
        // verify linear independence of coefficient vectors
        const auto basis = monomials_of_degree(n, r);
        Matrix m(2, basis.size());
        const auto d1 = to_dense(f1, basis);
        const auto d2 = to_dense(f2, basis);
        for (std::size_t j = 0; j < basis.size(); ++j) {
            m(0, j) = d1[j];
            m(1, j) = d2[j];
        }
        if (decide_rank(singular_values(m), 1e-8).rank == 2) {
            std::lock_guard<std::mutex> lock(mutex_);
            pencil_ = std::make_pair(f1, f2);
            return *pencil_;
        }
    }
    throw NumericFailure("secant_pencil: could not build two independent determinants");
}

std::pair<EPoint, EPoint> SecantEngine::pencil_parameter_for_point(
    const std::vector<Complex>& p) const {
    const CurveSpec& spec = frame_.spec();
    const int n = frame_.n();
    if (n % 2 != 0) throw BadInput("pencil_parameter_for_point: n must be even");
    // E lies on every pencil member, so the parameter is undefined there.
    if (frame_.curve_distance(p).first < curve_tol_)
        throw BadInput("pencil_parameter_for_point: point on the curve is degenerate "
                       "(every pencil member passes through it)");
    const int r = n / 2;
    const LevelTable& t = table(r);
    const auto w = weight_vector(p);
    const auto candidates = candidate_cells(t, w, nullptr);
    double best_seen = 1.0;
    for (const std::size_t cell : candidates) {
        Evaluator ev = make_evaluator(t, p, t.grid_x[cell]);
        // det Phi(x)_p is holomorphic in x once section scales are frozen;
        // one-dimensional complex Newton with a central-difference derivative.
        Complex x = t.grid_x[cell];
        const double fd_step = 1e-6;
        for (int it = 0; it < 60; ++it) {
            const Complex f0 = ev.det_at(x);
            const Complex fp = ev.det_at(x + fd_step);
            const Complex fm = ev.det_at(x - fd_step);
            const Complex deriv = (fp - fm) / (2 * fd_step);
            if (std::abs(deriv) < 1e-300) break;
            const Complex step = f0 / deriv;
            x -= step;
            if (std::abs(step) < 1e-13) break;
        }
        const EPoint found = reduce(x, spec);
        const double final_defect = ev.defect_at(x);
        best_seen = std::min(best_seen, final_defect);
        if (final_defect < spec.tol.rank_tol) {
            const double check = direct_defect(p, r, found, 0xbead);
            if (check < spec.tol.rank_tol) return {found, sub_points(spec.l_sum, found, spec)};
        }
    }
    std::ostringstream msg;
    msg << "pencil_parameter_for_point: not on a Sec_r slice (best defect " << best_seen << ")";
    throw NumericFailure(msg.str());
}

MinimalLevel SecantEngine::minimal_secant_level(const std::vector<Complex>& p) const {
    const CurveSpec& spec = frame_.spec();
    const int n = frame_.n();
    const int r = n / 2;
    MinimalLevel out;
    const int top_scan = spec.is_even() ? r - 1 : r;
    for (int d = 1; d <= top_scan; ++d) {
        const LevelProbe probe = probe_level(p, d);
        if (probe.accepted) {
            out.d = d;
            out.x = probe.x;
            out.defect = probe.defect;
            out.ambiguous = probe.ambiguous;
            return out;
        }
    }
    if (!spec.is_even()) {
        out.top_stratum = true;
        return out;
    }
    // n even: every point lies on exactly one pencil member
    const auto [x, mirror] = pencil_parameter_for_point(p);
    (void)mirror;
    out.d = r;
    out.x = x;
    out.defect = partial_secant_defect(p, r, x);
    return out;
}

Subspace SecantEngine::intersect_spans(const Divisor& d1, const Divisor& d2) const {
    const int n = frame_.n();
    if (d1.degree() > n - 1 || d2.degree() > n - 1)
        throw BadInput("intersect_spans: degrees must be <= n-1");
    const Subspace s1 = span_of_divisor(d1, frame_);
    const Subspace s2 = span_of_divisor(d2, frame_);
    return subspace_meet(s1, s2, 1e-8);
}

bool SecantEngine::in_full_secant(const std::vector<Complex>& p, int d) const {
    if (2 * d > frame_.n()) return true;
    return probe_level(p, d).accepted;
}

std::vector<Complex> SecantEngine::sample_partial_secant(int d, const EPoint& x, bool reject_lower,
                                                         Rng& rng) const {
    const CurveSpec& spec = frame_.spec();
    if (d < 1 || 2 * d > frame_.n()) throw BadInput("sample_partial_secant: need 1 <= d <= n/2");
    if (d == 1) return frame_.embed(x);
    const int budget = reject_lower ? 200 : 1;
    for (int attempt = 0; attempt < budget; ++attempt) {
        const Divisor divisor = random_divisor_with_sum(d, x, rng, spec);
        const Subspace sp = span_of_divisor(divisor, frame_);
        std::vector<Complex> p(frame_.n(), Complex{});
        for (std::size_t j = 0; j < sp.dim(); ++j) {
            const Complex c = rng.normal();
            const auto col = sp.basis.column(j);
            for (int i = 0; i < frame_.n(); ++i) p[i] += c * col[i];
        }
        p = normalized(std::move(p));
        if (!reject_lower) return p;
        bool on_lower = frame_.curve_distance(p).first < curve_tol_;
        for (int lev = 2; lev < d && !on_lower; ++lev) on_lower = probe_level(p, lev).accepted;
        if (!on_lower) return p;
    }
    throw RejectionBudgetExhausted("sample_partial_secant: rejection budget exhausted");
}

}  // namespace leafscope
