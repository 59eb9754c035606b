#include "leafscope/sections.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <sstream>

namespace leafscope {

std::vector<Complex> theta_h_jet(Complex z, Complex tau, int order, int terms) {
    return theta_jet(0.5, 0.5, z, tau, order, terms);
}

std::vector<Complex> SectionBasis::eval_jet(std::size_t i, Complex z, const CurveSpec& spec,
                                            int order) const {
    const auto& pts = points[i];
    std::vector<Complex> acc = theta_h_jet(z - pts[0], spec.tau, order, spec.tol.theta_terms);
    for (std::size_t j = 1; j < pts.size(); ++j) {
        const auto factor = theta_h_jet(z - pts[j], spec.tau, order, spec.tol.theta_terms);
        acc = jet_mul(acc, factor);
    }
    const Complex inv = 1.0 / scale[i];
    for (auto& c : acc) c *= inv;
    return acc;
}

Complex SectionBasis::eval(std::size_t i, Complex z, const CurveSpec& spec) const {
    Complex acc = 1.0;
    for (const Complex& pt : points[i])
        acc *= theta_h_value(z - pt, spec.tau, spec.tol.theta_terms);
    return acc / scale[i];
}

std::vector<Complex> SectionBasis::eval_all(Complex z, const CurveSpec& spec) const {
    std::vector<Complex> out(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) out[i] = eval(i, z, spec);
    return out;
}

namespace {

std::uint64_t bits_of(double x) { return std::bit_cast<std::uint64_t>(x); }

std::uint64_t salt_for_basis(int d, Complex target, std::uint64_t extra) {
    std::uint64_t h = 0x9e3779b97f4a7c15ULL ^ static_cast<std::uint64_t>(d);
    h = h * 0x100000001b3ULL ^ bits_of(target.real());
    h = h * 0x100000001b3ULL ^ bits_of(target.imag());
    h = h * 0x100000001b3ULL ^ extra;
    return h;
}

SectionBasis build_basis(int d, Complex literal_target, std::vector<std::vector<Complex>> offsets,
                         const CurveSpec& spec) {
    SectionBasis b;
    b.degree = d;
    b.literal_sum = literal_target;
    b.sum = reduce(literal_target, spec);
    b.convention_tag = spec.theta_convention;
    b.points.resize(d);
    b.scale.assign(d, Complex{1.0, 0.0});
    for (int i = 0; i < d; ++i) {
        Complex acc = 0;
        auto& pts = b.points[i];
        pts.reserve(d);
        for (const Complex& off : offsets[i]) {
            pts.push_back(off);
            acc += off;
        }
        pts.push_back(literal_target - acc);  // literal sum is exact by construction
    }
    // Normalize each section over a fixed probe grid.
    for (int i = 0; i < d; ++i) {
        double mag = 0.0;
        Complex at_max = 1.0;
        for (int g = 0; g < 16; ++g) {
            const Complex z = ((g % 4) + 0.41) / 4.0 + (((g / 4) + 0.29) / 4.0) * spec.tau;
            const Complex v = b.eval(static_cast<std::size_t>(i), z, spec);
            if (std::abs(v) > mag) {
                mag = std::abs(v);
                at_max = v;
            }
        }
        if (mag > 0) b.scale[i] = at_max;
    }
    return b;
}

bool basis_independent(const SectionBasis& b, const CurveSpec& spec, Rng& rng) {
    const int d = b.degree;
    if (d == 1) return true;
    const int m = 3 * d;
    Matrix samples(m, d);
    for (int s = 0; s < m; ++s) {
        const Complex z = rng.uniform() + rng.uniform() * spec.tau;
        const auto vals = b.eval_all(z, spec);
        double scale = 0;
        for (const auto& v : vals) scale = std::max(scale, std::abs(v));
        if (scale == 0) return false;
        for (int j = 0; j < d; ++j) samples(s, j) = vals[j] / scale;
    }
    const auto decision = decide_rank(singular_values(samples), spec.tol.rank_tol);
    return decision.rank == static_cast<std::size_t>(d) && !decision.ambiguous;
}

}  // namespace

SectionBasis basis_with_literal_sum_impl(int d, Complex literal_target, const CurveSpec& spec,
                                         Rng rng) {
    if (d < 1) throw BadInput("basis_of_sections: degree must be >= 1");
    for (int attempt = 0; attempt < 24; ++attempt) {
        std::vector<std::vector<Complex>> offsets(d);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j + 1 < d; ++j)
                offsets[i].push_back(rng.uniform() + rng.uniform() * spec.tau);
        SectionBasis b = build_basis(d, literal_target, std::move(offsets), spec);
        Rng check = rng.fork(0xc0ffee + attempt);
        if (basis_independent(b, spec, check)) return b;
    }
    throw NumericFailure("basis_of_sections: could not build an independent product basis");
}

SectionBasis basis_with_literal_sum(int d, Complex literal_target, const Frame& frame,
                                    std::uint64_t salt) {
    return basis_with_literal_sum_impl(d, literal_target, frame.spec(),
                                       frame.rng_for(salt_for_basis(d, literal_target, salt)));
}

SectionBasis basis_of_sections(int d, const EPoint& x, const Frame& frame) {
    return basis_with_literal_sum(d, reduce(x.z, frame.spec()).z, frame, 0);
}

SectionBasis basis_from_offsets(int d, Complex literal_target,
                                std::vector<std::vector<Complex>> offsets, const Frame& frame) {
    return build_basis(d, literal_target, std::move(offsets), frame.spec());
}

Frame::Frame(const CurveSpec& spec) : spec_(spec) {
    spec_.validate();
    l_rep_ = reduce(spec_.l_sum.z, spec_).z;
    embedding_ = basis_with_literal_sum_impl(spec_.n, l_rep_, spec_,
                                             Rng(spec_.tol.seed).fork(salt_for_basis(spec_.n, l_rep_, 0)));

    const int n = spec_.n;
    const int m = 4 * n;
    Rng srng = Rng(spec_.tol.seed).fork(0x5a3b1e5ULL);
    samples_.resize(m);
    // Keep samples away from each other; plain uniforms are fine at 4n points.
    for (auto& z : samples_) z = srng.uniform() + srng.uniform() * spec_.tau;
    sample_matrix_ = Matrix(m, n);
    for (int s = 0; s < m; ++s) {
        const auto vals = embedding_.eval_all(samples_[s], spec_);
        for (int j = 0; j < n; ++j) sample_matrix_(s, j) = vals[j];
    }
    sample_svd_ = svd(sample_matrix_);
    if (decide_rank(sample_svd_.s, spec_.tol.rank_tol).rank != static_cast<std::size_t>(n))
        throw NumericFailure("Frame: embedding sample matrix is rank deficient");
    sample_pinv_ = pseudo_inverse(sample_svd_, 1e-13);

    curve_grid_side_ = 48;
    curve_grid_.reserve(static_cast<std::size_t>(curve_grid_side_) * curve_grid_side_);
    curve_grid_z_.reserve(curve_grid_.capacity());
    for (int i = 0; i < curve_grid_side_; ++i) {
        for (int j = 0; j < curve_grid_side_; ++j) {
            const Complex z = (i + 0.5) / curve_grid_side_ +
                              ((j + 0.5) / curve_grid_side_) * spec_.tau;
            curve_grid_z_.push_back(z);
            curve_grid_.push_back(normalized(embedding_.eval_all(z, spec_)));
        }
    }
}

std::vector<Complex> Frame::embed(const EPoint& x) const { return embed_raw(reduce(x.z, spec_).z); }

std::vector<Complex> Frame::embed_raw(Complex z) const {
    auto v = embedding_.eval_all(z, spec_);
    double mag = 0;
    for (const auto& c : v) mag = std::max(mag, std::abs(c));
    if (mag == 0) throw NumericFailure("embed: all sections vanished at a point (base-point-free system violated)");
    return normalized(std::move(v));
}

std::pair<double, EPoint> Frame::curve_distance(const std::vector<Complex>& p) const {
    const auto pn = normalized(p);
    auto overlap = [&](const std::vector<Complex>& q) {
        return std::norm(dot_h(pn, q));  // |<p,q>|^2 for unit q
    };
    double best = -1.0;
    Complex best_z = 0;
    for (std::size_t i = 0; i < curve_grid_.size(); ++i) {
        const double g = overlap(curve_grid_[i]);
        if (g > best) {
            best = g;
            best_z = curve_grid_z_[i];
        }
    }
    double step = 1.0 / curve_grid_side_;
    auto [s, t] = torus_coords(best_z, spec_.tau);
    auto eval_st = [&](double ss, double tt) { return overlap(embed_raw(ss + tt * spec_.tau)); };
    for (int round = 0; round < 9; ++round) {
        double local_best = best;
        double bs = s, bt = t;
        for (int i = -2; i <= 2; ++i) {
            for (int j = -2; j <= 2; ++j) {
                if (i == 0 && j == 0) continue;
                const double ss = s + i * step * 0.5, tt = t + j * step * 0.5;
                const double g = eval_st(ss, tt);
                if (g > local_best) {
                    local_best = g;
                    bs = ss;
                    bt = tt;
                }
            }
        }
        best = local_best;
        s = bs;
        t = bt;
        step /= 3.0;
    }
    // Quadratic polish on the smooth overlap g(s,t).
    for (int polish = 0; polish < 3; ++polish) {
        const double h = std::max(step, 1e-7);
        const double g0 = eval_st(s, t);
        const double gp = eval_st(s + h, t), gm = eval_st(s - h, t);
        const double hp = eval_st(s, t + h), hm = eval_st(s, t - h);
        const double gpp = eval_st(s + h, t + h), gmm = eval_st(s - h, t - h),
                     gpm = eval_st(s + h, t - h), gmp = eval_st(s - h, t + h);
        const double ds = (gp - gm) / (2 * h), dt = (hp - hm) / (2 * h);
        const double dss = (gp - 2 * g0 + gm) / (h * h), dtt = (hp - 2 * g0 + hm) / (h * h);
        const double dst = (gpp + gmm - gpm - gmp) / (4 * h * h);
        const double det = dss * dtt - dst * dst;
        if (std::abs(det) < 1e-30) break;
        const double move_s = -(dtt * ds - dst * dt) / det;
        const double move_t = -(dss * dt - dst * ds) / det;
        if (!std::isfinite(move_s) || !std::isfinite(move_t)) break;
        if (std::abs(move_s) > 10 * h || std::abs(move_t) > 10 * h) break;
        const double cand = eval_st(s + move_s, t + move_t);
        if (cand >= g0) {
            s += move_s;
            t += move_t;
            best = cand;
        } else {
            break;
        }
        step = std::max(std::abs(move_s), std::abs(move_t));
    }
    const double dist = std::sqrt(std::max(0.0, 1.0 - std::min(1.0, best)));
    return {dist, reduce(s + t * spec_.tau, spec_)};
}

Matrix RoomMatrix::evaluate_at(const std::vector<Complex>& p) const {
    Matrix m(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) m(i, j) = at(i, j).eval(p);
    return m;
}

RoomMatrix multiplication_matrix(const SectionBasis& b1, const SectionBasis& b2, const Frame& frame) {
    const CurveSpec& spec = frame.spec();
    const int n = spec.n;
    if (b1.degree + b2.degree != n)
        throw NotDivisorPair("multiplication_matrix: degrees do not sum to n");
    const EPoint pair_sum = add_points(b1.sum, b2.sum, spec);
    if (!points_equal(pair_sum, reduce(spec.l_sum.z, spec), spec)) {
        std::ostringstream msg;
        msg << "not a divisor pair: sigma(D1)+sigma(D2) != sigma(L), offset "
            << lattice_distance(pair_sum, spec.l_sum, spec);
        throw NotDivisorPair(msg.str());
    }
    // Literal sums may differ from the embedding target by a lattice vector
    // m + k*tau; the factor exp(-2 pi i k z) restores the automorphy match.
    const Complex offset = b1.literal_sum + b2.literal_sum - frame.l_rep();
    auto [ms, kt] = torus_coords(offset, spec.tau);
    const long k_shift = std::lround(kt);
    if (std::abs(ms - std::lround(ms)) > 1e-6 || std::abs(kt - k_shift) > 1e-6)
        throw NotDivisorPair("multiplication_matrix: literal sums differ by a non-lattice offset");

    const auto& samples = frame.sample_points();
    const std::size_t m = samples.size();
    Matrix vals1(static_cast<std::size_t>(b1.degree), m), vals2(static_cast<std::size_t>(b2.degree), m);
    std::vector<Complex> corr(m, 1.0);
    if (k_shift != 0)
        for (std::size_t s = 0; s < m; ++s)
            corr[s] = std::exp(-2.0 * kPi * kI * static_cast<double>(k_shift) * samples[s]);
    for (std::size_t s = 0; s < m; ++s) {
        const auto v1 = b1.eval_all(samples[s], spec);
        const auto v2 = b2.eval_all(samples[s], spec);
        for (int i = 0; i < b1.degree; ++i) vals1(i, s) = v1[i];
        for (int j = 0; j < b2.degree; ++j) vals2(j, s) = v2[j];
    }

    RoomMatrix room;
    room.rows = b1.degree;
    room.cols = b2.degree;
    room.x1 = b1.sum;
    room.x2 = b2.sum;
    room.entries.resize(static_cast<std::size_t>(b1.degree) * b2.degree);
    const Matrix& pinv = frame.sample_pinv();
    const Matrix& sample_matrix = frame.sample_matrix();
    double worst = 0.0;
    for (int i = 0; i < b1.degree; ++i) {
        for (int j = 0; j < b2.degree; ++j) {
            std::vector<Complex> prod(m);
            for (std::size_t s = 0; s < m; ++s) prod[s] = vals1(i, s) * vals2(j, s) * corr[s];
            std::vector<Complex> coeffs = pinv * prod;
            const std::vector<Complex> fitted = sample_matrix * coeffs;
            double err = 0, mag = 0;
            for (std::size_t s = 0; s < m; ++s) {
                err += std::norm(fitted[s] - prod[s]);
                mag += std::norm(prod[s]);
            }
            const double rel = mag > 0 ? std::sqrt(err / mag) : 0.0;
            worst = std::max(worst, rel);
            room.entries[static_cast<std::size_t>(i) * b2.degree + j].coeffs = std::move(coeffs);
        }
    }
    room.fit_residual = worst;
    if (worst > spec.tol.rank_tol) {
        std::ostringstream msg;
        msg << "multiplication_matrix: fit residual " << worst << " exceeds rank_tol "
            << spec.tol.rank_tol;
        throw NumericFailure(msg.str());
    }
    return room;
}

Subspace forms_vanishing_on(const Divisor& d, const Frame& frame) {
    const CurveSpec& spec = frame.spec();
    const int n = spec.n;
    if (d.degree() > n) throw BadInput("forms_vanishing_on: degree exceeds n");
    std::vector<std::vector<Complex>> rows;
    for (const auto& part : d.parts) {
        const int order = part.multiplicity - 1;
        std::vector<std::vector<Complex>> jets(n);
        double scale = 0;
        for (int i = 0; i < n; ++i) {
            jets[i] = frame.embedding_basis().eval_jet(i, part.point.z, spec, order);
            for (const auto& c : jets[i]) scale = std::max(scale, std::abs(c));
        }
        if (scale == 0) scale = 1;
        for (int k = 0; k <= order; ++k) {
            std::vector<Complex> row(n);
            for (int i = 0; i < n; ++i) row[i] = jets[i][k] / scale;
            rows.push_back(std::move(row));
        }
    }
    Subspace out;
    out.ambient_dim = n;
    if (rows.empty()) {
        out.basis = Matrix::identity(n);
        return out;
    }
    out.basis = null_space(Matrix::from_rows(rows), spec.tol.rank_tol);
    return out;
}

Subspace span_of_divisor(const Divisor& d, const Frame& frame) {
    const int n = frame.n();
    const Subspace w = forms_vanishing_on(d, frame);
    Subspace out;
    out.ambient_dim = n;
    if (w.dim() == 0) {
        out.basis = Matrix::identity(n);
        return out;
    }
    out.basis = null_space(w.basis.transpose(), frame.spec().tol.rank_tol);
    return out;
}

Subspace xi_perp(const std::vector<Complex>& p, const Frame& frame) {
    Matrix row(1, p.size());
    double scale = 0;
    for (const auto& c : p) scale = std::max(scale, std::abs(c));
    if (scale == 0) throw BadInput("xi_perp: zero point");
    for (std::size_t j = 0; j < p.size(); ++j) row(0, j) = p[j] / scale;
    Subspace out;
    out.ambient_dim = p.size();
    out.basis = null_space(row, frame.spec().tol.rank_tol);
    return out;
}

std::vector<Complex> normalized(std::vector<Complex> v) {
    const double nrm = norm2(v);
    if (nrm == 0) return v;
    for (auto& z : v) z /= nrm;
    return v;
}

double projective_distance(const std::vector<Complex>& p, const std::vector<Complex>& q) {
    const double np = norm2(p), nq = norm2(q);
    if (np == 0 || nq == 0) return 1.0;
    const double c = std::abs(dot_h(p, q)) / (np * nq);
    return std::sqrt(std::max(0.0, 1.0 - std::min(1.0, c) * std::min(1.0, c)));
}

namespace {

struct SectionFunction {
    const SectionBasis& basis;
    const std::vector<Complex>& coeffs;
    const CurveSpec& spec;

    Complex value(Complex z) const {
        Complex acc = 0;
        for (std::size_t i = 0; i < basis.points.size(); ++i)
            acc += coeffs[i] * basis.eval(i, z, spec);
        return acc;
    }
    std::pair<Complex, Complex> value_deriv(Complex z) const {
        Complex v = 0, dv = 0;
        for (std::size_t i = 0; i < basis.points.size(); ++i) {
            const auto jet = basis.eval_jet(i, z, spec, 1);
            v += coeffs[i] * jet[0];
            dv += coeffs[i] * jet[1];
        }
        return {v, dv};
    }
};

int winding_number(const SectionFunction& f, Complex center, double radius, int samples,
                   double* defect) {
    double acc = 0;
    Complex prev = f.value(center + radius);
    double min_mag = std::abs(prev);
    for (int i = 1; i <= samples; ++i) {
        const double ang = 2.0 * kPi * i / samples;
        const Complex z = center + radius * Complex{std::cos(ang), std::sin(ang)};
        const Complex cur = f.value(z);
        min_mag = std::min(min_mag, std::abs(cur));
        const Complex ratio = cur / prev;
        acc += std::arg(ratio);
        prev = cur;
    }
    const double turns = acc / (2.0 * kPi);
    if (defect) *defect = std::abs(turns - std::lround(turns));
    if (min_mag == 0) return -1;
    return static_cast<int>(std::lround(turns));
}

}  // namespace

Divisor section_zeros(const SectionBasis& b, const std::vector<Complex>& coeffs, const Frame& frame) {
    const CurveSpec& spec = frame.spec();
    double cmag = 0;
    for (const auto& c : coeffs) cmag = std::max(cmag, std::abs(c));
    if (cmag == 0) throw BadInput("section_zeros: zero coefficient vector");
    const SectionFunction f{b, coeffs, spec};
    const int d = b.degree;

    for (int side : {64, 128}) {
        std::vector<double> mag(static_cast<std::size_t>(side) * side);
        double scale = 0;
        for (int i = 0; i < side; ++i) {
            for (int j = 0; j < side; ++j) {
                const Complex z = (i + 0.5) / side + ((j + 0.5) / side) * spec.tau;
                const double m = std::abs(f.value(z));
                mag[static_cast<std::size_t>(i) * side + j] = m;
                scale = std::max(scale, m);
            }
        }
        if (scale == 0) throw NumericFailure("section_zeros: section vanished on the whole grid");

        std::vector<Complex> seeds;
        for (int i = 0; i < side; ++i) {
            for (int j = 0; j < side; ++j) {
                const double m0 = mag[static_cast<std::size_t>(i) * side + j];
                bool is_min = true;
                for (int di = -1; di <= 1 && is_min; ++di)
                    for (int dj = -1; dj <= 1; ++dj) {
                        if (di == 0 && dj == 0) continue;
                        const int ii = (i + di + side) % side, jj = (j + dj + side) % side;
                        if (mag[static_cast<std::size_t>(ii) * side + jj] < m0) {
                            is_min = false;
                            break;
                        }
                    }
                if (is_min && m0 < 0.5 * scale)
                    seeds.push_back((i + 0.5) / side + ((j + 0.5) / side) * spec.tau);
            }
        }

        std::vector<Complex> zeros;
        for (Complex z : seeds) {
            for (int it = 0; it < 80; ++it) {
                if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) break;
                const auto [v, dv] = f.value_deriv(z);
                if (std::abs(dv) < 1e-300) break;
                const Complex step = v / dv;
                z -= step;
                if (std::abs(step) < 1e-15) break;
            }
            if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) continue;
            const double val = std::abs(f.value(z));
            if (!(val <= spec.tol.root_tol * scale)) continue;  // NaN-safe rejection
            zeros.push_back(reduce(z, spec).z);
        }

        // Cluster zeros that Newton reached from multiple seeds.
        std::vector<Complex> centers;
        for (Complex z : zeros) {
            bool taken = false;
            for (const Complex& c : centers) {
                const EPoint a{z}, bb{c};
                if (lattice_distance(a, bb, spec) < 1e-6) {
                    taken = true;
                    break;
                }
            }
            if (!taken) centers.push_back(z);
        }

        std::vector<Divisor::Part> parts;
        int total = 0;
        bool winding_ok = true;
        for (const Complex& c : centers) {
            double nearest = 1e300;
            for (const Complex& other : centers) {
                if (&other == &c) continue;
                nearest = std::min(nearest, lattice_distance(EPoint{c}, EPoint{other}, spec));
            }
            const double radius = std::min(0.02, nearest / 3.0);
            double defect = 0;
            int mult = winding_number(f, c, radius, 192, &defect);
            if (mult < 1 || defect > 0.1) {
                mult = winding_number(f, c, radius * 0.55, 384, &defect);
                if (mult < 1 || defect > 0.1) {
                    winding_ok = false;
                    break;
                }
            }
            Complex refined = c;
            if (mult > 1) {
                // multiplicity-aware Newton recovers quadratic convergence
                for (int it = 0; it < 6; ++it) {
                    const auto [v, dv] = f.value_deriv(refined);
                    if (std::abs(dv) < 1e-300) break;
                    const Complex step = static_cast<double>(mult) * v / dv;
                    refined -= step;
                    if (std::abs(step) < 1e-14) break;
                }
            }
            parts.push_back({reduce(refined, spec), mult});
            total += mult;
        }

        if (winding_ok && total == d) {
            Divisor out = make_divisor(std::move(parts), spec);
            Complex zsum = 0;
            for (const auto& part : out.parts)
                zsum += static_cast<double>(part.multiplicity) * part.point.z;
            if (lattice_distance(reduce(zsum, spec), b.sum, spec) > 1e-6)
                throw NumericFailure("section_zeros: recovered zeros violate the Abel condition");
            return out;
        }
    }
    std::ostringstream msg;
    msg << "section_zeros: zero count mismatch for degree " << d
        << " (theta_terms or search grid too small?)";
    throw NumericFailure(msg.str());
}

}  // namespace leafscope
