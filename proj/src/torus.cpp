#include "leafscope/torus.hpp"

#include <algorithm>
#include <cmath>

namespace leafscope {

void ToleranceConfig::validate() const {
    if (!(lattice_tol > 0) || !(rank_tol > 0) || !(root_tol > 0))
        throw BadInput("tolerances must be positive");
    if (theta_terms < 10) throw BadInput("theta_terms must be >= 10");
}

void CurveSpec::validate() const {
    if (!(tau.imag() > 0)) throw BadInput("Im(tau) must be positive");
    if (n < 3) throw BadInput("n must be >= 3");
    tol.validate();
}

std::pair<double, double> torus_coords(Complex z, Complex tau) {
    const double t = z.imag() / tau.imag();
    const double s = z.real() - t * tau.real();
    return {s, t};
}

namespace {
double frac01(double x) {
    double f = x - std::floor(x);
    if (f >= 1.0) f = 0.0;  // guard against rounding at the boundary
    return f;
}
}  // namespace

EPoint reduce(Complex z, const CurveSpec& spec) {
    auto [s, t] = torus_coords(z, spec.tau);
    // Snap near-integer coordinates so that representatives of the same
    // point cannot straddle the [0,1) seam.
    const double snap = spec.tol.lattice_tol;
    double s0 = frac01(s), t0 = frac01(t);
    if (s0 > 1.0 - snap) s0 = 0.0;
    if (t0 > 1.0 - snap) t0 = 0.0;
    if (s0 < snap) s0 = 0.0;
    if (t0 < snap) t0 = 0.0;
    return EPoint{s0 + t0 * spec.tau};
}

EPoint add_points(const EPoint& p, const EPoint& q, const CurveSpec& spec) {
    return reduce(p.z + q.z, spec);
}

EPoint negate(const EPoint& p, const CurveSpec& spec) { return reduce(-p.z, spec); }

EPoint sub_points(const EPoint& p, const EPoint& q, const CurveSpec& spec) {
    return reduce(p.z - q.z, spec);
}

EPoint scale_point(const EPoint& p, long k, const CurveSpec& spec) {
    return reduce(static_cast<double>(k) * p.z, spec);
}

double lattice_distance(const EPoint& p, const EPoint& q, const CurveSpec& spec) {
    const Complex d = p.z - q.z;
    double best = 1e300;
    for (int m = -1; m <= 1; ++m) {
        for (int k = -1; k <= 1; ++k) {
            const Complex shift = d - (static_cast<double>(m) + static_cast<double>(k) * spec.tau);
            best = std::min(best, std::max(std::abs(shift.real()), std::abs(shift.imag())));
        }
    }
    return best;
}

bool points_equal(const EPoint& p, const EPoint& q, const CurveSpec& spec) {
    return lattice_distance(p, q, spec) <= spec.tol.lattice_tol;
}

std::vector<EPoint> omega_coset(const CurveSpec& spec) {
    const Complex half = spec.l_sum.z * 0.5;
    std::vector<EPoint> out;
    out.push_back(reduce(half, spec));
    out.push_back(reduce(half + 0.5, spec));
    out.push_back(reduce(half + 0.5 * spec.tau, spec));
    out.push_back(reduce(half + 0.5 + 0.5 * spec.tau, spec));
    return out;
}

bool in_omega_coset(const EPoint& x, const CurveSpec& spec, double tol) {
    for (const auto& w : omega_coset(spec)) {
        const Complex d = x.z - w.z;
        for (int m = -1; m <= 1; ++m)
            for (int k = -1; k <= 1; ++k) {
                const Complex shift = d - (static_cast<double>(m) + static_cast<double>(k) * spec.tau);
                if (std::max(std::abs(shift.real()), std::abs(shift.imag())) <= tol) return true;
            }
    }
    return false;
}

EPoint snap_to_omega(const EPoint& x, const CurveSpec& spec) {
    const auto coset = omega_coset(spec);
    const EPoint* best = &coset[0];
    double best_d = 1e300;
    for (const auto& w : coset) {
        const double d = lattice_distance(x, w, spec);
        if (d < best_d) {
            best_d = d;
            best = &w;
        }
    }
    return *best;
}

int Divisor::degree() const {
    int d = 0;
    for (const auto& p : parts) d += p.multiplicity;
    return d;
}

Divisor make_divisor(std::vector<Divisor::Part> parts, const CurveSpec& spec) {
    Divisor out;
    for (auto& part : parts) {
        if (part.multiplicity <= 0) throw BadInput("divisor multiplicities must be positive");
        part.point = reduce(part.point.z, spec);
        bool merged = false;
        for (auto& held : out.parts) {
            if (points_equal(held.point, part.point, spec)) {
                held.multiplicity += part.multiplicity;
                merged = true;
                break;
            }
        }
        if (!merged) out.parts.push_back(part);
    }
    std::sort(out.parts.begin(), out.parts.end(), [](const Divisor::Part& a, const Divisor::Part& b) {
        if (a.point.z.real() != b.point.z.real()) return a.point.z.real() < b.point.z.real();
        return a.point.z.imag() < b.point.z.imag();
    });
    return out;
}

Divisor divisor_add(const Divisor& a, const Divisor& b, const CurveSpec& spec) {
    std::vector<Divisor::Part> parts = a.parts;
    parts.insert(parts.end(), b.parts.begin(), b.parts.end());
    return make_divisor(std::move(parts), spec);
}

EPoint sum_divisor(const Divisor& d, const CurveSpec& spec) {
    Complex acc = 0;
    for (const auto& p : d.parts) acc += static_cast<double>(p.multiplicity) * p.point.z;
    return reduce(acc, spec);
}

bool lin_equiv(const Divisor& a, const Divisor& b, const CurveSpec& spec) {
    if (a.degree() != b.degree()) return false;
    return points_equal(sum_divisor(a, spec), sum_divisor(b, spec), spec);
}

Divisor gcd_divisor(const Divisor& a, const Divisor& b, const CurveSpec& spec) {
    Divisor out;
    for (const auto& pa : a.parts) {
        for (const auto& pb : b.parts) {
            if (points_equal(pa.point, pb.point, spec)) {
                out.parts.push_back({pa.point, std::min(pa.multiplicity, pb.multiplicity)});
                break;
            }
        }
    }
    return make_divisor(std::move(out.parts), spec);
}

Divisor lcm_divisor(const Divisor& a, const Divisor& b, const CurveSpec& spec) {
    std::vector<Divisor::Part> parts;
    for (const auto& pa : a.parts) {
        int mult = pa.multiplicity;
        for (const auto& pb : b.parts)
            if (points_equal(pa.point, pb.point, spec)) mult = std::max(mult, pb.multiplicity);
        parts.push_back({pa.point, mult});
    }
    for (const auto& pb : b.parts) {
        bool seen = false;
        for (const auto& pa : a.parts)
            if (points_equal(pa.point, pb.point, spec)) seen = true;
        if (!seen) parts.push_back(pb);
    }
    return make_divisor(std::move(parts), spec);
}

bool divisors_equal(const Divisor& a, const Divisor& b, const CurveSpec& spec) {
    if (a.parts.size() != b.parts.size() || a.degree() != b.degree()) return false;
    for (const auto& pa : a.parts) {
        bool found = false;
        for (const auto& pb : b.parts) {
            if (pa.multiplicity == pb.multiplicity && points_equal(pa.point, pb.point, spec)) {
                found = true;
                break;
            }
        }
        if (!found) return false;
    }
    return true;
}

bool supports_disjoint(const Divisor& a, const Divisor& b, const CurveSpec& spec) {
    for (const auto& pa : a.parts)
        for (const auto& pb : b.parts)
            if (points_equal(pa.point, pb.point, spec)) return false;
    return true;
}

EPoint random_point(Rng& rng, const CurveSpec& spec) {
    return reduce(rng.uniform() + rng.uniform() * spec.tau, spec);
}

Divisor random_divisor_with_sum(int d, const EPoint& x, Rng& rng, const CurveSpec& spec) {
    if (d < 1) throw BadInput("divisor degree must be >= 1");
    if (d == 1) return make_divisor({{x, 1}}, spec);
    for (int attempt = 0; attempt < 64; ++attempt) {
        std::vector<Divisor::Part> parts;
        Complex acc = 0;
        for (int i = 0; i + 1 < d; ++i) {
            const EPoint p = random_point(rng, spec);
            acc += p.z;
            parts.push_back({p, 1});
        }
        parts.push_back({reduce(x.z - acc, spec), 1});
        Divisor cand = make_divisor(std::move(parts), spec);
        if (static_cast<int>(cand.parts.size()) == d) return cand;  // no collisions
    }
    throw RejectionBudgetExhausted("random_divisor_with_sum: could not find distinct points");
}

namespace {

struct Reduction {
    Complex z0;      // representative with |Im z0| <= Im(tau)/2, |Re z0| <= ~1/2
    long m = 0;      // z = z0 + p + m*tau
    long p = 0;
};

Reduction reduce_band(Complex z, Complex tau) {
    Reduction r;
    r.m = std::lround(z.imag() / tau.imag());
    const Complex zs = z - static_cast<double>(r.m) * tau;
    r.p = std::lround(zs.real());
    r.z0 = zs - static_cast<double>(r.p);
    return r;
}

// Raw series at a band-reduced argument together with an error estimate.
// Returns Taylor coefficients up to `order`.
std::vector<Complex> theta_series_jet(double a, double b, Complex z0, Complex tau, int order,
                                      int terms, bool exact_range, double* tail_ratio) {
    std::vector<Complex> jet(order + 1, Complex{0.0, 0.0});
    double max_mag = 0.0, last_mag = 0.0;
    const Complex pii = kPi * kI;
    int consecutive_small = 0;
    for (int ring = 0; ring <= terms; ++ring) {
        double ring_mag = 0.0;
        for (int sgn = 0; sgn < (ring == 0 ? 1 : 2); ++sgn) {
            const int k = (sgn == 0) ? ring : -ring;
            const double ka = static_cast<double>(k) + a;
            const Complex term = std::exp(pii * ka * ka * tau + 2.0 * pii * ka * (z0 + b));
            const double mag = std::abs(term);
            ring_mag = std::max(ring_mag, mag);
            Complex deriv_factor = 1.0;
            double fact = 1.0;
            for (int j = 0; j <= order; ++j) {
                jet[j] += term * deriv_factor / fact;
                deriv_factor *= 2.0 * pii * ka;
                fact *= static_cast<double>(j + 1);
            }
        }
        max_mag = std::max(max_mag, ring_mag);
        last_mag = ring_mag;
        if (!exact_range && ring > 2) {
            if (ring_mag <= 1e-18 * max_mag)
                ++consecutive_small;
            else
                consecutive_small = 0;
            if (consecutive_small >= 2) {
                last_mag = ring_mag;
                break;
            }
        }
    }
    if (tail_ratio) *tail_ratio = max_mag > 0 ? last_mag / max_mag : 0.0;
    return jet;
}

}  // namespace

std::vector<Complex> jet_mul(const std::vector<Complex>& a, const std::vector<Complex>& b) {
    const std::size_t order = std::min(a.size(), b.size());
    std::vector<Complex> out(order, Complex{0.0, 0.0});
    for (std::size_t i = 0; i < order; ++i)
        for (std::size_t j = 0; i + j < order; ++j) out[i + j] += a[i] * b[j];
    return out;
}

std::vector<Complex> theta_jet(double a, double b, Complex z, Complex tau, int order, int terms) {
    const Reduction red = reduce_band(z, tau);
    std::vector<Complex> base = theta_series_jet(a, b, red.z0, tau, order, terms, false, nullptr);
    const double m = static_cast<double>(red.m);
    const double p = static_cast<double>(red.p);
    const Complex pii = kPi * kI;
    // theta(z) = exp(2 pi i (a p - b m) - pi i m^2 tau - 2 pi i m z0) * theta(z0)
    const Complex c0 = std::exp(2.0 * pii * (a * p - b * m) - pii * m * m * tau - 2.0 * pii * m * red.z0);
    if (red.m == 0) {
        for (auto& coeff : base) coeff *= c0;
        return base;
    }
    std::vector<Complex> pref(order + 1);
    Complex pow = c0;
    double fact = 1.0;
    for (int j = 0; j <= order; ++j) {
        pref[j] = pow / fact;
        pow *= -2.0 * pii * m;
        fact *= static_cast<double>(j + 1);
    }
    return jet_mul(pref, base);
}

Complex theta_value(double a, double b, Complex z, Complex tau, int terms) {
    const Reduction red = reduce_band(z, tau);
    const Complex pii = kPi * kI;
    Complex sum = 0;
    double max_mag = 0.0;
    int consecutive_small = 0;
    for (int ring = 0; ring <= terms; ++ring) {
        double ring_mag = 0.0;
        for (int sgn = 0; sgn < (ring == 0 ? 1 : 2); ++sgn) {
            const int k = (sgn == 0) ? ring : -ring;
            const double ka = static_cast<double>(k) + a;
            const Complex term = std::exp(pii * ka * ka * tau + 2.0 * pii * ka * (red.z0 + b));
            sum += term;
            ring_mag = std::max(ring_mag, std::abs(term));
        }
        max_mag = std::max(max_mag, ring_mag);
        if (ring > 2) {
            if (ring_mag <= 1e-18 * max_mag)
                ++consecutive_small;
            else
                consecutive_small = 0;
            if (consecutive_small >= 2) break;
        }
    }
    const double m = static_cast<double>(red.m);
    const double p = static_cast<double>(red.p);
    const Complex c0 = std::exp(2.0 * pii * (a * p - b * m) - pii * m * m * tau - 2.0 * pii * m * red.z0);
    return c0 * sum;
}

Complex theta_char(double a, double b, Complex z, Complex tau, int terms) {
    if (!(tau.imag() > 0)) throw BadInput("theta_char: Im(tau) must be positive");
    if (terms < 1) throw BadInput("theta_char: terms must be >= 1");
    const Reduction red = reduce_band(z, tau);
    double tail = 0.0;
    std::vector<Complex> base = theta_series_jet(a, b, red.z0, tau, 0, terms, true, &tail);
    if (tail > 1e-12) throw TruncationError("theta_char: truncation too coarse for requested tolerance");
    const double m = static_cast<double>(red.m);
    const double p = static_cast<double>(red.p);
    const Complex pii = kPi * kI;
    const Complex c0 = std::exp(2.0 * pii * (a * p - b * m) - pii * m * m * tau - 2.0 * pii * m * red.z0);
    return c0 * base[0];
}

}  // namespace leafscope
