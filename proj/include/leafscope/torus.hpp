#pragma once

#include "leafscope/common.hpp"
#include "leafscope/rng.hpp"

namespace leafscope {

struct ToleranceConfig {
    double lattice_tol = 1e-10;  // point equality on the torus
    double rank_tol = 1e-8;      // relative SVD threshold
    int theta_terms = 40;        // q-series truncation bound
    double root_tol = 1e-9;      // Newton convergence for section zeros
    std::uint64_t seed = 0x5eedcafe;

    void validate() const;
};

// A point of the torus C / (Z + Z tau), stored as the canonical
// representative s + t*tau with s, t in [0, 1).
struct EPoint {
    Complex z{0.0, 0.0};
};

inline const char* kThetaConvention = "theta[a,b]-qseries-v1";

struct CurveSpec {
    Complex tau{0.0, 1.0};
    int n = 5;
    EPoint l_sum{};  // sigma of the embedding class; 0 unless configured
    ToleranceConfig tol{};
    std::string theta_convention = kThetaConvention;

    void validate() const;
    bool is_even() const { return n % 2 == 0; }
    int half() const { return n / 2; }  // r, with n = 2r or n = 2r+1
};

// (s, t) with z = s + t*tau.
std::pair<double, double> torus_coords(Complex z, Complex tau);

EPoint reduce(Complex z, const CurveSpec& spec);
EPoint add_points(const EPoint& p, const EPoint& q, const CurveSpec& spec);
EPoint negate(const EPoint& p, const CurveSpec& spec);
EPoint sub_points(const EPoint& p, const EPoint& q, const CurveSpec& spec);
EPoint scale_point(const EPoint& p, long k, const CurveSpec& spec);

// Componentwise distance to the nearest lattice translate (sup norm over the
// 9 nearest translates, which suffices for canonical representatives).
double lattice_distance(const EPoint& p, const EPoint& q, const CurveSpec& spec);
bool points_equal(const EPoint& p, const EPoint& q, const CurveSpec& spec);

// The coset {w : 2w = sigma(L)} of the 2-torsion subgroup; always 4 points.
std::vector<EPoint> omega_coset(const CurveSpec& spec);
bool in_omega_coset(const EPoint& x, const CurveSpec& spec, double tol);
// Nearest coset member (exact representative, not the queried point).
EPoint snap_to_omega(const EPoint& x, const CurveSpec& spec);

// Effective divisor: distinct reduced points with positive multiplicities.
struct Divisor {
    struct Part {
        EPoint point;
        int multiplicity = 1;
    };
    std::vector<Part> parts;

    int degree() const;
    bool empty() const { return parts.empty(); }
};

// Merges coincident points (within lattice_tol) and sorts deterministically.
Divisor make_divisor(std::vector<Divisor::Part> parts, const CurveSpec& spec);
Divisor divisor_add(const Divisor& a, const Divisor& b, const CurveSpec& spec);
EPoint sum_divisor(const Divisor& d, const CurveSpec& spec);
bool lin_equiv(const Divisor& a, const Divisor& b, const CurveSpec& spec);
Divisor gcd_divisor(const Divisor& a, const Divisor& b, const CurveSpec& spec);
Divisor lcm_divisor(const Divisor& a, const Divisor& b, const CurveSpec& spec);
bool divisors_equal(const Divisor& a, const Divisor& b, const CurveSpec& spec);
bool supports_disjoint(const Divisor& a, const Divisor& b, const CurveSpec& spec);

// Effective degree-d divisor with sigma = x; points are pairwise distinct
// for d >= 2 (collisions are resampled).
Divisor random_divisor_with_sum(int d, const EPoint& x, Rng& rng, const CurveSpec& spec);

EPoint random_point(Rng& rng, const CurveSpec& spec);

// theta with characteristics:
//   theta[a,b](z, tau) = sum_k exp(pi*i*(k+a)^2 tau + 2*pi*i*(k+a)(z+b)).
// The summation range is k in [-terms, terms] around the reduced argument;
// quasi-periodicity factors are applied analytically so the series is always
// evaluated in the band |Im z0| <= Im(tau)/2.
Complex theta_char(double a, double b, Complex z, Complex tau, int terms);

// Taylor coefficients [f, f'/1!, ..., f^(K)/K!] of theta[a,b] at z.
// Fast path: the series self-truncates once terms are negligible.
std::vector<Complex> theta_jet(double a, double b, Complex z, Complex tau, int order, int terms);

// Allocation-free value path for hot loops; same convention and reduction.
Complex theta_value(double a, double b, Complex z, Complex tau, int terms);
inline Complex theta_h_value(Complex z, Complex tau, int terms) {
    return theta_value(0.5, 0.5, z, tau, terms);
}

// Truncated Taylor (jet) product.
std::vector<Complex> jet_mul(const std::vector<Complex>& a, const std::vector<Complex>& b);

}  // namespace leafscope
