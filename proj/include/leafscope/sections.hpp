#pragma once

#include "leafscope/linalg.hpp"
#include "leafscope/torus.hpp"

namespace leafscope {

// Odd theta value used as the elementary factor of every section:
// theta_h(z) = theta[1/2,1/2](z, tau), zeros exactly on the lattice.
std::vector<Complex> theta_h_jet(Complex z, Complex tau, int order, int terms);

// A numeric basis of H^0(E, O(D)) for the class of degree d with sum x.
// Section i is the product prod_j theta_h(z - pts[i][j]); all sections share
// the same literal point sum, so they carry identical automorphy factors.
struct SectionBasis {
    int degree = 0;
    EPoint sum{};
    Complex literal_sum{};
    std::vector<std::vector<Complex>> points;  // degree sections x degree literal zeros
    // Per-section normalization; raw theta products span ~30 orders of
    // magnitude once construction points leave the fundamental band.
    std::vector<Complex> scale;
    std::string convention_tag;

    // Taylor coefficients of section i at z, length order+1.
    std::vector<Complex> eval_jet(std::size_t i, Complex z, const CurveSpec& spec, int order) const;
    Complex eval(std::size_t i, Complex z, const CurveSpec& spec) const;
    // Values of all sections at z.
    std::vector<Complex> eval_all(Complex z, const CurveSpec& spec) const;
};

struct LinearForm {
    std::vector<Complex> coeffs;  // length n, coordinates in the fixed H^0(E,L) basis

    Complex eval(const std::vector<Complex>& p) const { return dot_u(coeffs, p); }
};

// Room's matrix of linear forms Phi(D1, D2) for a divisor pair.
struct RoomMatrix {
    int rows = 0, cols = 0;  // d1 x d2 with d1 + d2 = n
    std::vector<LinearForm> entries;  // row-major
    EPoint x1{}, x2{};
    double fit_residual = 0.0;

    const LinearForm& at(int i, int j) const { return entries[static_cast<std::size_t>(i) * cols + j]; }
    Matrix evaluate_at(const std::vector<Complex>& p) const;
};

// The realized curve: fixed embedding basis of H^0(E, L), the fixed sample
// set used by every least-squares fit, and a sampled copy of embed(E).
// Immutable after construction; all module operations take a Frame.
class Frame {
public:
    explicit Frame(const CurveSpec& spec);

    const CurveSpec& spec() const { return spec_; }
    int n() const { return spec_.n; }
    Complex tau() const { return spec_.tau; }
    Complex l_rep() const { return l_rep_; }
    const SectionBasis& embedding_basis() const { return embedding_; }
    const std::vector<Complex>& sample_points() const { return samples_; }
    const Matrix& sample_matrix() const { return sample_matrix_; }   // 4n x n
    const Matrix& sample_pinv() const { return sample_pinv_; }       // n x 4n
    const SvdResult& sample_svd() const { return sample_svd_; }

    std::vector<Complex> embed(const EPoint& x) const;
    // Same evaluation at a literal complex argument, no lattice reduction;
    // analytic in z (used by finite-difference dimension probes).
    std::vector<Complex> embed_raw(Complex z) const;

    // Chordal distance from [p] to the sampled curve, with the nearest
    // parameter refined by shrinking local grids.
    std::pair<double, EPoint> curve_distance(const std::vector<Complex>& p) const;

    Rng rng_for(std::uint64_t salt) const { return Rng(spec_.tol.seed).fork(salt); }

private:
    CurveSpec spec_;
    Complex l_rep_;
    SectionBasis embedding_;
    std::vector<Complex> samples_;
    Matrix sample_matrix_;
    SvdResult sample_svd_;
    Matrix sample_pinv_;
    std::vector<std::vector<Complex>> curve_grid_;  // normalized embed over a coarse grid
    std::vector<Complex> curve_grid_z_;
    int curve_grid_side_ = 0;
};

// Deterministic basis for the degree-d class with sum x (literal target x.z).
SectionBasis basis_of_sections(int d, const EPoint& x, const Frame& frame);

// Basis with an explicit literal sum target; `salt` decouples the random
// offsets of independently constructed bases.
SectionBasis basis_with_literal_sum(int d, Complex literal_target, const Frame& frame,
                                    std::uint64_t salt);

// Basis with prescribed fixed offsets; section i has zeros at
// {offsets[i][0], ..., offsets[i][d-2], literal_target - sum(offsets[i])}.
SectionBasis basis_from_offsets(int d, Complex literal_target,
                                std::vector<std::vector<Complex>> offsets, const Frame& frame);

// Coordinates of each product e_i * f_j in the fixed H^0(E, L) basis,
// fitted by least squares over the frame's sample set.
RoomMatrix multiplication_matrix(const SectionBasis& b1, const SectionBasis& b2, const Frame& frame);

// Linear span of D inside C^n (cone over the projective span), computed as
// the annihilator of the forms vanishing on D; multiplicity m imposes
// vanishing of the first m-1 derivatives.
Subspace span_of_divisor(const Divisor& d, const Frame& frame);

// Forms vanishing on D (the annihilator itself), as a subspace of H^0(E,L).
Subspace forms_vanishing_on(const Divisor& d, const Frame& frame);

// Hyperplane of sections vanishing at the point [p]: {c : c . p = 0}.
Subspace xi_perp(const std::vector<Complex>& p, const Frame& frame);

// Zero divisor of sum_i coeffs[i] * b.section_i, located by a coarse grid
// plus Newton, with multiplicities certified by winding numbers.
Divisor section_zeros(const SectionBasis& b, const std::vector<Complex>& coeffs, const Frame& frame);

std::vector<Complex> normalized(std::vector<Complex> v);

// sin of the angle between projective points (chordal distance).
double projective_distance(const std::vector<Complex>& p, const std::vector<Complex>& q);

}  // namespace leafscope
