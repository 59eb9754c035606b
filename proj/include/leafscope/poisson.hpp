#pragma once

#include "leafscope/poly.hpp"
#include "leafscope/secants.hpp"

namespace leafscope {

// Skew n x n matrix of quadratic forms with {x_i, x_j} = entry(i, j).
// Only the upper triangle is stored; skewness is structural.
class PoissonMatrix {
public:
    PoissonMatrix() = default;
    PoissonMatrix(int n, std::vector<PolynomialForm> upper)
        : n_(n), upper_(std::move(upper)) {}

    int n() const { return n_; }
    const std::vector<PolynomialForm>& upper() const { return upper_; }
    std::vector<PolynomialForm>& upper() { return upper_; }

    // (i, j) with sign; i == j gives the zero form.
    PolynomialForm entry(int i, int j) const;
    const PolynomialForm& upper_entry(int i, int j) const;  // requires i < j
    Complex entry_value(int i, int j, const std::vector<Complex>& p) const;

    Matrix eval(const std::vector<Complex>& p) const;  // exactly skew
    double coeff_norm() const;
    double coeff_max() const;
    void scale_all(Complex c);

    static std::size_t upper_index(int i, int j, int n) {
        return static_cast<std::size_t>(i) * n - static_cast<std::size_t>(i) * (i + 1) / 2 +
               (j - i - 1);
    }

private:
    int n_ = 0;
    std::vector<PolynomialForm> upper_;  // (0,1), (0,2), ..., (n-2,n-1)
};

struct SolveDiagnostics {
    std::vector<double> tail_spectrum;  // smallest singular values, descending
    double null_gap = 0.0;              // sigma_{rank-1} / sigma_rank
    double seconds = 0.0;
    std::size_t rows = 0, cols = 0;
};

// n odd: the unique degree-n form vanishing on Sec_r(E), interpolated from
// samples of the partial secants.  sample_count 0 means twice the monomial
// count (the default oversampling).
PolynomialForm top_secant_equation(const SecantEngine& engine, Rng& rng,
                                   std::size_t sample_count = 0,
                                   SolveDiagnostics* diag = nullptr);

// The unique-up-to-scale skew matrix of quadrics whose rows annihilate the
// Jacobians of the given forms (one form for odd n, the pencil pair for even
// n): sum_i dF_a/dx_i * Omega_ij = 0 as polynomial identities.
PoissonMatrix syzygy_poisson_matrix(const Frame& frame, const std::vector<PolynomialForm>& forms,
                                    SolveDiagnostics* diag = nullptr);

inline Matrix bracket_eval(const PoissonMatrix& omega, const std::vector<Complex>& p) {
    return omega.eval(p);
}

struct PoissonRank {
    int rank = 0;
    bool ambiguous = false;
};

// Rank of the induced skew map Ann(p) -> C^n / C p (the projective rank).
PoissonRank poisson_rank(const PoissonMatrix& omega, const std::vector<Complex>& p,
                         const CurveSpec& spec);

// Max over (i,j,k) of the normalized Jacobi cyclic sum at p.
double jacobi_residual(const PoissonMatrix& omega, const std::vector<Complex>& p);

// Normalized |grad F(p) . Omega(p)|; an identity (not only on the locus).
double casimir_residual(const PoissonMatrix& omega, const std::vector<PolynomialForm>& forms,
                        const std::vector<Complex>& p);

// RK4 integration of p' = Omega(p) alpha(p), alpha re-projected onto Ann(p)
// each evaluation; points renormalized every step.
std::vector<std::vector<Complex>> leaf_flow(const PoissonMatrix& omega,
                                            const std::vector<Complex>& p0, int steps, double dt,
                                            Rng& rng);

struct PoissonCache {
    CurveSpec spec;
    std::vector<PolynomialForm> forms;  // {F} odd, {F1, F2} even
    PoissonMatrix omega;
    SolveDiagnostics interpolation;  // odd n only (empty rows otherwise)
    SolveDiagnostics syzygy;
    // probe points and the flattened upper-triangle bracket values at them
    std::vector<std::vector<Complex>> probe_points;
    std::vector<std::vector<Complex>> probe_values;
    std::string convention_tag;

    // max relative deviation of re-evaluated probes (reload integrity check)
    double probe_deviation(const Frame& frame) const;
};

PoissonCache build_poisson_cache(const Frame& frame, const SecantEngine& engine,
                                 std::size_t sample_count = 0, std::uint64_t sample_seed = 0);

}  // namespace leafscope
