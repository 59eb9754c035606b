#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>

#include "leafscope/poly.hpp"
#include "leafscope/sections.hpp"

namespace leafscope {

enum class SecantCount { Unique, Pencil };

// Result of the minimal-secant-level search.
struct MinimalLevel {
    bool top_stratum = false;  // n odd and off Sec_r
    int d = 0;
    EPoint x{};
    double defect = 0.0;       // rank-defect indicator at the accepted point
    bool ambiguous = false;
    std::string note;
};

// Rank-condition machinery for Sec_{d,x}(E) membership, search and counting.
// Owns per-degree scan tables over a fixed x-grid so repeated queries cost
// one small matrix assembly per grid cell.
class SecantEngine {
public:
    explicit SecantEngine(const Frame& frame, int grid_side = 48);

    const Frame& frame() const { return frame_; }

    // Membership in the partial secant Sec_{d,x}(E) via the rank of
    // Phi(D1, D2)_p; d = 1 falls back to the curve distance and d > n/2 is
    // identically true.
    bool in_partial_secant(const std::vector<Complex>& p, int d, const EPoint& x) const;
    // sigma_d / sigma_1 of Phi(D1(x), D2(x))_p (the membership indicator).
    double partial_secant_defect(const std::vector<Complex>& p, int d, const EPoint& x) const;

    // The divisor D in E^[d]_x with p in span(D), recovered from the left
    // kernel of Phi_p.
    Divisor find_secant_divisor(const std::vector<Complex>& p, int d, const EPoint& x) const;

    // Kernel dimension 1 or 2 for p in Sec_{r,omega} - Sec_{r-1} (n = 2r).
    SecantCount count_r_secants(const std::vector<Complex>& p, const EPoint& omega) const;

    // n = 2r only: determinants of two inequivalent divisor pairs; their
    // common zero locus is Sec_{r-1}(E).
    std::pair<PolynomialForm, PolynomialForm> secant_pencil() const;

    // n = 2r only: the x with det Phi(D1(x), D2(x))_p = 0 through p, plus its
    // mirror l_sum - x (the two parameters of the same pencil member).
    std::pair<EPoint, EPoint> pencil_parameter_for_point(const std::vector<Complex>& p) const;

    MinimalLevel minimal_secant_level(const std::vector<Complex>& p) const;

    Subspace intersect_spans(const Divisor& d1, const Divisor& d2) const;

    std::vector<Complex> sample_partial_secant(int d, const EPoint& x, bool reject_lower,
                                               Rng& rng) const;

    // True when the grid scan at degree d finds a rank drop anywhere
    // (i.e. p in Sec_d(E)); d < n/2 expected.
    bool in_full_secant(const std::vector<Complex>& p, int d) const;

    // Scan diagnostics for one degree: best grid cell and refined result.
    struct LevelProbe {
        double defect = 1.0;
        EPoint x{};
        bool accepted = false;
        bool ambiguous = false;
    };
    LevelProbe probe_level(const std::vector<Complex>& p, int d) const;

    double curve_membership_tol() const { return curve_tol_; }

private:
    struct LevelTable {
        int d = 0;
        std::vector<std::vector<Complex>> off1, off2;  // fixed random offsets
        std::vector<Complex> c1, c2;                   // per-section offset sums
        Matrix prefix1, prefix2;                       // fixed factors at samples
        std::vector<Complex> grid_x;                   // cell representatives
        // Per cell: normalized section values at the samples.
        std::vector<Matrix> cell_a, cell_b;
    };

    const LevelTable& table(int d, int variant = 0) const;
    Matrix phi_from_tables(const LevelTable& t, std::size_t cell,
                           const std::vector<Complex>& w) const;
    LevelProbe probe_with_table(const LevelTable& t, const std::vector<Complex>& p,
                                bool* deep_unverified) const;
    double direct_defect(const std::vector<Complex>& p, int d, const EPoint& x,
                         std::uint64_t salt) const;
    std::vector<std::size_t> candidate_cells(const LevelTable& t, const std::vector<Complex>& w,
                                             std::vector<double>* defects) const;

    // Section values at all samples for parameter x with fixed row scales.
    struct Evaluator {
        const SecantEngine* engine;
        const LevelTable* t;
        std::vector<Complex> w;
        std::vector<double> scale1, scale2;
        // Largest singular value at a fixed generic reference point; rank
        // thresholds are floored by it because Phi_p can vanish entirely
        // (kernel dimension two at pencil points).
        double ref_sigma = 0.0;

        Matrix phi_at(Complex x_literal) const;
        Matrix phi_at_weights(Complex x_literal, const std::vector<Complex>& weights) const;
        double defect_at(Complex x_literal) const;
        Complex det_at(Complex x_literal) const;  // square tables only
    };
    Evaluator make_evaluator(const LevelTable& t, const std::vector<Complex>& p,
                             Complex seed_x) const;

    std::vector<Complex> weight_vector(const std::vector<Complex>& p) const;

    const Frame& frame_;
    int grid_side_;
    double curve_tol_ = 1e-7;
    std::vector<Complex> ref_point_;
    mutable std::map<int, std::unique_ptr<LevelTable>> tables_;
    mutable std::optional<std::pair<PolynomialForm, PolynomialForm>> pencil_;
    mutable std::mutex mutex_;
};

// Divisor-pair bases for (d, x): B1 of degree d with literal sum x_rep and
// B2 of degree n-d with literal sum l_rep - x_rep, from the given offsets.
std::pair<SectionBasis, SectionBasis> divisor_pair_bases(int d, const EPoint& x,
                                                         const Frame& frame, std::uint64_t salt);

}  // namespace leafscope
