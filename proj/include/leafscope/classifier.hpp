#pragma once

#include "leafscope/bundles.hpp"
#include "leafscope/poisson.hpp"
#include "leafscope/secants.hpp"

namespace leafscope {

// Classification outcome.  Ambiguity is a first-class result: points within
// numeric tolerance of a stratum boundary report their candidates instead of
// guessing.
struct Classification {
    bool ambiguous = false;
    LeafLabel label;                    // valid when !ambiguous
    std::vector<LeafLabel> candidates;  // when ambiguous
    std::string note;
    double residual = 0.0;              // indicator value at the accepted stratum
};

class LeafClassifier {
public:
    LeafClassifier(const Frame& frame, const SecantEngine& engine)
        : frame_(frame), engine_(engine) {}

    const Frame& frame() const { return frame_; }
    const SecantEngine& engine() const { return engine_; }

    Classification classify(const std::vector<Complex>& p) const;

    // A point whose classification is the requested bundle; throws
    // RejectionBudgetExhausted when the constructions keep landing on
    // lower strata.
    std::vector<Complex> sample_leaf(const BundleDescriptor& b, Rng& rng) const;

    struct ConsistencyRecord {
        Classification classification;
        PoissonRank rank;
        int expected_rank = -1;  // n - end_dim of the classified bundle
        bool match = false;
        bool ambiguous = false;
    };
    // Verifies rank Pi = n - dim End(E) = leaf dimension at p.
    ConsistencyRecord consistency_check(const std::vector<Complex>& p,
                                        const PoissonMatrix& omega) const;

    // Tolerance for matching the scan parameter against the Omega coset.
    double omega_match_tol() const { return omega_tol_; }

private:
    Classification classify_at_half_degree(const std::vector<Complex>& p, const MinimalLevel& lvl) const;

    const Frame& frame_;
    const SecantEngine& engine_;
    double omega_tol_ = 1e-5;
};

}  // namespace leafscope
