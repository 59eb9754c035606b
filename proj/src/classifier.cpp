#include "leafscope/classifier.hpp"

#include <sstream>

namespace leafscope {

namespace {

LeafLabel with_witness(BundleDescriptor b, std::optional<Divisor> witness,
                       std::optional<SecantCount> count) {
    LeafLabel label;
    label.bundle = b;
    label.witness = std::move(witness);
    label.secant_count = count;
    return label;
}

}  // namespace

Classification LeafClassifier::classify_at_half_degree(const std::vector<Complex>& p,
                                                       const MinimalLevel& lvl) const {
    const CurveSpec& spec = frame_.spec();
    const int r = spec.half();
    Classification out;
    out.residual = lvl.defect;

    if (!in_omega_coset(lvl.x, spec, omega_tol_)) {
        Divisor witness = engine_.find_secant_divisor(p, r, lvl.x);
        out.label = with_witness(BundleDescriptor::decomposable(r, lvl.x), std::move(witness),
                                 SecantCount::Unique);
        return out;
    }

    const EPoint omega = snap_to_omega(lvl.x, spec);
    SecantCount count;
    try {
        count = engine_.count_r_secants(p, omega);
    } catch (const NumericFailure& err) {
        out.ambiguous = true;
        out.note = err.what();
        out.candidates = {with_witness(BundleDescriptor::indecomposable_omega(omega), {}, {}),
                          with_witness(BundleDescriptor::decomposable(r, omega), {}, {})};
        return out;
    }
    Divisor witness = engine_.find_secant_divisor(p, r, omega);
    if (count == SecantCount::Unique) {
        out.label = with_witness(BundleDescriptor::indecomposable_omega(omega), std::move(witness),
                                 SecantCount::Unique);
    } else {
        out.label = with_witness(BundleDescriptor::decomposable(r, omega), std::move(witness),
                                 SecantCount::Pencil);
    }
    return out;
}

Classification LeafClassifier::classify(const std::vector<Complex>& p) const {
    const CurveSpec& spec = frame_.spec();
    const int n = spec.n;
    const int r = spec.half();
    Classification out;

    // (i) the curve itself: rank tests are ill-conditioned exactly on E, so
    // the chordal distance decides first.
    const auto [curve_dist, curve_x] = frame_.curve_distance(p);
    if (curve_dist < engine_.curve_membership_tol()) {
        out.residual = curve_dist;
        out.label = with_witness(BundleDescriptor::decomposable(1, curve_x),
                                 make_divisor({{curve_x, 1}}, spec), {});
        return out;
    }

    // (ii) minimal secant level
    MinimalLevel lvl;
    try {
        lvl = engine_.minimal_secant_level(p);
    } catch (const NumericFailure& err) {
        out.ambiguous = true;
        out.note = err.what();
        return out;
    }

    // (iii) odd n, off Sec_r
    if (lvl.top_stratum) {
        out.label = with_witness(BundleDescriptor::indecomposable_odd(), {}, {});
        return out;
    }
    if (lvl.ambiguous) {
        out.ambiguous = true;
        out.note = "rank gap rule failed near the accepted stratum";
        out.residual = lvl.defect;
        out.candidates = {with_witness(BundleDescriptor::decomposable(lvl.d, lvl.x), {}, {})};
        if (lvl.d > 1)
            out.candidates.push_back(
                with_witness(BundleDescriptor::decomposable(lvl.d - 1, lvl.x), {}, {}));
        return out;
    }

    // (iv) decomposable strata below the half degree
    if (lvl.d < r || !spec.is_even()) {
        out.residual = lvl.defect;
        std::optional<Divisor> witness;
        try {
            witness = engine_.find_secant_divisor(p, lvl.d, lvl.x);
        } catch (const NumericFailure& err) {
            out.ambiguous = true;
            out.note = std::string("witness recovery failed: ") + err.what();
            out.candidates = {with_witness(BundleDescriptor::decomposable(lvl.d, lvl.x), {}, {})};
            return out;
        }
        out.label = with_witness(BundleDescriptor::decomposable(lvl.d, lvl.x), std::move(witness),
                                 n >= 2 * lvl.d + 1 ? std::optional<SecantCount>{SecantCount::Unique}
                                                    : std::nullopt);
        return out;
    }

    // (v) even n at the half degree: omega coset splits unique vs pencil
    return classify_at_half_degree(p, lvl);
}

std::vector<Complex> LeafClassifier::sample_leaf(const BundleDescriptor& b, Rng& rng) const {
    const CurveSpec& spec = frame_.spec();
    b.validate(spec);
    const int r = spec.half();

    switch (b.variant) {
        case BundleVariant::DecomposableSum: {
            const bool vertex_leaf = spec.is_even() && b.d == r && in_omega_coset(b.x, spec, omega_tol_);
            if (!vertex_leaf) return engine_.sample_partial_secant(b.d, b.x, b.d > 1, rng);
            // L_w + L_w: intersection point of the spans of two disjoint
            // divisors in E^[r]_w
            const EPoint omega = snap_to_omega(b.x, spec);
            for (int attempt = 0; attempt < 60; ++attempt) {
                const Divisor d1 = random_divisor_with_sum(r, omega, rng, spec);
                const Divisor d2 = random_divisor_with_sum(r, omega, rng, spec);
                if (!supports_disjoint(d1, d2, spec)) continue;
                const Subspace meet = engine_.intersect_spans(d1, d2);
                if (meet.dim() != 1) continue;
                const auto p = meet.basis.column(0);
                if (frame_.curve_distance(p).first < engine_.curve_membership_tol()) continue;
                bool lower = false;
                for (int lev = 2; lev < r && !lower; ++lev)
                    lower = engine_.probe_level(p, lev).accepted;
                if (lower) continue;
                try {
                    if (engine_.count_r_secants(p, omega) == SecantCount::Pencil) return p;
                } catch (const Error&) {
                    continue;
                }
            }
            throw RejectionBudgetExhausted("sample_leaf: vertex-leaf construction kept failing");
        }
        case BundleVariant::IndecomposableOdd: {
            for (int attempt = 0; attempt < 200; ++attempt) {
                const auto p = normalized(rng.normal_vector(frame_.n()));
                const MinimalLevel lvl = engine_.minimal_secant_level(p);
                if (lvl.top_stratum) return p;
            }
            throw RejectionBudgetExhausted("sample_leaf: could not sample the top stratum");
        }
        case BundleVariant::IndecomposableOmega: {
            const EPoint omega = snap_to_omega(b.x, spec);
            for (int attempt = 0; attempt < 60; ++attempt) {
                const auto p = engine_.sample_partial_secant(r, omega, true, rng);
                try {
                    if (engine_.count_r_secants(p, omega) == SecantCount::Unique) return p;
                } catch (const Error&) {
                    continue;
                }
            }
            throw RejectionBudgetExhausted("sample_leaf: unique-secant sampling kept failing");
        }
    }
    throw BadInput("sample_leaf: unknown bundle variant");
}

LeafClassifier::ConsistencyRecord LeafClassifier::consistency_check(const std::vector<Complex>& p,
                                                                    const PoissonMatrix& omega) const {
    ConsistencyRecord record;
    record.classification = classify(p);
    record.rank = poisson_rank(omega, p, frame_.spec());
    record.ambiguous = record.classification.ambiguous || record.rank.ambiguous;
    if (!record.classification.ambiguous) {
        record.expected_rank = leaf_dim(record.classification.label.bundle, frame_.spec());
        record.match = record.expected_rank == record.rank.rank;
    }
    return record;
}

}  // namespace leafscope
