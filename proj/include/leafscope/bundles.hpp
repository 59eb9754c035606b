#pragma once

#include <optional>

#include "leafscope/secants.hpp"
#include "leafscope/torus.hpp"

namespace leafscope {

// The middle-term bundles with nonempty leaves:
//   DecomposableSum     E_{d,x} = O(D) + L(-D), deg D = d, sigma(D) = x
//                       (d = n/2 with x in the Omega coset encodes L_w + L_w)
//   IndecomposableOdd   E_o, the unique indecomposable for odd n
//   IndecomposableOmega E_w, the non-split self-extension of L_w (even n)
enum class BundleVariant { DecomposableSum, IndecomposableOdd, IndecomposableOmega };

struct BundleDescriptor {
    BundleVariant variant = BundleVariant::DecomposableSum;
    int d = 0;
    EPoint x{};  // sum parameter (DecomposableSum) or omega (IndecomposableOmega)

    static BundleDescriptor decomposable(int d, const EPoint& x) {
        return {BundleVariant::DecomposableSum, d, x};
    }
    static BundleDescriptor indecomposable_odd() { return {BundleVariant::IndecomposableOdd, 0, {}}; }
    static BundleDescriptor indecomposable_omega(const EPoint& w) {
        return {BundleVariant::IndecomposableOmega, 0, w};
    }

    void validate(const CurveSpec& spec) const;
};

struct LeafLabel {
    BundleDescriptor bundle;
    std::optional<Divisor> witness;  // secant divisor through the point
    std::optional<SecantCount> secant_count;
    int poisson_rank = -1;  // filled by consistency checks when available
};

// dim End(E); equals dim Aut(E) for every bundle with a nonempty leaf.
int end_dim(const BundleDescriptor& b, const CurveSpec& spec);
int aut_dim(const BundleDescriptor& b, const CurveSpec& spec);
// dim L(E) = n - dim Aut(E).
int leaf_dim(const BundleDescriptor& b, const CurveSpec& spec);

// Degree of the hypersurface PZ_E inside P Hom(O_E, E).
int pz_degree(const BundleDescriptor& b, const CurveSpec& spec);

// h^0(E(-x)) and h^0(E(-x-y)); h^0(E) = n throughout.
int h0_e_minus_x(const BundleDescriptor& b, const EPoint& x, const CurveSpec& spec);
int h0_e_minus_xy(const BundleDescriptor& b, const EPoint& x, const EPoint& y,
                  const CurveSpec& spec);

bool leaf_nonempty(const BundleDescriptor& b, const CurveSpec& spec);

struct LeafFamily {
    std::string name;
    BundleDescriptor representative;
    int param_dim = 0;  // continuous parameters (1 for an x-family, 0 discrete)
    int dim = 0;        // dimension of each leaf in the family
};

// The complete catalogue of leaf families for the curve.
std::vector<LeafFamily> enumerate_leaf_families(const CurveSpec& spec);

// Closure order on leaves derived from the secant-variety inclusions.
bool closure_contains(const BundleDescriptor& outer, const BundleDescriptor& inner,
                      const CurveSpec& spec);

// Descriptor equality; x-parameters compare modulo the lattice, and modulo
// the mirror x <-> l_sum - x only when 2d = n (where O(D) and L(-D) swap).
bool bundles_equal(const BundleDescriptor& a, const BundleDescriptor& b, const CurveSpec& spec,
                   double tol = 1e-5);

std::string bundle_display(const BundleDescriptor& b, const CurveSpec& spec);

}  // namespace leafscope
