#include "leafscope/bundles.hpp"

#include <cmath>
#include <sstream>

namespace leafscope {

namespace {

bool is_omega_parameter(const EPoint& x, const CurveSpec& spec, double tol) {
    return in_omega_coset(x, spec, tol);
}

// h^0 of a line bundle of degree e whose sum parameter is s, twisted down by
// the divisor with sum t and degree k (so degree e-k, sum s-t).
int h0_line_bundle(int deg, const EPoint& sum, const CurveSpec& spec) {
    if (deg < 0) return 0;
    if (deg == 0) return points_equal(sum, EPoint{}, spec) ? 1 : 0;
    return deg;
}

}  // namespace

void BundleDescriptor::validate(const CurveSpec& spec) const {
    switch (variant) {
        case BundleVariant::DecomposableSum:
            if (d < 1 || 2 * d > spec.n)
                throw BadInput("BundleDescriptor: decomposable sum needs 1 <= d <= n/2");
            break;
        case BundleVariant::IndecomposableOdd:
            if (spec.is_even()) throw BadInput("BundleDescriptor: E_o exists only for odd n");
            break;
        case BundleVariant::IndecomposableOmega:
            if (!spec.is_even()) throw BadInput("BundleDescriptor: E_omega exists only for even n");
            if (!is_omega_parameter(x, spec, spec.tol.lattice_tol * 10))
                throw BadInput("BundleDescriptor: omega must satisfy 2*omega = sigma(L)");
            break;
    }
}

int end_dim(const BundleDescriptor& b, const CurveSpec& spec) {
    const int n = spec.n;
    switch (b.variant) {
        case BundleVariant::IndecomposableOdd:
            return 1;  // End = C
        case BundleVariant::IndecomposableOmega:
            return 2;  // End = C[t]/(t^2)
        case BundleVariant::DecomposableSum: {
            if (2 * b.d == n && is_omega_parameter(b.x, spec, 1e-6)) return 4;  // GL(2) case
            return 2 + (n - 2 * b.d);
        }
    }
    return 0;
}

int aut_dim(const BundleDescriptor& b, const CurveSpec& spec) {
    // The automorphism groups G_m, G_a x G_m, (G_a^|deg split| x| G_m) x G_m
    // and GL(2) have the same dimensions as End for every relevant bundle.
    return end_dim(b, spec);
}

int leaf_dim(const BundleDescriptor& b, const CurveSpec& spec) { return spec.n - aut_dim(b, spec); }

int pz_degree(const BundleDescriptor& b, const CurveSpec& spec) {
    if (b.variant == BundleVariant::DecomposableSum && b.d == 1) return 2;
    if (spec.n == 4 && b.variant == BundleVariant::DecomposableSum && b.d == 2 &&
        is_omega_parameter(b.x, spec, 1e-6))
        return 2;
    return spec.n;
}

int h0_e_minus_x(const BundleDescriptor& b, const EPoint& x, const CurveSpec& spec) {
    const int n = spec.n;
    if (b.variant == BundleVariant::DecomposableSum && b.d == 1 && points_equal(b.x, x, spec))
        return n - 1;  // O(x) is a direct summand
    return n - 2;
}

int h0_e_minus_xy(const BundleDescriptor& b, const EPoint& x, const EPoint& y,
                  const CurveSpec& spec) {
    const int n = spec.n;
    const EPoint xy = add_points(x, y, spec);
    switch (b.variant) {
        case BundleVariant::DecomposableSum: {
            // summands O(D) (deg d, sum b.x) and L(-D) (deg n-d, sum l_sum - b.x)
            const EPoint mirror = sub_points(spec.l_sum, b.x, spec);
            const int h1 = h0_line_bundle(b.d - 2, sub_points(b.x, xy, spec), spec);
            const int h2 = h0_line_bundle(n - b.d - 2, sub_points(mirror, xy, spec), spec);
            return h1 + h2;
        }
        case BundleVariant::IndecomposableOdd:
            return n >= 5 ? n - 4 : 0;  // n = 3: semistable of negative degree
        case BundleVariant::IndecomposableOmega: {
            if (n == 4) return points_equal(xy, b.x, spec) ? 1 : 0;
            return n - 4;
        }
    }
    return 0;
}

bool leaf_nonempty(const BundleDescriptor& b, const CurveSpec& spec) {
    try {
        b.validate(spec);
    } catch (const BadInput&) {
        return false;
    }
    return true;
}

std::vector<LeafFamily> enumerate_leaf_families(const CurveSpec& spec) {
    std::vector<LeafFamily> out;
    const int r = spec.half();
    Rng rng(spec.tol.seed);
    const EPoint generic = reduce(Complex{0.31, 0.17} + 0.23 * spec.tau, spec);
    for (int d = 1; d <= r; ++d) {
        if (spec.is_even() && d == r) break;
        std::ostringstream name;
        name << "E_{" << d << ",x}";
        out.push_back({name.str(), BundleDescriptor::decomposable(d, generic), 1,
                       leaf_dim(BundleDescriptor::decomposable(d, generic), spec)});
    }
    if (spec.is_even()) {
        EPoint xoff = generic;
        if (is_omega_parameter(xoff, spec, 1e-6)) xoff = reduce(xoff.z + 0.11, spec);
        out.push_back({"E_{r,x} (x not in Omega)", BundleDescriptor::decomposable(r, xoff), 1,
                       leaf_dim(BundleDescriptor::decomposable(r, xoff), spec)});
        for (const EPoint& w : omega_coset(spec)) {
            const auto lw = BundleDescriptor::decomposable(r, w);
            out.push_back({"L_w+L_w", lw, 0, leaf_dim(lw, spec)});
        }
        for (const EPoint& w : omega_coset(spec)) {
            const auto ew = BundleDescriptor::indecomposable_omega(w);
            out.push_back({"E_w", ew, 0, leaf_dim(ew, spec)});
        }
    } else {
        const auto eo = BundleDescriptor::indecomposable_odd();
        out.push_back({"E_o", eo, 0, leaf_dim(eo, spec)});
    }
    return out;
}

bool bundles_equal(const BundleDescriptor& a, const BundleDescriptor& b, const CurveSpec& spec,
                   double tol) {
    if (a.variant != b.variant) return false;
    auto close = [&](const EPoint& p, const EPoint& q) { return lattice_distance(p, q, spec) <= tol; };
    switch (a.variant) {
        case BundleVariant::IndecomposableOdd:
            return true;
        case BundleVariant::IndecomposableOmega:
            return close(a.x, b.x);
        case BundleVariant::DecomposableSum: {
            if (a.d != b.d) return false;
            if (close(a.x, b.x)) return true;
            // O(D) and L(-D) swap at the half degree: x ~ l_sum - x
            if (2 * a.d == spec.n) return close(a.x, sub_points(spec.l_sum, b.x, spec));
            return false;
        }
    }
    return false;
}

bool closure_contains(const BundleDescriptor& outer, const BundleDescriptor& inner,
                      const CurveSpec& spec) {
    outer.validate(spec);
    inner.validate(spec);
    const int r = spec.half();

    if (bundles_equal(outer, inner, spec)) return true;

    // the top stratum for odd n contains every leaf
    if (outer.variant == BundleVariant::IndecomposableOdd) return true;
    if (inner.variant == BundleVariant::IndecomposableOdd) return false;

    const auto level = [&](const BundleDescriptor& b) {
        return b.variant == BundleVariant::IndecomposableOmega ? r : b.d;
    };

    if (outer.variant == BundleVariant::IndecomposableOmega) {
        // closure of L(E_w) is Sec_{r,w}: contains all strata below level r,
        // and at level r only the vertex leaf of the same omega
        if (level(inner) < r) return true;
        if (inner.variant == BundleVariant::DecomposableSum && inner.d == r)
            return lattice_distance(inner.x, outer.x, spec) < 1e-6 ||
                   lattice_distance(inner.x, sub_points(spec.l_sum, outer.x, spec), spec) < 1e-6;
        return false;  // a different E_w'
    }

    if (inner.variant == BundleVariant::IndecomposableOmega) return false;

    // both decomposable: strictly lower levels are in the closure
    return inner.d < outer.d;
}

std::string bundle_display(const BundleDescriptor& b, const CurveSpec& spec) {
    std::ostringstream out;
    switch (b.variant) {
        case BundleVariant::IndecomposableOdd:
            out << "E_o";
            break;
        case BundleVariant::IndecomposableOmega:
            out << "E_w[w=(" << b.x.z.real() << "," << b.x.z.imag() << ")]";
            break;
        case BundleVariant::DecomposableSum:
            if (2 * b.d == spec.n && in_omega_coset(b.x, spec, 1e-6))
                out << "L_w+L_w[w=(" << b.x.z.real() << "," << b.x.z.imag() << ")]";
            else
                out << "E_{" << b.d << ",(" << b.x.z.real() << "," << b.x.z.imag() << ")}";
            break;
    }
    return out.str();
}

}  // namespace leafscope
