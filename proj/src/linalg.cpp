#include "leafscope/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace leafscope {

Matrix Matrix::from_columns(const std::vector<std::vector<Complex>>& cols) {
    if (cols.empty()) return Matrix();
    Matrix m(cols[0].size(), cols.size());
    for (std::size_t j = 0; j < cols.size(); ++j)
        for (std::size_t i = 0; i < m.rows_; ++i) m(i, j) = cols[j][i];
    return m;
}

Matrix Matrix::from_rows(const std::vector<std::vector<Complex>>& rows) {
    if (rows.empty()) return Matrix();
    Matrix m(rows.size(), rows[0].size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < m.cols_; ++j) m(i, j) = rows[i][j];
    return m;
}

std::vector<Complex> Matrix::column(std::size_t j) const {
    std::vector<Complex> v(rows_);
    for (std::size_t i = 0; i < rows_; ++i) v[i] = (*this)(i, j);
    return v;
}

std::vector<Complex> Matrix::row(std::size_t i) const {
    std::vector<Complex> v(cols_);
    for (std::size_t j = 0; j < cols_; ++j) v[j] = (*this)(i, j);
    return v;
}

void Matrix::set_column(std::size_t j, const std::vector<Complex>& v) {
    for (std::size_t i = 0; i < rows_; ++i) (*this)(i, j) = v[i];
}

Matrix Matrix::adjoint() const {
    Matrix m(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j) m(j, i) = std::conj((*this)(i, j));
    return m;
}

Matrix Matrix::transpose() const {
    Matrix m(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j) m(j, i) = (*this)(i, j);
    return m;
}

Matrix Matrix::operator*(const Matrix& rhs) const {
    Matrix m(rows_, rhs.cols_);
    for (std::size_t i = 0; i < rows_; ++i) {
        for (std::size_t k = 0; k < cols_; ++k) {
            const Complex a = (*this)(i, k);
            if (a == Complex{}) continue;
            for (std::size_t j = 0; j < rhs.cols_; ++j) m(i, j) += a * rhs(k, j);
        }
    }
    return m;
}

std::vector<Complex> Matrix::operator*(const std::vector<Complex>& v) const {
    std::vector<Complex> out(rows_);
    for (std::size_t i = 0; i < rows_; ++i) {
        Complex s = 0;
        for (std::size_t j = 0; j < cols_; ++j) s += (*this)(i, j) * v[j];
        out[i] = s;
    }
    return out;
}

Matrix Matrix::scaled(Complex c) const {
    Matrix m = *this;
    for (auto& z : m.data_) z *= c;
    return m;
}

Matrix Matrix::hcat(const Matrix& rhs) const {
    if (empty()) return rhs;
    if (rhs.empty()) return *this;
    Matrix m(rows_, cols_ + rhs.cols_);
    for (std::size_t i = 0; i < rows_; ++i) {
        for (std::size_t j = 0; j < cols_; ++j) m(i, j) = (*this)(i, j);
        for (std::size_t j = 0; j < rhs.cols_; ++j) m(i, cols_ + j) = rhs(i, j);
    }
    return m;
}

double Matrix::frobenius() const {
    double s = 0;
    for (const auto& z : data_) s += std::norm(z);
    return std::sqrt(s);
}

namespace {

// One-sided Jacobi on the columns of a (m >= n assumed by caller).
SvdResult jacobi_svd_tall(Matrix a) {
    const std::size_t m = a.rows(), n = a.cols();
    Matrix v = Matrix::identity(n);
    const double eps = std::numeric_limits<double>::epsilon();
    const int max_sweeps = 60;

    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        std::size_t rotated = 0;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                double app = 0, aqq = 0;
                Complex apq = 0;
                for (std::size_t i = 0; i < m; ++i) {
                    const Complex cp = a(i, p), cq = a(i, q);
                    app += std::norm(cp);
                    aqq += std::norm(cq);
                    apq += std::conj(cp) * cq;
                }
                const double mag = std::abs(apq);
                if (mag <= 1e2 * eps * std::sqrt(app * aqq) || mag == 0.0) continue;
                ++rotated;
                const Complex phase = std::conj(apq) / mag;  // makes the Gram entry real
                const double zeta = (aqq - app) / (2.0 * mag);
                const double t = (zeta >= 0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;
                for (std::size_t i = 0; i < m; ++i) {
                    const Complex cp = a(i, p);
                    const Complex cq = phase * a(i, q);  // make the Gram entry real
                    a(i, p) = c * cp - s * cq;
                    a(i, q) = s * cp + c * cq;
                }
                for (std::size_t i = 0; i < n; ++i) {
                    const Complex vp = v(i, p);
                    const Complex vq = phase * v(i, q);
                    v(i, p) = c * vp - s * vq;
                    v(i, q) = s * vp + c * vq;
                }
            }
        }
        if (rotated == 0) break;
    }

    std::vector<double> sig(n);
    for (std::size_t j = 0; j < n; ++j) {
        double s = 0;
        for (std::size_t i = 0; i < m; ++i) s += std::norm(a(i, j));
        sig[j] = std::sqrt(s);
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return sig[x] > sig[y]; });

    SvdResult out;
    out.s.resize(n);
    out.u = Matrix(m, n);
    out.v = Matrix(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        const std::size_t src = order[j];
        out.s[j] = sig[src];
        const double inv = sig[src] > 0 ? 1.0 / sig[src] : 0.0;
        for (std::size_t i = 0; i < m; ++i) out.u(i, j) = a(i, src) * inv;
        for (std::size_t i = 0; i < n; ++i) out.v(i, j) = v(i, src);
    }
    return out;
}

}  // namespace

SvdResult svd(const Matrix& a) {
    if (a.empty()) return {};
    if (a.rows() >= a.cols()) return jacobi_svd_tall(a);
    SvdResult t = jacobi_svd_tall(a.adjoint());
    SvdResult out;
    out.u = std::move(t.v);
    out.v = std::move(t.u);
    out.s = std::move(t.s);
    return out;
}

std::vector<double> singular_values(const Matrix& a) { return svd(a).s; }

RankDecision decide_rank(const std::vector<double>& sigma, double rel_tol) {
    RankDecision d;
    if (sigma.empty()) return d;
    const double s0 = sigma[0];
    if (s0 == 0.0) return d;  // zero matrix: rank 0, unambiguous
    std::size_t r = 0;
    while (r < sigma.size() && sigma[r] > rel_tol * s0) ++r;
    d.rank = r;
    if (r == sigma.size()) {
        d.gap = std::numeric_limits<double>::infinity();
        d.defect = 0.0;
        return d;
    }
    d.defect = sigma[r] / s0;
    if (r == 0) {
        d.gap = std::numeric_limits<double>::infinity();
        d.ambiguous = sigma[r] > rel_tol * s0;  // cannot happen; kept for clarity
        return d;
    }
    d.gap = sigma[r] > 0 ? sigma[r - 1] / sigma[r] : std::numeric_limits<double>::infinity();
    d.ambiguous = d.gap < kRankGapRule;
    return d;
}

Matrix null_space(const Matrix& a, double rel_tol) {
    SvdResult fac = svd(a);
    const std::size_t k = fac.s.size();
    const double s0 = k ? fac.s[0] : 0.0;
    std::size_t r = 0;
    while (r < k && fac.s[r] > rel_tol * s0) ++r;
    const std::size_t n = a.cols();
    Matrix out(n, n - r);
    // Trailing right singular vectors plus, when rows < cols, the full
    // orthogonal complement that the thin factorization does not reach.
    std::size_t col = 0;
    for (std::size_t j = r; j < k; ++j, ++col)
        for (std::size_t i = 0; i < n; ++i) out(i, col) = fac.v(i, j);
    if (k < n) {
        // Complete the basis: orthogonalize random-ish unit vectors against V.
        Matrix full = fac.v;
        for (std::size_t e = 0; e < n && col < n - r; ++e) {
            std::vector<Complex> cand(n, 0.0);
            cand[e] = 1.0;
            for (std::size_t j = 0; j < full.cols(); ++j) {
                const auto basis_col = full.column(j);
                const Complex proj = dot_h(basis_col, cand);
                for (std::size_t i = 0; i < n; ++i) cand[i] -= proj * basis_col[i];
            }
            const double nrm = norm2(cand);
            if (nrm < 1e-8) continue;
            for (auto& z : cand) z /= nrm;
            out.set_column(col++, cand);
            full = full.hcat(Matrix::from_columns({cand}));
        }
    }
    return out;
}

Matrix orthonormal_range(const Matrix& a, double rel_tol) {
    SvdResult fac = svd(a);
    const double s0 = fac.s.empty() ? 0.0 : fac.s[0];
    std::size_t r = 0;
    while (r < fac.s.size() && fac.s[r] > rel_tol * s0 && fac.s[r] > 0) ++r;
    Matrix out(a.rows(), r);
    for (std::size_t j = 0; j < r; ++j)
        for (std::size_t i = 0; i < a.rows(); ++i) out(i, j) = fac.u(i, j);
    return out;
}

std::vector<Complex> least_squares(const SvdResult& fac, const std::vector<Complex>& b, double rel_tol) {
    const std::size_t k = fac.s.size();
    const double s0 = k ? fac.s[0] : 0.0;
    std::vector<Complex> y(k, 0.0);
    for (std::size_t j = 0; j < k; ++j) {
        if (fac.s[j] <= rel_tol * s0 || fac.s[j] == 0.0) break;
        Complex uhb = 0;
        for (std::size_t i = 0; i < fac.u.rows(); ++i) uhb += std::conj(fac.u(i, j)) * b[i];
        y[j] = uhb / fac.s[j];
    }
    std::vector<Complex> x(fac.v.rows(), 0.0);
    for (std::size_t i = 0; i < fac.v.rows(); ++i) {
        Complex s = 0;
        for (std::size_t j = 0; j < k; ++j) s += fac.v(i, j) * y[j];
        x[i] = s;
    }
    return x;
}

Matrix pseudo_inverse(const SvdResult& fac, double rel_tol) {
    const std::size_t k = fac.s.size();
    const double s0 = k ? fac.s[0] : 0.0;
    Matrix vs(fac.v.rows(), k);
    for (std::size_t j = 0; j < k; ++j) {
        const double inv = (fac.s[j] > rel_tol * s0 && fac.s[j] > 0) ? 1.0 / fac.s[j] : 0.0;
        for (std::size_t i = 0; i < fac.v.rows(); ++i) vs(i, j) = fac.v(i, j) * inv;
    }
    return vs * fac.u.adjoint();
}

Complex determinant(Matrix a) {
    const std::size_t n = a.rows();
    Complex det = 1.0;
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        double best = std::abs(a(k, k));
        for (std::size_t i = k + 1; i < n; ++i) {
            if (std::abs(a(i, k)) > best) {
                best = std::abs(a(i, k));
                piv = i;
            }
        }
        if (best == 0.0) return 0.0;
        if (piv != k) {
            for (std::size_t j = k; j < n; ++j) std::swap(a(k, j), a(piv, j));
            det = -det;
        }
        det *= a(k, k);
        for (std::size_t i = k + 1; i < n; ++i) {
            const Complex f = a(i, k) / a(k, k);
            for (std::size_t j = k; j < n; ++j) a(i, j) -= f * a(k, j);
        }
    }
    return det;
}

std::vector<Complex> solve_square(Matrix a, std::vector<Complex> b) {
    const std::size_t n = a.rows();
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        double best = std::abs(a(k, k));
        for (std::size_t i = k + 1; i < n; ++i) {
            if (std::abs(a(i, k)) > best) {
                best = std::abs(a(i, k));
                piv = i;
            }
        }
        if (best < 1e-300) throw NumericFailure("solve_square: singular matrix");
        if (piv != k) {
            for (std::size_t j = k; j < n; ++j) std::swap(a(k, j), a(piv, j));
            std::swap(b[k], b[piv]);
        }
        for (std::size_t i = k + 1; i < n; ++i) {
            const Complex f = a(i, k) / a(k, k);
            for (std::size_t j = k; j < n; ++j) a(i, j) -= f * a(k, j);
            b[i] -= f * b[k];
        }
    }
    std::vector<Complex> x(n);
    for (std::size_t i = n; i-- > 0;) {
        Complex s = b[i];
        for (std::size_t j = i + 1; j < n; ++j) s -= a(i, j) * x[j];
        x[i] = s / a(i, i);
    }
    return x;
}

std::vector<Complex> polynomial_roots(const std::vector<Complex>& coeffs) {
    std::size_t deg = coeffs.size();
    while (deg > 0 && std::abs(coeffs[deg - 1]) == 0.0) --deg;
    if (deg <= 1) return {};
    --deg;  // actual degree
    std::vector<Complex> c(coeffs.begin(), coeffs.begin() + deg + 1);
    const Complex lead = c[deg];
    for (auto& z : c) z /= lead;

    std::vector<Complex> roots(deg);
    Complex seed{0.4, 0.9};
    Complex w = 1.0;
    for (std::size_t i = 0; i < deg; ++i) {
        w *= seed;
        roots[i] = w;
    }
    auto eval = [&](Complex z) {
        Complex r = 0;
        for (std::size_t i = deg + 1; i-- > 0;) r = r * z + c[i];
        return r;
    };
    for (int iter = 0; iter < 600; ++iter) {
        double moved = 0;
        for (std::size_t i = 0; i < deg; ++i) {
            Complex denom = 1.0;
            for (std::size_t j = 0; j < deg; ++j)
                if (j != i) denom *= roots[i] - roots[j];
            if (std::abs(denom) < 1e-300) denom = 1e-300;
            const Complex delta = eval(roots[i]) / denom;
            roots[i] -= delta;
            moved = std::max(moved, std::abs(delta));
        }
        if (moved < 1e-14) break;
    }
    return roots;
}

bool Subspace::contains(const std::vector<Complex>& v, double tol) const {
    return distance_to(v) <= tol;
}

double Subspace::distance_to(const std::vector<Complex>& v) const {
    const double nv = norm2(v);
    if (nv == 0.0) return 0.0;
    std::vector<Complex> res = v;
    for (std::size_t j = 0; j < basis.cols(); ++j) {
        const auto col = basis.column(j);
        const Complex proj = dot_h(col, res);
        for (std::size_t i = 0; i < res.size(); ++i) res[i] -= proj * col[i];
    }
    return norm2(res) / nv;
}

Subspace subspace_from_span(std::size_t ambient, const std::vector<std::vector<Complex>>& vectors,
                            double rel_tol) {
    Subspace s;
    s.ambient_dim = ambient;
    if (vectors.empty()) {
        s.basis = Matrix(ambient, 0);
        return s;
    }
    s.basis = orthonormal_range(Matrix::from_columns(vectors), rel_tol);
    return s;
}

Subspace subspace_join(const Subspace& a, const Subspace& b, double rel_tol) {
    Subspace s;
    s.ambient_dim = a.ambient_dim;
    s.basis = orthonormal_range(a.basis.hcat(b.basis), rel_tol);
    return s;
}

Subspace subspace_meet(const Subspace& a, const Subspace& b, double angle_tol) {
    Subspace s;
    s.ambient_dim = a.ambient_dim;
    if (a.dim() == 0 || b.dim() == 0) {
        s.basis = Matrix(a.ambient_dim, 0);
        return s;
    }
    // Left singular vectors of [Qa Qb]: sigma^2 = 1 + cos(theta_i), so the
    // intersection directions are the eigenvectors near sigma^2 = 2.  These
    // come out accurate to machine precision (no sqrt amplification), unlike
    // the matched principal-vector pairs.
    const SvdResult fac = svd(a.basis.hcat(b.basis));
    std::vector<std::vector<Complex>> kept;
    for (std::size_t j = 0; j < fac.s.size(); ++j) {
        const double cos_theta = fac.s[j] * fac.s[j] - 1.0;
        if (cos_theta >= 1.0 - angle_tol) {
            std::vector<Complex> dir(a.ambient_dim);
            for (std::size_t i = 0; i < a.ambient_dim; ++i) dir[i] = fac.u(i, j);
            kept.push_back(std::move(dir));
        }
    }
    if (kept.empty()) {
        s.basis = Matrix(a.ambient_dim, 0);
        return s;
    }
    s.basis = orthonormal_range(Matrix::from_columns(kept), 1e-12);
    return s;
}

double subspace_distance(const Subspace& a, const Subspace& b) {
    if (a.dim() != b.dim()) return 1.0;
    if (a.dim() == 0) return 0.0;
    // sin(theta_max) = ||P_a - P_b||_2; the projector difference is O(theta)
    // entrywise, so small angles are resolved to machine precision (the
    // principal-cosine route loses half the digits to sqrt(1 - cos^2)).
    const std::size_t n = a.ambient_dim;
    Matrix diff(n, n);
    auto add_projector = [&](const Matrix& q, double sign) {
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                Complex acc = 0;
                for (std::size_t k = 0; k < q.cols(); ++k) acc += q(i, k) * std::conj(q(j, k));
                diff(i, j) += sign * acc;
            }
    };
    add_projector(a.basis, 1.0);
    add_projector(b.basis, -1.0);
    const auto sig = singular_values(diff);
    return sig.empty() ? 0.0 : std::min(1.0, sig[0]);
}

}  // namespace leafscope
