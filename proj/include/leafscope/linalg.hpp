#pragma once

#include <cstddef>
#include <initializer_list>

#include "leafscope/common.hpp"

namespace leafscope {

// Dense row-major complex matrix.  Sized for the problems in this library
// (a few thousand rows at most), so everything is plain loops + Jacobi SVD.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }
    static Matrix from_columns(const std::vector<std::vector<Complex>>& cols);
    static Matrix from_rows(const std::vector<std::vector<Complex>>& rows);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool empty() const { return rows_ == 0 || cols_ == 0; }

    Complex& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    const Complex& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::vector<Complex> column(std::size_t j) const;
    std::vector<Complex> row(std::size_t i) const;
    void set_column(std::size_t j, const std::vector<Complex>& v);

    Matrix adjoint() const;    // conjugate transpose
    Matrix transpose() const;  // plain transpose
    Matrix operator*(const Matrix& rhs) const;
    std::vector<Complex> operator*(const std::vector<Complex>& v) const;
    Matrix scaled(Complex c) const;
    Matrix hcat(const Matrix& rhs) const;
    double frobenius() const;

private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<Complex> data_;
};

struct SvdResult {
    Matrix u;                // m x k, orthonormal columns for nonzero singular values
    std::vector<double> s;   // k = min(m, n), descending
    Matrix v;                // n x k, orthonormal columns
};

// One-sided Jacobi SVD.  Right singular vectors (and hence null spaces) are
// reliable for zero singular values as well.
SvdResult svd(const Matrix& a);

std::vector<double> singular_values(const Matrix& a);

// Verdict of a rank decision under the relative threshold `rel_tol` plus the
// gap rule: the kept/dropped singular-value ratio must exceed kRankGapRule,
// otherwise the decision is marked ambiguous.
struct RankDecision {
    std::size_t rank = 0;
    bool ambiguous = false;
    double gap = 0.0;        // sigma_rank-1 / sigma_rank (inf when clean)
    double defect = 0.0;     // sigma_rank / sigma_0, 0 when full rank
};

RankDecision decide_rank(const std::vector<double>& sigma, double rel_tol);

// Columns of V spanning {x : Ax ~ 0} at the given relative threshold.
Matrix null_space(const Matrix& a, double rel_tol);

// Orthonormal basis of the column span (columns with sigma > rel_tol * s0).
Matrix orthonormal_range(const Matrix& a, double rel_tol);

// Minimum-norm least-squares solution via the SVD pseudo-inverse.
std::vector<Complex> least_squares(const SvdResult& fac, const std::vector<Complex>& b, double rel_tol);

// Explicit pseudo-inverse (n x m); worthwhile when many right-hand sides
// share one factorization.
Matrix pseudo_inverse(const SvdResult& fac, double rel_tol);

Complex determinant(Matrix a);  // LU with partial pivoting; a is consumed

// Solves a small square system in place; throws NumericFailure when singular.
std::vector<Complex> solve_square(Matrix a, std::vector<Complex> b);

// All roots of c[0] + c[1] z + ... + c[deg] z^deg by Durand-Kerner.
std::vector<Complex> polynomial_roots(const std::vector<Complex>& coeffs);

inline double norm2(const std::vector<Complex>& v) {
    double s = 0;
    for (const auto& z : v) s += std::norm(z);
    return std::sqrt(s);
}

inline Complex dot_u(const std::vector<Complex>& a, const std::vector<Complex>& b) {
    Complex s = 0;  // unconjugated pairing sum a_i b_i
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline Complex dot_h(const std::vector<Complex>& a, const std::vector<Complex>& b) {
    Complex s = 0;  // Hermitian pairing sum conj(a_i) b_i
    for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
    return s;
}

// A linear subspace of C^ambient_dim held as orthonormal column vectors.
struct Subspace {
    std::size_t ambient_dim = 0;
    Matrix basis;  // ambient_dim x dim, orthonormal columns

    std::size_t dim() const { return basis.cols(); }
    bool contains(const std::vector<Complex>& v, double tol) const;
    double distance_to(const std::vector<Complex>& v) const;  // relative residual of v off the span
};

Subspace subspace_from_span(std::size_t ambient, const std::vector<std::vector<Complex>>& vectors,
                            double rel_tol);

// Smallest subspace containing both (le:fisher-style join).
Subspace subspace_join(const Subspace& a, const Subspace& b, double rel_tol);

// Numerical intersection via principal angles: directions with cos(theta)
// within angle_tol of 1.
Subspace subspace_meet(const Subspace& a, const Subspace& b, double angle_tol);

// max_i |sin(theta_i)| over principal angles; 0 iff the spaces are equal.
double subspace_distance(const Subspace& a, const Subspace& b);

}  // namespace leafscope
