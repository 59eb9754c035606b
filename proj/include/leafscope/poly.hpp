#pragma once

#include <array>
#include <map>

#include "leafscope/common.hpp"

namespace leafscope {

// Exponent multi-index packed big-endian, one byte per variable, so that
// integer comparison is lexicographic on exponents.  At most 8 variables,
// which covers the documented range n <= 8.
using MonoKey = std::uint64_t;

inline constexpr int kMaxPolyVars = 8;

MonoKey mono_pack(const std::array<int, kMaxPolyVars>& exps);
std::array<int, kMaxPolyVars> mono_unpack(MonoKey key);
int mono_exponent(MonoKey key, int var);
int mono_degree(MonoKey key, int num_vars);

// Homogeneous polynomial over C with sparse complex coefficients.
class PolynomialForm {
public:
    PolynomialForm() = default;
    PolynomialForm(int num_vars, int degree) : num_vars_(num_vars), degree_(degree) {
        if (num_vars < 1 || num_vars > kMaxPolyVars) throw BadInput("PolynomialForm: bad variable count");
    }

    static PolynomialForm linear(const std::vector<Complex>& coeffs);

    int num_vars() const { return num_vars_; }
    int degree() const { return degree_; }
    const std::map<MonoKey, Complex>& coeffs() const { return coeffs_; }
    bool is_zero() const { return coeffs_.empty(); }

    void set(MonoKey key, Complex value);
    void add_term(MonoKey key, Complex value);

    PolynomialForm operator+(const PolynomialForm& rhs) const;
    PolynomialForm operator-(const PolynomialForm& rhs) const;
    PolynomialForm operator*(const PolynomialForm& rhs) const;
    PolynomialForm scaled(Complex c) const;
    PolynomialForm derivative(int var) const;  // degree drops by one

    Complex eval(const std::vector<Complex>& p) const;
    double coeff_norm() const;        // 2-norm of coefficients
    double coeff_max() const;         // max magnitude
    void prune(double abs_threshold);
    // Scales so the largest-magnitude coefficient becomes exactly 1 (zero
    // phase); returns the factor that was multiplied in.
    Complex normalize_largest();

private:
    int num_vars_ = 0;
    int degree_ = 0;
    std::map<MonoKey, Complex> coeffs_;
};

// All exponent keys of the given total degree, in increasing key order.
std::vector<MonoKey> monomials_of_degree(int num_vars, int degree);

std::vector<Complex> to_dense(const PolynomialForm& p, const std::vector<MonoKey>& basis);
PolynomialForm from_dense(const std::vector<Complex>& dense, const std::vector<MonoKey>& basis,
                          int num_vars, int degree, double drop_threshold);

// Values of every degree-`degree` monomial at p, in monomials_of_degree order.
std::vector<Complex> monomial_values(const std::vector<Complex>& p, int degree,
                                     const std::vector<MonoKey>& basis);

}  // namespace leafscope
