#include "leafscope/poly.hpp"

#include <algorithm>
#include <cmath>

namespace leafscope {

MonoKey mono_pack(const std::array<int, kMaxPolyVars>& exps) {
    MonoKey key = 0;
    for (int v = 0; v < kMaxPolyVars; ++v) {
        if (exps[v] < 0 || exps[v] > 255) throw BadInput("mono_pack: exponent out of range");
        key = (key << 8) | static_cast<MonoKey>(exps[v]);
    }
    return key;
}

std::array<int, kMaxPolyVars> mono_unpack(MonoKey key) {
    std::array<int, kMaxPolyVars> exps{};
    for (int v = kMaxPolyVars - 1; v >= 0; --v) {
        exps[v] = static_cast<int>(key & 0xff);
        key >>= 8;
    }
    return exps;
}

int mono_exponent(MonoKey key, int var) {
    return static_cast<int>((key >> (8 * (kMaxPolyVars - 1 - var))) & 0xff);
}

int mono_degree(MonoKey key, int num_vars) {
    int d = 0;
    for (int v = 0; v < num_vars; ++v) d += mono_exponent(key, v);
    return d;
}

PolynomialForm PolynomialForm::linear(const std::vector<Complex>& coeffs) {
    PolynomialForm p(static_cast<int>(coeffs.size()), 1);
    std::array<int, kMaxPolyVars> e{};
    for (std::size_t v = 0; v < coeffs.size(); ++v) {
        if (coeffs[v] == Complex{}) continue;
        e.fill(0);
        e[v] = 1;
        p.coeffs_[mono_pack(e)] = coeffs[v];
    }
    return p;
}

void PolynomialForm::set(MonoKey key, Complex value) {
    if (value == Complex{})
        coeffs_.erase(key);
    else
        coeffs_[key] = value;
}

void PolynomialForm::add_term(MonoKey key, Complex value) {
    auto it = coeffs_.find(key);
    if (it == coeffs_.end()) {
        if (value != Complex{}) coeffs_.emplace(key, value);
    } else {
        it->second += value;
        if (it->second == Complex{}) coeffs_.erase(it);
    }
}

PolynomialForm PolynomialForm::operator+(const PolynomialForm& rhs) const {
    if (num_vars_ != rhs.num_vars_ || degree_ != rhs.degree_)
        throw BadInput("PolynomialForm: degree/variable mismatch in +");
    PolynomialForm out = *this;
    for (const auto& [key, c] : rhs.coeffs_) out.add_term(key, c);
    return out;
}

PolynomialForm PolynomialForm::operator-(const PolynomialForm& rhs) const {
    return *this + rhs.scaled(-1.0);
}

PolynomialForm PolynomialForm::operator*(const PolynomialForm& rhs) const {
    if (num_vars_ != rhs.num_vars_) throw BadInput("PolynomialForm: variable mismatch in *");
    PolynomialForm out(num_vars_, degree_ + rhs.degree_);
    for (const auto& [ka, ca] : coeffs_)
        for (const auto& [kb, cb] : rhs.coeffs_) out.add_term(ka + kb, ca * cb);
    return out;
}

PolynomialForm PolynomialForm::scaled(Complex c) const {
    PolynomialForm out(num_vars_, degree_);
    if (c == Complex{}) return out;
    for (const auto& [key, v] : coeffs_) out.coeffs_[key] = v * c;
    return out;
}

PolynomialForm PolynomialForm::derivative(int var) const {
    PolynomialForm out(num_vars_, std::max(0, degree_ - 1));
    std::array<int, kMaxPolyVars> e{};
    for (const auto& [key, c] : coeffs_) {
        e = mono_unpack(key);
        if (e[var] == 0) continue;
        const double mult = e[var];
        e[var] -= 1;
        out.add_term(mono_pack(e), c * mult);
    }
    return out;
}

Complex PolynomialForm::eval(const std::vector<Complex>& p) const {
    // power tables per variable up to the form's degree
    std::array<std::array<Complex, 32>, kMaxPolyVars> pow{};
    for (int v = 0; v < num_vars_; ++v) {
        pow[v][0] = 1.0;
        for (int e = 1; e <= degree_ && e < 32; ++e) pow[v][e] = pow[v][e - 1] * p[v];
    }
    Complex acc = 0;
    for (const auto& [key, c] : coeffs_) {
        Complex m = c;
        for (int v = 0; v < num_vars_; ++v) {
            const int e = mono_exponent(key, v);
            if (e) m *= pow[v][e];
        }
        acc += m;
    }
    return acc;
}

double PolynomialForm::coeff_norm() const {
    double s = 0;
    for (const auto& [key, c] : coeffs_) s += std::norm(c);
    return std::sqrt(s);
}

double PolynomialForm::coeff_max() const {
    double m = 0;
    for (const auto& [key, c] : coeffs_) m = std::max(m, std::abs(c));
    return m;
}

void PolynomialForm::prune(double abs_threshold) {
    for (auto it = coeffs_.begin(); it != coeffs_.end();) {
        if (std::abs(it->second) <= abs_threshold)
            it = coeffs_.erase(it);
        else
            ++it;
    }
}

Complex PolynomialForm::normalize_largest() {
    double best = 0;
    Complex best_c = 1.0;
    for (const auto& [key, c] : coeffs_) {
        if (std::abs(c) > best) {
            best = std::abs(c);
            best_c = c;
        }
    }
    if (best == 0) return 1.0;
    const Complex factor = 1.0 / best_c;
    for (auto& [key, c] : coeffs_) c *= factor;
    return factor;
}

namespace {
void enumerate(int num_vars, int var, int remaining, std::array<int, kMaxPolyVars>& e,
               std::vector<MonoKey>& out) {
    if (var == num_vars - 1) {
        e[var] = remaining;
        out.push_back(mono_pack(e));
        e[var] = 0;
        return;
    }
    for (int take = remaining; take >= 0; --take) {
        e[var] = take;
        enumerate(num_vars, var + 1, remaining - take, e, out);
    }
    e[var] = 0;
}
}  // namespace

std::vector<MonoKey> monomials_of_degree(int num_vars, int degree) {
    std::vector<MonoKey> out;
    std::array<int, kMaxPolyVars> e{};
    enumerate(num_vars, 0, degree, e, out);
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<Complex> to_dense(const PolynomialForm& p, const std::vector<MonoKey>& basis) {
    std::vector<Complex> out(basis.size(), Complex{});
    for (std::size_t i = 0; i < basis.size(); ++i) {
        auto it = p.coeffs().find(basis[i]);
        if (it != p.coeffs().end()) out[i] = it->second;
    }
    return out;
}

PolynomialForm from_dense(const std::vector<Complex>& dense, const std::vector<MonoKey>& basis,
                          int num_vars, int degree, double drop_threshold) {
    PolynomialForm p(num_vars, degree);
    for (std::size_t i = 0; i < basis.size(); ++i)
        if (std::abs(dense[i]) > drop_threshold) p.set(basis[i], dense[i]);
    return p;
}

std::vector<Complex> monomial_values(const std::vector<Complex>& p, int degree,
                                     const std::vector<MonoKey>& basis) {
    std::array<std::array<Complex, 32>, kMaxPolyVars> pow{};
    const int nv = static_cast<int>(p.size());
    for (int v = 0; v < nv; ++v) {
        pow[v][0] = 1.0;
        for (int e = 1; e <= degree && e < 32; ++e) pow[v][e] = pow[v][e - 1] * p[v];
    }
    std::vector<Complex> out(basis.size());
    for (std::size_t i = 0; i < basis.size(); ++i) {
        Complex m = 1.0;
        for (int v = 0; v < nv; ++v) {
            const int e = mono_exponent(basis[i], v);
            if (e) m *= pow[v][e];
        }
        out[i] = m;
    }
    return out;
}

}  // namespace leafscope
