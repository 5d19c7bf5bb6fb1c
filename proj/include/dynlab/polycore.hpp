#pragma once

// Small-integer number theory, dense complex polynomials and simultaneous
// root finding.

#include <complex>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace dynlab {

using Complex = std::complex<double>;

class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

class OverflowError : public std::overflow_error {
public:
    using std::overflow_error::overflow_error;
};

/// Raised when a polynomial division that should be exact leaves a remainder.
class InexactDivision : public std::runtime_error {
public:
    explicit InexactDivision(double remainder_norm);
    double remainder_norm() const noexcept { return remainder_norm_; }

private:
    double remainder_norm_;
};

class NonConvergence : public std::runtime_error {
public:
    NonConvergence(const std::string& what, double worst_residual, int iterations);
    double worst_residual() const noexcept { return worst_residual_; }
    int iterations() const noexcept { return iterations_; }

private:
    double worst_residual_;
    int iterations_;
};

// ---------------------------------------------------------------------------
// Number theory

int mobius(std::uint64_t n);
std::uint64_t sigma_divisors(std::uint64_t n);
/// Divisors of n in increasing order.
std::vector<std::uint64_t> divisors(std::uint64_t n);
/// Overflow-checked integer power.
std::uint64_t checked_pow(std::uint64_t base, std::uint64_t exp);
/// d_n = sum_{k|n} mu(n/k) d^k, the number of points of exact period n of a
/// degree-d polynomial counted with multiplicity. Throws OverflowError
/// rather than wrapping.
std::uint64_t exact_period_degree(std::uint64_t d, std::uint64_t n);

// ---------------------------------------------------------------------------
// Dense polynomials

/// Dense polynomial with complex coefficients; coeffs()[i] multiplies z^i.
/// Trailing zeros are trimmed, so the zero polynomial has no coefficients
/// and degree -1.
class Polynomial {
public:
    Polynomial() = default;
    explicit Polynomial(std::vector<Complex> coeffs);
    Polynomial(std::initializer_list<Complex> coeffs);

    static Polynomial monomial(int degree, Complex coeff = 1.0);
    /// prod (z - r_i)
    static Polynomial from_roots(std::span<const Complex> roots);

    int degree() const noexcept { return static_cast<int>(coeffs_.size()) - 1; }
    bool is_zero() const noexcept { return coeffs_.empty(); }
    std::span<const Complex> coeffs() const noexcept { return coeffs_; }
    Complex operator[](std::size_t i) const noexcept {
        return i < coeffs_.size() ? coeffs_[i] : Complex{};
    }
    Complex leading() const;
    double max_abs_coeff() const noexcept;

    Complex operator()(Complex z) const noexcept;
    /// Value and first derivative by Horner's rule.
    std::pair<Complex, Complex> eval_with_derivative(Complex z) const noexcept;
    /// sum |a_i| r^i
    double abs_eval(double r) const noexcept;

    Polynomial derivative() const;

    Polynomial& operator+=(const Polynomial& rhs);
    Polynomial& operator-=(const Polynomial& rhs);
    Polynomial& operator*=(const Polynomial& rhs);
    Polynomial& operator*=(Complex s);

    friend Polynomial operator+(Polynomial lhs, const Polynomial& rhs) { return lhs += rhs; }
    friend Polynomial operator-(Polynomial lhs, const Polynomial& rhs) { return lhs -= rhs; }
    friend Polynomial operator*(const Polynomial& lhs, const Polynomial& rhs);
    friend Polynomial operator*(Polynomial lhs, Complex s) { return lhs *= s; }
    friend Polynomial operator*(Complex s, Polynomial rhs) { return rhs *= s; }
    friend bool operator==(const Polynomial&, const Polynomial&) = default;

private:
    void trim();
    std::vector<Complex> coeffs_;
};

/// outer(inner(z))
Polynomial compose(const Polynomial& outer, const Polynomial& inner);
/// Integer power by repeated squaring.
Polynomial pow(const Polynomial& p, unsigned e);

struct Division {
    Polynomial quotient;
    Polynomial remainder;
    /// max |remainder coeff| / max |p coeff|
    double relative_remainder = 0.0;
};

/// Long division p = q * quotient + remainder.
Division divide(const Polynomial& p, const Polynomial& q);

/// Quotient p / q when q divides p up to floating error. Throws
/// InexactDivision when the relative remainder exceeds tol.
Polynomial div_exact(const Polynomial& p, const Polynomial& q, double tol = 1e-10);

// ---------------------------------------------------------------------------
// Root finding

enum class Precision { Auto, Double, Extended };

struct AberthOptions {
    /// Bound on the relative backward error of every returned root.
    double tol = 1e-10;
    int max_iter = 200;
    /// Degrees above this switch to 128-bit-significand arithmetic when
    /// precision is Auto.
    std::size_t extended_threshold = 8192;
    Precision precision = Precision::Auto;
};

struct RootSet {
    std::vector<Complex> roots;
    /// Relative backward error |p(z)| / S(z) at each root, where S is the
    /// evaluation scale (sum |a_i| max(|z|, eps)^i for a dense polynomial).
    std::vector<double> residuals;
    /// Size of the last Newton correction applied to each root.
    std::vector<double> corrections;
    int iterations = 0;
    bool extended_precision = false;

    double worst_residual() const noexcept;
};

/// Aberth-Ehrlich simultaneous iteration from a perturbed circle whose
/// radius is the smaller of the Cauchy and Fujiwara bounds, followed by a Newton polish of every root. Roots are
/// sorted by (Re, Im), ties broken by residual.
RootSet aberth_roots(const Polynomial& p, const AberthOptions& options = {});

/// Cauchy bound 1 + max |a_i / a_n| on the modulus of the roots.
double cauchy_root_bound(const Polynomial& p);
/// Fujiwara bound 2 max |a_i / a_n|^{1/(n-i)}; the Aberth start radius
/// for dense input is the smaller of the two.
double fujiwara_root_bound(const Polynomial& p);

/// Sort roots (with their residuals and corrections) lexicographically.
void sort_roots(RootSet& set);

/// Largest distance from an element of `a` to its nearest match in `b`
/// under an optimal-ish greedy one-to-one matching (sizes must agree).
double matching_distance(std::span<const Complex> a, std::span<const Complex> b);

}  // namespace dynlab
