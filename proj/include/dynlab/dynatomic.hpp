#pragma once

// Critical-orbit polynomials Q_n(c) = p_c^n(0), their exact-period Möbius
// quotients, per-parameter dynatomic polynomials in z, the product-formula
// evaluator P_{n,j} on the cubic moduli family, and a Sylvester resultant.

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "dynlab/dynamics.hpp"
#include "dynlab/polycore.hpp"

namespace dynlab {

inline constexpr std::size_t kDefaultDegreeCap = std::size_t{1} << 19;

struct CriticalOrbitPoly {
    Polynomial poly;
    /// Set when every coefficient was built in exact 64-bit integer
    /// arithmetic; integer_coeffs then holds them.
    bool exact_integer = false;
    std::vector<std::int64_t> integer_coeffs;
};

/// Q_n by the recursion Q_n = Q_{n-1}^d + c. Throws DomainError above the
/// degree cap and OverflowError when a coefficient no longer fits a double.
CriticalOrbitPoly critical_orbit_poly(int d, int n, std::size_t degree_cap = kDefaultDegreeCap);

struct ExactPeriodPoly {
    int d = 2;
    int n = 1;
    /// prod_{k|n} Q_k^{mu(n/k)}, of degree d_n / d.
    Polynomial poly;
    /// Largest relative remainder met across the Möbius divisions.
    double division_residual = 0.0;
    bool extended_precision = false;
    /// Built exactly over the integers.
    bool exact_integer = false;
};

inline constexpr double kDivisionTolerance = 1e-8;

/// Precision::Auto builds the product over the integers (division_residual
/// is then exactly 0). Double uses floating long division and retries in
/// 128-bit arithmetic when the remainder exceeds kDivisionTolerance;
/// Extended goes straight to 128 bits. Throws InexactDivision when the
/// 128-bit remainder is still too large.
ExactPeriodPoly exact_period_poly(int d, int n, std::size_t degree_cap = kDefaultDegreeCap,
                                  Precision precision = Precision::Auto);

/// Roots of Q_n(c) - target, computed from the recursion rather than from
/// coefficients.
RootSet critical_orbit_roots(int d, int n, Complex target = 0.0, const AberthOptions& opts = {});
/// Roots of the exact-period product prod_{k|n} Q_k^{mu(n/k)}.
RootSet exact_period_roots(int d, int n, const AberthOptions& opts = {});

/// Evaluation scale of Q_n at c for residual checks: the value of the
/// running-error recursion S_k = d|z|^{d-1} S_{k-1} + |z|^d + |c|.
struct OrbitPolyValue {
    Complex value;
    Complex derivative;
    double scale = 0.0;
    bool escaped = false;
};
OrbitPolyValue evaluate_critical_orbit(int d, int n, Complex c);

class LowerPeriodDegeneracy : public std::runtime_error {
public:
    explicit LowerPeriodDegeneracy(int divisor);
    int divisor() const noexcept { return divisor_; }

private:
    int divisor_;
};

struct PnjValue {
    Complex value;
    /// d/d(c1), d/d(a)
    ParamVector gradient{};
};

/// P_{n,j}(c1, a) = prod_{k|n} (P^k(c_j) - c_j)^{mu(n/k)} and its gradient.
PnjValue pnj_value(const CubicModuli& p, int n, int j);

inline constexpr int kDynatomicCap = 6;

/// Phi*_n(z) for a fixed parameter.
Polynomial dynatomic_in_z(const ParamPoint& p, int n, int cap = kDynatomicCap);

/// The map itself as a polynomial in z.
Polynomial map_polynomial(const ParamPoint& p);

/// Determinant of the Sylvester matrix built from ascending coefficient
/// rows, pz rows first. For degrees m, n this equals (-1)^{mn} times the
/// classical lc(pz)^n prod q(roots of pz).
Complex resultant_oracle(const Polynomial& pz, const Polynomial& qz);

}  // namespace dynlab
