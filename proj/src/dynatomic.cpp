#include "dynlab/dynatomic.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <gmpxx.h>

#include "dynlab/aberth.hpp"
#include "dynlab/orbit_sources.hpp"

namespace dynlab {

namespace {

void check_family(int d, int n) {
    if (d < 2) throw DomainError("degree d must be at least 2");
    if (n < 1) throw DomainError("period n must be positive");
}

std::size_t orbit_degree(int d, int n) {
    return static_cast<std::size_t>(checked_pow(static_cast<std::uint64_t>(d), static_cast<std::uint64_t>(n - 1)));
}

// Exact integer recursion; returns false as soon as a coefficient leaves
// the 64-bit range.
bool integer_orbit_poly(int d, int n, std::vector<std::int64_t>& out) {
    std::vector<std::int64_t> q{0, 1};  // Q_1 = c
    for (int k = 2; k <= n; ++k) {
        std::vector<std::int64_t> acc{1};
        for (int e = 0; e < d; ++e) {
            std::vector<std::int64_t> next(acc.size() + q.size() - 1, 0);
            for (std::size_t i = 0; i < acc.size(); ++i) {
                if (acc[i] == 0) continue;
                for (std::size_t j = 0; j < q.size(); ++j) {
                    std::int64_t prod;
                    if (__builtin_mul_overflow(acc[i], q[j], &prod)) return false;
                    if (__builtin_add_overflow(next[i + j], prod, &next[i + j])) return false;
                }
            }
            acc = std::move(next);
        }
        if (__builtin_add_overflow(acc[1], std::int64_t{1}, &acc[1])) return false;
        q = std::move(acc);
    }
    out = std::move(q);
    return true;
}

template <class T>
using RealPoly = std::vector<T>;

template <class T>
RealPoly<T> real_mul(const RealPoly<T>& a, const RealPoly<T>& b) {
    RealPoly<T> r(a.size() + b.size() - 1, T(0));
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] == T(0)) continue;
        for (std::size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
    }
    return r;
}

template <class T>
std::vector<RealPoly<T>> real_orbit_polys(int d, int n) {
    std::vector<RealPoly<T>> qs;
    RealPoly<T> q{T(0), T(1)};
    qs.push_back(q);
    for (int k = 2; k <= n; ++k) {
        RealPoly<T> acc{T(1)};
        for (int e = 0; e < d; ++e) acc = real_mul(acc, q);
        acc[1] += T(1);
        q = std::move(acc);
        qs.push_back(q);
    }
    return qs;
}

template <class T>
T max_abs(const RealPoly<T>& p) {
    T m(0);
    for (const T& x : p) {
        using std::abs;
        m = std::max(m, T(abs(x)));
    }
    return m;
}

// Long division of real polynomials; returns the relative remainder.
template <class T>
double real_divide(const RealPoly<T>& p, const RealPoly<T>& q, RealPoly<T>& quotient) {
    RealPoly<T> rem = p;
    const std::size_t dq = q.size() - 1;
    quotient.assign(rem.size() - dq, T(0));
    for (std::size_t k = quotient.size(); k-- > 0;) {
        const T t = rem[k + dq] / q.back();
        quotient[k] = t;
        for (std::size_t j = 0; j <= dq; ++j) rem[k + j] -= t * q[j];
        rem[k + dq] = T(0);
    }
    rem.resize(dq);
    const T scale = max_abs(p);
    return scale > T(0) ? static_cast<double>(max_abs(rem) / scale) : 0.0;
}

template <class T>
Polynomial to_polynomial(const RealPoly<T>& p) {
    std::vector<Complex> c;
    c.reserve(p.size());
    for (const T& x : p) {
        const double v = static_cast<double>(x);
        if (!std::isfinite(v)) throw OverflowError("polynomial coefficient exceeds double range");
        c.emplace_back(v, 0.0);
    }
    return Polynomial(std::move(c));
}

template <class T>
ExactPeriodPoly build_exact_period(int d, int n) {
    const auto qs = real_orbit_polys<T>(d, n);
    RealPoly<T> num{T(1)};
    std::vector<const RealPoly<T>*> den;
    for (std::uint64_t k : divisors(static_cast<std::uint64_t>(n))) {
        const int m = mobius(static_cast<std::uint64_t>(n) / k);
        if (m > 0) num = real_mul(num, qs[k - 1]);
        if (m < 0) den.push_back(&qs[k - 1]);
    }
    ExactPeriodPoly out;
    out.d = d;
    out.n = n;
    for (const auto* q : den) {
        RealPoly<T> quotient;
        out.division_residual = std::max(out.division_residual, real_divide(num, *q, quotient));
        num = std::move(quotient);
    }
    for (const T& x : num) {
        if (!std::isfinite(static_cast<double>(x))) {
            throw OverflowError("exact-period polynomial coefficient exceeds double range");
        }
    }
    out.poly = to_polynomial(num);
    return out;
}

// Exact construction over the integers. Every Q_k is monic, so each
// division by a denominator factor is exact integer long division.
ExactPeriodPoly build_exact_period_integer(int d, int n) {
    using IntPoly = std::vector<mpz_class>;
    auto mul = [](const IntPoly& a, const IntPoly& b) {
        IntPoly r(a.size() + b.size() - 1, 0);
        for (std::size_t i = 0; i < a.size(); ++i) {
            if (a[i] == 0) continue;
            for (std::size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
        }
        return r;
    };
    std::vector<IntPoly> qs{IntPoly{0, 1}};
    for (int k = 2; k <= n; ++k) {
        IntPoly acc{1};
        for (int e = 0; e < d; ++e) acc = mul(acc, qs.back());
        acc[1] += 1;
        qs.push_back(std::move(acc));
    }
    IntPoly num{1};
    std::vector<const IntPoly*> den;
    for (std::uint64_t k : divisors(static_cast<std::uint64_t>(n))) {
        const int m = mobius(static_cast<std::uint64_t>(n) / k);
        if (m > 0) num = mul(num, qs[k - 1]);
        if (m < 0) den.push_back(&qs[k - 1]);
    }
    for (const IntPoly* q : den) {
        const std::size_t dq = q->size() - 1;
        IntPoly quotient(num.size() - dq, 0);
        for (std::size_t k = quotient.size(); k-- > 0;) {
            quotient[k] = num[k + dq];
            if (quotient[k] == 0) continue;
            for (std::size_t j = 0; j <= dq; ++j) num[k + j] -= quotient[k] * (*q)[j];
        }
        for (std::size_t j = 0; j < dq; ++j) {
            if (num[j] != 0) throw InexactDivision(1.0);
        }
        num = std::move(quotient);
    }
    std::vector<Complex> c;
    c.reserve(num.size());
    for (const mpz_class& x : num) {
        if (mpz_sizeinbase(x.get_mpz_t(), 2) > 1023) {
            throw OverflowError("exact-period polynomial coefficient exceeds double range");
        }
        c.emplace_back(x.get_d(), 0.0);
    }
    ExactPeriodPoly out;
    out.d = d;
    out.n = n;
    out.poly = Polynomial(std::move(c));
    out.exact_integer = true;
    return out;
}

}  // namespace

CriticalOrbitPoly critical_orbit_poly(int d, int n, std::size_t degree_cap) {
    check_family(d, n);
    if (orbit_degree(d, n) > degree_cap) {
        throw DomainError("critical_orbit_poly: degree " + std::to_string(orbit_degree(d, n)) +
                          " exceeds the cap " + std::to_string(degree_cap));
    }
    CriticalOrbitPoly out;
    std::vector<std::int64_t> ints;
    if (integer_orbit_poly(d, n, ints)) {
        out.exact_integer = true;
        std::vector<Complex> c(ints.begin(), ints.end());
        out.poly = Polynomial(std::move(c));
        out.integer_coeffs = std::move(ints);
        return out;
    }
    out.poly = to_polynomial(real_orbit_polys<double>(d, n).back());
    return out;
}

ExactPeriodPoly exact_period_poly(int d, int n, std::size_t degree_cap, Precision precision) {
    check_family(d, n);
    if (orbit_degree(d, n) > degree_cap) {
        throw DomainError("exact_period_poly: degree exceeds the cap " + std::to_string(degree_cap));
    }
    if (precision == Precision::Auto) return build_exact_period_integer(d, n);
    ExactPeriodPoly out;
    if (precision != Precision::Extended) {
        out = build_exact_period<double>(d, n);
        if (out.division_residual <= kDivisionTolerance) return out;
    }
    out = build_exact_period<Extended>(d, n);
    out.extended_precision = true;
    if (out.division_residual > kDivisionTolerance) throw InexactDivision(out.division_residual);
    return out;
}

RootSet critical_orbit_roots(int d, int n, Complex target, const AberthOptions& opts) {
    check_family(d, n);
    return aberth_roots(CriticalOrbitSource(d, n, target), opts);
}

RootSet exact_period_roots(int d, int n, const AberthOptions& opts) {
    check_family(d, n);
    return aberth_roots(ExactPeriodSource(d, n), opts);
}

OrbitPolyValue evaluate_critical_orbit(int d, int n, Complex c) {
    check_family(d, n);
    const auto pass = detail::run_orbit<double>(d, n, c);
    const auto& e = pass.entries.back();
    OrbitPolyValue out;
    out.escaped = e.escaped;
    if (!e.escaped) {
        out.value = e.value;
        out.derivative = e.derivative;
        out.scale = e.scale;
    }
    return out;
}

// ---------------------------------------------------------------------------

LowerPeriodDegeneracy::LowerPeriodDegeneracy(int divisor)
    : std::runtime_error("lower-period degeneracy: the critical point returns after " +
                         std::to_string(divisor) + " steps"),
      divisor_(divisor) {}

PnjValue pnj_value(const CubicModuli& p, int n, int j) {
    if (n < 1) throw DomainError("pnj_value: n must be positive");
    const ParamPoint pp = p;
    const Orbit orbit = orbit_critical(pp, j, n, true);
    if (orbit.escaped_at >= 0) throw DomainError("pnj_value: critical orbit escaped");
    const Complex cj = orbit.points[0];
    const ParamVector dcj = orbit.jacobian[0];

    struct Factor {
        int k, mu;
        Complex f;
        ParamVector df;
    };
    std::vector<Factor> factors;
    for (std::uint64_t k : divisors(static_cast<std::uint64_t>(n))) {
        const int mu = mobius(static_cast<std::uint64_t>(n) / k);
        if (mu == 0) continue;
        Factor f{static_cast<int>(k), mu, orbit.points[k] - cj, {}};
        for (int i = 0; i < 2; ++i) f.df[i] = orbit.jacobian[k][i] - dcj[i];
        if (mu < 0 && f.f == Complex{}) throw LowerPeriodDegeneracy(f.k);
        factors.push_back(f);
    }

    auto power = [](Complex x, int mu) { return mu > 0 ? x : 1.0 / x; };
    PnjValue out;
    out.value = 1.0;
    for (const auto& f : factors) out.value *= power(f.f, f.mu);
    // Product rule with the factor itself excluded, so that a vanishing
    // numerator factor still yields the right gradient.
    for (std::size_t a = 0; a < factors.size(); ++a) {
        Complex rest = 1.0;
        for (std::size_t b = 0; b < factors.size(); ++b) {
            if (b != a) rest *= power(factors[b].f, factors[b].mu);
        }
        const auto& f = factors[a];
        const Complex dfactor = f.mu > 0 ? Complex(1.0) : -1.0 / (f.f * f.f);
        for (int i = 0; i < 2; ++i) out.gradient[i] += rest * dfactor * f.df[i];
    }
    return out;
}

namespace {

// p / q one root of q at a time: forward deflation for roots inside the
// unit disk, backward deflation for the others. Plain long division by q
// amplifies errors by about max|root|^deg p.
Polynomial deflate(const Polynomial& p, const Polynomial& q, double& residual) {
    std::vector<Complex> c(p.coeffs().begin(), p.coeffs().end());
    const double scale = p.max_abs_coeff();
    for (const Complex r : aberth_roots(q).roots) {
        const std::size_t n = c.size() - 1;
        std::vector<Complex> out(n);
        double rem = 0.0;
        if (std::abs(r) <= 1.0) {
            Complex acc = c[n];
            for (std::size_t k = n; k-- > 0;) {
                out[k] = acc;
                acc = c[k] + r * acc;
            }
            rem = std::abs(acc);
        } else {
            // c = (z - r) out, solved from the constant term upwards.
            Complex prev{};
            for (std::size_t k = 0; k < n; ++k) {
                out[k] = (prev - c[k]) / r;
                prev = out[k];
            }
            rem = std::abs(c[n] - out[n - 1]);
        }
        residual = std::max(residual, rem / scale);
        c = std::move(out);
    }
    const Complex lead = q.leading();
    for (Complex& x : c) x /= lead;
    return Polynomial(std::move(c));
}

}  // namespace

Polynomial map_polynomial(const ParamPoint& p) {
    validate(p);
    if (const auto* u = std::get_if<Unicritical>(&p)) {
        Polynomial f = Polynomial::monomial(u->d);
        return f + Polynomial{u->c};
    }
    const auto& m = std::get<CubicModuli>(p);
    return Polynomial{m.a * m.a * m.a, 0.0, -m.c1 / 2.0, 1.0 / 3.0};
}

Polynomial dynatomic_in_z(const ParamPoint& p, int n, int cap) {
    if (n < 1) throw DomainError("dynatomic_in_z: n must be positive");
    if (n > cap) {
        throw DomainError("dynatomic_in_z: period " + std::to_string(n) + " exceeds the cap " +
                          std::to_string(cap));
    }
    const Polynomial f = map_polynomial(p);
    const Polynomial z = Polynomial::monomial(1);
    std::vector<Polynomial> iterates{f};
    for (int k = 2; k <= n; ++k) iterates.push_back(compose(f, iterates.back()));

    Polynomial num{1.0};
    std::vector<Polynomial> den;
    for (std::uint64_t k : divisors(static_cast<std::uint64_t>(n))) {
        const int mu = mobius(static_cast<std::uint64_t>(n) / k);
        if (mu > 0) num *= iterates[k - 1] - z;
        if (mu < 0) den.push_back(iterates[k - 1] - z);
    }
    for (const auto& q : den) {
        double residual = 0.0;
        num = deflate(num, q, residual);
        if (residual > kDivisionTolerance) throw InexactDivision(residual);
    }
    return num;
}

Complex resultant_oracle(const Polynomial& pz, const Polynomial& qz) {
    if (pz.is_zero() || qz.is_zero()) throw DomainError("resultant_oracle: zero polynomial");
    const int m = pz.degree(), n = qz.degree();
    if (m + n > 64) throw DomainError("resultant_oracle: combined degree above 64");
    const int size = m + n;
    if (size == 0) return 1.0;
    std::vector<Complex> a(static_cast<std::size_t>(size * size));
    auto at = [&](int r, int c) -> Complex& { return a[static_cast<std::size_t>(r * size + c)]; };
    for (int r = 0; r < n; ++r) {
        for (int i = 0; i <= m; ++i) at(r, r + i) = pz[static_cast<std::size_t>(i)];
    }
    for (int r = 0; r < m; ++r) {
        for (int i = 0; i <= n; ++i) at(n + r, r + i) = qz[static_cast<std::size_t>(i)];
    }
    // LU with partial pivoting.
    Complex det = 1.0;
    for (int k = 0; k < size; ++k) {
        int piv = k;
        for (int r = k + 1; r < size; ++r) {
            if (std::abs(at(r, k)) > std::abs(at(piv, k))) piv = r;
        }
        if (at(piv, k) == Complex{}) return 0.0;
        if (piv != k) {
            for (int c = 0; c < size; ++c) std::swap(at(k, c), at(piv, c));
            det = -det;
        }
        det *= at(k, k);
        for (int r = k + 1; r < size; ++r) {
            const Complex f = at(r, k) / at(k, k);
            if (f == Complex{}) continue;
            for (int c = k; c < size; ++c) at(r, c) -= f * at(k, c);
        }
    }
    return det;
}

}  // namespace dynlab
