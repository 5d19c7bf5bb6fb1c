#include "dynlab/polycore.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "dynlab/aberth.hpp"

namespace dynlab {

namespace {

std::string remainder_message(double norm) {
    std::ostringstream os;
    os << "inexact division: relative remainder " << norm;
    return os.str();
}

}  // namespace

InexactDivision::InexactDivision(double remainder_norm)
    : std::runtime_error(remainder_message(remainder_norm)), remainder_norm_(remainder_norm) {}

NonConvergence::NonConvergence(const std::string& what, double worst_residual, int iterations)
    : std::runtime_error(what + " (worst residual " + std::to_string(worst_residual) + " after " +
                         std::to_string(iterations) + " iterations)"),
      worst_residual_(worst_residual),
      iterations_(iterations) {}

// ---------------------------------------------------------------------------

int mobius(std::uint64_t n) {
    if (n == 0) throw DomainError("mobius: n must be positive");
    int result = 1;
    for (std::uint64_t p = 2; p * p <= n; ++p) {
        if (n % p != 0) continue;
        n /= p;
        if (n % p == 0) return 0;
        result = -result;
    }
    if (n > 1) result = -result;
    return result;
}

std::vector<std::uint64_t> divisors(std::uint64_t n) {
    if (n == 0) throw DomainError("divisors: n must be positive");
    std::vector<std::uint64_t> small, large;
    for (std::uint64_t k = 1; k * k <= n; ++k) {
        if (n % k != 0) continue;
        small.push_back(k);
        if (k != n / k) large.push_back(n / k);
    }
    small.insert(small.end(), large.rbegin(), large.rend());
    return small;
}

std::uint64_t sigma_divisors(std::uint64_t n) {
    if (n == 0) throw DomainError("sigma_divisors: n must be positive");
    std::uint64_t s = 0;
    for (std::uint64_t k : divisors(n)) s += k;
    return s;
}

std::uint64_t checked_pow(std::uint64_t base, std::uint64_t exp) {
    std::uint64_t r = 1;
    for (std::uint64_t i = 0; i < exp; ++i) {
        if (__builtin_mul_overflow(r, base, &r)) {
            throw OverflowError("integer power " + std::to_string(base) + "^" + std::to_string(exp) +
                                " overflows 64 bits");
        }
    }
    return r;
}

std::uint64_t exact_period_degree(std::uint64_t d, std::uint64_t n) {
    if (d < 2) throw DomainError("exact_period_degree: d must be at least 2");
    if (n == 0) throw DomainError("exact_period_degree: n must be positive");
    // Positive and negative parts are accumulated separately so that no
    // intermediate can wrap.
    std::uint64_t plus = 0, minus = 0;
    for (std::uint64_t k : divisors(n)) {
        const int m = mobius(n / k);
        if (m == 0) continue;
        const std::uint64_t term = checked_pow(d, k);
        std::uint64_t& acc = m > 0 ? plus : minus;
        if (__builtin_add_overflow(acc, term, &acc)) {
            throw OverflowError("exact_period_degree overflows 64 bits");
        }
    }
    return plus - minus;
}

// ---------------------------------------------------------------------------

Polynomial::Polynomial(std::vector<Complex> coeffs) : coeffs_(std::move(coeffs)) { trim(); }

Polynomial::Polynomial(std::initializer_list<Complex> coeffs) : coeffs_(coeffs) { trim(); }

Polynomial Polynomial::monomial(int degree, Complex coeff) {
    if (degree < 0) throw DomainError("monomial: negative degree");
    std::vector<Complex> c(static_cast<std::size_t>(degree) + 1);
    c.back() = coeff;
    return Polynomial(std::move(c));
}

Polynomial Polynomial::from_roots(std::span<const Complex> roots) {
    std::vector<Complex> c{1.0};
    for (Complex r : roots) {
        c.push_back(0.0);
        for (std::size_t i = c.size() - 1; i > 0; --i) c[i] = c[i - 1] - r * c[i];
        c[0] *= -r;
    }
    return Polynomial(std::move(c));
}

void Polynomial::trim() {
    while (!coeffs_.empty() && coeffs_.back() == Complex{}) coeffs_.pop_back();
}

Complex Polynomial::leading() const {
    if (coeffs_.empty()) throw DomainError("leading coefficient of the zero polynomial");
    return coeffs_.back();
}

double Polynomial::max_abs_coeff() const noexcept {
    double m = 0.0;
    for (Complex a : coeffs_) m = std::max(m, std::abs(a));
    return m;
}

Complex Polynomial::operator()(Complex z) const noexcept {
    Complex acc{};
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * z + *it;
    return acc;
}

std::pair<Complex, Complex> Polynomial::eval_with_derivative(Complex z) const noexcept {
    Complex p{}, dp{};
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) {
        dp = dp * z + p;
        p = p * z + *it;
    }
    return {p, dp};
}

double Polynomial::abs_eval(double r) const noexcept {
    double acc = 0.0;
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * r + std::abs(*it);
    return acc;
}

Polynomial Polynomial::derivative() const {
    if (coeffs_.size() <= 1) return {};
    std::vector<Complex> c(coeffs_.size() - 1);
    for (std::size_t i = 1; i < coeffs_.size(); ++i) c[i - 1] = coeffs_[i] * static_cast<double>(i);
    return Polynomial(std::move(c));
}

Polynomial& Polynomial::operator+=(const Polynomial& rhs) {
    if (rhs.coeffs_.size() > coeffs_.size()) coeffs_.resize(rhs.coeffs_.size());
    for (std::size_t i = 0; i < rhs.coeffs_.size(); ++i) coeffs_[i] += rhs.coeffs_[i];
    trim();
    return *this;
}

Polynomial& Polynomial::operator-=(const Polynomial& rhs) {
    if (rhs.coeffs_.size() > coeffs_.size()) coeffs_.resize(rhs.coeffs_.size());
    for (std::size_t i = 0; i < rhs.coeffs_.size(); ++i) coeffs_[i] -= rhs.coeffs_[i];
    trim();
    return *this;
}

Polynomial operator*(const Polynomial& lhs, const Polynomial& rhs) {
    if (lhs.is_zero() || rhs.is_zero()) return {};
    std::vector<Complex> c(lhs.coeffs_.size() + rhs.coeffs_.size() - 1);
    for (std::size_t i = 0; i < lhs.coeffs_.size(); ++i) {
        const Complex a = lhs.coeffs_[i];
        if (a == Complex{}) continue;
        for (std::size_t j = 0; j < rhs.coeffs_.size(); ++j) c[i + j] += a * rhs.coeffs_[j];
    }
    return Polynomial(std::move(c));
}

Polynomial& Polynomial::operator*=(const Polynomial& rhs) { return *this = *this * rhs; }

Polynomial& Polynomial::operator*=(Complex s) {
    for (Complex& a : coeffs_) a *= s;
    trim();
    return *this;
}

Polynomial compose(const Polynomial& outer, const Polynomial& inner) {
    Polynomial acc;
    const auto c = outer.coeffs();
    for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * inner + Polynomial{*it};
    return acc;
}

Polynomial pow(const Polynomial& p, unsigned e) {
    Polynomial result{1.0};
    Polynomial base = p;
    while (e > 0) {
        if (e & 1u) result *= base;
        e >>= 1;
        if (e > 0) base *= base;
    }
    return result;
}

Division divide(const Polynomial& p, const Polynomial& q) {
    if (q.is_zero()) throw DomainError("division by the zero polynomial");
    Division out;
    if (p.degree() < q.degree()) {
        out.remainder = p;
        out.relative_remainder = p.is_zero() ? 0.0 : 1.0;
        return out;
    }
    std::vector<Complex> rem(p.coeffs().begin(), p.coeffs().end());
    const auto qc = q.coeffs();
    const std::size_t dq = qc.size() - 1;
    std::vector<Complex> quot(rem.size() - dq);
    const Complex lead = qc.back();
    for (std::size_t k = quot.size(); k-- > 0;) {
        const Complex t = rem[k + dq] / lead;
        quot[k] = t;
        for (std::size_t j = 0; j <= dq; ++j) rem[k + j] -= t * qc[j];
        rem[k + dq] = 0.0;
    }
    rem.resize(dq);
    out.quotient = Polynomial(std::move(quot));
    out.remainder = Polynomial(std::move(rem));
    const double scale = p.max_abs_coeff();
    out.relative_remainder = scale > 0.0 ? out.remainder.max_abs_coeff() / scale : 0.0;
    return out;
}

Polynomial div_exact(const Polynomial& p, const Polynomial& q, double tol) {
    Division d = divide(p, q);
    if (!(d.relative_remainder <= tol)) throw InexactDivision(d.relative_remainder);
    return std::move(d.quotient);
}

// ---------------------------------------------------------------------------

namespace {

/// Start points on circles read off the upper convex hull of
/// (i, log|a_i|): an edge from i to j carries j - i points on the circle of
/// radius (|a_i| / |a_j|)^{1/(j-i)}.
std::vector<Complex> newton_polygon_start(const Polynomial& p) {
    const auto c = p.coeffs();
    const int n = p.degree();
    std::vector<int> hull;
    for (int i = 0; i <= n; ++i) {
        if (c[i] == Complex{}) continue;
        const double li = std::log(std::abs(c[i]));
        while (hull.size() >= 2) {
            const int a = hull[hull.size() - 2], b = hull.back();
            const double la = std::log(std::abs(c[a])), lb = std::log(std::abs(c[b]));
            // Drop b when it lies on or below the chord from a to i.
            if ((lb - la) * (i - a) <= (li - la) * (b - a)) {
                hull.pop_back();
            } else {
                break;
            }
        }
        hull.push_back(i);
    }
    std::vector<Complex> z;
    z.reserve(static_cast<std::size_t>(n));
    double smallest = std::numeric_limits<double>::infinity();
    for (std::size_t e = 0; e + 1 < hull.size(); ++e) {
        const int i = hull[e], j = hull[e + 1];
        smallest = std::min(smallest, std::pow(std::abs(c[i]) / std::abs(c[j]), 1.0 / (j - i)));
    }
    // Roots at the origin (zero low coefficients) get a tiny circle.
    const int zeros = hull.front();
    const double tiny = 1e-3 * (std::isfinite(smallest) ? smallest : 1.0);
    for (int k = 0; k < zeros; ++k) {
        z.push_back(zeros == 1 ? Complex{} : std::polar(tiny, 2.0 * std::numbers::pi * k / zeros));
    }
    constexpr double golden = 0.6180339887498949;
    for (std::size_t e = 0; e + 1 < hull.size(); ++e) {
        const int i = hull[e], j = hull[e + 1];
        const double radius = std::pow(std::abs(c[i]) / std::abs(c[j]), 1.0 / (j - i));
        const double offset = 2.0 * std::numbers::pi * golden * static_cast<double>(e + 1) + 0.25;
        for (int k = 0; k < j - i; ++k) {
            z.push_back(std::polar(radius, offset + 2.0 * std::numbers::pi * k / (j - i)));
        }
    }
    return z;
}

/// Dense polynomial as an Aberth root source. Points outside the unit disk
/// are evaluated through the reversed polynomial so that high degrees do not
/// overflow.
class DenseSource {
public:
    explicit DenseSource(const Polynomial& p) : p_(p) {}

    std::size_t degree() const { return static_cast<std::size_t>(p_.degree()); }
    double root_radius() const { return std::min(cauchy_root_bound(p_), fujiwara_root_bound(p_)); }
    std::vector<Complex> initial_points() const { return newton_polygon_start(p_); }

    template <class T>
    NewtonTerm<T> newton(const std::complex<T>& z) const {
        using C = std::complex<T>;
        const auto c = p_.coeffs();
        const std::size_t n = c.size() - 1;
        const T r = detail::cabs(z);
        NewtonTerm<T> out;
        if (r <= T(1)) {
            // |z| is floored at the unit roundoff so that a root at 0 of a
            // polynomial without constant term is not penalised.
            const T rs = std::max(r, T(detail::unit_roundoff<T>()));
            C v{}, dv{};
            T s(0);
            for (std::size_t k = c.size(); k-- > 0;) {
                dv = dv * z + v;
                v = v * z + C(T(c[k].real()), T(c[k].imag()));
                s = s * rs + T(std::abs(c[k]));
            }
            const T av = detail::cabs(v);
            out.backward_error = detail::to_double(av / s);
            if (av == T(0)) {
                out.exact_zero = true;
                return out;
            }
            out.ratio = v / dv;
            return out;
        }
        // p(z) = z^n q(y), y = 1/z, q(y) = sum a_i y^(n-i);
        // p/p' = z q / (n q - y q').
        const C y = detail::inv(z);
        const T ry = T(1) / r;
        C v{}, dv{};
        T s(0);
        for (std::size_t k = 0; k <= n; ++k) {
            dv = dv * y + v;
            v = v * y + C(T(c[k].real()), T(c[k].imag()));
            s = s * ry + T(std::abs(c[k]));
        }
        const T av = detail::cabs(v);
        out.backward_error = detail::to_double(av / s);
        if (av == T(0)) {
            out.exact_zero = true;
            return out;
        }
        out.ratio = z * v / (T(static_cast<double>(n)) * v - y * dv);
        return out;
    }

private:
    const Polynomial& p_;
};

}  // namespace

double cauchy_root_bound(const Polynomial& p) {
    const Complex lead = p.leading();
    double m = 0.0;
    for (int i = 0; i < p.degree(); ++i) m = std::max(m, std::abs(p[i] / lead));
    return 1.0 + m;
}

double fujiwara_root_bound(const Polynomial& p) {
    const Complex lead = p.leading();
    const int n = p.degree();
    double m = 0.0;
    for (int i = 0; i < n; ++i) {
        const double a = std::abs(p[i] / lead);
        if (a > 0.0) m = std::max(m, std::pow(i == 0 ? 0.5 * a : a, 1.0 / (n - i)));
    }
    return 2.0 * m;
}

RootSet aberth_roots(const Polynomial& p, const AberthOptions& options) {
    if (p.degree() < 1) throw DomainError("aberth_roots: polynomial must have degree >= 1");
    for (Complex a : p.coeffs()) {
        if (!std::isfinite(a.real()) || !std::isfinite(a.imag())) {
            throw DomainError("aberth_roots: non-finite coefficient");
        }
    }
    return aberth_roots(DenseSource(p), options);
}

double RootSet::worst_residual() const noexcept {
    double w = 0.0;
    for (double r : residuals) w = std::max(w, std::isnan(r) ? std::numeric_limits<double>::infinity() : r);
    return w;
}

void sort_roots(RootSet& set) {
    std::vector<std::size_t> idx(set.roots.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        const Complex& x = set.roots[a];
        const Complex& y = set.roots[b];
        if (x.real() != y.real()) return x.real() < y.real();
        if (x.imag() != y.imag()) return x.imag() < y.imag();
        return set.residuals[a] < set.residuals[b];
    });
    RootSet sorted;
    sorted.iterations = set.iterations;
    sorted.extended_precision = set.extended_precision;
    for (std::size_t i : idx) {
        sorted.roots.push_back(set.roots[i]);
        sorted.residuals.push_back(set.residuals[i]);
        if (!set.corrections.empty()) sorted.corrections.push_back(set.corrections[i]);
    }
    set = std::move(sorted);
}

double matching_distance(std::span<const Complex> a, std::span<const Complex> b) {
    if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
    std::vector<char> used(b.size(), 0);
    double worst = 0.0;
    for (Complex x : a) {
        double best = std::numeric_limits<double>::infinity();
        std::size_t arg = 0;
        for (std::size_t j = 0; j < b.size(); ++j) {
            if (used[j]) continue;
            const double dist = std::abs(x - b[j]);
            if (dist < best) {
                best = dist;
                arg = j;
            }
        }
        used[arg] = 1;
        worst = std::max(worst, best);
    }
    return worst;
}

}  // namespace dynlab
