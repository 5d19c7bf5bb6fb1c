#pragma once

// Aberth root sources for polynomials defined by the critical-orbit
// recursion. Each one evaluates the Newton ratio through the log-derivative
// Q_k'/Q_k, which stays finite (asymptotically d * previous) once the orbit
// escapes, so degrees in the thousands never touch a coefficient.

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <vector>

#include "dynlab/aberth.hpp"

namespace dynlab {

namespace detail {

inline constexpr double kEscapeRadiusForSources = 1e100;

template <class T>
std::complex<T> ipow(const std::complex<T>& z, int e) {
    std::complex<T> r(T(1));
    for (int i = 0; i < e; ++i) r *= z;
    return r;
}

/// One pass of Q_k(c) = Q_{k-1}(c)^d + c recording, at the requested
/// indices, the log-derivative Q_k'/Q_k (or the value/derivative pair while
/// still finite) and the running-error scale.
template <class T>
struct OrbitPass {
    struct Entry {
        std::complex<T> value, derivative, log_derivative;
        double scale = 0.0;
        bool escaped = false;
    };
    std::vector<Entry> entries;  // entry for k = 1..n
};

template <class T>
OrbitPass<T> run_orbit(int d, int n, const std::complex<T>& c) {
    using C = std::complex<T>;
    OrbitPass<T> out;
    out.entries.resize(static_cast<std::size_t>(n));
    C z{}, dz{};
    T scale(0);
    // |c| is floored at the unit roundoff, as for dense polynomials.
    const T ac = std::max(cabs(c), T(std::numeric_limits<double>::epsilon()));
    bool escaped = false;
    C logd{};
    for (int k = 1; k <= n; ++k) {
        auto& e = out.entries[static_cast<std::size_t>(k - 1)];
        if (!escaped) {
            const C zd1 = ipow(z, d - 1);
            const T az = cabs(z);
            T azd1(1);
            for (int i = 0; i < d - 1; ++i) azd1 *= az;
            scale = T(static_cast<double>(d)) * azd1 * scale + azd1 * az + ac;
            dz = T(static_cast<double>(d)) * zd1 * dz + C(T(1));
            z = zd1 * z + c;
            if (cabs(z) > T(kEscapeRadiusForSources)) {
                escaped = true;
                logd = dz / z;
            }
        } else {
            logd *= T(static_cast<double>(d));
        }
        e.escaped = escaped;
        if (escaped) {
            e.log_derivative = logd;
        } else {
            e.value = z;
            e.derivative = dz;
            e.scale = to_double(scale);
        }
    }
    return out;
}


/// `count` points on the equipotential Q_n(c) = R e^{i phi}, equally spaced
/// in phi over its full winding. The curve hugs the connectedness locus, so
/// the points are distributed like the roots of Q_n - w for |w| << R.
inline std::vector<std::complex<double>> equipotential_seeds(int d, int n, std::size_t count, double R) {
    using C = std::complex<double>;
    std::vector<C> out;
    if (count == 0) return out;
    auto eval = [&](C c, C& log_value, C& log_derivative) {
        const auto pass = run_orbit<double>(d, n, c);
        const auto& e = pass.entries.back();
        if (e.escaped || e.value == C{}) return false;
        log_value = std::log(e.value);
        log_derivative = e.derivative / e.value;
        return true;
    };
    // Q_n is increasing on the positive axis.
    double lo = 0.0, hi = std::max(2.0, R);
    for (int i = 0; i < 200 && hi - lo > 1e-15 * hi; ++i) {
        const double mid = 0.5 * (lo + hi);
        const auto e = run_orbit<double>(d, n, C(mid)).entries.back();
        if (e.escaped || e.value.real() > R) hi = mid; else lo = mid;
    }
    C c(0.5 * (lo + hi));
    double degree = 1.0;
    for (int i = 1; i < n; ++i) degree *= d;
    const double total = 2.0 * std::numbers::pi * degree;
    const double log_r = std::log(R);
    constexpr int kSub = 4;

    // One corrected move of c from phi to phi + h; false if Newton fails.
    auto advance = [&](C& cc, double phi, double h) {
        C lv, ld;
        if (!eval(cc, lv, ld)) return false;
        C next = cc + C(0.0, h) / ld;
        const double target_im = phi + h;
        for (int it = 0; it < 12; ++it) {
            if (!eval(next, lv, ld)) return false;
            const double wrap = std::round((target_im - lv.imag()) / (2.0 * std::numbers::pi));
            const C diff = C(log_r, target_im) - (lv + C(0.0, 2.0 * std::numbers::pi * wrap));
            const C delta = diff / ld;
            next += delta;
            if (std::abs(delta) <= 1e-12 * (1.0 + std::abs(next))) {
                cc = next;
                return true;
            }
        }
        return false;
    };

    const double h = total / (static_cast<double>(count) * kSub);
    double phi = 0.0;
    out.push_back(c);
    for (std::size_t k = 1; k < count; ++k) {
        for (int s = 0; s < kSub; ++s) {
            double done = 0.0, step = h;
            while (done < h) {
                step = std::min(step, h - done);
                C trial = c;
                if (advance(trial, phi + done, step)) {
                    c = trial;
                    done += step;
                    step *= 2.0;
                } else {
                    step *= 0.5;
                    if (step < h * 1e-6) break;
                }
            }
            phi += h;
        }
        out.push_back(c);
    }
    return out;
}

}  // namespace detail

/// Q_n(c) - target.
class CriticalOrbitSource {
public:
    CriticalOrbitSource(int d, int n, std::complex<double> target = 0.0) : d_(d), n_(n), target_(target) {}

    std::size_t degree() const {
        std::size_t deg = 1;
        for (int i = 1; i < n_; ++i) deg *= static_cast<std::size_t>(d_);
        return deg;
    }
    double root_radius() const {
        return 1.1 * std::max(std::pow(2.0, 1.0 / (d_ - 1)), std::abs(target_));
    }
    std::vector<std::complex<double>> initial_points() const {
        return detail::equipotential_seeds(d_, n_, degree(), std::max(100.0, 4.0 * std::abs(target_)));
    }

    template <class T>
    NewtonTerm<T> newton(const std::complex<T>& c) const {
        using C = std::complex<T>;
        const auto pass = detail::run_orbit<T>(d_, n_, c);
        const auto& e = pass.entries.back();
        NewtonTerm<T> out;
        if (e.escaped) {
            out.ratio = detail::inv(e.log_derivative);
            out.backward_error = 1.0;
            return out;
        }
        const C t(T(target_.real()), T(target_.imag()));
        const C v = e.value - t;
        const T av = detail::cabs(v);
        out.backward_error = detail::to_double(av) / (e.scale + std::abs(target_));
        if (av == T(0)) {
            out.exact_zero = true;
            return out;
        }
        out.ratio = v / e.derivative;
        return out;
    }

private:
    int d_, n_;
    std::complex<double> target_;
};

/// prod_{k|n} Q_k^{mu(n/k)}, the polynomial of exact-period-n centres.
class ExactPeriodSource {
public:
    ExactPeriodSource(int d, int n) : d_(d), n_(n) {
        for (std::uint64_t k : divisors(static_cast<std::uint64_t>(n))) {
            const int m = mobius(static_cast<std::uint64_t>(n) / k);
            if (m != 0) factors_.push_back({static_cast<int>(k), m});
        }
        degree_ = exact_period_degree(static_cast<std::uint64_t>(d), static_cast<std::uint64_t>(n)) /
                  static_cast<std::uint64_t>(d);
    }

    std::size_t degree() const { return degree_; }
    double root_radius() const { return 1.1 * std::pow(2.0, 1.0 / (d_ - 1)); }
    std::vector<std::complex<double>> initial_points() const {
        return detail::equipotential_seeds(d_, n_, degree_, 100.0);
    }

    template <class T>
    NewtonTerm<T> newton(const std::complex<T>& c) const {
        using C = std::complex<T>;
        const auto pass = detail::run_orbit<T>(d_, n_, c);
        NewtonTerm<T> out;
        C sum{};
        for (const auto& [k, m] : factors_) {
            const auto& e = pass.entries[static_cast<std::size_t>(k - 1)];
            C ld;
            if (e.escaped) {
                ld = e.log_derivative;
            } else {
                if (e.value == C{}) {
                    if (k == n_) {
                        out.exact_zero = true;
                        out.backward_error = 0.0;
                        return out;
                    }
                    // A lower-period root sits exactly on the start point:
                    // push it off with a tiny finite ratio.
                    out.ratio = C(T(1e-8));
                    return out;
                }
                ld = e.derivative / e.value;
            }
            sum += T(static_cast<double>(m)) * ld;
        }
        const auto& top = pass.entries.back();
        out.backward_error = top.escaped ? 1.0 : detail::to_double(detail::cabs(top.value)) / top.scale;
        out.ratio = detail::inv(sum);
        return out;
    }

private:
    struct Factor {
        int k;
        int mu;
    };
    int d_, n_;
    std::vector<Factor> factors_;
    std::size_t degree_ = 0;
};

}  // namespace dynlab
