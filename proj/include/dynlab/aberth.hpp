#pragma once

// Generic Aberth-Ehrlich engine. A root source only has to supply the Newton
// ratio p(z)/p'(z) and a backward-error estimate at a point, which lets the
// recursively defined polynomials of the dynatomic module be solved without
// ever expanding their (overflowing) coefficients.

#include <algorithm>
#include <cmath>
#include <complex>
#include <concepts>
#include <cstddef>
#include <limits>
#include <numbers>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "dynlab/polycore.hpp"

namespace dynlab {

using Extended = boost::multiprecision::number<
    boost::multiprecision::cpp_bin_float<128, boost::multiprecision::digit_base_2>,
    boost::multiprecision::et_off>;

template <class T>
struct NewtonTerm {
    /// p(z) / p'(z); meaningless when exact_zero is set.
    std::complex<T> ratio;
    /// |p(z)| / S(z) with S the evaluation scale.
    double backward_error = 1.0;
    bool exact_zero = false;
};

template <class E>
concept RootSource = requires(const E& e, std::complex<double> zd, std::complex<Extended> ze) {
    { e.degree() } -> std::convertible_to<std::size_t>;
    { e.root_radius() } -> std::convertible_to<double>;
    { e.newton(zd) } -> std::same_as<NewtonTerm<double>>;
    { e.newton(ze) } -> std::same_as<NewtonTerm<Extended>>;
};

namespace detail {

template <class T>
double to_double(const T& x) {
    return static_cast<double>(x);
}

template <class T>
T cabs(const std::complex<T>& z) {
    using std::hypot;
    using boost::multiprecision::hypot;
    return hypot(z.real(), z.imag());
}

template <class T>
std::complex<T> inv(const std::complex<T>& z) {
    const T n = z.real() * z.real() + z.imag() * z.imag();
    return {z.real() / n, -z.imag() / n};
}

template <class T>
constexpr double unit_roundoff() {
    return static_cast<double>(std::numeric_limits<T>::epsilon());
}

template <class T, RootSource Source>
RootSet aberth_run(const Source& src, const AberthOptions& opt) {
    using C = std::complex<T>;
    const std::size_t n = src.degree();
    RootSet out;
    out.extended_precision = std::is_same_v<T, Extended>;
    if (n == 0) return out;

    std::vector<C> z(n);
    if constexpr (requires { src.initial_points(); }) {
        const std::vector<std::complex<double>> seeds = src.initial_points();
        for (std::size_t i = 0; i < n; ++i) z[i] = C(T(seeds[i].real()), T(seeds[i].imag()));
    } else {
        // Perturbed circle: the golden-angle offset keeps the start points
        // off the symmetry axes of real polynomials.
        const double radius = src.root_radius();
        constexpr double golden = 0.6180339887498949;
        for (std::size_t i = 0; i < n; ++i) {
            const double theta = 2.0 * std::numbers::pi * (static_cast<double>(i) + golden) / n + 0.25;
            const double r = radius * (1.0 + 0.01 * std::sin(7.0 * i + 1.0));
            z[i] = C(T(r * std::cos(theta)), T(r * std::sin(theta)));
        }
    }

    const double eps = unit_roundoff<T>();
    const double stop = std::max(eps * 64.0, 0.0);
    std::vector<char> done(n, 0);
    std::vector<double> residual(n, 1.0), correction(n, 0.0);
    std::size_t remaining = n;
    int iter = 0;
    for (; iter < opt.max_iter && remaining > 0; ++iter) {
        for (std::size_t i = 0; i < n; ++i) {
            if (done[i]) continue;
            const NewtonTerm<T> term = src.newton(z[i]);
            residual[i] = term.backward_error;
            if (term.exact_zero) {
                done[i] = 1;
                --remaining;
                correction[i] = 0.0;
                continue;
            }
            C sum{};
            for (std::size_t j = 0; j < n; ++j) {
                if (j != i) sum += inv(C(z[i] - z[j]));
            }
            const C w = term.ratio / (C(T(1)) - term.ratio * sum);
            z[i] -= w;
            const double step = to_double(cabs(w));
            const double scale = std::max(1.0, to_double(cabs(z[i])));
            correction[i] = step;
            if (step <= stop * scale || (term.backward_error <= eps * 4.0 && step <= 1e-6 * scale)) {
                done[i] = 1;
                --remaining;
            }
        }
    }

    // Newton polish; a step is only taken when it is small compared with the
    // distance to the nearest other approximation, so clustered roots cannot
    // be pulled onto a neighbour.
    for (std::size_t i = 0; i < n; ++i) {
        T nearest = T(std::numeric_limits<double>::infinity());
        for (std::size_t j = 0; j < n; ++j) {
            if (j != i) nearest = std::min(nearest, cabs(C(z[i] - z[j])));
        }
        NewtonTerm<T> term = src.newton(z[i]);
        for (int k = 0; k < 4 && !term.exact_zero; ++k) {
            const T step = cabs(term.ratio);
            if (!(step < nearest / T(4))) break;
            const C candidate = z[i] - term.ratio;
            const NewtonTerm<T> next = src.newton(candidate);
            if (!next.exact_zero && next.backward_error > term.backward_error) break;
            z[i] = candidate;
            correction[i] = to_double(step);
            term = next;
            if (to_double(step) <= eps * std::max(1.0, to_double(cabs(z[i])))) break;
        }
        residual[i] = term.exact_zero ? 0.0 : term.backward_error;
    }

    out.iterations = iter;
    out.roots.reserve(n);
    for (const C& r : z) out.roots.emplace_back(to_double(r.real()), to_double(r.imag()));
    out.residuals = std::move(residual);
    out.corrections = std::move(correction);
    const double worst = out.worst_residual();
    if (!(worst <= opt.tol)) {
        throw NonConvergence("Aberth iteration did not reach the residual tolerance", worst, iter);
    }
    sort_roots(out);
    return out;
}

}  // namespace detail

/// Runs the engine in double or 128-bit arithmetic according to the options.
template <RootSource Source>
RootSet aberth_roots(const Source& src, const AberthOptions& opt = {}) {
    if (src.degree() == 0) throw DomainError("aberth_roots: degree 0 polynomial has no roots");
    const bool extended = opt.precision == Precision::Extended ||
                          (opt.precision == Precision::Auto && src.degree() > opt.extended_threshold);
    if (extended) return detail::aberth_run<Extended>(src, opt);
    return detail::aberth_run<double>(src, opt);
}

}  // namespace dynlab
