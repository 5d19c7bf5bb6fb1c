#include "dynlab/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace dynlab {

namespace {

/// Map value with first/second z-derivatives and parameter partials.
struct MapJet {
    Complex f, fz, fzz;
    ParamVector fp{}, fzp{};
};

Complex ipow(Complex z, int e) {
    Complex r = 1.0;
    for (int i = 0; i < e; ++i) r *= z;
    return r;
}

MapJet map_jet(const ParamPoint& p, Complex z) {
    MapJet j;
    if (const auto* u = std::get_if<Unicritical>(&p)) {
        const int d = u->d;
        const Complex zd2 = ipow(z, d - 2);
        const Complex zd1 = zd2 * z;
        j.f = zd1 * z + u->c;
        j.fz = static_cast<double>(d) * zd1;
        j.fzz = static_cast<double>(d) * (d - 1) * zd2;
        j.fp = {1.0, 0.0};
        j.fzp = {0.0, 0.0};
        return j;
    }
    const auto& m = std::get<CubicModuli>(p);
    const Complex z2 = z * z;
    j.f = z2 * z / 3.0 - m.c1 * z2 / 2.0 + m.a * m.a * m.a;
    j.fz = z2 - m.c1 * z;
    j.fzz = 2.0 * z - m.c1;
    j.fp = {-z2 / 2.0, 3.0 * m.a * m.a};
    j.fzp = {-z, 0.0};
    return j;
}

double log_plus(double x) { return x > 1.0 ? std::log(x) : 0.0; }

double parameter_size(const ParamPoint& p) {
    if (const auto* u = std::get_if<Unicritical>(&p)) return std::abs(u->c);
    const auto& m = std::get<CubicModuli>(p);
    return std::max(std::abs(m.c1), std::abs(m.a));
}

Complex leading_coefficient(const ParamPoint& p) {
    return std::holds_alternative<Unicritical>(p) ? Complex(1.0) : Complex(1.0 / 3.0);
}

void check_critical_index(const ParamPoint& p, int j) {
    if (j < 0 || j >= critical_count(p)) {
        throw DomainError("critical index " + std::to_string(j) + " out of range");
    }
}

}  // namespace

void validate(const ParamPoint& p) {
    if (const auto* u = std::get_if<Unicritical>(&p); u && u->d < 2) {
        throw DomainError("unicritical degree must be at least 2");
    }
}

int degree(const ParamPoint& p) {
    if (const auto* u = std::get_if<Unicritical>(&p)) return u->d;
    return 3;
}

int critical_count(const ParamPoint& p) { return std::holds_alternative<Unicritical>(p) ? 1 : 2; }

int parameter_count(const ParamPoint& p) { return std::holds_alternative<Unicritical>(p) ? 1 : 2; }

Complex critical_point(const ParamPoint& p, int j) {
    check_critical_index(p, j);
    if (j == 0) return 0.0;
    return std::get<CubicModuli>(p).c1;
}

ParamVector parameters(const ParamPoint& p) {
    if (const auto* u = std::get_if<Unicritical>(&p)) return {u->c, 0.0};
    const auto& m = std::get<CubicModuli>(p);
    return {m.c1, m.a};
}

ParamPoint with_parameters(const ParamPoint& like, const ParamVector& v) {
    if (const auto* u = std::get_if<Unicritical>(&like)) return Unicritical{u->d, v[0]};
    return CubicModuli{v[0], v[1]};
}

Complex apply(const ParamPoint& p, Complex z) { return map_jet(p, z).f; }

Complex map_derivative(const ParamPoint& p, Complex z) { return map_jet(p, z).fz; }

bool is_escaped(Complex z) noexcept {
    return !std::isfinite(z.real()) || !std::isfinite(z.imag()) || std::abs(z) > kEscapeRadius;
}

Orbit orbit_critical(const ParamPoint& p, int j, int n, bool with_derivatives) {
    validate(p);
    check_critical_index(p, j);
    if (n < 0) throw DomainError("orbit length must be non-negative");
    Orbit out;
    out.points.reserve(static_cast<std::size_t>(n) + 1);
    Complex z = critical_point(p, j);
    ParamVector dz = j == 0 ? ParamVector{0.0, 0.0} : ParamVector{1.0, 0.0};
    out.points.push_back(z);
    if (with_derivatives) out.jacobian.push_back(dz);
    for (int k = 1; k <= n; ++k) {
        if (out.escaped_at < 0) {
            const MapJet m = map_jet(p, z);
            for (int i = 0; i < 2; ++i) dz[i] = m.fz * dz[i] + m.fp[i];
            z = m.f;
            if (is_escaped(z)) out.escaped_at = k;
        }
        if (out.escaped_at >= 0) {
            out.points.push_back(kEscaped);
            if (with_derivatives) out.jacobian.push_back({kEscaped, kEscaped});
        } else {
            out.points.push_back(z);
            if (with_derivatives) out.jacobian.push_back(dz);
        }
    }
    return out;
}

GreenValue green_at(const ParamPoint& p, Complex z, double target_accuracy) {
    validate(p);
    if (!(target_accuracy > 0.0)) throw DomainError("green: target accuracy must be positive");
    const int d = degree(p);
    const double numerator = log_plus(parameter_size(p)) + kGreenConstant;
    auto bound = [&](int n) { return numerator / std::pow(static_cast<double>(d), n); };

    // Switch to log coordinates before z^d could overflow.
    const double escape = std::min(kEscapeRadius, std::pow(1e300, 1.0 / d));
    int n = 0;
    constexpr int kMaxIterations = 100000;
    while (n < kMaxIterations) {
        if (std::abs(z) > escape) break;
        if (bound(n) <= target_accuracy) {
            return {log_plus(std::abs(z)) / std::pow(static_cast<double>(d), n), bound(n), n};
        }
        z = apply(p, z);
        ++n;
    }

    // Telescoping continuation in log coordinates L = log z:
    // log f(z) = log(lead) + d L + log(1 + lower(z) / (lead z^d)).
    const Complex lead = leading_coefficient(p);
    double ell = std::log(std::abs(z));
    double theta = std::arg(z);
    while (bound(n) > target_accuracy && n < kMaxIterations) {
        const Complex inv_z = std::polar(std::exp(-ell), -theta);
        Complex x;
        if (const auto* u = std::get_if<Unicritical>(&p)) {
            x = u->c * ipow(inv_z, u->d);
        } else {
            const auto& m = std::get<CubicModuli>(p);
            x = -1.5 * m.c1 * inv_z + 3.0 * m.a * m.a * m.a * inv_z * inv_z * inv_z;
        }
        if (std::abs(x) < 1e-300) break;
        const Complex log1px = std::abs(x) < 1e-8 ? x : std::log(1.0 + x);
        ell = std::log(std::abs(lead)) + d * ell + log1px.real();
        theta = std::remainder(std::arg(lead) + d * theta + log1px.imag(), 2.0 * std::numbers::pi);
        ++n;
    }
    // Fixed point of the affine recursion: g = d^-n (ell + log|lead| / (d-1)).
    // Once the lower-order terms underflow the closed form is exact, so the
    // count can be advanced to the level the bound asks for.
    const double value =
        (ell + std::log(std::abs(lead)) / (d - 1)) / std::pow(static_cast<double>(d), n);
    while (bound(n) > target_accuracy && n < kMaxIterations) ++n;
    return {std::max(value, 0.0), bound(n), n};
}

GreenValue green(const ParamPoint& p, int j, double target_accuracy) {
    return green_at(p, critical_point(p, j), target_accuracy);
}

namespace {

template <class JetFn>
CycleJet refine_cycle_with(const JetFn& jet_at, Complex z0, int period) {
    if (period < 1) throw DomainError("cycle period must be positive");
    Complex z = z0;
    bool converged = false;
    int extra = 0;
    for (int it = 0; it < 80; ++it) {
        Complex w = z, lambda = 1.0;
        for (int i = 0; i < period; ++i) {
            const MapJet m = jet_at(w);
            lambda *= m.fz;
            w = m.f;
        }
        const Complex denom = lambda - 1.0;
        if (is_escaped(w) || denom == Complex{}) break;
        const Complex step = (w - z) / denom;
        if (!std::isfinite(step.real()) || !std::isfinite(step.imag())) break;
        z -= step;
        // Once the step is small, take two more to reach rounding level.
        if (converged || std::abs(step) <= 1e-11 * std::max(1.0, std::abs(z))) {
            converged = true;
            if (++extra > 2 || std::abs(step) <= 1e-16 * std::max(1.0, std::abs(z))) break;
        }
    }
    if (!converged) {
        throw NearParabolic("Newton refinement of a period-" + std::to_string(period) +
                            " cycle diverged (near-parabolic parameter?)");
    }

    // Jets along the cycle: lambda, d lambda/d z0, d lambda/dp, d z_i/dp.
    Complex w = z, lambda = 1.0, dlambda_dz = 0.0, u = 1.0;
    ParamVector dlambda_dp{}, v{};
    for (int i = 0; i < period; ++i) {
        const MapJet m = jet_at(w);
        for (int k = 0; k < 2; ++k) {
            dlambda_dp[k] = dlambda_dp[k] * m.fz + lambda * (m.fzz * v[k] + m.fzp[k]);
            v[k] = m.fz * v[k] + m.fp[k];
        }
        dlambda_dz = dlambda_dz * m.fz + lambda * m.fzz * u;
        u *= m.fz;
        lambda *= m.fz;
        w = m.f;
    }
    CycleJet jet;
    jet.z = z;
    jet.multiplier = lambda;
    for (int k = 0; k < 2; ++k) {
        jet.dz[k] = -v[k] / (lambda - 1.0);
        jet.dmultiplier[k] = dlambda_dp[k] + dlambda_dz * jet.dz[k];
    }
    return jet;
}

}  // namespace

CycleJet refine_cycle(const ParamPoint& p, Complex z0, int period) {
    validate(p);
    return refine_cycle_with([&](Complex w) { return map_jet(p, w); }, z0, period);
}

CycleJet refine_cycle(const CubicChart& p, Complex z0, int period) {
    const CubicModuli m{p.c1, 0.0};
    return refine_cycle_with(
        [&](Complex w) {
            MapJet j = map_jet(m, w);
            j.f += p.u;
            j.fp[1] = 1.0;
            return j;
        },
        z0, period);
}

std::optional<Cycle> find_cycle(const ParamPoint& p, int j, int max_period, const CycleSearch& opts) {
    validate(p);
    check_critical_index(p, j);
    if (max_period < 1) throw DomainError("find_cycle: max_period must be positive");
    Complex z = critical_point(p, j);
    for (int i = 0; i < opts.burn_in; ++i) {
        z = apply(p, z);
        if (is_escaped(z)) return std::nullopt;
    }
    int period = 0;
    Complex w = z;
    for (int m = 1; m <= max_period; ++m) {
        w = apply(p, w);
        if (is_escaped(w)) return std::nullopt;
        if (std::abs(w - z) < opts.return_tolerance) {
            period = m;
            break;
        }
    }
    if (period == 0) return std::nullopt;

    const CycleJet jet = refine_cycle(p, z, period);
    if (!(std::abs(jet.multiplier) < 1.0)) {
        throw NearParabolic("refined cycle of period " + std::to_string(period) + " is not attracting");
    }
    Cycle cycle;
    cycle.period = period;
    cycle.multiplier = jet.multiplier;
    Complex x = jet.z;
    for (int i = 0; i < period; ++i) {
        cycle.points.push_back(x);
        x = apply(p, x);
    }
    return cycle;
}

double chordal_distance(Complex z, Complex w) {
    const bool zi = is_escaped(z), wi = is_escaped(w);
    if (zi && wi) return 0.0;
    if (zi) return 1.0 / std::sqrt(1.0 + std::norm(w));
    if (wi) return 1.0 / std::sqrt(1.0 + std::norm(z));
    return std::abs(z - w) / (std::sqrt(1.0 + std::norm(z)) * std::sqrt(1.0 + std::norm(w)));
}

std::vector<GapSample> przytycki_gap(const ParamPoint& p, int j, int N) {
    if (N < 1) throw DomainError("przytycki_gap: N must be positive");
    const Orbit orbit = orbit_critical(p, j, N);
    const Complex c = orbit.points.front();
    std::vector<GapSample> out;
    out.reserve(static_cast<std::size_t>(N));
    for (int n = 1; n <= N; ++n) out.push_back({n, chordal_distance(orbit.points[n], c)});
    return out;
}

GapFit fit_gap(const std::vector<GapSample>& gaps) {
    GapFit fit;
    std::vector<std::pair<double, double>> xy;
    for (const auto& g : gaps) {
        if (g.gap > 0.0) xy.emplace_back(g.n, std::log(g.gap));
    }
    if (xy.empty()) return fit;
    if (xy.size() >= 2) {
        double mx = 0, my = 0;
        for (auto [x, y] : xy) {
            mx += x;
            my += y;
        }
        mx /= xy.size();
        my /= xy.size();
        double sxy = 0, sxx = 0;
        for (auto [x, y] : xy) {
            sxy += (x - mx) * (y - my);
            sxx += (x - mx) * (x - mx);
        }
        fit.decay_rate = sxx > 0 ? -sxy / sxx : 0.0;
    }
    fit.growth = std::max(1.0, std::exp(fit.decay_rate));
    double kappa = 1.0;
    for (auto [x, y] : xy) kappa = std::min(kappa, std::exp(y + x * std::log(fit.growth)));
    fit.kappa = kappa;
    return fit;
}

double spherical_lipschitz_estimate(const ParamPoint& p, int radial, int angular) {
    validate(p);
    double best = 0.0;
    for (int i = 0; i < radial; ++i) {
        // Polar angle on the sphere, mapped by stereographic projection.
        const double phi = std::numbers::pi * (i + 0.5) / radial;
        const double r = std::tan(phi / 2.0);
        for (int k = 0; k < angular; ++k) {
            const Complex z = std::polar(r, 2.0 * std::numbers::pi * k / angular);
            const MapJet m = map_jet(p, z);
            if (is_escaped(m.f)) continue;
            best = std::max(best, std::abs(m.fz) * (1.0 + std::norm(z)) / (1.0 + std::norm(m.f)));
        }
    }
    return best;
}

}  // namespace dynlab
