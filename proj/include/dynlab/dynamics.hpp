#pragma once

// The unicritical family z^d + c and the cubic moduli family
// P(z) = z^3/3 - c1 z^2/2 + a^3 with marked critical points 0 and c1:
// orbits, parameter derivatives, escape rates, attracting cycles.

#include <array>
#include <limits>
#include <optional>
#include <stdexcept>
#include <variant>
#include <vector>

#include "dynlab/polycore.hpp"

namespace dynlab {

struct Unicritical {
    int d = 2;
    Complex c;
};

/// Degree-3 member of the moduli family; critical points 0 and c1.
struct CubicModuli {
    Complex c1;
    Complex a;
};

using ParamPoint = std::variant<Unicritical, CubicModuli>;

/// Up to two complex parameters: (c) or (c1, a).
using ParamVector = std::array<Complex, 2>;

class NearParabolic : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Throws DomainError for a unicritical degree below 2.
void validate(const ParamPoint& p);

int degree(const ParamPoint& p);
int critical_count(const ParamPoint& p);
int parameter_count(const ParamPoint& p);
Complex critical_point(const ParamPoint& p, int j);
/// Parameters as a vector: (c, 0) or (c1, a).
ParamVector parameters(const ParamPoint& p);
/// Same variant as `like`, with the parameters replaced.
ParamPoint with_parameters(const ParamPoint& like, const ParamVector& v);

Complex apply(const ParamPoint& p, Complex z);
Complex map_derivative(const ParamPoint& p, Complex z);

/// Orbit entries beyond escape carry this marker instead of overflowing.
inline const Complex kEscaped{std::numeric_limits<double>::infinity(), 0.0};
inline constexpr double kEscapeRadius = 1e100;
bool is_escaped(Complex z) noexcept;

struct Orbit {
    /// f^k(c_j) for k = 0..n
    std::vector<Complex> points;
    /// d f^k(c_j) / d parameter, one row per iterate (empty unless requested)
    std::vector<ParamVector> jacobian;
    /// First escaped index, or -1.
    int escaped_at = -1;
};

Orbit orbit_critical(const ParamPoint& p, int j, int n, bool with_derivatives = false);

struct GreenValue {
    double value = 0.0;
    double error_bound = 0.0;
    int iterations_used = 0;
};

/// Additive constant in the bound |d^-n log+|f^n(z)| - g(z)| <=
/// (log+ max(|c|,|a|) + C) / d^n, calibrated on both families.
inline constexpr double kGreenConstant = 2.0;

GreenValue green_at(const ParamPoint& p, Complex z, double target_accuracy);
GreenValue green(const ParamPoint& p, int j, double target_accuracy);

struct Cycle {
    std::vector<Complex> points;
    int period = 0;
    Complex multiplier;
};

struct CycleSearch {
    int burn_in = 1000;
    double return_tolerance = 1e-6;
};

/// Attracting cycle of period <= max_period that attracts c_j, or nothing
/// when the orbit escapes or does not settle. Throws NearParabolic when the
/// refinement of a detected cycle fails.
std::optional<Cycle> find_cycle(const ParamPoint& p, int j, int max_period, const CycleSearch& opts = {});

/// A periodic point refined by Newton together with the multiplier and its
/// total derivative along the parameters (the periodic point is moved with
/// the parameters by the implicit function theorem).
struct CycleJet {
    Complex z;
    Complex multiplier;
    ParamVector dmultiplier{};
    ParamVector dz{};
};

CycleJet refine_cycle(const ParamPoint& p, Complex z0, int period);

/// The cubic family in the chart (c1, u = a^3). The family depends on a
/// only through a^3, and the multiplier map stays regular at a = 0 here.
struct CubicChart {
    Complex c1;
    Complex u;
};

/// As above with derivatives taken along (c1, u).
CycleJet refine_cycle(const CubicChart& p, Complex z0, int period);

/// |z - w| / (sqrt(1+|z|^2) sqrt(1+|w|^2)); infinity handled as the north pole.
double chordal_distance(Complex z, Complex w);

struct GapSample {
    int n = 0;
    double gap = 0.0;
};

/// Chordal gaps between f^n(c_j) and c_j for n = 1..N.
std::vector<GapSample> przytycki_gap(const ParamPoint& p, int j, int N);

struct GapFit {
    /// -slope of log(gap) against n
    double decay_rate = 0.0;
    /// Fitted M: max(1, exp(decay_rate)).
    double growth = 1.0;
    /// Largest kappa <= 1 with gap_n >= kappa * growth^-n for all samples.
    double kappa = 0.0;
};

GapFit fit_gap(const std::vector<GapSample>& gaps);

/// sup over the sphere of |f'(z)| (1+|z|^2) / (1+|f(z)|^2), estimated on a
/// polar grid; the Lipschitz constant of f in the chordal metric.
double spherical_lipschitz_estimate(const ParamPoint& p, int radial = 400, int angular = 256);

}  // namespace dynlab
