#pragma once

// Parameter loci: centres and exact-period centres of the unicritical
// family, multiplier loci by continuation inside hyperbolic components,
// centre intersections in the cubic moduli space with transversality
// certificates, cubic multiplier intersections, and preimage loci.

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "dynlab/dynamics.hpp"
#include "dynlab/polycore.hpp"

namespace dynlab {

enum class LocusMethod { DirectRoots, Continuation, MultistartNewton, Homotopy };

std::string_view to_string(LocusMethod m);

struct LocusResult {
    std::vector<ParamPoint> points;
    std::vector<double> residuals;
    std::size_t expected_count = 0;
    LocusMethod method = LocusMethod::DirectRoots;
    /// Per-point multiplicity; empty when every point is simple.
    std::vector<int> multiplicity;

    /// Number of points counted with multiplicity.
    std::size_t counted() const;
    double worst_residual() const;
};

/// The number of points found contradicts a count theorem.
class CountMismatch : public std::runtime_error {
public:
    CountMismatch(const std::string& what, std::size_t found, std::size_t expected);
    std::size_t found() const noexcept { return found_; }
    std::size_t expected() const noexcept { return expected_; }

private:
    std::size_t found_, expected_;
};

class ContinuationFailure : public std::runtime_error {
public:
    ContinuationFailure(const std::string& where, double t_reached);
    double t_reached() const noexcept { return t_; }

private:
    double t_;
};

class TransversalityViolation : public std::runtime_error {
public:
    TransversalityViolation(double sigma_min, double threshold);
    double sigma_min() const noexcept { return sigma_; }

private:
    double sigma_;
};

/// Separation required between distinct points of a cubic locus.
inline constexpr double kDedupRadius = 1e-6;
/// Separation required between unicritical roots. Tip centres near -2 are
/// only about 4^-n apart, far below kDedupRadius at n = 13.
inline constexpr double kRootDedupRadius = 1e-12;

/// Per(n) (all periods dividing n) or the exact-period centres.
LocusResult centers_unicritical(int d, int n, bool exact_period, const AberthOptions& opts = {});

/// Roots of Q_n(c) - z.
LocusResult preimage_locus(int d, int n, Complex z, const AberthOptions& opts = {});

struct ContinuationOptions {
    double ratio = 0.7;
    double newton_tol = 1e-12;
    int max_steps = 400;
    /// The first continuation level is ratio^initial_exponent.
    int initial_exponent = 40;
};

/// Per(n, w): for each k | n, the exact-period-k parameters whose cycle has
/// multiplier w^{k/n} (principal branch), d - 1 per component when w != 0.
LocusResult multiplier_locus(int d, int n, Complex w, const ContinuationOptions& opts = {});
/// Per*(n, w): only the exact-period-n part, (d - 1) d_n / d points.
LocusResult exact_multiplier_locus(int d, int n, Complex w, const ContinuationOptions& opts = {});

enum class CubicSolver { Auto, MultistartNewton, Homotopy };

struct CubicSeeding {
    /// Grid points per real coordinate in the first pass.
    int grid = 6;
    /// Each refinement doubles the grid.
    int max_refinements = 2;
    CubicSolver solver = CubicSolver::Auto;
    /// Auto switches to the homotopy above this expected count.
    std::size_t multistart_limit = 100;
    std::uint64_t seed = 1;
};

/// Per*_0(n0) and Per*_1(n1) intersected: the critical point 0 has exact
/// period n0 and c1 has exact period n1.
LocusResult centers_cubic(int n0, int n1, const CubicSeeding& seeding = {});

/// Solutions of the same system in the (c1, u = a^3) chart; m0 may be 1.
/// Every returned point has the exact periods requested.
struct ChartSolutions {
    std::vector<CubicChart> points;
    std::size_t paths = 0;
    std::size_t failed_paths = 0;
};
ChartSolutions cubic_center_chart(int m0, int m1, std::uint64_t seed = 1);

struct Transversality {
    double sigma_min = 0.0;
    /// Relative deviation between the analytic and the central-difference
    /// Jacobian.
    double fd_deviation = 0.0;
};

/// Smallest singular value of the Jacobian of (P_{n0,0}, P_{n1,1}) at a
/// computed intersection. Throws TransversalityViolation below
/// 1e-10 * scale.
Transversality transversality_check(const CubicModuli& p, int n0, int n1);

/// Per*(n0, w0) and Per*(n1, w1) intersected, over both assignments of the
/// periods to the critical points. Points with a = 0 carry multiplicity 3.
LocusResult cubic_multiplier_locus(int n0, int n1, Complex w0, Complex w1, const ContinuationOptions& opts = {});

}  // namespace dynlab
