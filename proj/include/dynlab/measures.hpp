#pragma once

// Point measures on parameter space, compactly supported radial bumps with
// closed-form norms, the external-ray sampler of the harmonic measure of
// the Multibrot set, discrepancy series and rate regressions.

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "dynlab/loci.hpp"
#include "dynlab/polycore.hpp"

namespace dynlab {

/// A point of C or C^2; the second coordinate is ignored in dimension 1.
using MeasurePoint = std::array<Complex, 2>;

struct PointMeasure {
    /// Complex dimension, 1 or 2.
    int dim = 1;
    std::vector<MeasurePoint> points;
    std::vector<double> weights;
    /// Set for signed or unnormalized measures; skips the sum-to-one check.
    bool unnormalized = false;

    /// Throws DomainError when lengths differ, a weight is negative or the
    /// weights do not sum to one (unless flagged).
    void validate() const;
    double total_weight() const;
};

PointMeasure uniform_measure(const std::vector<Complex>& points);
PointMeasure uniform_measure(const std::vector<MeasurePoint>& points, int dim);
/// Probability measure on the points of a locus, weighted by multiplicity.
PointMeasure locus_measure(const LocusResult& locus);
/// a * m1 + b * m2 as one measure (flagged unnormalized unless a + b = 1).
PointMeasure combine(const PointMeasure& m1, double a, const PointMeasure& m2, double b);

/// phi(x) = (1 - |x - center|^2 / r^2)^3 inside the ball, 0 outside.
struct TestFunction {
    int dim = 1;
    MeasurePoint center{};
    double radius = 1.0;
    double sup_norm = 1.0;
    /// sup |grad phi| and sup |Laplacian phi|, in closed form.
    double gradient_sup = 0.0;
    double laplacian_sup = 0.0;

    double operator()(const MeasurePoint& x) const;
    double operator()(Complex z) const { return (*this)(MeasurePoint{z, 0.0}); }
    /// Radial Laplacian in 2 * dim real variables.
    double laplacian(const MeasurePoint& x) const;
    /// sup|phi| + sup|grad phi| + sup|Laplacian phi|.
    double c2_norm() const { return sup_norm + gradient_sup + laplacian_sup; }
};

TestFunction bump(Complex center, double radius);
TestFunction bump(const MeasurePoint& center, double radius, int dim);

/// sum_i w_i phi(p_i) with compensated summation.
double pair(const PointMeasure& m, const TestFunction& phi);

struct HarmonicOptions {
    /// Potential at which every ray starts.
    double t0 = 0.6931471805599453;
    /// Newton solves per halving of the potential.
    int substeps = 4;
    /// Halvings of the local step allowed before a ray is given up.
    int max_retries = 8;
    double newton_tol = 1e-13;
};

struct HarmonicSample {
    PointMeasure measure;
    /// Ray index i (angle i / K) of each returned point.
    std::vector<std::size_t> ray_index;
    std::vector<std::size_t> failed_rays;
};

/// Endpoints at potential t_min of the external rays of angles i / K,
/// weighted uniformly over the rays that traced successfully.
HarmonicSample harmonic_sample(int d, std::size_t K, double t_min, const HarmonicOptions& opts = {});

/// One ray of angle num / den traced down to potential t_min.
Complex external_ray_point(int d, std::uint64_t num, std::uint64_t den, double t_min, const HarmonicOptions& opts = {});

struct DiscrepancySample {
    int n = 0;
    double delta = 0.0;
};

struct IndexedMeasure {
    int n = 0;
    PointMeasure measure;
};

/// Delta_n = |pair(mu_n, phi) - pair(reference, phi)|.
std::vector<DiscrepancySample> discrepancy_series(const std::vector<IndexedMeasure>& sequence,
                                                  const PointMeasure& reference, const TestFunction& phi);
/// Delta_n = |pair(mu_{n+1}, phi) - pair(mu_n, phi)| over consecutive
/// entries of the sequence.
std::vector<DiscrepancySample> discrepancy_series_successive(const std::vector<IndexedMeasure>& sequence,
                                                             const TestFunction& phi);

enum class RateModel { NOverDn, FreeSlope };

struct RateFit {
    RateModel model = RateModel::FreeSlope;
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    int n_min = 0;
    int n_max = 0;
    /// NOverDn only: C with Delta_n ~ C n / d^n, and
    /// max |Delta_n d^n / (n C) - 1|.
    double c_hat = 0.0;
    double relative_spread = 0.0;
};

/// Least squares on (n, log Delta_n) over finite positive samples. Throws
/// DomainError with fewer than three usable points.
RateFit rate_fit(const std::vector<DiscrepancySample>& series, RateModel model, int d);

}  // namespace dynlab
