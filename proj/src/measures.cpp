#include "dynlab/measures.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "dynlab/parallel.hpp"

namespace dynlab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Neumaier's variant of Kahan summation.
class CompensatedSum {
public:
    void add(double x) {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x)) {
            comp_ += (sum_ - t) + x;
        } else {
            comp_ += (x - t) + sum_;
        }
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0, comp_ = 0.0;
};

double squared_distance(const MeasurePoint& a, const MeasurePoint& b, int dim) {
    double s = std::norm(a[0] - b[0]);
    if (dim == 2) s += std::norm(a[1] - b[1]);
    return s;
}

std::uint64_t mulmod(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
    return static_cast<std::uint64_t>(static_cast<unsigned __int128>(a) * b % m);
}

/// Fractional part of d^n * num / den, exactly.
double angle_fraction(int d, int n, std::uint64_t num, std::uint64_t den) {
    std::uint64_t r = num % den;
    for (int i = 0; i < n; ++i) r = mulmod(r, static_cast<std::uint64_t>(d), den);
    return static_cast<double>(r) / static_cast<double>(den);
}

/// Smallest n >= 0 with d^n t >= 1, together with d^n.
int level_for(int d, double t, double& scale) {
    int n = 0;
    scale = 1.0;
    while (scale * t < 1.0) {
        scale *= d;
        ++n;
    }
    return n;
}

struct RayTracer {
    int d;
    std::uint64_t num, den;
    const HarmonicOptions& opt;

    /// Newton on log p_c^{n+1}(0) = d^n (t + 2 pi i theta).
    bool solve(Complex& c, double t) const {
        double scale = 1.0;
        const int n = level_for(d, t, scale);
        const double target_re = scale * t;
        const double target_im = kTwoPi * angle_fraction(d, n, num, den);
        Complex x = c;
        for (int it = 0; it < 60; ++it) {
            Complex z = 0.0, dz = 0.0;
            for (int k = 0; k <= n; ++k) {
                Complex zd1 = 1.0;
                for (int e = 0; e < d - 1; ++e) zd1 *= z;
                dz = static_cast<double>(d) * zd1 * dz + 1.0;
                z = zd1 * z + x;
            }
            if (z == Complex{} || !std::isfinite(std::abs(z)) || dz == Complex{}) return false;
            const Complex log_z = std::log(z);
            const double wrap = std::round((target_im - log_z.imag()) / kTwoPi);
            const Complex diff = Complex(target_re, target_im) - (log_z + Complex(0.0, kTwoPi * wrap));
            const Complex step = diff / (dz / z);
            if (!std::isfinite(step.real()) || !std::isfinite(step.imag())) return false;
            x += step;
            if (std::abs(step) <= opt.newton_tol * (1.0 + std::abs(x))) {
                c = x;
                return true;
            }
        }
        return false;
    }

    bool trace(double t_min, Complex& out) const {
        double t = opt.t0;
        const double theta = static_cast<double>(num % den) / static_cast<double>(den);
        Complex c = std::polar(std::exp(t), kTwoPi * theta);
        if (!solve(c, t)) return false;
        const double factor = std::pow(0.5, 1.0 / std::max(1, opt.substeps));
        while (t > t_min) {
            double t_next = std::max(t_min, t * factor);
            int retries = 0;
            for (;;) {
                Complex trial = c;
                if (solve(trial, t_next)) {
                    c = trial;
                    t = t_next;
                    break;
                }
                if (++retries > opt.max_retries) return false;
                t_next = std::sqrt(t * t_next);
            }
        }
        out = c;
        return true;
    }
};

}  // namespace

void PointMeasure::validate() const {
    if (dim != 1 && dim != 2) throw DomainError("PointMeasure: dimension must be 1 or 2");
    if (points.size() != weights.size()) throw DomainError("PointMeasure: points and weights differ in length");
    for (double w : weights) {
        if (!(w >= 0.0) && !unnormalized) throw DomainError("PointMeasure: negative weight");
    }
    if (!unnormalized && !points.empty() && std::abs(total_weight() - 1.0) > 1e-12) {
        throw DomainError("PointMeasure: weights do not sum to one");
    }
}

double PointMeasure::total_weight() const {
    CompensatedSum s;
    for (double w : weights) s.add(w);
    return s.value();
}

PointMeasure uniform_measure(const std::vector<Complex>& points) {
    PointMeasure m;
    m.dim = 1;
    for (const Complex z : points) m.points.push_back({z, 0.0});
    m.weights.assign(points.size(), points.empty() ? 0.0 : 1.0 / static_cast<double>(points.size()));
    return m;
}

PointMeasure uniform_measure(const std::vector<MeasurePoint>& points, int dim) {
    PointMeasure m;
    m.dim = dim;
    m.points = points;
    m.weights.assign(points.size(), points.empty() ? 0.0 : 1.0 / static_cast<double>(points.size()));
    m.validate();
    return m;
}

PointMeasure locus_measure(const LocusResult& locus) {
    PointMeasure m;
    m.dim = 1;
    const double total = static_cast<double>(locus.counted());
    for (std::size_t i = 0; i < locus.points.size(); ++i) {
        const ParamPoint& p = locus.points[i];
        if (std::holds_alternative<CubicModuli>(p)) m.dim = 2;
        const ParamVector v = parameters(p);
        m.points.push_back({v[0], std::holds_alternative<CubicModuli>(p) ? v[1] : Complex{}});
        const double mult = locus.multiplicity.empty() ? 1.0 : locus.multiplicity[i];
        m.weights.push_back(mult / total);
    }
    return m;
}

PointMeasure combine(const PointMeasure& m1, double a, const PointMeasure& m2, double b) {
    if (m1.dim != m2.dim) throw DomainError("combine: dimension mismatch");
    PointMeasure m;
    m.dim = m1.dim;
    m.points = m1.points;
    m.points.insert(m.points.end(), m2.points.begin(), m2.points.end());
    for (double w : m1.weights) m.weights.push_back(a * w);
    for (double w : m2.weights) m.weights.push_back(b * w);
    m.unnormalized = m1.unnormalized || m2.unnormalized || std::abs(a + b - 1.0) > 1e-15 || a < 0.0 || b < 0.0;
    return m;
}

double TestFunction::operator()(const MeasurePoint& x) const {
    const double s = squared_distance(x, center, dim) / (radius * radius);
    if (s >= 1.0) return 0.0;
    const double v = 1.0 - s;
    return v * v * v;
}

double TestFunction::laplacian(const MeasurePoint& x) const {
    const double s = squared_distance(x, center, dim) / (radius * radius);
    if (s >= 1.0) return 0.0;
    const double m = 2.0 * dim;
    return (24.0 * s * (1.0 - s) - 6.0 * m * (1.0 - s) * (1.0 - s)) / (radius * radius);
}

TestFunction bump(const MeasurePoint& center, double radius, int dim) {
    if (!(radius > 0.0)) throw DomainError("bump: radius must be positive");
    if (dim != 1 && dim != 2) throw DomainError("bump: dimension must be 1 or 2");
    TestFunction f;
    f.dim = dim;
    f.center = center;
    f.radius = radius;
    f.sup_norm = 1.0;
    // |grad| = 6 x (1 - x^2)^2 / r with x = rho / r, largest at x^2 = 1/5.
    f.gradient_sup = 6.0 / std::sqrt(5.0) * 0.64 / radius;
    // |Laplacian| peaks at the centre, where it equals 6m / r^2.
    f.laplacian_sup = 12.0 * dim / (radius * radius);
    return f;
}

TestFunction bump(Complex center, double radius) { return bump(MeasurePoint{center, 0.0}, radius, 1); }

double pair(const PointMeasure& m, const TestFunction& phi) {
    if (m.dim != phi.dim) throw DomainError("pair: dimension mismatch between measure and test function");
    if (m.points.size() != m.weights.size()) throw DomainError("pair: points and weights differ in length");
    CompensatedSum s;
    for (std::size_t i = 0; i < m.points.size(); ++i) s.add(m.weights[i] * phi(m.points[i]));
    return s.value();
}

Complex external_ray_point(int d, std::uint64_t num, std::uint64_t den, double t_min, const HarmonicOptions& opts) {
    if (d < 2) throw DomainError("external_ray_point: d must be at least 2");
    if (den == 0) throw DomainError("external_ray_point: zero denominator");
    if (!(t_min > 0.0)) throw DomainError("external_ray_point: t_min must be positive");
    const RayTracer tracer{d, num, den, opts};
    Complex c;
    if (!tracer.trace(t_min, c)) throw NonConvergence("external ray tracing failed", 0.0, 0);
    return c;
}

HarmonicSample harmonic_sample(int d, std::size_t K, double t_min, const HarmonicOptions& opts) {
    if (d < 2) throw DomainError("harmonic_sample: d must be at least 2");
    if (K < 1) throw DomainError("harmonic_sample: K must be positive");
    if (!(t_min > 0.0)) throw DomainError("harmonic_sample: t_min must be positive");
    std::vector<Complex> ends(K);
    std::vector<char> ok(K, 0);
    parallel_for(K, [&](std::size_t i) {
        HarmonicOptions local = opts;
        const RayTracer tracer{d, i, K, local};
        ok[i] = tracer.trace(t_min, ends[i]) ? 1 : 0;
        // Retry once with finer steps before giving the ray up.
        if (!ok[i]) {
            local.substeps *= 4;
            const RayTracer fine{d, i, K, local};
            ok[i] = fine.trace(t_min, ends[i]) ? 1 : 0;
        }
    });
    HarmonicSample out;
    out.measure.dim = 1;
    std::vector<Complex> good;
    for (std::size_t i = 0; i < K; ++i) {
        if (ok[i]) {
            good.push_back(ends[i]);
            out.ray_index.push_back(i);
        } else {
            out.failed_rays.push_back(i);
        }
    }
    out.measure = uniform_measure(good);
    return out;
}

std::vector<DiscrepancySample> discrepancy_series(const std::vector<IndexedMeasure>& sequence,
                                                  const PointMeasure& reference, const TestFunction& phi) {
    if (sequence.empty()) throw DomainError("discrepancy_series: empty sequence");
    const double ref = pair(reference, phi);
    std::vector<DiscrepancySample> out;
    for (const auto& m : sequence) out.push_back({m.n, std::abs(pair(m.measure, phi) - ref)});
    return out;
}

std::vector<DiscrepancySample> discrepancy_series_successive(const std::vector<IndexedMeasure>& sequence,
                                                             const TestFunction& phi) {
    if (sequence.empty()) throw DomainError("discrepancy_series: empty sequence");
    std::vector<DiscrepancySample> out;
    for (std::size_t i = 0; i + 1 < sequence.size(); ++i) {
        out.push_back({sequence[i].n, std::abs(pair(sequence[i + 1].measure, phi) - pair(sequence[i].measure, phi))});
    }
    return out;
}

RateFit rate_fit(const std::vector<DiscrepancySample>& series, RateModel model, int d) {
    if (d < 2) throw DomainError("rate_fit: d must be at least 2");
    std::vector<double> xs, ys;
    for (const auto& s : series) {
        if (std::isfinite(s.delta) && s.delta > 0.0) {
            xs.push_back(s.n);
            ys.push_back(std::log(s.delta));
        }
    }
    if (xs.size() < 3) throw DomainError("rate_fit: fewer than three usable points");
    const double count = static_cast<double>(xs.size());
    RateFit fit;
    fit.model = model;
    fit.n_min = static_cast<int>(*std::min_element(xs.begin(), xs.end()));
    fit.n_max = static_cast<int>(*std::max_element(xs.begin(), xs.end()));
    double mean_y = 0.0;
    for (double y : ys) mean_y += y;
    mean_y /= count;
    double ss_tot = 0.0;
    for (double y : ys) ss_tot += (y - mean_y) * (y - mean_y);

    double ss_res = 0.0;
    if (model == RateModel::FreeSlope) {
        double mean_x = 0.0;
        for (double x : xs) mean_x += x;
        mean_x /= count;
        double sxx = 0.0, sxy = 0.0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            sxx += (xs[i] - mean_x) * (xs[i] - mean_x);
            sxy += (xs[i] - mean_x) * (ys[i] - mean_y);
        }
        fit.slope = sxx > 0.0 ? sxy / sxx : 0.0;
        fit.intercept = mean_y - fit.slope * mean_x;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            const double r = ys[i] - (fit.intercept + fit.slope * xs[i]);
            ss_res += r * r;
        }
    } else {
        // log Delta_n = log C + log n - n log d, with only C free.
        const double log_d = std::log(static_cast<double>(d));
        std::vector<double> ratios;
        double mean_log_c = 0.0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            const double lc = ys[i] + xs[i] * log_d - std::log(xs[i]);
            ratios.push_back(lc);
            mean_log_c += lc;
        }
        mean_log_c /= count;
        fit.c_hat = std::exp(mean_log_c);
        fit.slope = -log_d;
        fit.intercept = mean_log_c;
        for (double lc : ratios) {
            ss_res += (lc - mean_log_c) * (lc - mean_log_c);
            fit.relative_spread = std::max(fit.relative_spread, std::abs(std::exp(lc - mean_log_c) - 1.0));
        }
    }
    fit.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : (ss_res == 0.0 ? 1.0 : 0.0);
    return fit;
}

}  // namespace dynlab
