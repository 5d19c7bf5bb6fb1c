#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "dynlab/loci.hpp"
#include "dynlab/measures.hpp"

using namespace dynlab;

namespace {

// Five-point Laplacian in the real coordinates of each complex variable.
double fd_laplacian(const TestFunction& phi, MeasurePoint x, double h) {
    double sum = 0.0;
    const double centre = phi(x);
    for (int k = 0; k < phi.dim; ++k) {
        for (Complex dir : {Complex(1.0), Complex(0.0, 1.0)}) {
            MeasurePoint plus = x, minus = x;
            plus[k] += h * dir;
            minus[k] -= h * dir;
            sum += (phi(plus) - 2.0 * centre + phi(minus)) / (h * h);
        }
    }
    return sum;
}

// Mean of the roots of Q_n, -(subleading coefficient)/degree, from the
// recursion on the top two coefficients of Q_{k+1} = Q_k^d + c.
double centre_mean(int d, int n) {
    double degree = 1.0, sub = 0.0;
    for (int k = 1; k < n; ++k) {
        sub *= d;
        degree *= d;
        if (degree == 2.0) sub += 1.0;
    }
    return -sub / degree;
}

PointMeasure dirac(Complex z) { return uniform_measure(std::vector<Complex>{z}); }

}  // namespace

TEST_CASE("bump values and norms") {
    const TestFunction phi = bump(Complex(0.5, -0.5), 2.0);
    CHECK(phi(Complex(0.5, -0.5)) == doctest::Approx(1.0));
    CHECK(phi(Complex(1.5, -0.5)) == doctest::Approx(27.0 / 64.0));
    CHECK(phi(Complex(2.6, -0.5)) == 0.0);
    CHECK(phi.laplacian({Complex(0.5, -0.5), 0.0}) == doctest::Approx(-3.0));
    CHECK_THROWS_AS(bump(0.0, 0.0), DomainError);
    CHECK_THROWS_AS(bump(MeasurePoint{}, 1.0, 3), DomainError);
}

TEST_CASE("property: closed-form bump norms match a dense radial scan") {
    for (int dim : {1, 2}) {
        for (double r : {0.5, 2.0, 5.0}) {
            const TestFunction phi = bump(MeasurePoint{}, r, dim);
            const double h = 1e-4 * r;
            double grad = 0.0, lap = 0.0, sup = 0.0;
            for (int i = 0; i <= 2000; ++i) {
                const double rho = r * i / 2000.0;
                const MeasurePoint x{rho, 0.0};
                sup = std::max(sup, phi(x));
                if (rho + h < r && rho > h) {
                    grad = std::max(grad, std::abs(phi(MeasurePoint{rho + h, 0.0}) - phi(MeasurePoint{rho - h, 0.0})) / (2 * h));
                }
                lap = std::max(lap, std::abs(phi.laplacian(x)));
            }
            CHECK(sup == doctest::Approx(phi.sup_norm));
            CHECK(grad == doctest::Approx(phi.gradient_sup).epsilon(1e-5));
            CHECK(lap == doctest::Approx(phi.laplacian_sup).epsilon(1e-9));
            CHECK(phi.c2_norm() == doctest::Approx(phi.sup_norm + phi.gradient_sup + phi.laplacian_sup));
        }
    }
}

TEST_CASE("property: the radial Laplacian matches finite differences") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int dim : {1, 2}) {
        const TestFunction phi = bump(MeasurePoint{Complex(0.2, 0.1), Complex(-0.3, 0.0)}, 1.5, dim);
        for (int trial = 0; trial < 50; ++trial) {
            const MeasurePoint x{Complex(u(rng), u(rng)), dim == 2 ? Complex(u(rng), u(rng)) : Complex{}};
            CHECK(phi.laplacian(x) == doctest::Approx(fd_laplacian(phi, x, 1e-4)).epsilon(1e-5).scale(1.0));
        }
    }
}

TEST_CASE("pair examples") {
    const TestFunction phi = bump(0.0, 2.0);
    const PointMeasure m = uniform_measure(std::vector<Complex>{0.0, 1.0});
    CHECK(pair(m, phi) == doctest::Approx((1.0 + 27.0 / 64.0) / 2.0));
    CHECK(pair(dirac(3.0), phi) == 0.0);
    CHECK_THROWS_AS(pair(m, bump(MeasurePoint{}, 1.0, 2)), DomainError);
}

TEST_CASE("property: pairing is linear and bounded") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> g(0.0, 1.0);
    const TestFunction phi = bump(Complex(0.1, 0.2), 1.7);
    for (int trial = 0; trial < 40; ++trial) {
        std::vector<Complex> a(30), b(17);
        for (auto& z : a) z = {g(rng), g(rng)};
        for (auto& z : b) z = {g(rng), g(rng)};
        const PointMeasure ma = uniform_measure(a), mb = uniform_measure(b);
        const double s = std::abs(g(rng)), t = std::abs(g(rng));
        const PointMeasure mix = combine(ma, s, mb, t);
        CHECK(mix.unnormalized);
        CHECK(pair(mix, phi) == doctest::Approx(s * pair(ma, phi) + t * pair(mb, phi)).epsilon(1e-13));
        const double p = pair(ma, phi);
        CHECK(p >= 0.0);
        CHECK(p <= 1.0);
        CHECK_FALSE(combine(ma, 0.25, mb, 0.75).unnormalized);
    }
}

TEST_CASE("point measure validation") {
    PointMeasure m = uniform_measure(std::vector<Complex>{1.0, 2.0, 3.0});
    CHECK_NOTHROW(m.validate());
    CHECK(m.total_weight() == doctest::Approx(1.0));
    m.weights[0] = -0.1;
    CHECK_THROWS_AS(m.validate(), DomainError);
    m.weights = {0.5, 0.5, 0.5};
    CHECK_THROWS_AS(m.validate(), DomainError);
    m.unnormalized = true;
    CHECK_NOTHROW(m.validate());
    m.weights.pop_back();
    CHECK_THROWS_AS(m.validate(), DomainError);
}

TEST_CASE("locus_measure weights by multiplicity") {
    LocusResult r;
    r.points = {Unicritical{2, 0.0}, Unicritical{2, 1.0}};
    r.multiplicity = {3, 1};
    const PointMeasure m = locus_measure(r);
    REQUIRE(m.weights.size() == 2);
    CHECK(m.weights[0] == doctest::Approx(0.75));
    CHECK(m.weights[1] == doctest::Approx(0.25));
}

TEST_CASE("external rays land at known points") {
    CHECK(std::abs(external_ray_point(2, 1, 2, 1e-9) + 2.0) < 1e-6);
    // Rays landing at parabolic points approach them slowly in the potential,
    // so only monotone approach is checked there.
    double last = 1.0;
    for (double t : {1e-3, 1e-6, 1e-9}) {
        const Complex c = external_ray_point(2, 0, 1, t);
        CHECK(std::abs(c.imag()) < 1e-12);
        CHECK(c.real() > 0.25);
        CHECK(c.real() - 0.25 < last);
        last = c.real() - 0.25;
    }
    // The rays of angles 1/3 and 2/3 land together at the root of the
    // period-2 component.
    last = 1.0;
    for (double t : {1e-3, 1e-6, 1e-9}) {
        const Complex c = external_ray_point(2, 1, 3, t);
        CHECK(std::abs(c - std::conj(external_ray_point(2, 2, 3, t))) < 1e-9);
        CHECK(std::abs(c + 0.75) < last);
        last = std::abs(c + 0.75);
    }
    const Complex a = external_ray_point(3, 1, 4, 1e-6), b = external_ray_point(3, 3, 4, 1e-6);
    CHECK(std::abs(a - std::conj(b)) < 1e-9);
    CHECK_THROWS_AS(external_ray_point(2, 1, 0, 1e-6), DomainError);
}

TEST_CASE("property: harmonic samples respect conjugation and the Green level") {
    const double t_min = 1e-6;
    for (int d : {2, 3}) {
        const std::size_t K = 256;
        const HarmonicSample s = harmonic_sample(d, K, t_min);
        CHECK(s.failed_rays.empty());
        REQUIRE(s.measure.points.size() == K);
        CHECK_NOTHROW(s.measure.validate());
        for (std::size_t i = 0; i < K; ++i) {
            const Complex c = s.measure.points[i][0];
            const Complex mirror = s.measure.points[(K - s.ray_index[i]) % K][0];
            CHECK(std::abs(c - std::conj(mirror)) < 1e-9);
            const GreenValue g = green(Unicritical{d, c}, 0, 1e-9);
            CHECK(g.value > 0.0);
            CHECK(g.value <= 2.0 * t_min / d);
        }
    }
}

TEST_CASE("property: harmonic sample mean matches the centre mean of Q_16") {
    CHECK(centre_mean(2, 3) == doctest::Approx(-2.0 / 4.0));
    CHECK(centre_mean(3, 2) == doctest::Approx(0.0));
    const HarmonicSample s = harmonic_sample(2, 4096, 1e-6);
    Complex mean{};
    for (std::size_t i = 0; i < s.measure.points.size(); ++i) mean += s.measure.weights[i] * s.measure.points[i][0];
    CHECK(std::abs(mean.real() - centre_mean(2, 16)) < 5e-3);
    CHECK(std::abs(mean.imag()) < 5e-3);
}

TEST_CASE("property: centre measures approach the harmonic measure") {
    const TestFunction phi = bump(-0.5, 2.0);
    const double nu = pair(harmonic_sample(2, 4096, 1e-6).measure, phi);
    std::vector<DiscrepancySample> series;
    for (int n = 8; n <= 13; ++n) {
        series.push_back({n, std::abs(pair(locus_measure(centers_unicritical(2, n, false)), phi) - nu)});
    }
    int inversions = 0;
    for (std::size_t i = 1; i < series.size(); ++i) inversions += series[i].delta > series[i - 1].delta;
    CHECK(inversions <= 1);
    const RateFit f = rate_fit(series, RateModel::NOverDn, 2);
    CHECK(series.back().delta < f.c_hat * 13.0 / 8192.0);
}

TEST_CASE("discrepancy series examples") {
    const TestFunction phi = bump(0.0, 1.0);
    std::vector<IndexedMeasure> seq;
    for (int n = 1; n <= 5; ++n) seq.push_back({n, dirac(std::ldexp(1.0, -n))});
    const auto self = discrepancy_series({{3, seq[2].measure}}, seq[2].measure, phi);
    REQUIRE(self.size() == 1);
    CHECK(self[0].delta == 0.0);

    const auto ref = discrepancy_series(seq, dirac(0.0), phi);
    REQUIRE(ref.size() == 5);
    for (const auto& x : ref) {
        const double s = std::ldexp(1.0, -2 * x.n);
        CHECK(x.delta == doctest::Approx(1.0 - std::pow(1.0 - s, 3)));
    }
    const auto succ = discrepancy_series_successive(seq, phi);
    REQUIRE(succ.size() == 4);
    CHECK(succ[0].n == 1);
    CHECK(succ[0].delta == doctest::Approx(std::abs(phi(0.25) - phi(0.5))));
    CHECK_THROWS_AS(discrepancy_series({}, dirac(0.0), phi), DomainError);
}

TEST_CASE("rate_fit on synthetic series") {
    std::vector<DiscrepancySample> s;
    for (int n = 3; n <= 12; ++n) s.push_back({n, 5.0 * n / std::ldexp(1.0, n)});
    const RateFit f = rate_fit(s, RateModel::NOverDn, 2);
    CHECK(f.c_hat == doctest::Approx(5.0));
    CHECK(f.relative_spread < 1e-12);
    CHECK(f.r_squared == doctest::Approx(1.0));
    CHECK(f.slope == doctest::Approx(-std::log(2.0)));
    CHECK(f.n_min == 3);
    CHECK(f.n_max == 12);

    std::vector<DiscrepancySample> geo;
    for (int n = 1; n <= 8; ++n) geo.push_back({n, 7.0 * std::pow(3.0, -n)});
    const RateFit g = rate_fit(geo, RateModel::FreeSlope, 3);
    CHECK(g.slope == doctest::Approx(-std::log(3.0)));
    CHECK(g.intercept == doctest::Approx(std::log(7.0)));
    CHECK(g.r_squared == doctest::Approx(1.0));

    std::vector<DiscrepancySample> flat{{1, 0.5}, {2, 0.5}, {3, 0.5}, {4, 0.5}};
    CHECK(rate_fit(flat, RateModel::FreeSlope, 2).slope == doctest::Approx(0.0));

    CHECK_THROWS_AS(rate_fit({{1, 0.1}, {2, 0.05}}, RateModel::FreeSlope, 2), DomainError);
    CHECK_THROWS_AS(rate_fit({{1, 0.1}, {2, 0.0}, {3, NAN}, {4, 0.01}}, RateModel::FreeSlope, 2), DomainError);
    CHECK_THROWS_AS(rate_fit(s, RateModel::FreeSlope, 1), DomainError);
}

TEST_CASE("property: n/d^n fits recover C under multiplicative noise") {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(-0.1, 0.1);
    for (int d : {2, 3}) {
        for (double C : {0.05, 1.0, 40.0}) {
            std::vector<DiscrepancySample> s;
            for (int n = 4; n <= 14; ++n) s.push_back({n, C * n * std::pow(d, -n) * (1.0 + u(rng))});
            const RateFit f = rate_fit(s, RateModel::NOverDn, d);
            CHECK(std::abs(f.c_hat / C - 1.0) < 0.1);
            CHECK(f.relative_spread < 0.25);
        }
    }
}
