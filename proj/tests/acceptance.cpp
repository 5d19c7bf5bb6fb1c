// Acceptance suite: one PASS/FAIL line per criterion.
//
// Usage: acceptance [--expect-fail i,j,...] [--only i,j,...]
// Exits 0 when the failing criteria are exactly the expected ones.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <limits>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "dynlab/dynatomic.hpp"
#include "dynlab/loci.hpp"
#include "dynlab/measures.hpp"

using namespace dynlab;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

std::set<int> parse_list(const std::string& s) {
    std::set<int> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.insert(std::stoi(item));
    }
    return out;
}

// Shared between criteria 4 and 5.
const TestFunction kPhi = bump(Complex(-0.5, 0.0), 2.0);
std::vector<IndexedMeasure> g_centre_measures;
double g_c_hat = std::numeric_limits<double>::quiet_NaN();

const std::vector<IndexedMeasure>& centre_measures() {
    if (g_centre_measures.empty()) {
        for (int n = 8; n <= 14; ++n) g_centre_measures.push_back({n, locus_measure(centers_unicritical(2, n, false))});
    }
    return g_centre_measures;
}

// Mean of the roots of Q_n from its top two coefficients.
double centre_mean(int d, int n) {
    double degree = 1.0, sub = 0.0;
    for (int k = 1; k < n; ++k) {
        sub *= d;
        degree *= d;
        if (degree == 2.0) sub += 1.0;
    }
    return -sub / degree;
}

Outcome criterion1() {
    std::size_t wrong = 0;
    double min_derivative = std::numeric_limits<double>::infinity();
    double min_separation = std::numeric_limits<double>::infinity();
    for (int n = 1; n <= 13; ++n) {
        const LocusResult r = centers_unicritical(2, n, false);
        if (r.points.size() != (std::size_t{1} << (n - 1))) ++wrong;
        std::vector<Complex> cs;
        for (const auto& p : r.points) cs.push_back(std::get<Unicritical>(p).c);
        for (Complex c : cs) {
            const OrbitPolyValue v = evaluate_critical_orbit(2, n, c);
            min_derivative = std::min(min_derivative, std::abs(v.derivative) / std::max(1.0, v.scale));
        }
        std::sort(cs.begin(), cs.end(), [](Complex a, Complex b) { return a.real() < b.real(); });
        for (std::size_t i = 0; i < cs.size(); ++i) {
            for (std::size_t j = i + 1; j < cs.size() && cs[j].real() - cs[i].real() < min_separation; ++j) {
                min_separation = std::min(min_separation, std::abs(cs[j] - cs[i]));
            }
        }
    }
    return {wrong == 0 && min_derivative > 1e-12 && min_separation > 0.0,
            fmt("|Per(n)| = 2^(n-1) for n = 1..13 (%zu wrong), min |Q_n'|/scale = %.3g, min separation = %.3g", wrong,
                min_derivative, min_separation)};
}

Outcome criterion2() {
    double worst = 0.0;
    bool contained = true;
    for (double radius : {0.15, 0.4, 0.65, 0.9}) {
        for (int k = 0; k < 5; ++k) {
            const Complex w = std::polar(radius, 2.0 * std::numbers::pi * (k + 0.25 * radius) / 5.0);
            const auto one = exact_multiplier_locus(2, 1, w);
            const auto two = exact_multiplier_locus(2, 2, w);
            if (one.points.size() != 1 || two.points.size() != 1) return {false, "wrong number of points"};
            worst = std::max(worst, std::abs(std::get<Unicritical>(one.points[0]).c - (w / 2.0 - w * w / 4.0)));
            worst = std::max(worst, std::abs(std::get<Unicritical>(two.points[0]).c - (w / 4.0 - 1.0)));
            bool found = false;
            for (const auto& p : multiplier_locus(2, 2, w).points) {
                found = found || std::abs(std::get<Unicritical>(p).c - (w / 4.0 - 1.0)) < 1e-10;
            }
            contained = contained && found;
        }
    }
    return {worst <= 1e-10 && contained,
            fmt("20 multipliers in |w| <= 0.9: max error %.3g against w/2 - w^2/4 and w/4 - 1", worst)};
}

Outcome criterion3() {
    std::size_t wrong_counts = 0, bad_points = 0, total = 0;
    double worst = 0.0;
    for (Complex w : {Complex(0.0), Complex(0.3)}) {
        for (int n = 1; n <= 5; ++n) {
            const LocusResult r = multiplier_locus(3, n, w);
            const std::size_t expected = (w == Complex{} ? 1u : 2u) * static_cast<std::size_t>(std::pow(3, n - 1));
            if (r.points.size() != expected) ++wrong_counts;
            for (const auto& p : r.points) {
                ++total;
                const auto cyc = find_cycle(p, 0, n);
                if (!cyc || n % cyc->period != 0) {
                    ++bad_points;
                    continue;
                }
                const Complex want = w == Complex{} ? Complex{} : std::exp(std::log(w) * (double(cyc->period) / n));
                const double err = std::abs(cyc->multiplier - want);
                worst = std::max(worst, err);
                if (err > 1e-8) ++bad_points;
            }
        }
    }
    return {wrong_counts == 0 && bad_points == 0,
            fmt("z^3 + c, n <= 5, w in {0, 0.3}: %zu wrong counts, %zu/%zu points off the decomposition, max multiplier "
                "error %.3g",
                wrong_counts, bad_points, total, worst)};
}

Outcome criterion4() {
    const auto series = discrepancy_series_successive(centre_measures(), kPhi);
    const RateFit free = rate_fit(series, RateModel::FreeSlope, 2);
    const RateFit ndn = rate_fit(series, RateModel::NOverDn, 2);
    g_c_hat = ndn.c_hat;
    const bool slope_ok = std::abs(free.slope + std::log(2.0)) <= 0.25;
    const bool spread_ok = ndn.relative_spread < 0.5;
    std::string deltas;
    for (const auto& s : series) deltas += fmt(" %.3g", s.delta);
    return {slope_ok && spread_ok,
            fmt("free_slope %.4f (target %.4f +- 0.25, %s), r2 %.3f; C_hat %.4g, spread %.3f (< 0.5, %s); deltas n=8..13:%s",
                free.slope, -std::log(2.0), slope_ok ? "ok" : "out", free.r_squared, ndn.c_hat, ndn.relative_spread,
                spread_ok ? "ok" : "out", deltas.c_str())};
}

Outcome criterion5() {
    if (std::isnan(g_c_hat)) criterion4();
    const HarmonicSample nu = harmonic_sample(2, 4096, 1e-6);
    const double diff = std::abs(pair(nu.measure, kPhi) - pair(centre_measures()[5].measure, kPhi));
    const double bound = std::max(5e-3 * kPhi.sup_norm, 3.0 * g_c_hat * 13.0 / 8192.0);
    Complex mean{};
    for (std::size_t i = 0; i < nu.measure.points.size(); ++i) mean += nu.measure.weights[i] * nu.measure.points[i][0];
    const double oracle = centre_mean(2, 16);
    const double mean_err = std::max(std::abs(mean.real() - oracle), std::abs(mean.imag()));
    return {diff <= bound && mean_err <= 5e-3 && nu.failed_rays.empty(),
            fmt("|pair(nu_4096) - pair(mu_13)| = %.3g <= %.3g; nu mean %.6f%+.6fi vs Q_16 centre mean %.6f (err %.3g); "
                "%zu failed rays",
                diff, bound, mean.real(), mean.imag(), oracle, mean_err, nu.failed_rays.size())};
}

bool cubic_contains(const LocusResult& r, Complex c1, Complex a, double tol) {
    for (const auto& p : r.points) {
        const auto& m = std::get<CubicModuli>(p);
        if (std::abs(m.c1 - c1) <= tol && std::abs(m.a - a) <= tol) return true;
    }
    return false;
}

Outcome criterion6() {
    const LocusResult r = centers_cubic(2, 1);
    double min_sigma = std::numeric_limits<double>::infinity();
    bool symmetric = true;
    const Complex zeta = std::polar(1.0, 2.0 * std::numbers::pi / 3.0);
    for (const auto& p : r.points) {
        const auto& m = std::get<CubicModuli>(p);
        min_sigma = std::min(min_sigma, transversality_check(m, 2, 1).sigma_min);
        symmetric = symmetric && cubic_contains(r, m.c1, zeta * m.a, 1e-9);
    }
    return {r.points.size() == 18 && min_sigma > 0.0 && symmetric,
            fmt("centers_cubic(2,1): %zu points, min sigma %.3g, a -> zeta_3 a invariant: %s", r.points.size(), min_sigma,
                symmetric ? "yes" : "no")};
}

Outcome criterion7() {
    const Complex w0(0.3), w1(-0.2);
    const LocusResult r = cubic_multiplier_locus(2, 1, w0, w1);
    std::size_t bad = 0;
    double worst = 0.0;
    for (const auto& p : r.points) {
        const auto z0 = find_cycle(p, 0, 2), z1 = find_cycle(p, 1, 2);
        if (!z0 || !z1) {
            ++bad;
            continue;
        }
        double err = std::numeric_limits<double>::infinity();
        if (z0->period == 2 && z1->period == 1) err = std::max(std::abs(z0->multiplier - w0), std::abs(z1->multiplier - w1));
        if (z0->period == 1 && z1->period == 2) err = std::max(std::abs(z0->multiplier - w1), std::abs(z1->multiplier - w0));
        worst = std::max(worst, err);
        if (!(err <= 1e-8)) ++bad;
    }
    return {r.counted() == 36 && bad == 0,
            fmt("cubic_multiplier_locus(2,1,0.3,-0.2): %zu points, %zu failing recheck, max multiplier error %.3g",
                r.counted(), bad, worst)};
}

Outcome criterion8() {
    const TestFunction phi2 = bump(MeasurePoint{}, 5.0, 2);
    std::vector<double> pairs;
    std::string detail = "pairs";
    for (int m = 2; m <= 5; ++m) {
        const LocusResult r = centers_cubic(m + 1, m);
        pairs.push_back(pair(locus_measure(r), phi2));
        detail += fmt(" (%d,%d):%.6f", m + 1, m, pairs.back());
    }
    bool ok = true;
    detail += "; cross-differences";
    double prev = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < pairs.size(); ++i) {
        const double diff = std::abs(pairs[i + 1] - pairs[i]);
        const int m = static_cast<int>(i) + 2;
        const double rate = static_cast<double>(sigma_divisors(m)) / std::pow(3.0, m);
        detail += fmt(" %.3g (sigma(m)/3^m %.3g)", diff, rate);
        ok = ok && diff > 0.0 && diff < prev;
        prev = diff;
    }
    return {ok, detail};
}

Outcome criterion9() {
    bool ok = true;
    std::string detail;
    for (Complex z : {Complex(0.0), Complex(4.0), Complex(-1.0, 1.0)}) {
        std::vector<IndexedMeasure> seq;
        for (int n = 8; n <= 14; ++n) seq.push_back({n, locus_measure(preimage_locus(2, n, z))});
        const RateFit f = rate_fit(discrepancy_series_successive(seq, kPhi), RateModel::FreeSlope, 2);
        ok = ok && f.slope <= -0.4;
        detail += fmt("z=%g%+gi slope %.4f; ", z.real(), z.imag(), f.slope);
    }
    return {ok, detail + "(<= -0.4 required)"};
}

Outcome criterion10() {
    std::stringstream ss(DYNLAB_PROPERTY_BINARIES);
    std::string bin;
    std::size_t failed = 0, ran = 0;
    while (std::getline(ss, bin, '|')) {
        if (bin.empty()) continue;
        ++ran;
        const std::string cmd = "'" + bin + "' --test-case='property*' --no-intro >/dev/null 2>&1";
        const int status = std::system(cmd.c_str());
        if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) {
            ++failed;
            std::fprintf(stderr, "property suite failed: %s\n", bin.c_str());
        }
    }
    return {failed == 0 && ran > 0, fmt("%zu module property suites run, %zu failed", ran, failed)};
}

struct Criterion {
    int id;
    double time_limit;  // seconds; 0 = none stated
    std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
    std::set<int> expected_failures, only;
    for (int i = 1; i < argc; ++i) {
        const std::string a = argv[i];
        if (a == "--expect-fail" && i + 1 < argc) {
            expected_failures = parse_list(argv[++i]);
        } else if (a == "--only" && i + 1 < argc) {
            only = parse_list(argv[++i]);
        } else {
            std::fprintf(stderr, "usage: %s [--expect-fail i,j] [--only i,j]\n", argv[0]);
            return 1;
        }
    }
    const std::vector<Criterion> criteria = {
        {1, 60.0, criterion1},  {2, 0.0, criterion2},  {3, 0.0, criterion3},   {4, 300.0, criterion4},
        {5, 0.0, criterion5},   {6, 120.0, criterion6}, {7, 0.0, criterion7},  {8, 0.0, criterion8},
        {9, 0.0, criterion9},   {10, 180.0, criterion10},
    };
    std::set<int> failures;
    for (const auto& c : criteria) {
        if (!only.empty() && !only.count(c.id)) continue;
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        bool pass = o.pass;
        std::string timing = fmt("%.1fs", secs);
        if (c.time_limit > 0.0) {
            timing += fmt(" (limit %.0fs)", c.time_limit);
            pass = pass && secs < c.time_limit;
        }
        if (!pass) failures.insert(c.id);
        std::printf("criterion %2d: %s  %s  [%s]\n", c.id, pass ? "PASS" : "FAIL", o.detail.c_str(), timing.c_str());
        std::fflush(stdout);
    }
    std::set<int> expected;
    for (int id : expected_failures) {
        if (only.empty() || only.count(id)) expected.insert(id);
    }
    if (failures != expected) {
        std::printf("failing criteria differ from the expected set\n");
        return 1;
    }
    if (!failures.empty()) std::printf("only the expected criteria failed\n");
    return 0;
}
