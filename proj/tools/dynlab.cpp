// Command-line front end. Each subcommand wraps one library operation,
// writes its table as CSV and a JSON run manifest next to it.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "dynlab/dynamics.hpp"
#include "dynlab/dynatomic.hpp"
#include "dynlab/io.hpp"
#include "dynlab/loci.hpp"
#include "dynlab/measures.hpp"
#include "dynlab/parallel.hpp"

using namespace dynlab;
using json = nlohmann::ordered_json;

namespace {

// Failures that contradict a count theorem or a numerical certificate.
class ComputeFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Svg {
    struct Series {
        std::vector<double> x, y;
        bool line = false;
    };
    std::string title, xlabel, ylabel;
    Series data;

    void write(const std::string& path) const {
        std::ofstream os(path);
        if (!os) throw std::runtime_error("cannot open " + path);
        const double W = 640, H = 640, pad = 60;
        double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
        for (std::size_t i = 0; i < data.x.size(); ++i) {
            x0 = std::min(x0, data.x[i]);
            x1 = std::max(x1, data.x[i]);
            y0 = std::min(y0, data.y[i]);
            y1 = std::max(y1, data.y[i]);
        }
        if (data.x.empty()) x0 = y0 = -1, x1 = y1 = 1;
        if (x1 - x0 < 1e-12) x0 -= 1, x1 += 1;
        if (y1 - y0 < 1e-12) y0 -= 1, y1 += 1;
        auto px = [&](double x) { return pad + (x - x0) / (x1 - x0) * (W - 2 * pad); };
        auto py = [&](double y) { return H - pad - (y - y0) / (y1 - y0) * (H - 2 * pad); };
        os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
        os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
        os << "<rect x=\"" << pad << "\" y=\"" << pad << "\" width=\"" << W - 2 * pad << "\" height=\"" << H - 2 * pad
           << "\" fill=\"none\" stroke=\"#888\"/>\n";
        os << "<text x=\"" << W / 2 << "\" y=\"30\" text-anchor=\"middle\" font-size=\"16\">" << title << "</text>\n";
        os << "<text x=\"" << W / 2 << "\" y=\"" << H - 15 << "\" text-anchor=\"middle\" font-size=\"13\">" << xlabel
           << " [" << format_double(x0) << ", " << format_double(x1) << "]</text>\n";
        os << "<text x=\"15\" y=\"" << H / 2 << "\" font-size=\"13\" transform=\"rotate(-90 15 " << H / 2 << ")\">"
           << ylabel << " [" << format_double(y0) << ", " << format_double(y1) << "]</text>\n";
        if (data.line) {
            os << "<polyline fill=\"none\" stroke=\"#1f4e9c\" stroke-width=\"2\" points=\"";
            for (std::size_t i = 0; i < data.x.size(); ++i) os << px(data.x[i]) << ',' << py(data.y[i]) << ' ';
            os << "\"/>\n";
        }
        const double r = data.line ? 4.0 : data.x.size() > 2000 ? 0.8 : 2.0;
        for (std::size_t i = 0; i < data.x.size(); ++i) {
            os << "<circle cx=\"" << px(data.x[i]) << "\" cy=\"" << py(data.y[i]) << "\" r=\"" << r
               << "\" fill=\"#1f4e9c\"/>\n";
        }
        os << "</svg>\n";
    }
};

Svg scatter(const PointTable& t, const std::string& title) {
    Svg s;
    s.title = title;
    s.xlabel = "Re";
    s.ylabel = "Im";
    for (const auto& p : t.points) {
        s.data.x.push_back(p[0].real());
        s.data.y.push_back(p[0].imag());
    }
    return s;
}

Svg log_line(const std::vector<std::pair<int, double>>& xy, const std::string& title, const std::string& ylabel) {
    Svg s;
    s.title = title;
    s.xlabel = "n";
    s.ylabel = ylabel;
    s.data.line = true;
    for (const auto& [n, v] : xy) {
        if (v > 0.0 && std::isfinite(v)) {
            s.data.x.push_back(n);
            s.data.y.push_back(std::log10(v));
        }
    }
    return s;
}

struct Run {
    std::string command;
    json params = json::object();
    std::string out, plot;
    int threads = 0;
    json outputs = json::array();
    json failures = json::array();
    std::string text;  // primary output
    std::function<Svg()> make_plot;

    void emit_points(const PointTable& t, const std::string& title) {
        std::ostringstream os;
        write_points(os, t);
        text = os.str();
        make_plot = [t, title] { return scatter(t, title); };
    }
};

void write_file(const std::string& path, const std::string& content) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + path + " for writing");
    os << content;
}

std::string manifest_path(const std::string& out) { return out + ".manifest.json"; }

Complex complex_option(const std::string& s) { return parse_complex(s); }

// Locus results whose count came out wrong still raise CountMismatch inside
// the library; a non-finite point is treated the same way here.
void check_finite(const LocusResult& r) {
    for (const auto& p : r.points) {
        for (Complex v : parameters(p)) {
            if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) throw ComputeFailure("non-finite point in locus");
        }
    }
}

PointTable sorted_table(const LocusResult& r) {
    PointTable t = to_table(r);
    std::vector<std::size_t> idx(t.points.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    auto key = [&](std::size_t i) {
        const auto& p = t.points[i];
        return std::array<double, 4>{p[0].real(), p[0].imag(), p[1].real(), p[1].imag()};
    };
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return key(a) < key(b); });
    PointTable s;
    s.dim = t.dim;
    for (std::size_t i : idx) {
        s.points.push_back(t.points[i]);
        s.residuals.push_back(t.residuals[i]);
    }
    return s;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Numerical experiments on periodic points, multiplier loci and equidistribution in polynomial "
                 "parameter spaces"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);

    Run run;
    int threads_flag = 0;
    std::string out, plot;
    auto common = [&](CLI::App* sub) {
        sub->add_option("--out", out, "Output file (CSV, or JSON for ratefit); stdout when omitted");
        sub->add_option("--plot", plot, "Write an SVG figure to this path");
        sub->add_option("--threads", threads_flag, "Worker threads (default: DYNLAB_THREADS, else all cores)")
            ->check(CLI::NonNegativeNumber);
    };

    int d = 2, n = 3, n0 = 2, n1 = 1, n_min = 8, n_max = 13, N = 60, j = 0;
    bool exact = false;
    std::string w = "0", w0 = "0", w1 = "0", z = "0", c = "0", c1 = "0", a = "";
    std::string solver = "auto", model = "free_slope", mode = "successive", in, center = "-0.5";
    std::size_t K = 4096;
    double t_min = 1e-6, radius = 2.0;
    std::uint64_t seed = 1;
    int grid = 6, refinements = 2;

    auto* centers = app.add_subcommand("centers", "Roots of Q_n, or the exact-period centres");
    centers->add_option("--d", d, "Degree")->check(CLI::Range(2, 64));
    centers->add_option("--n", n, "Period")->check(CLI::Range(1, 40));
    centers->add_flag("--exact", exact, "Exact period n only");
    common(centers);

    auto* multiplier = app.add_subcommand("multiplier", "Parameters with an n-cycle of multiplier w");
    multiplier->add_option("--d", d, "Degree")->check(CLI::Range(2, 64));
    multiplier->add_option("--n", n, "Period")->check(CLI::Range(1, 40));
    multiplier->add_option("--w", w, "Multiplier, |w| < 1");
    multiplier->add_flag("--exact", exact, "Exact period n only, without the lower-period components");
    common(multiplier);

    auto* cubic_centers = app.add_subcommand("cubic-centers", "Cubic parameters where 0 and c1 have exact periods n0, n1");
    cubic_centers->add_option("--n0", n0, "Period of the critical point 0")->check(CLI::Range(1, 12));
    cubic_centers->add_option("--n1", n1, "Period of the critical point c1")->check(CLI::Range(1, 12));
    cubic_centers->add_option("--solver", solver, "auto, multistart or homotopy")
        ->check(CLI::IsMember({"auto", "multistart", "homotopy"}));
    cubic_centers->add_option("--grid", grid, "Multistart grid points per real coordinate")->check(CLI::Range(2, 64));
    cubic_centers->add_option("--refinements", refinements, "Multistart grid doublings")->check(CLI::Range(0, 4));
    cubic_centers->add_option("--seed", seed, "Seed for the homotopy start system");
    common(cubic_centers);

    auto* cubic_mult = app.add_subcommand("cubic-multiplier", "Cubic parameters with cycle multipliers w0, w1");
    cubic_mult->add_option("--n0", n0, "First period")->check(CLI::Range(1, 12));
    cubic_mult->add_option("--n1", n1, "Second period")->check(CLI::Range(1, 12));
    cubic_mult->add_option("--w0", w0, "Multiplier of the first cycle");
    cubic_mult->add_option("--w1", w1, "Multiplier of the second cycle");
    common(cubic_mult);

    auto* preimages = app.add_subcommand("preimages", "Roots of Q_n(c) = z");
    preimages->add_option("--d", d, "Degree")->check(CLI::Range(2, 64));
    preimages->add_option("--n", n, "Iterate")->check(CLI::Range(1, 40));
    preimages->add_option("--z", z, "Target value");
    common(preimages);

    auto* harmonic = app.add_subcommand("harmonic", "Harmonic measure of the Multibrot set by external rays");
    harmonic->add_option("--d", d, "Degree")->check(CLI::Range(2, 64));
    harmonic->add_option("--K", K, "Number of rays")->check(CLI::PositiveNumber);
    harmonic->add_option("--tmin", t_min, "Final potential")->check(CLI::PositiveNumber);
    common(harmonic);

    auto* discrepancy = app.add_subcommand("discrepancy", "Discrepancy series of the preimage measures of z");
    discrepancy->add_option("--d", d, "Degree")->check(CLI::Range(2, 64));
    discrepancy->add_option("--n-min", n_min, "First n")->check(CLI::Range(1, 40));
    discrepancy->add_option("--n-max", n_max, "Last n")->check(CLI::Range(1, 40));
    discrepancy->add_option("--z", z, "Target value; 0 gives the centres");
    discrepancy->add_option("--center", center, "Bump centre");
    discrepancy->add_option("--radius", radius, "Bump radius")->check(CLI::PositiveNumber);
    discrepancy->add_option("--mode", mode, "successive or harmonic")->check(CLI::IsMember({"successive", "harmonic"}));
    discrepancy->add_option("--K", K, "Rays for the harmonic reference")->check(CLI::PositiveNumber);
    discrepancy->add_option("--tmin", t_min, "Potential for the harmonic reference")->check(CLI::PositiveNumber);
    common(discrepancy);

    auto* ratefit = app.add_subcommand("ratefit", "Fit a rate to a discrepancy series");
    ratefit->add_option("--in", in, "Series CSV with header n,delta")->required()->check(CLI::ExistingFile);
    ratefit->add_option("--model", model, "n_over_dn or free_slope")->check(CLI::IsMember({"n_over_dn", "free_slope"}));
    ratefit->add_option("--d", d, "Degree")->check(CLI::Range(2, 64));
    common(ratefit);

    auto* przytycki = app.add_subcommand("przytycki", "Chordal gaps between a critical point and its orbit");
    przytycki->add_option("--d", d, "Degree of the unicritical map")->check(CLI::Range(2, 64));
    przytycki->add_option("--c", c, "Unicritical parameter");
    przytycki->add_option("--c1", c1, "Cubic critical point (with --a)");
    przytycki->add_option("--a", a, "Cubic parameter a; selects the cubic family");
    przytycki->add_option("--j", j, "Critical point index")->check(CLI::Range(0, 1));
    przytycki->add_option("--N", N, "Number of iterates")->check(CLI::Range(1, 100000));
    common(przytycki);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    run.command = app.get_subcommands().front()->get_name();
    run.out = out;
    run.plot = plot;
    if (threads_flag > 0) set_thread_count(threads_flag);
    run.threads = thread_count();

    const auto start = std::chrono::steady_clock::now();
    int code = 0;
    std::string message;
    try {
        if (run.command == "centers") {
            run.params = {{"d", d}, {"n", n}, {"exact", exact}};
            const LocusResult r = centers_unicritical(d, n, exact);
            check_finite(r);
            run.emit_points(sorted_table(r), "centers d=" + std::to_string(d) + " n=" + std::to_string(n));
        } else if (run.command == "multiplier") {
            const Complex wv = complex_option(w);
            run.params = {{"d", d}, {"n", n}, {"w", format_complex(wv)}, {"exact", exact}};
            const LocusResult r = exact ? exact_multiplier_locus(d, n, wv) : multiplier_locus(d, n, wv);
            check_finite(r);
            run.emit_points(sorted_table(r), "multiplier locus n=" + std::to_string(n) + " w=" + format_complex(wv));
        } else if (run.command == "cubic-centers") {
            CubicSeeding s;
            s.grid = grid;
            s.max_refinements = refinements;
            s.seed = seed;
            s.solver = solver == "multistart" ? CubicSolver::MultistartNewton
                       : solver == "homotopy" ? CubicSolver::Homotopy
                                              : CubicSolver::Auto;
            run.params = {{"n0", n0}, {"n1", n1}, {"solver", solver}, {"grid", grid}, {"refinements", refinements},
                          {"seed", seed}};
            const LocusResult r = centers_cubic(n0, n1, s);
            check_finite(r);
            double worst_sigma = std::numeric_limits<double>::infinity();
            for (const auto& p : r.points) {
                worst_sigma = std::min(worst_sigma, transversality_check(std::get<CubicModuli>(p), n0, n1).sigma_min);
            }
            run.params["method"] = std::string(to_string(r.method));
            run.params["min_sigma"] = worst_sigma;
            run.emit_points(sorted_table(r), "cubic centres (" + std::to_string(n0) + "," + std::to_string(n1) + "), c1");
        } else if (run.command == "cubic-multiplier") {
            const Complex a0 = complex_option(w0), a1 = complex_option(w1);
            run.params = {{"n0", n0}, {"n1", n1}, {"w0", format_complex(a0)}, {"w1", format_complex(a1)}};
            const LocusResult r = cubic_multiplier_locus(n0, n1, a0, a1);
            check_finite(r);
            run.params["counted"] = r.counted();
            run.emit_points(sorted_table(r), "cubic multiplier locus, c1");
        } else if (run.command == "preimages") {
            const Complex zv = complex_option(z);
            run.params = {{"d", d}, {"n", n}, {"z", format_complex(zv)}};
            const LocusResult r = preimage_locus(d, n, zv);
            check_finite(r);
            run.emit_points(sorted_table(r), "preimages n=" + std::to_string(n) + " z=" + format_complex(zv));
        } else if (run.command == "harmonic") {
            run.params = {{"d", d}, {"K", K}, {"tmin", t_min}};
            const HarmonicSample s = harmonic_sample(d, K, t_min);
            for (std::size_t i : s.failed_rays) run.failures.push_back("ray " + std::to_string(i) + " failed to trace");
            run.params["failed_rays"] = s.failed_rays.size();
            run.emit_points(to_table(s.measure), "harmonic sample K=" + std::to_string(K));
        } else if (run.command == "discrepancy") {
            if (n_max - n_min < 1) throw DomainError("discrepancy: --n-max must exceed --n-min");
            const Complex zv = complex_option(z), cv = complex_option(center);
            run.params = {{"d", d},          {"n_min", n_min},   {"n_max", n_max}, {"z", format_complex(zv)},
                          {"center", format_complex(cv)}, {"radius", radius}, {"mode", mode}};
            const TestFunction phi = bump(cv, radius);
            std::vector<IndexedMeasure> seq;
            const int last = mode == "successive" ? n_max + 1 : n_max;
            for (int k = n_min; k <= last; ++k) {
                seq.push_back({k, locus_measure(preimage_locus(d, k, zv))});
            }
            std::vector<DiscrepancySample> series;
            if (mode == "successive") {
                series = discrepancy_series_successive(seq, phi);
            } else {
                run.params["K"] = K;
                run.params["tmin"] = t_min;
                const HarmonicSample ref = harmonic_sample(d, K, t_min);
                if (!ref.failed_rays.empty()) {
                    run.failures.push_back(std::to_string(ref.failed_rays.size()) + " rays failed in the reference");
                }
                series = discrepancy_series(seq, ref.measure, phi);
            }
            std::ostringstream os;
            write_series(os, series);
            run.text = os.str();
            std::vector<std::pair<int, double>> xy;
            for (const auto& s : series) xy.push_back({s.n, s.delta});
            run.make_plot = [xy] { return log_line(xy, "discrepancy", "log10 delta"); };
        } else if (run.command == "ratefit") {
            run.params = {{"in", in}, {"model", model}, {"d", d}};
            std::ifstream is(in);
            const auto series = read_series(is);
            const RateFit f = rate_fit(series, model == "n_over_dn" ? RateModel::NOverDn : RateModel::FreeSlope, d);
            json r;
            if (f.model == RateModel::NOverDn) {
                r["C_hat"] = f.c_hat;
                r["relative_spread"] = f.relative_spread;
            }
            r["slope"] = f.slope;
            r["intercept"] = f.intercept;
            r["r2"] = f.r_squared;
            r["n_min"] = f.n_min;
            r["n_max"] = f.n_max;
            run.text = r.dump(2) + "\n";
            std::vector<std::pair<int, double>> xy;
            for (const auto& s : series) xy.push_back({s.n, s.delta});
            run.make_plot = [xy] { return log_line(xy, "rate fit input", "log10 delta"); };
        } else if (run.command == "przytycki") {
            ParamPoint p;
            if (!a.empty()) {
                p = CubicModuli{complex_option(c1), complex_option(a)};
                run.params = {{"c1", format_complex(complex_option(c1))}, {"a", format_complex(complex_option(a))}};
            } else {
                p = Unicritical{d, complex_option(c)};
                if (j != 0) throw DomainError("przytycki: a unicritical map has only the critical point j = 0");
                run.params = {{"d", d}, {"c", format_complex(complex_option(c))}};
            }
            run.params["j"] = j;
            run.params["N"] = N;
            const auto gaps = przytycki_gap(p, j, N);
            const GapFit fit = fit_gap(gaps);
            run.params["decay_rate"] = fit.decay_rate;
            run.params["growth"] = fit.growth;
            run.params["kappa"] = fit.kappa;
            run.params["lipschitz_estimate"] = spherical_lipschitz_estimate(p);
            std::ostringstream os;
            os << "n,gap\n";
            std::vector<std::pair<int, double>> xy;
            for (const auto& g : gaps) {
                os << g.n << ',' << format_double(g.gap) << '\n';
                xy.push_back({g.n, g.gap});
            }
            run.text = os.str();
            run.make_plot = [xy] { return log_line(xy, "critical recurrence", "log10 chordal gap"); };
        }
    } catch (const CountMismatch& e) {
        code = 2;
        message = e.what();
    } catch (const TransversalityViolation& e) {
        code = 2;
        message = e.what();
    } catch (const ContinuationFailure& e) {
        code = 2;
        message = e.what();
    } catch (const NonConvergence& e) {
        code = 2;
        message = e.what();
    } catch (const InexactDivision& e) {
        code = 2;
        message = e.what();
    } catch (const NearParabolic& e) {
        code = 2;
        message = e.what();
    } catch (const LowerPeriodDegeneracy& e) {
        code = 2;
        message = e.what();
    } catch (const ComputeFailure& e) {
        code = 2;
        message = e.what();
    } catch (const DomainError& e) {
        code = 1;
        message = e.what();
    } catch (const OverflowError& e) {
        code = 1;
        message = e.what();
    } catch (const ParseError& e) {
        code = 1;
        message = e.what();
    } catch (const std::exception& e) {
        code = 2;
        message = e.what();
    }

    try {
        if (code == 0) {
            if (run.out.empty()) {
                std::cout << run.text;
            } else {
                write_file(run.out, run.text);
                run.outputs.push_back(run.out);
            }
            if (!run.plot.empty() && run.make_plot) {
                run.make_plot().write(run.plot);
                run.outputs.push_back(run.plot);
            }
        } else {
            run.failures.push_back(message);
            std::cerr << "dynlab " << run.command << ": " << message << '\n';
        }
        const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        json manifest;
        manifest["command"] = run.command;
        manifest["params"] = run.params;
        manifest["version"] = std::string(kVersion);
        manifest["wall_time_s"] = wall;
        manifest["threads"] = run.threads;
        manifest["outputs"] = run.outputs;
        manifest["failures"] = run.failures;
        manifest["exit_code"] = code;
        if (run.out.empty()) {
            std::cerr << manifest.dump() << '\n';
        } else {
            write_file(manifest_path(run.out), manifest.dump(2) + "\n");
        }
    } catch (const std::exception& e) {
        std::cerr << "dynlab: " << e.what() << '\n';
        return 2;
    }
    return code;
}
