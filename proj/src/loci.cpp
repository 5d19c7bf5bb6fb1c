#include "dynlab/loci.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <random>

#include <Eigen/Dense>

#include "dynlab/dynatomic.hpp"
#include "dynlab/parallel.hpp"

namespace dynlab {

std::string_view to_string(LocusMethod m) {
    switch (m) {
        case LocusMethod::DirectRoots: return "direct-roots";
        case LocusMethod::Continuation: return "continuation";
        case LocusMethod::MultistartNewton: return "multistart-newton";
        case LocusMethod::Homotopy: return "homotopy";
    }
    return "unknown";
}

std::size_t LocusResult::counted() const {
    if (multiplicity.empty()) return points.size();
    std::size_t total = 0;
    for (int m : multiplicity) total += static_cast<std::size_t>(m);
    return total;
}

double LocusResult::worst_residual() const {
    double w = 0.0;
    for (double r : residuals) w = std::max(w, r);
    return w;
}

CountMismatch::CountMismatch(const std::string& what, std::size_t found, std::size_t expected)
    : std::runtime_error(what + ": found " + std::to_string(found) + ", expected " + std::to_string(expected)),
      found_(found),
      expected_(expected) {}

ContinuationFailure::ContinuationFailure(const std::string& where, double t_reached)
    : std::runtime_error("continuation failed from " + where + " at t = " + std::to_string(t_reached)),
      t_(t_reached) {}

TransversalityViolation::TransversalityViolation(double sigma_min, double threshold)
    : std::runtime_error("transversality violation: sigma_min " + std::to_string(sigma_min) + " below " +
                         std::to_string(threshold)),
      sigma_(sigma_min) {}

namespace {

constexpr int kMaxChain = 16;
using VecX = std::array<Complex, kMaxChain>;
using MatX = std::array<Complex, kMaxChain * kMaxChain>;
using Mat2 = Eigen::Matrix2cd;
using Vec2 = Eigen::Vector2cd;
using Key = std::array<Complex, 2>;

constexpr double kPi = std::numbers::pi;

std::string complex_str(Complex z) {
    return "(" + std::to_string(z.real()) + (z.imag() < 0 ? "" : "+") + std::to_string(z.imag()) + "i)";
}

double key_distance(const Key& a, const Key& b) {
    return std::sqrt(std::norm(a[0] - b[0]) + std::norm(a[1] - b[1]));
}

bool key_less(const Key& a, const Key& b) {
    for (int i = 0; i < 2; ++i) {
        if (a[i].real() != b[i].real()) return a[i].real() < b[i].real();
        if (a[i].imag() != b[i].imag()) return a[i].imag() < b[i].imag();
    }
    return false;
}

/// Indices of points kept after merging those within `radius` of an
/// earlier kept point (in key order).
std::vector<std::size_t> dedup_indices(const std::vector<Key>& keys, double radius) {
    std::vector<std::size_t> order(keys.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return key_less(keys[a], keys[b]); });
    std::vector<std::size_t> kept;
    for (std::size_t idx : order) {
        bool dup = false;
        for (auto it = kept.rbegin(); it != kept.rend(); ++it) {
            if (keys[idx][0].real() - keys[*it][0].real() > radius) break;
            if (key_distance(keys[idx], keys[*it]) <= radius) {
                dup = true;
                break;
            }
        }
        if (!dup) kept.push_back(idx);
    }
    return kept;
}

Key key_of(const ParamPoint& p) {
    const ParamVector v = parameters(p);
    return {v[0], v[1]};
}

/// Sorts the result and fails when two points are closer than `radius`.
void finalize(LocusResult& r, double radius, const std::string& what) {
    std::vector<Key> keys;
    keys.reserve(r.points.size());
    for (const auto& p : r.points) keys.push_back(key_of(p));
    const auto kept = dedup_indices(keys, radius);
    std::vector<std::size_t> order(keys.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return key_less(keys[a], keys[b]); });
    LocusResult sorted;
    sorted.expected_count = r.expected_count;
    sorted.method = r.method;
    for (std::size_t i : order) {
        sorted.points.push_back(r.points[i]);
        sorted.residuals.push_back(r.residuals[i]);
        if (!r.multiplicity.empty()) sorted.multiplicity.push_back(r.multiplicity[i]);
    }
    r = std::move(sorted);
    const std::size_t distinct_counted = kept.size() == r.points.size() ? r.counted() : kept.size();
    if (kept.size() != r.points.size() || r.counted() != r.expected_count) {
        throw CountMismatch(what, distinct_counted, r.expected_count);
    }
}

std::size_t upow(int d, int e) {
    return static_cast<std::size_t>(checked_pow(static_cast<std::uint64_t>(d), static_cast<std::uint64_t>(e)));
}

std::size_t exact_count(int d, int n) {
    return static_cast<std::size_t>(exact_period_degree(static_cast<std::uint64_t>(d), static_cast<std::uint64_t>(n)));
}

void check_unicritical(int d, int n) {
    if (d < 2) throw DomainError("degree d must be at least 2");
    if (n < 1) throw DomainError("period n must be positive");
}

LocusResult roots_locus(int d, const RootSet& rs, std::size_t expected) {
    LocusResult r;
    r.method = LocusMethod::DirectRoots;
    r.expected_count = expected;
    for (std::size_t i = 0; i < rs.roots.size(); ++i) {
        r.points.push_back(Unicritical{d, rs.roots[i]});
        r.residuals.push_back(rs.residuals[i]);
    }
    return r;
}

// ---------------------------------------------------------------------------
// Unicritical multiplier continuation

struct UniTracker {
    int d, k;
    Complex c0;
    const ContinuationOptions& opt;

    /// Newton on lambda(c) = target; z is the tracked periodic point.
    bool solve(Complex& c, Complex& z, Complex target) const {
        for (int it = 0; it < 40; ++it) {
            CycleJet jet;
            try {
                jet = refine_cycle(Unicritical{d, c}, z, k);
            } catch (const NearParabolic&) {
                return false;
            }
            if (jet.dmultiplier[0] == Complex{}) return false;
            const Complex step = (jet.multiplier - target) / jet.dmultiplier[0];
            if (!std::isfinite(step.real()) || !std::isfinite(step.imag())) return false;
            c -= step;
            z = jet.z;
            if (std::abs(step) <= opt.newton_tol * std::max(1.0, std::abs(c))) return true;
        }
        return false;
    }

    Complex run(Complex target, int sheet, double& residual) const {
        const std::string where = "center " + complex_str(c0);
        // Size of the multiplier near the centre: lambda ~ A (c - c0)^(d-1).
        double h = 1e-3 * std::max(1.0, std::abs(c0));
        CycleJet probe;
        for (int tries = 0;; ++tries) {
            try {
                probe = refine_cycle(Unicritical{d, c0 + h}, 0.0, k);
            } catch (const NearParabolic&) {
                probe.multiplier = 1.0;
            }
            if (std::abs(probe.multiplier) < 1e-4 && probe.multiplier != Complex{}) break;
            if (tries > 12) throw ContinuationFailure(where, 0.0);
            h *= 0.1;
        }
        const Complex A = probe.multiplier / std::pow(Complex(h), d - 1);
        const double root = 1.0 / (d - 1);
        double t = std::pow(opt.ratio, opt.initial_exponent);
        Complex c = c0 + std::pow(t * target / A, root) * std::polar(1.0, 2.0 * kPi * sheet / (d - 1));
        Complex z = 0.0;
        if (!solve(c, z, t * target)) throw ContinuationFailure(where, t);

        int steps = 0;
        while (t < 1.0) {
            double t_new = std::min(1.0, t / opt.ratio);
            bool ok = false;
            while (!ok) {
                if (++steps > opt.max_steps) throw ContinuationFailure(where, t);
                const Complex pred = c0 + (c - c0) * std::pow(t_new / t, root);
                Complex cn = pred, zn = z;
                ok = solve(cn, zn, t_new * target) &&
                     std::abs(cn - pred) <= 0.5 * std::abs(pred - c0) + 1e-14;
                if (ok) {
                    c = cn;
                    z = zn;
                    t = t_new;
                } else {
                    t_new = t * std::sqrt(t_new / t);
                    if (t_new / t - 1.0 < 1e-12) throw ContinuationFailure(where, t);
                }
            }
        }
        const CycleJet fin = refine_cycle(Unicritical{d, c}, z, k);
        residual = std::abs(fin.multiplier - target);
        return c;
    }
};

// ---------------------------------------------------------------------------
// The cubic centre system as a chain of cubic equations
//
// Unknowns: c1, u and the intermediate orbit points x_2..x_{m0-1} of 0 and
// y_1..y_{m1-1} of c1. Each equation is z_next = P(z) (or P(z) = 0, or
// P(z) = c1 at the end of the second chain), so all degrees are 3 apart
// from the linear u = 0 when m0 = 1.

Complex cubic_map(Complex z, Complex c1, Complex u) { return z * z * z / 3.0 - c1 * z * z / 2.0 + u; }

double norm(const VecX& v, int n) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += std::norm(v[i]);
    return std::sqrt(s);
}

bool finite(const VecX& v, int n) {
    for (int i = 0; i < n; ++i) {
        if (!std::isfinite(v[i].real()) || !std::isfinite(v[i].imag())) return false;
    }
    return true;
}

/// Solves a x = b in place (b becomes x) by elimination with partial
/// pivoting; a is row-major n x n and is destroyed.
bool solve_in_place(int n, MatX& a, VecX& b) {
    for (int k = 0; k < n; ++k) {
        int piv = k;
        double best = std::norm(a[k * kMaxChain + k]);
        for (int r = k + 1; r < n; ++r) {
            const double v = std::norm(a[r * kMaxChain + k]);
            if (v > best) {
                best = v;
                piv = r;
            }
        }
        if (best == 0.0) return false;
        if (piv != k) {
            for (int c = k; c < n; ++c) std::swap(a[k * kMaxChain + c], a[piv * kMaxChain + c]);
            std::swap(b[k], b[piv]);
        }
        const Complex inv = 1.0 / a[k * kMaxChain + k];
        for (int r = k + 1; r < n; ++r) {
            const Complex f = a[r * kMaxChain + k] * inv;
            if (f == Complex{}) continue;
            for (int c = k + 1; c < n; ++c) a[r * kMaxChain + c] -= f * a[k * kMaxChain + c];
            b[r] -= f * b[k];
        }
    }
    for (int k = n - 1; k >= 0; --k) {
        Complex acc = b[k];
        for (int c = k + 1; c < n; ++c) acc -= a[k * kMaxChain + c] * b[c];
        b[k] = acc / a[k * kMaxChain + k];
    }
    return finite(b, n);
}

class ChainSystem {
public:
    ChainSystem(int m0, int m1) {
        // Variable layout.
        const int x_count = std::max(0, m0 - 2);
        const int y_count = m1 - 1;
        size_ = 2 + x_count + y_count;
        const int x0 = 2, y0 = 2 + x_count;
        if (m0 == 1) {
            eqs_.push_back({Kind::LinearU, 0, -1, false});
        } else {
            int src = 1;  // u = P(0)
            for (int k = 2; k <= m0 - 1; ++k) {
                const int dst = x0 + (k - 2);
                eqs_.push_back({Kind::Chain, src, dst, false});
                src = dst;
            }
            eqs_.push_back({Kind::Chain, src, -1, false});
        }
        int src = 0;  // c1
        for (int k = 1; k <= m1 - 1; ++k) {
            const int dst = y0 + (k - 1);
            eqs_.push_back({Kind::Chain, src, dst, false});
            src = dst;
        }
        eqs_.push_back({Kind::Chain, src, -1, true});
        for (const auto& e : eqs_) degrees_.push_back(e.kind == Kind::LinearU ? 1 : 3);
    }

    int size() const { return size_; }
    const std::vector<int>& degrees() const { return degrees_; }

    /// Values and row-major Jacobian; `jac` may be null.
    void eval(const VecX& v, VecX& f, MatX* jac) const {
        if (jac) std::fill(jac->begin(), jac->begin() + size_ * kMaxChain, Complex{});
        const Complex c1 = v[0], u = v[1];
        for (int i = 0; i < size_; ++i) {
            const Eq& e = eqs_[static_cast<std::size_t>(i)];
            Complex* row = jac ? jac->data() + i * kMaxChain : nullptr;
            if (e.kind == Kind::LinearU) {
                f[i] = u;
                if (row) row[1] = 1.0;
                continue;
            }
            const Complex z = v[e.src];
            f[i] = cubic_map(z, c1, u);
            if (row) {
                row[e.src] += z * z - c1 * z;
                row[0] += -z * z / 2.0;
                row[1] += 1.0;
            }
            if (e.dst >= 0) {
                f[i] -= v[e.dst];
                if (row) row[e.dst] -= 1.0;
            }
            if (e.minus_c1) {
                f[i] -= c1;
                if (row) row[0] -= 1.0;
            }
        }
    }

private:
    enum class Kind { Chain, LinearU };
    struct Eq {
        Kind kind;
        int src, dst;
        bool minus_c1;
    };
    int size_ = 0;
    std::vector<Eq> eqs_;
    std::vector<int> degrees_;
};

struct PathEnd {
    VecX v{};
    bool ok = false;
};

/// Total-degree homotopy (1 - s) gamma G + s F with G_i = v_i^deg_i - 1.
class Tracker {
public:
    Tracker(const ChainSystem& sys, Complex gamma, double h_max)
        : sys_(sys), n_(sys.size()), gamma_(gamma), h_max_(h_max) {}

    PathEnd track(VecX v) const {
        const int n = n_;
        double s = 0.0, h = std::min(0.01, h_max_);
        int streak = 0;
        for (int steps = 0; s < 1.0; ++steps) {
            if (steps > 20000 || h < 1e-10) return {v, false};
            const double hs = std::min(h, 1.0 - s);
            // Runge-Kutta predictor on dv/ds = -H_v^-1 H_s.
            VecX k1, k2, k3, k4, tmp;
            bool ok = tangent(v, s, k1);
            if (ok) {
                for (int i = 0; i < n; ++i) tmp[i] = v[i] + 0.5 * hs * k1[i];
                ok = tangent(tmp, s + 0.5 * hs, k2);
            }
            if (ok) {
                for (int i = 0; i < n; ++i) tmp[i] = v[i] + 0.5 * hs * k2[i];
                ok = tangent(tmp, s + 0.5 * hs, k3);
            }
            if (ok) {
                for (int i = 0; i < n; ++i) tmp[i] = v[i] + hs * k3[i];
                ok = tangent(tmp, s + hs, k4);
            }
            if (!ok) {
                h *= 0.5;
                streak = 0;
                continue;
            }
            VecX w;
            for (int i = 0; i < n; ++i) w[i] = v[i] + hs / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            double move = 0.0;
            for (int i = 0; i < n; ++i) move += std::norm(w[i] - v[i]);
            move = std::sqrt(move);
            ok = false;
            for (int it = 0; it < 3; ++it) {
                VecX r;
                MatX j;
                homotopy(w, s + hs, r, &j);
                if (!solve_in_place(n, j, r)) break;
                for (int i = 0; i < n; ++i) w[i] -= r[i];
                const double dx = norm(r, n), size = 1.0 + norm(w, n);
                if (it == 0 && dx > 0.25 * move + 1e-9 * size) break;
                if (dx <= 1e-10 * size) {
                    ok = true;
                    break;
                }
            }
            if (ok) {
                v = w;
                s += hs;
                if (++streak >= 3) {
                    h = std::min(2.0 * h, h_max_);
                    streak = 0;
                }
            } else {
                h *= 0.5;
                streak = 0;
            }
        }
        // Polish on the target system.
        VecX f;
        for (int it = 0; it < 20; ++it) {
            MatX j;
            sys_.eval(v, f, &j);
            if (!solve_in_place(n, j, f)) return {v, false};
            for (int i = 0; i < n; ++i) v[i] -= f[i];
            if (norm(f, n) <= 1e-14 * (1.0 + norm(v, n))) return {v, true};
        }
        sys_.eval(v, f, nullptr);
        return {v, norm(f, n) <= 1e-10 * (1.0 + norm(v, n))};
    }

private:
    /// H and H_v at (v, s); hs receives H_s when non-null.
    void homotopy(const VecX& v, double s, VecX& hv, MatX* jh, VecX* hs = nullptr) const {
        VecX f;
        sys_.eval(v, f, jh);
        const Complex a = (1.0 - s) * gamma_;
        for (int i = 0; i < n_; ++i) {
            const int deg = sys_.degrees()[static_cast<std::size_t>(i)];
            Complex p = 1.0;
            for (int e = 0; e < deg - 1; ++e) p *= v[i];
            const Complex g = p * v[i] - 1.0;
            hv[i] = a * g + s * f[i];
            if (hs) (*hs)[i] = f[i] - gamma_ * g;
            if (jh) {
                Complex* row = jh->data() + i * kMaxChain;
                for (int c = 0; c < n_; ++c) row[c] *= s;
                row[i] += a * static_cast<double>(deg) * p;
            }
        }
    }

    bool tangent(const VecX& v, double s, VecX& out) const {
        VecX hv;
        MatX j;
        homotopy(v, s, hv, &j, &out);
        if (!solve_in_place(n_, j, out)) return false;
        for (int i = 0; i < n_; ++i) out[i] = -out[i];
        return true;
    }

    const ChainSystem& sys_;
    int n_;
    Complex gamma_;
    double h_max_;
};

/// Least-period checks in the chart: 0 returns first at m0, c1 at m1.
bool has_exact_periods(Complex c1, Complex u, int m0, int m1) {
    auto check = [&](Complex start, int m) {
        Complex z = start;
        double size = std::abs(start) + 1.0;
        std::vector<Complex> orbit;
        for (int k = 1; k <= m; ++k) {
            z = cubic_map(z, c1, u);
            orbit.push_back(z);
            size = std::max(size, std::abs(z) + 1.0);
        }
        if (std::abs(orbit.back() - start) > 1e-8 * size) return false;
        for (int k = 1; k < m; ++k) {
            if (m % k == 0 && std::abs(orbit[static_cast<std::size_t>(k - 1)] - start) <= 1e-8 * size) return false;
        }
        return true;
    };
    return check(0.0, m0) && check(c1, m1);
}

/// Residual of a cubic centre: the larger periodicity defect.
double cubic_center_residual(const CubicModuli& p, int n0, int n1) {
    const Orbit o0 = orbit_critical(p, 0, n0);
    const Orbit o1 = orbit_critical(p, 1, n1);
    if (o0.escaped_at >= 0 || o1.escaped_at >= 0) return std::numeric_limits<double>::infinity();
    return std::max(std::abs(o0.points.back() - o0.points.front()), std::abs(o1.points.back() - o1.points.front()));
}

// ---------------------------------------------------------------------------
// Multistart Newton in (c1, a)

std::optional<CubicModuli> cubic_newton(CubicModuli x, int n0, int n1) {
    int tail = -1;
    for (int it = 0; it < 150; ++it) {
        PnjValue f0, f1;
        try {
            f0 = pnj_value(x, n0, 0);
            f1 = pnj_value(x, n1, 1);
        } catch (const std::exception&) {
            return std::nullopt;
        }
        Mat2 j;
        j << f0.gradient[0], f0.gradient[1], f1.gradient[0], f1.gradient[1];
        Vec2 rhs(f0.value, f1.value);
        Vec2 step = Eigen::PartialPivLU<Mat2>(j).solve(rhs);
        if (!step.allFinite()) return std::nullopt;
        const double size = std::sqrt(std::norm(x.c1) + std::norm(x.a));
        const double len = step.norm();
        const double cap = std::max(1.0, 0.5 * size);
        if (len > cap) step *= cap / len;
        x.c1 -= step[0];
        x.a -= step[1];
        if (!std::isfinite(std::abs(x.c1)) || !std::isfinite(std::abs(x.a)) || size > 1e3) return std::nullopt;
        if (tail < 0 && len <= 1e-10 * (1.0 + size)) tail = 0;
        if (tail >= 0 && (++tail > 2 || len <= 1e-15 * (1.0 + size))) {
            if (!has_exact_periods(x.c1, x.a * x.a * x.a, n0, n1)) return std::nullopt;
            return x;
        }
    }
    return std::nullopt;
}

std::size_t cubic_expected(int n0, int n1) { return exact_count(3, n0) * exact_count(3, n1); }

void check_cubic_periods(int n0, int n1) {
    if (n0 < 2) throw DomainError("n0 must be at least 2");
    if (n1 < 1) throw DomainError("n1 must be positive");
    if (n0 == n1) throw DomainError("periods must be distinct");
}

// ---------------------------------------------------------------------------
// Cubic multiplier continuation in the chart

struct CubicTracker {
    int m0, m1;
    const ContinuationOptions& opt;

    bool solve(Vec2& x, Complex& z0, Complex& z1, Complex t0, Complex t1) const {
        for (int it = 0; it < 40; ++it) {
            CycleJet j0, j1;
            try {
                j0 = refine_cycle(CubicChart{x[0], x[1]}, z0, m0);
                j1 = refine_cycle(CubicChart{x[0], x[1]}, z1, m1);
            } catch (const NearParabolic&) {
                return false;
            }
            Mat2 jac;
            jac << j0.dmultiplier[0], j0.dmultiplier[1], j1.dmultiplier[0], j1.dmultiplier[1];
            const Vec2 rhs(j0.multiplier - t0, j1.multiplier - t1);
            const Vec2 step = Eigen::PartialPivLU<Mat2>(jac).solve(rhs);
            if (!step.allFinite()) return false;
            x -= step;
            z0 = j0.z;
            z1 = j1.z;
            if (step.norm() <= opt.newton_tol * (1.0 + x.norm())) return true;
        }
        return false;
    }

    /// Moves target (from_0, from_1) to (to_0, to_1) along t in (0, 1].
    void phase(Vec2& x, Complex& z0, Complex& z1, Complex a0, Complex a1, Complex b0, Complex b1,
               const std::string& where) const {
        auto target = [&](double t, Complex& t0, Complex& t1) {
            t0 = a0 + t * (b0 - a0);
            t1 = a1 + t * (b1 - a1);
        };
        double t = std::pow(opt.ratio, opt.initial_exponent);
        Complex t0, t1;
        target(t, t0, t1);
        Vec2 prev = x;
        double t_prev = 0.0;
        if (!solve(x, z0, z1, t0, t1)) throw ContinuationFailure(where, t);
        int steps = 0;
        while (t < 1.0) {
            double t_new = std::min(1.0, t / opt.ratio);
            for (;;) {
                if (++steps > opt.max_steps) throw ContinuationFailure(where, t);
                const Vec2 pred = x + (x - prev) * ((t_new - t) / (t - t_prev));
                Vec2 xn = pred;
                Complex zn0 = z0, zn1 = z1;
                target(t_new, t0, t1);
                if (solve(xn, zn0, zn1, t0, t1) && (xn - pred).norm() <= 2.0 * (pred - x).norm() + 1e-12) {
                    prev = x;
                    t_prev = t;
                    x = xn;
                    z0 = zn0;
                    z1 = zn1;
                    t = t_new;
                    break;
                }
                t_new = t * std::sqrt(t_new / t);
                if (t_new / t - 1.0 < 1e-12) throw ContinuationFailure(where, t);
            }
        }
    }

    Vec2 run(const CubicChart& center, Complex w0, Complex w1, double& residual) const {
        Vec2 x(center.c1, center.u);
        Complex z0 = 0.0, z1 = center.c1;
        const std::string where = "cubic center (" + complex_str(center.c1) + ", u=" + complex_str(center.u) + ")";
        if (w0 != Complex{}) phase(x, z0, z1, 0.0, 0.0, w0, 0.0, where);
        if (w1 != Complex{}) phase(x, z0, z1, w0, 0.0, w0, w1, where);
        const CycleJet j0 = refine_cycle(CubicChart{x[0], x[1]}, z0, m0);
        const CycleJet j1 = refine_cycle(CubicChart{x[0], x[1]}, z1, m1);
        residual = std::max(std::abs(j0.multiplier - w0), std::abs(j1.multiplier - w1));
        return x;
    }
};

}  // namespace

// ---------------------------------------------------------------------------

LocusResult centers_unicritical(int d, int n, bool exact_period, const AberthOptions& opts) {
    check_unicritical(d, n);
    const RootSet rs = exact_period ? exact_period_roots(d, n, opts) : critical_orbit_roots(d, n, 0.0, opts);
    const std::size_t expected = exact_period ? exact_count(d, n) / static_cast<std::size_t>(d) : upow(d, n - 1);
    LocusResult r = roots_locus(d, rs, expected);
    for (const Complex c : rs.roots) {
        const OrbitPolyValue v = evaluate_critical_orbit(d, n, c);
        if (v.escaped || !(std::abs(v.derivative) > 1e-12 * std::max(1.0, v.scale))) {
            throw CountMismatch("Q_n has a multiple root near " + complex_str(c), rs.roots.size() - 1, expected);
        }
    }
    finalize(r, kRootDedupRadius, "centers_unicritical");
    return r;
}

LocusResult preimage_locus(int d, int n, Complex z, const AberthOptions& opts) {
    check_unicritical(d, n);
    LocusResult r = roots_locus(d, critical_orbit_roots(d, n, z, opts), upow(d, n - 1));
    finalize(r, kRootDedupRadius, "preimage_locus");
    return r;
}

namespace {

LocusResult multiplier_jobs(int d, int n, Complex w, bool exact_only, const ContinuationOptions& opts) {
    struct Job {
        int k;
        Complex c0;
        Complex target;
        int sheet;
    };
    std::vector<Job> jobs;
    for (std::uint64_t k64 : divisors(static_cast<std::uint64_t>(n))) {
        const int k = static_cast<int>(k64);
        if (exact_only && k != n) continue;
        const Complex target = std::exp(std::log(w) * (static_cast<double>(k) / n));
        for (const Complex c0 : exact_period_roots(d, k).roots) {
            for (int s = 0; s < d - 1; ++s) jobs.push_back({k, c0, target, s});
        }
    }
    std::vector<Complex> found(jobs.size());
    std::vector<double> res(jobs.size());
    parallel_for(jobs.size(), [&](std::size_t i) {
        const Job& j = jobs[i];
        const UniTracker tr{d, j.k, j.c0, opts};
        found[i] = tr.run(j.target, j.sheet, res[i]);
    });

    LocusResult r;
    r.method = LocusMethod::Continuation;
    r.expected_count = static_cast<std::size_t>(d - 1) *
                       (exact_only ? exact_count(d, n) / static_cast<std::size_t>(d) : upow(d, n - 1));
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        r.points.push_back(Unicritical{d, found[i]});
        r.residuals.push_back(res[i]);
    }
    finalize(r, kRootDedupRadius, exact_only ? "exact_multiplier_locus" : "multiplier_locus");
    return r;
}

}  // namespace

LocusResult multiplier_locus(int d, int n, Complex w, const ContinuationOptions& opts) {
    check_unicritical(d, n);
    if (!(std::abs(w) < 1.0)) throw DomainError("multiplier_locus: |w| must be below 1");
    if (w == Complex{}) return centers_unicritical(d, n, false);
    return multiplier_jobs(d, n, w, false, opts);
}

LocusResult exact_multiplier_locus(int d, int n, Complex w, const ContinuationOptions& opts) {
    check_unicritical(d, n);
    if (!(std::abs(w) < 1.0)) throw DomainError("exact_multiplier_locus: |w| must be below 1");
    if (w == Complex{}) return centers_unicritical(d, n, true);
    return multiplier_jobs(d, n, w, true, opts);
}

ChartSolutions cubic_center_chart(int m0, int m1, std::uint64_t seed) {
    if (m0 < 1 || m1 < 1) throw DomainError("periods must be positive");
    if (m0 == m1) throw DomainError("periods must be distinct");
    if (m0 + m1 - 1 > kMaxChain) throw DomainError("cubic_center_chart: periods too large");
    const ChainSystem sys(m0, m1);
    const int n = sys.size();
    std::size_t paths = 1;
    for (int deg : sys.degrees()) paths *= static_cast<std::size_t>(deg);
    const std::size_t expected = exact_count(3, m0) * exact_count(3, m1) / 3;

    ChartSolutions out;
    out.paths = paths;
    std::vector<Key> keys;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> angle(0.0, 2.0 * kPi);
    const double h_max[] = {0.1, 0.02, 0.004};
    for (double hm : h_max) {
        const Complex gamma = std::polar(1.0, angle(rng));
        const Tracker tracker(sys, gamma, hm);
        std::vector<PathEnd> ends(paths);
        parallel_for(paths, [&](std::size_t p) {
            VecX v{};
            std::size_t code = p;
            for (int i = 0; i < n; ++i) {
                const int deg = sys.degrees()[static_cast<std::size_t>(i)];
                const std::size_t digit = code % static_cast<std::size_t>(deg);
                code /= static_cast<std::size_t>(deg);
                v[i] = std::polar(1.0, 2.0 * kPi * static_cast<double>(digit) / deg);
            }
            ends[p] = tracker.track(v);
        });
        out.failed_paths = 0;
        for (const auto& e : ends) {
            if (!e.ok) {
                ++out.failed_paths;
                continue;
            }
            if (has_exact_periods(e.v[0], e.v[1], m0, m1)) keys.push_back({e.v[0], e.v[1]});
        }
        const auto kept = dedup_indices(keys, 1e-10);
        std::vector<Key> unique;
        for (std::size_t i : kept) unique.push_back(keys[i]);
        keys = std::move(unique);
        if (keys.size() >= expected) break;
    }
    std::sort(keys.begin(), keys.end(), key_less);
    for (const auto& k : keys) out.points.push_back({k[0], k[1]});
    return out;
}

LocusResult centers_cubic(int n0, int n1, const CubicSeeding& seeding) {
    check_cubic_periods(n0, n1);
    const std::size_t expected = cubic_expected(n0, n1);
    CubicSolver solver = seeding.solver;
    if (solver == CubicSolver::Auto) {
        solver = expected > seeding.multistart_limit ? CubicSolver::Homotopy : CubicSolver::MultistartNewton;
    }

    LocusResult r;
    r.expected_count = expected;
    if (solver == CubicSolver::Homotopy) {
        r.method = LocusMethod::Homotopy;
        const ChartSolutions chart = cubic_center_chart(n0, n1, seeding.seed);
        for (const auto& q : chart.points) {
            const Complex root = std::pow(q.u, 1.0 / 3.0);
            for (int j = 0; j < 3; ++j) {
                const CubicModuli p{q.c1, root * std::polar(1.0, 2.0 * kPi * j / 3.0)};
                r.points.push_back(p);
                r.residuals.push_back(cubic_center_residual(p, n0, n1));
            }
        }
        finalize(r, kDedupRadius, "centers_cubic");
        return r;
    }

    r.method = LocusMethod::MultistartNewton;
    const double radius = 16.0 * std::numbers::sqrt2;
    std::vector<Key> keys;
    int g = std::max(2, seeding.grid);
    for (int level = 0; level <= seeding.max_refinements; ++level, g *= 2) {
        std::vector<std::array<double, 4>> seeds;
        auto coord = [&](int i) { return -radius + (i + 0.5) * 2.0 * radius / g; };
        for (int i0 = 0; i0 < g; ++i0)
            for (int i1 = 0; i1 < g; ++i1)
                for (int i2 = 0; i2 < g; ++i2)
                    for (int i3 = 0; i3 < g; ++i3) {
                        const std::array<double, 4> s{coord(i0), coord(i1), coord(i2), coord(i3)};
                        if (s[0] * s[0] + s[1] * s[1] + s[2] * s[2] + s[3] * s[3] <= radius * radius) seeds.push_back(s);
                    }
        std::vector<std::optional<CubicModuli>> sol(seeds.size());
        parallel_for(seeds.size(), [&](std::size_t i) {
            const auto& s = seeds[i];
            sol[i] = cubic_newton(CubicModuli{{s[0], s[1]}, {s[2], s[3]}}, n0, n1);
        });
        for (const auto& s : sol) {
            if (s) keys.push_back({s->c1, s->a});
        }
        const auto kept = dedup_indices(keys, kDedupRadius);
        std::vector<Key> unique;
        for (std::size_t i : kept) unique.push_back(keys[i]);
        keys = std::move(unique);
        if (keys.size() >= expected) break;
    }
    for (const auto& k : keys) {
        const CubicModuli p{k[0], k[1]};
        r.points.push_back(p);
        r.residuals.push_back(cubic_center_residual(p, n0, n1));
    }
    finalize(r, kDedupRadius, "centers_cubic");
    return r;
}

Transversality transversality_check(const CubicModuli& p, int n0, int n1) {
    check_cubic_periods(n0, n1);
    auto jacobian = [&](const CubicModuli& q) {
        const PnjValue f0 = pnj_value(q, n0, 0);
        const PnjValue f1 = pnj_value(q, n1, 1);
        Mat2 j;
        j << f0.gradient[0], f0.gradient[1], f1.gradient[0], f1.gradient[1];
        return j;
    };
    auto values = [&](const CubicModuli& q) { return Vec2(pnj_value(q, n0, 0).value, pnj_value(q, n1, 1).value); };
    const Mat2 j = jacobian(p);
    Eigen::JacobiSVD<Mat2> svd(j);
    Transversality out;
    out.sigma_min = svd.singularValues()[1];

    Mat2 fd;
    for (int k = 0; k < 2; ++k) {
        const double h = 1e-6 * std::max(1.0, std::abs(k == 0 ? p.c1 : p.a));
        CubicModuli plus = p, minus = p;
        (k == 0 ? plus.c1 : plus.a) += h;
        (k == 0 ? minus.c1 : minus.a) -= h;
        fd.col(k) = (values(plus) - values(minus)) / (2.0 * h);
    }
    out.fd_deviation = (fd - j).norm() / std::max(j.norm(), 1e-300);
    const double threshold = 1e-10 * std::max(1.0, j.norm());
    if (!(out.sigma_min > threshold)) throw TransversalityViolation(out.sigma_min, threshold);
    return out;
}

LocusResult cubic_multiplier_locus(int n0, int n1, Complex w0, Complex w1, const ContinuationOptions& opts) {
    check_cubic_periods(n0, n1);
    if (!(std::abs(w0) < 1.0) || !(std::abs(w1) < 1.0)) {
        throw DomainError("cubic_multiplier_locus: multipliers must lie in the unit disk");
    }
    struct Assignment {
        int m0, m1;
        Complex t0, t1;
    };
    const Assignment assignments[] = {{n0, n1, w0, w1}, {n1, n0, w1, w0}};

    LocusResult r;
    r.method = LocusMethod::Continuation;
    r.expected_count = 2 * cubic_expected(n0, n1);
    bool any_multiple = false;
    std::vector<int> mult;
    for (const auto& as : assignments) {
        const ChartSolutions chart = cubic_center_chart(as.m0, as.m1);
        std::vector<Vec2> ends(chart.points.size());
        std::vector<double> res(chart.points.size());
        const CubicTracker tr{as.m0, as.m1, opts};
        parallel_for(chart.points.size(), [&](std::size_t i) { ends[i] = tr.run(chart.points[i], as.t0, as.t1, res[i]); });
        for (std::size_t i = 0; i < ends.size(); ++i) {
            const Complex c1 = ends[i][0], u = ends[i][1];
            if (std::abs(u) <= 1e-14 * std::pow(1.0 + std::abs(c1), 3.0)) {
                r.points.push_back(CubicModuli{c1, 0.0});
                r.residuals.push_back(res[i]);
                mult.push_back(3);
                any_multiple = true;
                continue;
            }
            const Complex root = std::pow(u, 1.0 / 3.0);
            for (int j = 0; j < 3; ++j) {
                r.points.push_back(CubicModuli{c1, root * std::polar(1.0, 2.0 * kPi * j / 3.0)});
                r.residuals.push_back(res[i]);
                mult.push_back(1);
            }
        }
    }
    if (any_multiple) r.multiplicity = std::move(mult);
    finalize(r, kDedupRadius, "cubic_multiplier_locus");
    return r;
}

}  // namespace dynlab
