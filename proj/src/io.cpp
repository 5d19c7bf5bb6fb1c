#include "dynlab/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>

namespace dynlab {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const std::size_t comma = line.find(',', start);
        out.push_back(trim(line.substr(start, comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

int parse_int(std::string_view s) {
    int v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) throw ParseError("not an integer: '" + std::string(s) + "'");
    return v;
}

}  // namespace

std::string format_double(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

double parse_double(std::string_view s) {
    s = trim(s);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) throw ParseError("not a number: '" + std::string(s) + "'");
    return v;
}

Complex parse_complex(std::string_view text) {
    std::string compact;
    for (char ch : text) {
        if (ch != ' ' && ch != '\t') compact.push_back(ch);
    }
    std::string_view s = compact;
    if (s.empty()) throw ParseError("empty complex number");
    if (s.back() != 'i' && s.back() != 'j') return {parse_double(s), 0.0};
    s.remove_suffix(1);
    // The split point is the last sign that does not belong to an exponent.
    std::size_t cut = std::string_view::npos;
    for (std::size_t k = s.size(); k-- > 1;) {
        if ((s[k] == '+' || s[k] == '-') && s[k - 1] != 'e' && s[k - 1] != 'E') {
            cut = k;
            break;
        }
    }
    auto imag_part = [](std::string_view t) {
        if (t.empty() || t == "+") return 1.0;
        if (t == "-") return -1.0;
        return parse_double(t);
    };
    if (cut == std::string_view::npos) return {0.0, imag_part(s)};
    return {parse_double(s.substr(0, cut)), imag_part(s.substr(cut))};
}

std::string format_complex(Complex z) {
    std::string s = format_double(z.real());
    if (!std::signbit(z.imag())) s += '+';
    return s + format_double(z.imag()) + "i";
}

PointTable to_table(const LocusResult& locus) {
    PointTable t;
    for (std::size_t i = 0; i < locus.points.size(); ++i) {
        const ParamPoint& p = locus.points[i];
        const ParamVector v = parameters(p);
        if (std::holds_alternative<CubicModuli>(p)) {
            t.dim = 2;
            t.points.push_back({v[0], v[1]});
        } else {
            t.points.push_back({v[0], 0.0});
        }
        t.residuals.push_back(i < locus.residuals.size() ? locus.residuals[i] : 0.0);
    }
    return t;
}

PointTable to_table(const PointMeasure& m) {
    PointTable t;
    t.dim = m.dim;
    t.points = m.points;
    t.residuals.assign(m.points.size(), 0.0);
    return t;
}

void write_points(std::ostream& os, const PointTable& t) {
    os << (t.dim == 2 ? "re,im,re2,im2,residual\n" : "re,im,residual\n");
    for (std::size_t i = 0; i < t.points.size(); ++i) {
        const auto& p = t.points[i];
        os << format_double(p[0].real()) << ',' << format_double(p[0].imag());
        if (t.dim == 2) os << ',' << format_double(p[1].real()) << ',' << format_double(p[1].imag());
        os << ',' << format_double(t.residuals[i]) << '\n';
    }
}

PointTable read_points(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw ParseError("missing header");
    PointTable t;
    const std::string_view header = trim(line);
    if (header == "re,im,residual") {
        t.dim = 1;
    } else if (header == "re,im,re2,im2,residual") {
        t.dim = 2;
    } else {
        throw ParseError("unknown point table header: '" + line + "'");
    }
    const std::size_t columns = t.dim == 2 ? 5 : 3;
    while (std::getline(is, line)) {
        if (trim(line).empty()) continue;
        const auto f = split(line);
        if (f.size() != columns) throw ParseError("wrong column count in row: '" + line + "'");
        MeasurePoint p{Complex(parse_double(f[0]), parse_double(f[1])), Complex{}};
        if (t.dim == 2) p[1] = Complex(parse_double(f[2]), parse_double(f[3]));
        t.points.push_back(p);
        t.residuals.push_back(parse_double(f[columns - 1]));
    }
    return t;
}

void write_series(std::ostream& os, const std::vector<DiscrepancySample>& s) {
    os << "n,delta\n";
    for (const auto& x : s) os << x.n << ',' << format_double(x.delta) << '\n';
}

std::vector<DiscrepancySample> read_series(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || trim(line) != "n,delta") throw ParseError("expected header 'n,delta'");
    std::vector<DiscrepancySample> out;
    while (std::getline(is, line)) {
        if (trim(line).empty()) continue;
        const auto f = split(line);
        if (f.size() != 2) throw ParseError("wrong column count in row: '" + line + "'");
        out.push_back({parse_int(f[0]), parse_double(f[1])});
    }
    return out;
}

bool operator==(const DiscrepancySample& a, const DiscrepancySample& b) { return a.n == b.n && a.delta == b.delta; }

}  // namespace dynlab
