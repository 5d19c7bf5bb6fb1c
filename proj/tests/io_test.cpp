#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "doctest.h"
#include "dynlab/io.hpp"

using namespace dynlab;

TEST_CASE("parse_complex forms") {
    CHECK(parse_complex("1.5") == Complex(1.5, 0.0));
    CHECK(parse_complex("-2") == Complex(-2.0, 0.0));
    CHECK(parse_complex("0.3+0.4i") == Complex(0.3, 0.4));
    CHECK(parse_complex("0.3 - 0.4i") == Complex(0.3, -0.4));
    CHECK(parse_complex("-1+i") == Complex(-1.0, 1.0));
    CHECK(parse_complex("-i") == Complex(0.0, -1.0));
    CHECK(parse_complex("i") == Complex(0.0, 1.0));
    CHECK(parse_complex("2.5j") == Complex(0.0, 2.5));
    CHECK(parse_complex("1e-3-2E+2i") == Complex(1e-3, -200.0));
    CHECK(parse_complex("+4") == Complex(4.0, 0.0));
    CHECK_THROWS_AS(parse_complex(""), ParseError);
    CHECK_THROWS_AS(parse_complex("abc"), ParseError);
    CHECK_THROWS_AS(parse_complex("1+2"), ParseError);
}

TEST_CASE("property: format_complex round-trips") {
    std::mt19937_64 rng(2);
    std::normal_distribution<double> g(0.0, 1e3);
    for (int i = 0; i < 500; ++i) {
        const Complex z(g(rng) * std::pow(10.0, i % 7 - 3), -g(rng));
        CHECK(parse_complex(format_complex(z)) == z);
        CHECK(parse_double(format_double(z.real())) == z.real());
    }
}

TEST_CASE("property: point tables round-trip exactly") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g(0.0, 1.0);
    for (int dim : {1, 2}) {
        PointTable t;
        t.dim = dim;
        for (int i = 0; i < 100; ++i) {
            t.points.push_back({Complex(g(rng), g(rng)), dim == 2 ? Complex(g(rng), g(rng)) : Complex{}});
            t.residuals.push_back(std::abs(g(rng)) * 1e-14);
        }
        std::stringstream ss;
        write_points(ss, t);
        CHECK(read_points(ss) == t);
    }
}

TEST_CASE("point tables from loci") {
    LocusResult r;
    r.points = {CubicModuli{1.0, {0.0, 2.0}}};
    r.residuals = {1e-15};
    const PointTable t = to_table(r);
    CHECK(t.dim == 2);
    REQUIRE(t.points.size() == 1);
    CHECK(t.points[0][1] == Complex(0.0, 2.0));
    std::stringstream ss;
    write_points(ss, t);
    CHECK(ss.str().rfind("re,im,re2,im2,residual\n", 0) == 0);
}

TEST_CASE("malformed tables are rejected") {
    std::stringstream bad_header("x,y\n1,2\n");
    CHECK_THROWS_AS(read_points(bad_header), ParseError);
    std::stringstream bad_row("re,im,residual\n1,2\n");
    CHECK_THROWS_AS(read_points(bad_row), ParseError);
    std::stringstream bad_series("n,delta\n1.5,2\n");
    CHECK_THROWS_AS(read_series(bad_series), ParseError);
}

TEST_CASE("property: discrepancy series round-trip exactly") {
    std::vector<DiscrepancySample> s;
    for (int n = 1; n <= 20; ++n) s.push_back({n, std::ldexp(0.7, -n) / 3.0});
    s.push_back({21, std::numeric_limits<double>::denorm_min()});
    std::stringstream ss;
    write_series(ss, s);
    CHECK(read_series(ss) == s);
}
