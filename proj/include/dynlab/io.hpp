#pragma once

// CSV tables for point sets and discrepancy series, and complex-number
// parsing for command-line values.

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "dynlab/loci.hpp"
#include "dynlab/measures.hpp"

namespace dynlab {

inline constexpr std::string_view kVersion = "1.0.0";

class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Shortest text that reads back to the same double (17 significant digits).
std::string format_double(double x);
double parse_double(std::string_view s);

/// Accepts "a", "a+bi", "a-bi", "bi" and "i" forms, with optional spaces.
Complex parse_complex(std::string_view s);
std::string format_complex(Complex z);

struct PointTable {
    /// 1: columns re,im,residual. 2: re,im,re2,im2,residual.
    int dim = 1;
    std::vector<MeasurePoint> points;
    std::vector<double> residuals;

    friend bool operator==(const PointTable&, const PointTable&) = default;
};

PointTable to_table(const LocusResult& locus);
PointTable to_table(const PointMeasure& m);

void write_points(std::ostream& os, const PointTable& t);
PointTable read_points(std::istream& is);

void write_series(std::ostream& os, const std::vector<DiscrepancySample>& s);
std::vector<DiscrepancySample> read_series(std::istream& is);

bool operator==(const DiscrepancySample& a, const DiscrepancySample& b);

}  // namespace dynlab
