#pragma once

#include <array>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "soundmap/som.hpp"

namespace soundmap::analysis {

/// Polygon over the map in continuous cell coordinates: origin top-left,
/// x = column, y = row. Cell (r, c) has its center at (c + 0.5, r + 0.5).
struct Region {
    std::string name;
    std::string group;
    std::vector<std::array<double, 2>> polygon;
};

/// Two-cell goodness-of-fit outcome.
struct GofResult {
    int observed_in = 0;            ///< k
    int total = 0;                  ///< n
    double expected_fraction = 0.0; ///< p
    double statistic = 0.0;         ///< chi-squared
    int df = 1;
    double p_value = 1.0;
};

/// Even-odd point-in-polygon test; points exactly on an edge count as inside.
bool point_in_polygon(std::span<const std::array<double, 2>> polygon, double x, double y);

/// Tests the cell's center against the region polygon.
bool point_in_region(const Region& region, som::CellCoord cell);

/// Fraction of grid cells whose center lies inside the polygon.
double region_area_fraction(const Region& region, int rows, int cols);

int containment_count(std::span<const som::CellCoord> bmus, const Region& region);

/// Upper-tail chi-squared probability Q(df/2, x/2), absolute error <= 1e-10.
double chi2_sf(double x, int df);

/// Pearson two-cell statistic for k of n observations against expected
/// fraction p, df = 1, no continuity correction. Requires 0 < p < 1.
GofResult chi2_gof(int k, int n, double p);

/// Region config document: one region per line,
///   name, group, [(x0,y0),(x1,y1),...]
/// with `#` comment lines ignored.
std::vector<Region> parse_regions(const std::string& text);
std::vector<Region> load_regions(const std::filesystem::path& path);
std::string format_regions(std::span<const Region> regions);

/// Convex hull of the cells' centers dilated by one cell and clipped to the
/// grid. A synthetic stand-in for manually drawn regions.
Region auto_region(const std::string& name, const std::string& group,
                   std::span<const som::CellCoord> bmus, int rows, int cols);

} // namespace soundmap::analysis
