#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "soundmap/analysis.hpp"
#include "soundmap/corpus.hpp"
#include "soundmap/som.hpp"

namespace soundmap::report {

/// One projected song on the map.
struct MapDot {
    som::CellCoord cell;
    std::string group;
    std::string label; ///< song id; also seeds the in-cell jitter
};

/// Everything a map rendering needs. Rendering is a pure function of this.
struct MapScene {
    int rows = 0;
    int cols = 0;
    std::vector<std::vector<double>> background; ///< U-matrix values, rows x cols
    std::vector<MapDot> dots;
    std::vector<analysis::Region> overlays;
    std::vector<std::pair<std::string, std::string>> legend; ///< group -> color, draw order
};

/// Deterministic color assignment for a list of groups (sorted, deduplicated).
std::vector<std::pair<std::string, std::string>> default_legend(std::span<const std::string> groups);

/// Standalone SVG: one rect per cell shaded by the normalized U-matrix
/// (light = similar neighbors), translucent region overlays, one circle per
/// dot with deterministic in-cell jitter derived from the dot label.
std::string render_map_svg(const MapScene& scene);

/// CSV with header `id,performer,producer,role,group,f0..f5` at full float
/// precision, row order preserved. All rows must share one feature kind
/// (enforced upstream by extraction).
std::string export_features(
    const std::vector<std::pair<SongRecord, std::vector<double>>>& rows);

/// One statistics row: a group of projected songs tested against a region.
struct StatsRow {
    std::string region;
    std::string region_group;
    std::string song_group;
    std::string performer; ///< "(pooled)" for aggregate rows
    double area_fraction = 0.0;
    analysis::GofResult gof;
};

struct StatsReport {
    int rows = 0;
    int cols = 0;
    std::vector<std::pair<std::string, double>> region_fractions; ///< region name -> fraction
    std::vector<StatsRow> entries;
    std::vector<std::string> notices; ///< skipped combinations and why
};

/// Tests every song group against every region: a pooled row per (region,
/// group), plus per-performer rows for the region's own group. Groups with no
/// songs and regions with a degenerate area fraction are skipped with a
/// notice.
StatsReport build_stats_report(const std::vector<std::pair<SongRecord, som::CellCoord>>& projected,
                               std::span<const analysis::Region> regions, int rows, int cols);

/// "p<0.001" below the threshold, else three significant figures.
std::string format_p_value(double p);

std::string stats_report_text(const StatsReport& report);
std::string stats_report_json(const StatsReport& report);

} // namespace soundmap::report
