#include "soundmap/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "soundmap/csv.hpp"

namespace soundmap::report {

namespace {

constexpr int kCellPx = 24;
constexpr int kLegendWidth = 150;
constexpr double kDotRadius = 5.0;

constexpr const char* kPalette[] = {
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
};
constexpr std::size_t kPaletteSize = sizeof(kPalette) / sizeof(kPalette[0]);

std::string fmt(double v) {
    char buf[32];
    const auto result = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed, 2);
    return std::string(buf, result.ptr);
}

/// FNV-1a, the jitter seed for dot placement.
std::uint64_t hash_label(const std::string& label) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : label) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string shade(double normalized) {
    // light = similar neighbors, dark = dissimilar
    const int gray = 245 - static_cast<int>(std::lround(normalized * 170.0));
    char buf[8];
    std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", gray, gray, gray);
    return buf;
}

std::string xml_escape(const std::string& text) {
    std::string out;
    for (char c : text) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out.push_back(c);
        }
    }
    return out;
}

} // namespace

std::vector<std::pair<std::string, std::string>> default_legend(
    std::span<const std::string> groups) {
    std::vector<std::string> sorted(groups.begin(), groups.end());
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    std::vector<std::pair<std::string, std::string>> legend;
    legend.reserve(sorted.size());
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        legend.emplace_back(sorted[i], kPalette[i % kPaletteSize]);
    }
    return legend;
}

std::string render_map_svg(const MapScene& scene) {
    if (scene.rows < 1 || scene.cols < 1) {
        throw std::invalid_argument("render_map_svg: invalid grid");
    }
    if (scene.background.size() != static_cast<std::size_t>(scene.rows)) {
        throw std::invalid_argument("render_map_svg: background row count mismatch");
    }
    std::map<std::string, std::string> colors(scene.legend.begin(), scene.legend.end());
    for (const auto& dot : scene.dots) {
        if (dot.cell.row < 0 || dot.cell.row >= scene.rows || dot.cell.col < 0 ||
            dot.cell.col >= scene.cols) {
            throw std::invalid_argument("render_map_svg: dot outside grid");
        }
        if (!colors.count(dot.group)) {
            throw std::invalid_argument("render_map_svg: group '" + dot.group +
                                        "' missing from legend");
        }
    }

    double lo = 0.0, hi = 0.0;
    bool first = true;
    for (const auto& row : scene.background) {
        for (double v : row) {
            lo = first ? v : std::min(lo, v);
            hi = first ? v : std::max(hi, v);
            first = false;
        }
    }
    const double range = hi - lo;

    const int map_w = scene.cols * kCellPx;
    const int map_h = scene.rows * kCellPx;
    const int width = map_w + (scene.legend.empty() ? 0 : kLegendWidth);
    const int legend_h = scene.legend.empty() ? 0 : 24 + static_cast<int>(scene.legend.size()) * 20;
    const int height = std::max(map_h, legend_h);

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";

    for (int r = 0; r < scene.rows; ++r) {
        for (int c = 0; c < scene.cols; ++c) {
            const double v = scene.background[r][c];
            const double normalized = range > 0.0 ? (v - lo) / range : 0.0;
            svg << "<rect x=\"" << c * kCellPx << "\" y=\"" << r * kCellPx << "\" width=\""
                << kCellPx << "\" height=\"" << kCellPx << "\" fill=\"" << shade(normalized)
                << "\"/>\n";
        }
    }

    for (const auto& region : scene.overlays) {
        const auto it = colors.find(region.group);
        const std::string color = it != colors.end() ? it->second : "#444444";
        svg << "<polygon points=\"";
        for (std::size_t i = 0; i < region.polygon.size(); ++i) {
            if (i > 0) {
                svg << " ";
            }
            svg << fmt(region.polygon[i][0] * kCellPx) << "," << fmt(region.polygon[i][1] * kCellPx);
        }
        svg << "\" fill=\"" << color << "\" fill-opacity=\"0.18\" stroke=\"" << color
            << "\" stroke-width=\"2\"/>\n";
    }

    for (const auto& dot : scene.dots) {
        const std::uint64_t h = hash_label(dot.label);
        // Deterministic offset in the middle 60% of the cell.
        const double jx = 0.2 + 0.6 * static_cast<double>(h & 0xffff) / 65535.0;
        const double jy = 0.2 + 0.6 * static_cast<double>((h >> 16) & 0xffff) / 65535.0;
        const double cx = (dot.cell.col + jx) * kCellPx;
        const double cy = (dot.cell.row + jy) * kCellPx;
        svg << "<circle cx=\"" << fmt(cx) << "\" cy=\"" << fmt(cy) << "\" r=\"" << fmt(kDotRadius)
            << "\" fill=\"" << colors.at(dot.group)
            << "\" stroke=\"#ffffff\" stroke-width=\"1\"><title>" << xml_escape(dot.label)
            << "</title></circle>\n";
    }

    if (!scene.legend.empty()) {
        int y = 20;
        svg << "<text x=\"" << map_w + 12 << "\" y=\"" << y
            << "\" font-family=\"sans-serif\" font-size=\"13\" font-weight=\"bold\">groups</text>\n";
        for (const auto& [group, color] : scene.legend) {
            y += 20;
            svg << "<rect x=\"" << map_w + 12 << "\" y=\"" << y - 10 << "\" width=\"12\" height=\"12\" fill=\""
                << color << "\"/>\n";
            svg << "<text x=\"" << map_w + 30 << "\" y=\"" << y
                << "\" font-family=\"sans-serif\" font-size=\"13\">" << xml_escape(group)
                << "</text>\n";
        }
    }

    svg << "</svg>\n";
    return svg.str();
}

std::string export_features(
    const std::vector<std::pair<SongRecord, std::vector<double>>>& rows) {
    std::size_t dim = 6;
    if (!rows.empty()) {
        dim = rows.front().second.size();
        for (const auto& [record, feature] : rows) {
            if (feature.size() != dim) {
                throw std::invalid_argument("export_features: mixed feature dimensions");
            }
        }
    }
    std::ostringstream out;
    out << "id,performer,producer,role,group";
    for (std::size_t i = 0; i < dim; ++i) {
        out << ",f" << i;
    }
    out << "\n";
    for (const auto& [record, feature] : rows) {
        out << csv::escape_field(record.id) << "," << csv::escape_field(record.performer) << ","
            << csv::escape_field(record.producer) << "," << to_string(record.role) << ","
            << csv::escape_field(record.group);
        for (double v : feature) {
            out << "," << csv::format_double(v);
        }
        out << "\n";
    }
    return out.str();
}

std::string format_p_value(double p) {
    if (p < 0.001) {
        return "p<0.001";
    }
    char buf[32];
    std::snprintf(buf, sizeof(buf), "p=%.3g", p);
    return buf;
}

StatsReport build_stats_report(const std::vector<std::pair<SongRecord, som::CellCoord>>& projected,
                               std::span<const analysis::Region> regions, int rows, int cols) {
    StatsReport report;
    report.rows = rows;
    report.cols = cols;

    // group -> performer -> cells; "" collects the pooled set per group
    std::map<std::string, std::map<std::string, std::vector<som::CellCoord>>> by_group;
    for (const auto& [record, cell] : projected) {
        by_group[record.group][""].push_back(cell);
        by_group[record.group][record.performer].push_back(cell);
    }

    for (const auto& region : regions) {
        const double fraction = analysis::region_area_fraction(region, rows, cols);
        report.region_fractions.emplace_back(region.name, fraction);
        if (fraction <= 0.0 || fraction >= 1.0) {
            report.notices.push_back("region '" + region.name + "': area fraction " +
                                     csv::format_double(fraction) +
                                     " leaves no room for a chance baseline; skipped");
            continue;
        }
        for (const auto& [group, by_performer] : by_group) {
            const bool own_group = group == region.group;
            for (const auto& [performer, cells] : by_performer) {
                const bool pooled = performer.empty();
                if (!pooled && !own_group) {
                    continue; // per-performer breakdown only for the region's own group
                }
                if (cells.empty()) {
                    continue;
                }
                StatsRow row;
                row.region = region.name;
                row.region_group = region.group;
                row.song_group = group;
                row.performer = pooled ? "(pooled)" : performer;
                row.area_fraction = fraction;
                const int k = analysis::containment_count(cells, region);
                row.gof = analysis::chi2_gof(k, static_cast<int>(cells.size()), fraction);
                report.entries.push_back(std::move(row));
            }
        }
        if (by_group.empty()) {
            report.notices.push_back("region '" + region.name + "': no projected songs; skipped");
        }
    }
    return report;
}

std::string stats_report_text(const StatsReport& report) {
    std::ostringstream out;
    out << "map grid: " << report.rows << " x " << report.cols << "\n\n";
    out << "region areas:\n";
    for (const auto& [name, fraction] : report.region_fractions) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "  %-20s %5.1f%% of the map\n", name.c_str(),
                      fraction * 100.0);
        out << buf;
    }
    out << "\ncontainment vs chance (chi-squared goodness of fit, df=1):\n";
    char header[160];
    std::snprintf(header, sizeof(header), "  %-20s %-12s %-16s %6s %6s %8s %10s %10s\n", "region",
                  "songs", "performer", "k", "n", "area", "chi2", "p");
    out << header;
    for (const auto& row : report.entries) {
        char buf[200];
        std::snprintf(buf, sizeof(buf), "  %-20s %-12s %-16s %6d %6d %7.1f%% %10.2f %10s\n",
                      row.region.c_str(), row.song_group.c_str(), row.performer.c_str(),
                      row.gof.observed_in, row.gof.total, row.area_fraction * 100.0,
                      row.gof.statistic, format_p_value(row.gof.p_value).c_str());
        out << buf;
    }
    if (report.entries.empty()) {
        out << "  (no rows)\n";
    }
    if (!report.notices.empty()) {
        out << "\nnotices:\n";
        for (const auto& notice : report.notices) {
            out << "  - " << notice << "\n";
        }
    }
    return out.str();
}

std::string stats_report_json(const StatsReport& report) {
    nlohmann::json j;
    j["grid"] = {{"rows", report.rows}, {"cols", report.cols}};
    j["regions"] = nlohmann::json::array();
    for (const auto& [name, fraction] : report.region_fractions) {
        j["regions"].push_back({{"name", name}, {"area_fraction", fraction}});
    }
    j["rows"] = nlohmann::json::array();
    for (const auto& row : report.entries) {
        j["rows"].push_back({{"region", row.region},
                             {"region_group", row.region_group},
                             {"song_group", row.song_group},
                             {"performer", row.performer},
                             {"area_fraction", row.area_fraction},
                             {"observed_in", row.gof.observed_in},
                             {"total", row.gof.total},
                             {"expected_fraction", row.gof.expected_fraction},
                             {"statistic", row.gof.statistic},
                             {"df", row.gof.df},
                             {"p_value", row.gof.p_value}});
    }
    j["notices"] = report.notices;
    return j.dump(2) + "\n";
}

} // namespace soundmap::report
