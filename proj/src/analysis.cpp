#include "soundmap/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "soundmap/csv.hpp"

namespace soundmap::analysis {

namespace {

bool on_segment(double ax, double ay, double bx, double by, double px, double py) {
    const double cross = (bx - ax) * (py - ay) - (by - ay) * (px - ax);
    if (cross != 0.0) {
        return false;
    }
    return px >= std::min(ax, bx) && px <= std::max(ax, bx) && py >= std::min(ay, by) &&
           py <= std::max(ay, by);
}

void validate_region(const Region& region) {
    if (region.polygon.size() < 3) {
        throw std::invalid_argument("region '" + region.name + "' needs at least 3 vertices");
    }
}

// --- regularized incomplete gamma, Numerical Recipes style ----------------

constexpr int kMaxIter = 500;
constexpr double kEps = 1e-16;
constexpr double kFpMin = 1e-300;

/// P(a, x) by series expansion, for x < a + 1.
double gamma_p_series(double a, double x) {
    double ap = a;
    double sum = 1.0 / a;
    double del = sum;
    for (int i = 0; i < kMaxIter; ++i) {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if (std::abs(del) < std::abs(sum) * kEps) {
            break;
        }
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

/// Q(a, x) by continued fraction (modified Lentz), for x >= a + 1.
double gamma_q_cf(double a, double x) {
    double b = x + 1.0 - a;
    double c = 1.0 / kFpMin;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= kMaxIter; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < kFpMin) d = kFpMin;
        c = b + an / c;
        if (std::abs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) <= kEps) {
            break;
        }
    }
    return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

/// Regularized upper incomplete gamma Q(a, x).
double gamma_q(double a, double x) {
    if (x < 0.0 || a <= 0.0) {
        throw std::invalid_argument("gamma_q: invalid arguments");
    }
    if (x == 0.0) {
        return 1.0;
    }
    if (x < a + 1.0) {
        return 1.0 - gamma_p_series(a, x);
    }
    return gamma_q_cf(a, x);
}

// --- polygon utilities ------------------------------------------------------

double polygon_signed_area(std::span<const std::array<double, 2>> polygon) {
    double acc = 0.0;
    for (std::size_t i = 0; i < polygon.size(); ++i) {
        const auto& a = polygon[i];
        const auto& b = polygon[(i + 1) % polygon.size()];
        acc += a[0] * b[1] - b[0] * a[1];
    }
    return acc / 2.0;
}

/// Andrew monotone chain; returns the hull counter-clockwise.
std::vector<std::array<double, 2>> convex_hull(std::vector<std::array<double, 2>> pts) {
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    const std::size_t n = pts.size();
    if (n < 3) {
        return pts;
    }
    auto cross = [](const std::array<double, 2>& o, const std::array<double, 2>& a,
                    const std::array<double, 2>& b) {
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
    };
    std::vector<std::array<double, 2>> hull(2 * n);
    std::size_t k = 0;
    for (std::size_t i = 0; i < n; ++i) {
        while (k >= 2 && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) {
            --k;
        }
        hull[k++] = pts[i];
    }
    const std::size_t lower = k + 1;
    for (std::size_t i = n - 1; i-- > 0;) {
        while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) {
            --k;
        }
        hull[k++] = pts[i];
    }
    hull.resize(k - 1);
    return hull;
}

/// Sutherland-Hodgman clip of a convex polygon to an axis-aligned rectangle.
std::vector<std::array<double, 2>> clip_to_rect(std::vector<std::array<double, 2>> poly,
                                                double x0, double y0, double x1, double y1) {
    enum Side { Left, Right, Top, Bottom };
    for (int side = Left; side <= Bottom; ++side) {
        auto inside = [&](const std::array<double, 2>& p) {
            switch (side) {
            case Left: return p[0] >= x0;
            case Right: return p[0] <= x1;
            case Top: return p[1] >= y0;
            default: return p[1] <= y1;
            }
        };
        auto intersect = [&](const std::array<double, 2>& a, const std::array<double, 2>& b) {
            double t;
            switch (side) {
            case Left: t = (x0 - a[0]) / (b[0] - a[0]); break;
            case Right: t = (x1 - a[0]) / (b[0] - a[0]); break;
            case Top: t = (y0 - a[1]) / (b[1] - a[1]); break;
            default: t = (y1 - a[1]) / (b[1] - a[1]); break;
            }
            return std::array<double, 2>{a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])};
        };
        std::vector<std::array<double, 2>> out;
        for (std::size_t i = 0; i < poly.size(); ++i) {
            const auto& cur = poly[i];
            const auto& prev = poly[(i + poly.size() - 1) % poly.size()];
            if (inside(cur)) {
                if (!inside(prev)) {
                    out.push_back(intersect(prev, cur));
                }
                out.push_back(cur);
            } else if (inside(prev)) {
                out.push_back(intersect(prev, cur));
            }
        }
        poly = std::move(out);
        if (poly.empty()) {
            break;
        }
    }
    // Collapse duplicate vertices the clipping may introduce.
    std::vector<std::array<double, 2>> dedup;
    for (const auto& p : poly) {
        if (dedup.empty() || dedup.back() != p) {
            dedup.push_back(p);
        }
    }
    if (dedup.size() > 1 && dedup.front() == dedup.back()) {
        dedup.pop_back();
    }
    return dedup;
}

} // namespace

bool point_in_polygon(std::span<const std::array<double, 2>> polygon, double x, double y) {
    const std::size_t n = polygon.size();
    for (std::size_t i = 0; i < n; ++i) {
        const auto& a = polygon[i];
        const auto& b = polygon[(i + 1) % n];
        if (on_segment(a[0], a[1], b[0], b[1], x, y)) {
            return true; // boundary is inclusive
        }
    }
    bool inside = false;
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const double xi = polygon[i][0], yi = polygon[i][1];
        const double xj = polygon[j][0], yj = polygon[j][1];
        if ((yi > y) != (yj > y)) {
            const double x_cross = (xj - xi) * (y - yi) / (yj - yi) + xi;
            if (x < x_cross) {
                inside = !inside;
            }
        }
    }
    return inside;
}

bool point_in_region(const Region& region, som::CellCoord cell) {
    validate_region(region);
    return point_in_polygon(region.polygon, cell.col + 0.5, cell.row + 0.5);
}

double region_area_fraction(const Region& region, int rows, int cols) {
    validate_region(region);
    if (rows < 1 || cols < 1) {
        throw std::invalid_argument("region_area_fraction: invalid grid");
    }
    if (polygon_signed_area(region.polygon) == 0.0) {
        throw std::invalid_argument("region '" + region.name + "' is degenerate (zero area)");
    }
    int count = 0;
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            if (point_in_polygon(region.polygon, c + 0.5, r + 0.5)) {
                ++count;
            }
        }
    }
    return static_cast<double>(count) / (static_cast<double>(rows) * cols);
}

int containment_count(std::span<const som::CellCoord> bmus, const Region& region) {
    validate_region(region);
    int count = 0;
    for (const auto& cell : bmus) {
        if (point_in_region(region, cell)) {
            ++count;
        }
    }
    return count;
}

double chi2_sf(double x, int df) {
    if (x < 0.0) {
        throw std::invalid_argument("chi2_sf: negative statistic");
    }
    if (df < 1) {
        throw std::invalid_argument("chi2_sf: df must be >= 1");
    }
    return gamma_q(df / 2.0, x / 2.0);
}

GofResult chi2_gof(int k, int n, double p) {
    if (n < 1 || k < 0 || k > n) {
        throw std::invalid_argument("chi2_gof: need 0 <= k <= n, n >= 1");
    }
    if (!(p > 0.0 && p < 1.0)) {
        throw std::invalid_argument("chi2_gof: expected fraction must be in (0, 1)");
    }
    const double expected_in = n * p;
    const double expected_out = n * (1.0 - p);
    const double d_in = k - expected_in;
    const double d_out = (n - k) - expected_out;
    GofResult result;
    result.observed_in = k;
    result.total = n;
    result.expected_fraction = p;
    result.statistic = d_in * d_in / expected_in + d_out * d_out / expected_out;
    result.df = 1;
    result.p_value = chi2_sf(result.statistic, 1);
    return result;
}

std::vector<Region> parse_regions(const std::string& text) {
    std::vector<Region> regions;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::size_t a = line.find_first_not_of(" \t\r");
        if (a == std::string::npos || line[a] == '#') {
            continue;
        }
        auto fail = [&](const std::string& what) -> void {
            throw std::runtime_error("regions line " + std::to_string(line_no) + ": " + what);
        };
        const std::size_t bracket = line.find('[');
        if (bracket == std::string::npos) {
            fail("missing '[' vertex list");
        }
        std::string head = line.substr(0, bracket);
        const std::size_t comma1 = head.find(',');
        if (comma1 == std::string::npos) {
            fail("expected 'name, group, [...]'");
        }
        const std::size_t comma2 = head.find(',', comma1 + 1);
        if (comma2 == std::string::npos) {
            fail("expected 'name, group, [...]'");
        }
        auto trim = [](std::string s) {
            const std::size_t b = s.find_first_not_of(" \t");
            if (b == std::string::npos) return std::string();
            const std::size_t e = s.find_last_not_of(" \t");
            return s.substr(b, e - b + 1);
        };
        Region region;
        region.name = trim(head.substr(0, comma1));
        region.group = trim(head.substr(comma1 + 1, comma2 - comma1 - 1));
        if (region.name.empty()) {
            fail("empty region name");
        }
        const std::size_t close = line.rfind(']');
        if (close == std::string::npos || close < bracket) {
            fail("missing closing ']'");
        }
        std::string body = line.substr(bracket + 1, close - bracket - 1);
        // Vertices look like (x,y); read the numbers pairwise.
        std::vector<double> nums;
        const char* p = body.c_str();
        const char* end = p + body.size();
        while (p < end) {
            if (*p == '(' || *p == ')' || *p == ',' || *p == ' ' || *p == '\t') {
                ++p;
                continue;
            }
            char* next = nullptr;
            const double v = std::strtod(p, &next);
            if (next == p) {
                fail("bad number in vertex list");
            }
            nums.push_back(v);
            p = next;
        }
        if (nums.size() < 6 || nums.size() % 2 != 0) {
            fail("vertex list needs at least 3 (x,y) pairs");
        }
        for (std::size_t i = 0; i < nums.size(); i += 2) {
            region.polygon.push_back({nums[i], nums[i + 1]});
        }
        regions.push_back(std::move(region));
    }
    return regions;
}

std::vector<Region> load_regions(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open regions file " + path.string());
    }
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    try {
        return parse_regions(text);
    } catch (const std::exception& e) {
        throw std::runtime_error(path.string() + ": " + e.what());
    }
}

std::string format_regions(std::span<const Region> regions) {
    std::ostringstream out;
    out << "# name, group, [(x0,y0),(x1,y1),...]  (cell units, origin top-left)\n";
    for (const auto& region : regions) {
        out << region.name << ", " << region.group << ", [";
        for (std::size_t i = 0; i < region.polygon.size(); ++i) {
            if (i > 0) {
                out << ",";
            }
            out << "(" << csv::format_double(region.polygon[i][0]) << ","
                << csv::format_double(region.polygon[i][1]) << ")";
        }
        out << "]\n";
    }
    return out.str();
}

Region auto_region(const std::string& name, const std::string& group,
                   std::span<const som::CellCoord> bmus, int rows, int cols) {
    if (bmus.empty()) {
        throw std::invalid_argument("auto_region: no cells for group '" + group + "'");
    }
    // Dilate each occupied cell's center by one cell in every direction, take
    // the hull, then clip to the grid so stats see a valid in-bounds polygon.
    std::vector<std::array<double, 2>> pts;
    pts.reserve(bmus.size() * 4);
    for (const auto& cell : bmus) {
        const double cx = cell.col + 0.5;
        const double cy = cell.row + 0.5;
        pts.push_back({cx - 1.0, cy - 1.0});
        pts.push_back({cx + 1.0, cy - 1.0});
        pts.push_back({cx + 1.0, cy + 1.0});
        pts.push_back({cx - 1.0, cy + 1.0});
    }
    auto hull = convex_hull(std::move(pts));
    hull = clip_to_rect(std::move(hull), 0.0, 0.0, static_cast<double>(cols),
                        static_cast<double>(rows));
    if (hull.size() < 3) {
        throw std::runtime_error("auto_region: degenerate hull for group '" + group + "'");
    }
    Region region;
    region.name = name;
    region.group = group;
    region.polygon = std::move(hull);
    return region;
}

} // namespace soundmap::analysis
