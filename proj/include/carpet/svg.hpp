#pragma once

#include <array>
#include <cstdint>
#include <cstdio>
#include <span>
#include <string>

#include "carpet/geometry.hpp"
#include "carpet/layout.hpp"

namespace carpet {

namespace svg {

inline constexpr double canvas = 800.0;  // longest side in px
inline constexpr std::array<const char*, 4> side_colors{"#d62728", "#1f77b4", "#2ca02c", "#9467bd"};

inline std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    std::string s = buf;
    while (s.back() == '0') s.pop_back();
    if (s.back() == '.') s.pop_back();
    if (s == "-0") s = "0";
    return s;
}

// Maps world coordinates into the canvas with y pointing up.
struct Frame {
    Box world;
    double scale = 1.0;
    double margin = 10.0;

    explicit Frame(const Box& w) : world(w) { scale = canvas / std::max(w.width(), w.height()); }
    [[nodiscard]] double x(double wx) const { return margin + (wx - world.xmin) * scale; }
    [[nodiscard]] double y(double wy) const { return margin + (world.ymax - wy) * scale; }
    [[nodiscard]] double width() const { return 2 * margin + world.width() * scale; }
    [[nodiscard]] double height() const { return 2 * margin + world.height() * scale; }
};

inline std::string header(const Frame& f) {
    return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(f.width()) + "\" height=\"" + num(f.height()) +
           "\" viewBox=\"0 0 " + num(f.width()) + " " + num(f.height()) + "\">\n";
}

inline std::string points(const Frame& f, std::span<const Point> pts) {
    std::string out;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (i) out += ' ';
        out += num(f.x(pts[i].x)) + "," + num(f.y(pts[i].y));
    }
    return out;
}

// Stable fill color from the disk id (splitmix finalizer, light palette).
inline std::string id_color(int id) {
    std::uint64_t z = static_cast<std::uint64_t>(id) + 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    z ^= z >> 31;
    char buf[8];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", static_cast<unsigned>(96 + (z & 0x7f)),
                  static_cast<unsigned>(96 + ((z >> 8) & 0x7f)), static_cast<unsigned>(96 + ((z >> 16) & 0x7f)));
    return buf;
}

}  // namespace svg

// Domain picture: gray disks, the four boundary sides stroked in fixed colors.
[[nodiscard]] inline std::string render_input_svg(const CarpetConfig& config) {
    const svg::Frame f(bounding_box(config.outer));
    std::string out = svg::header(f);
    out += "<polygon points=\"" + svg::points(f, config.outer) + "\" fill=\"white\" stroke=\"none\"/>\n";
    for (const auto& d : config.disks)
        out += "<polygon id=\"d" + std::to_string(d.id) + "\" points=\"" + svg::points(f, d.polygon) +
               "\" fill=\"#9a9a9a\" stroke=\"none\"/>\n";

    // Boundary split at the marks, walking the perimeter.
    for (int k = 0; k < 4; ++k) {
        const double a = config.marks[static_cast<std::size_t>(k)];
        const double b = k < 3 ? config.marks[static_cast<std::size_t>(k + 1)] : 1.0;
        std::vector<Point> side{boundary_point_at(config.outer, a)};
        const double per = perimeter(config.outer);
        double acc = 0.0;
        for (std::size_t i = 0; i < config.outer.size(); ++i) {
            const Point p = config.outer[i], q = config.outer[(i + 1) % config.outer.size()];
            acc += std::hypot(q.x - p.x, q.y - p.y);
            const double frac = acc / per;
            if (frac > a + 1e-12 && frac < b - 1e-12) side.push_back(q);
        }
        side.push_back(boundary_point_at(config.outer, b >= 1.0 ? 0.0 : b));
        out += "<polyline class=\"side" + std::to_string(k + 1) + "\" points=\"" + svg::points(f, side) +
               "\" fill=\"none\" stroke=\"" + svg::side_colors[static_cast<std::size_t>(k)] + "\" stroke-width=\"3\"/>\n";
    }
    out += "</svg>\n";
    return out;
}

// Image picture: one rect per square, the layout frame, and the image of
// each level u = t (a vertical segment).
[[nodiscard]] inline std::string render_layout_svg(const SquareLayout& l, std::span<const int> ids,
                                                   std::span<const double> levels = {}) {
    const svg::Frame f(l.rect);
    std::string out = svg::header(f);
    for (std::size_t i = 0; i < l.squares.size(); ++i) {
        const Square& s = l.squares[i];
        out += "<rect id=\"s" + std::to_string(ids[i]) + "\" x=\"" + svg::num(f.x(s.x)) + "\" y=\"" +
               svg::num(f.y(s.y + s.side)) + "\" width=\"" + svg::num(s.side * f.scale) + "\" height=\"" +
               svg::num(s.side * f.scale) + "\" fill=\"" + svg::id_color(ids[i]) + "\" stroke=\"black\" stroke-width=\"0.5\"/>\n";
    }
    out += "<polygon class=\"frame\" points=\"" + svg::points(f, rectangle_outer(l.rect)) +
           "\" fill=\"none\" stroke=\"black\" stroke-width=\"2\"/>\n";
    for (double t : levels) {
        const std::array<Point, 2> seg{Point{t, l.rect.ymin}, Point{t, l.rect.ymax}};
        out += "<polyline class=\"level\" points=\"" + svg::points(f, seg) +
               "\" fill=\"none\" stroke=\"#ff7f0e\" stroke-width=\"2\"/>\n";
    }
    out += "</svg>\n";
    return out;
}

}  // namespace carpet
