#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <queue>
#include <span>
#include <vector>

namespace carpet {

// ---------------------------------------------------------------------------
// Point
// ---------------------------------------------------------------------------

struct Point {
    double x = 0.0;
    double y = 0.0;

    friend Point operator+(Point a, Point b) noexcept { return {a.x + b.x, a.y + b.y}; }
    friend Point operator-(Point a, Point b) noexcept { return {a.x - b.x, a.y - b.y}; }
    friend Point operator*(double s, Point a) noexcept { return {s * a.x, s * a.y}; }
    friend bool operator==(Point a, Point b) noexcept { return a.x == b.x && a.y == b.y; }
    friend bool operator<(Point a, Point b) noexcept { return a.x < b.x || (a.x == b.x && a.y < b.y); }
};

[[nodiscard]] inline double dot(Point a, Point b) noexcept { return a.x * b.x + a.y * b.y; }
[[nodiscard]] inline double cross(Point a, Point b) noexcept { return a.x * b.y - a.y * b.x; }
[[nodiscard]] inline double norm(Point a) noexcept { return std::hypot(a.x, a.y); }
[[nodiscard]] inline double distance(Point a, Point b) noexcept { return norm(a - b); }

using Polygon = std::vector<Point>;

struct Box {
    double xmin = std::numeric_limits<double>::infinity();
    double ymin = std::numeric_limits<double>::infinity();
    double xmax = -std::numeric_limits<double>::infinity();
    double ymax = -std::numeric_limits<double>::infinity();

    [[nodiscard]] double width() const noexcept { return xmax - xmin; }
    [[nodiscard]] double height() const noexcept { return ymax - ymin; }
    void expand(Point p) noexcept {
        xmin = std::min(xmin, p.x);
        ymin = std::min(ymin, p.y);
        xmax = std::max(xmax, p.x);
        ymax = std::max(ymax, p.y);
    }
    [[nodiscard]] bool overlaps(const Box& o, double slack = 0.0) const noexcept {
        return xmin <= o.xmax + slack && o.xmin <= xmax + slack && ymin <= o.ymax + slack && o.ymin <= ymax + slack;
    }
};

// ---------------------------------------------------------------------------
// Basic polygon measures
// ---------------------------------------------------------------------------

[[nodiscard]] inline Box bounding_box(std::span<const Point> poly) noexcept {
    Box b;
    for (Point p : poly) b.expand(p);
    return b;
}

[[nodiscard]] inline double signed_area(std::span<const Point> poly) noexcept {
    double a = 0.0;
    for (std::size_t i = 0, n = poly.size(); i < n; ++i) a += cross(poly[i], poly[(i + 1) % n]);
    return 0.5 * a;
}

[[nodiscard]] inline double perimeter(std::span<const Point> poly) noexcept {
    double len = 0.0;
    for (std::size_t i = 0, n = poly.size(); i < n; ++i) len += distance(poly[i], poly[(i + 1) % n]);
    return len;
}

[[nodiscard]] inline double diameter(std::span<const Point> poly) noexcept {
    double d = 0.0;
    for (std::size_t i = 0; i < poly.size(); ++i)
        for (std::size_t j = i + 1; j < poly.size(); ++j) d = std::max(d, distance(poly[i], poly[j]));
    return d;
}

[[nodiscard]] inline Point closest_on_segment(Point p, Point a, Point b) noexcept {
    const Point ab = b - a;
    const double len2 = dot(ab, ab);
    if (len2 == 0.0) return a;
    const double t = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
    return a + t * ab;
}

[[nodiscard]] inline double point_segment_distance(Point p, Point a, Point b) noexcept {
    return distance(p, closest_on_segment(p, a, b));
}

[[nodiscard]] inline double boundary_distance(Point p, std::span<const Point> poly) noexcept {
    double d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0, n = poly.size(); i < n; ++i)
        d = std::min(d, point_segment_distance(p, poly[i], poly[(i + 1) % n]));
    return d;
}

// Crossing-number test; points exactly on the boundary may go either way, so
// callers that care use boundary_distance as well.
[[nodiscard]] inline bool contains(std::span<const Point> poly, Point p) noexcept {
    bool inside = false;
    for (std::size_t i = 0, n = poly.size(), j = n - 1; i < n; j = i++) {
        const Point a = poly[i];
        const Point b = poly[j];
        if ((a.y > p.y) != (b.y > p.y)) {
            const double xi = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if (p.x < xi) inside = !inside;
        }
    }
    return inside;
}

enum class Location { outside, boundary, inside };

[[nodiscard]] inline Location locate(std::span<const Point> poly, Point p, double tol) noexcept {
    if (boundary_distance(p, poly) <= tol) return Location::boundary;
    return contains(poly, p) ? Location::inside : Location::outside;
}

// Distance from p to the closed polygonal region (zero inside).
[[nodiscard]] inline double region_distance(std::span<const Point> poly, Point p) noexcept {
    return contains(poly, p) ? 0.0 : boundary_distance(p, poly);
}

[[nodiscard]] inline double max_vertex_distance(std::span<const Point> poly, Point p) noexcept {
    double d = 0.0;
    for (Point q : poly) d = std::max(d, distance(p, q));
    return d;
}

// ---------------------------------------------------------------------------
// Orientation predicates
// ---------------------------------------------------------------------------

// Sign of the turn a->b->c with a relative dead zone.
[[nodiscard]] inline int orientation(Point a, Point b, Point c, double tol) noexcept {
    const double v = cross(b - a, c - a);
    const double scale = std::max({norm(b - a) * norm(c - a), 1e-300});
    if (std::abs(v) <= tol * scale) return 0;
    return v > 0 ? 1 : -1;
}

// True when the open segments cross at a single interior point.
[[nodiscard]] inline bool segments_cross_properly(Point a, Point b, Point c, Point d, double tol) noexcept {
    const int o1 = orientation(a, b, c, tol);
    const int o2 = orientation(a, b, d, tol);
    const int o3 = orientation(c, d, a, tol);
    const int o4 = orientation(c, d, b, tol);
    return o1 * o2 < 0 && o3 * o4 < 0;
}

[[nodiscard]] inline double segment_distance(Point a, Point b, Point c, Point d) noexcept {
    if (segments_cross_properly(a, b, c, d, 0.0)) return 0.0;
    return std::min({point_segment_distance(a, c, d), point_segment_distance(b, c, d), point_segment_distance(c, a, b),
                     point_segment_distance(d, a, b)});
}

// Distance between two closed polygonal regions.
[[nodiscard]] inline double polygon_distance(std::span<const Point> pa, std::span<const Point> pb) noexcept {
    if (!pa.empty() && contains(pb, pa.front())) return 0.0;
    if (!pb.empty() && contains(pa, pb.front())) return 0.0;
    double d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < pa.size(); ++i)
        for (std::size_t j = 0; j < pb.size(); ++j)
            d = std::min(d, segment_distance(pa[i], pa[(i + 1) % pa.size()], pb[j], pb[(j + 1) % pb.size()]));
    return d;
}

[[nodiscard]] inline bool is_simple(std::span<const Point> poly, double tol) noexcept {
    const std::size_t n = poly.size();
    if (n < 3) return false;
    for (std::size_t i = 0; i < n; ++i)
        if (poly[i] == poly[(i + 1) % n]) return false;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (j == i + 1 || (i == 0 && j == n - 1)) continue;
            const Point a = poly[i], b = poly[(i + 1) % n], c = poly[j], d = poly[(j + 1) % n];
            if (segments_cross_properly(a, b, c, d, tol)) return false;
            // Non-adjacent edges must not touch either.
            if (segment_distance(a, b, c, d) <= tol * std::max(1.0, norm(b - a))) return false;
        }
    }
    return true;
}

// Rotate the vertex list to start at its lexicographically smallest vertex.
[[nodiscard]] inline Polygon canonical_rotation(Polygon poly) {
    if (poly.empty()) return poly;
    const auto it = std::min_element(poly.begin(), poly.end());
    std::rotate(poly.begin(), it, poly.end());
    return poly;
}

// ---------------------------------------------------------------------------
// Chebyshev center (pole of inaccessibility)
// ---------------------------------------------------------------------------

struct InscribedCircle {
    Point center;
    double radius = 0.0;
};

// Best-first quadtree search for the interior point farthest from the
// boundary. The centroid is seeded first, so symmetric shapes return it
// exactly.
[[nodiscard]] inline InscribedCircle chebyshev_center(std::span<const Point> poly, double rel_precision = 1e-7) {
    const Box box = bounding_box(poly);
    const double size = std::min(box.width(), box.height());
    if (!(size > 0.0)) return {Point{box.xmin, box.ymin}, 0.0};
    const double precision = rel_precision * std::max(box.width(), box.height());

    auto signed_dist = [&](Point p) {
        const double d = boundary_distance(p, poly);
        return contains(poly, p) ? d : -d;
    };
    struct Cell {
        Point c;
        double half;
        double d;
        double potential;
        bool operator<(const Cell& o) const noexcept { return potential < o.potential; }
    };
    auto make = [&](Point c, double half) {
        const double d = signed_dist(c);
        return Cell{c, half, d, d + half * std::numbers::sqrt2};
    };

    // Area centroid of the polygon.
    double a = 0.0, cx = 0.0, cy = 0.0;
    for (std::size_t i = 0, n = poly.size(); i < n; ++i) {
        const Point p = poly[i], q = poly[(i + 1) % n];
        const double f = cross(p, q);
        a += f;
        cx += (p.x + q.x) * f;
        cy += (p.y + q.y) * f;
    }
    Cell best = a != 0.0 ? make(Point{cx / (3.0 * a), cy / (3.0 * a)}, 0.0) : make(poly.front(), 0.0);
    const Cell box_center = make(Point{box.xmin + box.width() / 2, box.ymin + box.height() / 2}, 0.0);
    if (box_center.d > best.d) best = box_center;

    std::priority_queue<Cell> queue;
    const double half = size / 2;
    for (double x = box.xmin; x < box.xmax; x += size)
        for (double y = box.ymin; y < box.ymax; y += size) queue.push(make(Point{x + half, y + half}, half));

    std::size_t guard = 0;
    while (!queue.empty() && guard++ < 200000) {
        const Cell cell = queue.top();
        queue.pop();
        if (cell.d > best.d) best = cell;
        if (cell.potential - best.d <= precision) continue;
        const double h = cell.half / 2;
        queue.push(make(cell.c + Point{-h, -h}, h));
        queue.push(make(cell.c + Point{h, -h}, h));
        queue.push(make(cell.c + Point{-h, h}, h));
        queue.push(make(cell.c + Point{h, h}, h));
    }
    return {best.c, std::max(best.d, 0.0)};
}

// ---------------------------------------------------------------------------
// Disk / polygon intersection area
// ---------------------------------------------------------------------------

// Signed area of the intersection of the disk B(0, r) with the triangle
// (0, a, b).
[[nodiscard]] inline double disk_triangle_area(Point a, Point b, double r) noexcept {
    std::array<Point, 4> pts{};
    std::size_t count = 0;
    pts[count++] = a;
    const Point d = b - a;
    const double qa = dot(d, d);
    if (qa > 0.0) {
        const double qb = 2.0 * dot(a, d);
        const double qc = dot(a, a) - r * r;
        const double disc = qb * qb - 4.0 * qa * qc;
        if (disc > 0.0) {
            const double s = std::sqrt(disc);
            const double t1 = (-qb - s) / (2.0 * qa);
            const double t2 = (-qb + s) / (2.0 * qa);
            if (t1 > 0.0 && t1 < 1.0) pts[count++] = a + t1 * d;
            if (t2 > 0.0 && t2 < 1.0) pts[count++] = a + t2 * d;
        }
    }
    pts[count++] = b;
    double area = 0.0;
    for (std::size_t i = 0; i + 1 < count; ++i) {
        const Point p = pts[i], q = pts[i + 1];
        const Point m = 0.5 * (p + q);
        if (dot(m, m) <= r * r)
            area += 0.5 * cross(p, q);
        else
            area += 0.5 * r * r * std::atan2(cross(p, q), dot(p, q));
    }
    return area;
}

[[nodiscard]] inline double disk_polygon_area(std::span<const Point> poly, Point center, double r) noexcept {
    double area = 0.0;
    for (std::size_t i = 0, n = poly.size(); i < n; ++i)
        area += disk_triangle_area(poly[i] - center, poly[(i + 1) % n] - center, r);
    return std::abs(area);
}

}  // namespace carpet
