#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "carpet/conjugate.hpp"
#include "carpet/error.hpp"
#include "carpet/geometry.hpp"
#include "carpet/modulus.hpp"
#include "carpet/passage.hpp"
#include "carpet/potential.hpp"

namespace carpet {

struct SquareLayout {
    Box rect;                     // [0,1] x [0,D]
    std::vector<Square> squares;  // per disk index
    std::vector<int> degenerate;  // disk indices with rho <= eps_lambda
};

struct LayoutReport {
    double overlap_area = 0.0;
    double coverage_deficit = 0.0;
    double union_area = 0.0;
    // Boundary correspondence, worst values (all >= 0; 0 is perfect).
    double left_worst = 0.0;    // max u_minus over Theta1-adjacent disks
    double right_worst = 0.0;   // max 1 - u_plus over Theta3-adjacent disks
    double bottom_worst = 0.0;  // max v_hat over Theta2-adjacent disks
    double top_worst = 0.0;     // max D - v_plus over Theta4-adjacent disks
    double containment_worst = 0.0;  // max distance of a square outside rect
};

[[nodiscard]] inline SquareLayout build_layout(const HarmonicSolution& s, const ConjugateSolution& c,
                                               double eps_lambda = 1e-9) {
    if (s.u_minus.size() != c.v_hat.size()) throw Error(ErrorKind::mismatch, "potential and conjugate disagree on disk count");
    SquareLayout l;
    l.rect = Box{0.0, 0.0, 1.0, s.energy};
    l.squares.reserve(s.u_minus.size());
    for (std::size_t i = 0; i < s.u_minus.size(); ++i) {
        l.squares.push_back({s.u_minus[i], c.v_hat[i], s.rho[i]});
        if (!(s.rho[i] > eps_lambda)) l.degenerate.push_back(static_cast<int>(i));
    }
    return l;
}

[[nodiscard]] inline nlohmann::json layout_to_json(const SquareLayout& l, const PassageGraph& g) {
    nlohmann::json squares = nlohmann::json::array();
    for (std::size_t i = 0; i < l.squares.size(); ++i)
        squares.push_back({{"id", g.disk_ids[i]}, {"x", l.squares[i].x}, {"y", l.squares[i].y}, {"s", l.squares[i].side}});
    nlohmann::json degenerate = nlohmann::json::array();
    for (int v : l.degenerate) degenerate.push_back(g.disk_ids[static_cast<std::size_t>(v)]);
    return {{"rect", {l.rect.xmin, l.rect.xmax, l.rect.ymin, l.rect.ymax}}, {"squares", squares}, {"degenerate", degenerate}};
}

struct LoadedLayout {
    SquareLayout layout;
    std::vector<int> ids;
};

// Inverse of layout_to_json; degenerate entries are listed by id.
[[nodiscard]] inline LoadedLayout parse_layout(const nlohmann::json& j) {
    LoadedLayout out;
    try {
        const auto& r = j.at("rect");
        if (!r.is_array() || r.size() != 4) throw Error(ErrorKind::parse, "rect: expected [xmin, xmax, ymin, ymax]");
        out.layout.rect = Box{r[0].get<double>(), r[2].get<double>(), r[1].get<double>(), r[3].get<double>()};
        std::map<int, int> index;
        for (const auto& s : j.at("squares")) {
            index[s.at("id").get<int>()] = static_cast<int>(out.ids.size());
            out.ids.push_back(s.at("id").get<int>());
            out.layout.squares.push_back({s.at("x").get<double>(), s.at("y").get<double>(), s.at("s").get<double>()});
        }
        if (j.contains("degenerate"))
            for (const auto& d : j.at("degenerate")) {
                const auto it = index.find(d.get<int>());
                if (it == index.end()) throw Error(ErrorKind::parse, "degenerate: unknown id");
                out.layout.degenerate.push_back(it->second);
            }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::parse, std::string("layout: ") + e.what());
    }
    return out;
}

// ---------------------------------------------------------------------------
// Rectangle arithmetic
// ---------------------------------------------------------------------------

// Area of the union of axis-parallel boxes: sweep in x with a segment tree
// holding cover counts over the compressed y coordinates.
[[nodiscard]] inline double union_area(std::span<const Box> boxes) {
    std::vector<double> ys;
    for (const Box& b : boxes)
        if (b.width() > 0.0 && b.height() > 0.0) {
            ys.push_back(b.ymin);
            ys.push_back(b.ymax);
        }
    if (ys.empty()) return 0.0;
    std::sort(ys.begin(), ys.end());
    ys.erase(std::unique(ys.begin(), ys.end()), ys.end());
    const std::size_t m = ys.size() - 1;
    if (m == 0) return 0.0;

    struct Event {
        double x;
        int delta;
        std::size_t lo, hi;  // y slab range [lo, hi)
    };
    std::vector<Event> events;
    for (const Box& b : boxes) {
        if (!(b.width() > 0.0 && b.height() > 0.0)) continue;
        const std::size_t lo = static_cast<std::size_t>(std::lower_bound(ys.begin(), ys.end(), b.ymin) - ys.begin());
        const std::size_t hi = static_cast<std::size_t>(std::lower_bound(ys.begin(), ys.end(), b.ymax) - ys.begin());
        events.push_back({b.xmin, +1, lo, hi});
        events.push_back({b.xmax, -1, lo, hi});
    }
    std::sort(events.begin(), events.end(), [](const Event& a, const Event& b) { return a.x < b.x; });

    std::vector<int> count(4 * m, 0);
    std::vector<double> covered(4 * m, 0.0);
    auto update = [&](auto&& self, std::size_t node, std::size_t l, std::size_t r, std::size_t a, std::size_t b,
                      int delta) -> void {
        if (b <= l || r <= a) return;
        if (a <= l && r <= b) {
            count[node] += delta;
        } else {
            const std::size_t mid = (l + r) / 2;
            self(self, 2 * node, l, mid, a, b, delta);
            self(self, 2 * node + 1, mid, r, a, b, delta);
        }
        if (count[node] > 0)
            covered[node] = ys[r] - ys[l];
        else if (r - l == 1)
            covered[node] = 0.0;
        else
            covered[node] = covered[2 * node] + covered[2 * node + 1];
    };

    double area = 0.0;
    for (std::size_t k = 0; k < events.size(); ++k) {
        if (k > 0) area += covered[1] * (events[k].x - events[k - 1].x);
        update(update, 1, 0, m, events[k].lo, events[k].hi, events[k].delta);
    }
    return area;
}

// Σ over unordered pairs of the intersection area.
[[nodiscard]] inline double pairwise_overlap_area(std::span<const Box> boxes) {
    std::vector<std::size_t> order(boxes.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return boxes[a].xmin < boxes[b].xmin; });
    double total = 0.0;
    for (std::size_t ai = 0; ai < order.size(); ++ai) {
        const Box& a = boxes[order[ai]];
        for (std::size_t bi = ai + 1; bi < order.size(); ++bi) {
            const Box& b = boxes[order[bi]];
            if (b.xmin >= a.xmax) break;
            const double w = std::min(a.xmax, b.xmax) - b.xmin;
            const double h = std::min(a.ymax, b.ymax) - std::max(a.ymin, b.ymin);
            if (w > 0.0 && h > 0.0) total += w * h;
        }
    }
    return total;
}

[[nodiscard]] inline Box square_box(const Square& s) noexcept { return Box{s.x, s.y, s.x + s.side, s.y + s.side}; }

// Overlap and coverage only; boundary fields stay zero.
[[nodiscard]] inline LayoutReport verify_layout(const SquareLayout& l) {
    LayoutReport rep;
    std::vector<Box> boxes, clipped;
    for (const Square& s : l.squares) {
        const Box b = square_box(s);
        boxes.push_back(b);
        clipped.push_back(Box{std::max(b.xmin, l.rect.xmin), std::max(b.ymin, l.rect.ymin), std::min(b.xmax, l.rect.xmax),
                              std::min(b.ymax, l.rect.ymax)});
        rep.containment_worst = std::max({rep.containment_worst, l.rect.xmin - b.xmin, l.rect.ymin - b.ymin,
                                          b.xmax - l.rect.xmax, b.ymax - l.rect.ymax});
    }
    rep.overlap_area = pairwise_overlap_area(boxes);
    rep.union_area = union_area(clipped);
    rep.coverage_deficit = std::max(0.0, l.rect.width() * l.rect.height() - rep.union_area);
    return rep;
}

// Full report including the side correspondence, which needs the graph.
[[nodiscard]] inline LayoutReport verify_layout(const SquareLayout& l, const HarmonicSolution& s,
                                                const ConjugateSolution& c, const PassageGraph& g) {
    LayoutReport rep = verify_layout(l);
    auto disks_at = [&](Side side) {
        std::vector<std::size_t> out;
        for (int v : g.adjacency[static_cast<std::size_t>(g.terminal(side))])
            if (!g.is_terminal(v)) out.push_back(static_cast<std::size_t>(v));
        return out;
    };
    for (std::size_t i : disks_at(Side::theta1)) rep.left_worst = std::max(rep.left_worst, s.u_minus[i]);
    for (std::size_t i : disks_at(Side::theta3)) rep.right_worst = std::max(rep.right_worst, 1.0 - s.u_plus[i]);
    for (std::size_t i : disks_at(Side::theta2)) rep.bottom_worst = std::max(rep.bottom_worst, c.v_hat[i]);
    for (std::size_t i : disks_at(Side::theta4)) rep.top_worst = std::max(rep.top_worst, s.energy - c.v_plus[i]);
    return rep;
}

// ---------------------------------------------------------------------------
// Pushforward of the crossing moduli
// ---------------------------------------------------------------------------

// Square carpet whose disks are the non-degenerate layout squares, inside
// the layout rectangle. Disk ids follow the domain ids.
[[nodiscard]] inline CarpetConfig image_carpet(const SquareLayout& l, const PassageGraph& g) {
    CarpetConfig img;
    img.outer = rectangle_outer(l.rect);
    img.marks = rectangle_marks(l.rect);
    std::vector<int> skip(l.squares.size(), 0);
    for (int v : l.degenerate) skip[static_cast<std::size_t>(v)] = 1;
    for (std::size_t i = 0; i < l.squares.size(); ++i)
        if (!skip[i]) img.disks.push_back(make_disk(g.disk_ids[i], square_polygon(l.squares[i])));
    img.meta["generator"] = "layout-image";
    return img;
}

struct PushforwardReport {
    double domain_lr = 0.0;
    double domain_bt = 0.0;
    double image_lr = 0.0;
    double image_bt = 0.0;
    double mismatch_lr = 0.0;  // relative
    double mismatch_bt = 0.0;
    double product = 0.0;      // image_lr * image_bt
    std::string error;         // non-empty if the image graph could not be used
};

[[nodiscard]] inline PushforwardReport modulus_pushforward_check(const PassageGraph& domain, double domain_lr,
                                                                 const SquareLayout& l, const Tolerances& tol = {}) {
    PushforwardReport rep;
    rep.domain_lr = domain_lr;
    rep.domain_bt = solve_crossing_modulus(domain, Side::theta2, Side::theta4, tol).modulus;
    try {
        const CarpetConfig img = image_carpet(l, domain);
        const PassageGraph ig = build_passage_graph(img);
        rep.image_lr = solve_crossing_modulus(ig, Side::theta1, Side::theta3, tol).modulus;
        rep.image_bt = solve_crossing_modulus(ig, Side::theta2, Side::theta4, tol).modulus;
    } catch (const Error& e) {
        rep.error = e.what();
        return rep;
    }
    rep.mismatch_lr = std::abs(rep.domain_lr - rep.image_lr) / rep.domain_lr;
    rep.mismatch_bt = std::abs(rep.domain_bt - rep.image_bt) / rep.domain_bt;
    rep.product = rep.image_lr * rep.image_bt;
    return rep;
}

}  // namespace carpet
