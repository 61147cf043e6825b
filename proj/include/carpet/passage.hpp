#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <queue>
#include <span>
#include <tuple>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "carpet/error.hpp"
#include "carpet/geometry.hpp"
#include "carpet/raster.hpp"

namespace carpet {

// Nodes 0..n-1 are disks (in ascending id order); n..n+3 are the side
// terminals Theta1..Theta4.
struct PassageGraph {
    int n_disks = 0;
    std::vector<int> disk_ids;
    std::vector<std::vector<int>> adjacency;            // sorted neighbor lists
    std::vector<std::pair<int, int>> edges;             // i < j, sorted
    std::vector<std::pair<Point, Point>> witnesses;     // one shared cell face per edge
    double cell_resolution = 0.0;
    Raster raster;

    [[nodiscard]] int terminal(Side s) const noexcept { return n_disks + static_cast<int>(index(s)); }
    [[nodiscard]] bool is_terminal(int node) const noexcept { return node >= n_disks; }
    [[nodiscard]] int node_count() const noexcept { return n_disks + 4; }
    [[nodiscard]] bool adjacent(int a, int b) const {
        const auto& nb = adjacency[static_cast<std::size_t>(a)];
        return std::binary_search(nb.begin(), nb.end(), b);
    }
};

// Terminal, disks..., terminal.
struct Chain {
    std::vector<int> nodes;

    [[nodiscard]] std::span<const int> disks() const noexcept {
        if (nodes.size() < 2) return {};
        return std::span<const int>(nodes).subspan(1, nodes.size() - 2);
    }
    friend bool operator==(const Chain&, const Chain&) = default;
};

struct ChainResult {
    Chain chain;
    double weight = 0.0;
};

// ---------------------------------------------------------------------------
// Construction
// ---------------------------------------------------------------------------

[[nodiscard]] inline PassageGraph build_passage_graph(const CarpetConfig& config, double h) {
    const int n = static_cast<int>(config.disks.size());
    double min_diam = std::numeric_limits<double>::infinity();
    for (const auto& d : config.disks) min_diam = std::min(min_diam, d.diameter);
    if (n > 0 && h > min_diam / 4.0 * (1.0 + 1e-12))
        throw Error(ErrorKind::invalid_argument, "resolution " + std::to_string(h) + " exceeds min disk diameter / 4");

    // Index disks by ascending id so that node order follows id order.
    CarpetConfig sorted = config;
    std::stable_sort(sorted.disks.begin(), sorted.disks.end(),
                     [](const PeripheralDisk& a, const PeripheralDisk& b) { return a.id < b.id; });

    PassageGraph g;
    g.n_disks = n;
    g.cell_resolution = h;
    for (const auto& d : sorted.disks) g.disk_ids.push_back(d.id);
    g.raster = rasterize(sorted, h);
    const Raster& r = g.raster;

    auto node_of = [&](std::int32_t label) -> int {
        if (label >= 0) return label;
        if (Raster::is_exterior(label)) return g.terminal(Raster::exterior_side(label));
        return -1;
    };
    std::vector<std::pair<int, int>> raw;
    std::vector<std::pair<Point, Point>> faces;
    auto consider = [&](std::int32_t la, std::int32_t lb, Point f0, Point f1) {
        if (la == lb) return;
        const int a = node_of(la), b = node_of(lb);
        if (a < 0 || b < 0) return;
        if (g.is_terminal(a) && g.is_terminal(b)) return;
        raw.emplace_back(std::min(a, b), std::max(a, b));
        faces.emplace_back(f0, f1);
    };
    for (int iy = 0; iy < r.height; ++iy)
        for (int ix = 0; ix < r.width; ++ix) {
            const std::int32_t l = r.at(ix, iy);
            if (ix + 1 < r.width) consider(l, r.at(ix + 1, iy), r.corner(ix + 1, iy), r.corner(ix + 1, iy + 1));
            if (iy + 1 < r.height) consider(l, r.at(ix, iy + 1), r.corner(ix, iy + 1), r.corner(ix + 1, iy + 1));
        }

    // Keep the first witness in scan order for each edge.
    std::vector<std::size_t> order(raw.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return raw[a] < raw[b]; });
    g.adjacency.assign(static_cast<std::size_t>(g.node_count()), {});
    for (std::size_t k = 0; k < order.size(); ++k) {
        const auto e = raw[order[k]];
        if (!g.edges.empty() && g.edges.back() == e) continue;
        g.edges.push_back(e);
        g.witnesses.push_back(faces[order[k]]);
        g.adjacency[static_cast<std::size_t>(e.first)].push_back(e.second);
        g.adjacency[static_cast<std::size_t>(e.second)].push_back(e.first);
    }
    for (auto& nb : g.adjacency) std::sort(nb.begin(), nb.end());

    // Theta1 must reach Theta3 through disks alone.
    std::vector<char> seen(static_cast<std::size_t>(g.node_count()), 0);
    std::vector<int> stack{g.terminal(Side::theta1)};
    seen[static_cast<std::size_t>(stack.back())] = 1;
    const int target = g.terminal(Side::theta3);
    while (!stack.empty()) {
        const int v = stack.back();
        stack.pop_back();
        for (int w : g.adjacency[static_cast<std::size_t>(v)]) {
            if (seen[static_cast<std::size_t>(w)]) continue;
            seen[static_cast<std::size_t>(w)] = 1;
            if (!g.is_terminal(w)) stack.push_back(w);
        }
    }
    if (!seen[static_cast<std::size_t>(target)])
        throw Error(ErrorKind::graph_disconnected, "no chain of disks joins Theta1 to Theta3 at resolution " + std::to_string(h));
    return g;
}

[[nodiscard]] inline PassageGraph build_passage_graph(const CarpetConfig& config) {
    return build_passage_graph(config, default_resolution(config));
}

// Identifies a graph for compatibility checks between solutions.
[[nodiscard]] inline std::uint64_t fingerprint(const PassageGraph& g) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](std::uint64_t v) {
        h ^= v;
        h *= 0x100000001b3ULL;
    };
    mix(static_cast<std::uint64_t>(g.n_disks));
    for (int id : g.disk_ids) mix(static_cast<std::uint64_t>(static_cast<std::uint32_t>(id)));
    for (const auto& [a, b] : g.edges) mix((static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b));
    return h;
}

[[nodiscard]] inline nlohmann::json graph_to_json(const PassageGraph& g) {
    nlohmann::json nodes = nlohmann::json::array();
    for (int id : g.disk_ids) nodes.push_back(id);
    for (const char* t : {"Theta1", "Theta2", "Theta3", "Theta4"}) nodes.push_back(t);
    nlohmann::json edges = nlohmann::json::array();
    for (const auto& [a, b] : g.edges) edges.push_back({a, b});
    return {{"nodes", nodes}, {"edges", edges}};
}

// Confirms that consecutive nodes are adjacent, the endpoints are the
// expected terminals, and no disk repeats.
[[nodiscard]] inline bool is_valid_chain(const PassageGraph& g, const Chain& c, Side source, Side target) {
    if (c.nodes.size() < 3) return false;
    if (c.nodes.front() != g.terminal(source) || c.nodes.back() != g.terminal(target)) return false;
    std::vector<char> used(static_cast<std::size_t>(g.n_disks), 0);
    for (std::size_t i = 1; i + 1 < c.nodes.size(); ++i) {
        const int v = c.nodes[i];
        if (v < 0 || v >= g.n_disks || used[static_cast<std::size_t>(v)]) return false;
        used[static_cast<std::size_t>(v)] = 1;
    }
    for (std::size_t i = 0; i + 1 < c.nodes.size(); ++i)
        if (!g.adjacent(c.nodes[i], c.nodes[i + 1])) return false;
    return true;
}

// ---------------------------------------------------------------------------
// Node-weighted shortest paths
// ---------------------------------------------------------------------------

// Distances include the weight of the node itself. Only the source terminal
// and disks are expanded; other terminals are dead ends.
struct PathTree {
    std::vector<double> dist;
    std::vector<int> hops;
    std::vector<int> pred;

    [[nodiscard]] bool reached(int v) const noexcept { return pred[static_cast<std::size_t>(v)] != -2; }
    [[nodiscard]] std::vector<int> path_to(int v) const {
        std::vector<int> path;
        for (int x = v; x >= 0; x = pred[static_cast<std::size_t>(x)]) path.push_back(x);
        std::reverse(path.begin(), path.end());
        return path;
    }
};

namespace detail {

inline bool weight_tie(double a, double b) noexcept {
    return std::abs(a - b) <= 1e-12 * std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace detail

// Ties are broken first by hop count, then by the lexicographically smallest
// node sequence.
[[nodiscard]] inline PathTree node_dijkstra(const PassageGraph& g, std::span<const double> weights, int source,
                                            std::span<const char> excluded = {}) {
    if (weights.size() != static_cast<std::size_t>(g.n_disks))
        throw Error(ErrorKind::invalid_argument, "weight vector size does not match disk count");
    const std::size_t nn = static_cast<std::size_t>(g.node_count());
    PathTree t{std::vector<double>(nn, std::numeric_limits<double>::infinity()), std::vector<int>(nn, 0),
               std::vector<int>(nn, -2)};
    const int s = source;
    if (s < 0 || s >= g.node_count()) throw Error(ErrorKind::invalid_argument, "source node out of range");
    const double d0 = g.is_terminal(s) ? 0.0 : weights[static_cast<std::size_t>(s)];
    t.dist[static_cast<std::size_t>(s)] = d0;
    t.pred[static_cast<std::size_t>(s)] = -1;

    using Item = std::tuple<double, int, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
    queue.emplace(d0, 0, s);

    // Lexicographic comparison of the path ending in `u` then v against the
    // current path to v; both have the same length when this is called.
    auto lex_less = [&](int u, int current_pred) {
        const std::vector<int> a = t.path_to(u), b = t.path_to(current_pred);
        return a < b;
    };

    while (!queue.empty()) {
        const auto [d, hop, u] = queue.top();
        queue.pop();
        const std::size_t ui = static_cast<std::size_t>(u);
        if (d != t.dist[ui] || hop != t.hops[ui]) continue;
        if (u != s && g.is_terminal(u)) continue;
        for (int v : g.adjacency[ui]) {
            const std::size_t vi = static_cast<std::size_t>(v);
            if (v == s) continue;
            if (!g.is_terminal(v) && !excluded.empty() && excluded[vi]) continue;
            const double nd = d + (g.is_terminal(v) ? 0.0 : weights[vi]);
            const int nh = hop + 1;
            bool better = false;
            if (t.pred[vi] == -2) {
                better = true;
            } else if (!detail::weight_tie(nd, t.dist[vi])) {
                better = nd < t.dist[vi];
            } else if (nh != t.hops[vi]) {
                better = nh < t.hops[vi];
            } else if (t.pred[vi] != u) {
                better = lex_less(u, t.pred[vi]);
            }
            if (!better) continue;
            t.dist[vi] = nd;
            t.hops[vi] = nh;
            t.pred[vi] = u;
            queue.emplace(nd, nh, v);
        }
    }
    return t;
}

[[nodiscard]] inline PathTree node_dijkstra(const PassageGraph& g, std::span<const double> weights, Side source,
                                            std::span<const char> excluded = {}) {
    return node_dijkstra(g, weights, g.terminal(source), excluded);
}

[[nodiscard]] inline ChainResult shortest_chain(const PassageGraph& g, std::span<const double> weights, Side source,
                                                Side target, std::span<const char> excluded = {}) {
    for (double w : weights)
        if (!(w >= 0.0) || !std::isfinite(w)) throw Error(ErrorKind::invalid_argument, "weights must be finite and nonnegative");
    const PathTree t = node_dijkstra(g, weights, source, excluded);
    const int tgt = g.terminal(target);
    if (!t.reached(tgt))
        throw Error(ErrorKind::graph_disconnected, "no chain joins the requested sides");
    return {Chain{t.path_to(tgt)}, t.dist[static_cast<std::size_t>(tgt)]};
}

// Greedy family of mostly disjoint chains: shortest by hop count, then the
// interior nodes are suppressed, until the sides disconnect or k are found.
[[nodiscard]] inline std::vector<Chain> enumerate_seed_chains(const PassageGraph& g, Side source, Side target, int k,
                                                              std::span<const char> excluded = {}) {
    if (k < 1) throw Error(ErrorKind::invalid_argument, "seed chain count must be >= 1");
    std::vector<char> mask(static_cast<std::size_t>(g.n_disks), 0);
    if (!excluded.empty()) std::copy(excluded.begin(), excluded.end(), mask.begin());
    const std::vector<double> zero(static_cast<std::size_t>(g.n_disks), 0.0);
    std::vector<Chain> out;
    while (static_cast<int>(out.size()) < k) {
        const PathTree t = node_dijkstra(g, zero, source, mask);
        const int tgt = g.terminal(target);
        if (!t.reached(tgt)) break;
        Chain c{t.path_to(tgt)};
        for (int v : c.disks()) mask[static_cast<std::size_t>(v)] = 1;
        out.push_back(std::move(c));
    }
    return out;
}

}  // namespace carpet
