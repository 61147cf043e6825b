#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "carpet/error.hpp"
#include "carpet/geometry.hpp"

namespace carpet {

// Shortest decimal form that round-trips; %.17g always does.
[[nodiscard]] inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace detail {

inline void write_points(std::string& out, const Polygon& poly) {
    out += '[';
    for (std::size_t i = 0; i < poly.size(); ++i) {
        if (i) out += ',';
        out += '[';
        out += format_double(poly[i].x);
        out += ',';
        out += format_double(poly[i].y);
        out += ']';
    }
    out += ']';
}

inline Polygon read_points(const nlohmann::json& j, const std::string& field) {
    if (!j.is_array()) throw Error(ErrorKind::parse, field + ": expected an array of [x,y] pairs");
    Polygon poly;
    poly.reserve(j.size());
    for (const auto& p : j) {
        if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number())
            throw Error(ErrorKind::parse, field + ": expected [x,y] number pairs");
        poly.push_back({p[0].get<double>(), p[1].get<double>()});
    }
    if (poly.size() < 3) throw Error(ErrorKind::parse, field + ": polygon needs at least 3 vertices");
    return poly;
}

}  // namespace detail

// Canonical form: disks ascending by id, disk polygons starting at their
// lexicographically smallest vertex. The outer polygon keeps its start
// vertex because arc-length fractions are measured from it.
[[nodiscard]] inline CarpetConfig canonicalize(CarpetConfig config) {
    std::stable_sort(config.disks.begin(), config.disks.end(),
                     [](const PeripheralDisk& a, const PeripheralDisk& b) { return a.id < b.id; });
    for (auto& d : config.disks) {
        Polygon rotated = canonical_rotation(d.polygon);
        if (rotated != d.polygon) d = make_disk(d.id, std::move(rotated));
    }
    return config;
}

[[nodiscard]] inline std::string carpet_to_json(const CarpetConfig& input) {
    const CarpetConfig config = canonicalize(input);
    std::string out = "{\n  \"outer\": ";
    detail::write_points(out, config.outer);
    out += ",\n  \"marks\": [";
    for (std::size_t k = 0; k < 4; ++k) {
        if (k) out += ',';
        out += format_double(config.marks[k]);
    }
    out += "],\n  \"disks\": [";
    for (std::size_t i = 0; i < config.disks.size(); ++i) {
        out += i ? ",\n    " : "\n    ";
        out += "{\"id\": " + std::to_string(config.disks[i].id) + ", \"polygon\": ";
        detail::write_points(out, config.disks[i].polygon);
        out += '}';
    }
    out += config.disks.empty() ? "],\n" : "\n  ],\n";
    // nlohmann escapes strings correctly; std::map keeps the keys sorted.
    out += "  \"meta\": " + nlohmann::json(config.meta).dump() + "\n}\n";
    return out;
}

// Parses without geometric validation.
[[nodiscard]] inline CarpetConfig parse_carpet(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorKind::parse, std::string("malformed JSON: ") + e.what());
    }
    if (!j.is_object()) throw Error(ErrorKind::parse, "top level must be an object");
    for (const char* field : {"outer", "marks", "disks"})
        if (!j.contains(field)) throw Error(ErrorKind::parse, std::string(field) + ": missing");

    CarpetConfig config;
    config.outer = detail::read_points(j["outer"], "outer");
    const auto& marks = j["marks"];
    if (!marks.is_array() || marks.size() != 4) throw Error(ErrorKind::parse, "marks: expected 4 numbers");
    for (std::size_t k = 0; k < 4; ++k) {
        if (!marks[k].is_number()) throw Error(ErrorKind::parse, "marks: expected 4 numbers");
        config.marks[k] = marks[k].get<double>();
    }
    const auto& disks = j["disks"];
    if (!disks.is_array()) throw Error(ErrorKind::parse, "disks: expected an array");
    for (std::size_t i = 0; i < disks.size(); ++i) {
        const auto& d = disks[i];
        const std::string where = "disks[" + std::to_string(i) + "]";
        if (!d.is_object()) throw Error(ErrorKind::parse, where + ": expected an object");
        if (!d.contains("id") || !d["id"].is_number_integer()) throw Error(ErrorKind::parse, where + ".id: missing or not an integer");
        if (!d.contains("polygon")) throw Error(ErrorKind::parse, where + ".polygon: missing");
        config.disks.push_back(make_disk(d["id"].get<int>(), detail::read_points(d["polygon"], where + ".polygon")));
    }
    if (j.contains("meta")) {
        if (!j["meta"].is_object()) throw Error(ErrorKind::parse, "meta: expected an object of strings");
        for (const auto& [key, value] : j["meta"].items()) {
            if (!value.is_string()) throw Error(ErrorKind::parse, "meta." + key + ": expected a string");
            config.meta[key] = value.get<std::string>();
        }
    }
    return config;
}

inline void require_valid(const CarpetConfig& config) {
    const GeometryReport report = validate_carpet(config);
    if (report.ok()) return;
    std::string msg;
    for (const auto& f : report.failures) msg += (msg.empty() ? "" : "; ") + f;
    throw Error(ErrorKind::validation, msg);
}

[[nodiscard]] inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::io, "cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::io, "cannot write " + path);
    out << text;
    if (!out) throw Error(ErrorKind::io, "write failed for " + path);
}

[[nodiscard]] inline CarpetConfig load_carpet(const std::string& path) {
    CarpetConfig config = parse_carpet(read_text_file(path));
    require_valid(config);
    return config;
}

inline void save_carpet(const CarpetConfig& config, const std::string& path) {
    write_text_file(path, carpet_to_json(config));
}

}  // namespace carpet
