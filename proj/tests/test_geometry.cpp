#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "carpet/carpet.hpp"
#include "support/oracles.hpp"

using namespace carpet;

namespace {

double total_area(const CarpetConfig& c) {
    double a = 0.0;
    for (const auto& d : c.disks) a += d.area;
    return a;
}

CarpetConfig scaled(const CarpetConfig& c, double k) {
    CarpetConfig out;
    for (Point p : c.outer) out.outer.push_back(k * p);
    out.marks = c.marks;
    for (const auto& d : c.disks) {
        Polygon q;
        for (Point p : d.polygon) q.push_back(k * p);
        out.disks.push_back(make_disk(d.id, q));
    }
    return out;
}

}  // namespace

TEST(Polygon, AreaPerimeterDiameterOfUnitSquare) {
    const Polygon sq = square_polygon({0, 0, 1});
    EXPECT_DOUBLE_EQ(signed_area(sq), 1.0);
    EXPECT_DOUBLE_EQ(perimeter(sq), 4.0);
    EXPECT_DOUBLE_EQ(diameter(sq), std::sqrt(2.0));
    EXPECT_TRUE(is_simple(sq, 1e-12));
}

TEST(Polygon, LocateInsideBoundaryOutside) {
    const Polygon sq = square_polygon({0, 0, 1});
    EXPECT_TRUE(contains(sq, {0.5, 0.5}));
    EXPECT_FALSE(contains(sq, {1.5, 0.5}));
    EXPECT_EQ(locate(sq, {1.0, 0.3}, 1e-12), Location::boundary);
    EXPECT_NEAR(region_distance(sq, {2.0, 0.5}), 1.0, 1e-15);
    EXPECT_DOUBLE_EQ(region_distance(sq, {0.5, 0.5}), 0.0);
}

TEST(Polygon, BowtieIsNotSimple) {
    const Polygon bow{{0, 0}, {1, 1}, {1, 0}, {0, 1}};
    EXPECT_FALSE(is_simple(bow, 1e-12));
}

TEST(Polygon, ChebyshevCenterOfSquareAndRectangle) {
    const auto c = chebyshev_center(square_polygon({0, 0, 2}));
    EXPECT_NEAR(c.center.x, 1.0, 1e-6);
    EXPECT_NEAR(c.center.y, 1.0, 1e-6);
    EXPECT_NEAR(c.radius, 1.0, 1e-6);
    const Polygon rect = rectangle_outer(Box{0, 0, 4, 1});
    EXPECT_NEAR(chebyshev_center(rect).radius, 0.5, 1e-6);
}

TEST(Polygon, DiskPolygonAreaMatchesClosedForms) {
    const Polygon big = square_polygon({-5, -5, 10});
    EXPECT_NEAR(disk_polygon_area(big, {0, 0}, 1.0), M_PI, 1e-12);
    // Quarter disk at a corner of the unit square.
    EXPECT_NEAR(disk_polygon_area(square_polygon({0, 0, 1}), {0, 0}, 0.5), M_PI / 16.0, 1e-12);
    // Disk larger than the polygon covers all of it.
    EXPECT_NEAR(disk_polygon_area(square_polygon({0, 0, 1}), {0.5, 0.5}, 10.0), 1.0, 1e-12);
}

TEST(Polygon, CanonicalRotationStartsAtSmallestVertex) {
    const Polygon p{{1, 0}, {1, 1}, {0, 1}, {0, 0}};
    const Polygon r = canonical_rotation(p);
    EXPECT_EQ(r.front(), (Point{0, 0}));
    EXPECT_EQ(r[1], (Point{1, 0}));
}

TEST(Standard, GenerationOneHasNineThirdSquares) {
    const CarpetConfig c = generate_standard_carpet(1);
    ASSERT_EQ(c.disks.size(), 9u);
    for (const auto& d : c.disks) {
        EXPECT_NEAR(d.box.width(), 1.0 / 3.0, 1e-15);
        EXPECT_NEAR(d.box.height(), 1.0 / 3.0, 1e-15);
    }
    EXPECT_NEAR(total_area(c), 1.0, 1e-12);
}

TEST(Standard, DiskCountsFollowHolesPlusCells) {
    for (int n = 1; n <= 4; ++n) {
        std::size_t expected = 0, p = 1;
        for (int k = 1; k <= n; ++k) {
            expected += p;  // 8^(k-1) holes
            p *= 8;
        }
        expected += p;  // 8^n cells
        EXPECT_EQ(generate_standard_carpet(n).disks.size(), expected) << "n=" << n;
    }
    EXPECT_EQ(generate_standard_carpet(2).disks.size(), 73u);
    EXPECT_EQ(generate_standard_carpet(3).disks.size(), 585u);
}

TEST(Standard, AreaIsOneAndConfigValidates) {
    for (int n = 1; n <= 3; ++n) {
        const CarpetConfig c = generate_standard_carpet(n);
        EXPECT_NEAR(total_area(c), 1.0, 1e-12);
        const GeometryReport rep = validate_carpet(c);
        EXPECT_TRUE(rep.ok()) << (rep.failures.empty() ? "" : rep.failures.front());
        EXPECT_DOUBLE_EQ(rep.min_relative_distance, 0.0);
    }
}

TEST(Standard, RejectsOutOfRangeGeneration) {
    try {
        (void)generate_standard_carpet(0);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::invalid_argument);
    }
}

TEST(Standard, MarksSplitTheUnitSquareAtItsCorners) {
    const CarpetConfig c = generate_standard_carpet(1);
    EXPECT_DOUBLE_EQ(c.marks[0], 0.0);
    EXPECT_DOUBLE_EQ(c.marks[1], 0.25);
    EXPECT_DOUBLE_EQ(c.marks[2], 0.5);
    EXPECT_DOUBLE_EQ(c.marks[3], 0.75);
    // Theta1 is the left side.
    EXPECT_EQ(side_of_fraction(c.marks, 0.1), Side::theta1);
    const Point p = boundary_point_at(c.outer, 0.125);
    EXPECT_NEAR(p.x, 0.0, 1e-15);
    EXPECT_NEAR(p.y, 0.5, 1e-15);
}

TEST(SquareCarpet, FourHalfSquares) {
    const CarpetConfig c = oracle::grid(2);
    EXPECT_EQ(c.disks.size(), 4u);
    EXPECT_TRUE(validate_carpet(c).ok());
}

TEST(SquareCarpet, RejectsIncompleteCover) {
    const std::vector<Square> tiles{{0, 0, 0.5}, {0.5, 0, 0.5}, {0, 0.5, 0.5}};
    try {
        (void)generate_square_carpet(tiles, Box{0, 0, 1, 1});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::invalid_tiling);
    }
}

TEST(SquareCarpet, RejectsOverlap) {
    const std::vector<Square> tiles{{0, 0, 0.6}, {0.5, 0, 0.5}, {0, 0.5, 0.5}, {0.5, 0.5, 0.5}};
    EXPECT_THROW((void)generate_square_carpet(tiles, Box{0, 0, 1, 1}), Error);
}

TEST(SquareCarpet, StandardOutputReingestedMatches) {
    const CarpetConfig a = generate_standard_carpet(1);
    std::vector<Square> tiles;
    for (const auto& d : a.disks) tiles.push_back({d.box.xmin, d.box.ymin, d.box.width()});
    const CarpetConfig b = generate_square_carpet(tiles, Box{0, 0, 1, 1});
    ASSERT_EQ(a.disks.size(), b.disks.size());
    for (std::size_t i = 0; i < a.disks.size(); ++i) {
        const Polygon pa = canonical_rotation(a.disks[i].polygon), pb = canonical_rotation(b.disks[i].polygon);
        ASSERT_EQ(pa.size(), pb.size());
        // 2/3 reached by different arithmetic may differ in the last bit
        for (std::size_t k = 0; k < pa.size(); ++k) {
            EXPECT_NEAR(pa[k].x, pb[k].x, 1e-15);
            EXPECT_NEAR(pa[k].y, pb[k].y, 1e-15);
        }
    }
}

TEST(Validate, SquareDisksHaveRootTwoQuasiballRatio) {
    const GeometryReport rep = validate_carpet(generate_standard_carpet(1));
    ASSERT_EQ(rep.k0.size(), 9u);
    for (double k : rep.k0) EXPECT_NEAR(k, std::sqrt(2.0), 1e-5);
    EXPECT_GT(rep.min_k1, 0.0);
}

TEST(Validate, RelativeDistanceOfSeparatedDisks) {
    // Diameters 2 and 4, one unit apart.
    const double a = std::sqrt(2.0), b = 2.0 * std::sqrt(2.0);
    CarpetConfig c;
    c.outer = rectangle_outer(Box{-10, -10, 10, 10});
    c.marks = rectangle_marks(Box{-10, -10, 10, 10});
    c.disks.push_back(make_disk(0, square_polygon({0, 0, a})));
    c.disks.push_back(make_disk(1, square_polygon({a + 1.0, 0, b})));
    const GeometryReport rep = validate_carpet(c);
    EXPECT_TRUE(rep.ok());
    EXPECT_NEAR(rep.min_relative_distance, 0.5, 1e-12);
}

TEST(Validate, OverlappingDisksNamed) {
    CarpetConfig c = oracle::grid(2);
    c.disks[1] = make_disk(c.disks[1].id, square_polygon({0.4, 0.0, 0.5}));
    const GeometryReport rep = validate_carpet(c);
    ASSERT_FALSE(rep.ok());
    bool named = false;
    for (const auto& f : rep.failures) named = named || f.find("disks 0,1") != std::string::npos;
    EXPECT_TRUE(named);
}

TEST(Validate, ClockwiseDiskRejected) {
    CarpetConfig c = oracle::grid(2);
    Polygon p = c.disks[0].polygon;
    std::reverse(p.begin(), p.end());
    c.disks[0] = make_disk(c.disks[0].id, p);
    EXPECT_FALSE(validate_carpet(c).ok());
}

TEST(Validate, DiskOutsideOuterRejected) {
    CarpetConfig c = oracle::grid(2);
    c.disks[3] = make_disk(c.disks[3].id, square_polygon({0.8, 0.8, 0.5}));
    EXPECT_FALSE(validate_carpet(c).ok());
}

TEST(Validate, BadMarksRejected) {
    CarpetConfig c = oracle::grid(2);
    c.marks = {0.0, 0.5, 0.25, 0.75};
    EXPECT_FALSE(validate_carpet(c).ok());
}

TEST(Validate, ScalingLeavesShapeConstantsAlone) {
    const CarpetConfig c = generate_standard_carpet(2);
    const GeometryReport a = validate_carpet(c);
    const GeometryReport b = validate_carpet(scaled(c, 3.5));
    ASSERT_EQ(a.diameters.size(), b.diameters.size());
    for (std::size_t i = 0; i < a.diameters.size(); ++i) EXPECT_NEAR(b.diameters[i], 3.5 * a.diameters[i], 1e-12);
    EXPECT_NEAR(a.min_k0, b.min_k0, 1e-6);
    EXPECT_NEAR(a.max_k0, b.max_k0, 1e-6);
    EXPECT_NEAR(a.min_k1, b.min_k1, 1e-9);
    EXPECT_NEAR(a.min_relative_distance, b.min_relative_distance, 1e-12);
}

TEST(CarpetIo, RoundTripIsByteIdentical) {
    for (int n = 1; n <= 3; ++n) {
        const std::string a = carpet_to_json(generate_standard_carpet(n));
        const std::string b = carpet_to_json(parse_carpet(a));
        EXPECT_EQ(a, b);
    }
}

TEST(CarpetIo, RoundTripIsBitExact) {
    const CarpetConfig c = oracle::moron_rectangle();
    const CarpetConfig d = parse_carpet(carpet_to_json(c));
    ASSERT_EQ(c.disks.size(), d.disks.size());
    const CarpetConfig cc = canonicalize(c);
    for (std::size_t i = 0; i < c.disks.size(); ++i) EXPECT_EQ(cc.disks[i].polygon, d.disks[i].polygon);
    EXPECT_EQ(c.outer, d.outer);
    EXPECT_EQ(c.marks, d.marks);
}

TEST(CarpetIo, MissingMarksNamed) {
    std::string text = carpet_to_json(oracle::grid(2));
    const auto at = text.find("\"marks\"");
    text.replace(at, 7, "\"nomark\"");
    try {
        (void)parse_carpet(text);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::parse);
        EXPECT_NE(std::string(e.what()).find("marks"), std::string::npos);
    }
}

TEST(CarpetIo, MalformedJsonIsParseError) {
    try {
        (void)parse_carpet("{\"outer\": [");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::parse);
    }
}

TEST(CarpetIo, OverlapIsValidationErrorWithIds) {
    CarpetConfig c = oracle::grid(2);
    c.disks[1] = make_disk(c.disks[1].id, square_polygon({0.4, 0.0, 0.5}));
    try {
        require_valid(parse_carpet(carpet_to_json(c)));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::validation);
        EXPECT_NE(std::string(e.what()).find("0,1"), std::string::npos);
    }
}
