#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "diffpos/diffraction.hpp"
#include "diffpos/errors.hpp"

using namespace diffpos;

namespace {

const BuildingModel kBuilding = BuildingModel::reference();

// Fermat point of the unfolded two-leg path: the edge point splits the x gap
// in proportion to the perpendicular distances of both ends from the edge line.
double closed_form_qx(const Point3& a, const Point3& n, const Edge& e) {
    const double z1 = e.height();
    const double da = std::hypot(a.y, a.z - z1);
    const double dn = std::hypot(n.y, n.z - z1);
    return (a.x * dn + n.x * da) / (da + dn);
}

struct Config {
    Point3 anchor;
    NodePosition node;
    EdgeKind kind;
};

Config random_config(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> ax(0.0, 20.0), ay(-30.0, -2.0), az(0.0, 30.0);
    std::uniform_real_distribution<double> nx(0.0, 20.0), ny(0.05, 20.0);
    std::uniform_int_distribution<int> fl(1, 7);
    return {{ax(rng), ay(rng), az(rng)}, {nx(rng), ny(rng), fl(rng)}, rng() % 2 ? EdgeKind::Upper : EdgeKind::Lower};
}

}  // namespace

TEST(Diffraction, SymmetricConfigurationHitsEdgeMidpoint) {
    const DiffractionSolution s = solve_diffraction_point({10.0, -10.0, 12.0}, NodePosition{10.0, 5.0, 3},
                                                          EdgeKind::Upper, kBuilding);
    EXPECT_NEAR(s.point.x, 10.0, 1e-12);
    EXPECT_NEAR(s.lambda, 0.5, 1e-12);
    EXPECT_LT(s.law_residual, 1e-12);
}

TEST(Diffraction, MirrorSymmetry) {
    const Point3 anchor{4.0, -9.0, 15.0};
    const NodePosition node{13.0, 7.0, 2};
    const double l = solve_diffraction_point(anchor, node, EdgeKind::Lower, kBuilding).lambda;
    const Point3 mirrored_anchor{20.0 - anchor.x, anchor.y, anchor.z};
    const NodePosition mirrored_node{20.0 - node.x, node.y, node.floor};
    const double m = solve_diffraction_point(mirrored_anchor, mirrored_node, EdgeKind::Lower, kBuilding).lambda;
    EXPECT_NEAR(l + m, 1.0, 1e-10);
}

TEST(Diffraction, DiffractionBeyondEdgeExtremities) {
    const Point3 anchor{-60.0, -2.0, 2.25};
    const NodePosition node{1.0, 10.0, 1};
    EXPECT_THROW(solve_diffraction_point(anchor, node, EdgeKind::Upper, kBuilding), NoEdgeDiffraction);
    EXPECT_FALSE(try_path_length(anchor, node, EdgeKind::Upper, kBuilding).has_value());
    const DiffractionOutcome o =
        try_solve_diffraction_point(anchor, kBuilding.node_point(node), kBuilding.edge(1, EdgeKind::Upper));
    EXPECT_EQ(o.status, DiffractionStatus::NoEdgeDiffraction);
}

TEST(Diffraction, DegenerateEdgeRejected) {
    Edge e = kBuilding.edge(1, EdgeKind::Upper);
    e.endpoint_2.x = e.endpoint_1.x;
    EXPECT_THROW(quadratic_coefficients({1, -1, 1}, {2, 2, 2}, e), DomainError);
}

TEST(Diffraction, RandomConfigurationsSatisfyLawAndFermat) {
    std::mt19937_64 rng(7);
    int checked = 0;
    for (int i = 0; i < 2000; ++i) {
        const Config c = random_config(rng);
        const Edge edge = kBuilding.edge(c.node.floor, c.kind);
        const Point3 node = kBuilding.node_point(c.node);
        const DiffractionOutcome o = try_solve_diffraction_point(c.anchor, node, edge);
        if (!o.ok()) continue;
        ++checked;
        EXPECT_LT(o.solution.law_residual, 1e-9);
        EXPECT_NEAR(o.solution.point.x, closed_form_qx(c.anchor, node, edge), 1e-7);
        EXPECT_NEAR(o.solution.lambda, fermat_oracle(c.anchor, node, edge, 1e-4), 1e-5);
    }
    EXPECT_GT(checked, 1900);
}

TEST(Diffraction, NodeInLineWithAnchor) {
    // Double root of the edge quadratic; discriminant is pure rounding noise.
    const Point3 anchor{8.0, -14.0, 24.0};
    const NodePosition node{8.0, 282 * 0.05, 7};
    const DiffractionSolution s = solve_diffraction_point(anchor, node, EdgeKind::Lower, kBuilding);
    EXPECT_NEAR(s.point.x, 8.0, 1e-9);
    EXPECT_LT(s.law_residual, 1e-9);
}

TEST(Diffraction, PathNeverShorterThanStraightLine) {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 1000; ++i) {
        const Config c = random_config(rng);
        const auto p = try_path_length(c.anchor, c.node, c.kind, kBuilding);
        if (!p) continue;
        EXPECT_GE(*p + 1e-12, distance(c.anchor, kBuilding.node_point(c.node)));
    }
}

TEST(Diffraction, VanishingWindowMakesEdgesAgree) {
    BuildingDimensions d;
    d.window_height = 1e-6;
    const BuildingModel thin(d);
    const Point3 anchor{2.0, -10.0, 12.0};
    for (int floor = 1; floor <= 7; ++floor) {
        const NodePosition node{13.0, 6.0, floor};
        const double up = path_length(anchor, node, EdgeKind::Upper, thin);
        const double lo = path_length(anchor, node, EdgeKind::Lower, thin);
        EXPECT_LT(std::abs(up - lo), 1e-5);
    }
}

TEST(Diffraction, OracleRejectsCoarseResolution) {
    const Edge e = kBuilding.edge(1, EdgeKind::Upper);
    EXPECT_THROW(fermat_oracle({1, -1, 1}, {2, 2, 1.75}, e, 0.01), DomainError);
}

TEST(Diffraction, ScanStableUnderGridRefinement) {
    const AnchorConfig anchors = AnchorConfig::reference();
    const PathDifferenceScan fine = path_difference_scan(kBuilding, anchors, 0.05);
    const PathDifferenceScan coarse = path_difference_scan(kBuilding, anchors, 0.1);
    EXPECT_EQ(fine.skipped, 0u);
    EXPECT_LT(std::abs(fine.max_difference - coarse.max_difference), 0.05);
    EXPECT_LE(fine.max_difference, 1.1);
    EXPECT_DOUBLE_EQ(fine.cdf.back(), 1.0);
}

TEST(Diffraction, ScanSinkMatchesParallelScan) {
    const AnchorConfig anchors = AnchorConfig::reference();
    std::size_t rows = 0;
    double max_seen = 0.0;
    const PathDifferenceScan s = path_difference_scan(kBuilding, anchors, 0.5, 0.01, [&](const PathDifferenceRow& r) {
        ++rows;
        max_seen = std::max(max_seen, r.difference);
    });
    const PathDifferenceScan p = path_difference_scan(kBuilding, anchors, 0.5);
    EXPECT_EQ(rows, s.evaluated);
    EXPECT_EQ(s.counts, p.counts);
    EXPECT_DOUBLE_EQ(max_seen, p.max_difference);
}
