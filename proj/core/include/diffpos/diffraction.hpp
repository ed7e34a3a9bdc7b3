#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include "diffpos/geometry.hpp"

namespace diffpos {

// Coefficients of a*l^2 + b*l + c = 0 whose roots parameterize candidate
// diffraction points Q = l*X1 + (1 - l)*X2 along a horizontal edge.
struct QuadraticCoefficients {
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;

    double discriminant() const { return b * b - 4.0 * a * c; }
};

struct DiffractionSolution {
    double lambda = 0.0;
    Point3 point;
    double law_residual = 0.0;
    QuadraticCoefficients coefficients;
    // Discriminant after roundoff clamping.
    double discriminant = 0.0;
    // s in l = (-b + s*sqrt(disc)) / (2a); 0 when a == 0 and the equation is linear.
    int root_sign = 0;
};

enum class DiffractionStatus { Ok, NoEdgeDiffraction, LawViolated };

struct DiffractionOutcome {
    DiffractionStatus status = DiffractionStatus::LawViolated;
    DiffractionSolution solution;

    bool ok() const { return status == DiffractionStatus::Ok; }
};

// Roots within this residual are accepted as satisfying the law of diffraction.
inline constexpr double kLawTolerance = 1e-6;
// Negative discriminants down to -kDiscriminantClamp * b^2 are treated as zero.
inline constexpr double kDiscriminantClamp = 1e-9;

// Throws DomainError for a degenerate edge (x1 == x2).
QuadraticCoefficients quadratic_coefficients(const Point3& anchor, const Point3& node, const Edge& edge);

Point3 edge_point(const Edge& edge, double lambda);

// |u_inc . e - u_diff . e| with u_inc along A->Q, u_diff along Q->B and e the
// edge direction. Zero exactly on the forward diffraction cone.
double law_residual(const Point3& anchor, const Point3& node, const Edge& edge, double lambda);

// Non-throwing solver for hot loops. DomainError still propagates for degenerate edges.
DiffractionOutcome try_solve_diffraction_point(const Point3& anchor, const Point3& node, const Edge& edge);

// Throws NoEdgeDiffraction or NumericalFailure.
DiffractionSolution solve_diffraction_point(const Point3& anchor, const Point3& node, const Edge& edge);
DiffractionSolution solve_diffraction_point(const Point3& anchor, const NodePosition& node, EdgeKind kind,
                                            const BuildingModel& building);

// Anchor-to-edge leg plus edge-to-node leg, the node sitting half a window
// below (upper edge) or above (lower edge) the diffraction point.
// Throws NoEdgeDiffraction.
double path_length(const Point3& anchor, const NodePosition& node, EdgeKind kind, const BuildingModel& building);
std::optional<double> try_path_length(const Point3& anchor, const NodePosition& node, EdgeKind kind,
                                      const BuildingModel& building);

// Independent check of the solver: the diffraction point minimizes the total
// two-leg length along the edge. Scans a uniform lambda grid of the given
// resolution (the objective is convex, so the grid minimizer is located by
// bisection on forward differences) and refines with golden-section search
// inside the neighbouring cells. Resolution must lie in (0, 1e-3].
double fermat_oracle(const Point3& anchor, const Point3& node, const Edge& edge, double resolution);

struct PathDifferenceRow {
    int floor = 0;
    double x = 0.0;
    double y = 0.0;
    std::size_t anchor_index = 0;
    double upper_length = 0.0;
    double lower_length = 0.0;
    double difference = 0.0;
};

struct PathDifferenceScan {
    double bin_width = 0.0;
    // Bin k covers [k*bin_width, (k+1)*bin_width).
    std::vector<std::size_t> counts;
    std::vector<double> cdf;
    double max_difference = 0.0;
    std::size_t evaluated = 0;
    std::size_t skipped = 0;

    // Associative merge of partial scans sharing a bin width.
    void merge(const PathDifferenceScan& other);
    void finalize_cdf();
};

// |upper - lower| path length over a uniform (x, y, floor) grid for every
// anchor. x runs over [0, L] and y over (0, B]. Grid points where either edge
// yields no diffraction are skipped and counted. The optional sink receives
// every evaluated row in grid order and forces a single-threaded scan.
PathDifferenceScan path_difference_scan(const BuildingModel& building, const AnchorConfig& anchors, double spacing,
                                        double bin_width = 0.01,
                                        const std::function<void(const PathDifferenceRow&)>& sink = {});

}  // namespace diffpos
