#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "diffpos/bias.hpp"
#include "diffpos/geometry.hpp"

namespace diffpos {

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

struct FloorCandidate {
    int floor = 0;
    double residual = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
};

struct PositionEstimate {
    double x = 0.0;
    double y = 0.0;
    int floor = 0;
    double z = 0.0;
    double residual = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
    // x/y were pulled back into the building footprint.
    bool clamped = false;
    std::vector<FloorCandidate> candidates;
};

enum class IppaVariant { ID, IDMin, IDMean };

const char* to_string(IppaVariant variant);
BiasStatistic bias_statistic(IppaVariant variant);

enum class InitMode {
    FloorCentroid,  // (L/2, B/2)
    FarWall,        // (L/2, B): midpoint of the wall opposite the window facade
    Custom,
};

struct SolverSettings {
    double delta = 1e-4;
    std::size_t max_iterations = 1000;
    InitMode init_mode = InitMode::FloorCentroid;
    Point2 init;  // used with InitMode::Custom
    double damping = 0.0;

    void validate() const;
};

// Residual used for IPPA stopping and floor selection.
enum class IppaResidualForm {
    AbsoluteMismatch,  // mean |(r - r_b) - d|
    PrintedProduct,    // mean (r - r_b) * d, kept for comparison
};

// Distance between a floor estimate and an anchor.
enum class IppaDistance {
    Lifted3D,  // estimate lifted to the floor's node height
    Planar2D,  // anchor projected onto the floor plane
};

struct IppaOptions {
    IppaResidualForm residual_form = IppaResidualForm::AbsoluteMismatch;
    IppaDistance distance = IppaDistance::Lifted3D;
    // Start point unless SolverSettings asks for a Custom one. With every
    // anchor outside the window facade the centroid usually lies inside all
    // range spheres, where the projection has nothing to do; starting at the
    // far wall lets the iteration approach the spheres from outside.
    InitMode init_mode = InitMode::FarWall;
};

struct FloorFit {
    Point2 alpha;
    double residual = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
};

// Linearized multilateration by differencing squared ranges against anchor 0.
// Needs >= 4 non-coplanar anchors; throws SingularGeometry otherwise. The
// building-free overload returns the raw solution (floor 0); the other one
// clamps x/y into the footprint (flagged) and reports the nearest floor while
// leaving z unsnapped.
PositionEstimate lls_estimate(std::span<const double> ranges, const AnchorConfig& anchors);
PositionEstimate lls_estimate(std::span<const double> ranges, const AnchorConfig& anchors,
                              const BuildingModel& building);

// Projection-averaging estimator on one floor. Each anchor whose corrected
// ranging sphere does not contain the current estimate contributes the
// projection of the estimate onto that sphere; the estimate becomes their
// mean. Stops when the residual changes by less than settings.delta.
FloorFit ippa_floor_estimate(std::span<const double> ranges, const AnchorConfig& anchors,
                             const BuildingModel& building, int floor, std::span<const double> bias_corrections,
                             const SolverSettings& settings = {}, const IppaOptions& options = {});

// Runs every floor and keeps the one with the smallest residual (lowest floor on ties).
PositionEstimate ippa_estimate(std::span<const double> ranges, const AnchorConfig& anchors,
                               const BuildingModel& building, const BiasTable& bias_table, IppaVariant variant,
                               const SolverSettings& settings = {}, const IppaOptions& options = {});

// Derivatives of the upper-edge path length with respect to the node (x, y).
struct PathPartials {
    double path_length = 0.0;
    double d_dx = 0.0;
    double d_dy = 0.0;
};

// Analytic partials obtained by differentiating the root of the edge
// quadratic along the same branch the solver selected. Throws
// NoEdgeDiffraction, or NearSingularDerivative when |b^2 - 4ac| < 1e-10 b^2.
PathPartials path_partials(const Point3& anchor, const NodePosition& node, const BuildingModel& building);

// Same derivative from stationarity of the path length at the diffraction
// point: only the edge-to-node leg depends on the node explicitly. Well
// defined where the analytic form is singular.
PathPartials path_partials_stationary(const Point3& anchor, const NodePosition& node,
                                      const BuildingModel& building);

// M x 2 Jacobian of upper-edge path lengths at alpha on the given floor.
Eigen::MatrixX2d nls_jacobian(const Point2& alpha, int floor, const AnchorConfig& anchors,
                              const BuildingModel& building);

// Damped Gauss-Newton on one floor with the upper-edge path model. Residual is
// the sum of squared range errors; +inf when the floor fails.
FloorFit nls_floor_estimate(std::span<const double> ranges, const AnchorConfig& anchors,
                            const BuildingModel& building, int floor, const SolverSettings& settings = {});

PositionEstimate nls_estimate(std::span<const double> ranges, const AnchorConfig& anchors,
                              const BuildingModel& building, const SolverSettings& settings = {});

}  // namespace diffpos
