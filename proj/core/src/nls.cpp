#include <cmath>
#include <limits>

#include "diffpos/diffraction.hpp"
#include "diffpos/errors.hpp"
#include "diffpos/estimators.hpp"
#include "floor_selection.hpp"

namespace diffpos {

namespace {

constexpr double kNearSingular = 1e-10;
// Below this |a| / |b| the root is effectively that of the linear term and the
// 1/a form loses precision; differentiate the quadratic implicitly instead.
constexpr double kLinearRegime = 1e-6;
constexpr double kConditionLimit = 1e12;
constexpr double kInitialDamping = 1e-3;
constexpr double kMaxDamping = 1e6;

struct Derivatives {
    double a;
    double b;
    double c;
};

enum class RowStatus { Ok, NoEdge, NearSingular };

struct Row {
    RowStatus status = RowStatus::NoEdge;
    PathPartials partials;
};

double edge_leg(const Point3& anchor, double qx, double qz) {
    return std::sqrt((anchor.x - qx) * (anchor.x - qx) + anchor.y * anchor.y + (anchor.z - qz) * (anchor.z - qz));
}

double node_leg(const NodePosition& node, double qx, double half_w) {
    return std::sqrt((node.x - qx) * (node.x - qx) + node.y * node.y + half_w * half_w);
}

// d(q_x)/d(theta) for the selected root.
double dq(const DiffractionSolution& sol, double d, const Derivatives& der) {
    const double a = sol.coefficients.a;
    const double b = sol.coefficients.b;
    const double c = sol.coefficients.c;
    const double lambda = sol.lambda;
    if (sol.root_sign == 0 || std::abs(a) <= kLinearRegime * std::abs(b)) {
        // a l^2 + b l + c = 0  =>  l' = -(a' l^2 + b' l + c') / (2 a l + b)
        return -d * (der.a * lambda * lambda + der.b * lambda + der.c) / (2.0 * a * lambda + b);
    }
    const double s = sol.root_sign;
    const double sq = std::sqrt(sol.discriminant);
    return d / (2.0 * a) *
           (der.a * ((b - s * sq) / a) + (-der.b + s * (b * der.b - 2.0 * c * der.a - 2.0 * a * der.c) / sq));
}

Row partials_row(const Point3& anchor, const NodePosition& node, const BuildingModel& building) {
    const Edge edge = building.edge(node.floor, EdgeKind::Upper);
    const DiffractionOutcome out = try_solve_diffraction_point(anchor, building.node_point(node), edge);
    Row row;
    if (!out.ok()) return row;
    const DiffractionSolution& sol = out.solution;

    const double x1 = edge.endpoint_1.x;
    const double x2 = edge.endpoint_2.x;
    const double d = x1 - x2;
    const double z1 = edge.height();
    const double xa = anchor.x, ya = anchor.y, za = anchor.z;
    const double xn = node.x, yn = node.y;
    const double anchor_perp = (z1 - za) * (z1 - za) + ya * ya;

    const double qx = sol.point.x;
    const double l1 = edge_leg(anchor, qx, z1);
    const double l2 = node_leg(node, qx, 0.5 * building.window_height());
    row.partials.path_length = l1 + l2;

    const double b = sol.coefficients.b;
    if (sol.root_sign != 0 && sol.discriminant < kNearSingular * b * b) {
        row.status = RowStatus::NearSingular;
        return row;
    }

    const Derivatives wrt_x{0.0, 2.0 * d * anchor_perp, 2.0 * (x2 - xn) * anchor_perp};
    const Derivatives wrt_y{2.0 * yn * d * d, 4.0 * yn * d * (x2 - xa), 2.0 * yn * (x2 - xa) * (x2 - xa)};
    const double dqx = dq(sol, d, wrt_x);
    const double dqy = dq(sol, d, wrt_y);

    row.partials.d_dx = (qx - xa) * dqx / l1 + (xn - qx) * (1.0 - dqx) / l2;
    row.partials.d_dy = (qx - xa) * dqy / l1 + ((qx - xn) * dqy + yn) / l2;
    row.status = RowStatus::Ok;
    return row;
}

}  // namespace

PathPartials path_partials(const Point3& anchor, const NodePosition& node, const BuildingModel& building) {
    const Row row = partials_row(anchor, node, building);
    switch (row.status) {
        case RowStatus::Ok:
            return row.partials;
        case RowStatus::NearSingular:
            throw NearSingularDerivative("edge quadratic discriminant is near zero");
        case RowStatus::NoEdge:
            break;
    }
    // Re-run the throwing solver for the precise error kind.
    (void)solve_diffraction_point(anchor, node, EdgeKind::Upper, building);
    throw NumericalFailure("path partials unavailable");
}

PathPartials path_partials_stationary(const Point3& anchor, const NodePosition& node,
                                      const BuildingModel& building) {
    const Edge edge = building.edge(node.floor, EdgeKind::Upper);
    const DiffractionSolution sol = solve_diffraction_point(anchor, building.node_point(node), edge);
    const double qx = sol.point.x;
    const double l2 = node_leg(node, qx, 0.5 * building.window_height());
    return {edge_leg(anchor, qx, edge.height()) + l2, (node.x - qx) / l2, node.y / l2};
}

Eigen::MatrixX2d nls_jacobian(const Point2& alpha, int floor, const AnchorConfig& anchors,
                              const BuildingModel& building) {
    Eigen::MatrixX2d h(static_cast<Eigen::Index>(anchors.size()), 2);
    const NodePosition node{alpha.x, alpha.y, floor};
    for (std::size_t j = 0; j < anchors.size(); ++j) {
        const PathPartials p = path_partials(anchors[j], node, building);
        h(static_cast<Eigen::Index>(j), 0) = p.d_dx;
        h(static_cast<Eigen::Index>(j), 1) = p.d_dy;
    }
    return h;
}

namespace {

struct Linearization {
    std::size_t rows = 0;
    double cost = 0.0;
    bool near_singular = false;
    Eigen::MatrixX2d h;
    Eigen::VectorXd error;
};

Linearization linearize(std::span<const double> ranges, const AnchorConfig& anchors, const BuildingModel& building,
                        const NodePosition& node) {
    Linearization lin;
    lin.h.resize(static_cast<Eigen::Index>(anchors.size()), 2);
    lin.error.resize(static_cast<Eigen::Index>(anchors.size()));
    for (std::size_t j = 0; j < anchors.size(); ++j) {
        Row row = partials_row(anchors[j], node, building);
        if (row.status == RowStatus::NoEdge) continue;
        if (row.status == RowStatus::NearSingular) {
            // The analytic branch derivative blows up here; the stationary form does not.
            row.partials = path_partials_stationary(anchors[j], node, building);
            lin.near_singular = true;
        }
        const auto r = static_cast<Eigen::Index>(lin.rows++);
        lin.h(r, 0) = row.partials.d_dx;
        lin.h(r, 1) = row.partials.d_dy;
        lin.error(r) = ranges[j] - row.partials.path_length;
        lin.cost += lin.error(r) * lin.error(r);
    }
    lin.h.conservativeResize(static_cast<Eigen::Index>(lin.rows), 2);
    lin.error.conservativeResize(static_cast<Eigen::Index>(lin.rows));
    return lin;
}

double condition_number(const Eigen::Matrix2d& m) {
    const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(m, Eigen::EigenvaluesOnly);
    const double lo = eig.eigenvalues()(0);
    const double hi = eig.eigenvalues()(1);
    if (!(lo > 0.0)) return std::numeric_limits<double>::infinity();
    return hi / lo;
}

}  // namespace

FloorFit nls_floor_estimate(std::span<const double> ranges, const AnchorConfig& anchors,
                            const BuildingModel& building, int floor, const SolverSettings& settings) {
    settings.validate();
    if (ranges.size() != anchors.size()) throw DomainError("range count must match anchor count");
    if (anchors.size() < 2) throw DomainError("per-floor least squares needs at least two anchors");
    if (!building.has_floor(floor)) throw DomainError("floor out of range");

    FloorFit fit;
    fit.alpha = detail::initial_point(settings, building);
    const auto failed = [&fit] {
        fit.residual = std::numeric_limits<double>::infinity();
        fit.converged = false;
        return fit;
    };

    double mu = settings.damping;
    Linearization lin = linearize(ranges, anchors, building, {fit.alpha.x, fit.alpha.y, floor});
    for (std::size_t k = 1; k <= settings.max_iterations; ++k) {
        fit.iterations = k;
        if (lin.rows < 2) return failed();

        const Eigen::Matrix2d normal = lin.h.transpose() * lin.h;
        const Eigen::Vector2d gradient = lin.h.transpose() * lin.error;
        if ((condition_number(normal) > kConditionLimit || lin.near_singular) && mu == 0.0) mu = kInitialDamping;

        bool accepted = false;
        Eigen::Vector2d step = Eigen::Vector2d::Zero();
        while (true) {
            const Eigen::Matrix2d damped = normal + mu * Eigen::Matrix2d::Identity();
            if (condition_number(damped) > kConditionLimit) {
                if (mu >= kMaxDamping) return failed();
                mu = mu == 0.0 ? kInitialDamping : mu * 10.0;
                continue;
            }
            step = damped.ldlt().solve(gradient);
            // The path model is even in y, so a step across the facade is folded back.
            const Point2 trial{fit.alpha.x + step.x(), std::abs(fit.alpha.y + step.y())};
            Linearization next = linearize(ranges, anchors, building, {trial.x, trial.y, floor});
            if (next.rows >= lin.rows && next.cost <= lin.cost) {
                fit.alpha = trial;
                lin = std::move(next);
                accepted = true;
                mu = mu <= kInitialDamping ? 0.0 : mu / 10.0;
                break;
            }
            if (step.norm() < settings.delta) break;
            mu = mu == 0.0 ? kInitialDamping : mu * 10.0;
            if (mu > kMaxDamping) break;
        }

        if (step.norm() < settings.delta || !accepted) {
            // No descent left: either converged or stuck at a minimum of the damped model.
            fit.converged = true;
            break;
        }
    }
    fit.residual = lin.rows >= 2 ? lin.cost : std::numeric_limits<double>::infinity();
    return fit;
}

PositionEstimate nls_estimate(std::span<const double> ranges, const AnchorConfig& anchors,
                              const BuildingModel& building, const SolverSettings& settings) {
    return detail::select_floor(
        building, [&](int floor) { return nls_floor_estimate(ranges, anchors, building, floor, settings); }, "NLS");
}

}  // namespace diffpos
