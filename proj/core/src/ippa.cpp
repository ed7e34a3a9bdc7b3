#include <cmath>

#include "diffpos/errors.hpp"
#include "diffpos/estimators.hpp"
#include "floor_selection.hpp"

namespace diffpos {

const char* to_string(IppaVariant variant) {
    switch (variant) {
        case IppaVariant::ID:
            return "ID";
        case IppaVariant::IDMin:
            return "ID,min";
        case IppaVariant::IDMean:
            return "ID,mean";
    }
    return "?";
}

BiasStatistic bias_statistic(IppaVariant variant) {
    switch (variant) {
        case IppaVariant::ID:
            return BiasStatistic::Zero;
        case IppaVariant::IDMin:
            return BiasStatistic::Min;
        case IppaVariant::IDMean:
            return BiasStatistic::Mean;
    }
    return BiasStatistic::Zero;
}

void SolverSettings::validate() const {
    if (!(delta > 0.0)) throw DomainError("solver delta must be positive");
    if (max_iterations < 1) throw DomainError("solver needs at least one iteration");
    if (!(damping >= 0.0)) throw DomainError("solver damping must be non-negative");
}

namespace {

struct AnchorGeometry {
    double dist;
    // Unit vector from the anchor towards the estimate, restricted to (x, y).
    double ux;
    double uy;
};

AnchorGeometry anchor_geometry(const Point2& alpha, double node_z, const Point3& anchor, IppaDistance mode) {
    const double dx = alpha.x - anchor.x;
    const double dy = alpha.y - anchor.y;
    const double dz = mode == IppaDistance::Lifted3D ? node_z - anchor.z : 0.0;
    const double d = std::sqrt(dx * dx + dy * dy + dz * dz);
    if (d == 0.0) return {0.0, 0.0, 0.0};
    return {d, dx / d, dy / d};
}

}  // namespace

FloorFit ippa_floor_estimate(std::span<const double> ranges, const AnchorConfig& anchors,
                             const BuildingModel& building, int floor, std::span<const double> bias_corrections,
                             const SolverSettings& settings, const IppaOptions& options) {
    settings.validate();
    const std::size_t m = anchors.size();
    if (ranges.size() != m || bias_corrections.size() != m)
        throw DomainError("ranges and bias corrections must match the anchor count");
    const double node_z = building.node_z(floor);

    const auto residual = [&](const Point2& alpha) {
        double sum = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
            const double corrected = ranges[j] - bias_corrections[j];
            const double d = anchor_geometry(alpha, node_z, anchors[j], options.distance).dist;
            sum += options.residual_form == IppaResidualForm::AbsoluteMismatch ? std::abs(corrected - d)
                                                                                : corrected * d;
        }
        return sum / static_cast<double>(m);
    };

    FloorFit fit;
    const InitMode start = settings.init_mode == InitMode::Custom ? InitMode::Custom : options.init_mode;
    fit.alpha = detail::initial_point(start, settings.init, building);
    double phi = residual(fit.alpha);
    for (std::size_t k = 1; k <= settings.max_iterations; ++k) {
        Point2 sum{0.0, 0.0};
        std::size_t active = 0;
        for (std::size_t j = 0; j < m; ++j) {
            const double corrected = ranges[j] - bias_corrections[j];
            const AnchorGeometry g = anchor_geometry(fit.alpha, node_z, anchors[j], options.distance);
            if (corrected > g.dist) continue;
            const double step = corrected - g.dist;
            sum.x += fit.alpha.x + step * g.ux;
            sum.y += fit.alpha.y + step * g.uy;
            ++active;
        }
        // Empty active set: estimate already inside every sphere, keep it.
        if (active > 0) fit.alpha = {sum.x / static_cast<double>(active), sum.y / static_cast<double>(active)};

        const double next_phi = residual(fit.alpha);
        fit.iterations = k;
        const bool settled = std::abs(next_phi - phi) < settings.delta;
        phi = next_phi;
        if (settled) {
            fit.converged = true;
            break;
        }
    }
    fit.residual = phi;
    return fit;
}

PositionEstimate ippa_estimate(std::span<const double> ranges, const AnchorConfig& anchors,
                               const BuildingModel& building, const BiasTable& bias_table, IppaVariant variant,
                               const SolverSettings& settings, const IppaOptions& options) {
    if (bias_table.num_anchors() != anchors.size()) throw DomainError("bias table anchor count mismatch");
    const BiasStatistic stat = bias_statistic(variant);
    return detail::select_floor(
        building,
        [&](int floor) {
            const std::vector<double> corrections = bias_table.corrections(floor, stat);
            return ippa_floor_estimate(ranges, anchors, building, floor, corrections, settings, options);
        },
        "IPPA");
}

}  // namespace diffpos
