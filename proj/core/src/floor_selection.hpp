#pragma once

#include <algorithm>
#include <cmath>
#include <functional>

#include "diffpos/errors.hpp"
#include "diffpos/estimators.hpp"

namespace diffpos::detail {

// Fits every floor, keeps the smallest finite residual (lowest floor wins
// ties) and clamps the result into the footprint.
inline PositionEstimate select_floor(const BuildingModel& building, const std::function<FloorFit(int)>& fit_floor,
                                     const char* estimator) {
    PositionEstimate best;
    FloorFit best_fit;
    bool found = false;
    for (int floor = 1; floor <= building.num_floors(); ++floor) {
        const FloorFit fit = fit_floor(floor);
        best.candidates.push_back({floor, fit.residual, fit.iterations, fit.converged});
        if (!std::isfinite(fit.residual)) continue;
        if (!found || fit.residual < best_fit.residual) {
            best_fit = fit;
            best.floor = floor;
            found = true;
        }
    }
    if (!found) throw EstimationFailure(std::string(estimator) + ": no floor produced a finite residual");

    best.x = std::clamp(best_fit.alpha.x, 0.0, building.length());
    best.y = std::clamp(best_fit.alpha.y, 0.0, building.breadth());
    best.clamped = best.x != best_fit.alpha.x || best.y != best_fit.alpha.y;
    best.z = building.node_z(best.floor);
    best.residual = best_fit.residual;
    best.iterations = best_fit.iterations;
    best.converged = best_fit.converged;
    return best;
}

inline Point2 initial_point(InitMode mode, const Point2& custom, const BuildingModel& building) {
    switch (mode) {
        case InitMode::Custom:
            return custom;
        case InitMode::FarWall:
            return {building.length() / 2.0, building.breadth()};
        case InitMode::FloorCentroid:
            break;
    }
    return {building.length() / 2.0, building.breadth() / 2.0};
}

inline Point2 initial_point(const SolverSettings& settings, const BuildingModel& building) {
    return initial_point(settings.init_mode, settings.init, building);
}

}  // namespace diffpos::detail
