#include "diffpos/geometry.hpp"

#include <string>

#include "diffpos/errors.hpp"

namespace diffpos {

bool is_finite(const Point3& p) { return std::isfinite(p.x) && std::isfinite(p.y) && std::isfinite(p.z); }

const char* to_string(EdgeKind kind) { return kind == EdgeKind::Upper ? "upper" : "lower"; }

BuildingModel::BuildingModel(const BuildingDimensions& dims) : BuildingModel(dims, 0.0, dims.length) {}

BuildingModel::BuildingModel(const BuildingDimensions& dims, double window_x_min, double window_x_max)
    : dims_(dims), window_x_min_(window_x_min), window_x_max_(window_x_max) {
    if (dims.num_floors < 1) throw DomainError("building needs at least one floor");
    if (!(dims.length > 0.0) || !(dims.breadth > 0.0)) throw DomainError("building footprint must be positive");
    if (!(dims.window_height > 0.0) || !(dims.floor_height > dims.window_height))
        throw DomainError("need floor_height > window_height > 0");
    if (!std::isfinite(dims.length) || !std::isfinite(dims.breadth) || !std::isfinite(dims.floor_height))
        throw DomainError("building dimensions must be finite");
    if (!(window_x_min < window_x_max)) throw DomainError("window extent must have positive length");
}

BuildingModel BuildingModel::reference() { return BuildingModel(BuildingDimensions{}); }

void BuildingModel::check_floor(int floor) const {
    if (!has_floor(floor))
        throw DomainError("floor " + std::to_string(floor) + " outside [1, " + std::to_string(dims_.num_floors) + "]");
}

double BuildingModel::node_z(int floor) const {
    check_floor(floor);
    return (floor - 1) * dims_.floor_height + dims_.floor_height / 2.0;
}

Edge BuildingModel::edge(int floor, EdgeKind kind) const {
    const double half = dims_.window_height / 2.0;
    const double z = kind == EdgeKind::Upper ? node_z(floor) + half : node_z(floor) - half;
    return Edge{{window_x_min_, 0.0, z}, {window_x_max_, 0.0, z}, kind, floor};
}

FloorEdges BuildingModel::edges_for_floor(int floor) const {
    return {edge(floor, EdgeKind::Upper), edge(floor, EdgeKind::Lower)};
}

Point3 BuildingModel::node_point(const NodePosition& node) const { return {node.x, node.y, node_z(node.floor)}; }

bool BuildingModel::contains(const NodePosition& node) const {
    return has_floor(node.floor) && node.x >= 0.0 && node.x <= dims_.length && node.y > 0.0 &&
           node.y <= dims_.breadth;
}

AnchorConfig::AnchorConfig(std::vector<Point3> anchors) : anchors_(std::move(anchors)) {
    if (anchors_.size() < 3) throw DomainError("need at least three anchors");
    for (const auto& a : anchors_) {
        if (!is_finite(a)) throw DomainError("anchor coordinates must be finite");
        if (!(a.y < 0.0)) throw DomainError("anchors must lie outside the facade (y < 0)");
    }
}

AnchorConfig AnchorConfig::reference() {
    return AnchorConfig({{2.0, -10.0, 12.0}, {8.0, -14.0, 24.0}, {12.0, -8.0, 17.0}, {18.0, -12.0, 5.0}});
}

}  // namespace diffpos
