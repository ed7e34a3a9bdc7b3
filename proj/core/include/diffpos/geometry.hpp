#pragma once

#include <cmath>
#include <span>
#include <vector>

namespace diffpos {

// Coordinate convention used throughout the library:
//   facade with the windows is the plane y = 0,
//   building interior is 0 < y <= breadth,
//   anchors sit outside at y < 0,
//   window edges run along x,
//   origin is the ground-floor lower corner of the facade.

struct Point3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    friend Point3 operator+(const Point3& a, const Point3& b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
    friend Point3 operator-(const Point3& a, const Point3& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
    friend Point3 operator*(double s, const Point3& v) { return {s * v.x, s * v.y, s * v.z}; }
    friend bool operator==(const Point3&, const Point3&) = default;
};

inline double dot(const Point3& a, const Point3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline double norm(const Point3& v) { return std::sqrt(dot(v, v)); }
inline double distance(const Point3& a, const Point3& b) { return norm(a - b); }

bool is_finite(const Point3& p);

enum class EdgeKind { Upper, Lower };

const char* to_string(EdgeKind kind);

// Horizontal window edge in the facade plane. Floors are 1-based.
struct Edge {
    Point3 endpoint_1;
    Point3 endpoint_2;
    EdgeKind kind = EdgeKind::Upper;
    int floor = 1;

    double height() const { return endpoint_1.z; }
};

struct FloorEdges {
    Edge upper;
    Edge lower;
};

// Node on a floor plane; its height is implied by the floor.
struct NodePosition {
    double x = 0.0;
    double y = 0.0;
    int floor = 1;

    friend bool operator==(const NodePosition&, const NodePosition&) = default;
};

struct BuildingDimensions {
    int num_floors = 7;
    double floor_height = 3.5;
    double length = 20.0;
    double breadth = 20.0;
    double window_height = 1.0;
};

class BuildingModel {
public:
    // Window spans the full floor length.
    explicit BuildingModel(const BuildingDimensions& dims);
    // Window spans [window_x_min, window_x_max] along the facade.
    BuildingModel(const BuildingDimensions& dims, double window_x_min, double window_x_max);

    // Simulation parameters: 7 floors of 3.5 m, 20 m x 20 m footprint, 1 m windows.
    static BuildingModel reference();

    int num_floors() const { return dims_.num_floors; }
    double floor_height() const { return dims_.floor_height; }
    double length() const { return dims_.length; }
    double breadth() const { return dims_.breadth; }
    double window_height() const { return dims_.window_height; }
    double window_x_min() const { return window_x_min_; }
    double window_x_max() const { return window_x_max_; }
    const BuildingDimensions& dimensions() const { return dims_; }

    bool has_floor(int floor) const { return floor >= 1 && floor <= dims_.num_floors; }

    // Mid-height of the floor, where nodes are assumed to sit.
    double node_z(int floor) const;

    FloorEdges edges_for_floor(int floor) const;
    Edge edge(int floor, EdgeKind kind) const;

    Point3 node_point(const NodePosition& node) const;
    bool contains(const NodePosition& node) const;

private:
    void check_floor(int floor) const;

    BuildingDimensions dims_;
    double window_x_min_;
    double window_x_max_;
};

class AnchorConfig {
public:
    // Requires at least three anchors, all finite and strictly outside the facade (y < 0).
    explicit AnchorConfig(std::vector<Point3> anchors);

    // Four anchors on one side of the building with vertical and depth diversity.
    static AnchorConfig reference();

    std::size_t size() const { return anchors_.size(); }
    const Point3& operator[](std::size_t j) const { return anchors_[j]; }
    std::span<const Point3> points() const { return anchors_; }
    auto begin() const { return anchors_.begin(); }
    auto end() const { return anchors_.end(); }

private:
    std::vector<Point3> anchors_;
};

}  // namespace diffpos
