#include <algorithm>
#include <cmath>

#include "diffpos/errors.hpp"
#include "diffpos/estimators.hpp"

namespace diffpos {

namespace {

constexpr double kRankTolerance = 1e-10;

}  // namespace

PositionEstimate lls_estimate(std::span<const double> ranges, const AnchorConfig& anchors) {
    const std::size_t m = anchors.size();
    if (ranges.size() != m) throw DomainError("range count must match anchor count");
    if (m < 4) throw SingularGeometry("3D linear least squares needs at least four anchors");

    // 2 (X_j - X_0)^T p = |X_j|^2 - |X_0|^2 - r_j^2 + r_0^2
    const Point3& ref = anchors[0];
    Eigen::MatrixX3d a(m - 1, 3);
    Eigen::VectorXd b(m - 1);
    for (std::size_t j = 1; j < m; ++j) {
        const Point3 diff = anchors[j] - ref;
        const auto row = static_cast<Eigen::Index>(j - 1);
        a.row(row) << 2.0 * diff.x, 2.0 * diff.y, 2.0 * diff.z;
        b(row) = dot(anchors[j], anchors[j]) - dot(ref, ref) - ranges[j] * ranges[j] + ranges[0] * ranges[0];
    }

    const Eigen::JacobiSVD<Eigen::MatrixX3d> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    if (sv.size() < 3 || !(sv(2) > kRankTolerance * sv(0)))
        throw SingularGeometry("anchor geometry is rank-deficient for 3D linear least squares");
    const Eigen::Vector3d p = svd.solve(b);

    PositionEstimate est;
    est.x = p.x();
    est.y = p.y();
    est.z = p.z();
    const Point3 pos{est.x, est.y, est.z};
    double mismatch = 0.0;
    for (std::size_t j = 0; j < m; ++j) mismatch += std::abs(ranges[j] - distance(pos, anchors[j]));
    est.residual = mismatch / static_cast<double>(m);
    est.iterations = 1;
    est.converged = true;
    return est;
}

PositionEstimate lls_estimate(std::span<const double> ranges, const AnchorConfig& anchors,
                              const BuildingModel& building) {
    PositionEstimate est = lls_estimate(ranges, anchors);
    const double cx = std::clamp(est.x, 0.0, building.length());
    const double cy = std::clamp(est.y, 0.0, building.breadth());
    est.clamped = cx != est.x || cy != est.y;
    est.x = cx;
    est.y = cy;
    const double level = std::round((est.z - building.floor_height() / 2.0) / building.floor_height());
    est.floor = static_cast<int>(std::clamp(level + 1.0, 1.0, static_cast<double>(building.num_floors())));
    return est;
}

}  // namespace diffpos
